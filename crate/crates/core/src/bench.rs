//! Timing and accuracy experiments over a corpus and a perturbation grid.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use crate::classify::{
    build_database, classify, FeatureDatabase, FeatureMethod, FeatureVector, Threshold,
};
use crate::error::{Error, Result};
use crate::perturb::{hist_equalize, rotate, salt_pepper, Interpolation};
use crate::raster::{CorpusSpec, GrayImage};
use crate::rng::derive_seed;
use crate::wavelet::WaveletKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Haar,
    Db4,
    Sym8,
    Glcm,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 4] = [
        BenchMethod::Haar,
        BenchMethod::Db4,
        BenchMethod::Sym8,
        BenchMethod::Glcm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Haar => "haar",
            BenchMethod::Db4 => "db4",
            BenchMethod::Sym8 => "sym8",
            BenchMethod::Glcm => "glcm",
        }
    }

    pub fn feature_method(self) -> FeatureMethod {
        match self {
            BenchMethod::Haar => FeatureMethod::wavelet(WaveletKind::Haar),
            BenchMethod::Db4 => FeatureMethod::wavelet(WaveletKind::Db4),
            BenchMethod::Sym8 => FeatureMethod::wavelet(WaveletKind::Sym8),
            BenchMethod::Glcm => FeatureMethod::glcm(),
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::BadConfig(format!(
                    "unknown method {s:?} (expected haar, db4, sym8 or glcm)"
                ))
            })
    }
}

/// One cell of the perturbation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    Noise(f64),
    Equalize,
    Rotate(f64),
}

impl Perturbation {
    pub fn family(&self) -> &'static str {
        match self {
            Perturbation::None => "none",
            Perturbation::Noise(_) => "noise",
            Perturbation::Equalize => "equalize",
            Perturbation::Rotate(_) => "rotate",
        }
    }

    /// Applies the perturbation; `seed` only matters for noise.
    pub fn apply(&self, img: &GrayImage, seed: u64) -> Result<GrayImage> {
        match *self {
            Perturbation::None => Ok(img.clone()),
            Perturbation::Noise(d) => salt_pepper(img, d, seed),
            Perturbation::Equalize => Ok(hist_equalize(img)),
            Perturbation::Rotate(deg) => Ok(rotate(img, deg, Interpolation::Nearest)),
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::None => f.write_str("none"),
            Perturbation::Noise(d) => write!(f, "noise({d})"),
            Perturbation::Equalize => f.write_str("equalize"),
            Perturbation::Rotate(deg) => write!(f, "rotate({deg})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub corpus: CorpusSpec,
    pub methods: Vec<BenchMethod>,
    pub noise_densities: Vec<f64>,
    pub rotations: Vec<f64>,
    pub equalize: bool,
    pub repeats: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_NOISE: [f64; 3] = [0.02, 0.05, 0.09];
pub const DEFAULT_ROTATIONS: [f64; 3] = [2.0, 4.0, 30.0];

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusSpec::default_with_seed(DEFAULT_SEED),
            methods: BenchMethod::ALL.to_vec(),
            noise_densities: DEFAULT_NOISE.to_vec(),
            rotations: DEFAULT_ROTATIONS.to_vec(),
            equalize: true,
            repeats: DEFAULT_REPEATS,
            seed: DEFAULT_SEED,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 3 || self.repeats.is_multiple_of(2) {
            return Err(Error::BadConfig(format!(
                "repeats must be odd and >= 3, got {}",
                self.repeats
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::BadConfig("no methods selected".to_string()));
        }
        if let Some(d) = self
            .noise_densities
            .iter()
            .find(|d| !(0.0..=1.0).contains(*d))
        {
            return Err(Error::BadDensity(*d));
        }
        if self.rotations.iter().any(|r| !r.is_finite()) {
            return Err(Error::BadConfig("rotations must be finite".to_string()));
        }
        self.corpus.validate()
    }

    /// Grid cells in report order: none, noise densities, equalize, rotations.
    pub fn perturbations(&self) -> Vec<Perturbation> {
        let mut cells = vec![Perturbation::None];
        cells.extend(self.noise_densities.iter().map(|&d| Perturbation::Noise(d)));
        if self.equalize {
            cells.push(Perturbation::Equalize);
        }
        cells.extend(self.rotations.iter().map(|&r| Perturbation::Rotate(r)));
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: BenchMethod,
    pub perturbation: Perturbation,
    pub median_time_s: f64,
    pub accuracy_pct: f64,
    pub n_images: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// A report together with the per-method databases it classified against.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: BenchReport,
    pub databases: Vec<(BenchMethod, FeatureDatabase)>,
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Times feature extraction over `images` `repeats` times on the calling
/// thread. Returns the median per-image seconds and the features of the
/// first pass.
fn timed_extraction(
    method: &FeatureMethod,
    images: &[GrayImage],
    repeats: usize,
) -> Result<(f64, Vec<FeatureVector>)> {
    if images.is_empty() {
        return Err(Error::EmptyInput);
    }
    if repeats < 3 || repeats.is_multiple_of(2) {
        return Err(Error::BadConfig(format!(
            "repeats must be odd and >= 3, got {repeats}"
        )));
    }
    let mut per_image = Vec::with_capacity(repeats);
    let mut features = Vec::new();
    for rep in 0..repeats {
        let start = Instant::now();
        if rep == 0 {
            for img in images {
                features.push(method.extract(img)?);
            }
        } else {
            for img in images {
                black_box(method.extract(black_box(img))?);
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        per_image.push(elapsed / images.len() as f64);
    }
    // A coarse clock can report zero for tiny inputs; the median is still
    // defined as a positive duration.
    let med = median(&per_image).max(f64::MIN_POSITIVE);
    Ok((med, features))
}

/// Median per-image feature-extraction time in seconds.
pub fn time_extraction(
    method: &FeatureMethod,
    images: &[GrayImage],
    repeats: usize,
) -> Result<f64> {
    timed_extraction(method, images, repeats).map(|(t, _)| t)
}

/// Seed used to perturb corpus image `index`. Independent of the cell, so a
/// lower noise density hits a subset of the pixels of a higher one.
pub fn image_seed(config_seed: u64, index: usize) -> u64 {
    derive_seed(config_seed, index as u64)
}

pub fn run_experiment(config: &BenchConfig) -> Result<Experiment> {
    config.validate()?;
    let corpus = config.corpus.render()?;
    let mut distinct: Vec<&str> = corpus.iter().map(|(l, _)| l.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::BadConfig(
            "corpus needs at least two distinct labels".to_string(),
        ));
    }

    let databases = config
        .methods
        .iter()
        .map(|&m| {
            Ok((
                m,
                build_database(&corpus, &m.feature_method(), Threshold::Auto)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for cell in config.perturbations() {
        let images = corpus
            .iter()
            .enumerate()
            .map(|(i, (_, img))| cell.apply(img, image_seed(config.seed, i)))
            .collect::<Result<Vec<_>>>()?;
        for (method, db) in &databases {
            let (median_time_s, features) =
                timed_extraction(&method.feature_method(), &images, config.repeats)?;
            let truth: Vec<&str> = corpus.iter().map(|(l, _)| l.as_str()).collect();
            rows.push(BenchRow {
                method: *method,
                perturbation: cell,
                median_time_s,
                accuracy_pct: score(db, &features, &truth)?,
                n_images: images.len(),
            });
        }
    }
    Ok(Experiment {
        report: BenchReport { rows },
        databases,
    })
}

pub fn accuracy_experiment(config: &BenchConfig) -> Result<BenchReport> {
    run_experiment(config).map(|e| e.report)
}

/// Percentage of `features` classified (auto threshold) as their `truth`
/// label. Unknown counts as wrong.
pub fn score(db: &FeatureDatabase, features: &[FeatureVector], truth: &[&str]) -> Result<f64> {
    if features.is_empty() || features.len() != truth.len() {
        return Err(Error::BadConfig(format!(
            "{} feature vectors for {} labels",
            features.len(),
            truth.len()
        )));
    }
    let mut correct = 0;
    for (v, label) in features.iter().zip(truth) {
        if classify(v, db, Threshold::Auto)?.label() == Some(*label) {
            correct += 1;
        }
    }
    Ok(accuracy_pct(correct, features.len()))
}

pub fn accuracy_pct(correct: usize, total: usize) -> f64 {
    assert!(total > 0 && correct <= total);
    100.0 * correct as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Csv,
    #[default]
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::BadConfig(format!(
                "unknown format {other:?} (expected csv or markdown)"
            ))),
        }
    }
}

pub const CSV_HEADER: &str = "method,perturbation,median_time_s,accuracy_pct,n_images";

fn family_title(family: &str) -> &'static str {
    match family {
        "none" => "Original images",
        "noise" => "Salt and pepper noise",
        "equalize" => "Histogram equalized",
        _ => "Rotated images",
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{:.4},{:.2},{}\n",
                    r.method, r.perturbation, r.median_time_s, r.accuracy_pct, r.n_images
                ));
            }
        }
        ReportFormat::Markdown => {
            let mut families: Vec<&str> = Vec::new();
            for r in &report.rows {
                if !families.contains(&r.perturbation.family()) {
                    families.push(r.perturbation.family());
                }
            }
            for family in families {
                let rows: Vec<&BenchRow> = report
                    .rows
                    .iter()
                    .filter(|r| r.perturbation.family() == family)
                    .collect();
                let mut methods: Vec<BenchMethod> = Vec::new();
                let mut cells: Vec<Perturbation> = Vec::new();
                for r in &rows {
                    if !methods.contains(&r.method) {
                        methods.push(r.method);
                    }
                    if !cells.contains(&r.perturbation) {
                        cells.push(r.perturbation);
                    }
                }
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("### {}\n\n| perturbation |", family_title(family)));
                for m in &methods {
                    out.push_str(&format!(" {m} time (s) | {m} accuracy (%) |"));
                }
                out.push_str("\n|---|");
                out.push_str(&"---:|---:|".repeat(methods.len()));
                out.push('\n');
                for cell in &cells {
                    out.push_str(&format!("| {cell} |"));
                    for m in &methods {
                        match rows
                            .iter()
                            .find(|r| r.method == *m && r.perturbation == *cell)
                        {
                            Some(r) => out.push_str(&format!(
                                " {:.4} | {:.2} |",
                                r.median_time_s, r.accuracy_pct
                            )),
                            None => out.push_str(" - | - |"),
                        }
                    }
                    out.push('\n');
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::TextureKind;

    fn row(method: BenchMethod, p: Perturbation, t: f64, acc: f64) -> BenchRow {
        BenchRow {
            method,
            perturbation: p,
            median_time_s: t,
            accuracy_pct: acc,
            n_images: 10,
        }
    }

    #[test]
    fn median_picks_middle() {
        assert_eq!(median(&[1.0, 2.0, 100.0]), 2.0);
        assert_eq!(median(&[100.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn accuracy_ratio() {
        assert_eq!(accuracy_pct(3, 4), 75.0);
        assert_eq!(accuracy_pct(0, 9), 0.0);
        assert_eq!(accuracy_pct(9, 9), 100.0);
    }

    #[test]
    fn csv_line_format() {
        let report = BenchReport {
            rows: vec![row(BenchMethod::Haar, Perturbation::None, 0.1805, 100.0)],
        };
        let csv = emit_report(&report, ReportFormat::Csv).unwrap();
        assert_eq!(csv, format!("{CSV_HEADER}\nhaar,none,0.1805,100.00,10\n"));
    }

    #[test]
    fn empty_report_is_an_error() {
        for format in [ReportFormat::Csv, ReportFormat::Markdown] {
            assert_eq!(
                emit_report(&BenchReport::default(), format).unwrap_err(),
                Error::EmptyReport
            );
        }
    }

    #[test]
    fn markdown_has_one_table_per_family() {
        let report = BenchReport {
            rows: vec![
                row(BenchMethod::Haar, Perturbation::None, 0.1, 100.0),
                row(BenchMethod::Glcm, Perturbation::None, 0.5, 100.0),
                row(BenchMethod::Haar, Perturbation::Noise(0.02), 0.1, 80.0),
                row(BenchMethod::Glcm, Perturbation::Noise(0.02), 0.5, 70.0),
                row(BenchMethod::Haar, Perturbation::Noise(0.05), 0.1, 70.0),
                row(BenchMethod::Glcm, Perturbation::Noise(0.05), 0.5, 22.5),
            ],
        };
        let md = emit_report(&report, ReportFormat::Markdown).unwrap();
        assert_eq!(md.matches("### ").count(), 2);
        assert_eq!(md.matches("|---|").count(), 2);
        assert!(
            md.contains("| noise(0.05) | 0.1000 | 70.00 | 0.5000 | 22.50 |"),
            "{md}"
        );
        assert!(md.contains("| perturbation | haar time (s) | haar accuracy (%) | glcm time (s) |"));
    }

    #[test]
    fn perturbation_labels() {
        let labels: Vec<String> = BenchConfig::default()
            .perturbations()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(
            labels,
            [
                "none",
                "noise(0.02)",
                "noise(0.05)",
                "noise(0.09)",
                "equalize",
                "rotate(2)",
                "rotate(4)",
                "rotate(30)"
            ]
        );
    }

    #[test]
    fn config_validation() {
        let mut c = BenchConfig {
            repeats: 4,
            ..BenchConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().kind(), "BadConfig");
        c.repeats = 1;
        assert!(c.validate().is_err());
        let mut c = BenchConfig::default();
        c.methods.clear();
        assert!(c.validate().is_err());
        let mut c = BenchConfig::default();
        c.noise_densities.push(2.0);
        assert_eq!(c.validate().unwrap_err(), Error::BadDensity(2.0));
        assert!(BenchConfig::default().validate().is_ok());
    }

    #[test]
    fn timing_is_positive() {
        let images = vec![GrayImage::filled(8, 8, 1)];
        for m in BenchMethod::ALL {
            assert!(time_extraction(&m.feature_method(), &images, 3).unwrap() > 0.0);
        }
        assert!(time_extraction(&FeatureMethod::glcm(), &[], 3).is_err());
        assert!(time_extraction(&FeatureMethod::glcm(), &images, 2).is_err());
    }

    fn small_config(kinds: Vec<TextureKind>) -> BenchConfig {
        BenchConfig {
            corpus: CorpusSpec {
                kinds,
                size: 32,
                seed: 1,
            },
            methods: vec![BenchMethod::Haar, BenchMethod::Glcm],
            repeats: 3,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn needs_two_labels() {
        let c = small_config(vec![
            TextureKind::Constant { value: 3 },
            TextureKind::Constant { value: 3 },
        ]);
        assert_eq!(accuracy_experiment(&c).unwrap_err().kind(), "BadConfig");
    }

    #[test]
    fn small_experiment_shape() {
        let c = small_config(vec![
            TextureKind::Checkerboard { period: 2 },
            TextureKind::Grating {
                frequency: 4.0,
                orientation: 0.0,
            },
            TextureKind::Noise { seed: 1 },
        ]);
        let report = accuracy_experiment(&c).unwrap();
        assert_eq!(report.rows.len(), 8 * 2);
        for r in &report.rows {
            assert_eq!(r.n_images, 3);
            assert!((0.0..=100.0).contains(&r.accuracy_pct));
            if r.perturbation == Perturbation::None {
                assert_eq!(r.accuracy_pct, 100.0);
            }
        }
    }

    #[test]
    fn scoring() {
        use crate::classify::{DbRow, FeatureScheme};
        let v = |x: f64| FeatureVector::new(FeatureScheme::Glcm4, vec![x, 0.0, 0.0, 0.0]).unwrap();
        let db = FeatureDatabase::new(
            FeatureScheme::Glcm4,
            vec![
                DbRow {
                    label: "a".into(),
                    vector: v(0.0),
                },
                DbRow {
                    label: "b".into(),
                    vector: v(10.0),
                },
            ],
            Threshold::Auto,
        )
        .unwrap();
        // Every query sits next to the other label.
        assert_eq!(score(&db, &[v(9.0), v(1.0)], &["a", "b"]).unwrap(), 0.0);
        assert_eq!(
            score(
                &db,
                &[v(1.0), v(9.0), v(8.0), v(7.0)],
                &["a", "b", "b", "a"]
            )
            .unwrap(),
            75.0
        );
        assert!(score(&db, &[v(1.0)], &[]).is_err());
    }
}
