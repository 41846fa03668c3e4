//! Feature vectors, the labelled feature database and the minimum-distance
//! classifier, plus the wavelet subband-energy feature extractor.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::glcm::{glcm_features, GlcmParams};
use crate::raster::GrayImage;
use crate::wavelet::{pyramid_rows, Subband, WaveletFilter, WaveletKind, DEFAULT_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureScheme {
    /// `[E(cH1), E(cV1), E(cH2), E(cV2), E(cH3), E(cV3), E(cA3)]`
    Wavelet7,
    /// GLCM energies at 0°, 45°, 90°, 135°.
    Glcm4,
}

impl FeatureScheme {
    pub fn name(self) -> &'static str {
        match self {
            FeatureScheme::Wavelet7 => "wavelet-7",
            FeatureScheme::Glcm4 => "glcm-4",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            FeatureScheme::Wavelet7 => 7,
            FeatureScheme::Glcm4 => 4,
        }
    }
}

impl fmt::Display for FeatureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wavelet-7" => Ok(FeatureScheme::Wavelet7),
            "glcm-4" => Ok(FeatureScheme::Glcm4),
            other => Err(Error::BadConfig(format!(
                "unknown feature scheme {other:?} (expected wavelet-7 or glcm-4)"
            ))),
        }
    }
}

/// A finite feature vector tagged with the scheme that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    scheme: FeatureScheme,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(scheme: FeatureScheme, values: Vec<f64>) -> Result<Self> {
        if values.len() != scheme.dimension() {
            return Err(Error::BadDatabase(format!(
                "{scheme} vectors have {} values, got {}",
                scheme.dimension(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadDatabase(format!("non-finite feature value {v}")));
        }
        Ok(Self { scheme, values })
    }

    pub fn scheme(&self) -> FeatureScheme {
        self.scheme
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.scheme,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// How a subband is reduced to one energy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EnergyMode {
    /// Σ|c| / (rows·cols)
    #[default]
    MeanAbs,
    /// Σc / (rows·cols). Detail subbands are close to zero-mean, so this
    /// mostly discards them.
    MeanSigned,
    /// Σc² / (rows·cols)
    MeanSquare,
}

impl EnergyMode {
    pub fn name(self) -> &'static str {
        match self {
            EnergyMode::MeanAbs => "mean_abs",
            EnergyMode::MeanSigned => "mean_signed",
            EnergyMode::MeanSquare => "mean_square",
        }
    }
}

impl FromStr for EnergyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_abs" => Ok(EnergyMode::MeanAbs),
            "mean_signed" => Ok(EnergyMode::MeanSigned),
            "mean_square" => Ok(EnergyMode::MeanSquare),
            other => Err(Error::BadConfig(format!(
                "unknown energy mode {other:?} (expected mean_abs, mean_signed or mean_square)"
            ))),
        }
    }
}

impl EnergyMode {
    fn accumulate(self, acc: f64, coeffs: &[f64]) -> f64 {
        match self {
            EnergyMode::MeanAbs => coeffs.iter().fold(acc, |s, c| s + c.abs()),
            EnergyMode::MeanSigned => coeffs.iter().fold(acc, |s, c| s + c),
            EnergyMode::MeanSquare => coeffs.iter().fold(acc, |s, c| s + c * c),
        }
    }
}

pub fn subband_energy(s: &Subband, mode: EnergyMode) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySubband);
    }
    Ok(mode.accumulate(0.0, s.coeffs()) / s.coeffs().len() as f64)
}

/// Three-level decomposition reduced to seven energies. The diagonal
/// subbands do not contribute, and no detail subband is stored.
pub fn wavelet_features(
    img: &GrayImage,
    filter: &WaveletFilter,
    mode: EnergyMode,
) -> Result<FeatureVector> {
    let mut sums = [0.0; 2 * DEFAULT_LEVELS];
    let load = |r: usize, buf: &mut [f64]| {
        for (b, &p) in buf.iter_mut().zip(img.row(r)) {
            *b = f64::from(p);
        }
    };
    let approx = pyramid_rows(
        img.height(),
        img.width(),
        filter,
        DEFAULT_LEVELS,
        load,
        |level, _, out| {
            let at = 2 * (level - 1);
            sums[at] = mode.accumulate(sums[at], out.ch);
            sums[at + 1] = mode.accumulate(sums[at + 1], out.cv);
        },
    )?;
    let mut values = Vec::with_capacity(2 * DEFAULT_LEVELS + 1);
    for (i, sum) in sums.iter().enumerate() {
        let size = (img.height() >> (i / 2 + 1)) * (img.width() >> (i / 2 + 1));
        values.push(sum / size as f64);
    }
    values.push(subband_energy(&approx, mode)?);
    FeatureVector::new(FeatureScheme::Wavelet7, values)
}

/// A feature extractor with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMethod {
    Wavelet {
        filter: WaveletFilter,
        mode: EnergyMode,
    },
    Glcm(GlcmParams),
}

impl FeatureMethod {
    pub fn wavelet(kind: WaveletKind) -> Self {
        FeatureMethod::Wavelet {
            filter: WaveletFilter::new(kind),
            mode: EnergyMode::default(),
        }
    }

    pub fn glcm() -> Self {
        FeatureMethod::Glcm(GlcmParams::default())
    }

    pub fn scheme(&self) -> FeatureScheme {
        match self {
            FeatureMethod::Wavelet { .. } => FeatureScheme::Wavelet7,
            FeatureMethod::Glcm(_) => FeatureScheme::Glcm4,
        }
    }

    pub fn extract(&self, img: &GrayImage) -> Result<FeatureVector> {
        match self {
            FeatureMethod::Wavelet { filter, mode } => wavelet_features(img, filter, *mode),
            FeatureMethod::Glcm(params) => glcm_features(img, *params),
        }
    }
}

pub fn euclidean(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.scheme != b.scheme {
        return Err(Error::SchemeMismatch {
            left: a.scheme.to_string(),
            right: b.scheme.to_string(),
        });
    }
    Ok(squared_distance(&a.values, &b.values).sqrt())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Rejection threshold on the nearest-neighbour distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Threshold {
    /// Three times the largest nearest same-label distance in the database;
    /// unbounded when no label has two exemplars.
    #[default]
    Auto,
    Fixed(f64),
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threshold::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t >= 0.0 => Ok(Threshold::Fixed(t)),
            _ => Err(Error::BadThreshold(format!(
                "threshold must be \"auto\" or a non-negative number, got {s:?}"
            ))),
        }
    }
}

pub const AUTO_THRESHOLD_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DbRow {
    pub label: String,
    pub vector: FeatureVector,
}

/// Labelled feature vectors of one scheme. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDatabase {
    scheme: FeatureScheme,
    rows: Vec<DbRow>,
    threshold: f64,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains([',', '\n', '\r']) {
        return Err(Error::BadLabel(format!(
            "labels must be non-empty without commas or newlines, got {label:?}"
        )));
    }
    Ok(())
}

impl FeatureDatabase {
    pub fn new(scheme: FeatureScheme, rows: Vec<DbRow>, threshold: Threshold) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        for row in &rows {
            check_label(&row.label)?;
            if row.vector.scheme != scheme {
                return Err(Error::SchemeMismatch {
                    left: scheme.to_string(),
                    right: row.vector.scheme.to_string(),
                });
            }
        }
        let mut db = Self {
            scheme,
            rows,
            threshold: f64::INFINITY,
        };
        db.threshold = db.resolve(threshold);
        Ok(db)
    }

    pub fn scheme(&self) -> FeatureScheme {
        self.scheme
    }

    pub fn rows(&self) -> &[DbRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The threshold resolved when the database was built.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn auto_threshold(&self) -> f64 {
        let mut widest: Option<f64> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let nearest = self
                .rows
                .iter()
                .enumerate()
                .filter(|&(j, other)| j != i && other.label == row.label)
                .map(|(_, other)| squared_distance(&row.vector.values, &other.vector.values))
                .fold(None, |acc: Option<f64>, d| {
                    Some(acc.map_or(d, |a| a.min(d)))
                });
            if let Some(d) = nearest {
                widest = Some(widest.map_or(d, |w| w.max(d)));
            }
        }
        widest.map_or(f64::INFINITY, |d| AUTO_THRESHOLD_FACTOR * d.sqrt())
    }

    pub fn resolve(&self, threshold: Threshold) -> f64 {
        match threshold {
            Threshold::Auto => self.auto_threshold(),
            Threshold::Fixed(t) => t,
        }
    }

    /// CSV with header `scheme,label,f1..fn`; values carry 17 significant
    /// digits so they parse back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,label");
        for i in 1..=self.scheme.dimension() {
            out.push_str(&format!(",f{i}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(self.scheme.name());
            out.push(',');
            out.push_str(&row.label);
            for v in &row.vector.values {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, threshold: Threshold) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::BadDatabase("missing header line".to_string()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.len() < 3 || columns[0] != "scheme" || columns[1] != "label" {
            return Err(Error::BadDatabase(format!("bad header {header:?}")));
        }
        let width = columns.len() - 2;
        if columns[2..]
            .iter()
            .enumerate()
            .any(|(i, c)| *c != format!("f{}", i + 1))
        {
            return Err(Error::BadDatabase(format!("bad header {header:?}")));
        }

        let mut scheme = None;
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != width + 2 {
                return Err(Error::BadDatabase(format!(
                    "row {} has {} fields, expected {}",
                    n + 1,
                    fields.len(),
                    width + 2
                )));
            }
            let row_scheme: FeatureScheme = fields[0].parse()?;
            if *scheme.get_or_insert(row_scheme) != row_scheme {
                return Err(Error::SchemeMismatch {
                    left: scheme.unwrap().to_string(),
                    right: row_scheme.to_string(),
                });
            }
            let values = fields[2..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::BadDatabase(format!("row {}: bad value {f:?}", n + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(DbRow {
                label: fields[1].to_string(),
                vector: FeatureVector::new(row_scheme, values)?,
            });
        }
        let scheme = scheme.ok_or(Error::EmptyInput)?;
        Self::new(scheme, rows, threshold)
    }
}

/// One database row per item, in input order.
pub fn build_database(
    items: &[(String, GrayImage)],
    method: &FeatureMethod,
    threshold: Threshold,
) -> Result<FeatureDatabase> {
    if items.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = items
        .iter()
        .map(|(label, img)| {
            check_label(label)?;
            Ok(DbRow {
                label: label.clone(),
                vector: method.extract(img)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureDatabase::new(method.scheme(), rows, threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Match {
        label: String,
        row: usize,
        distance: f64,
    },
    Unknown {
        distance: f64,
    },
}

impl Classification {
    pub fn label(&self) -> Option<&str> {
        match self {
            Classification::Match { label, .. } => Some(label),
            Classification::Unknown { .. } => None,
        }
    }

    pub fn distance(&self) -> f64 {
        match self {
            Classification::Match { distance, .. } | Classification::Unknown { distance } => {
                *distance
            }
        }
    }
}

/// Nearest row by Euclidean distance, rejected as unknown when farther than
/// the threshold. Ties go to the lowest row index.
pub fn classify(
    v: &FeatureVector,
    db: &FeatureDatabase,
    threshold: Threshold,
) -> Result<Classification> {
    if v.scheme != db.scheme {
        return Err(Error::SchemeMismatch {
            left: v.scheme.to_string(),
            right: db.scheme.to_string(),
        });
    }
    let mut best = (0, f64::INFINITY);
    for (i, row) in db.rows.iter().enumerate() {
        let d = squared_distance(&v.values, &row.vector.values);
        if d < best.1 {
            best = (i, d);
        }
    }
    let (row, distance) = (best.0, best.1.sqrt());
    let limit = match threshold {
        Threshold::Auto => db.threshold,
        Threshold::Fixed(t) => t,
    };
    if distance <= limit {
        Ok(Classification::Match {
            label: db.rows[row].label.clone(),
            row,
            distance,
        })
    } else {
        Ok(Classification::Unknown { distance })
    }
}
