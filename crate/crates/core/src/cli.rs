//! The `texbench` command line.
//!
//! Exit codes: 0 on success, 1 on a domain error (printed as
//! `error: <kind>: <detail>`), 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    emit_report, run_experiment, BenchConfig, BenchMethod, ReportFormat, DEFAULT_SEED,
};
use crate::classify::{
    build_database, classify, subband_energy, Classification, EnergyMode, FeatureDatabase,
    FeatureMethod, FeatureScheme, Threshold,
};
use crate::error::{Error, Result};
use crate::glcm::{glcm_features, GlcmParams, DEFAULT_LEVELS};
use crate::perturb::{hist_equalize, rotate, salt_pepper, Interpolation};
use crate::raster::{read_pgm_file, save_pgm, synth_texture, CorpusSpec, GrayImage, TextureKind};
use crate::wavelet::{decompose, Subband, WaveletFilter, WaveletKind};

#[derive(Debug, Parser)]
#[command(
    name = "texbench",
    version,
    about = "Wavelet and co-occurrence texture classification benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic texture as a binary PGM.
    Synth(SynthArgs),
    /// Apply noise, equalization and/or rotation to a PGM (in that order).
    Perturb(PerturbArgs),
    /// Print per-subband energies of a wavelet decomposition as CSV.
    Decompose(DecomposeArgs),
    /// Print the four directional GLCM energies of an image as CSV.
    Glcm(GlcmArgs),
    /// Build a feature database CSV from labelled images.
    BuildDb(BuildDbArgs),
    /// Classify an image against a feature database.
    Classify(ClassifyArgs),
    /// Run the timing and accuracy experiment grid.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Texture descriptor, e.g. checkerboard:8, grating:4:30, noise:1, constant:200
    #[arg(long)]
    kind: String,
    /// Side length in pixels (power of two, at least 8)
    #[arg(long, default_value_t = CorpusSpec::DEFAULT_SIZE)]
    size: usize,
    /// Seed for noise textures
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("op").required(true).multiple(true).args(["noise", "equalize", "rotate"])))]
struct PerturbArgs {
    /// Salt-and-pepper density in [0, 1]
    #[arg(long)]
    noise: Option<f64>,
    /// Seed for the noise positions
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Histogram-equalize
    #[arg(long)]
    equalize: bool,
    /// Counter-clockwise rotation in degrees (nearest neighbour, same size)
    #[arg(long, allow_negative_numbers = true)]
    rotate: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input PGM
    input: PathBuf,
}

#[derive(Debug, Args)]
struct WaveletOpts {
    /// Wavelet: haar, db4 or sym8
    #[arg(long, default_value = "haar")]
    wavelet: String,
    /// Subband energy: mean_abs, mean_signed or mean_square
    #[arg(long, default_value = "mean_abs")]
    energy: String,
}

#[derive(Debug, Args)]
struct GlcmOpts {
    /// Number of gray levels for quantization
    #[arg(long = "levels", default_value_t = DEFAULT_LEVELS)]
    gray_levels: usize,
    /// Use raw sums of squared counts instead of normalized energy
    #[arg(long)]
    raw: bool,
}

impl GlcmOpts {
    fn params(&self) -> GlcmParams {
        GlcmParams {
            levels: self.gray_levels,
            normalize: !self.raw,
        }
    }
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Wavelet: haar, db4 or sym8
    #[arg(long, default_value = "haar")]
    wavelet: String,
    /// Number of decomposition levels
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Input PGM
    input: PathBuf,
}

#[derive(Debug, Args)]
struct GlcmArgs {
    #[command(flatten)]
    glcm: GlcmOpts,
    /// Input PGM
    input: PathBuf,
}

#[derive(Debug, Args)]
struct BuildDbArgs {
    /// Feature scheme: wavelet-7 or glcm-4
    #[arg(long)]
    scheme: String,
    #[command(flatten)]
    wavelet: WaveletOpts,
    #[command(flatten)]
    glcm: GlcmOpts,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Labelled images as label=path.pgm
    #[arg(required = true)]
    items: Vec<String>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Feature database CSV
    #[arg(long)]
    db: PathBuf,
    /// Rejection threshold: "auto" or a non-negative distance
    #[arg(long, default_value = "auto")]
    threshold: String,
    #[command(flatten)]
    wavelet: WaveletOpts,
    #[command(flatten)]
    glcm: GlcmOpts,
    /// Image to classify
    input: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// "default" or a comma-separated list of texture descriptors
    #[arg(long, default_value = "default")]
    corpus: String,
    /// Corpus side length in pixels
    #[arg(long, default_value_t = CorpusSpec::DEFAULT_SIZE)]
    size: usize,
    /// Comma-separated subset of haar, db4, sym8, glcm
    #[arg(long, default_value = "haar,db4,sym8,glcm", value_delimiter = ',')]
    methods: Vec<String>,
    /// Salt-and-pepper densities
    #[arg(long, default_value = "0.02,0.05,0.09", value_delimiter = ',')]
    noise: Vec<f64>,
    /// Rotation angles in degrees
    #[arg(
        long,
        default_value = "2,4,30",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    rotations: Vec<f64>,
    /// Skip the histogram-equalization cell
    #[arg(long)]
    no_equalize: bool,
    /// Timing repeats per cell (odd, at least 3)
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Seed for the corpus and the perturbations
    #[arg(long, env = "TEXBENCH_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report format: csv or markdown
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write each method's feature database as <dir>/<method>.csv
    #[arg(long)]
    db_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {}", e.kind(), e);
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(a) => {
            let kind: TextureKind = a.kind.parse()?;
            let img = synth_texture(&kind, a.size, a.seed)?;
            emit(out, a.out.as_deref(), &save_pgm(&img))
        }
        Command::Perturb(a) => {
            let mut img = read_pgm_file(&a.input)?;
            if let Some(d) = a.noise {
                img = salt_pepper(&img, d, a.seed)?;
            }
            if a.equalize {
                img = hist_equalize(&img);
            }
            if let Some(deg) = a.rotate {
                img = rotate(&img, deg, Interpolation::Nearest);
            }
            emit(out, a.out.as_deref(), &save_pgm(&img))
        }
        Command::Decompose(a) => {
            let filter = WaveletFilter::new(a.wavelet.parse()?);
            let img = read_pgm_file(&a.input)?;
            let dec = decompose(&img, &filter, a.levels)?;
            let mut csv =
                String::from("level,subband,rows,cols,mean_abs,mean_signed,mean_square\n");
            let mut line = |level: usize, name: &str, s: &Subband| -> Result<()> {
                csv.push_str(&format!(
                    "{level},{name},{},{},{},{},{}\n",
                    s.rows(),
                    s.cols(),
                    subband_energy(s, EnergyMode::MeanAbs)?,
                    subband_energy(s, EnergyMode::MeanSigned)?,
                    subband_energy(s, EnergyMode::MeanSquare)?,
                ));
                Ok(())
            };
            for (i, level) in dec.levels.iter().enumerate() {
                line(i + 1, "cH", &level.ch)?;
                line(i + 1, "cV", &level.cv)?;
                line(i + 1, "cD", &level.cd)?;
            }
            line(dec.levels.len(), "cA", &dec.approx)?;
            emit(out, None, csv.as_bytes())
        }
        Command::Glcm(a) => {
            let img = read_pgm_file(&a.input)?;
            let f = glcm_features(&img, a.glcm.params())?;
            let values: Vec<String> = f.values().iter().map(|v| format!("{v:.16e}")).collect();
            let csv = format!("e0,e45,e90,e135\n{}\n", values.join(","));
            emit(out, None, csv.as_bytes())
        }
        Command::BuildDb(a) => {
            let scheme: FeatureScheme = a.scheme.parse()?;
            let method = feature_method(scheme, &a.wavelet, &a.glcm)?;
            let items = a
                .items
                .iter()
                .map(|item| {
                    let (label, path) = item.split_once('=').ok_or_else(|| {
                        Error::BadLabel(format!("expected label=path.pgm, got {item:?}"))
                    })?;
                    Ok((label.to_string(), read_pgm_file(path)?))
                })
                .collect::<Result<Vec<(String, GrayImage)>>>()?;
            let db = build_database(&items, &method, Threshold::Auto)?;
            emit(out, a.out.as_deref(), db.to_csv().as_bytes())
        }
        Command::Classify(a) => {
            let threshold: Threshold = a.threshold.parse()?;
            let text = std::fs::read_to_string(&a.db).map_err(|e| Error::io(&a.db, e))?;
            let db = FeatureDatabase::from_csv(&text, Threshold::Auto)?;
            let method = feature_method(db.scheme(), &a.wavelet, &a.glcm)?;
            let img = read_pgm_file(&a.input)?;
            let result = classify(&method.extract(&img)?, &db, threshold)?;
            let line = match &result {
                Classification::Match {
                    label, distance, ..
                } => format!("{label},{distance}\n"),
                Classification::Unknown { distance } => format!("UNKNOWN,{distance}\n"),
            };
            emit(out, None, line.as_bytes())
        }
        Command::Bench(a) => {
            let format: ReportFormat = a.format.parse()?;
            let config = bench_config(&a)?;
            let experiment = run_experiment(&config)?;
            if let Some(dir) = &a.db_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                for (method, db) in &experiment.databases {
                    let path = dir.join(format!("{method}.csv"));
                    std::fs::write(&path, db.to_csv()).map_err(|e| Error::io(&path, e))?;
                }
            }
            let report = emit_report(&experiment.report, format)?;
            emit(out, a.out.as_deref(), report.as_bytes())
        }
    }
}

fn feature_method(
    scheme: FeatureScheme,
    wavelet: &WaveletOpts,
    glcm: &GlcmOpts,
) -> Result<FeatureMethod> {
    Ok(match scheme {
        FeatureScheme::Wavelet7 => {
            let kind: WaveletKind = wavelet.wavelet.parse()?;
            FeatureMethod::Wavelet {
                filter: WaveletFilter::new(kind),
                mode: wavelet.energy.parse()?,
            }
        }
        FeatureScheme::Glcm4 => FeatureMethod::Glcm(glcm.params()),
    })
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig> {
    let mut corpus = if a.corpus == "default" {
        CorpusSpec::default_with_seed(a.seed)
    } else {
        let kinds = a
            .corpus
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<TextureKind>>>()?;
        CorpusSpec {
            kinds,
            size: a.size,
            seed: a.seed,
        }
    };
    corpus.size = a.size;
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<Vec<BenchMethod>>>()?;
    Ok(BenchConfig {
        corpus,
        methods,
        noise_densities: a.noise.clone(),
        rotations: a.rotations.clone(),
        equalize: !a.no_equalize,
        repeats: a.repeats,
        seed: a.seed,
    })
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => out.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}
