use thiserror::Error;

/// Every domain failure the toolkit can report.
///
/// The variant name doubles as the machine-readable error kind printed by
/// the CLI (`error: <kind>: <detail>`), see [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // raster
    #[error("expected magic \"P5\", found {0:?}")]
    BadMagic(String),
    #[error("maxval must be 255, found {0}")]
    UnsupportedMaxval(u64),
    #[error("payload holds {got} bytes, header requires {expected}")]
    Truncated { expected: usize, got: usize },
    #[error("{0}")]
    MalformedHeader(String),
    #[error("size must be a power of two >= 8, got {0}")]
    BadSize(usize),
    #[error("{0}")]
    BadImage(String),
    #[error("{0}")]
    BadDescriptor(String),

    // perturb
    #[error("density must lie in [0, 1], got {0}")]
    BadDensity(f64),

    // wavelet
    #[error("signal length {0} is not even and >= 2")]
    OddLength(usize),
    #[error("approximation has {approx} coefficients, detail has {detail}")]
    LengthMismatch { approx: usize, detail: usize },
    #[error("matrix is {rows}x{cols}, both dimensions must be even")]
    OddDimension { rows: usize, cols: usize },
    #[error("{rows}x{cols} is not divisible by 2^{levels}")]
    NotDivisible {
        rows: usize,
        cols: usize,
        levels: usize,
    },
    #[error("{0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("unknown wavelet {0:?} (expected haar, db4 or sym8)")]
    UnknownWavelet(String),

    // glcm
    #[error("gray levels must lie in [2, 256], got {0}")]
    BadLevels(usize),
    #[error("offset (0, 0) is not a co-occurrence displacement")]
    ZeroOffset,
    #[error("offset ({drow}, {dcol}) does not fit a {height}x{width} image")]
    OffsetTooLarge {
        drow: isize,
        dcol: isize,
        height: usize,
        width: usize,
    },
    #[error("co-occurrence matrix has no counts")]
    EmptyGlcm,

    // classify
    #[error("subband has no coefficients")]
    EmptySubband,
    #[error("feature scheme {left} does not match {right}")]
    SchemeMismatch { left: String, right: String },
    #[error("no items to build a database from")]
    EmptyInput,
    #[error("{0}")]
    BadLabel(String),
    #[error("{0}")]
    BadDatabase(String),
    #[error("{0}")]
    BadThreshold(String),

    // bench
    #[error("report has no rows")]
    EmptyReport,
    #[error("{0}")]
    BadConfig(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BadMagic(_) => "BadMagic",
            Error::UnsupportedMaxval(_) => "UnsupportedMaxval",
            Error::Truncated { .. } => "Truncated",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::BadSize(_) => "BadSize",
            Error::BadImage(_) => "BadImage",
            Error::BadDescriptor(_) => "BadDescriptor",
            Error::BadDensity(_) => "BadDensity",
            Error::OddLength(_) => "OddLength",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::OddDimension { .. } => "OddDimension",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::NotPowerOfTwo(_) => "NotPowerOfTwo",
            Error::UnknownWavelet(_) => "UnknownWavelet",
            Error::BadLevels(_) => "BadLevels",
            Error::ZeroOffset => "ZeroOffset",
            Error::OffsetTooLarge { .. } => "OffsetTooLarge",
            Error::EmptyGlcm => "EmptyGlcm",
            Error::EmptySubband => "EmptySubband",
            Error::SchemeMismatch { .. } => "SchemeMismatch",
            Error::EmptyInput => "EmptyInput",
            Error::BadLabel(_) => "BadLabel",
            Error::BadDatabase(_) => "BadDatabase",
            Error::BadThreshold(_) => "BadThreshold",
            Error::EmptyReport => "EmptyReport",
            Error::BadConfig(_) => "BadConfig",
            Error::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
