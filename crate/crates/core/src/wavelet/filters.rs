use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const HAAR: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

// Daubechies scaling filters, generated by spectral factorization at 60
// digits and rounded to f64. The 14-digit tables in circulation leave the
// sym8 vanishing moments off by ~1e-7.
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

const SYM8: [f64; 16] = [
    0.001889950332767689,
    -0.0003029205147241331,
    -0.014952258337062199,
    0.0038087520138944896,
    0.04913717967373029,
    -0.027219029917103486,
    -0.0519458381078818,
    0.36444189483617895,
    0.777185751699628,
    0.4813596512590534,
    -0.061273359067811076,
    -0.14329423835127267,
    0.007607487324976609,
    0.03169508781152599,
    -0.0005421323318000107,
    -0.0033824159510050028,
];

/// Tolerances for [`WaveletFilter::check`].
pub const SUM_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const SHIFT_TOL: f64 = 1e-12;
pub const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletKind {
    Haar,
    /// 4 vanishing moments, 8 taps.
    Db4,
    /// 8 vanishing moments, 16 taps.
    Sym8,
}

impl WaveletKind {
    pub const ALL: [WaveletKind; 3] = [WaveletKind::Haar, WaveletKind::Db4, WaveletKind::Sym8];

    pub fn name(self) -> &'static str {
        match self {
            WaveletKind::Haar => "haar",
            WaveletKind::Db4 => "db4",
            WaveletKind::Sym8 => "sym8",
        }
    }
}

impl fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletKind::Haar),
            "db4" => Ok(WaveletKind::Db4),
            "sym8" => Ok(WaveletKind::Sym8),
            other => Err(Error::UnknownWavelet(other.to_string())),
        }
    }
}

/// An orthonormal two-channel filter bank.
///
/// The highpass is the quadrature mirror of the lowpass,
/// `g[k] = (-1)^k * h[L-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    kind: WaveletKind,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    vanishing_moments: usize,
}

/// Worst-case deviations from the orthonormal-wavelet identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterResiduals {
    /// |Σh - √2|
    pub sum: f64,
    /// |Σh² - 1|
    pub norm: f64,
    /// max over m ≠ 0 of |Σ h[k] h[k+2m]|
    pub even_shift: f64,
    /// max over 0 ≤ m < vanishing_moments of |Σ g[k] k^m|
    pub moment: f64,
}

impl FilterResiduals {
    pub fn within_tolerance(&self) -> bool {
        self.sum <= SUM_TOL
            && self.norm <= NORM_TOL
            && self.even_shift <= SHIFT_TOL
            && self.moment <= MOMENT_TOL
    }
}

impl WaveletFilter {
    pub fn new(kind: WaveletKind) -> Self {
        let (lowpass, vanishing_moments): (&[f64], usize) = match kind {
            WaveletKind::Haar => (&HAAR, 1),
            WaveletKind::Db4 => (&DB4, 4),
            WaveletKind::Sym8 => (&SYM8, 8),
        };
        let filter = Self::from_lowpass(kind, lowpass.to_vec(), vanishing_moments);
        debug_assert!(filter.check().within_tolerance(), "{kind} table is broken");
        filter
    }

    fn from_lowpass(kind: WaveletKind, lowpass: Vec<f64>, vanishing_moments: usize) -> Self {
        let len = lowpass.len();
        let highpass = (0..len)
            .map(|k| {
                let h = lowpass[len - 1 - k];
                if k % 2 == 0 {
                    h
                } else {
                    -h
                }
            })
            .collect();
        Self {
            kind,
            lowpass,
            highpass,
            vanishing_moments,
        }
    }

    pub fn haar() -> Self {
        Self::new(WaveletKind::Haar)
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn check(&self) -> FilterResiduals {
        let h = &self.lowpass;
        let g = &self.highpass;
        let len = h.len();
        let sum = (h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs();
        let norm = (h.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
        let even_shift = (1..len.div_ceil(2))
            .map(|m| {
                let shift = 2 * m;
                (0..len - shift)
                    .map(|k| h[k] * h[k + shift])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        let moment = (0..self.vanishing_moments)
            .map(|m| {
                g.iter()
                    .enumerate()
                    .map(|(k, gk)| gk * (k as f64).powi(m as i32))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        FilterResiduals {
            sum,
            norm,
            even_shift,
            moment,
        }
    }
}
