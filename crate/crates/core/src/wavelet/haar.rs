//! The Haar transform matrix built directly from the Haar functions.

use super::Matrix;
use crate::error::{Error, Result};

/// Decomposition `k = 2^p + q - 1` with `1 <= q <= 2^p`, for `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarIndex {
    pub k: usize,
    pub p: u32,
    pub q: usize,
}

impl HaarIndex {
    /// Returns `None` for `k = 0`, whose function is the constant `h_0`.
    pub fn from_k(k: usize) -> Option<Self> {
        if k == 0 {
            return None;
        }
        let p = k.ilog2();
        let q = k - (1 << p) + 1;
        Some(Self { k, p, q })
    }

    /// Value of `h_k(m / n)` for an `n`-point basis.
    ///
    /// Support tests are done in integers: `z = m/n` lies in
    /// `[(q-1)/2^p, (q-1/2)/2^p)` iff `2(q-1)n <= 2m·2^p < (2q-1)n`.
    fn sample(&self, m: usize, n: usize) -> f64 {
        let scaled = 2 * m * (1usize << self.p);
        let start = 2 * (self.q - 1) * n;
        let mid = (2 * self.q - 1) * n;
        let end = 2 * self.q * n;
        let amplitude = 2f64.powf(self.p as f64 / 2.0) / (n as f64).sqrt();
        if (start..mid).contains(&scaled) {
            amplitude
        } else if (mid..end).contains(&scaled) {
            -amplitude
        } else {
            0.0
        }
    }
}

/// The `n x n` Haar matrix: row `k` holds `h_k(z)` sampled at `z = m/n`.
///
/// Row 0 is the constant `1/√n`. For `k = 2^p + q - 1`, the row is
/// `+2^(p/2)/√n` on the first half of `[(q-1)/2^p, q/2^p)`, `-2^(p/2)/√n`
/// on the second half and zero elsewhere. The result is orthonormal.
pub fn haar_matrix(n: usize) -> Result<Matrix> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let h0 = 1.0 / (n as f64).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for k in 0..n {
        match HaarIndex::from_k(k) {
            None => data.extend(std::iter::repeat_n(h0, n)),
            Some(idx) => data.extend((0..n).map(|m| idx.sample(m, n))),
        }
    }
    Matrix::new(n, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn index_decomposition() {
        let got: Vec<_> = (1..8)
            .map(|k| {
                let i = HaarIndex::from_k(k).unwrap();
                (i.p, i.q)
            })
            .collect();
        assert_eq!(
            got,
            vec![(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (2, 4)]
        );
        assert!(HaarIndex::from_k(0).is_none());
        for k in 1..1000 {
            let i = HaarIndex::from_k(k).unwrap();
            assert_eq!((1usize << i.p) + i.q - 1, k);
            assert!(i.q >= 1 && i.q <= 1 << i.p);
        }
    }

    #[test]
    fn two_point_matrix() {
        let h = haar_matrix(2).unwrap();
        let expect = [FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        for (a, b) in h.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn four_point_row_two() {
        let h = haar_matrix(4).unwrap();
        let row: Vec<f64> = (0..4).map(|c| h.get(2, c)).collect();
        let expect = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0];
        for (a, b) in row.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{row:?}");
        }
    }

    #[test]
    fn orthonormal() {
        for n in [2, 4, 8, 16, 32, 64] {
            let h = haar_matrix(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|m| h.get(i, m) * h.get(j, m)).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "n={n} ({i},{j}) {dot}");
                }
            }
        }
    }

    #[test]
    fn rejects_non_powers() {
        for n in [0, 1, 3, 6, 12] {
            assert_eq!(haar_matrix(n).unwrap_err(), Error::NotPowerOfTwo(n));
        }
    }
}
