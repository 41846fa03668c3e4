//! Periodized orthonormal discrete wavelet transforms.
//!
//! Every transform here is circular convolution followed by downsampling by
//! two, so each level is an orthogonal change of basis: coefficient energy
//! equals signal energy and the inverse is the transpose.
//!
//! Coefficient `i` of a level reads the input window starting at `2i`:
//!
//! ```text
//! approx[i] = Σ_k h[k] x[(2i + k) mod n]
//! detail[i] = Σ_k g[k] x[(2i + k) mod n]
//! ```

mod filters;
mod haar;

pub use filters::{
    FilterResiduals, WaveletFilter, WaveletKind, MOMENT_TOL, NORM_TOL, SHIFT_TOL, SUM_TOL,
};
pub use haar::{haar_matrix, HaarIndex};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
}

/// One coefficient block of a 2D transform level (cA, cH, cV or cD).
pub type Subband = Matrix;

impl Matrix {
    pub fn new(rows: usize, cols: usize, coeffs: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(coeffs.len()) {
            return Err(Error::BadImage(format!(
                "{rows}x{cols} matrix needs {} coefficients, got {}",
                rows.saturating_mul(cols),
                coeffs.len()
            )));
        }
        Ok(Self { rows, cols, coeffs })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut coeffs = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                coeffs.push(f(r, c));
            }
        }
        Self { rows, cols, coeffs }
    }

    /// Pixel intensities as reals in 0..=255, unscaled.
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            rows: img.height(),
            cols: img.width(),
            coeffs: img.pixels().iter().map(|&p| f64::from(p)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.coeffs[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.coeffs[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn sum_squares(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum()
    }
}

/// One analysis step over a full signal. `approx` and `detail` must hold
/// `x.len() / 2` values each.
fn analyze(x: &[f64], filter: &WaveletFilter, approx: &mut [f64], detail: &mut [f64]) {
    let (lo, hi) = (filter.lowpass(), filter.highpass());
    match lo.len() {
        2 => analyze_taps::<2>(x, lo, hi, approx, detail),
        8 => analyze_taps::<8>(x, lo, hi, approx, detail),
        16 => analyze_taps::<16>(x, lo, hi, approx, detail),
        _ => analyze_wrapped(x, lo, hi, approx, detail, 0),
    }
}

/// Outputs whose window fits inside `x` use a fixed-size window; the rest
/// wrap around.
fn analyze_taps<const L: usize>(
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    approx: &mut [f64],
    detail: &mut [f64],
) {
    let lo: &[f64; L] = lo.try_into().expect("filter length");
    let hi: &[f64; L] = hi.try_into().expect("filter length");
    let inside = if x.len() >= L {
        (x.len() - L) / 2 + 1
    } else {
        0
    };
    let (a_in, d_in) = (&mut approx[..inside], &mut detail[..inside]);
    for i in 0..inside {
        let w: &[f64; L] = x[2 * i..2 * i + L].try_into().expect("window length");
        let (mut sa, mut sd) = (0.0, 0.0);
        for k in 0..L {
            sa += lo[k] * w[k];
            sd += hi[k] * w[k];
        }
        a_in[i] = sa;
        d_in[i] = sd;
    }
    analyze_wrapped(x, lo, hi, approx, detail, inside);
}

fn analyze_wrapped(
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    approx: &mut [f64],
    detail: &mut [f64],
    from: usize,
) {
    let n = x.len();
    for i in from..approx.len() {
        let (mut sa, mut sd) = (0.0, 0.0);
        for k in 0..lo.len() {
            let v = x[(2 * i + k) % n];
            sa += lo[k] * v;
            sd += hi[k] * v;
        }
        approx[i] = sa;
        detail[i] = sd;
    }
}

/// One-level periodized analysis of an even-length signal.
pub fn dwt1d(signal: &[f64], filter: &WaveletFilter) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    let mut approx = vec![0.0; n / 2];
    let mut detail = vec![0.0; n / 2];
    analyze(signal, filter, &mut approx, &mut detail);
    Ok((approx, detail))
}

/// Inverse of [`dwt1d`]: the transpose of the analysis operator.
pub fn idwt1d(approx: &[f64], detail: &[f64], filter: &WaveletFilter) -> Result<Vec<f64>> {
    if approx.len() != detail.len() || approx.is_empty() {
        return Err(Error::LengthMismatch {
            approx: approx.len(),
            detail: detail.len(),
        });
    }
    let n = 2 * approx.len();
    let lo = filter.lowpass();
    let hi = filter.highpass();
    let mut out = vec![0.0; n];
    for (i, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        for k in 0..lo.len() {
            out[(2 * i + k) % n] += lo[k] * a + hi[k] * d;
        }
    }
    Ok(out)
}

/// Multi-level 1D decomposition, recursing on the approximation.
///
/// Returns `[approx_L, detail_L, detail_{L-1}, .., detail_1]` (coarsest
/// first), each entry a separate vector.
pub fn wavedec1d(signal: &[f64], filter: &WaveletFilter, levels: usize) -> Result<Vec<Vec<f64>>> {
    let mut details = Vec::with_capacity(levels);
    let mut approx = signal.to_vec();
    for _ in 0..levels {
        let (a, d) = dwt1d(&approx, filter)?;
        details.push(d);
        approx = a;
    }
    let mut out = Vec::with_capacity(levels + 1);
    out.push(approx);
    out.extend(details.into_iter().rev());
    Ok(out)
}

/// Output row `i` of each subband of one 2D level.
#[derive(Debug, Clone, Copy)]
pub struct Dwt2Rows<'a> {
    pub ca: &'a [f64],
    pub ch: &'a [f64],
    pub cv: &'a [f64],
    pub cd: &'a [f64],
}

/// One 2D level computed row by row. `load(r, buf)` fills `buf` with input
/// row `r`; `sink(i, rows)` receives output row `i` of all four subbands.
///
/// Each input row is analysed once (a few more at the circular wrap) into a
/// ring of `filter.len()` rows, and the column filter runs over that ring, so
/// no full-size intermediate is allocated.
pub fn dwt2d_rows(
    rows: usize,
    cols: usize,
    filter: &WaveletFilter,
    mut load: impl FnMut(usize, &mut [f64]),
    mut sink: impl FnMut(usize, Dwt2Rows<'_>),
) -> Result<()> {
    if rows == 0 || cols == 0 || !rows.is_multiple_of(2) || !cols.is_multiple_of(2) {
        return Err(Error::OddDimension { rows, cols });
    }
    let (hr, hc) = (rows / 2, cols / 2);
    let lo = filter.lowpass();
    let hi = filter.highpass();
    let taps = lo.len();

    let mut input = vec![0.0; cols];
    // Slot s holds the row-analysed input row t with t % taps == s, as
    // [lowpass half | highpass half]; `loaded[s]` is that t.
    let mut ring = vec![0.0; taps * cols];
    let mut loaded = vec![usize::MAX; taps];
    let mut out = vec![0.0; 4 * hc];
    for i in 0..hr {
        out.fill(0.0);
        let (ca, rest) = out.split_at_mut(hc);
        let (ch, rest) = rest.split_at_mut(hc);
        let (cv, cd) = rest.split_at_mut(hc);
        for k in 0..taps {
            let t = 2 * i + k;
            let slot = t % taps;
            let buf = &mut ring[slot * cols..(slot + 1) * cols];
            if loaded[slot] != t {
                load(t % rows, &mut input);
                let (l, h) = buf.split_at_mut(hc);
                analyze(&input, filter, l, h);
                loaded[slot] = t;
            }
            let (l, h) = buf.split_at(hc);
            let (wl, wh) = (lo[k], hi[k]);
            let (ca, ch, cv, cd) = (&mut ca[..hc], &mut ch[..hc], &mut cv[..hc], &mut cd[..hc]);
            let (l, h) = (&l[..hc], &h[..hc]);
            for j in 0..hc {
                ca[j] += wl * l[j];
                ch[j] += wh * l[j];
                cv[j] += wl * h[j];
                cd[j] += wh * h[j];
            }
        }
        sink(i, Dwt2Rows { ca, ch, cv, cd });
    }
    Ok(())
}

/// The four subbands of one 2D level.
#[derive(Debug, Clone, PartialEq)]
pub struct Dwt2 {
    /// lowpass rows, lowpass columns
    pub ca: Subband,
    /// lowpass rows, highpass columns: responds to horizontal edges
    pub ch: Subband,
    /// highpass rows, lowpass columns: responds to vertical edges
    pub cv: Subband,
    pub cd: Subband,
}

/// Separable one-level 2D transform: rows first, then columns of each half.
pub fn dwt2d(m: &Matrix, filter: &WaveletFilter) -> Result<Dwt2> {
    let (rows, cols) = (m.rows(), m.cols());
    let (hr, hc) = (rows / 2, cols / 2);
    let mut bands: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(hr * hc));
    dwt2d_rows(
        rows,
        cols,
        filter,
        |r, buf| buf.copy_from_slice(m.row(r)),
        |_, out| {
            for (band, row) in bands.iter_mut().zip([out.ca, out.ch, out.cv, out.cd]) {
                band.extend_from_slice(row);
            }
        },
    )?;
    let [ca, ch, cv, cd] = bands.map(|coeffs| Matrix {
        rows: hr,
        cols: hc,
        coeffs,
    });
    Ok(Dwt2 { ca, ch, cv, cd })
}

/// Detail subbands of one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    pub ch: Subband,
    pub cv: Subband,
    pub cd: Subband,
}

/// A multi-level 2D pyramid. `levels[0]` is the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub filter: WaveletKind,
    pub levels: Vec<DetailLevel>,
    pub approx: Subband,
}

pub const DEFAULT_LEVELS: usize = 3;

/// Decomposes an image, converting pixels to reals without rescaling.
pub fn decompose(img: &GrayImage, filter: &WaveletFilter, levels: usize) -> Result<Decomposition> {
    collect_pyramid(img.height(), img.width(), filter, levels, |r, buf| {
        for (b, &p) in buf.iter_mut().zip(img.row(r)) {
            *b = f64::from(p);
        }
    })
}

pub fn decompose_matrix(
    m: &Matrix,
    filter: &WaveletFilter,
    levels: usize,
) -> Result<Decomposition> {
    collect_pyramid(m.rows(), m.cols(), filter, levels, |r, buf| {
        buf.copy_from_slice(m.row(r))
    })
}

fn collect_pyramid(
    rows: usize,
    cols: usize,
    filter: &WaveletFilter,
    levels: usize,
    load: impl FnMut(usize, &mut [f64]),
) -> Result<Decomposition> {
    let mut details: Vec<[Vec<f64>; 3]> = Vec::with_capacity(levels);
    let approx = pyramid_rows(rows, cols, filter, levels, load, |level, _, out| {
        if details.len() < level {
            details.push(Default::default());
        }
        for (band, row) in details[level - 1].iter_mut().zip([out.ch, out.cv, out.cd]) {
            band.extend_from_slice(row);
        }
    })?;
    let levels = details
        .into_iter()
        .enumerate()
        .map(|(l, [ch, cv, cd])| {
            let (r, c) = (rows >> (l + 1), cols >> (l + 1));
            DetailLevel {
                ch: Matrix {
                    rows: r,
                    cols: c,
                    coeffs: ch,
                },
                cv: Matrix {
                    rows: r,
                    cols: c,
                    coeffs: cv,
                },
                cd: Matrix {
                    rows: r,
                    cols: c,
                    coeffs: cd,
                },
            }
        })
        .collect();
    Ok(Decomposition {
        filter: filter.kind(),
        levels,
        approx,
    })
}

/// Runs a `levels`-deep pyramid, passing every output row of every level to
/// `sink(level, i, rows)` with `level` counted from 1 at the finest, and
/// returns the final approximation. Only the approximation is kept between
/// levels.
pub fn pyramid_rows(
    rows: usize,
    cols: usize,
    filter: &WaveletFilter,
    levels: usize,
    load: impl FnMut(usize, &mut [f64]),
    mut sink: impl FnMut(usize, usize, Dwt2Rows<'_>),
) -> Result<Subband> {
    let block = u32::try_from(levels)
        .ok()
        .and_then(|l| 1usize.checked_shl(l))
        .filter(|_| levels >= 1);
    match block {
        Some(b) if rows.is_multiple_of(b) && cols.is_multiple_of(b) && rows >= b && cols >= b => {}
        _ => return Err(Error::NotDivisible { rows, cols, levels }),
    }
    let mut approx = Matrix {
        rows,
        cols,
        coeffs: Vec::new(),
    };
    let mut load = Some(load);
    for level in 1..=levels {
        let (r, c) = (approx.rows, approx.cols);
        let mut next = Vec::with_capacity(r * c / 4);
        let mut keep = |i: usize, out: Dwt2Rows<'_>| {
            next.extend_from_slice(out.ca);
            sink(level, i, out);
        };
        match load.take() {
            Some(first) => dwt2d_rows(r, c, filter, first, &mut keep)?,
            None => dwt2d_rows(
                r,
                c,
                filter,
                |i, buf| buf.copy_from_slice(approx.row(i)),
                &mut keep,
            )?,
        }
        approx = Matrix {
            rows: r / 2,
            cols: c / 2,
            coeffs: next,
        };
    }
    Ok(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Dense analysis matrix assembled straight from the defining sums.
    fn dense_analysis(n: usize, filter: &WaveletFilter) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n / 2 {
            for k in 0..filter.len() {
                rows[i][(2 * i + k) % n] += filter.lowpass()[k];
                rows[n / 2 + i][(2 * i + k) % n] += filter.highpass()[k];
            }
        }
        rows
    }

    fn lcg_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 * 200.0 - 100.0
            })
            .collect()
    }

    #[test]
    fn haar_constant_signal() {
        let (a, d) = dwt1d(&[1.0; 4], &WaveletFilter::haar()).unwrap();
        assert!(close(&a, &[SQRT_2, SQRT_2], 1e-15));
        assert!(close(&d, &[0.0, 0.0], 1e-15));
    }

    #[test]
    fn haar_alternating_signal() {
        let (a, d) = dwt1d(&[2.0, 0.0, 2.0, 0.0], &WaveletFilter::haar()).unwrap();
        assert!(close(&a, &[SQRT_2, SQRT_2], 1e-15));
        assert!(close(&d, &[SQRT_2, SQRT_2], 1e-15));
    }

    #[test]
    fn matches_dense_operator() {
        for kind in WaveletKind::ALL {
            let f = WaveletFilter::new(kind);
            for n in [2, 4, 6, 10, 16, 34] {
                let x = lcg_signal(n, n as u64);
                let (a, d) = dwt1d(&x, &f).unwrap();
                let dense = dense_analysis(n, &f);
                let want: Vec<f64> = dense
                    .iter()
                    .map(|row| row.iter().zip(&x).map(|(r, v)| r * v).sum())
                    .collect();
                let got: Vec<f64> = a.iter().chain(&d).copied().collect();
                assert!(close(&got, &want, 1e-10), "{kind} n={n}");
            }
        }
    }

    #[test]
    fn db4_reconstructs_length_16() {
        let f = WaveletFilter::new(WaveletKind::Db4);
        let x = lcg_signal(16, 3);
        let (a, d) = dwt1d(&x, &f).unwrap();
        assert!(close(&idwt1d(&a, &d, &f).unwrap(), &x, 1e-10));
    }

    #[test]
    fn sym8_reconstructs_length_32() {
        let f = WaveletFilter::new(WaveletKind::Sym8);
        let x = lcg_signal(32, 11);
        let (a, d) = dwt1d(&x, &f).unwrap();
        let y = idwt1d(&a, &d, &f).unwrap();
        let err = x
            .iter()
            .zip(&y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn haar_inverse_examples() {
        let f = WaveletFilter::haar();
        let y = idwt1d(&[SQRT_2, SQRT_2], &[0.0, 0.0], &f).unwrap();
        assert!(close(&y, &[1.0; 4], 1e-15));
        let y = idwt1d(&[1.0], &[0.0], &f).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(&y, &[h, h], 1e-15));
    }

    #[test]
    fn length_errors() {
        let f = WaveletFilter::haar();
        assert_eq!(
            dwt1d(&[1.0, 2.0, 3.0], &f).unwrap_err(),
            Error::OddLength(3)
        );
        assert_eq!(dwt1d(&[], &f).unwrap_err(), Error::OddLength(0));
        assert_eq!(
            idwt1d(&[1.0], &[1.0, 2.0], &f).unwrap_err(),
            Error::LengthMismatch {
                approx: 1,
                detail: 2
            }
        );
        assert_eq!(idwt1d(&[], &[], &f).unwrap_err().kind(), "LengthMismatch");
    }

    #[test]
    fn dwt2d_constant_matrix() {
        let m = Matrix::from_fn(8, 6, |_, _| 3.0);
        let out = dwt2d(&m, &WaveletFilter::haar()).unwrap();
        assert_eq!((out.ca.rows(), out.ca.cols()), (4, 3));
        assert!(out.ca.coeffs().iter().all(|&v| (v - 6.0).abs() < 1e-12));
        for band in [&out.ch, &out.cv, &out.cd] {
            assert!(band.coeffs().iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn dwt2d_two_by_two_by_hand() {
        let (a, b, c, d) = (5.0, -1.0, 2.0, 7.0);
        let m = Matrix::new(2, 2, vec![a, b, c, d]).unwrap();
        let out = dwt2d(&m, &WaveletFilter::haar()).unwrap();
        let expect = [
            (a + b + c + d) / 2.0,
            (a + b - c - d) / 2.0,
            (a - b + c - d) / 2.0,
            (a - b - c + d) / 2.0,
        ];
        let got = [
            out.ca.get(0, 0),
            out.ch.get(0, 0),
            out.cv.get(0, 0),
            out.cd.get(0, 0),
        ];
        assert!(close(&got, &expect, 1e-12), "{got:?}");
    }

    #[test]
    fn dwt2d_parseval_16x16() {
        for kind in WaveletKind::ALL {
            let f = WaveletFilter::new(kind);
            let x = lcg_signal(256, 77);
            let m = Matrix::new(16, 16, x).unwrap();
            let out = dwt2d(&m, &f).unwrap();
            let energy = out.ca.sum_squares()
                + out.ch.sum_squares()
                + out.cv.sum_squares()
                + out.cd.sum_squares();
            let input = m.sum_squares();
            assert!(((energy - input) / input).abs() < 1e-8, "{kind}");
        }
    }

    #[test]
    fn dwt2d_odd_dimension() {
        let m = Matrix::zeros(4, 3);
        assert_eq!(
            dwt2d(&m, &WaveletFilter::haar()).unwrap_err(),
            Error::OddDimension { rows: 4, cols: 3 }
        );
    }

    #[test]
    fn decompose_constant_image() {
        let img = GrayImage::filled(8, 8, 1);
        let dec = decompose(&img, &WaveletFilter::haar(), 3).unwrap();
        assert_eq!(dec.levels.len(), 3);
        assert_eq!((dec.approx.rows(), dec.approx.cols()), (1, 1));
        assert!((dec.approx.get(0, 0) - 8.0).abs() < 1e-12);
        for level in &dec.levels {
            for band in [&level.ch, &level.cv, &level.cd] {
                assert!(band.coeffs().iter().all(|&v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn decompose_subband_sizes() {
        let img = GrayImage::filled(64, 64, 9);
        let dec = decompose(&img, &WaveletFilter::new(WaveletKind::Sym8), 3).unwrap();
        let dims: Vec<_> = dec
            .levels
            .iter()
            .map(|l| (l.ch.rows(), l.cv.cols()))
            .collect();
        assert_eq!(dims, vec![(32, 32), (16, 16), (8, 8)]);
        assert_eq!((dec.approx.rows(), dec.approx.cols()), (8, 8));
        assert_eq!(dec.filter, WaveletKind::Sym8);
    }

    #[test]
    fn decompose_not_divisible() {
        let img = GrayImage::filled(8, 8, 1);
        let f = WaveletFilter::haar();
        assert_eq!(
            decompose(&img, &f, 4).unwrap_err(),
            Error::NotDivisible {
                rows: 8,
                cols: 8,
                levels: 4
            }
        );
        let img = GrayImage::filled(24, 20, 1);
        assert_eq!(decompose(&img, &f, 3).unwrap_err().kind(), "NotDivisible");
        assert_eq!(decompose(&img, &f, 0).unwrap_err().kind(), "NotDivisible");
        assert_eq!(decompose(&img, &f, 200).unwrap_err().kind(), "NotDivisible");
    }

    #[test]
    fn wavedec_orders_coarsest_first() {
        let f = WaveletFilter::haar();
        let parts = wavedec1d(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], &f, 3).unwrap();
        let lens: Vec<_> = parts.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![1, 1, 2, 4]);
        assert!((parts[0][0] - 36.0 / 8f64.sqrt()).abs() < 1e-12);
    }
}
