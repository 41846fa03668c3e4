//! Gray-level co-occurrence matrices and their energy.
//!
//! Gray levels are 1-based throughout, as in the usual `C(i, j)` notation:
//! bin 1 holds the darkest intensities.

use crate::classify::{FeatureScheme, FeatureVector};
use crate::error::{Error, Result};
use crate::raster::GrayImage;

pub const DEFAULT_LEVELS: usize = 8;

/// Distance-1 offsets `(drow, dcol)` for 0°, 45°, 90° and 135°, in feature
/// order. Rows grow downwards, so the diagonals step up with `drow = -1`.
pub const DIRECTIONS: [(isize, isize); 4] = [(0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// An image whose pixels are gray-level bins in `1..=levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedImage {
    width: usize,
    height: usize,
    levels: usize,
    bins: Vec<u16>,
}

impl IndexedImage {
    pub fn new(width: usize, height: usize, levels: usize, bins: Vec<u16>) -> Result<Self> {
        if !(2..=256).contains(&levels) {
            return Err(Error::BadLevels(levels));
        }
        if width == 0 || height == 0 || width.checked_mul(height) != Some(bins.len()) {
            return Err(Error::BadImage(format!(
                "{width}x{height} indexed image with {} bins",
                bins.len()
            )));
        }
        if let Some(b) = bins.iter().find(|&&b| b == 0 || b as usize > levels) {
            return Err(Error::BadImage(format!("bin {b} outside 1..={levels}")));
        }
        Ok(Self {
            width,
            height,
            levels,
            bins,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bins(&self) -> &[u16] {
        &self.bins
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.bins[row * self.width + col]
    }
}

/// Linear binning of 0..=255 into `levels` equal-width bins:
/// `bin = min(levels, floor(v * levels / 256) + 1)`.
pub fn quantize(img: &GrayImage, levels: usize) -> Result<IndexedImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::BadLevels(levels));
    }
    let lut: Vec<u16> = (0..256usize)
        .map(|v| (v * levels / 256 + 1).min(levels) as u16)
        .collect();
    let bins = img.pixels().iter().map(|&p| lut[p as usize]).collect();
    Ok(IndexedImage {
        width: img.width(),
        height: img.height(),
        levels,
        bins,
    })
}

/// Pair counts for one offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: usize,
    counts: Vec<u64>,
    offset: (isize, isize),
    symmetric: bool,
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn offset(&self) -> (isize, isize) {
        self.offset
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Count for gray levels `i`, `j` (1-based).
    pub fn count(&self, i: usize, j: usize) -> u64 {
        assert!((1..=self.levels).contains(&i) && (1..=self.levels).contains(&j));
        self.counts[(i - 1) * self.levels + (j - 1)]
    }

    /// Row-major `levels x levels` counts, 0-based storage.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts positions `(p, q)` with `idx(p, q) = i` and
/// `idx(p + drow, q + dcol) = j`, both in bounds. A symmetric matrix also
/// counts the reversed offset, which amounts to adding the transpose.
pub fn compute_glcm(idx: &IndexedImage, offset: (isize, isize), symmetric: bool) -> Result<Glcm> {
    let (drow, dcol) = offset;
    let (h, w) = (idx.height(), idx.width());
    if offset == (0, 0) {
        return Err(Error::ZeroOffset);
    }
    if drow.unsigned_abs() >= h || dcol.unsigned_abs() >= w {
        return Err(Error::OffsetTooLarge {
            drow,
            dcol,
            height: h,
            width: w,
        });
    }
    let n = idx.levels();
    let mut counts = vec![0u64; n * n];

    // Source rows/cols for which the displaced pixel stays inside.
    let rows = drow.min(0).unsigned_abs()..h - drow.max(0) as usize;
    let cols = dcol.min(0).unsigned_abs()..w - dcol.max(0) as usize;
    for p in rows {
        let src = &idx.bins[p * w..(p + 1) * w];
        let dst_row = p.wrapping_add_signed(drow);
        let dst = &idx.bins[dst_row * w..(dst_row + 1) * w];
        for q in cols.clone() {
            let i = src[q] as usize - 1;
            let j = dst[q.wrapping_add_signed(dcol)] as usize - 1;
            counts[i * n + j] += 1;
        }
    }

    if symmetric {
        for i in 0..n {
            for j in i..n {
                let s = counts[i * n + j] + counts[j * n + i];
                counts[i * n + j] = s;
                counts[j * n + i] = s;
            }
        }
    }
    Ok(Glcm {
        levels: n,
        counts,
        offset,
        symmetric,
    })
}

/// Angular second moment. Normalized: `Σ P(i,j)²` with `P = C / ΣC`, in
/// `(0, 1]`. Raw: `Σ C(i,j)²`.
pub fn glcm_energy(g: &Glcm, normalize: bool) -> Result<f64> {
    let total = g.total();
    if total == 0 {
        return Err(Error::EmptyGlcm);
    }
    let squares: u128 = g
        .counts
        .iter()
        .map(|&c| u128::from(c) * u128::from(c))
        .sum();
    if normalize {
        let t = total as f64;
        Ok(squares as f64 / (t * t))
    } else {
        Ok(squares as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmParams {
    pub levels: usize,
    pub normalize: bool,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            normalize: true,
        }
    }
}

/// Four directional energies (0°, 45°, 90°, 135°) of symmetric
/// distance-1 co-occurrence matrices.
pub fn glcm_features(img: &GrayImage, params: GlcmParams) -> Result<FeatureVector> {
    let idx = quantize(img, params.levels)?;
    let mut values = Vec::with_capacity(DIRECTIONS.len());
    for offset in DIRECTIONS {
        let g = compute_glcm(&idx, offset, true)?;
        values.push(glcm_energy(&g, params.normalize)?);
    }
    FeatureVector::new(FeatureScheme::Glcm4, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{rotate, Interpolation};
    use crate::raster::{synth_texture, TextureKind};

    fn indexed(rows: &[&[u16]], levels: usize) -> IndexedImage {
        let h = rows.len();
        let w = rows[0].len();
        IndexedImage::new(w, h, levels, rows.concat()).unwrap()
    }

    /// Straight transcription of the counting definition over all (p, q).
    fn oracle(idx: &IndexedImage, (dr, dc): (isize, isize), symmetric: bool) -> Vec<u64> {
        let n = idx.levels();
        let mut c = vec![0u64; n * n];
        let offsets: Vec<(isize, isize)> = if symmetric {
            vec![(dr, dc), (-dr, -dc)]
        } else {
            vec![(dr, dc)]
        };
        for (dr, dc) in offsets {
            for p in 0..idx.height() as isize {
                for q in 0..idx.width() as isize {
                    let (p2, q2) = (p + dr, q + dc);
                    if p2 < 0 || q2 < 0 || p2 >= idx.height() as isize || q2 >= idx.width() as isize
                    {
                        continue;
                    }
                    let i = idx.get(p as usize, q as usize) as usize;
                    let j = idx.get(p2 as usize, q2 as usize) as usize;
                    c[(i - 1) * n + (j - 1)] += 1;
                }
            }
        }
        c
    }

    #[test]
    fn quantize_bins() {
        let img = GrayImage::new(5, 1, vec![0, 255, 32, 31, 224]).unwrap();
        assert_eq!(quantize(&img, 8).unwrap().bins(), &[1, 8, 2, 1, 8]);
        let img = GrayImage::new(2, 1, vec![127, 128]).unwrap();
        assert_eq!(quantize(&img, 2).unwrap().bins(), &[1, 2]);
        let ramp = GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8);
        let q = quantize(&ramp, 256).unwrap();
        assert!(q
            .bins()
            .iter()
            .zip(ramp.pixels())
            .all(|(&b, &v)| b == v as u16 + 1));
    }

    #[test]
    fn quantize_bad_levels() {
        let img = GrayImage::filled(2, 2, 0);
        assert_eq!(quantize(&img, 1).unwrap_err(), Error::BadLevels(1));
        assert_eq!(quantize(&img, 257).unwrap_err(), Error::BadLevels(257));
    }

    #[test]
    fn two_by_two_horizontal() {
        let idx = indexed(&[&[1, 1], &[2, 2]], 2);
        let g = compute_glcm(&idx, (0, 1), false).unwrap();
        assert_eq!(g.counts(), &[1, 0, 0, 1]);
        let g = compute_glcm(&idx, (0, 1), true).unwrap();
        assert_eq!((g.count(1, 1), g.count(2, 2), g.count(1, 2)), (2, 2, 0));
    }

    #[test]
    fn counting_facts_on_four_by_five() {
        // (1,1) is horizontally adjacent once, (1,2) twice.
        let idx = indexed(
            &[
                &[1, 1, 5, 6, 8],
                &[2, 3, 5, 7, 1],
                &[4, 5, 7, 1, 2],
                &[8, 5, 1, 2, 5],
            ],
            8,
        );
        let g = compute_glcm(&idx, (0, 1), false).unwrap();
        assert_eq!(g.count(1, 1), 1);
        assert_eq!(g.count(1, 2), 2);
        assert_eq!(g.count(5, 7), 2);
        assert_eq!(g.total(), 16);
        assert_eq!(g.counts(), oracle(&idx, (0, 1), false).as_slice());
    }

    #[test]
    fn offset_errors() {
        let idx = indexed(&[&[1, 2, 1], &[2, 1, 2]], 2);
        assert_eq!(
            compute_glcm(&idx, (0, 0), false).unwrap_err(),
            Error::ZeroOffset
        );
        assert_eq!(
            compute_glcm(&idx, (2, 0), false).unwrap_err().kind(),
            "OffsetTooLarge"
        );
        assert_eq!(
            compute_glcm(&idx, (0, -3), true).unwrap_err().kind(),
            "OffsetTooLarge"
        );
        assert!(compute_glcm(&idx, (-1, -2), true).is_ok());
    }

    #[test]
    fn matches_oracle_for_all_offsets() {
        let img = synth_texture(&TextureKind::Noise { seed: 3 }, 8, 1).unwrap();
        let idx = quantize(&img, 4).unwrap();
        for dr in -7isize..=7 {
            for dc in -7isize..=7 {
                if (dr, dc) == (0, 0) {
                    continue;
                }
                for sym in [false, true] {
                    let g = compute_glcm(&idx, (dr, dc), sym).unwrap();
                    assert_eq!(g.counts(), oracle(&idx, (dr, dc), sym).as_slice());
                    let pairs = (8 - dr.unsigned_abs()) * (8 - dc.unsigned_abs());
                    assert_eq!(g.total(), pairs as u64 * if sym { 2 } else { 1 });
                }
            }
        }
    }

    #[test]
    fn energy_examples() {
        let idx = indexed(&[&[1, 1], &[2, 2]], 2);
        let g = compute_glcm(&idx, (0, 1), false).unwrap();
        assert!((glcm_energy(&g, true).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(glcm_energy(&g, false).unwrap(), 2.0);
    }

    #[test]
    fn constant_image_features_are_one() {
        let img = GrayImage::filled(16, 16, 90);
        let f = glcm_features(&img, GlcmParams::default()).unwrap();
        assert_eq!(f.values(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(f.scheme(), FeatureScheme::Glcm4);
    }

    #[test]
    fn stripes_put_mass_off_and_on_diagonal() {
        // Columns alternate 0 / 255, i.e. bins 1 / 8.
        let img = GrayImage::from_fn(8, 8, |_, c| if c % 2 == 0 { 0 } else { 255 });
        let idx = quantize(&img, 8).unwrap();
        let horizontal = compute_glcm(&idx, DIRECTIONS[0], true).unwrap();
        let vertical = compute_glcm(&idx, DIRECTIONS[2], true).unwrap();
        // 8 rows x 7 pairs, doubled: all of it on (1,8)/(8,1).
        assert_eq!((horizontal.count(1, 8), horizontal.count(8, 1)), (56, 56));
        assert_eq!(horizontal.count(1, 1) + horizontal.count(8, 8), 0);
        // 4 columns of each bin x 7 pairs, doubled: all on the diagonal.
        assert_eq!((vertical.count(1, 1), vertical.count(8, 8)), (56, 56));
        assert_eq!(vertical.count(1, 8) + vertical.count(8, 1), 0);
        assert_ne!(horizontal, vertical);
        // Two equal cells either way, so the energies coincide at 0.5.
        let f = glcm_features(&img, GlcmParams::default()).unwrap();
        assert_eq!(f.values()[0], 0.5);
        assert_eq!(f.values()[2], 0.5);
    }

    #[test]
    fn unit_checkerboard_is_isotropic_on_axes() {
        let img = GrayImage::from_fn(8, 8, |r, c| if (r + c) % 2 == 0 { 255 } else { 0 });
        let f = glcm_features(&img, GlcmParams::default()).unwrap();
        assert_eq!(f.values()[0], f.values()[2]);
        assert_eq!(f.values()[1], f.values()[3]);
    }

    #[test]
    fn transpose_swaps_axis_directions() {
        let img = synth_texture(&TextureKind::Noise { seed: 5 }, 16, 2).unwrap();
        let a = glcm_features(&img, GlcmParams::default()).unwrap();
        let b = glcm_features(&img.transpose(), GlcmParams::default()).unwrap();
        let (a, b) = (a.values(), b.values());
        // Transposition maps (dr, dc) to (dc, dr): 0° <-> 90°, and the two
        // diagonals onto their own reversals.
        assert_eq!([b[2], b[1], b[0], b[3]], [a[0], a[1], a[2], a[3]]);
    }

    #[test]
    fn quarter_turn_swaps_both_pairs() {
        let img = synth_texture(&TextureKind::Noise { seed: 6 }, 16, 2).unwrap();
        let a = glcm_features(&img, GlcmParams::default()).unwrap();
        let b = glcm_features(
            &rotate(&img, 90.0, Interpolation::Nearest),
            GlcmParams::default(),
        )
        .unwrap();
        let (a, b) = (a.values(), b.values());
        assert_eq!([b[2], b[3], b[0], b[1]], [a[0], a[1], a[2], a[3]]);
    }

    #[test]
    fn raw_energy_mode() {
        let img = GrayImage::filled(4, 4, 0);
        let f = glcm_features(
            &img,
            GlcmParams {
                levels: 8,
                normalize: false,
            },
        )
        .unwrap();
        // 0°: 4 rows x 3 pairs, doubled = 24 on one cell.
        assert_eq!(f.values()[0], 576.0);
        // 45°: 3 x 3 pairs, doubled = 18.
        assert_eq!(f.values()[1], 324.0);
    }
}
