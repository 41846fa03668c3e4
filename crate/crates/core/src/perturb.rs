//! Input perturbations for the robustness experiments: impulse noise,
//! histogram equalization and rotation.

use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::rng::SplitMix64;

/// Sets exactly `round(density * N)` distinct pixels to 0 or 255.
///
/// Positions come from a partial Fisher-Yates shuffle of `0..N` driven by
/// SplitMix64(`seed`): step `i` draws `j = i + next_u64() % (N - i)`, swaps,
/// and takes the position now at `i`; a second draw then picks the value,
/// 255 if its top bit is set and 0 otherwise. Because the draws for step `i`
/// never depend on the total count, a lower density with the same seed
/// perturbs a prefix of the positions (and values) of a higher one.
pub fn salt_pepper(img: &GrayImage, density: f64, seed: u64) -> Result<GrayImage> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::BadDensity(density));
    }
    let n = img.pixels().len();
    let count = ((density * n as f64).round() as usize).min(n);
    let mut pixels = img.pixels().to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    for i in 0..count {
        let j = i + rng.below((n - i) as u64) as usize;
        order.swap(i, j);
        let salt = rng.next_u64() >> 63 == 1;
        pixels[order[i]] = if salt { 255 } else { 0 };
    }
    GrayImage::new(img.width(), img.height(), pixels)
}

/// Global histogram equalization through the cumulative histogram.
///
/// `out(v) = round(255 * (cdf(v) - cdf_min) / (N - cdf_min))`, evaluated in
/// integer arithmetic with halves rounded up. Single-level images are
/// returned unchanged.
pub fn hist_equalize(img: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let total = img.pixels().len() as u64;
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (v, count) in hist.iter().enumerate() {
        acc += count;
        cdf[v] = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if total == cdf_min {
        return img.clone();
    }
    let denom = total - cdf_min;
    let mut lut = [0u8; 256];
    for v in 0..256 {
        let num = 255 * cdf[v].saturating_sub(cdf_min);
        lut[v] = ((2 * num + denom) / (2 * denom)) as u8;
    }
    let pixels = img.pixels().iter().map(|&p| lut[p as usize]).collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Nearest,
}

/// Counter-clockwise rotation about the image center, cropped to the input
/// size. Each output pixel samples the rounded inverse-mapped source
/// coordinate; sources outside the input read as 0.
pub fn rotate(img: &GrayImage, degrees: f64, interp: Interpolation) -> GrayImage {
    let Interpolation::Nearest = interp;
    let (sin, cos) = exact_sin_cos(degrees);
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    GrayImage::from_fn(w, h, |r, c| {
        let dx = c as f64 - cx;
        let dy = r as f64 - cy;
        let sx = (cx + cos * dx - sin * dy).round();
        let sy = (cy + sin * dx + cos * dy).round();
        if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
            0
        } else {
            img.get(sy as usize, sx as usize)
        }
    })
}

/// sin/cos of an angle in degrees, exact at multiples of 90.
fn exact_sin_cos(degrees: f64) -> (f64, f64) {
    let d = degrees.rem_euclid(360.0);
    if d == 0.0 {
        (0.0, 1.0)
    } else if d == 90.0 {
        (1.0, 0.0)
    } else if d == 180.0 {
        (0.0, -1.0)
    } else if d == 270.0 {
        (-1.0, 0.0)
    } else {
        d.to_radians().sin_cos()
    }
}
