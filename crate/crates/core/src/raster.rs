//! 8-bit grayscale rasters, binary PGM I/O and the synthetic texture corpus.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

/// Row-major 8-bit grayscale image. Always at least 1x1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::BadImage(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::BadImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width.saturating_mul(height),
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn transpose(&self) -> GrayImage {
        GrayImage::from_fn(self.height, self.width, |r, c| self.get(c, r))
    }
}

/// Parses a binary (P5) PGM with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::BadMagic(shown));
    }
    let mut pos = 2;
    if bytes
        .get(pos)
        .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
    {
        let shown = String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned();
        return Err(Error::BadMagic(shown));
    }

    let width = header_field(bytes, &mut pos, "width")?;
    let height = header_field(bytes, &mut pos, "height")?;
    let maxval = header_field(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates maxval from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace after maxval".to_string(),
            ))
        }
    }

    let expected = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, h)| w.checked_mul(h))
        .ok_or_else(|| Error::MalformedHeader(format!("{width}x{height} is too large")))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            got: payload.len(),
        });
    }
    GrayImage::new(
        width as usize,
        height as usize,
        payload[..expected].to_vec(),
    )
}

/// Reads one unsigned decimal header token, skipping whitespace and comments.
fn header_field(bytes: &[u8], pos: &mut usize, name: &str) -> Result<u64> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => {
                return Err(Error::MalformedHeader(format!(
                    "header ended before {name}"
                )))
            }
        }
    }
    let start = *pos;
    while bytes
        .get(*pos)
        .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
    {
        *pos += 1;
    }
    let token = String::from_utf8_lossy(&bytes[start..*pos]);
    if !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::MalformedHeader(format!(
            "{name} {token:?} is not a number"
        )));
    }
    token
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("{name} {token:?} is out of range")))
}

/// Encodes an image in canonical P5 form: `P5\n<w> <h>\n255\n` + raw pixels.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn read_pgm_file(path: impl AsRef<std::path::Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_pgm(&bytes)
}

pub fn write_pgm_file(path: impl AsRef<std::path::Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, save_pgm(img)).map_err(|e| Error::io(path, e))
}

/// Parametric texture families for the synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TextureKind {
    /// Square blocks of side `period`, alternating 255 / 0.
    Checkerboard {
        period: usize,
    },
    /// Sinusoid with `frequency` cycles per image side along `orientation`
    /// degrees (0 = varies along columns).
    Grating {
        frequency: f64,
        orientation: f64,
    },
    /// Independent uniform pixels from a seeded stream.
    Noise {
        seed: u64,
    },
    Constant {
        value: u8,
    },
}

impl fmt::Display for TextureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextureKind::Checkerboard { period } => write!(f, "checkerboard:{period}"),
            TextureKind::Grating {
                frequency,
                orientation,
            } => {
                write!(f, "grating:{frequency}:{orientation}")
            }
            TextureKind::Noise { seed } => write!(f, "noise:{seed}"),
            TextureKind::Constant { value } => write!(f, "constant:{value}"),
        }
    }
}

impl FromStr for TextureKind {
    type Err = Error;

    /// Parses `kind:param[:param]`, e.g. `checkerboard:8` or `grating:4:30`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::BadDescriptor(format!("{s:?}: {why}"));
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let params: Vec<&str> = parts.collect();
        let arity = |min: usize, max: usize| {
            if params.len() < min || params.len() > max {
                Err(bad(&format!("expected {min}..={max} parameters")))
            } else {
                Ok(())
            }
        };
        match kind {
            "checkerboard" => {
                arity(1, 1)?;
                let period: usize = params[0].parse().map_err(|_| bad("bad period"))?;
                if period == 0 {
                    return Err(bad("period must be positive"));
                }
                Ok(TextureKind::Checkerboard { period })
            }
            "grating" => {
                arity(1, 2)?;
                let frequency: f64 = params[0].parse().map_err(|_| bad("bad frequency"))?;
                let orientation: f64 = match params.get(1) {
                    Some(p) => p.parse().map_err(|_| bad("bad orientation"))?,
                    None => 0.0,
                };
                if !frequency.is_finite() || !orientation.is_finite() {
                    return Err(bad("parameters must be finite"));
                }
                Ok(TextureKind::Grating {
                    frequency,
                    orientation,
                })
            }
            "noise" => {
                arity(1, 1)?;
                let seed = params[0].parse().map_err(|_| bad("bad seed"))?;
                Ok(TextureKind::Noise { seed })
            }
            "constant" => {
                arity(1, 1)?;
                let value = params[0]
                    .parse()
                    .map_err(|_| bad("value must be 0..=255"))?;
                Ok(TextureKind::Constant { value })
            }
            _ => Err(bad("unknown texture kind")),
        }
    }
}

/// Renders one texture. `seed` only affects `Noise`, whose stream is seeded
/// with `derive_seed(seed, kind_seed)`; each pixel is `next_u64() % 256`.
pub fn synth_texture(kind: &TextureKind, size: usize, seed: u64) -> Result<GrayImage> {
    if size < 8 || !size.is_power_of_two() {
        return Err(Error::BadSize(size));
    }
    let img = match *kind {
        TextureKind::Checkerboard { period } => GrayImage::from_fn(size, size, |r, c| {
            if (r / period + c / period) % 2 == 0 {
                255
            } else {
                0
            }
        }),
        TextureKind::Grating {
            frequency,
            orientation,
        } => {
            let theta = orientation.to_radians();
            let (sin, cos) = theta.sin_cos();
            let n = size as f64;
            GrayImage::from_fn(size, size, |r, c| {
                let phase = 2.0 * PI * frequency * (c as f64 * cos + r as f64 * sin) / n;
                (127.5 * (1.0 + phase.sin())).round().clamp(0.0, 255.0) as u8
            })
        }
        TextureKind::Noise { seed: kind_seed } => {
            let mut rng = SplitMix64::new(derive_seed(seed, kind_seed));
            GrayImage::from_fn(size, size, |_, _| (rng.next_u64() % 256) as u8)
        }
        TextureKind::Constant { value } => GrayImage::filled(size, size, value),
    };
    Ok(img)
}

/// A list of texture kinds rendered at one size from one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub kinds: Vec<TextureKind>,
    pub size: usize,
    pub seed: u64,
}

impl CorpusSpec {
    pub const DEFAULT_SIZE: usize = 256;

    /// The ten-texture desk corpus used by the benchmark by default.
    pub fn default_with_seed(seed: u64) -> Self {
        use TextureKind::*;
        let kinds = vec![
            Checkerboard { period: 1 },
            Checkerboard { period: 3 },
            Checkerboard { period: 10 },
            Grating {
                frequency: 3.0,
                orientation: 120.0,
            },
            Grating {
                frequency: 16.0,
                orientation: 15.0,
            },
            Grating {
                frequency: 32.0,
                orientation: 90.0,
            },
            Grating {
                frequency: 48.0,
                orientation: 30.0,
            },
            Grating {
                frequency: 64.0,
                orientation: 90.0,
            },
            Grating {
                frequency: 96.0,
                orientation: 90.0,
            },
            Noise { seed: 3 },
        ];
        Self {
            kinds,
            size: Self::DEFAULT_SIZE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 8 || !self.size.is_power_of_two() {
            return Err(Error::BadSize(self.size));
        }
        Ok(())
    }

    /// Renders every texture, labelled by its descriptor string.
    pub fn render(&self) -> Result<Vec<(String, GrayImage)>> {
        self.validate()?;
        self.kinds
            .iter()
            .map(|kind| Ok((kind.to_string(), synth_texture(kind, self.size, self.seed)?)))
            .collect()
    }
}
