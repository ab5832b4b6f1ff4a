//! Background defocus: blur everything outside a person mask.

use thiserror::Error;

use crate::scalar::Scalar;

pub mod pnm;

pub const DEFAULT_SIGMA: f64 = 8.0;
/// Mask threshold for 8-bit grayscale input.
pub const MASK_THRESHOLD: u8 = 128;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("expected a single-channel image, got {0} channels")]
    NotGray(u8),
    #[error("unsupported channel count {0}")]
    BadChannels(u8),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("dimension mismatch: image {image:?}, mask {mask:?}")]
    DimensionMismatch { image: (usize, usize), mask: (usize, usize) },
    #[error("pixel buffer has {found} bytes, expected {expected}")]
    BufferLength { expected: usize, found: usize },
    #[error(transparent)]
    Pnm(#[from] pnm::PnmError),
}

/// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: u8,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: u8, pixels: Vec<u8>) -> Result<Self, PreprocessError> {
        if channels != 1 && channels != 3 {
            return Err(PreprocessError::BadChannels(channels));
        }
        let expected = width * height * channels as usize;
        if pixels.len() != expected {
            return Err(PreprocessError::BufferLength {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: u8, value: u8) -> Result<Self, PreprocessError> {
        Self::new(width, height, channels, vec![value; width * height * channels as usize])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels as usize + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        let ch = self.channels as usize;
        self.pixels[(y * self.width + x) * ch + c] = v;
    }
}

/// One bit per pixel; `true` marks the person.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

pub fn threshold_mask(gray: &RasterImage) -> Result<BinaryMask, PreprocessError> {
    if gray.channels != 1 {
        return Err(PreprocessError::NotGray(gray.channels));
    }
    Ok(BinaryMask {
        width: gray.width,
        height: gray.height,
        bits: gray.pixels.iter().map(|p| *p >= MASK_THRESHOLD).collect(),
    })
}

/// Normalized Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel<T: Scalar>(sigma: T) -> Vec<T> {
    let radius = (T::from_f64_lossy(3.0) * sigma).ceil().to_usize().unwrap_or(0);
    let two_var = T::from_f64_lossy(2.0) * sigma * sigma;
    let taps: Vec<T> = (0..=2 * radius)
        .map(|i| {
            let d = T::from_index(i) - T::from_index(radius);
            (-(d * d) / two_var).exp()
        })
        .collect();
    let total = taps.iter().fold(T::zero(), |a, b| a + *b);
    taps.into_iter().map(|w| w / total).collect()
}

fn check_sigma(sigma: f64) -> Result<(), PreprocessError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(PreprocessError::BadSigma(sigma))
    }
}

/// Separable Gaussian blur with clamp-to-edge borders, rounded to nearest.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage, PreprocessError> {
    check_sigma(sigma)?;
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h, ch) = (img.width, img.height, img.channels as usize);
    if w == 0 || h == 0 {
        return Ok(img.clone());
    }
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut horizontal = vec![0.0f64; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (t, wgt) in kernel.iter().enumerate() {
                    let sx = clamp(x as isize + t as isize - radius, w);
                    acc += wgt * img.pixels[(y * w + sx) * ch + c] as f64;
                }
                horizontal[(y * w + x) * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0u8; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (t, wgt) in kernel.iter().enumerate() {
                    let sy = clamp(y as isize + t as isize - radius, h);
                    acc += wgt * horizontal[(sy * w + x) * ch + c];
                }
                out[(y * w + x) * ch + c] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RasterImage::new(w, h, img.channels, out)
}

/// Per-pixel foreground weight in [0, 1]: the mask box-filtered over a
/// `(2r+1)²` window with clamp-to-edge borders.
pub fn feather_mask(mask: &BinaryMask, radius: usize) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    let r = radius as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut rows = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let sum: usize = (-r..=r)
                .filter(|d| mask.get(clamp(x as isize + d, w), y))
                .count();
            rows[y * w + x] = sum as f64;
        }
    }
    let norm = ((2 * radius + 1) * (2 * radius + 1)) as f64;
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let sum: f64 = (-r..=r).map(|d| rows[clamp(y as isize + d, h) * w + x]).sum();
            out[y * w + x] = sum / norm;
        }
    }
    out
}

/// Keeps masked pixels and replaces the rest with a blurred copy.
///
/// With `feather = Some(r)`, the mask is softened by an `r`-pixel box filter
/// and the two images are blended linearly instead.
pub fn blur_background(
    frame: &RasterImage,
    mask: &BinaryMask,
    sigma: f64,
    feather: Option<usize>,
) -> Result<RasterImage, PreprocessError> {
    if frame.width != mask.width || frame.height != mask.height {
        return Err(PreprocessError::DimensionMismatch {
            image: (frame.width, frame.height),
            mask: (mask.width, mask.height),
        });
    }
    let blurred = gaussian_blur(frame, sigma)?;
    let ch = frame.channels as usize;
    let mut out = blurred.pixels;
    match feather {
        None | Some(0) => {
            for (i, keep) in mask.bits.iter().enumerate() {
                if *keep {
                    out[i * ch..(i + 1) * ch].copy_from_slice(&frame.pixels[i * ch..(i + 1) * ch]);
                }
            }
        }
        Some(radius) => {
            let alpha = feather_mask(mask, radius);
            for (i, a) in alpha.iter().enumerate() {
                for c in 0..ch {
                    let sharp = frame.pixels[i * ch + c] as f64;
                    let soft = out[i * ch + c] as f64;
                    out[i * ch + c] = (a * sharp + (1.0 - a) * soft).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    RasterImage::new(frame.width, frame.height, frame.channels, out)
}
