//! Conventional image distortions used as removal baselines.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::media::ImageBuffer;
use crate::rng::SeededRng;

pub const MAX_BLUR_RADIUS: usize = 13;
pub const MAX_NOISE_SIGMA: f64 = 100.0;
pub const MAX_BRIGHTNESS: f64 = 8.0;

/// Normalized 1-D Gaussian of width `2r + 1` with `sigma = r / 3`.
pub fn blur_kernel(radius: usize) -> Vec<f64> {
    let sigma = radius as f64 / 3.0;
    let k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.into_iter().map(|v| v / total).collect()
}

/// Separable Gaussian blur with clamp-to-edge padding.
pub fn gaussian_blur(img: &ImageBuffer, radius: usize) -> Result<ImageBuffer> {
    if radius < 1 {
        return Err(Error::invalid("blur radius must be >= 1"));
    }
    let k = blur_kernel(radius);
    let (h, w, c) = (img.height(), img.width(), img.channels());
    let r = radius as isize;
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let src = img.data();
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (i, kv) in k.iter().enumerate() {
                    let xx = clampi(x as isize + i as isize - r, w);
                    acc += kv * src[(y * w + xx) * c + ch];
                }
                tmp[(y * w + x) * c + ch] = acc;
            }
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (i, kv) in k.iter().enumerate() {
                    let yy = clampi(y as isize + i as isize - r, h);
                    acc += kv * tmp[(yy * w + x) * c + ch];
                }
                out[(y * w + x) * c + ch] = acc.clamp(0.0, 1.0);
            }
        }
    }
    ImageBuffer::new(h, w, c, out)
}

/// `clamp01(x + N(0, (sigma255 / 255)^2))`, seeded.
pub fn gaussian_noise(img: &ImageBuffer, sigma255: f64, seed: u64) -> Result<ImageBuffer> {
    if !(sigma255 > 0.0) {
        return Err(Error::invalid("noise sigma must be > 0"));
    }
    let s = sigma255 / 255.0;
    let mut rng = SeededRng::derived(seed, "gaussian-noise", 0);
    let data = img
        .data()
        .iter()
        .map(|&v| (v + s * rng.normal()).clamp(0.0, 1.0))
        .collect();
    ImageBuffer::new(img.height(), img.width(), img.channels(), data)
}

/// `clamp01(factor * x)`.
pub fn brightness_scale(img: &ImageBuffer, factor: f64) -> Result<ImageBuffer> {
    if !(factor > 0.0) {
        return Err(Error::invalid("brightness factor must be > 0"));
    }
    Ok(img.map(|v| (factor * v).clamp(0.0, 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistortionKind {
    GaussianBlur,
    GaussianNoise,
    Brightness,
}

impl DistortionKind {
    pub fn name(self) -> &'static str {
        match self {
            DistortionKind::GaussianBlur => "blur",
            DistortionKind::GaussianNoise => "noise",
            DistortionKind::Brightness => "brightness",
        }
    }
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistortionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            DistortionKind::GaussianBlur,
            DistortionKind::GaussianNoise,
            DistortionKind::Brightness,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown distortion `{s}`")))
    }
}

/// One distortion operating point. `level` is the blur radius in pixels,
/// the noise sigma on the 0..255 scale, or the brightness factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub level: f64,
    pub seed: u64,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind, level: f64, seed: u64) -> Result<Self> {
        let spec = DistortionSpec { kind, level, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.level > 0.0
            && match self.kind {
                DistortionKind::GaussianBlur => {
                    self.level.fract() == 0.0 && self.level <= MAX_BLUR_RADIUS as f64
                }
                DistortionKind::GaussianNoise => self.level <= MAX_NOISE_SIGMA,
                DistortionKind::Brightness => self.level <= MAX_BRIGHTNESS,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{} level {} out of range",
                self.kind, self.level
            )))
        }
    }

    /// Apply to `img`; `index` decorrelates noise across a batch.
    pub fn apply(&self, img: &ImageBuffer, index: u64) -> Result<ImageBuffer> {
        match self.kind {
            DistortionKind::GaussianBlur => gaussian_blur(img, self.level as usize),
            DistortionKind::GaussianNoise => gaussian_noise(
                img,
                self.level,
                crate::rng::derive_seed(self.seed, "noise-image", index),
            ),
            DistortionKind::Brightness => brightness_scale(img, self.level),
        }
    }

    /// The 12-point baseline grid: blur radii, noise sigmas, brightness factors.
    pub fn default_grid(seed: u64) -> Vec<DistortionSpec> {
        let mut grid = Vec::new();
        for r in [1.0, 3.0, 5.0, 9.0, 13.0] {
            grid.push(DistortionSpec {
                kind: DistortionKind::GaussianBlur,
                level: r,
                seed,
            });
        }
        for s in [10.0, 25.0, 50.0, 100.0] {
            grid.push(DistortionSpec {
                kind: DistortionKind::GaussianNoise,
                level: s,
                seed,
            });
        }
        for f in [2.0, 4.0, 8.0] {
            grid.push(DistortionSpec {
                kind: DistortionKind::Brightness,
                level: f,
                seed,
            });
        }
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::Signal;

    #[test]
    fn blur_examples() {
        let flat = ImageBuffer::filled(20, 20, 3, 0.37).unwrap();
        let out = gaussian_blur(&flat, 5).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-15));

        let (n, r) = (31, 4);
        let mut imp = ImageBuffer::filled(n, n, 1, 0.0).unwrap();
        imp.set(15, 15, 0, 1.0);
        let out = gaussian_blur(&imp, r).unwrap();
        let k = blur_kernel(r);
        for y in 0..n {
            for x in 0..n {
                let (dy, dx) = (y as isize - 15, x as isize - 15);
                let expect = if dy.abs() <= r as isize && dx.abs() <= r as isize {
                    k[(dy + r as isize) as usize] * k[(dx + r as isize) as usize]
                } else {
                    0.0
                };
                assert!((out.get(y, x, 0) - expect).abs() < 1e-15);
            }
        }
        let total: f64 = out.data().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(gaussian_blur(&flat, 0).is_err());
    }

    #[test]
    fn noise_examples() {
        let gray = ImageBuffer::filled(512, 512, 1, 0.5).unwrap();
        let out = gaussian_noise(&gray, 10.0, 3).unwrap();
        let n = out.data().len() as f64;
        let mean = out.data().iter().map(|v| v - 0.5).sum::<f64>() / n;
        let std = (out.data().iter().map(|v| (v - 0.5 - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std / (10.0 / 255.0) - 1.0).abs() < 0.02, "std {std}");
        assert_eq!(out, gaussian_noise(&gray, 10.0, 3).unwrap());
        let tiny = gaussian_noise(&gray, 1e-9, 3).unwrap();
        assert!(tiny.data().iter().all(|v| (v - 0.5).abs() < 1e-9));
        assert!(gaussian_noise(&gray, 0.0, 3).is_err());
    }

    #[test]
    fn brightness_examples() {
        let mut rng = crate::rng::SeededRng::new(1);
        let data: Vec<f64> = (0..64).map(|_| rng.uniform()).collect();
        let img = ImageBuffer::new(8, 8, 1, data).unwrap();
        assert_eq!(brightness_scale(&img, 1.0).unwrap(), img);
        let half = brightness_scale(&img, 0.5).unwrap();
        for (a, b) in half.samples().iter().zip(img.samples()) {
            assert_eq!(*a, 0.5 * b);
        }
        let bright = img.map(|v| 0.125 + 0.875 * v);
        assert!(brightness_scale(&bright, 8.0)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 1.0));
    }

    #[test]
    fn spec_validation_and_grid() {
        assert!(DistortionSpec::new(DistortionKind::GaussianBlur, 14.0, 0).is_err());
        assert!(DistortionSpec::new(DistortionKind::GaussianBlur, 2.5, 0).is_err());
        assert!(DistortionSpec::new(DistortionKind::GaussianNoise, 101.0, 0).is_err());
        assert!(DistortionSpec::new(DistortionKind::Brightness, 0.0, 0).is_err());
        let grid = DistortionSpec::default_grid(1);
        assert_eq!(grid.len(), 12);
        grid.iter().for_each(|s| s.validate().unwrap());
        assert_eq!("noise".parse::<DistortionKind>().unwrap(), DistortionKind::GaussianNoise);
    }
}
