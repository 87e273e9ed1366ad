//! Concentric-ring pattern in the centered low-frequency Fourier plane.
//!
//! Each annulus carries one real constant. The ring mask is point-symmetric
//! around DC, so the inverse transform is real and the additive image-space
//! pattern is a superposition of ripples centered on pixel `(0, 0)`, i.e.
//! spreading from the image corners.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{dft2, fft_shift, idft2, ifft_shift, Grid};
use crate::rng::SeededRng;

pub const DEFAULT_RINGS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct RingSpec {
    pub num_rings: usize,
    /// Exclusive inner edge of the innermost ring, in frequency bins.
    pub inner_radius: f64,
    /// Inclusive outer edge of the outermost ring; always below `min(H, W) / 4`.
    pub outer_radius: f64,
    /// One constant per ring, in unnormalized spectrum units.
    pub ring_values: Vec<f64>,
}

/// Ring index of every bin in the centered spectrum, `None` outside the annuli.
#[derive(Clone, Debug)]
pub struct RingMask {
    pub height: usize,
    pub width: usize,
    pub ring_of: Vec<Option<u8>>,
    pub counts: Vec<usize>,
}

impl RingSpec {
    fn radii(height: usize, width: usize) -> Result<(f64, f64)> {
        let min = height.min(width);
        if min < 64 {
            return Err(Error::invalid(format!(
                "ring patterns need images of at least 64x64, got {height}x{width}"
            )));
        }
        let quarter = (min / 4) as f64;
        Ok(((min / 16) as f64, quarter - 1.0))
    }

    pub fn mask(&self, height: usize, width: usize) -> RingMask {
        let (cy, cx) = ((height / 2) as f64, (width / 2) as f64);
        let span = self.outer_radius - self.inner_radius;
        let mut counts = vec![0usize; self.num_rings];
        let ring_of = (0..height * width)
            .map(|i| {
                let fy = (i / width) as f64 - cy;
                let fx = (i % width) as f64 - cx;
                let rho = (fy * fy + fx * fx).sqrt();
                if rho <= self.inner_radius || rho > self.outer_radius {
                    return None;
                }
                let r = (((rho - self.inner_radius) / span) * self.num_rings as f64).ceil() as usize;
                let r = r.clamp(1, self.num_rings) - 1;
                counts[r] += 1;
                Some(r as u8)
            })
            .collect();
        RingMask {
            height,
            width,
            ring_of,
            counts,
        }
    }

    /// Ring spec for a key whose image-space pattern has RMS `amplitude`.
    pub fn generate(seed: u64, height: usize, width: usize, amplitude: f64) -> Result<Self> {
        let (inner, outer) = Self::radii(height, width)?;
        let mut rng = SeededRng::derived(seed, "ring-values", 0);
        let raw: Vec<f64> = (0..DEFAULT_RINGS).map(|_| rng.normal()).collect();
        let mut spec = RingSpec {
            num_rings: DEFAULT_RINGS,
            inner_radius: inner,
            outer_radius: outer,
            ring_values: raw,
        };
        let mask = spec.mask(height, width);
        // Zero net spectral mass: the pattern vanishes at the corner pixel
        // instead of stacking every ring into one saturating spike.
        let total: usize = mask.counts.iter().sum();
        let mass: f64 = spec
            .ring_values
            .iter()
            .zip(&mask.counts)
            .map(|(v, &m)| v * m as f64)
            .sum();
        for v in &mut spec.ring_values {
            *v -= mass / total as f64;
        }
        // Parseval: mean(pattern^2) = sum |V|^2 / (H W)^2.
        let energy: f64 = spec
            .ring_values
            .iter()
            .zip(&mask.counts)
            .map(|(v, &m)| v * v * m as f64)
            .sum();
        let scale = if energy > 0.0 {
            amplitude * (height * width) as f64 / energy.sqrt()
        } else {
            0.0
        };
        for v in &mut spec.ring_values {
            *v *= scale;
        }
        Ok(spec)
    }

    /// Centered spectrum holding the ring constants.
    pub fn centered_spectrum(&self, mask: &RingMask) -> Grid<Complex64> {
        Grid {
            height: mask.height,
            width: mask.width,
            data: mask
                .ring_of
                .iter()
                .map(|r| match r {
                    Some(r) => Complex64::new(self.ring_values[*r as usize], 0.0),
                    None => Complex64::default(),
                })
                .collect(),
        }
    }

    /// Real image-space plane of the ring injection (uncentered coordinates).
    pub fn plane(&self, mask: &RingMask) -> Grid<f64> {
        idft2(&ifft_shift(&self.centered_spectrum(mask)))
    }

    /// Normalized L1 distance between a plane's centered spectrum and the rings.
    pub fn distance(&self, mask: &RingMask, plane: &Grid<f64>) -> f64 {
        let spectrum = fft_shift(&dft2(plane));
        let (mut dist, mut norm) = (0.0, 0.0);
        for (s, r) in spectrum.data.iter().zip(&mask.ring_of) {
            if let Some(r) = r {
                let v = self.ring_values[*r as usize];
                dist += (s - Complex64::new(v, 0.0)).norm();
                norm += v.abs();
            }
        }
        if norm > 0.0 {
            dist / norm
        } else {
            dist
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_stay_in_low_frequency_quarter() {
        for &(h, w) in &[(64, 64), (64, 96), (128, 128), (200, 136)] {
            let spec = RingSpec::generate(1, h, w, 0.01).unwrap();
            assert!(spec.outer_radius < (h.min(w) / 4) as f64);
            let mask = spec.mask(h, w);
            assert!(mask.counts.iter().all(|&c| c > 0), "{:?}", mask.counts);
            // DC is never masked
            assert!(mask.ring_of[(h / 2) * w + w / 2].is_none());
        }
        assert!(RingSpec::generate(1, 48, 64, 0.01).is_err());
    }

    #[test]
    fn plane_is_real_with_requested_rms() {
        let (h, w) = (64, 64);
        let spec = RingSpec::generate(3, h, w, 0.012).unwrap();
        let mask = spec.mask(h, w);
        let full = crate::fourier::idft2_complex(&ifft_shift(&spec.centered_spectrum(&mask)));
        assert!(full.data.iter().all(|v| v.im.abs() < 1e-12));
        let plane = spec.plane(&mask);
        let rms = (plane.data.iter().map(|v| v * v).sum::<f64>() / (h * w) as f64).sqrt();
        assert!((rms - 0.012).abs() < 1e-12);
    }
}
