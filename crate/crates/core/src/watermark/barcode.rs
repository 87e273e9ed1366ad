//! Column-constant pattern: payload bits modulate horizontal DCT-II basis
//! functions in the upper three quarters of the horizontal spectrum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Unused band bins kept as a noise reference for normalization.
const MIN_REFERENCE_BINS: usize = 8;

#[derive(Clone, Debug)]
pub struct BarcodeBands {
    width: usize,
    /// DCT index carrying each payload bit.
    pub bit_bins: Vec<usize>,
    /// Band bins left empty, used to estimate the noise floor.
    pub reference_bins: Vec<usize>,
}

impl BarcodeBands {
    pub fn new(width: usize, bits: usize, seed: u64) -> Result<Self> {
        let lo = width / 4;
        let band = width - lo;
        if band < bits + MIN_REFERENCE_BINS {
            return Err(Error::invalid(format!(
                "barcode needs {} horizontal bins above width/4, width {width} has {band}",
                bits + MIN_REFERENCE_BINS
            )));
        }
        let perm = SeededRng::derived(seed, "barcode-bins", 0).permutation(band);
        let bins: Vec<usize> = perm.iter().map(|&p| p + lo).collect();
        Ok(BarcodeBands {
            width,
            bit_bins: bins[..bits].to_vec(),
            reference_bins: bins[bits..].to_vec(),
        })
    }

    /// Orthonormal DCT-II basis function `k` sampled at every column.
    pub fn basis(&self, k: usize) -> Vec<f64> {
        let w = self.width as f64;
        let norm = (2.0 / w).sqrt();
        (0..self.width)
            .map(|x| norm * (PI * (2.0 * x as f64 + 1.0) * k as f64 / (2.0 * w)).cos())
            .collect()
    }

    /// Column profile of the pattern; each basis gets `amplitude * sqrt(W / L)`
    /// so the pattern RMS equals `amplitude`.
    pub fn profile(&self, payload: &[bool], amplitude: f64) -> Vec<f64> {
        let a = amplitude * (self.width as f64 / self.bit_bins.len() as f64).sqrt();
        let mut profile = vec![0.0; self.width];
        for (&k, &bit) in self.bit_bins.iter().zip(payload) {
            let s = if bit { a } else { -a };
            for (p, b) in profile.iter_mut().zip(self.basis(k)) {
                *p += s * b;
            }
        }
        profile
    }

    fn project(&self, profile: &[f64], k: usize) -> f64 {
        profile.iter().zip(self.basis(k)).map(|(p, b)| p * b).sum()
    }

    /// Per-bit coefficients divided by the RMS of the reference bins.
    pub fn correlate(&self, profile: &[f64]) -> Vec<f64> {
        let noise = (self
            .reference_bins
            .iter()
            .map(|&k| self.project(profile, k).powi(2))
            .sum::<f64>()
            / self.reference_bins.len() as f64)
            .sqrt()
            .max(1e-15);
        self.bit_bins
            .iter()
            .map(|&k| self.project(profile, k) / noise)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal() {
        let bands = BarcodeBands::new(64, 32, 1).unwrap();
        let a = bands.basis(20);
        let b = bands.basis(41);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&a, &a) - 1.0).abs() < 1e-12);
        assert!(dot(&a, &b).abs() < 1e-12);
    }

    #[test]
    fn bins_are_disjoint_and_high() {
        let bands = BarcodeBands::new(128, 32, 4).unwrap();
        assert!(bands.bit_bins.iter().all(|&k| k >= 32 && k < 128));
        assert!(bands
            .bit_bins
            .iter()
            .all(|k| !bands.reference_bins.contains(k)));
        assert!(BarcodeBands::new(40, 32, 4).is_err());
    }
}
