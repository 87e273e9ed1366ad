//! Seeded randomness.
//!
//! Every random draw in the workbench comes from [`SeededRng`], a
//! xoshiro256++ generator (Blackman & Vigna) seeded through SplitMix64.
//! Independent streams are derived with [`derive_seed`], which hashes a
//! parent seed, a purpose tag and an index, so parallel jobs never share a
//! generator and results do not depend on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes.
fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Sub-seed for `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: &str, index: u64) -> u64 {
    mix64(mix64(seed ^ tag_hash(purpose)) ^ index)
}

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    position: u64,
    inner: Xoshiro256PlusPlus,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            position: 0,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Generator for the sub-stream `(seed, purpose, index)`.
    pub fn derived(seed: u64, purpose: &str, index: u64) -> Self {
        Self::new(derive_seed(seed, purpose, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }

    /// Fisher-Yates permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i + 1);
            p.swap(i, j);
        }
        p
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.position += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // First 16 outputs of xoshiro256++ seeded via SplitMix64 from 42,
    // computed with an independent reference implementation.
    const GOLDEN_42: [u64; 16] = [
        0xD076_4D4F_4476_689F,
        0x519E_4174_576F_3791,
        0xFBE0_7CFB_0C24_ED8C,
        0xB37D_9F60_0CD8_35B8,
        0xCB23_1C38_7484_6A73,
        0x968D_9F00_4E50_DE7D,
        0x2017_18FF_221A_3556,
        0x9AE9_4E07_0ED8_CB46,
        0x352C_F3DA_F095_CCC7,
        0xEEEF_D632_19B4_A0D4,
        0x8F3D_FA98_020E_7942,
        0xD99B_8E00_792F_360D,
        0xAE14_E770_5435_9B98,
        0x11CC_BFBB_3659_0DBD,
        0x672F_CFD4_EFD0_E0BD,
        0x8BC6_E858_D050_1168,
    ];

    #[test]
    fn golden_first_sixteen() {
        let mut rng = SeededRng::new(42);
        let got: Vec<u64> = (0..16).map(|_| rng.next_u64()).collect();
        assert_eq!(got, GOLDEN_42.to_vec());
        assert_eq!(rng.position(), 16);
    }

    #[test]
    fn derived_streams_are_distinct_and_stable() {
        let a = derive_seed(7, "cover", 0);
        let b = derive_seed(7, "cover", 1);
        let c = derive_seed(7, "clean", 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, "cover", 0));
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = SeededRng::new(3);
        let mut p = rng.permutation(100);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
