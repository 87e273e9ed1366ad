use crate::rng::SeededRng;

/// Seeded partition of a sample vector into per-bit chip sets.
///
/// A random permutation deals positions round-robin to the `bits` payload
/// bits; within each bit's set the chip signs alternate in dealing order, so
/// every set sums to 0 or +1.
#[derive(Clone, Debug)]
pub struct ChipAssignment {
    bits: usize,
    bit_of: Vec<u32>,
    chip: Vec<f64>,
    members: Vec<Vec<u32>>,
}

impl ChipAssignment {
    pub fn new(len: usize, bits: usize, seed: u64) -> Self {
        assert!(bits > 0 && len >= bits, "need at least one chip per bit");
        let order = SeededRng::derived(seed, "chips", 0).permutation(len);
        let mut bit_of = vec![0u32; len];
        let mut chip = vec![0.0; len];
        let mut members = vec![Vec::with_capacity(len / bits + 1); bits];
        for (i, &pos) in order.iter().enumerate() {
            let bit = i % bits;
            bit_of[pos] = bit as u32;
            chip[pos] = if (i / bits).is_multiple_of(2) { 1.0 } else { -1.0 };
            members[bit].push(pos as u32);
        }
        for m in &mut members {
            m.sort_unstable();
        }
        ChipAssignment {
            bits,
            bit_of,
            chip,
            members,
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.chip.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chip.is_empty()
    }

    #[inline]
    pub fn bit_of(&self, pos: usize) -> usize {
        self.bit_of[pos] as usize
    }

    #[inline]
    pub fn chip(&self, pos: usize) -> f64 {
        self.chip[pos]
    }

    pub fn members(&self, bit: usize) -> &[u32] {
        &self.members[bit]
    }

    /// Chip map with each bit's chips multiplied by its payload sign.
    pub fn modulate(&self, payload: &[bool], amplitude: f64) -> Vec<f64> {
        (0..self.len())
            .map(|p| {
                let s = if payload[self.bit_of(p)] { 1.0 } else { -1.0 };
                amplitude * s * self.chip[p]
            })
            .collect()
    }

    /// Normalized per-bit correlation `sum(chip * h) / ||h||` over each set,
    /// with `h` centered on the set mean when `center` is set.
    pub fn correlate(&self, h: &[f64], center: bool) -> Vec<f64> {
        self.members
            .iter()
            .map(|set| {
                let mean = if center {
                    set.iter().map(|&p| h[p as usize]).sum::<f64>() / set.len() as f64
                } else {
                    0.0
                };
                let (mut num, mut den) = (0.0, 0.0);
                for &p in set {
                    let v = h[p as usize] - mean;
                    num += self.chip[p as usize] * v;
                    den += v * v;
                }
                if den > 0.0 {
                    num / den.sqrt()
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_partition_and_balance() {
        let (len, bits) = (1000, 32);
        let a = ChipAssignment::new(len, bits, 9);
        let mut seen = vec![false; len];
        for b in 0..bits {
            let set = a.members(b);
            assert!(set.len() >= len / bits);
            let sum: f64 = set.iter().map(|&p| a.chip(p as usize)).sum();
            assert!(sum == 0.0 || sum == 1.0, "bit {b} chip sum {sum}");
            for &p in set {
                assert!(!seen[p as usize]);
                seen[p as usize] = true;
                assert_eq!(a.bit_of(p as usize), b);
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
