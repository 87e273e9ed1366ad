//! Fidelity and detection metrics.

use crate::error::{Error, Result};
use crate::media::{ImageBuffer, MediaShape, Signal};

/// Value reported for identical signals instead of +inf.
pub const DB_CAP: f64 = 99.0;

pub const DEFAULT_FPR: f64 = 0.01;

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

fn cap_db(v: f64) -> f64 {
    v.clamp(-DB_CAP, DB_CAP)
}

/// `10 log10(1 / MSE)` with peak 1.0; 99 dB for identical inputs.
pub fn psnr<M: Signal>(a: &M, b: &M) -> Result<f64> {
    a.shape().ensure_same(&b.shape())?;
    let mse = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.samples().len() as f64;
    if mse == 0.0 {
        return Ok(DB_CAP);
    }
    Ok(cap_db(-10.0 * mse.log10()))
}

fn gaussian_window() -> Vec<f64> {
    let w: Vec<f64> = (0..=2 * SSIM_RADIUS)
        .map(|i| {
            let d = i as f64 - SSIM_RADIUS as f64;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Separable "valid" filtering: output is `(h - 2r) x (w - 2r)`.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64]) -> Vec<f64> {
    let r = k.len() / 2;
    let ow = w - 2 * r;
    let oh = h - 2 * r;
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        let src = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&src[x..x + k.len()]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, a)| a * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean local SSIM (11x11 Gaussian window, sigma 1.5, no padding), averaged
/// over channels.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.shape().ensure_same(&b.shape())?;
    let (h, w) = (a.height(), a.width());
    let win = 2 * SSIM_RADIUS + 1;
    if h < win || w < win {
        return Err(Error::invalid(format!(
            "ssim needs at least {win}x{win} pixels, got {h}x{w}"
        )));
    }
    let k = gaussian_window();
    let mut total = 0.0;
    for c in 0..a.channels() {
        let (pa, pb) = (a.plane(c), b.plane(c));
        let prod = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).collect::<Vec<_>>();
        let mu_a = filter_valid(&pa, h, w, &k);
        let mu_b = filter_valid(&pb, h, w, &k);
        let aa = filter_valid(&prod(&pa, &pa), h, w, &k);
        let bb = filter_valid(&prod(&pb, &pb), h, w, &k);
        let ab = filter_valid(&prod(&pa, &pb), h, w, &k);
        let mut sum = 0.0;
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            sum += ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
        }
        total += sum / mu_a.len() as f64;
    }
    Ok(total / a.channels() as f64)
}

pub fn bit_accuracy(decoded: &[bool], truth: &[bool]) -> Result<f64> {
    if decoded.len() != truth.len() || truth.is_empty() {
        return Err(Error::invalid(format!(
            "bit accuracy needs equal nonzero lengths, got {} and {}",
            decoded.len(),
            truth.len()
        )));
    }
    let hits = decoded.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Detector scores for watermarked (`positive`) and clean (`negative`) media.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreSet {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

impl ScoreSet {
    pub fn new(positive: Vec<f64>, negative: Vec<f64>) -> Result<Self> {
        let s = ScoreSet { positive, negative };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(Error::invalid(format!(
                "score set needs both sides, got {} positive and {} negative",
                self.positive.len(),
                self.negative.len()
            )));
        }
        if self.positive.iter().chain(&self.negative).any(|v| v.is_nan()) {
            return Err(Error::invalid("score set contains NaN"));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        ScoreSet {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Mann-Whitney AUC: `P(pos > neg) + P(pos = neg) / 2`.
pub fn roc_auc(s: &ScoreSet) -> Result<f64> {
    s.validate()?;
    let neg = sorted(&s.negative);
    // Twice the U statistic, kept integral so that swapping sides is exact.
    let (mut wins2, mut losses2) = (0u128, 0u128);
    for &p in &s.positive {
        let below = neg.partition_point(|&n| n < p) as u128;
        let not_above = neg.partition_point(|&n| n <= p) as u128;
        let ties = not_above - below;
        let above = neg.len() as u128 - not_above;
        wins2 += 2 * below + ties;
        losses2 += 2 * above + ties;
    }
    let total = (wins2 + losses2) as f64;
    Ok(if wins2 <= losses2 {
        wins2 as f64 / total
    } else {
        1.0 - losses2 as f64 / total
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocResult {
    pub auc: f64,
    /// Smallest threshold whose empirical FPR (`neg >= tau`) is within target.
    pub threshold_at_fpr: f64,
    pub tpr_at_fpr: f64,
    pub fpr_target: f64,
    /// Fewer than `1 / fpr_target` negatives: the threshold is coarse.
    pub undersampled: bool,
}

/// Calibrate `tau` on the negatives and report the positive pass rate.
pub fn tpr_at_fpr(s: &ScoreSet, fpr_target: f64) -> Result<RocResult> {
    s.validate()?;
    if !(0.0..=1.0).contains(&fpr_target) {
        return Err(Error::invalid(format!(
            "fpr target {fpr_target} outside [0, 1]"
        )));
    }
    let mut neg = sorted(&s.negative);
    neg.reverse();
    let allowed = (fpr_target * neg.len() as f64).floor() as usize;
    // Any tau above the (allowed+1)-th largest negative admits at most
    // `allowed` negatives; the smallest representable one is its successor.
    let tau = if allowed >= neg.len() {
        f64::NEG_INFINITY
    } else {
        neg[allowed].next_up()
    };
    let passed = s.positive.iter().filter(|&&p| p >= tau).count();
    Ok(RocResult {
        auc: roc_auc(s)?,
        threshold_at_fpr: tau,
        tpr_at_fpr: passed as f64 / s.positive.len() as f64,
        fpr_target,
        undersampled: (neg.len() as f64) < 1.0 / fpr_target,
    })
}

/// Fraction of `scores` at or above `tau`.
pub fn pass_rate(scores: &[f64], tau: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|&&v| v >= tau).count() as f64 / scores.len() as f64
}

/// Scale-invariant SNR of `estimate` against `reference`, clamped to +-99 dB.
pub fn si_snr(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::ShapeMismatch {
            expected: MediaShape::audio(reference.len()),
            found: MediaShape::audio(estimate.len()),
        });
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let ss = dot(reference, reference);
    if ss == 0.0 {
        return Err(Error::invalid("si-snr reference is all zero"));
    }
    let k = dot(estimate, reference) / ss;
    let target_energy = k * k * ss;
    let noise_energy: f64 = estimate
        .iter()
        .zip(reference)
        .map(|(e, r)| (e - k * r).powi(2))
        .sum();
    if noise_energy == 0.0 {
        return Ok(DB_CAP);
    }
    if target_energy == 0.0 {
        return Ok(-DB_CAP);
    }
    Ok(cap_db(10.0 * (target_energy / noise_energy).log10()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn img(h: usize, w: usize, c: usize, data: Vec<f64>) -> ImageBuffer {
        ImageBuffer::new(h, w, c, data).unwrap()
    }

    fn random_img(h: usize, w: usize, c: usize, seed: u64) -> ImageBuffer {
        let mut rng = SeededRng::new(seed);
        img(h, w, c, (0..h * w * c).map(|_| rng.uniform()).collect())
    }

    #[test]
    fn psnr_examples() {
        let a = random_img(8, 8, 3, 1);
        assert_eq!(psnr(&a, &a).unwrap(), 99.0);
        let zeros = ImageBuffer::filled(4, 4, 1, 0.0).unwrap();
        let ones = ImageBuffer::filled(4, 4, 1, 1.0).unwrap();
        assert_eq!(psnr(&zeros, &ones).unwrap(), 0.0);
        let shifted = a.map(|v| v + 1.0 / 255.0);
        let expect = 20.0 * 255f64.log10();
        assert!((psnr(&a, &shifted).unwrap() - expect).abs() < 1e-9);
        assert!((expect - 48.13).abs() < 0.005);
        assert_eq!(psnr(&a, &shifted).unwrap(), psnr(&shifted, &a).unwrap());
        assert!(psnr(&a, &zeros).is_err());
    }

    #[test]
    fn ssim_examples() {
        let a = random_img(24, 20, 3, 2);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let inv = a.map(|v| 1.0 - v);
        let s = ssim(&a, &inv).unwrap();
        assert!(s > -1.0 && s < 1.0);
        assert_eq!(s, ssim(&inv, &a).unwrap());

        let c5 = ImageBuffer::filled(16, 16, 1, 0.5).unwrap();
        let c6 = ImageBuffer::filled(16, 16, 1, 0.6).unwrap();
        let c1 = 1e-4;
        let expect = (2.0 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
        assert!((ssim(&c5, &c6).unwrap() - expect).abs() < 1e-9);

        let small = ImageBuffer::filled(10, 16, 1, 0.5).unwrap();
        assert!(ssim(&small, &small).is_err());
    }

    #[test]
    fn ssim_window_is_normalized_gaussian() {
        let w = gaussian_window();
        assert_eq!(w.len(), 11);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[4] / w[5] - (-1.0 / 4.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bit_accuracy_examples() {
        let t = [true, false, true, true];
        assert_eq!(bit_accuracy(&t, &t).unwrap(), 1.0);
        let comp: Vec<bool> = t.iter().map(|b| !b).collect();
        assert_eq!(bit_accuracy(&comp, &t).unwrap(), 0.0);
        assert!(bit_accuracy(&t[..3], &t).is_err());
        assert!(bit_accuracy(&[], &[]).is_err());

        let mut rng = SeededRng::new(7);
        let mut total = 0.0;
        for _ in 0..1000 {
            let a: Vec<bool> = (0..32).map(|_| rng.bit()).collect();
            let b: Vec<bool> = (0..32).map(|_| rng.bit()).collect();
            total += bit_accuracy(&a, &b).unwrap();
        }
        assert!((total / 1000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn auc_examples() {
        let s = ScoreSet::new(vec![0.9, 0.8], vec![0.1, 0.2]).unwrap();
        assert_eq!(roc_auc(&s).unwrap(), 1.0);
        let s = ScoreSet::new(vec![0.1, 0.5, 0.5], vec![0.5, 0.1, 0.5]).unwrap();
        assert_eq!(roc_auc(&s).unwrap(), 0.5);
        let s = ScoreSet::new(vec![0.3], vec![0.1, 0.5]).unwrap();
        assert_eq!(roc_auc(&s).unwrap(), 0.5);
        assert!(ScoreSet::new(vec![], vec![1.0]).is_err());
        assert!(roc_auc(&ScoreSet::default()).is_err());
    }

    /// Quadratic pairwise count, the textbook definition.
    fn auc_oracle(s: &ScoreSet) -> f64 {
        let mut acc = 0.0;
        for p in &s.positive {
            for n in &s.negative {
                acc += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        acc / (s.positive.len() * s.negative.len()) as f64
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        let mut rng = SeededRng::new(11);
        for _ in 0..50 {
            let np = 1 + rng.below(40);
            let nn = 1 + rng.below(40);
            let draw = |rng: &mut SeededRng| (rng.below(10) as f64) / 10.0;
            let s = ScoreSet::new(
                (0..np).map(|_| draw(&mut rng) + 0.05).collect(),
                (0..nn).map(|_| draw(&mut rng)).collect(),
            )
            .unwrap();
            assert!((roc_auc(&s).unwrap() - auc_oracle(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn tpr_examples() {
        let s = ScoreSet::new(vec![5.0, 6.0], (0..100).map(|i| i as f64 / 100.0).collect())
            .unwrap();
        let r = tpr_at_fpr(&s, 0.01).unwrap();
        assert_eq!(r.tpr_at_fpr, 1.0);
        assert_eq!(r.auc, 1.0);
        assert!(!r.undersampled);
        // exactly one negative (0.99) may sit at or above tau
        assert!(r.threshold_at_fpr > 0.98 && r.threshold_at_fpr <= 0.99);
        assert_eq!(pass_rate(&s.negative, r.threshold_at_fpr), 0.01);

        let small = ScoreSet::new(vec![1.0], vec![0.0; 10]).unwrap();
        assert!(tpr_at_fpr(&small, 0.01).unwrap().undersampled);
        assert!(tpr_at_fpr(&small, 1.5).is_err());
    }

    #[test]
    fn tpr_is_fpr_when_distributions_match() {
        let mut rng = SeededRng::new(12);
        let s = ScoreSet::new(
            (0..10_000).map(|_| rng.normal()).collect(),
            (0..10_000).map(|_| rng.normal()).collect(),
        )
        .unwrap();
        let r = tpr_at_fpr(&s, 0.01).unwrap();
        assert!((r.tpr_at_fpr - 0.01).abs() <= 0.005, "{}", r.tpr_at_fpr);
    }

    #[test]
    fn si_snr_examples() {
        let mut rng = SeededRng::new(13);
        let s: Vec<f64> = (0..256).map(|_| rng.normal()).collect();
        assert_eq!(si_snr(&s, &s).unwrap(), 99.0);
        let twice: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        assert_eq!(si_snr(&twice, &s).unwrap(), 99.0);

        // e orthogonal to s with equal norm
        let raw: Vec<f64> = (0..256).map(|_| rng.normal()).collect();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let k = dot(&raw, &s) / dot(&s, &s);
        let e: Vec<f64> = raw.iter().zip(&s).map(|(r, v)| r - k * v).collect();
        let scale = (dot(&s, &s) / dot(&e, &e)).sqrt();
        let est: Vec<f64> = s.iter().zip(&e).map(|(v, e)| v + scale * e).collect();
        assert!(si_snr(&est, &s).unwrap().abs() < 1e-9);

        assert!(si_snr(&s, &vec![0.0; 256]).is_err());
        assert!(si_snr(&s[..10], &s).is_err());
    }
}
