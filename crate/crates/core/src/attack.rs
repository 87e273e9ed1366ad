//! Averaging attack: estimate a content-agnostic watermark delta as the
//! difference between the mean watermarked signal and the mean clean signal,
//! then subtract it (removal) or add it to clean media (forgery).

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::media::{apply_delta, MediaShape, PatternDelta, Sign, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtractionMode {
    /// Clean list holds the exact covers of the watermarked list, index-paired.
    Graybox,
    /// Clean list is an unrelated corpus.
    Blackbox,
}

impl ExtractionMode {
    pub const ALL: [ExtractionMode; 2] = [ExtractionMode::Graybox, ExtractionMode::Blackbox];

    pub fn name(self) -> &'static str {
        match self {
            ExtractionMode::Graybox => "graybox",
            ExtractionMode::Blackbox => "blackbox",
        }
    }
}

impl fmt::Display for ExtractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graybox" => Ok(ExtractionMode::Graybox),
            "blackbox" => Ok(ExtractionMode::Blackbox),
            _ => Err(Error::invalid(format!(
                "unknown mode `{s}` (expected graybox or blackbox)"
            ))),
        }
    }
}

/// Composition of the watermarked collection: `(key id, proportion)`.
pub type KeyMix = Vec<(String, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionConfig {
    pub mode: ExtractionMode,
    pub n: usize,
    pub strength: f64,
    pub key_mix: KeyMix,
}

impl ExtractionConfig {
    pub fn new(mode: ExtractionMode, n: usize) -> Self {
        ExtractionConfig {
            mode,
            n,
            strength: 1.0,
            key_mix: Vec::new(),
        }
    }

    pub fn with_key_mix(mut self, key_mix: KeyMix) -> Self {
        self.key_mix = key_mix;
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    /// Uniform mix over the given key ids.
    pub fn uniform_mix<S: AsRef<str>>(ids: &[S]) -> KeyMix {
        let p = 1.0 / ids.len() as f64;
        ids.iter().map(|id| (id.as_ref().to_owned(), p)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("extraction needs n >= 1"));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::invalid(format!(
                "strength must be finite and >= 0, got {}",
                self.strength
            )));
        }
        if !self.key_mix.is_empty() {
            if self.key_mix.iter().any(|(_, p)| !(*p >= 0.0)) {
                return Err(Error::invalid("key-mix proportions must be >= 0"));
            }
            let total: f64 = self.key_mix.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "key-mix proportions sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Estimated delta plus the bookkeeping needed to interpret it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedPattern {
    pub delta: PatternDelta,
    pub n_used: usize,
    pub mode: ExtractionMode,
    pub key_mix: KeyMix,
    /// Fraction of watermarked samples sitting exactly on a media bound.
    /// Nonzero values mean graybox extraction is no longer exact.
    pub clamp_fraction: f64,
    /// Per-channel mean of the delta. In blackbox mode this exposes any
    /// brightness mismatch between the two corpora.
    pub channel_offsets: Vec<f64>,
}

impl ExtractedPattern {
    pub fn shape(&self) -> MediaShape {
        self.delta.shape()
    }
}

/// Elementwise running mean with Neumaier-compensated sums, so the result
/// is insensitive to summation order far below 1e-12.
#[derive(Clone, Debug)]
pub struct MeanAccumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
    count: usize,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

impl MeanAccumulator {
    pub fn new(len: usize) -> Self {
        MeanAccumulator {
            sum: vec![0.0; len],
            comp: vec![0.0; len],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.sum.len(), "accumulator length mismatch");
        for ((s, c), &v) in self.sum.iter_mut().zip(&mut self.comp).zip(x) {
            neumaier(s, c, v);
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        assert_eq!(other.sum.len(), self.sum.len(), "accumulator length mismatch");
        for i in 0..self.sum.len() {
            let (s, c) = (&mut self.sum[i], &mut self.comp[i]);
            neumaier(s, c, other.sum[i]);
            neumaier(s, c, other.comp[i]);
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> Vec<f64> {
        let inv = 1.0 / self.count.max(1) as f64;
        self.sum
            .iter()
            .zip(&self.comp)
            .map(|(s, c)| (s + c) * inv)
            .collect()
    }
}

/// Streaming form of [`extract_pattern`], fed one watermarked/clean pair at a
/// time. Used by sweeps that read more media than fits in memory.
#[derive(Clone, Debug)]
pub struct PatternAccumulator {
    shape: MediaShape,
    mode: ExtractionMode,
    watermarked: MeanAccumulator,
    clean: MeanAccumulator,
    saturated: usize,
}

impl PatternAccumulator {
    pub fn new(shape: MediaShape, mode: ExtractionMode) -> Self {
        PatternAccumulator {
            shape,
            mode,
            watermarked: MeanAccumulator::new(shape.len()),
            clean: MeanAccumulator::new(shape.len()),
            saturated: 0,
        }
    }

    pub fn mode(&self) -> ExtractionMode {
        self.mode
    }

    pub fn count(&self) -> usize {
        self.watermarked.count().min(self.clean.count())
    }

    pub fn push_watermarked<M: Signal>(&mut self, x: &M) -> Result<()> {
        self.shape.ensure_same(&x.shape())?;
        let (lo, hi) = self.shape.bounds();
        self.saturated += x
            .samples()
            .iter()
            .filter(|&&v| v <= lo || v >= hi)
            .count();
        self.watermarked.add(x.samples());
        Ok(())
    }

    pub fn push_clean<M: Signal>(&mut self, x: &M) -> Result<()> {
        self.shape.ensure_same(&x.shape())?;
        self.clean.add(x.samples());
        Ok(())
    }

    pub fn merge(&mut self, other: &PatternAccumulator) -> Result<()> {
        self.shape.ensure_same(&other.shape)?;
        self.watermarked.merge(&other.watermarked);
        self.clean.merge(&other.clean);
        self.saturated += other.saturated;
        Ok(())
    }

    /// Current estimate; requires equal, nonzero watermarked and clean counts.
    pub fn pattern(&self, key_mix: &KeyMix) -> Result<ExtractedPattern> {
        let (nw, nc) = (self.watermarked.count(), self.clean.count());
        if nw == 0 || nw != nc {
            return Err(Error::invalid(format!(
                "unbalanced accumulation: {nw} watermarked vs {nc} clean"
            )));
        }
        let data: Vec<f64> = self
            .watermarked
            .mean()
            .into_iter()
            .zip(self.clean.mean())
            .map(|(w, c)| w - c)
            .collect();
        let channel_offsets = channel_means(self.shape, &data);
        Ok(ExtractedPattern {
            delta: PatternDelta::new(self.shape, data)?,
            n_used: nw,
            mode: self.mode,
            key_mix: key_mix.clone(),
            clamp_fraction: self.saturated as f64 / (nw * self.shape.len()) as f64,
            channel_offsets,
        })
    }
}

fn channel_means(shape: MediaShape, data: &[f64]) -> Vec<f64> {
    let channels = match shape {
        MediaShape::Image { channels, .. } => channels,
        MediaShape::Audio { .. } => 1,
    };
    let mut sums = vec![0.0; channels];
    for (i, v) in data.iter().enumerate() {
        sums[i % channels] += v;
    }
    let per = (data.len() / channels) as f64;
    sums.into_iter().map(|s| s / per).collect()
}

const PARALLEL_CHUNK: usize = 16;

/// `mean(watermarked[..n]) - mean(clean[..n])`, unclamped.
///
/// Graybox callers must pass index-paired lists; this function cannot tell
/// the modes apart and only records the claimed mode.
pub fn extract_pattern<M: Signal + Sync>(
    watermarked: &[M],
    clean: &[M],
    cfg: &ExtractionConfig,
) -> Result<ExtractedPattern> {
    cfg.validate()?;
    for (what, list) in [("watermarked media", watermarked), ("clean media", clean)] {
        if list.len() < cfg.n {
            return Err(Error::Insufficient {
                what,
                needed: cfg.n,
                available: list.len(),
            });
        }
    }
    let shape = watermarked[0].shape();
    let partials: Vec<PatternAccumulator> = watermarked[..cfg.n]
        .par_chunks(PARALLEL_CHUNK)
        .zip(clean[..cfg.n].par_chunks(PARALLEL_CHUNK))
        .map(|(w, c)| {
            let mut acc = PatternAccumulator::new(shape, cfg.mode);
            for (w, c) in w.iter().zip(c) {
                acc.push_watermarked(w)?;
                acc.push_clean(c)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = PatternAccumulator::new(shape, cfg.mode);
    for p in &partials {
        total.merge(p)?;
    }
    total.pattern(&cfg.key_mix)
}

/// Time-domain variant of [`extract_pattern`] for audio clips.
pub fn extract_audio_pattern(
    watermarked: &[crate::media::AudioBuffer],
    clean: &[crate::media::AudioBuffer],
    cfg: &ExtractionConfig,
) -> Result<ExtractedPattern> {
    extract_pattern(watermarked, clean, cfg)
}

/// `clamp(x - strength * delta)`.
pub fn remove<M: Signal>(x: &M, p: &ExtractedPattern, strength: f64) -> Result<M> {
    check_strength(strength)?;
    apply_delta(x, &p.delta, Sign::Minus, strength)
}

/// `clamp(x + strength * delta)`.
pub fn forge<M: Signal>(x: &M, p: &ExtractedPattern, strength: f64) -> Result<M> {
    check_strength(strength)?;
    apply_delta(x, &p.delta, Sign::Plus, strength)
}

fn check_strength(strength: f64) -> Result<()> {
    if strength >= 0.0 && strength.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "strength must be finite and >= 0, got {strength}"
        )))
    }
}

// Pattern file: 32-byte header followed by little-endian f64 samples.
//
//   0..4    magic "STGP"
//   4..8    height   (u32 LE; 1 for audio)
//   8..12   width    (u32 LE; sample count for audio)
//   12..16  channels (u32 LE; 1 for audio)
//   16      mode     (0 graybox, 1 blackbox)
//   17      media    (0 image, 1 audio)
//   18..24  reserved, zero
//   24..32  n_used   (u64 LE)
const MAGIC: &[u8; 4] = b"STGP";
pub const PATTERN_HEADER_LEN: usize = 32;

pub fn encode_pattern(p: &ExtractedPattern) -> Vec<u8> {
    let (h, w, c, media) = match p.shape() {
        MediaShape::Image {
            height,
            width,
            channels,
        } => (height, width, channels, 0u8),
        MediaShape::Audio { samples } => (1, samples, 1, 1u8),
    };
    let mut out = Vec::with_capacity(PATTERN_HEADER_LEN + 8 * p.delta.data().len());
    out.extend_from_slice(MAGIC);
    for d in [h, w, c] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(match p.mode {
        ExtractionMode::Graybox => 0,
        ExtractionMode::Blackbox => 1,
    });
    out.push(media);
    out.extend_from_slice(&[0u8; 6]);
    out.extend_from_slice(&(p.n_used as u64).to_le_bytes());
    for v in p.delta.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_pattern`]. The key mix and clamp fraction are not
/// stored; they come back empty and zero.
pub fn decode_pattern(bytes: &[u8]) -> Result<ExtractedPattern> {
    let malformed = |reason: String| Error::Malformed {
        what: "pattern file",
        reason,
    };
    if bytes.len() < PATTERN_HEADER_LEN {
        return Err(malformed(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(malformed("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (h, w, c) = (u32_at(4), u32_at(8), u32_at(12));
    let mode = match bytes[16] {
        0 => ExtractionMode::Graybox,
        1 => ExtractionMode::Blackbox,
        m => return Err(malformed(format!("unknown mode byte {m}"))),
    };
    let shape = match bytes[17] {
        0 => MediaShape::image(h, w, c),
        1 if h == 1 && c == 1 => MediaShape::audio(w),
        m => return Err(malformed(format!("bad media byte {m} for {h}x{w}x{c}"))),
    };
    let n_used = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
    let body = &bytes[PATTERN_HEADER_LEN..];
    if body.len() != 8 * shape.len() {
        return Err(malformed(format!(
            "expected {} data bytes for {shape}, found {}",
            8 * shape.len(),
            body.len()
        )));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let channel_offsets = channel_means(shape, &data);
    Ok(ExtractedPattern {
        delta: PatternDelta::new(shape, data)?,
        n_used,
        mode,
        key_mix: Vec::new(),
        clamp_fraction: 0.0,
        channel_offsets,
    })
}

pub fn save_pattern(p: &ExtractedPattern, path: &Path) -> Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&encode_pattern(p)))
        .map_err(|e| Error::io(path, e))
}

pub fn load_pattern(path: &Path) -> Result<ExtractedPattern> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_pattern(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{AudioBuffer, ImageBuffer};
    use crate::rng::SeededRng;

    fn random_images(count: usize, seed: u64) -> Vec<ImageBuffer> {
        let mut rng = SeededRng::new(seed);
        (0..count)
            .map(|_| {
                let data = (0..8 * 8 * 3).map(|_| rng.uniform_range(0.2, 0.8)).collect();
                ImageBuffer::new(8, 8, 3, data).unwrap()
            })
            .collect()
    }

    fn plus(x: &ImageBuffer, d: &PatternDelta) -> ImageBuffer {
        apply_delta(x, d, Sign::Plus, 1.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ExtractionConfig::new(ExtractionMode::Graybox, 0).validate().is_err());
        assert!(ExtractionConfig::new(ExtractionMode::Graybox, 3)
            .with_strength(-1.0)
            .validate()
            .is_err());
        let bad = vec![("a".to_string(), 0.5), ("b".to_string(), 0.4)];
        assert!(ExtractionConfig::new(ExtractionMode::Graybox, 3)
            .with_key_mix(bad)
            .validate()
            .is_err());
        let mix = ExtractionConfig::uniform_mix(&["a", "b", "c"]);
        ExtractionConfig::new(ExtractionMode::Blackbox, 3)
            .with_key_mix(mix)
            .validate()
            .unwrap();
        assert_eq!("blackbox".parse::<ExtractionMode>().unwrap(), ExtractionMode::Blackbox);
        assert!("whitebox".parse::<ExtractionMode>().is_err());
    }

    #[test]
    fn graybox_recovers_delta_exactly() {
        let covers = random_images(100, 1);
        let mut rng = SeededRng::new(2);
        let shape = covers[0].shape();
        let d = PatternDelta::new(
            shape,
            (0..shape.len()).map(|_| 0.05 * (rng.uniform() - 0.5)).collect(),
        )
        .unwrap();
        let wm: Vec<_> = covers.iter().map(|x| plus(x, &d)).collect();
        for n in [1, 10, 100] {
            let cfg = ExtractionConfig::new(ExtractionMode::Graybox, n);
            let p = extract_pattern(&wm, &covers, &cfg).unwrap();
            assert_eq!(p.n_used, n);
            assert_eq!(p.clamp_fraction, 0.0);
            let err = p
                .delta
                .data()
                .iter()
                .zip(d.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            for (x, y) in covers.iter().zip(&wm).take(n) {
                let back = remove(y, &p, 1.0).unwrap();
                for (a, b) in back.data().iter().zip(x.data()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn insufficient_media_is_reported() {
        let covers = random_images(4, 1);
        let cfg = ExtractionConfig::new(ExtractionMode::Graybox, 5);
        assert!(matches!(
            extract_pattern(&covers, &covers, &cfg),
            Err(Error::Insufficient { needed: 5, available: 4, .. })
        ));
        let mut mixed = covers.clone();
        mixed[2] = ImageBuffer::filled(8, 8, 1, 0.5).unwrap();
        let cfg = ExtractionConfig::new(ExtractionMode::Graybox, 4);
        assert!(matches!(
            extract_pattern(&mixed, &covers, &cfg),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn strength_zero_is_identity_and_remove_undoes_forge() {
        let x = &random_images(1, 5)[0];
        let others = random_images(6, 6);
        let p = extract_pattern(
            &others[..3],
            &others[3..],
            &ExtractionConfig::new(ExtractionMode::Blackbox, 3),
        )
        .unwrap();
        assert_eq!(&remove(x, &p, 0.0).unwrap(), x);
        assert_eq!(&forge(x, &p, 0.0).unwrap(), x);
        let back = remove(&forge(x, &p, 0.7).unwrap(), &p, 0.7).unwrap();
        let forged_unclamped = x
            .data()
            .iter()
            .zip(p.delta.data())
            .map(|(v, d)| v + 0.7 * d);
        for ((a, b), f) in back.data().iter().zip(x.data()).zip(forged_unclamped) {
            if (0.0..=1.0).contains(&f) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(remove(x, &p, f64::NAN).is_err());
    }

    #[test]
    fn clamp_fraction_counts_saturated_samples() {
        let white = vec![ImageBuffer::filled(8, 8, 1, 1.0).unwrap(); 2];
        let gray = vec![ImageBuffer::filled(8, 8, 1, 0.5).unwrap(); 2];
        let p = extract_pattern(&white, &gray, &ExtractionConfig::new(ExtractionMode::Graybox, 2))
            .unwrap();
        assert_eq!(p.clamp_fraction, 1.0);
        assert_eq!(p.channel_offsets, vec![0.5]);
    }

    #[test]
    fn audio_graybox_constant_delta() {
        let mut rng = SeededRng::new(3);
        let clips: Vec<_> = (0..5)
            .map(|_| AudioBuffer::new((0..400).map(|_| 0.1 * rng.normal()).collect()).unwrap())
            .collect();
        let d = PatternDelta::new(MediaShape::audio(400), vec![0.003; 400]).unwrap();
        let wm: Vec<_> = clips
            .iter()
            .map(|c| apply_delta(c, &d, Sign::Plus, 1.0).unwrap())
            .collect();
        let p = extract_audio_pattern(&wm, &clips, &ExtractionConfig::new(ExtractionMode::Graybox, 5))
            .unwrap();
        assert!(p.delta.data().iter().all(|v| (v - 0.003).abs() < 1e-12));
    }

    #[test]
    fn pattern_file_round_trips() {
        let imgs = random_images(4, 9);
        let p = extract_pattern(&imgs[..2], &imgs[2..], &ExtractionConfig::new(ExtractionMode::Blackbox, 2))
            .unwrap();
        let bytes = encode_pattern(&p);
        assert_eq!(bytes.len(), 32 + 8 * 8 * 8 * 3);
        assert_eq!(&bytes[..4], b"STGP");
        assert_eq!(bytes[16], 1);
        let back = decode_pattern(&bytes).unwrap();
        assert_eq!(back.delta, p.delta);
        assert_eq!(back.n_used, 2);
        assert_eq!(back.mode, ExtractionMode::Blackbox);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.stgp");
        save_pattern(&p, &path).unwrap();
        assert_eq!(load_pattern(&path).unwrap().delta, p.delta);

        assert!(decode_pattern(&bytes[..40]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_pattern(&bad).is_err());
    }

    #[test]
    fn compensated_mean_is_order_insensitive() {
        let mut rng = SeededRng::new(4);
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|_| (0..4).map(|_| rng.normal() * 10f64.powi(rng.below(12) as i32 - 6)).collect())
            .collect();
        let mut fwd = MeanAccumulator::new(4);
        rows.iter().for_each(|r| fwd.add(r));
        let mut rev = MeanAccumulator::new(4);
        rows.iter().rev().for_each(|r| rev.add(r));
        for (a, b) in fwd.mean().iter().zip(rev.mean()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300) + 1e-18);
        }
    }
}
