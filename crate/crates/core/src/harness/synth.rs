//! Procedural stand-ins for natural image and audio corpora.
//!
//! Covers are a per-image brightness and tint, a random linear gradient, a
//! low-pass Gaussian field and a little white texture, clamped to
//! `[0.05, 0.95]` to keep embedding away from saturation. The two corpus
//! tags share the same expected mean image but differ in spectral shaping,
//! so blackbox estimates carry sampling error but no systematic bias.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{dft2, idft2, signed_frequency, Grid};
use crate::media::{AudioBuffer, ImageBuffer, MediaShape, AUDIO_RATE, AUDIO_SECONDS};
use crate::rng::SeededRng;

pub const COVER_FLOOR: f64 = 0.05;
pub const COVER_CEIL: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CorpusTag {
    /// Media the victim watermarks.
    Cover,
    /// Unrelated clean corpus used for blackbox extraction.
    Clean,
}

impl CorpusTag {
    pub fn name(self) -> &'static str {
        match self {
            CorpusTag::Cover => "cover",
            CorpusTag::Clean => "clean",
        }
    }

    /// Low-pass field bandwidth, in frequency bins at 128 px.
    fn field_bandwidth(self) -> f64 {
        match self {
            CorpusTag::Cover => 3.0,
            CorpusTag::Clean => 6.0,
        }
    }

    fn texture_std(self) -> f64 {
        match self {
            CorpusTag::Cover => 0.02,
            CorpusTag::Clean => 0.03,
        }
    }

    fn ar_coefficient(self) -> f64 {
        match self {
            CorpusTag::Cover => 0.95,
            CorpusTag::Clean => 0.9,
        }
    }
}

impl fmt::Display for CorpusTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cover" => Ok(CorpusTag::Cover),
            "clean" => Ok(CorpusTag::Clean),
            _ => Err(Error::invalid(format!("unknown corpus tag `{s}`"))),
        }
    }
}

const FIELD_STD: f64 = 0.07;

/// Zero-mean Gaussian field with a Gaussian power spectrum, scaled to `FIELD_STD`.
fn lowpass_field(rng: &mut SeededRng, h: usize, w: usize, bandwidth: f64) -> Vec<f64> {
    let white = Grid {
        height: h,
        width: w,
        data: (0..h * w).map(|_| rng.normal()).collect(),
    };
    let mut spec = dft2(&white);
    let inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    for y in 0..h {
        let fy = signed_frequency(y, h);
        for x in 0..w {
            let fx = signed_frequency(x, w);
            let g = if y == 0 && x == 0 {
                0.0
            } else {
                (-(fy * fy + fx * fx) * inv2s2).exp()
            };
            let v = spec.at_mut(y, x);
            *v = Complex64::new(v.re * g, v.im * g);
        }
    }
    let field = idft2(&spec).data;
    let n = field.len() as f64;
    let mean = field.iter().sum::<f64>() / n;
    let std = (field.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let k = if std > 0.0 { FIELD_STD / std } else { 0.0 };
    field.into_iter().map(|v| (v - mean) * k).collect()
}

/// Cover number `index` of corpus `tag`; a pure function of its arguments.
pub fn synth_image(shape: MediaShape, tag: CorpusTag, seed: u64, index: u64) -> Result<ImageBuffer> {
    let MediaShape::Image {
        height: h,
        width: w,
        channels: c,
    } = shape
    else {
        return Err(Error::invalid(format!("cannot synthesize an image of shape {shape}")));
    };
    let purpose = match tag {
        CorpusTag::Cover => "cover-image",
        CorpusTag::Clean => "clean-image",
    };
    let mut rng = SeededRng::derived(seed, purpose, index);
    let brightness = rng.uniform_range(0.42, 0.58);
    let tint: Vec<f64> = (0..c).map(|_| rng.uniform_range(-0.04, 0.04)).collect();
    let (gy, gx) = (rng.uniform_range(-0.15, 0.15), rng.uniform_range(-0.15, 0.15));
    let bandwidth = tag.field_bandwidth() * h.min(w) as f64 / 128.0;
    let field = lowpass_field(&mut rng, h, w, bandwidth);
    let texture = tag.texture_std();
    let (sy, sx) = (1.0 / (h.max(2) - 1) as f64, 1.0 / (w.max(2) - 1) as f64);
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            let base = brightness
                + gy * (y as f64 * sy - 0.5)
                + gx * (x as f64 * sx - 0.5)
                + field[y * w + x];
            for t in &tint {
                let v = base + t + texture * rng.normal();
                data.push(v.clamp(COVER_FLOOR, COVER_CEIL));
            }
        }
    }
    ImageBuffer::new(h, w, c, data)
}

/// Number of samples in a harness clip.
pub fn clip_len() -> usize {
    (AUDIO_RATE as f64 * AUDIO_SECONDS) as usize
}

/// AR(1) noise clip with a random stationary level in `[0.06, 0.12]`.
pub fn synth_clip(samples: usize, tag: CorpusTag, seed: u64, index: u64) -> Result<AudioBuffer> {
    let purpose = match tag {
        CorpusTag::Cover => "cover-clip",
        CorpusTag::Clean => "clean-clip",
    };
    let mut rng = SeededRng::derived(seed, purpose, index);
    let level = rng.uniform_range(0.06, 0.12);
    let phi = tag.ar_coefficient();
    let drive = level * (1.0 - phi * phi).sqrt();
    let mut prev = level * rng.normal();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        out.push(prev.clamp(-1.0, 1.0));
        prev = phi * prev + drive * rng.normal();
    }
    AudioBuffer::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::Signal;

    #[test]
    fn images_are_deterministic_and_bounded() {
        let shape = MediaShape::image(64, 64, 3);
        let a = synth_image(shape, CorpusTag::Cover, 1, 7).unwrap();
        assert_eq!(a, synth_image(shape, CorpusTag::Cover, 1, 7).unwrap());
        assert_ne!(a, synth_image(shape, CorpusTag::Cover, 1, 8).unwrap());
        assert_ne!(a, synth_image(shape, CorpusTag::Clean, 1, 7).unwrap());
        assert!(a.data().iter().all(|v| (COVER_FLOOR..=COVER_CEIL).contains(v)));
        assert!(synth_image(MediaShape::audio(10), CorpusTag::Cover, 1, 0).is_err());
    }

    #[test]
    fn corpus_means_near_half() {
        let shape = MediaShape::image(64, 64, 3);
        for tag in [CorpusTag::Cover, CorpusTag::Clean] {
            let mean = (0..50)
                .map(|i| synth_image(shape, tag, 3, i).unwrap().mean())
                .sum::<f64>()
                / 50.0;
            assert!((mean - 0.5).abs() < 0.05, "{tag}: {mean}");
        }
    }

    #[test]
    fn clips_are_deterministic_with_expected_level() {
        let a = synth_clip(clip_len(), CorpusTag::Cover, 2, 0).unwrap();
        assert_eq!(a.len(), 32_000);
        assert_eq!(a, synth_clip(clip_len(), CorpusTag::Cover, 2, 0).unwrap());
        let rms = (a.samples().iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt();
        assert!((0.03..0.2).contains(&rms), "rms {rms}");
    }
}
