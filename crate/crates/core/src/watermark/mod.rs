//! Synthetic watermark schemes.
//!
//! Three image schemes are content-agnostic: their embedding adds a fixed,
//! key-determined pattern regardless of the cover. `AdaptiveMasked` flips
//! its chips by the sign of the cover's local Laplacian, so the injected
//! delta averages out across covers. `AudioSpread` is a time-domain
//! spread-spectrum mark on 16 kHz clips.

mod barcode;
mod chips;
mod filters;
mod ring;

use std::fmt;
use std::str::FromStr;

pub use barcode::BarcodeBands;
pub use chips::ChipAssignment;
pub use filters::{first_difference, laplacian};
pub use ring::{RingMask, RingSpec, DEFAULT_RINGS};

use crate::error::{Error, Result};
use crate::fourier::Grid;
use crate::media::{MediaShape, PatternDelta, Signal};
use crate::rng::SeededRng;

pub const DEFAULT_PAYLOAD_BITS: usize = 32;
pub const DEFAULT_IMAGE_AMPLITUDE: f64 = 0.012;
pub const DEFAULT_AUDIO_AMPLITUDE: f64 = 0.005;
pub const MAX_AMPLITUDE: f64 = 0.2;

/// Mean per-bit |z| above which an audio clip is declared watermarked.
/// Clean clips concentrate near `sqrt(2/pi) ~ 0.8`.
pub const AUDIO_DETECTION_THRESHOLD: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    SpreadSpatial,
    FourierRing,
    DctBarcode,
    AdaptiveMasked,
    AudioSpread,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::SpreadSpatial,
        Scheme::FourierRing,
        Scheme::DctBarcode,
        Scheme::AdaptiveMasked,
        Scheme::AudioSpread,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SpreadSpatial => "spread-spatial",
            Scheme::FourierRing => "fourier-ring",
            Scheme::DctBarcode => "dct-barcode",
            Scheme::AdaptiveMasked => "adaptive-masked",
            Scheme::AudioSpread => "audio-spread",
        }
    }

    pub fn is_content_agnostic(self) -> bool {
        self != Scheme::AdaptiveMasked
    }

    pub fn has_payload(self) -> bool {
        self != Scheme::FourierRing
    }

    pub fn is_audio(self) -> bool {
        self == Scheme::AudioSpread
    }

    pub fn default_amplitude(self) -> f64 {
        if self.is_audio() {
            DEFAULT_AUDIO_AMPLITUDE
        } else {
            DEFAULT_IMAGE_AMPLITUDE
        }
    }

    pub fn default_payload_bits(self) -> usize {
        if self.has_payload() {
            DEFAULT_PAYLOAD_BITS
        } else {
            0
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scheme `{s}`")))
    }
}

/// Everything that determines an embedder/detector pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WatermarkKey {
    scheme: Scheme,
    seed: u64,
    payload: Vec<bool>,
    amplitude: f64,
}

impl WatermarkKey {
    pub fn new(scheme: Scheme, seed: u64, payload: Vec<bool>, amplitude: f64) -> Result<Self> {
        if !(0.0..=MAX_AMPLITUDE).contains(&amplitude) {
            return Err(Error::invalid(format!(
                "amplitude {amplitude} outside [0, {MAX_AMPLITUDE}]"
            )));
        }
        if scheme.has_payload() && payload.is_empty() {
            return Err(Error::invalid(format!("{scheme} needs a nonempty payload")));
        }
        if !scheme.has_payload() && !payload.is_empty() {
            return Err(Error::NoPayload {
                scheme: scheme.name(),
            });
        }
        Ok(WatermarkKey {
            scheme,
            seed,
            payload,
            amplitude,
        })
    }

    /// Key with a seed-derived payload of the default length and default amplitude.
    pub fn generate(scheme: Scheme, seed: u64) -> Self {
        let mut rng = SeededRng::derived(seed, "payload", 0);
        let payload = (0..scheme.default_payload_bits())
            .map(|_| rng.bit())
            .collect();
        WatermarkKey {
            scheme,
            seed,
            payload,
            amplitude: scheme.default_amplitude(),
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        self.amplitude = amplitude;
        Self::new(self.scheme, self.seed, self.payload, self.amplitude)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn payload(&self) -> &[bool] {
        &self.payload
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Short stable identifier for manifests and reports.
    pub fn id(&self) -> String {
        format!("{}-{:016x}", self.scheme, self.seed)
    }
}

fn payload_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|nib| {
            let v = nib
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << (3 - i)));
            char::from_digit(v, 16).unwrap()
        })
        .collect()
}

fn payload_from_hex(hex: &str) -> Result<Vec<bool>> {
    hex.chars()
        .map(|ch| {
            ch.to_digit(16)
                .map(|v| (0..4).rev().map(move |i| (v >> i) & 1 == 1))
                .ok_or_else(|| Error::Malformed {
                    what: "key payload",
                    reason: format!("`{ch}` is not a hex digit"),
                })
        })
        .collect::<Result<Vec<_>>>()
        .map(|nibs| nibs.into_iter().flatten().collect())
}

/// `scheme=<name> seed=<u64> payload=<hex> alpha=<float>` on one line.
/// Payload length must be a multiple of four to round-trip.
impl fmt::Display for WatermarkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scheme={} seed={} payload={} alpha={}",
            self.scheme,
            self.seed,
            payload_to_hex(&self.payload),
            self.amplitude
        )
    }
}

impl FromStr for WatermarkKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let malformed = |reason: String| Error::Malformed {
            what: "key record",
            reason,
        };
        let (mut scheme, mut seed, mut payload, mut alpha) = (None, None, None, None);
        for field in s.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| malformed(format!("field `{field}` lacks `=`")))?;
            match k {
                "scheme" => scheme = Some(v.parse::<Scheme>()?),
                "seed" => {
                    seed = Some(
                        v.parse::<u64>()
                            .map_err(|e| malformed(format!("seed: {e}")))?,
                    )
                }
                "payload" => payload = Some(payload_from_hex(v)?),
                "alpha" => {
                    alpha = Some(
                        v.parse::<f64>()
                            .map_err(|e| malformed(format!("alpha: {e}")))?,
                    )
                }
                other => return Err(malformed(format!("unknown field `{other}`"))),
            }
        }
        let scheme = scheme.ok_or_else(|| malformed("missing scheme".into()))?;
        WatermarkKey::new(
            scheme,
            seed.ok_or_else(|| malformed("missing seed".into()))?,
            payload.unwrap_or_default(),
            alpha.unwrap_or_else(|| scheme.default_amplitude()),
        )
    }
}

#[derive(Clone, Debug)]
enum Prepared {
    Spread {
        chips: ChipAssignment,
        pattern: Vec<f64>,
    },
    Ring {
        spec: RingSpec,
        mask: RingMask,
        pattern: Vec<f64>,
    },
    Barcode {
        bands: BarcodeBands,
        pattern: Vec<f64>,
    },
    Adaptive {
        chips: ChipAssignment,
    },
    Audio {
        chips: ChipAssignment,
        pattern: Vec<f64>,
    },
}

/// A key bound to a media shape, with its chip maps and patterns precomputed.
#[derive(Clone, Debug)]
pub struct Watermarker {
    key: WatermarkKey,
    shape: MediaShape,
    prepared: Prepared,
}

fn broadcast_plane(plane: &[f64], channels: usize) -> Vec<f64> {
    plane
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, channels))
        .collect()
}

impl Watermarker {
    pub fn new(key: &WatermarkKey, shape: MediaShape) -> Result<Self> {
        let incompatible = || {
            Error::invalid(format!(
                "{} cannot watermark a {shape}",
                key.scheme.name()
            ))
        };
        let prepared = match (key.scheme, shape) {
            (
                Scheme::SpreadSpatial | Scheme::AdaptiveMasked,
                MediaShape::Image { .. },
            ) => {
                if shape.len() < key.payload.len() {
                    return Err(incompatible());
                }
                let chips = ChipAssignment::new(shape.len(), key.payload.len(), key.seed);
                if key.scheme == Scheme::SpreadSpatial {
                    let pattern = chips.modulate(&key.payload, key.amplitude);
                    Prepared::Spread { chips, pattern }
                } else {
                    Prepared::Adaptive { chips }
                }
            }
            (
                Scheme::FourierRing,
                MediaShape::Image {
                    height,
                    width,
                    channels,
                },
            ) => {
                let spec = RingSpec::generate(key.seed, height, width, key.amplitude)?;
                let mask = spec.mask(height, width);
                let pattern = broadcast_plane(&spec.plane(&mask).data, channels);
                Prepared::Ring {
                    spec,
                    mask,
                    pattern,
                }
            }
            (
                Scheme::DctBarcode,
                MediaShape::Image {
                    height,
                    width,
                    channels,
                },
            ) => {
                let bands = BarcodeBands::new(width, key.payload.len(), key.seed)?;
                let profile = bands.profile(&key.payload, key.amplitude);
                let mut pattern = Vec::with_capacity(shape.len());
                for _ in 0..height {
                    pattern.extend(broadcast_plane(&profile, channels));
                }
                Prepared::Barcode { bands, pattern }
            }
            (Scheme::AudioSpread, MediaShape::Audio { samples }) => {
                if samples < key.payload.len() {
                    return Err(incompatible());
                }
                let chips = ChipAssignment::new(samples, key.payload.len(), key.seed);
                let pattern = chips.modulate(&key.payload, key.amplitude);
                Prepared::Audio { chips, pattern }
            }
            _ => return Err(incompatible()),
        };
        Ok(Watermarker {
            key: key.clone(),
            shape,
            prepared,
        })
    }

    pub fn key(&self) -> &WatermarkKey {
        &self.key
    }

    pub fn shape(&self) -> MediaShape {
        self.shape
    }

    pub fn ring_spec(&self) -> Option<(&RingSpec, &RingMask)> {
        match &self.prepared {
            Prepared::Ring { spec, mask, .. } => Some((spec, mask)),
            _ => None,
        }
    }

    /// The exact additive delta of a content-agnostic scheme.
    pub fn reference_pattern(&self) -> Result<PatternDelta> {
        let data = match &self.prepared {
            Prepared::Spread { pattern, .. }
            | Prepared::Ring { pattern, .. }
            | Prepared::Barcode { pattern, .. }
            | Prepared::Audio { pattern, .. } => pattern.clone(),
            Prepared::Adaptive { .. } => {
                return Err(Error::NoReference {
                    scheme: self.key.scheme.name(),
                })
            }
        };
        PatternDelta::new(self.shape, data)
    }

    /// Adaptive sign field: sign of the Laplacian response, zero mapped to +1.
    fn adaptive_signs(&self, x: &[f64]) -> Vec<f64> {
        let MediaShape::Image {
            height,
            width,
            channels,
        } = self.shape
        else {
            unreachable!("adaptive scheme is image-only")
        };
        laplacian(x, height, width, channels)
            .into_iter()
            .map(|v| if v < 0.0 { -1.0 } else { 1.0 })
            .collect()
    }

    /// The delta this key would inject into `x`, before clamping.
    pub fn injected_delta<M: Signal>(&self, x: &M) -> Result<PatternDelta> {
        self.shape.ensure_same(&x.shape())?;
        match &self.prepared {
            Prepared::Adaptive { chips } => {
                let signs = self.adaptive_signs(x.samples());
                let chip_map = chips.modulate(&self.key.payload, self.key.amplitude);
                PatternDelta::new(
                    self.shape,
                    signs.iter().zip(&chip_map).map(|(s, c)| s * c).collect(),
                )
            }
            _ => self.reference_pattern(),
        }
    }

    pub fn embed<M: Signal>(&self, x: &M) -> Result<M> {
        let delta = self.injected_delta(x)?;
        crate::media::apply_delta(x, &delta, crate::media::Sign::Plus, 1.0)
    }

    /// Per-bit normalized correlations; `None` for the ring scheme.
    pub fn bit_correlations<M: Signal>(&self, x: &M) -> Result<Option<Vec<f64>>> {
        self.shape.ensure_same(&x.shape())?;
        let samples = x.samples();
        Ok(match (&self.prepared, self.shape) {
            (
                Prepared::Spread { chips, .. },
                MediaShape::Image {
                    height,
                    width,
                    channels,
                },
            ) => Some(chips.correlate(&laplacian(samples, height, width, channels), false)),
            (
                Prepared::Adaptive { chips },
                MediaShape::Image {
                    height,
                    width,
                    channels,
                },
            ) => {
                let magnitude: Vec<f64> = laplacian(samples, height, width, channels)
                    .into_iter()
                    .map(f64::abs)
                    .collect();
                Some(chips.correlate(&magnitude, true))
            }
            (
                Prepared::Barcode { bands, .. },
                MediaShape::Image {
                    height,
                    width,
                    channels,
                },
            ) => {
                let mut profile = vec![0.0; width];
                for (i, &v) in samples.iter().enumerate() {
                    profile[(i / channels) % width] += v;
                }
                let inv = 1.0 / (height * channels) as f64;
                profile.iter_mut().for_each(|p| *p *= inv);
                Some(bands.correlate(&profile))
            }
            (Prepared::Audio { chips, .. }, _) => {
                Some(chips.correlate(&first_difference(samples), false))
            }
            _ => None,
        })
    }

    /// Higher means more watermarked.
    pub fn detect_score<M: Signal>(&self, x: &M) -> Result<f64> {
        if let Some(z) = self.bit_correlations(x)? {
            return Ok(z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64);
        }
        let (Prepared::Ring { spec, mask, .. }, MediaShape::Image { height, width, .. }) =
            (&self.prepared, self.shape)
        else {
            unreachable!("only the ring scheme lacks bit correlations")
        };
        let plane = match x.shape() {
            MediaShape::Image { channels, .. } => {
                let inv = 1.0 / channels as f64;
                x.samples()
                    .chunks_exact(channels)
                    .map(|px| px.iter().sum::<f64>() * inv)
                    .collect()
            }
            MediaShape::Audio { .. } => unreachable!(),
        };
        Ok(-spec.distance(mask, &Grid::new(height, width, plane)?))
    }

    pub fn decode_bits<M: Signal>(&self, x: &M) -> Result<Vec<bool>> {
        match self.bit_correlations(x)? {
            Some(z) => Ok(z.into_iter().map(|v| v >= 0.0).collect()),
            None => Err(Error::NoPayload {
                scheme: self.key.scheme.name(),
            }),
        }
    }

    /// Fixed-threshold detection decision, defined for the audio scheme.
    pub fn is_detected<M: Signal>(&self, x: &M) -> Result<bool> {
        if !self.key.scheme.is_audio() {
            return Err(Error::invalid(format!(
                "{} has no fixed detection threshold; calibrate one with tpr_at_fpr",
                self.key.scheme
            )));
        }
        Ok(self.detect_score(x)? > AUDIO_DETECTION_THRESHOLD)
    }
}

pub fn reference_pattern(key: &WatermarkKey, shape: MediaShape) -> Result<PatternDelta> {
    if !key.scheme.is_content_agnostic() {
        return Err(Error::NoReference {
            scheme: key.scheme.name(),
        });
    }
    Watermarker::new(key, shape)?.reference_pattern()
}

pub fn embed<M: Signal>(x: &M, key: &WatermarkKey) -> Result<M> {
    Watermarker::new(key, x.shape())?.embed(x)
}

pub fn detect_score<M: Signal>(x: &M, key: &WatermarkKey) -> Result<f64> {
    Watermarker::new(key, x.shape())?.detect_score(x)
}

pub fn decode_bits<M: Signal>(x: &M, key: &WatermarkKey) -> Result<Vec<bool>> {
    if !key.scheme.has_payload() {
        return Err(Error::NoPayload {
            scheme: key.scheme.name(),
        });
    }
    Watermarker::new(key, x.shape())?.decode_bits(x)
}
