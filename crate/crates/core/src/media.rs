//! Media containers shared by every other module.
//!
//! All intensities are `f64`. Images live in `[0, 1]`, audio in `[-1, 1]`;
//! quantization only happens in [`crate::codec`].

use std::fmt;

use crate::error::{Error, Result};

/// Sample rate of every audio clip handled by the workbench.
pub const AUDIO_RATE: u32 = 16_000;

/// Clip length used by the harness, in seconds.
pub const AUDIO_SECONDS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MediaShape {
    Image {
        height: usize,
        width: usize,
        channels: usize,
    },
    Audio {
        samples: usize,
    },
}

impl MediaShape {
    pub fn image(height: usize, width: usize, channels: usize) -> Self {
        MediaShape::Image {
            height,
            width,
            channels,
        }
    }

    pub fn audio(samples: usize) -> Self {
        MediaShape::Audio { samples }
    }

    pub fn len(&self) -> usize {
        match *self {
            MediaShape::Image {
                height,
                width,
                channels,
            } => height * width * channels,
            MediaShape::Audio { samples } => samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_image(&self) -> bool {
        matches!(self, MediaShape::Image { .. })
    }

    /// Valid value range of the media kind.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            MediaShape::Image { .. } => (0.0, 1.0),
            MediaShape::Audio { .. } => (-1.0, 1.0),
        }
    }

    pub fn ensure_same(&self, other: &MediaShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: *self,
                found: *other,
            })
        }
    }
}

impl fmt::Display for MediaShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MediaShape::Image {
                height,
                width,
                channels,
            } => write!(f, "{height}x{width}x{channels} image"),
            MediaShape::Audio { samples } => write!(f, "{samples}-sample clip"),
        }
    }
}

/// Common view over images and audio clips: a shaped, bounded sample vector.
pub trait Signal: Sized + Clone {
    fn shape(&self) -> MediaShape;
    fn samples(&self) -> &[f64];
    fn samples_mut(&mut self) -> &mut [f64];
    /// Rebuild media of `shape` from raw samples. Samples are not clamped.
    fn from_samples(shape: MediaShape, data: Vec<f64>) -> Result<Self>;

    fn clamp_in_place(&mut self) {
        let (lo, hi) = self.shape().bounds();
        for v in self.samples_mut() {
            *v = v.clamp(lo, hi);
        }
    }
}

/// H×W×C raster, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be nonzero"));
        }
        if data.len() != height * width * channels {
            return Err(Error::invalid(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(ImageBuffer {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        let i = self.index(y, x, c);
        self.data[i] = v;
    }

    /// One channel as a row-major plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    /// Channel mean as a row-major plane.
    pub fn luma(&self) -> Vec<f64> {
        let inv = 1.0 / self.channels as f64;
        self.data
            .chunks_exact(self.channels)
            .map(|px| px.iter().sum::<f64>() * inv)
            .collect()
    }

    pub fn from_planes(height: usize, width: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        let mut data = vec![0.0; height * width * channels];
        for (c, plane) in planes.iter().enumerate() {
            if plane.len() != height * width {
                return Err(Error::invalid("plane size does not match image size"));
            }
            for (i, &v) in plane.iter().enumerate() {
                data[i * channels + c] = v;
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ImageBuffer {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

impl Signal for ImageBuffer {
    fn shape(&self) -> MediaShape {
        MediaShape::image(self.height, self.width, self.channels)
    }

    fn samples(&self) -> &[f64] {
        &self.data
    }

    fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn from_samples(shape: MediaShape, data: Vec<f64>) -> Result<Self> {
        match shape {
            MediaShape::Image {
                height,
                width,
                channels,
            } => ImageBuffer::new(height, width, channels, data),
            other => Err(Error::invalid(format!("{other} is not an image shape"))),
        }
    }
}

/// Mono clip at [`AUDIO_RATE`].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("audio clips must be nonempty"));
        }
        Ok(AudioBuffer {
            samples,
            rate: AUDIO_RATE,
        })
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }
}

impl Signal for AudioBuffer {
    fn shape(&self) -> MediaShape {
        MediaShape::audio(self.samples.len())
    }

    fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    fn from_samples(shape: MediaShape, data: Vec<f64>) -> Result<Self> {
        match shape {
            MediaShape::Audio { samples } if samples == data.len() => AudioBuffer::new(data),
            other => Err(Error::invalid(format!(
                "{other} does not describe {} audio samples",
                data.len()
            ))),
        }
    }
}

/// Signed, unclamped difference signal with the shape of the media it applies to.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDelta {
    shape: MediaShape,
    data: Vec<f64>,
}

impl PatternDelta {
    pub fn new(shape: MediaShape, data: Vec<f64>) -> Result<Self> {
        if shape.len() != data.len() {
            return Err(Error::invalid(format!(
                "delta of {} values cannot have shape {shape}",
                data.len()
            )));
        }
        Ok(PatternDelta { shape, data })
    }

    pub fn zeros(shape: MediaShape) -> Self {
        PatternDelta {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn shape(&self) -> MediaShape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn scaled(&self, k: f64) -> Self {
        PatternDelta {
            shape: self.shape,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    /// Difference `a - b` of two equally shaped signals.
    pub fn difference<M: Signal>(a: &M, b: &M) -> Result<Self> {
        a.shape().ensure_same(&b.shape())?;
        Ok(PatternDelta {
            shape: a.shape(),
            data: a
                .samples()
                .iter()
                .zip(b.samples())
                .map(|(x, y)| x - y)
                .collect(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `clamp(x + sign * strength * d)` into the media's valid range.
pub fn apply_delta<M: Signal>(x: &M, d: &PatternDelta, sign: Sign, strength: f64) -> Result<M> {
    x.shape().ensure_same(&d.shape())?;
    let (lo, hi) = x.shape().bounds();
    let k = sign.factor() * strength;
    let data = x
        .samples()
        .iter()
        .zip(&d.data)
        .map(|(&v, &dv)| (v + k * dv).clamp(lo, hi))
        .collect();
    M::from_samples(x.shape(), data)
}

/// Affine map of the delta's `[min, max]` onto `[0, 1]`; a constant delta maps to 0.5.
///
/// Image deltas keep their shape, audio deltas become a one-row gray image.
pub fn normalize_for_view(d: &PatternDelta) -> Result<ImageBuffer> {
    if d.data.is_empty() {
        return Err(Error::invalid("cannot view an empty delta"));
    }
    let (lo, hi) = d
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let data: Vec<f64> = if span > 0.0 {
        d.data.iter().map(|&v| (v - lo) / span).collect()
    } else {
        vec![0.5; d.data.len()]
    };
    match d.shape {
        MediaShape::Image {
            height,
            width,
            channels,
        } => ImageBuffer::new(height, width, channels, data),
        MediaShape::Audio { samples } => ImageBuffer::new(1, samples, 1, data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(h: usize, w: usize, v: f64) -> ImageBuffer {
        ImageBuffer::filled(h, w, 1, v).unwrap()
    }

    #[test]
    fn zero_delta_is_identity() {
        let img = gray(4, 4, 0.3);
        let d = PatternDelta::zeros(img.shape());
        assert_eq!(apply_delta(&img, &d, Sign::Plus, 1.0).unwrap(), img);
    }

    #[test]
    fn apply_delta_arithmetic_and_clamp() {
        let img = gray(3, 3, 0.5);
        let d = PatternDelta::new(img.shape(), vec![0.1; 9]).unwrap();
        let out = apply_delta(&img, &d, Sign::Plus, 1.0).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.6).abs() < 1e-15));

        let bright = gray(3, 3, 0.95);
        let out = apply_delta(&bright, &d, Sign::Plus, 1.0).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn apply_delta_rejects_shape_mismatch() {
        let img = gray(3, 3, 0.5);
        let d = PatternDelta::zeros(MediaShape::image(3, 4, 1));
        assert!(matches!(
            apply_delta(&img, &d, Sign::Minus, 1.0),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn audio_clamps_to_unit_interval() {
        let clip = AudioBuffer::new(vec![0.9, -0.9]).unwrap();
        let d = PatternDelta::new(clip.shape(), vec![0.5, -0.5]).unwrap();
        let out = apply_delta(&clip, &d, Sign::Plus, 1.0).unwrap();
        assert_eq!(out.samples(), &[1.0, -1.0]);
    }

    #[test]
    fn view_normalization_cases() {
        let shape = MediaShape::image(1, 2, 1);
        let v = normalize_for_view(&PatternDelta::new(shape, vec![-1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(v.data(), &[0.0, 1.0]);

        let v = normalize_for_view(&PatternDelta::new(shape, vec![0.3, 0.3]).unwrap()).unwrap();
        assert_eq!(v.data(), &[0.5, 0.5]);

        let shape = MediaShape::image(1, 3, 1);
        let v =
            normalize_for_view(&PatternDelta::new(shape, vec![-2.0, 0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(v.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn image_constructor_validates() {
        assert!(ImageBuffer::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(ImageBuffer::new(2, 2, 3, vec![0.0; 11]).is_err());
        let img = ImageBuffer::new(2, 2, 3, (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(img.plane(1), vec![1.0, 4.0, 7.0, 10.0]);
        let back = ImageBuffer::from_planes(2, 2, &[img.plane(0), img.plane(1), img.plane(2)])
            .unwrap();
        assert_eq!(back, img);
    }
}
