//! File boundaries: 8-bit PNG and PCM16 WAV.
//!
//! Encoding rules are fixed so files are byte-stable across platforms:
//! PNG bytes are `floor(v * 255 + 0.5)` clamped to `[0, 255]`; WAV samples
//! load as `s / 32768` and save as `floor(v * 32768 + 0.5)` clamped to the
//! 16-bit range, which makes load/save an exact round trip.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::media::{AudioBuffer, ImageBuffer, Signal, AUDIO_RATE};

fn decode_err(path: &Path, reason: impl ToString) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Loads an 8-bit grayscale or RGB PNG into `[0, 1]`.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| decode_err(path, e))?;
    let (width, height, color, depth) = {
        let info = reader.info();
        (
            info.width as usize,
            info.height as usize,
            info.color_type,
            info.bit_depth,
        )
    };
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::Codec {
                path: path.to_path_buf(),
                what: "color type",
                found: format!("{other:?}"),
                expected: "Grayscale or Rgb without alpha".into(),
            })
        }
    };
    if depth != png::BitDepth::Eight {
        return Err(Error::Codec {
            path: path.to_path_buf(),
            what: "bit depth",
            found: format!("{depth:?}"),
            expected: "Eight".into(),
        });
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| decode_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| decode_err(path, e))?;
    let row_bytes = width * channels;
    let mut data = Vec::with_capacity(height * row_bytes);
    for row in buf[..frame.buffer_size()].chunks_exact(frame.line_size) {
        data.extend(row[..row_bytes].iter().map(|&b| f64::from(b) / 255.0));
    }
    ImageBuffer::new(height, width, channels, data)
}

#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Writes an 8-bit PNG (gray or RGB by channel count).
pub fn save_png(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    encoder.set_color(if img.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize_u8(v)).collect();
    let io_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => decode_err(path, other),
    };
    let mut writer = encoder.write_header().map_err(io_err)?;
    writer.write_image_data(&bytes).map_err(io_err)?;
    writer.finish().map_err(io_err)
}

/// Applies the PNG quantization without touching disk.
pub fn quantize_image(img: &ImageBuffer) -> ImageBuffer {
    img.map(|v| f64::from(quantize_u8(v)) / 255.0)
}

/// Lists `*.png` files in a directory, sorted by file name.
pub fn list_pngs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    list_with_extension(dir.as_ref(), "png")
}

/// Lists `*.wav` files in a directory, sorted by file name.
pub fn list_wavs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    list_with_extension(dir.as_ref(), "wav")
}

fn list_with_extension(dir: &Path, wanted: &str) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == wanted))
        .collect();
    paths.sort();
    Ok(paths)
}

fn wav_spec() -> hound::WavSpec {
    hound::WavSpec {
        channels: 1,
        sample_rate: AUDIO_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    }
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => decode_err(path, other),
    }
}

/// Loads a PCM16 mono 16 kHz WAV, mapping `s -> s / 32768`.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    let expected = wav_spec();
    let checks = [
        ("channel count", spec.channels as u32, expected.channels as u32),
        ("sample rate", spec.sample_rate, expected.sample_rate),
        (
            "bit depth",
            spec.bits_per_sample as u32,
            expected.bits_per_sample as u32,
        ),
    ];
    for (what, found, want) in checks {
        if found != want {
            return Err(Error::Codec {
                path: path.to_path_buf(),
                what,
                found: found.to_string(),
                expected: want.to_string(),
            });
        }
    }
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::Codec {
            path: path.to_path_buf(),
            what: "sample format",
            found: "float".into(),
            expected: "PCM integer".into(),
        });
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| wav_err(path, e))?;
    AudioBuffer::new(samples)
}

#[inline]
pub fn quantize_i16(v: f64) -> i16 {
    (v * 32768.0 + 0.5).floor().clamp(-32768.0, 32767.0) as i16
}

pub fn save_wav(clip: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = hound::WavWriter::create(path, wav_spec()).map_err(|e| wav_err(path, e))?;
    for &v in clip.samples() {
        writer
            .write_sample(quantize_i16(v))
            .map_err(|e| wav_err(path, e))?;
    }
    writer.finalize().map_err(|e| wav_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_values_and_rounding() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");

        save_png(&ImageBuffer::filled(2, 2, 1, 0.0).unwrap(), &path).unwrap();
        assert_eq!(load_png(&path).unwrap().data(), &[0.0; 4]);

        let img = ImageBuffer::new(1, 3, 1, vec![1.0, 128.0 / 255.0, 0.5]).unwrap();
        save_png(&img, &path).unwrap();
        let back = load_png(&path).unwrap();
        assert_eq!(back.data()[0], 1.0);
        assert!((back.data()[1] - 0.50196).abs() < 1e-5);
        // 0.5 * 255 = 127.5 rounds half-up to 128
        assert_eq!(quantize_u8(0.5), 128);
        assert_eq!(back.data()[2], 128.0 / 255.0);
    }

    #[test]
    fn png_round_trip_is_bit_exact_after_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let mut rng = crate::rng::SeededRng::new(5);
        let img = ImageBuffer::new(7, 5, 3, (0..105).map(|_| rng.uniform()).collect()).unwrap();
        save_png(&img, &path).unwrap();
        assert_eq!(load_png(&path).unwrap(), quantize_image(&img));
    }

    #[test]
    fn png_rejects_alpha_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgba.png");
        {
            let file = File::create(&path).unwrap();
            let mut enc = png::Encoder::new(BufWriter::new(file), 1, 1);
            enc.set_color(png::ColorType::Rgba);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[1, 2, 3, 4]).unwrap();
        }
        let err = load_png(&path).unwrap_err();
        assert!(err.to_string().contains("rgba.png"), "{err}");
        assert!(matches!(
            load_png(dir.path().join("missing.png")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn wav_scaling_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");

        save_wav(&AudioBuffer::new(vec![0.0; 16]).unwrap(), &a).unwrap();
        assert!(load_wav(&a).unwrap().samples().iter().all(|&v| v == 0.0));

        {
            let mut w = hound::WavWriter::create(&a, wav_spec()).unwrap();
            for s in [32767i16, -32768, 0, 1, -1, 12345] {
                w.write_sample(s).unwrap();
            }
            w.finalize().unwrap();
        }
        let clip = load_wav(&a).unwrap();
        assert!((clip.samples()[0] - 32767.0 / 32768.0).abs() < 1e-15);
        save_wav(&clip, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn wav_rejects_wrong_rate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.wav");
        let spec = hound::WavSpec {
            sample_rate: 44_100,
            ..wav_spec()
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        let err = load_wav(&path).unwrap_err().to_string();
        assert!(err.contains("44100") && err.contains("16000"), "{err}");
    }
}
