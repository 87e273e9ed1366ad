//! C ABI over `wmsteg`.
//!
//! Every fallible call returns a [`WmStatus`]; on failure a human-readable
//! message is available from [`wm_last_error`] on the same thread. Objects
//! cross the boundary as opaque handles and must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wmsteg::attack::{self, ExtractedPattern, ExtractionConfig, ExtractionMode};
use wmsteg::codec;
use wmsteg::media::{AudioBuffer, ImageBuffer, MediaShape, Signal};
use wmsteg::metrics::{self, ScoreSet};
use wmsteg::watermark::{self, Scheme, WatermarkKey, Watermarker};
use wmsteg::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    Decode = 5,
    Unsupported = 6,
    Insufficient = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WmMode {
    Graybox = 0,
    Blackbox = 1,
}

/// Watermark key: scheme, seed, payload and amplitude.
pub struct WmKey(WatermarkKey);

/// An image (H×W×C, samples in [0,1]) or a mono audio clip (samples in [-1,1]).
pub struct WmMedia(Media);

/// Estimated watermark delta.
pub struct WmPattern(ExtractedPattern);

#[derive(Clone)]
enum Media {
    Image(ImageBuffer),
    Audio(AudioBuffer),
}

impl Media {
    fn samples(&self) -> &[f64] {
        match self {
            Media::Image(x) => x.samples(),
            Media::Audio(x) => x.samples(),
        }
    }

    fn shape(&self) -> MediaShape {
        match self {
            Media::Image(x) => x.shape(),
            Media::Audio(x) => x.shape(),
        }
    }
}

impl From<ImageBuffer> for Media {
    fn from(x: ImageBuffer) -> Self {
        Media::Image(x)
    }
}

impl From<AudioBuffer> for Media {
    fn from(x: AudioBuffer) -> Self {
        Media::Audio(x)
    }
}

/// Run a generic body against whichever buffer `$m` holds.
macro_rules! on_media {
    ($m:expr, $x:ident => $body:expr) => {
        match $m {
            Media::Image($x) => $body,
            Media::Audio($x) => $body,
        }
    };
}

struct Fail {
    status: WmStatus,
    message: String,
}

impl Fail {
    fn new(status: WmStatus, message: impl Into<String>) -> Self {
        Fail {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ShapeMismatch { .. } => WmStatus::ShapeMismatch,
            Error::InvalidArgument(_) | Error::Malformed { .. } => WmStatus::InvalidArgument,
            Error::Decode { .. } => WmStatus::Decode,
            Error::Codec { .. } | Error::NoReference { .. } | Error::NoPayload { .. } => {
                WmStatus::Unsupported
            }
            Error::Io { .. } => WmStatus::Io,
            Error::Insufficient { .. } => WmStatus::Insufficient,
        };
        Fail::new(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Fail>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> WmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WmStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            WmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Fail::new(WmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Fail::new(WmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail::new(WmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::new(WmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::new(WmStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next `wm_*` call on the same thread.
#[no_mangle]
pub extern "C" fn wm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn wm_status_name(status: WmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        WmStatus::Ok => c"ok",
        WmStatus::NullPointer => c"null pointer",
        WmStatus::InvalidArgument => c"invalid argument",
        WmStatus::ShapeMismatch => c"shape mismatch",
        WmStatus::Io => c"i/o error",
        WmStatus::Decode => c"decode error",
        WmStatus::Unsupported => c"unsupported",
        WmStatus::Insufficient => c"insufficient data",
        WmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// # Safety
/// `s` must come from this library (e.g. [`wm_key_to_string`]) and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- keys ----

/// Derive a key with a random payload from `seed`. `scheme` is one of
/// `spread-spatial`, `fourier-ring`, `dct-barcode`, `adaptive-masked`, `audio-spread`.
///
/// # Safety
/// `scheme` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_key_generate(scheme: *const c_char, seed: u64, out: *mut *mut WmKey) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let scheme: Scheme = string(scheme, "scheme")?.parse()?;
        *out = boxed(WmKey(WatermarkKey::generate(scheme, seed)));
        Ok(())
    })
}

/// Parse a key record as written by [`wm_key_to_string`] or `wmsteg keygen`.
///
/// # Safety
/// `record` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_key_parse(record: *const c_char, out: *mut *mut WmKey) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let key: WatermarkKey = string(record, "record")?.trim().parse()?;
        *out = boxed(WmKey(key));
        Ok(())
    })
}

/// # Safety
/// `key` must be a live key handle.
#[no_mangle]
pub unsafe extern "C" fn wm_key_set_amplitude(key: *mut WmKey, amplitude: f64) -> WmStatus {
    guard(|| {
        let key = out_ptr(key, "key")?;
        key.0 = key.0.clone().with_amplitude(amplitude)?;
        Ok(())
    })
}

/// Number of payload bits (0 for schemes without a payload, or a null key).
///
/// # Safety
/// `key` must be null or a live key handle.
#[no_mangle]
pub unsafe extern "C" fn wm_key_payload_len(key: *const WmKey) -> usize {
    key.as_ref().map_or(0, |k| k.0.payload().len())
}

/// Serialize `key`; free the result with [`wm_string_free`].
///
/// # Safety
/// `key` must be a live key handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_key_to_string(key: *const WmKey, out: *mut *mut c_char) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let key = borrow(key, "key")?;
        let s = CString::new(key.0.to_string()).map_err(|e| Fail::new(WmStatus::InvalidArgument, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `key` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wm_key_free(key: *mut WmKey) {
    release(key)
}

// ---- media ----

/// Copy `len = height*width*channels` row-major interleaved samples into a new image.
///
/// # Safety
/// `data` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_image_new(
    height: usize,
    width: usize,
    channels: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut WmMedia,
) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = slice(data, len, "data")?.to_vec();
        *out = boxed(WmMedia(Media::Image(ImageBuffer::new(height, width, channels, data)?)));
        Ok(())
    })
}

/// Copy `len` samples into a new audio clip.
///
/// # Safety
/// `samples` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_audio_new(samples: *const f64, len: usize, out: *mut *mut WmMedia) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = slice(samples, len, "samples")?.to_vec();
        *out = boxed(WmMedia(Media::Audio(AudioBuffer::new(data)?)));
        Ok(())
    })
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Load a `.png` image or a `.wav` clip.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_media_load(path: *const c_char, out: *mut *mut WmMedia) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = Path::new(string(path, "path")?);
        let media = if is_wav(path) {
            Media::Audio(codec::load_wav(path)?)
        } else {
            Media::Image(codec::load_png(path)?)
        };
        *out = boxed(WmMedia(media));
        Ok(())
    })
}

/// Save an image as 8-bit PNG or a clip as 16-bit WAV. The file type must
/// match the media kind.
///
/// # Safety
/// `media` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wm_media_save(media: *const WmMedia, path: *const c_char) -> WmStatus {
    guard(|| {
        let media = borrow(media, "media")?;
        let path = Path::new(string(path, "path")?);
        match (&media.0, is_wav(path)) {
            (Media::Image(x), false) => codec::save_png(x, path)?,
            (Media::Audio(x), true) => codec::save_wav(x, path)?,
            _ => {
                return Err(Fail::new(
                    WmStatus::Unsupported,
                    format!("{} does not match the media kind", path.display()),
                ))
            }
        }
        Ok(())
    })
}

/// True for audio clips.
///
/// # Safety
/// `media` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wm_media_is_audio(media: *const WmMedia) -> bool {
    media.as_ref().is_some_and(|m| matches!(m.0, Media::Audio(_)))
}

/// Dimensions of `media`. Audio reports `1 x samples x 1`.
///
/// # Safety
/// `media` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_media_shape(
    media: *const WmMedia,
    height: *mut usize,
    width: *mut usize,
    channels: *mut usize,
) -> WmStatus {
    guard(|| {
        let media = borrow(media, "media")?;
        let (h, w, c) = match media.0.shape() {
            MediaShape::Image { height, width, channels } => (height, width, channels),
            MediaShape::Audio { samples } => (1, samples, 1),
        };
        *out_ptr(height, "height")? = h;
        *out_ptr(width, "width")? = w;
        *out_ptr(channels, "channels")? = c;
        Ok(())
    })
}

/// Borrow the sample buffer. Valid while `media` lives; `len` receives the count.
///
/// # Safety
/// `media` must be null or a live handle; `len` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_media_data(media: *const WmMedia, len: *mut usize) -> *const f64 {
    let Some(m) = media.as_ref() else {
        return ptr::null();
    };
    let s = m.0.samples();
    if let Some(len) = len.as_mut() {
        *len = s.len();
    }
    s.as_ptr()
}

/// # Safety
/// `media` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wm_media_free(media: *mut WmMedia) {
    release(media)
}

// ---- watermarking ----

fn marker(key: &WmKey, media: &Media) -> FfiResult<Watermarker> {
    Ok(Watermarker::new(&key.0, media.shape())?)
}

/// Embed `key` into `media`, producing a new handle.
///
/// # Safety
/// `key` and `media` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_embed(key: *const WmKey, media: *const WmMedia, out: *mut *mut WmMedia) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (key, media) = (borrow(key, "key")?, borrow(media, "media")?);
        let m = marker(key, &media.0)?;
        let y = on_media!(&media.0, x => Media::from(m.embed(x)?));
        *out = boxed(WmMedia(y));
        Ok(())
    })
}

/// Scalar detection score (higher means more likely watermarked).
///
/// # Safety
/// `key` and `media` must be live handles; `score` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_detect_score(key: *const WmKey, media: *const WmMedia, score: *mut f64) -> WmStatus {
    guard(|| {
        let score = out_ptr(score, "score")?;
        let (key, media) = (borrow(key, "key")?, borrow(media, "media")?);
        let m = marker(key, &media.0)?;
        *score = on_media!(&media.0, x => m.detect_score(x)?);
        Ok(())
    })
}

/// Decode the payload into `bits` (one byte per bit, 0 or 1). `len` must equal
/// [`wm_key_payload_len`].
///
/// # Safety
/// `key` and `media` must be live handles; `bits` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wm_decode_bits(
    key: *const WmKey,
    media: *const WmMedia,
    bits: *mut u8,
    len: usize,
) -> WmStatus {
    guard(|| {
        let (key, media) = (borrow(key, "key")?, borrow(media, "media")?);
        let decoded = on_media!(&media.0, x => watermark::decode_bits(x, &key.0)?);
        if decoded.len() != len {
            return Err(Fail::new(
                WmStatus::InvalidArgument,
                format!("buffer holds {len} bits, payload has {}", decoded.len()),
            ));
        }
        if len > 0 {
            if bits.is_null() {
                return Err(Fail::new(WmStatus::NullPointer, "bits is null"));
            }
            let out = std::slice::from_raw_parts_mut(bits, len);
            for (o, b) in out.iter_mut().zip(decoded) {
                *o = b as u8;
            }
        }
        Ok(())
    })
}

// ---- attack ----

unsafe fn handles<'a>(p: *const *const WmMedia, len: usize, what: &str) -> FfiResult<Vec<&'a Media>> {
    slice(p, len, what)?
        .iter()
        .map(|&h| borrow(h, what).map(|m| &m.0))
        .collect()
}

fn images(v: &[&Media]) -> Option<Vec<ImageBuffer>> {
    v.iter()
        .map(|m| match m {
            Media::Image(x) => Some(x.clone()),
            Media::Audio(_) => None,
        })
        .collect()
}

fn clips(v: &[&Media]) -> Option<Vec<AudioBuffer>> {
    v.iter()
        .map(|m| match m {
            Media::Audio(x) => Some(x.clone()),
            Media::Image(_) => None,
        })
        .collect()
}

/// Average `mean(watermarked[..n]) - mean(clean[..n])`. In graybox mode the
/// two arrays must be index-paired. All media must be of one kind and shape.
///
/// # Safety
/// Both arrays must hold `count` live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_extract_pattern(
    watermarked: *const *const WmMedia,
    clean: *const *const WmMedia,
    count: usize,
    n: usize,
    mode: WmMode,
    out: *mut *mut WmPattern,
) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let wm = handles(watermarked, count, "watermarked")?;
        let cl = handles(clean, count, "clean")?;
        let mode = match mode {
            WmMode::Graybox => ExtractionMode::Graybox,
            WmMode::Blackbox => ExtractionMode::Blackbox,
        };
        let cfg = ExtractionConfig::new(mode, n);
        let p = if let (Some(w), Some(c)) = (images(&wm), images(&cl)) {
            attack::extract_pattern(&w, &c, &cfg)?
        } else if let (Some(w), Some(c)) = (clips(&wm), clips(&cl)) {
            attack::extract_pattern(&w, &c, &cfg)?
        } else {
            return Err(Fail::new(WmStatus::InvalidArgument, "media kinds are mixed"));
        };
        *out = boxed(WmPattern(p));
        Ok(())
    })
}

/// `clamp(media - strength * delta)`.
///
/// # Safety
/// `media` and `pattern` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_remove(
    media: *const WmMedia,
    pattern: *const WmPattern,
    strength: f64,
    out: *mut *mut WmMedia,
) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (media, p) = (borrow(media, "media")?, borrow(pattern, "pattern")?);
        let y = on_media!(&media.0, x => Media::from(attack::remove(x, &p.0, strength)?));
        *out = boxed(WmMedia(y));
        Ok(())
    })
}

/// `clamp(media + strength * delta)`.
///
/// # Safety
/// `media` and `pattern` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_forge(
    media: *const WmMedia,
    pattern: *const WmPattern,
    strength: f64,
    out: *mut *mut WmMedia,
) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (media, p) = (borrow(media, "media")?, borrow(pattern, "pattern")?);
        let y = on_media!(&media.0, x => Media::from(attack::forge(x, &p.0, strength)?));
        *out = boxed(WmMedia(y));
        Ok(())
    })
}

/// Borrow the delta samples. Valid while `pattern` lives.
///
/// # Safety
/// `pattern` must be null or a live handle; `len` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_data(pattern: *const WmPattern, len: *mut usize) -> *const f64 {
    let Some(p) = pattern.as_ref() else {
        return ptr::null();
    };
    let d = p.0.delta.data();
    if let Some(len) = len.as_mut() {
        *len = d.len();
    }
    d.as_ptr()
}

/// Number of media pairs averaged into `pattern` (0 for null).
///
/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_n_used(pattern: *const WmPattern) -> usize {
    pattern.as_ref().map_or(0, |p| p.0.n_used)
}

/// Fraction of watermarked samples on a media bound during extraction.
///
/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_clamp_fraction(pattern: *const WmPattern) -> f64 {
    pattern.as_ref().map_or(0.0, |p| p.0.clamp_fraction)
}

/// # Safety
/// `pattern` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_save(pattern: *const WmPattern, path: *const c_char) -> WmStatus {
    guard(|| {
        let p = borrow(pattern, "pattern")?;
        attack::save_pattern(&p.0, Path::new(string(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_load(path: *const c_char, out: *mut *mut WmPattern) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p = attack::load_pattern(Path::new(string(path, "path")?))?;
        *out = boxed(WmPattern(p));
        Ok(())
    })
}

/// # Safety
/// `pattern` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn wm_pattern_free(pattern: *mut WmPattern) {
    release(pattern)
}

// ---- metrics ----

/// PSNR in dB, capped at 99 for identical inputs.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_psnr(a: *const WmMedia, b: *const WmMedia, out: *mut f64) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        *out = match (&a.0, &b.0) {
            (Media::Image(x), Media::Image(y)) => metrics::psnr(x, y)?,
            (Media::Audio(x), Media::Audio(y)) => metrics::psnr(x, y)?,
            _ => return Err(Fail::new(WmStatus::ShapeMismatch, "cannot compare an image with audio")),
        };
        Ok(())
    })
}

unsafe fn score_set(pos: *const f64, n_pos: usize, neg: *const f64, n_neg: usize) -> FfiResult<ScoreSet> {
    let pos = slice(pos, n_pos, "positive")?.to_vec();
    let neg = slice(neg, n_neg, "negative")?.to_vec();
    Ok(ScoreSet::new(pos, neg)?)
}

/// Area under the ROC curve; ties count one half.
///
/// # Safety
/// `positive`/`negative` must hold `n_pos`/`n_neg` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_roc_auc(
    positive: *const f64,
    n_pos: usize,
    negative: *const f64,
    n_neg: usize,
    out: *mut f64,
) -> WmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = metrics::roc_auc(&score_set(positive, n_pos, negative, n_neg)?)?;
        Ok(())
    })
}

/// TPR at the smallest threshold whose false-positive rate is `<= fpr`.
///
/// # Safety
/// Score arrays as in [`wm_roc_auc`]; `tpr` and `threshold` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_tpr_at_fpr(
    positive: *const f64,
    n_pos: usize,
    negative: *const f64,
    n_neg: usize,
    fpr: f64,
    tpr: *mut f64,
    threshold: *mut f64,
) -> WmStatus {
    guard(|| {
        let tpr = out_ptr(tpr, "tpr")?;
        let threshold = out_ptr(threshold, "threshold")?;
        let r = metrics::tpr_at_fpr(&score_set(positive, n_pos, negative, n_neg)?, fpr)?;
        *tpr = r.tpr_at_fpr;
        *threshold = r.threshold_at_fpr;
        Ok(())
    })
}
