#ifndef WMSTEG_H
#define WMSTEG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WmStatus {
  WM_STATUS_OK = 0,
  WM_STATUS_NULL_POINTER = 1,
  WM_STATUS_INVALID_ARGUMENT = 2,
  WM_STATUS_SHAPE_MISMATCH = 3,
  WM_STATUS_IO = 4,
  WM_STATUS_DECODE = 5,
  WM_STATUS_UNSUPPORTED = 6,
  WM_STATUS_INSUFFICIENT = 7,
  WM_STATUS_PANIC = 8,
} WmStatus;

typedef enum WmMode {
  WM_MODE_GRAYBOX = 0,
  WM_MODE_BLACKBOX = 1,
} WmMode;

/**
 * Watermark key: scheme, seed, payload and amplitude.
 */
typedef struct WmKey WmKey;

/**
 * An image (H×W×C, samples in [0,1]) or a mono audio clip (samples in [-1,1]).
 */
typedef struct WmMedia WmMedia;

/**
 * Estimated watermark delta.
 */
typedef struct WmPattern WmPattern;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next `wm_*` call on the same thread.
 */
const char *wm_last_error(void);

/**
 * Static name of a status code.
 */
const char *wm_status_name(enum WmStatus status);

/**
 * # Safety
 * `s` must come from this library (e.g. [`wm_key_to_string`]) and not be freed twice.
 */
void wm_string_free(char *s);

/**
 * Derive a key with a random payload from `seed`. `scheme` is one of
 * `spread-spatial`, `fourier-ring`, `dct-barcode`, `adaptive-masked`, `audio-spread`.
 *
 * # Safety
 * `scheme` must be a NUL-terminated string; `out` must be writable.
 */
enum WmStatus wm_key_generate(const char *scheme, uint64_t seed, struct WmKey **out);

/**
 * Parse a key record as written by [`wm_key_to_string`] or `wmsteg keygen`.
 *
 * # Safety
 * `record` must be a NUL-terminated string; `out` must be writable.
 */
enum WmStatus wm_key_parse(const char *record, struct WmKey **out);

/**
 * # Safety
 * `key` must be a live key handle.
 */
enum WmStatus wm_key_set_amplitude(struct WmKey *key, double amplitude);

/**
 * Number of payload bits (0 for schemes without a payload, or a null key).
 *
 * # Safety
 * `key` must be null or a live key handle.
 */
size_t wm_key_payload_len(const struct WmKey *key);

/**
 * Serialize `key`; free the result with [`wm_string_free`].
 *
 * # Safety
 * `key` must be a live key handle; `out` must be writable.
 */
enum WmStatus wm_key_to_string(const struct WmKey *key, char **out);

/**
 * # Safety
 * `key` must be null or a handle from this library, freed once.
 */
void wm_key_free(struct WmKey *key);

/**
 * Copy `len = height*width*channels` row-major interleaved samples into a new image.
 *
 * # Safety
 * `data` must point to `len` doubles; `out` must be writable.
 */
enum WmStatus wm_image_new(size_t height,
                           size_t width,
                           size_t channels,
                           const double *data,
                           size_t len,
                           struct WmMedia **out);

/**
 * Copy `len` samples into a new audio clip.
 *
 * # Safety
 * `samples` must point to `len` doubles; `out` must be writable.
 */
enum WmStatus wm_audio_new(const double *samples, size_t len, struct WmMedia **out);

/**
 * Load a `.png` image or a `.wav` clip.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum WmStatus wm_media_load(const char *path, struct WmMedia **out);

/**
 * Save an image as 8-bit PNG or a clip as 16-bit WAV. The file type must
 * match the media kind.
 *
 * # Safety
 * `media` must be a live handle; `path` a NUL-terminated string.
 */
enum WmStatus wm_media_save(const struct WmMedia *media, const char *path);

/**
 * True for audio clips.
 *
 * # Safety
 * `media` must be null or a live handle.
 */
bool wm_media_is_audio(const struct WmMedia *media);

/**
 * Dimensions of `media`. Audio reports `1 x samples x 1`.
 *
 * # Safety
 * `media` must be a live handle; the out pointers must be writable.
 */
enum WmStatus wm_media_shape(const struct WmMedia *media,
                             size_t *height,
                             size_t *width,
                             size_t *channels);

/**
 * Borrow the sample buffer. Valid while `media` lives; `len` receives the count.
 *
 * # Safety
 * `media` must be null or a live handle; `len` must be null or writable.
 */
const double *wm_media_data(const struct WmMedia *media, size_t *len);

/**
 * # Safety
 * `media` must be null or a handle from this library, freed once.
 */
void wm_media_free(struct WmMedia *media);

/**
 * Embed `key` into `media`, producing a new handle.
 *
 * # Safety
 * `key` and `media` must be live handles; `out` must be writable.
 */
enum WmStatus wm_embed(const struct WmKey *key, const struct WmMedia *media, struct WmMedia **out);

/**
 * Scalar detection score (higher means more likely watermarked).
 *
 * # Safety
 * `key` and `media` must be live handles; `score` must be writable.
 */
enum WmStatus wm_detect_score(const struct WmKey *key, const struct WmMedia *media, double *score);

/**
 * Decode the payload into `bits` (one byte per bit, 0 or 1). `len` must equal
 * [`wm_key_payload_len`].
 *
 * # Safety
 * `key` and `media` must be live handles; `bits` must hold `len` bytes.
 */
enum WmStatus wm_decode_bits(const struct WmKey *key,
                             const struct WmMedia *media,
                             uint8_t *bits,
                             size_t len);

/**
 * Average `mean(watermarked[..n]) - mean(clean[..n])`. In graybox mode the
 * two arrays must be index-paired. All media must be of one kind and shape.
 *
 * # Safety
 * Both arrays must hold `count` live handles; `out` must be writable.
 */
enum WmStatus wm_extract_pattern(const struct WmMedia *const *watermarked,
                                 const struct WmMedia *const *clean,
                                 size_t count,
                                 size_t n,
                                 enum WmMode mode,
                                 struct WmPattern **out);

/**
 * `clamp(media - strength * delta)`.
 *
 * # Safety
 * `media` and `pattern` must be live handles; `out` must be writable.
 */
enum WmStatus wm_remove(const struct WmMedia *media,
                        const struct WmPattern *pattern,
                        double strength,
                        struct WmMedia **out);

/**
 * `clamp(media + strength * delta)`.
 *
 * # Safety
 * `media` and `pattern` must be live handles; `out` must be writable.
 */
enum WmStatus wm_forge(const struct WmMedia *media,
                       const struct WmPattern *pattern,
                       double strength,
                       struct WmMedia **out);

/**
 * Borrow the delta samples. Valid while `pattern` lives.
 *
 * # Safety
 * `pattern` must be null or a live handle; `len` must be null or writable.
 */
const double *wm_pattern_data(const struct WmPattern *pattern, size_t *len);

/**
 * Number of media pairs averaged into `pattern` (0 for null).
 *
 * # Safety
 * `pattern` must be null or a live handle.
 */
size_t wm_pattern_n_used(const struct WmPattern *pattern);

/**
 * Fraction of watermarked samples on a media bound during extraction.
 *
 * # Safety
 * `pattern` must be null or a live handle.
 */
double wm_pattern_clamp_fraction(const struct WmPattern *pattern);

/**
 * # Safety
 * `pattern` must be a live handle; `path` a NUL-terminated string.
 */
enum WmStatus wm_pattern_save(const struct WmPattern *pattern, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum WmStatus wm_pattern_load(const char *path, struct WmPattern **out);

/**
 * # Safety
 * `pattern` must be null or a handle from this library, freed once.
 */
void wm_pattern_free(struct WmPattern *pattern);

/**
 * PSNR in dB, capped at 99 for identical inputs.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum WmStatus wm_psnr(const struct WmMedia *a, const struct WmMedia *b, double *out);

/**
 * Area under the ROC curve; ties count one half.
 *
 * # Safety
 * `positive`/`negative` must hold `n_pos`/`n_neg` doubles; `out` must be writable.
 */
enum WmStatus wm_roc_auc(const double *positive,
                         size_t n_pos,
                         const double *negative,
                         size_t n_neg,
                         double *out);

/**
 * TPR at the smallest threshold whose false-positive rate is `<= fpr`.
 *
 * # Safety
 * Score arrays as in [`wm_roc_auc`]; `tpr` and `threshold` must be writable.
 */
enum WmStatus wm_tpr_at_fpr(const double *positive,
                            size_t n_pos,
                            const double *negative,
                            size_t n_neg,
                            double fpr,
                            double *tpr,
                            double *threshold);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WMSTEG_H */
