//! Dataset synthesis, experiment orchestration and report emission.

mod manifest;
mod report;
mod spec;
mod sweeps;
mod synth;

use std::path::Path;

use rayon::prelude::*;

pub use manifest::{Manifest, ManifestAudit, ManifestRecord, Role};
pub use report::{
    fmt_f, padded_bounds, render_svg_lines, version_string, write_svg_lines, Provenance, Report,
    SVG_HEIGHT, SVG_WIDTH,
};
pub use spec::{parse_config, Experiment, ExperimentSpec, DEFAULT_N_LIST, MIN_EVAL_COUNT};
pub use sweeps::{
    run_experiment, write_outcome, DirectoryMedia, Evaluable, MediaSource, SweepOutcome,
    SyntheticClips, SyntheticImages, AUDIO_HEADER, DISTORTION_HEADER, FORGERY_HEADER,
    FORGERY_SCORES_HEADER, MIXING_HEADER, PATTERN_VIEW_HEADER, REMOVAL_HEADER,
};
pub use synth::{clip_len, synth_clip, synth_image, CorpusTag, COVER_CEIL, COVER_FLOOR};

use crate::codec;
use crate::error::{Error, Result};
use crate::media::{MediaShape, Signal};

fn corpus_dir(tag: CorpusTag) -> &'static str {
    match tag {
        CorpusTag::Cover => "covers",
        CorpusTag::Clean => "clean",
    }
}

/// Writes `count` procedural items of corpus `tag` under
/// `<root>/covers` or `<root>/clean` (PNG for images, WAV for audio) and
/// returns their manifest records. Same arguments give byte-identical files.
pub fn synth_dataset(
    root: &Path,
    count: usize,
    shape: MediaShape,
    tag: CorpusTag,
    seed: u64,
) -> Result<Manifest> {
    if count == 0 {
        return Err(Error::invalid("dataset count must be >= 1"));
    }
    let dir = root.join(corpus_dir(tag));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let role = match tag {
        CorpusTag::Cover => Role::Cover,
        CorpusTag::Clean => Role::CleanCorpus,
    };
    let records = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rec = ManifestRecord::new(role, tag, i, seed);
            let rel = match shape {
                MediaShape::Image { .. } => {
                    let rel = format!("{}/{}.png", corpus_dir(tag), rec.id);
                    let img = synth_image(shape, tag, seed, i)?;
                    rec.clamp_fraction = img
                        .samples()
                        .iter()
                        .filter(|&&v| v <= COVER_FLOOR || v >= COVER_CEIL)
                        .count() as f64
                        / img.samples().len() as f64;
                    codec::save_png(&img, root.join(&rel))?;
                    rel
                }
                MediaShape::Audio { samples } => {
                    let rel = format!("{}/{}.wav", corpus_dir(tag), rec.id);
                    codec::save_wav(&synth_clip(samples, tag, seed, i)?, root.join(&rel))?;
                    rel
                }
            };
            rec.file = rel;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Manifest { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_dataset_is_byte_identical_per_seed() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let shape = MediaShape::image(16, 16, 3);
        let ma = synth_dataset(a.path(), 3, shape, CorpusTag::Cover, 5).unwrap();
        let mb = synth_dataset(b.path(), 3, shape, CorpusTag::Cover, 5).unwrap();
        assert_eq!(ma, mb);
        for r in &ma.records {
            let fa = std::fs::read(a.path().join(&r.file)).unwrap();
            let fb = std::fs::read(b.path().join(&r.file)).unwrap();
            assert_eq!(fa, fb);
        }
        let clips = synth_dataset(a.path(), 2, MediaShape::audio(800), CorpusTag::Clean, 5).unwrap();
        assert!(clips.records.iter().all(|r| r.file.ends_with(".wav") && r.role == Role::CleanCorpus));
        assert!(synth_dataset(a.path(), 0, shape, CorpusTag::Cover, 5).is_err());
    }
}
