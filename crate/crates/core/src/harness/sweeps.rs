//! Experiment runners. Every runner is a deterministic function of its
//! [`ExperimentSpec`]: media are generated or loaded in parallel but always
//! reduced in index order, and per-image metrics are collected in order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{Manifest, ManifestRecord, Role};
use super::report::{fmt_f, fmt_opt, Provenance, Report};
use super::spec::{Experiment, ExperimentSpec};
use super::synth::{synth_clip, synth_image, CorpusTag};
use crate::attack::{forge, remove, ExtractedPattern, ExtractionConfig, ExtractionMode, KeyMix, PatternAccumulator};
use crate::codec;
use crate::distortions::DistortionSpec;
use crate::error::{Error, Result};
use crate::media::{normalize_for_view, AudioBuffer, ImageBuffer, MediaShape, PatternDelta, Signal};
use crate::metrics::{self, ScoreSet};
use crate::watermark::{Watermarker, AUDIO_DETECTION_THRESHOLD};

/// Media the harness can read by corpus and index.
pub trait MediaSource<M>: Sync {
    fn shape(&self) -> MediaShape;
    /// Number of items available in a corpus (`usize::MAX` when procedural).
    fn available(&self, tag: CorpusTag) -> usize;
    fn load(&self, tag: CorpusTag, index: u64) -> Result<M>;
    /// File backing an item, empty when procedural.
    fn file(&self, _tag: CorpusTag, _index: u64) -> String {
        String::new()
    }
}

pub struct SyntheticImages {
    pub shape: MediaShape,
    pub seed: u64,
}

impl MediaSource<ImageBuffer> for SyntheticImages {
    fn shape(&self) -> MediaShape {
        self.shape
    }
    fn available(&self, _: CorpusTag) -> usize {
        usize::MAX
    }
    fn load(&self, tag: CorpusTag, index: u64) -> Result<ImageBuffer> {
        synth_image(self.shape, tag, self.seed, index)
    }
}

pub struct SyntheticClips {
    pub samples: usize,
    pub seed: u64,
}

impl MediaSource<AudioBuffer> for SyntheticClips {
    fn shape(&self) -> MediaShape {
        MediaShape::audio(self.samples)
    }
    fn available(&self, _: CorpusTag) -> usize {
        usize::MAX
    }
    fn load(&self, tag: CorpusTag, index: u64) -> Result<AudioBuffer> {
        synth_clip(self.samples, tag, self.seed, index)
    }
}

/// Files under `<root>/covers` and `<root>/clean`, ordered by name.
pub struct DirectoryMedia<M> {
    root: PathBuf,
    covers: Vec<PathBuf>,
    clean: Vec<PathBuf>,
    shape: MediaShape,
    loader: fn(&Path) -> Result<M>,
}

impl<M: Signal> DirectoryMedia<M> {
    fn open(
        root: &Path,
        list: fn(&Path) -> Result<Vec<PathBuf>>,
        loader: fn(&Path) -> Result<M>,
    ) -> Result<Self> {
        let covers = list(&root.join("covers"))?;
        let clean = match root.join("clean") {
            p if p.is_dir() => list(&p)?,
            _ => Vec::new(),
        };
        let first = covers.first().ok_or(Error::Insufficient {
            what: "cover files",
            needed: 1,
            available: 0,
        })?;
        let shape = loader(first)?.shape();
        Ok(DirectoryMedia {
            root: root.to_path_buf(),
            covers,
            clean,
            shape,
            loader,
        })
    }

    fn path(&self, tag: CorpusTag, index: u64) -> Option<&PathBuf> {
        match tag {
            CorpusTag::Cover => self.covers.get(index as usize),
            CorpusTag::Clean => self.clean.get(index as usize),
        }
    }
}

impl DirectoryMedia<ImageBuffer> {
    pub fn images(root: &Path) -> Result<Self> {
        Self::open(root, |p| codec::list_pngs(p), |p| codec::load_png(p))
    }
}

impl DirectoryMedia<AudioBuffer> {
    pub fn clips(root: &Path) -> Result<Self> {
        Self::open(root, |p| codec::list_wavs(p), |p| codec::load_wav(p))
    }
}

impl<M: Signal> MediaSource<M> for DirectoryMedia<M> {
    fn shape(&self) -> MediaShape {
        self.shape
    }
    fn available(&self, tag: CorpusTag) -> usize {
        match tag {
            CorpusTag::Cover => self.covers.len(),
            CorpusTag::Clean => self.clean.len(),
        }
    }
    fn load(&self, tag: CorpusTag, index: u64) -> Result<M> {
        let path = self.path(tag, index).ok_or(Error::Insufficient {
            what: "corpus files",
            needed: index as usize + 1,
            available: self.available(tag),
        })?;
        let m = (self.loader)(path)?;
        self.shape.ensure_same(&m.shape())?;
        Ok(m)
    }
    fn file(&self, tag: CorpusTag, index: u64) -> String {
        self.path(tag, index)
            .map(|p| p.strip_prefix(&self.root).unwrap_or(p).display().to_string())
            .unwrap_or_default()
    }
}

/// Per-media-kind metric hooks.
pub trait Evaluable: Signal + Send + Sync {
    fn ssim(a: &Self, b: &Self) -> Result<Option<f64>>;
    fn si_snr(a: &Self, b: &Self) -> Result<Option<f64>>;
}

impl Evaluable for ImageBuffer {
    fn ssim(a: &Self, b: &Self) -> Result<Option<f64>> {
        metrics::ssim(a, b).map(Some)
    }
    fn si_snr(_: &Self, _: &Self) -> Result<Option<f64>> {
        Ok(None)
    }
}

impl Evaluable for AudioBuffer {
    fn ssim(_: &Self, _: &Self) -> Result<Option<f64>> {
        Ok(None)
    }
    fn si_snr(a: &Self, b: &Self) -> Result<Option<f64>> {
        metrics::si_snr(a.samples(), b.samples()).map(Some)
    }
}

/// Everything a sweep produces; nothing touches disk until [`write_outcome`].
#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    pub reports: Vec<Report>,
    pub manifest: Manifest,
    /// View images keyed by file name.
    pub images: Vec<(String, ImageBuffer)>,
    pub warnings: Vec<String>,
}

/// Media and fidelity statistics of one evaluated batch.
#[derive(Clone, Debug)]
struct EvalStats {
    scores: Vec<f64>,
    bit_acc: Option<f64>,
    psnr: f64,
    ssim: Option<f64>,
    si_snr: Option<f64>,
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

fn mean_opt(v: Vec<Option<f64>>) -> Option<f64> {
    v.iter().all(Option::is_some).then(|| mean(v.into_iter().flatten()))
}

fn evaluate<M: Evaluable>(marker: &Watermarker, items: &[M], covers: &[M]) -> Result<EvalStats> {
    let has_payload = marker.key().scheme().has_payload();
    let per: Vec<(f64, Option<f64>, f64, Option<f64>, Option<f64>)> = items
        .par_iter()
        .zip(covers)
        .map(|(x, c)| {
            let bits = if has_payload {
                Some(metrics::bit_accuracy(&marker.decode_bits(x)?, marker.key().payload())?)
            } else {
                None
            };
            Ok((
                marker.detect_score(x)?,
                bits,
                metrics::psnr(x, c)?,
                M::ssim(x, c)?,
                M::si_snr(x, c)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(EvalStats {
        scores: per.iter().map(|p| p.0).collect(),
        bit_acc: mean_opt(per.iter().map(|p| p.1).collect()),
        psnr: mean(per.iter().map(|p| p.2)),
        ssim: mean_opt(per.iter().map(|p| p.3).collect()),
        si_snr: mean_opt(per.iter().map(|p| p.4).collect()),
    })
}

fn scores<M: Evaluable>(marker: &Watermarker, items: &[M]) -> Result<Vec<f64>> {
    items.par_iter().map(|x| marker.detect_score(x)).collect()
}

fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    metrics::roc_auc(&ScoreSet::new(pos.to_vec(), neg.to_vec())?)
}

/// Key cycle for one watermarked collection: item `i` gets `markers[i % K]`.
struct Collection {
    markers: Vec<Watermarker>,
    key_mix: KeyMix,
}

impl Collection {
    fn new(spec: &ExperimentSpec, set: usize, k: usize, shape: MediaShape) -> Result<Self> {
        let markers = (0..k)
            .map(|i| Watermarker::new(&spec.set_key(set, i)?, shape))
            .collect::<Result<Vec<_>>>()?;
        let ids: Vec<String> = markers.iter().map(|m| m.key().id()).collect();
        Ok(Collection {
            key_mix: ExtractionConfig::uniform_mix(&ids),
            markers,
        })
    }
}

/// Snapshot of one collection's estimate at one `(mode, n)` checkpoint.
struct Checkpoint {
    mode: ExtractionMode,
    n: usize,
    pattern: ExtractedPattern,
}

const BATCH: usize = 64;

fn clamp_fraction<M: Signal>(x: &M) -> f64 {
    let (lo, hi) = x.shape().bounds();
    let s = x.samples();
    s.iter().filter(|&&v| v <= lo || v >= hi).count() as f64 / s.len() as f64
}

/// One streaming pass over extraction items `0..max(n_list)`, snapshotting
/// every collection's estimate at each n and mode. Returns checkpoints per
/// collection, ordered by mode then n.
fn extraction_pass<M: Evaluable>(
    spec: &ExperimentSpec,
    source: &dyn MediaSource<M>,
    collections: &[Collection],
    manifest: &mut Manifest,
) -> Result<Vec<Vec<Checkpoint>>> {
    let shape = source.shape();
    let blackbox = spec.modes.contains(&ExtractionMode::Blackbox);
    let max_n = spec.max_n();
    let mut accs: Vec<Vec<PatternAccumulator>> = collections
        .iter()
        .map(|_| spec.modes.iter().map(|&m| PatternAccumulator::new(shape, m)).collect())
        .collect();
    let mut found: Vec<Vec<Checkpoint>> = collections.iter().map(|_| Vec::new()).collect();

    for start in (0..max_n).step_by(BATCH) {
        let end = (start + BATCH).min(max_n);
        let batch: Vec<(M, Option<M>, Vec<M>)> = (start..end)
            .into_par_iter()
            .map(|i| {
                let cover = source.load(CorpusTag::Cover, i as u64)?;
                let clean = if blackbox {
                    Some(source.load(CorpusTag::Clean, i as u64)?)
                } else {
                    None
                };
                let marked = collections
                    .iter()
                    .map(|c| c.markers[i % c.markers.len()].embed(&cover))
                    .collect::<Result<Vec<_>>>()?;
                Ok((cover, clean, marked))
            })
            .collect::<Result<_>>()?;

        for (offset, (cover, clean, marked)) in batch.iter().enumerate() {
            let i = start + offset;
            let mut rec = ManifestRecord::new(Role::Cover, CorpusTag::Cover, i as u64, spec.seed);
            rec.file = source.file(CorpusTag::Cover, i as u64);
            manifest.push(rec.clone());
            rec.role = Role::Watermarked;
            rec.key_id = collections
                .iter()
                .map(|c| c.markers[i % c.markers.len()].key().id())
                .collect::<Vec<_>>()
                .join("/");
            rec.clamp_fraction = clamp_fraction(&marked[0]);
            manifest.push(rec);
            if clean.is_some() {
                let mut rec = ManifestRecord::new(Role::CleanCorpus, CorpusTag::Clean, i as u64, spec.seed);
                rec.file = source.file(CorpusTag::Clean, i as u64);
                manifest.push(rec);
            }

            for (c, m) in marked.iter().enumerate() {
                for acc in &mut accs[c] {
                    acc.push_watermarked(m)?;
                    match acc.mode() {
                        ExtractionMode::Graybox => acc.push_clean(cover)?,
                        ExtractionMode::Blackbox => acc.push_clean(clean.as_ref().expect("clean corpus loaded"))?,
                    }
                }
            }
            let n = i + 1;
            if spec.n_list.contains(&n) {
                for (c, coll) in collections.iter().enumerate() {
                    for acc in &accs[c] {
                        found[c].push(Checkpoint {
                            mode: acc.mode(),
                            n,
                            pattern: acc.pattern(&coll.key_mix)?,
                        });
                    }
                }
            }
        }
    }
    for f in &mut found {
        f.sort_by_key(|cp| (spec.modes.iter().position(|&m| m == cp.mode), cp.n));
    }
    Ok(found)
}

/// Held-out covers and their watermarked versions.
struct EvalSet<M> {
    covers: Vec<M>,
    marked: Vec<M>,
}

fn eval_set<M: Evaluable>(
    spec: &ExperimentSpec,
    source: &dyn MediaSource<M>,
    marker: &Watermarker,
    manifest: &mut Manifest,
) -> Result<EvalSet<M>> {
    let first = spec.max_n() as u64;
    let covers: Vec<M> = (first..first + spec.eval_count as u64)
        .into_par_iter()
        .map(|i| source.load(CorpusTag::Cover, i))
        .collect::<Result<_>>()?;
    let marked: Vec<M> = covers
        .par_iter()
        .map(|c| marker.embed(c))
        .collect::<Result<_>>()?;
    for (j, m) in marked.iter().enumerate() {
        let i = first + j as u64;
        let mut rec = ManifestRecord::new(Role::Eval, CorpusTag::Cover, i, spec.seed);
        rec.file = source.file(CorpusTag::Cover, i);
        rec.key_id = marker.key().id();
        rec.clamp_fraction = clamp_fraction(m);
        manifest.push(rec);
    }
    Ok(EvalSet { covers, marked })
}

fn check_capacity<M>(spec: &ExperimentSpec, source: &dyn MediaSource<M>) -> Result<()> {
    let need = spec.max_n() + spec.eval_count;
    if source.available(CorpusTag::Cover) < need {
        return Err(Error::Insufficient {
            what: "cover media",
            needed: need,
            available: source.available(CorpusTag::Cover),
        });
    }
    if spec.modes.contains(&ExtractionMode::Blackbox) && source.available(CorpusTag::Clean) < spec.max_n() {
        return Err(Error::Insufficient {
            what: "clean-corpus media",
            needed: spec.max_n(),
            available: source.available(CorpusTag::Clean),
        });
    }
    Ok(())
}

pub const REMOVAL_HEADER: [&str; 9] = [
    "scheme",
    "mode",
    "n",
    "auc",
    "bit_acc",
    "psnr",
    "ssim",
    "lpips_reserved",
    "sifid_reserved",
];
pub const FORGERY_HEADER: [&str; 5] = ["n", "mode", "forged_pass_rate", "removal_tpr", "threshold"];
pub const FORGERY_SCORES_HEADER: [&str; 5] = ["n", "mode", "kind", "index", "score"];
pub const MIXING_HEADER: [&str; 4] = ["K", "mode", "auc", "psnr"];
pub const DISTORTION_HEADER: [&str; 6] = ["kind", "level", "auc", "psnr", "ssim", "pareto_dominated"];
pub const AUDIO_HEADER: [&str; 4] = ["n", "mode", "det_acc", "si_snr"];
pub const PATTERN_VIEW_HEADER: [&str; 4] = ["mode", "n", "rmse_vs_truth", "file"];

fn removal_row(scheme: &str, mode: &str, n: &str, auc: f64, s: &EvalStats) -> Vec<String> {
    vec![
        scheme.to_owned(),
        mode.to_owned(),
        n.to_owned(),
        fmt_f(auc),
        fmt_opt(s.bit_acc),
        fmt_f(s.psnr),
        fmt_opt(s.ssim),
        String::new(),
        String::new(),
    ]
}

fn run_removal<M: Evaluable>(spec: &ExperimentSpec, source: &dyn MediaSource<M>, out: &mut SweepOutcome) -> Result<()> {
    let coll = Collection::new(spec, 0, 1, source.shape())?;
    let marker = &coll.markers[0];
    let eval = eval_set(spec, source, marker, &mut out.manifest)?;
    let clean_scores = scores(marker, &eval.covers)?;
    let scheme = spec.scheme().name();
    let mut report = Report::new("removal", &REMOVAL_HEADER);

    let nr = evaluate(marker, &eval.marked, &eval.covers)?;
    report.push(removal_row(scheme, "none", "NR", auc(&nr.scores, &clean_scores)?, &nr));

    let checkpoints = extraction_pass(spec, source, std::slice::from_ref(&coll), &mut out.manifest)?;
    for cp in &checkpoints[0] {
        let removed = remove_all(&eval.marked, &cp.pattern, spec.strength)?;
        let s = evaluate(marker, &removed, &eval.covers)?;
        report.push(removal_row(scheme, cp.mode.name(), &cp.n.to_string(), auc(&s.scores, &clean_scores)?, &s));
    }
    out.reports.push(report);
    Ok(())
}

fn remove_all<M: Evaluable>(items: &[M], p: &ExtractedPattern, strength: f64) -> Result<Vec<M>> {
    items.par_iter().map(|x| remove(x, p, strength)).collect()
}

fn forge_all<M: Evaluable>(items: &[M], p: &ExtractedPattern, strength: f64) -> Result<Vec<M>> {
    items.par_iter().map(|x| forge(x, p, strength)).collect()
}

fn run_forgery(spec: &ExperimentSpec, source: &dyn MediaSource<ImageBuffer>, out: &mut SweepOutcome) -> Result<()> {
    let coll = Collection::new(spec, 0, 1, source.shape())?;
    let marker = &coll.markers[0];
    let eval = eval_set(spec, source, marker, &mut out.manifest)?;
    let clean_scores = scores(marker, &eval.covers)?;
    let marked_scores = scores(marker, &eval.marked)?;
    let roc = metrics::tpr_at_fpr(&ScoreSet::new(marked_scores.clone(), clean_scores.clone())?, spec.fpr)?;
    if roc.undersampled {
        out.warnings.push(format!(
            "{} clean scores cannot resolve a {} false-positive rate; threshold is coarse",
            clean_scores.len(),
            spec.fpr
        ));
    }
    let tau = roc.threshold_at_fpr;
    let mut report = Report::new("forgery", &FORGERY_HEADER);
    let mut hist = Report::new("forgery_scores", &FORGERY_SCORES_HEADER);
    let mut push_scores = |n: &str, mode: &str, kind: &str, s: &[f64]| {
        for (i, v) in s.iter().enumerate() {
            hist.push(vec![n.into(), mode.into(), kind.into(), i.to_string(), fmt_f(*v)]);
        }
    };
    push_scores("NR", "none", "clean", &clean_scores);
    push_scores("NR", "none", "watermarked", &marked_scores);

    report.push(vec![
        "NR".into(),
        "none".into(),
        String::new(),
        fmt_f(roc.tpr_at_fpr),
        fmt_f(tau),
    ]);

    let checkpoints = extraction_pass(spec, source, std::slice::from_ref(&coll), &mut out.manifest)?;
    if let Some(first) = checkpoints[0].first() {
        // Strength-zero control: forging nothing leaves clean images, which
        // pass at the calibrated false-positive rate.
        let control = scores(marker, &forge_all(&eval.covers, &first.pattern, 0.0)?)?;
        report.push(vec![
            "S0".into(),
            "control".into(),
            fmt_f(metrics::pass_rate(&control, tau)),
            String::new(),
            fmt_f(tau),
        ]);
    }
    for cp in &checkpoints[0] {
        let n = cp.n.to_string();
        let forged = scores(marker, &forge_all(&eval.covers, &cp.pattern, spec.strength)?)?;
        let removed = scores(marker, &remove_all(&eval.marked, &cp.pattern, spec.strength)?)?;
        report.push(vec![
            n.clone(),
            cp.mode.name().into(),
            fmt_f(metrics::pass_rate(&forged, tau)),
            fmt_f(metrics::pass_rate(&removed, tau)),
            fmt_f(tau),
        ]);
        push_scores(&n, cp.mode.name(), "forged", &forged);
        push_scores(&n, cp.mode.name(), "removed", &removed);
    }
    out.reports.push(report);
    out.reports.push(hist);
    Ok(())
}

fn run_mixing(spec: &ExperimentSpec, source: &dyn MediaSource<ImageBuffer>, out: &mut SweepOutcome) -> Result<()> {
    let shape = source.shape();
    let k_list = spec.k_list();
    // Collection order: key set major, K minor.
    let collections = (0..spec.key_sets)
        .flat_map(|set| k_list.iter().map(move |&k| (set, k)))
        .map(|(set, k)| Collection::new(spec, set, k, shape))
        .collect::<Result<Vec<_>>>()?;
    let victim = |set: usize| &collections[set * k_list.len()].markers[0];
    let eval = eval_set(spec, source, victim(0), &mut out.manifest)?;
    let per_set = (0..spec.key_sets)
        .map(|set| {
            let marker = victim(set);
            let marked = if set == 0 {
                eval.marked.clone()
            } else {
                eval.covers.par_iter().map(|c| marker.embed(c)).collect::<Result<_>>()?
            };
            Ok((marked, scores(marker, &eval.covers)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut extraction_spec = spec.clone();
    extraction_spec.n_list = vec![spec.max_n()];
    let checkpoints = extraction_pass(&extraction_spec, source, &collections, &mut out.manifest)?;

    let mut report = Report::new("mixing", &MIXING_HEADER);
    for (ki, k) in k_list.iter().enumerate() {
        for (mi, mode) in spec.modes.iter().enumerate() {
            let (mut auc_sum, mut psnr_sum) = (0.0, 0.0);
            for (set, (marked, clean_scores)) in per_set.iter().enumerate() {
                let cp = &checkpoints[set * k_list.len() + ki][mi];
                debug_assert_eq!(cp.mode, *mode);
                let removed = remove_all(marked, &cp.pattern, spec.strength)?;
                let s = evaluate(victim(set), &removed, &eval.covers)?;
                auc_sum += auc(&s.scores, clean_scores)?;
                psnr_sum += s.psnr;
            }
            let sets = spec.key_sets as f64;
            report.push(vec![
                k.to_string(),
                mode.name().into(),
                fmt_f(auc_sum / sets),
                fmt_f(psnr_sum / sets),
            ]);
        }
    }
    out.reports.push(report);
    Ok(())
}

/// `(auc, psnr)` dominance: no worse on both axes and better on one.
fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 >= b.1 && (a.0 < b.0 || a.1 > b.1)
}

fn run_distortion(spec: &ExperimentSpec, source: &dyn MediaSource<ImageBuffer>, out: &mut SweepOutcome) -> Result<()> {
    let coll = Collection::new(spec, 0, 1, source.shape())?;
    let marker = &coll.markers[0];
    let eval = eval_set(spec, source, marker, &mut out.manifest)?;
    let clean_scores = scores(marker, &eval.covers)?;
    // (kind, level, auc, psnr, ssim)
    let mut points: Vec<(String, f64, f64, f64, Option<f64>)> = Vec::new();

    let nr = evaluate(marker, &eval.marked, &eval.covers)?;
    points.push(("identity".into(), 0.0, auc(&nr.scores, &clean_scores)?, nr.psnr, nr.ssim));

    for d in DistortionSpec::default_grid(spec.seed) {
        let distorted: Vec<ImageBuffer> = eval
            .marked
            .par_iter()
            .enumerate()
            .map(|(i, x)| d.apply(x, i as u64))
            .collect::<Result<_>>()?;
        let s = evaluate(marker, &distorted, &eval.covers)?;
        points.push((d.kind.name().into(), d.level, auc(&s.scores, &clean_scores)?, s.psnr, s.ssim));
    }

    let mut extraction_spec = spec.clone();
    extraction_spec.n_list = vec![spec.max_n()];
    let checkpoints = extraction_pass(&extraction_spec, source, std::slice::from_ref(&coll), &mut out.manifest)?;
    for cp in &checkpoints[0] {
        let removed = remove_all(&eval.marked, &cp.pattern, spec.strength)?;
        let s = evaluate(marker, &removed, &eval.covers)?;
        points.push((
            format!("removal-{}", cp.mode),
            cp.n as f64,
            auc(&s.scores, &clean_scores)?,
            s.psnr,
            s.ssim,
        ));
    }

    let mut report = Report::new("distortion", &DISTORTION_HEADER);
    for (i, p) in points.iter().enumerate() {
        let dominated = points
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && dominates((q.2, q.3), (p.2, p.3)));
        report.push(vec![
            p.0.clone(),
            fmt_f(p.1),
            fmt_f(p.2),
            fmt_f(p.3),
            fmt_opt(p.4),
            dominated.to_string(),
        ]);
    }
    out.reports.push(report);
    Ok(())
}

/// Balanced accuracy of the fixed-threshold audio detector, counting
/// `positives` as watermarked and `negatives` as clean.
fn detection_accuracy(pos_scores: &[f64], neg_scores: &[f64]) -> f64 {
    let tpr = pos_scores.iter().filter(|&&s| s > AUDIO_DETECTION_THRESHOLD).count() as f64 / pos_scores.len() as f64;
    let tnr = neg_scores.iter().filter(|&&s| s <= AUDIO_DETECTION_THRESHOLD).count() as f64 / neg_scores.len() as f64;
    0.5 * (tpr + tnr)
}

fn run_audio(spec: &ExperimentSpec, source: &dyn MediaSource<AudioBuffer>, out: &mut SweepOutcome) -> Result<()> {
    let coll = Collection::new(spec, 0, 1, source.shape())?;
    let marker = &coll.markers[0];
    let eval = eval_set(spec, source, marker, &mut out.manifest)?;
    let clean_scores = scores(marker, &eval.covers)?;
    let mut report = Report::new("audio", &AUDIO_HEADER);
    let nr = evaluate(marker, &eval.marked, &eval.covers)?;
    report.push(vec![
        "NR".into(),
        "none".into(),
        fmt_f(detection_accuracy(&nr.scores, &clean_scores)),
        fmt_opt(nr.si_snr),
    ]);
    let checkpoints = extraction_pass(spec, source, std::slice::from_ref(&coll), &mut out.manifest)?;
    for cp in &checkpoints[0] {
        let removed = remove_all(&eval.marked, &cp.pattern, spec.strength)?;
        let s = evaluate(marker, &removed, &eval.covers)?;
        report.push(vec![
            cp.n.to_string(),
            cp.mode.name().into(),
            fmt_f(detection_accuracy(&s.scores, &clean_scores)),
            fmt_opt(s.si_snr),
        ]);
    }
    out.reports.push(report);
    Ok(())
}

fn run_pattern_view<M: Evaluable>(
    spec: &ExperimentSpec,
    source: &dyn MediaSource<M>,
    out: &mut SweepOutcome,
) -> Result<()> {
    let coll = Collection::new(spec, 0, 1, source.shape())?;
    let marker = &coll.markers[0];
    let truth: Option<PatternDelta> = marker.reference_pattern().ok();
    if let Some(t) = &truth {
        out.images.push(("pattern_truth.png".into(), normalize_for_view(t)?));
    }
    let checkpoints = extraction_pass(spec, source, std::slice::from_ref(&coll), &mut out.manifest)?;
    let mut report = Report::new("pattern_view", &PATTERN_VIEW_HEADER);
    for cp in &checkpoints[0] {
        let file = format!("pattern_{}_n{}.png", cp.mode, cp.n);
        let rmse = truth.as_ref().map(|t| {
            let d = cp.pattern.delta.data();
            (d.iter().zip(t.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
        });
        report.push(vec![cp.mode.name().into(), cp.n.to_string(), fmt_opt(rmse), file.clone()]);
        out.images.push((file, normalize_for_view(&cp.pattern.delta)?));
    }
    out.reports.push(report);
    Ok(())
}

fn run_images(spec: &ExperimentSpec, source: &dyn MediaSource<ImageBuffer>) -> Result<SweepOutcome> {
    check_capacity(spec, source)?;
    let mut out = SweepOutcome::default();
    match spec.experiment {
        Experiment::RemovalSweep => run_removal(spec, source, &mut out)?,
        Experiment::ForgerySweep => run_forgery(spec, source, &mut out)?,
        Experiment::MixingSweep => run_mixing(spec, source, &mut out)?,
        Experiment::DistortionBaseline => run_distortion(spec, source, &mut out)?,
        Experiment::PatternView => run_pattern_view(spec, source, &mut out)?,
        Experiment::AudioSweep => unreachable!("validated"),
    }
    Ok(out)
}

fn run_clips(spec: &ExperimentSpec, source: &dyn MediaSource<AudioBuffer>) -> Result<SweepOutcome> {
    check_capacity(spec, source)?;
    let mut out = SweepOutcome::default();
    match spec.experiment {
        Experiment::AudioSweep => run_audio(spec, source, &mut out)?,
        Experiment::RemovalSweep => run_removal(spec, source, &mut out)?,
        Experiment::PatternView => run_pattern_view(spec, source, &mut out)?,
        other => {
            return Err(Error::invalid(format!(
                "experiment {other} is image-only"
            )))
        }
    }
    Ok(out)
}

/// Runs one experiment and audits its manifest.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let out = match (&spec.data_dir, spec.scheme().is_audio()) {
        (None, false) => run_images(
            spec,
            &SyntheticImages {
                shape: spec.shape(),
                seed: spec.seed,
            },
        )?,
        (None, true) => run_clips(
            spec,
            &SyntheticClips {
                samples: super::synth::clip_len(),
                seed: spec.seed,
            },
        )?,
        (Some(dir), false) => run_images(spec, &DirectoryMedia::images(dir)?)?,
        (Some(dir), true) => run_clips(spec, &DirectoryMedia::clips(dir)?)?,
    };
    out.manifest.audit()?;
    Ok(out)
}

/// Writes reports, manifest and view images into `spec.out_dir`.
/// Returns the written paths in a stable order.
pub fn write_outcome(spec: &ExperimentSpec, out: &SweepOutcome) -> Result<Vec<PathBuf>> {
    let dir = &spec.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let prov = Provenance::new(spec.hash(), spec.seed);
    let mut written = Vec::new();
    for r in &out.reports {
        let path = dir.join(format!("{}.csv", r.name));
        r.write_csv(&prov, &path)?;
        written.push(path);
    }
    let path = dir.join("manifest.csv");
    out.manifest.write_csv(&path)?;
    written.push(path);
    for (name, img) in &out.images {
        let path = dir.join(name);
        codec::save_png(img, &path)?;
        written.push(path);
    }
    Ok(written)
}
