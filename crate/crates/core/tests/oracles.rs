//! Monte-Carlo oracles over the synthetic corpora.

use rayon::prelude::*;

use wmsteg::attack::{self, ExtractionConfig, ExtractionMode, MeanAccumulator};
use wmsteg::harness::{synth_image, CorpusTag};
use wmsteg::media::{ImageBuffer, MediaShape, PatternDelta, Signal};
use wmsteg::metrics::{self, ScoreSet};
use wmsteg::watermark::{Scheme, WatermarkKey, Watermarker, DEFAULT_IMAGE_AMPLITUDE};

const IMAGE_SCHEMES: [Scheme; 4] = [
    Scheme::SpreadSpatial,
    Scheme::FourierRing,
    Scheme::DctBarcode,
    Scheme::AdaptiveMasked,
];

fn covers(shape: MediaShape, tag: CorpusTag, range: std::ops::Range<u64>) -> Vec<ImageBuffer> {
    range
        .into_par_iter()
        .map(|i| synth_image(shape, tag, 3, i).unwrap())
        .collect()
}

fn marker(scheme: Scheme, seed: u64, shape: MediaShape) -> Watermarker {
    Watermarker::new(&WatermarkKey::generate(scheme, seed), shape).unwrap()
}

#[test]
fn embedding_beats_clean_score_and_keeps_fidelity() {
    let shape = MediaShape::image(128, 128, 3);
    let xs = covers(shape, CorpusTag::Cover, 0..200);
    for scheme in IMAGE_SCHEMES {
        let m = marker(scheme, 5, shape);
        let (wins, worst_psnr, clamped, bit_acc) = xs
            .par_iter()
            .map(|x| {
                let y = m.embed(x).unwrap();
                let win = m.detect_score(&y).unwrap() > m.detect_score(x).unwrap();
                let clamped = y.samples().iter().filter(|&&v| v <= 0.0 || v >= 1.0).count();
                let acc = if scheme.has_payload() {
                    metrics::bit_accuracy(&m.decode_bits(&y).unwrap(), m.key().payload()).unwrap()
                } else {
                    1.0
                };
                (win as usize, metrics::psnr(&y, x).unwrap(), clamped, acc)
            })
            .reduce(
                || (0, f64::INFINITY, 0, 1.0),
                |a, b| (a.0 + b.0, a.1.min(b.1), a.2 + b.2, a.3.min(b.3)),
            );
        assert_eq!(wins, xs.len(), "{scheme}: embedding must raise the score");
        assert!(worst_psnr >= 38.0, "{scheme}: psnr {worst_psnr}");
        assert!((clamped as f64) < 0.01 * (xs.len() * shape.len()) as f64, "{scheme}: clamped {clamped}");
        assert!(bit_acc >= 0.99, "{scheme}: fresh bit accuracy {bit_acc}");
    }
}

#[test]
fn wrong_key_on_watermarked_media_looks_clean() {
    let shape = MediaShape::image(128, 128, 3);
    let xs = covers(shape, CorpusTag::Cover, 1000..1400);
    let (marked, clean) = xs.split_at(200);
    for scheme in IMAGE_SCHEMES {
        let right = marker(scheme, 5, shape);
        let wrong = marker(scheme, 6, shape);
        let pos: Vec<f64> = marked
            .par_iter()
            .map(|x| wrong.detect_score(&right.embed(x).unwrap()).unwrap())
            .collect();
        let neg: Vec<f64> = clean.par_iter().map(|x| wrong.detect_score(x).unwrap()).collect();
        let auc = metrics::roc_auc(&ScoreSet::new(pos, neg).unwrap()).unwrap();
        assert!(auc <= 0.6, "{scheme}: wrong-key auc {auc}");
    }
}

#[test]
fn clean_media_decodes_at_chance() {
    let shape = MediaShape::image(64, 64, 3);
    let xs = covers(shape, CorpusTag::Cover, 0..1000);
    for scheme in [Scheme::SpreadSpatial, Scheme::DctBarcode, Scheme::AdaptiveMasked] {
        let mean = xs
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                // Fresh random payload per trial.
                let m = marker(scheme, 10_000 + i as u64, shape);
                metrics::bit_accuracy(&m.decode_bits(x).unwrap(), m.key().payload()).unwrap()
            })
            .sum::<f64>()
            / xs.len() as f64;
        assert!((mean - 0.5).abs() <= 0.04, "{scheme}: clean bit accuracy {mean}");
    }
}

#[test]
fn adaptive_delta_averages_out_pixelwise() {
    let shape = MediaShape::image(8, 8, 1);
    let xs = covers(shape, CorpusTag::Cover, 0..1000);
    let m = marker(Scheme::AdaptiveMasked, 5, shape);
    let mut acc = MeanAccumulator::new(shape.len());
    for x in &xs {
        acc.add(PatternDelta::difference(&m.embed(x).unwrap(), x).unwrap().data());
    }
    let worst = acc.mean().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst <= DEFAULT_IMAGE_AMPLITUDE / 10.0, "max |mean delta| {worst}");
}

#[test]
fn adaptive_delta_mean_shrinks_like_inverse_sqrt_n() {
    let shape = MediaShape::image(64, 64, 3);
    let xs = covers(shape, CorpusTag::Cover, 0..1024);
    let m = marker(Scheme::AdaptiveMasked, 5, shape);
    let deltas: Vec<PatternDelta> = xs
        .par_iter()
        .map(|x| PatternDelta::difference(&m.embed(x).unwrap(), x).unwrap())
        .collect();
    let mut acc = MeanAccumulator::new(shape.len());
    let mut points = Vec::new();
    for (i, d) in deltas.iter().enumerate() {
        acc.add(d.data());
        if [16, 64, 256, 1024].contains(&(i + 1)) {
            let rms = (acc.mean().iter().map(|v| v * v).sum::<f64>() / shape.len() as f64).sqrt();
            points.push((((i + 1) as f64).ln(), rms.ln()));
        }
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

#[test]
fn ring_score_ignores_constant_offsets() {
    let shape = MediaShape::image(64, 64, 3);
    let m = marker(Scheme::FourierRing, 5, shape);
    for x in covers(shape, CorpusTag::Cover, 0..10) {
        let x = x.map(|v| 0.3 + 0.4 * v);
        let y = m.embed(&x).unwrap();
        let shifted = y.map(|v| v + 0.07);
        let (a, b) = (m.detect_score(&y).unwrap(), m.detect_score(&shifted).unwrap());
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn strength_zero_forgery_passes_at_the_calibrated_rate() {
    let shape = MediaShape::image(64, 64, 3);
    let xs = covers(shape, CorpusTag::Cover, 0..2000);
    let m = marker(Scheme::FourierRing, 5, shape);
    let marked: Vec<ImageBuffer> = xs[..100].iter().map(|x| m.embed(x).unwrap()).collect();
    let p = attack::extract_pattern(&marked, &xs[..100], &ExtractionConfig::new(ExtractionMode::Graybox, 100)).unwrap();
    let neg: Vec<f64> = xs[100..1100].par_iter().map(|x| m.detect_score(x).unwrap()).collect();
    let forged: Vec<f64> = xs[1100..]
        .par_iter()
        .map(|x| m.detect_score(&attack::forge(x, &p, 0.0).unwrap()).unwrap())
        .collect();
    let roc = metrics::tpr_at_fpr(&ScoreSet::new(forged.clone(), neg).unwrap(), 0.01).unwrap();
    let rate = metrics::pass_rate(&forged, roc.threshold_at_fpr);
    assert!((rate - 0.01).abs() <= 0.01, "control pass rate {rate}");
}

#[test]
fn corpora_have_distinct_texture_but_equal_brightness() {
    let shape = MediaShape::image(64, 64, 3);
    let a = covers(shape, CorpusTag::Cover, 0..200);
    let b = covers(shape, CorpusTag::Clean, 0..200);
    let mean = |v: &[ImageBuffer]| v.iter().map(|x| x.mean()).sum::<f64>() / v.len() as f64;
    for v in [&a, &b] {
        assert!((mean(v) - 0.5).abs() <= 0.05);
    }
    // Mean absolute horizontal gradient differs between the corpora.
    let roughness = |v: &[ImageBuffer]| {
        v.iter()
            .map(|x| {
                let d = x.data();
                d.windows(4).map(|w| (w[3] - w[0]).abs()).sum::<f64>() / d.len() as f64
            })
            .sum::<f64>()
            / v.len() as f64
    };
    let (ra, rb) = (roughness(&a), roughness(&b));
    assert!((ra - rb).abs() / ra.max(rb) > 0.05, "roughness {ra} vs {rb}");
}
