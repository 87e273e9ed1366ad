use std::path::Path;
use std::process::{Command, Output};

fn wmsteg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmsteg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = wmsteg(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn keygen_embed_extract_attack_detect() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["keygen", "--scheme", "dct-barcode", "--seed", "9", "--out", "k.txt"]);
    ok(d, &["gen-data", "--out", "data", "--count", "12", "--height", "64", "--width", "64", "--key", "k.txt"]);
    ok(d, &["extract", "--watermarked", "data/watermarked", "--clean", "data/covers", "--n", "10", "--out", "p.stgp"]);
    ok(d, &["attack", "remove", "--pattern", "p.stgp", "data/watermarked/cover-000011.png", "removed.png"]);
    ok(d, &["attack", "forge", "--pattern", "p.stgp", "data/clean/clean-000000.png", "forged.png"]);
    let report = ok(d, &["detect", "--key", "k.txt", "data/watermarked/cover-000011.png", "removed.png", "forged.png"]);
    let acc: Vec<f64> = report
        .lines()
        .map(|l| l.split("bit_acc=").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(acc[0], 1.0);
    assert!(acc[1] < 0.8, "removal leaves bit accuracy {}", acc[1]);
    assert_eq!(acc[2], 1.0);
    ok(d, &["pattern-view", "--pattern", "p.stgp", "--out", "view.png"]);
    assert!(d.join("view.png").exists());
}

#[test]
fn exit_codes_separate_config_and_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let code = |args: &[&str]| wmsteg(d, args).status.code();
    assert_eq!(code(&["sweep", "removal", "--n-list", "20,5"]), Some(2));
    assert_eq!(code(&["sweep", "removal", "--eval-count", "3"]), Some(2));
    assert_eq!(code(&["sweep", "audio", "--scheme", "fourier-ring"]), Some(2));
    assert_eq!(code(&["sweep", "removal", "--data-dir", "missing"]), Some(3));
    std::fs::write(d.join("bad.cfg"), "scheme fourier-ring\n").unwrap();
    assert_eq!(code(&["sweep", "removal", "--config", "bad.cfg"]), Some(2));
    assert_eq!(code(&["detect", "--key", "nokey.txt", "x.png"]), Some(3));
}

#[test]
fn sweep_config_is_overridden_by_flags_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("spec.cfg"),
        "scheme = spread-spatial\nn-list = 5,10\neval_count = 20\nheight = 64\nwidth = 64\nmode = blackbox\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        ok(d, &["sweep", "removal", "--config", "spec.cfg", "--mode", "graybox", "--out", out, "--plot"]);
    }
    let a = std::fs::read_to_string(d.join("a/removal.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b/removal.csv")).unwrap());
    assert_eq!(
        std::fs::read(d.join("a/removal_graybox.svg")).unwrap(),
        std::fs::read(d.join("b/removal_graybox.svg")).unwrap()
    );
    assert!(a.contains("spread-spatial,graybox,10"));
    assert!(!a.contains("blackbox"));
}

#[test]
fn data_directory_sweep_uses_generated_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-data", "--out", "data", "--count", "30", "--height", "64", "--width", "64"]);
    ok(d, &[
        "sweep", "removal", "--scheme", "spread-spatial", "--data-dir", "data", "--n-list", "5",
        "--eval-count", "20", "--height", "64", "--width", "64", "--out", "r",
    ]);
    let manifest = std::fs::read_to_string(d.join("r/manifest.csv")).unwrap();
    assert!(manifest.contains(",covers/cover-000024.png,eval,"));
    let too_many = wmsteg(d, &["sweep", "removal", "--data-dir", "data", "--n-list", "50", "--height", "64", "--width", "64"]);
    assert_eq!(too_many.status.code(), Some(3));
}
