use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wmsteg::attack::{self, ExtractionConfig, ExtractionMode};
use wmsteg::codec;
use wmsteg::harness::{self, CorpusTag, Experiment, ExperimentSpec, Manifest};
use wmsteg::media::{normalize_for_view, AudioBuffer, ImageBuffer, MediaShape, Signal};
use wmsteg::watermark::{Scheme, WatermarkKey, Watermarker};
use wmsteg::{Error, Result};

#[derive(Parser)]
#[command(name = "wmsteg", version, about = "Averaging attacks on additive watermarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a procedural corpus (PNG images or WAV clips).
    GenData(GenData),
    /// Generate a watermark key record.
    Keygen(Keygen),
    /// Watermark one PNG or WAV file.
    Embed(Embed),
    /// Estimate the watermark pattern by averaging a collection.
    Extract(Extract),
    /// Apply an extracted pattern to a file.
    Attack(Attack),
    /// Score a file against a key.
    Detect(Detect),
    /// Run an experiment and write its CSV reports.
    Sweep(Sweep),
    /// Render CSV columns as an SVG line chart.
    Plot(Plot),
    /// Render a pattern file or a key's reference pattern as a PNG.
    PatternView(PatternView),
}

#[derive(Clone, Copy, ValueEnum)]
enum Corpus {
    Cover,
    Clean,
    Both,
}

#[derive(Args)]
struct GenData {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Corpus::Both)]
    corpus: Corpus,
    #[arg(long, default_value_t = 128)]
    height: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    /// Write 2-second clips instead of images.
    #[arg(long)]
    audio: bool,
    /// Also write watermarked copies of the covers under `watermarked/`.
    #[arg(long)]
    key: Option<PathBuf>,
}

#[derive(Args)]
struct Keygen {
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    alpha: Option<f64>,
    /// Write the record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Embed {
    #[arg(long)]
    key: PathBuf,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct Extract {
    #[arg(long, default_value = "graybox")]
    mode: ExtractionMode,
    /// Directory of watermarked files.
    #[arg(long)]
    watermarked: PathBuf,
    /// Paired covers (graybox) or an unrelated clean corpus (blackbox).
    #[arg(long)]
    clean: PathBuf,
    /// Number of files to average; all available when omitted.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    Remove,
    Forge,
}

#[derive(Args)]
struct Attack {
    #[arg(value_enum)]
    kind: AttackKind,
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct Detect {
    #[arg(long)]
    key: PathBuf,
    inputs: Vec<PathBuf>,
}

/// Every experiment field; unset flags fall back to the config file, then defaults.
#[derive(Args, Default)]
struct SpecFlags {
    #[arg(long)]
    scheme: Option<String>,
    /// graybox, blackbox, both or a comma list.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    k_list: Option<String>,
    #[arg(long)]
    key_sets: Option<String>,
    #[arg(long)]
    eval_count: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    key_seed: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    strength: Option<String>,
    #[arg(long)]
    fpr: Option<String>,
    #[arg(long)]
    height: Option<String>,
    #[arg(long)]
    width: Option<String>,
    #[arg(long)]
    channels: Option<String>,
    #[arg(long)]
    data_dir: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl SpecFlags {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        let pairs = [
            ("scheme", &self.scheme),
            ("mode", &self.mode),
            ("n_list", &self.n_list),
            ("k_list", &self.k_list),
            ("key_sets", &self.key_sets),
            ("eval_count", &self.eval_count),
            ("seed", &self.seed),
            ("key_seed", &self.key_seed),
            ("alpha", &self.alpha),
            ("strength", &self.strength),
            ("fpr", &self.fpr),
            ("height", &self.height),
            ("width", &self.width),
            ("channels", &self.channels),
            ("data_dir", &self.data_dir),
            ("out_dir", &self.out),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                spec.set(k, v)?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct Sweep {
    experiment: Experiment,
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: SpecFlags,
    /// Also render SVG charts next to the CSVs.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct Plot {
    csv: PathBuf,
    #[arg(long)]
    x: String,
    /// Comma-separated y columns.
    #[arg(long)]
    y: String,
    /// Keep only rows where `column=value`.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PatternView {
    /// Pattern file written by `extract`.
    #[arg(long, conflicts_with = "key", required_unless_present = "key")]
    pattern: Option<PathBuf>,
    /// Render this key's ground-truth pattern instead.
    #[arg(long)]
    key: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    height: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 3)]
    channels: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Media {
    Image(ImageBuffer),
    Audio(AudioBuffer),
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

fn load_media(path: &Path) -> Result<Media> {
    if is_wav(path) {
        codec::load_wav(path).map(Media::Audio)
    } else {
        codec::load_png(path).map(Media::Image)
    }
}

fn save_media(media: &Media, path: &Path) -> Result<()> {
    match media {
        Media::Image(img) => codec::save_png(img, path),
        Media::Audio(clip) => codec::save_wav(clip, path),
    }
}

fn read_key(path: &Path) -> Result<WatermarkKey> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?
        .trim()
        .parse()
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn gen_data(a: &GenData) -> Result<()> {
    let shape = if a.audio {
        MediaShape::audio(harness::clip_len())
    } else {
        MediaShape::image(a.height, a.width, a.channels)
    };
    let tags: &[CorpusTag] = match a.corpus {
        Corpus::Cover => &[CorpusTag::Cover],
        Corpus::Clean => &[CorpusTag::Clean],
        Corpus::Both => &[CorpusTag::Cover, CorpusTag::Clean],
    };
    let mut manifest = Manifest::default();
    for &tag in tags {
        manifest
            .records
            .extend(harness::synth_dataset(&a.out, a.count, shape, tag, a.seed)?.records);
    }
    if let Some(key_path) = &a.key {
        let key = read_key(key_path)?;
        let marker = Watermarker::new(&key, shape)?;
        let dir = a.out.join("watermarked");
        create_dir(&dir)?;
        let covers: Vec<_> = manifest
            .with_role(harness::Role::Cover)
            .cloned()
            .collect();
        for cover in covers {
            let src = a.out.join(&cover.file);
            let name = src.file_name().expect("synthesized files have names");
            let marked = match load_media(&src)? {
                Media::Image(x) => Media::Image(marker.embed(&x)?),
                Media::Audio(x) => Media::Audio(marker.embed(&x)?),
            };
            save_media(&marked, &dir.join(name))?;
            let mut rec = cover.clone();
            rec.role = harness::Role::Watermarked;
            rec.file = format!("watermarked/{}", name.to_string_lossy());
            rec.key_id = key.id();
            manifest.push(rec);
        }
    }
    manifest.write_csv(&a.out.join("manifest.csv"))?;
    println!("wrote {} files under {}", manifest.records.len(), a.out.display());
    Ok(())
}

fn keygen(a: &Keygen) -> Result<()> {
    let mut key = WatermarkKey::generate(a.scheme, a.seed);
    if let Some(alpha) = a.alpha {
        key = key.with_amplitude(alpha)?;
    }
    match &a.out {
        Some(path) => std::fs::write(path, format!("{key}\n")).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            println!("{key}");
            Ok(())
        }
    }
}

fn embed(a: &Embed) -> Result<()> {
    let key = read_key(&a.key)?;
    let out = match load_media(&a.input)? {
        Media::Image(x) => Media::Image(Watermarker::new(&key, x.shape())?.embed(&x)?),
        Media::Audio(x) => Media::Audio(Watermarker::new(&key, x.shape())?.embed(&x)?),
    };
    save_media(&out, &a.output)
}

fn load_first<M>(files: &[PathBuf], n: usize, load: fn(&Path) -> Result<M>) -> Result<Vec<M>> {
    if files.len() < n {
        return Err(Error::Insufficient {
            what: "media files",
            needed: n,
            available: files.len(),
        });
    }
    files[..n].iter().map(|p| load(p)).collect()
}

fn extract(a: &Extract) -> Result<()> {
    let audio = !codec::list_wavs(&a.watermarked)?.is_empty();
    let list = |dir: &Path| if audio { codec::list_wavs(dir) } else { codec::list_pngs(dir) };
    let (wm_files, clean_files) = (list(&a.watermarked)?, list(&a.clean)?);
    let n = a.n.unwrap_or(wm_files.len().min(clean_files.len()));
    let cfg = ExtractionConfig::new(a.mode, n);
    let pattern = if audio {
        let wm = load_first(&wm_files, n, |p| codec::load_wav(p))?;
        let clean = load_first(&clean_files, n, |p| codec::load_wav(p))?;
        attack::extract_audio_pattern(&wm, &clean, &cfg)?
    } else {
        let wm = load_first(&wm_files, n, |p| codec::load_png(p))?;
        let clean = load_first(&clean_files, n, |p| codec::load_png(p))?;
        attack::extract_pattern(&wm, &clean, &cfg)?
    };
    attack::save_pattern(&pattern, &a.out)?;
    println!(
        "extracted {} pattern from n={} (rms {:.6}, clamp fraction {:.2e})",
        pattern.mode,
        pattern.n_used,
        pattern.delta.rms(),
        pattern.clamp_fraction
    );
    if pattern.clamp_fraction > 0.0 && pattern.mode == ExtractionMode::Graybox {
        eprintln!("warning: clamped samples present; graybox estimate is not exact");
    }
    Ok(())
}

fn run_attack(a: &Attack) -> Result<()> {
    let pattern = attack::load_pattern(&a.pattern)?;
    let out = match (a.kind, load_media(&a.input)?) {
        (AttackKind::Remove, Media::Image(x)) => Media::Image(attack::remove(&x, &pattern, a.strength)?),
        (AttackKind::Forge, Media::Image(x)) => Media::Image(attack::forge(&x, &pattern, a.strength)?),
        (AttackKind::Remove, Media::Audio(x)) => Media::Audio(attack::remove(&x, &pattern, a.strength)?),
        (AttackKind::Forge, Media::Audio(x)) => Media::Audio(attack::forge(&x, &pattern, a.strength)?),
    };
    save_media(&out, &a.output)
}

fn report_detection<M: Signal>(path: &Path, key: &WatermarkKey, x: &M) -> Result<()> {
    let marker = Watermarker::new(key, x.shape())?;
    let mut line = format!("{}\tscore={:.6}", path.display(), marker.detect_score(x)?);
    if key.scheme().has_payload() {
        let bits = marker.decode_bits(x)?;
        let acc = wmsteg::metrics::bit_accuracy(&bits, key.payload())?;
        line += &format!("\tbit_acc={acc:.6}");
    }
    if key.scheme().is_audio() {
        line += &format!("\tdetected={}", marker.is_detected(x)?);
    }
    println!("{line}");
    Ok(())
}

fn detect(a: &Detect) -> Result<()> {
    let key = read_key(&a.key)?;
    if a.inputs.is_empty() {
        return Err(Error::InvalidArgument("no input files given".into()));
    }
    for path in &a.inputs {
        match load_media(path)? {
            Media::Image(x) => report_detection(path, &key, &x)?,
            Media::Audio(x) => report_detection(path, &key, &x)?,
        }
    }
    Ok(())
}

/// `(csv, x, ys, filter)` charts drawn by `sweep --plot`.
fn default_charts(experiment: Experiment) -> Vec<(&'static str, &'static str, &'static [&'static str], Option<(&'static str, &'static str)>)> {
    match experiment {
        Experiment::RemovalSweep => vec![
            ("removal", "n", &["auc", "bit_acc"], Some(("mode", "graybox"))),
            ("removal", "n", &["auc", "bit_acc"], Some(("mode", "blackbox"))),
        ],
        Experiment::ForgerySweep => vec![("forgery", "n", &["forged_pass_rate", "removal_tpr"], Some(("mode", "graybox")))],
        Experiment::MixingSweep => vec![("mixing", "K", &["auc"], Some(("mode", "graybox")))],
        Experiment::AudioSweep => vec![("audio", "n", &["si_snr"], Some(("mode", "blackbox")))],
        Experiment::DistortionBaseline | Experiment::PatternView => vec![],
    }
}

fn sweep(a: &Sweep) -> Result<()> {
    let mut spec = match &a.config {
        Some(path) => ExperimentSpec::from_config_file(path)?,
        None => ExperimentSpec::default(),
    };
    spec.experiment = a.experiment;
    a.flags.apply(&mut spec)?;
    let outcome = harness::run_experiment(&spec)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let mut written = harness::write_outcome(&spec, &outcome)?;
    if a.plot {
        for (name, x, ys, filter) in default_charts(spec.experiment) {
            let csv = spec.out_dir.join(format!("{name}.csv"));
            let suffix = filter.map(|(_, v)| format!("_{v}")).unwrap_or_default();
            let svg = spec.out_dir.join(format!("{name}{suffix}.svg"));
            harness::write_svg_lines(&csv, x, ys, filter, &svg)?;
            written.push(svg);
        }
    }
    println!("spec {} ({})", spec.hash(), spec.experiment);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn plot(a: &Plot) -> Result<()> {
    let ys: Vec<&str> = a.y.split(',').map(str::trim).collect();
    let filter = match &a.filter {
        Some(f) => Some(
            f.split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("filter `{f}` is not `column=value`")))?,
        ),
        None => None,
    };
    harness::write_svg_lines(&a.csv, &a.x, &ys, filter, &a.out)
}

fn pattern_view(a: &PatternView) -> Result<()> {
    let delta = match (&a.pattern, &a.key) {
        (Some(p), _) => attack::load_pattern(p)?.delta,
        (None, Some(k)) => {
            let key = read_key(k)?;
            if key.scheme().is_audio() {
                return Err(Error::InvalidArgument("audio patterns have no image view".into()));
            }
            Watermarker::new(&key, MediaShape::image(a.height, a.width, a.channels))?.reference_pattern()?
        }
        (None, None) => unreachable!("clap requires --pattern or --key"),
    };
    codec::save_png(&normalize_for_view(&delta)?, &a.out)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Keygen(a) => keygen(a),
        Command::Embed(a) => embed(a),
        Command::Extract(a) => extract(a),
        Command::Attack(a) => run_attack(a),
        Command::Detect(a) => detect(a),
        Command::Sweep(a) => sweep(a),
        Command::Plot(a) => plot(a),
        Command::PatternView(a) => pattern_view(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
