use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::attack::ExtractionMode;
use crate::error::{Error, Result};
use crate::media::MediaShape;
use crate::rng::derive_seed;
use crate::watermark::{Scheme, WatermarkKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    RemovalSweep,
    ForgerySweep,
    MixingSweep,
    DistortionBaseline,
    AudioSweep,
    PatternView,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::RemovalSweep,
        Experiment::ForgerySweep,
        Experiment::MixingSweep,
        Experiment::DistortionBaseline,
        Experiment::AudioSweep,
        Experiment::PatternView,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::RemovalSweep => "removal",
            Experiment::ForgerySweep => "forgery",
            Experiment::MixingSweep => "mixing",
            Experiment::DistortionBaseline => "distortion",
            Experiment::AudioSweep => "audio",
            Experiment::PatternView => "pattern-view",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                Error::invalid(format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

pub const DEFAULT_N_LIST: [usize; 8] = [5, 10, 20, 50, 100, 200, 500, 1000];
pub const DEFAULT_EVAL_COUNT: usize = 100;
pub const MIN_EVAL_COUNT: usize = 20;
pub const DEFAULT_KEY_SETS: usize = 8;

/// Everything that determines one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    /// `None` picks the experiment's natural victim.
    pub scheme: Option<Scheme>,
    pub modes: Vec<ExtractionMode>,
    pub n_list: Vec<usize>,
    /// `None` means 1..=3, or 1..=6 for the barcode scheme.
    pub k_list: Option<Vec<usize>>,
    /// Independent key sets the mixing sweep averages over.
    pub key_sets: usize,
    pub eval_count: usize,
    /// Seed for corpus synthesis and distortion noise.
    pub seed: u64,
    /// Seed of the victim's (base) key.
    pub key_seed: u64,
    pub amplitude: Option<f64>,
    pub strength: f64,
    pub fpr: f64,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Directory with `covers/` and `clean/` subdirectories; synthetic when absent.
    pub data_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            experiment: Experiment::RemovalSweep,
            scheme: None,
            modes: ExtractionMode::ALL.to_vec(),
            n_list: DEFAULT_N_LIST.to_vec(),
            k_list: None,
            key_sets: DEFAULT_KEY_SETS,
            eval_count: DEFAULT_EVAL_COUNT,
            seed: 1,
            key_seed: 42,
            amplitude: None,
            strength: 1.0,
            fpr: crate::metrics::DEFAULT_FPR,
            height: 128,
            width: 128,
            channels: 3,
            data_dir: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::invalid(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect()
}

fn join(list: &[usize]) -> String {
    list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                return None;
            }
            Some(match line.split_once('=') {
                Some((k, v)) => Ok((k.trim().to_owned(), v.trim().to_owned())),
                None => Err(Error::Malformed {
                    what: "config",
                    reason: format!("line {}: expected `key = value`", i + 1),
                }),
            })
        })
        .collect()
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentSpec {
            experiment,
            ..Default::default()
        }
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = ExperimentSpec::default();
        for (k, v) in parse_config(&text)? {
            spec.set(&k, &v)?;
        }
        Ok(spec)
    }

    /// Sets one field by its config name; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "experiment" => self.experiment = value.parse()?,
            "scheme" => self.scheme = Some(value.parse()?),
            "mode" | "modes" => {
                self.modes = match value {
                    "both" => ExtractionMode::ALL.to_vec(),
                    _ => value
                        .split(',')
                        .map(|m| m.trim().parse())
                        .collect::<Result<_>>()?,
                }
            }
            "n_list" => self.n_list = parse_list(&key, value)?,
            "k_list" => self.k_list = Some(parse_list(&key, value)?),
            "key_sets" => self.key_sets = parse_num(&key, value)?,
            "eval_count" => self.eval_count = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "key_seed" => self.key_seed = parse_num(&key, value)?,
            "alpha" | "amplitude" => self.amplitude = Some(parse_num(&key, value)?),
            "strength" => self.strength = parse_num(&key, value)?,
            "fpr" => self.fpr = parse_num(&key, value)?,
            "height" => self.height = parse_num(&key, value)?,
            "width" => self.width = parse_num(&key, value)?,
            "channels" => self.channels = parse_num(&key, value)?,
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "out_dir" | "out" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or(match self.experiment {
            Experiment::AudioSweep => Scheme::AudioSpread,
            _ => Scheme::FourierRing,
        })
    }

    pub fn k_list(&self) -> Vec<usize> {
        self.k_list.clone().unwrap_or_else(|| {
            let top = if self.scheme() == Scheme::DctBarcode { 6 } else { 3 };
            (1..=top).collect()
        })
    }

    pub fn max_n(&self) -> usize {
        self.n_list.last().copied().unwrap_or(0)
    }

    pub fn shape(&self) -> MediaShape {
        if self.scheme().is_audio() {
            MediaShape::audio(super::synth::clip_len())
        } else {
            MediaShape::image(self.height, self.width, self.channels)
        }
    }

    /// The victim's key.
    pub fn base_key(&self) -> Result<WatermarkKey> {
        self.key(0)
    }

    /// Key `k` of a mixed collection; key 0 is the base key.
    pub fn key(&self, k: usize) -> Result<WatermarkKey> {
        self.set_key(0, k)
    }

    /// Key `k` of independent key set `set`; set 0 holds the victim's key.
    pub fn set_key(&self, set: usize, k: usize) -> Result<WatermarkKey> {
        let base = if set == 0 {
            self.key_seed
        } else {
            derive_seed(self.key_seed, "key-set", set as u64)
        };
        let seed = if k == 0 {
            base
        } else {
            derive_seed(base, "mix-key", k as u64)
        };
        let key = WatermarkKey::generate(self.scheme(), seed);
        match self.amplitude {
            Some(a) => key.with_amplitude(a),
            None => Ok(key),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        let scheme = self.scheme();
        if (self.experiment == Experiment::AudioSweep) != scheme.is_audio() {
            return bad(format!(
                "experiment {} cannot run on scheme {scheme}",
                self.experiment
            ));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return bad("n_list must be nonempty with n >= 1".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n_list must be strictly ascending, got {}", join(&self.n_list)));
        }
        let k_list = self.k_list();
        if k_list.is_empty() || k_list[0] == 0 || k_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("k_list must be strictly ascending with K >= 1, got {}", join(&k_list)));
        }
        if self.key_sets == 0 {
            return bad("key_sets must be >= 1".into());
        }
        if self.eval_count < MIN_EVAL_COUNT {
            return bad(format!("eval_count must be >= {MIN_EVAL_COUNT}, got {}", self.eval_count));
        }
        if self.modes.is_empty() {
            return bad("at least one extraction mode is required".into());
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return bad(format!("strength must be finite and >= 0, got {}", self.strength));
        }
        if !(self.fpr > 0.0 && self.fpr < 1.0) {
            return bad(format!("fpr must lie in (0, 1), got {}", self.fpr));
        }
        if !scheme.is_audio() && (!matches!(self.channels, 1 | 3) || self.height == 0 || self.width == 0) {
            return bad(format!(
                "invalid image shape {}x{}x{}",
                self.height, self.width, self.channels
            ));
        }
        // Surfaces amplitude and shape incompatibilities as config errors.
        crate::watermark::Watermarker::new(&self.base_key()?, self.shape())?;
        Ok(())
    }

    /// Stable `key = value` rendering of every field except the output path.
    pub fn canonical(&self) -> String {
        let mut lines = vec![
            format!("experiment = {}", self.experiment),
            format!("scheme = {}", self.scheme()),
            format!(
                "mode = {}",
                self.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
            ),
            format!("n_list = {}", join(&self.n_list)),
            format!("k_list = {}", join(&self.k_list())),
            format!("key_sets = {}", self.key_sets),
            format!("eval_count = {}", self.eval_count),
            format!("seed = {}", self.seed),
            format!("key_seed = {}", self.key_seed),
            format!("strength = {}", self.strength),
            format!("fpr = {}", self.fpr),
            format!("height = {}", self.height),
            format!("width = {}", self.width),
            format!("channels = {}", self.channels),
        ];
        if let Some(a) = self.amplitude {
            lines.push(format!("alpha = {a}"));
        }
        if let Some(d) = &self.data_dir {
            lines.push(format!("data_dir = {}", d.display()));
        }
        lines.join("\n") + "\n"
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_canonical_form() {
        let mut spec = ExperimentSpec::new(Experiment::MixingSweep);
        spec.set("scheme", "dct-barcode").unwrap();
        spec.set("n-list", "5, 50").unwrap();
        spec.set("mode", "graybox").unwrap();
        spec.set("alpha", "0.01").unwrap();
        assert_eq!(spec.k_list(), vec![1, 2, 3, 4, 5, 6]);
        spec.validate().unwrap();

        let mut back = ExperimentSpec::default();
        for (k, v) in parse_config(&spec.canonical()).unwrap() {
            back.set(&k, &v).unwrap();
        }
        back.out_dir = spec.out_dir.clone();
        assert_eq!(back.canonical(), spec.canonical());
        assert_eq!(back.hash(), spec.hash());
        assert_eq!(spec.hash().len(), 16);
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        let mut spec = ExperimentSpec::default();
        assert!(spec.set("colour", "red").unwrap_err().is_config());
        assert!(spec.set("n_list", "5,x").unwrap_err().is_config());
        for (k, v) in [
            ("n_list", "10,5"),
            ("eval_count", "19"),
            ("fpr", "0"),
            ("scheme", "audio-spread"),
            ("height", "32"),
        ] {
            let mut s = ExperimentSpec::default();
            s.set(k, v).unwrap();
            assert!(s.validate().unwrap_err().is_config(), "{k} = {v}");
        }
        assert!(parse_config("a = 1\nbroken\n").unwrap_err().is_config());
        let pairs = parse_config("# comment\n\nseed = 3 # trailing\n").unwrap();
        assert_eq!(pairs, vec![("seed".to_string(), "3".to_string())]);
    }

    #[test]
    fn audio_experiment_defaults_to_audio_scheme() {
        let spec = ExperimentSpec::new(Experiment::AudioSweep);
        assert_eq!(spec.scheme(), Scheme::AudioSpread);
        assert_eq!(spec.shape(), MediaShape::audio(32_000));
        spec.validate().unwrap();
    }

    #[test]
    fn mixing_keys_are_distinct() {
        let spec = ExperimentSpec::default();
        let k0 = spec.key(0).unwrap();
        let k1 = spec.key(1).unwrap();
        assert_eq!(k0.seed(), 42);
        assert_ne!(k0.seed(), k1.seed());
    }
}
