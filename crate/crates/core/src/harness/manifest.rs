use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::synth::CorpusTag;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// Clean original of an extraction image.
    Cover,
    /// Watermarked extraction image; shares its id with its cover.
    Watermarked,
    /// Held-out image used only for scoring.
    Eval,
    /// Member of the unrelated corpus used by blackbox extraction.
    CleanCorpus,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Cover => "cover",
            Role::Watermarked => "watermarked",
            Role::Eval => "eval",
            Role::CleanCorpus => "clean-corpus",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Role::Cover, Role::Watermarked, Role::Eval, Role::CleanCorpus]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Malformed {
                what: "manifest",
                reason: format!("unknown role `{s}`"),
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRecord {
    /// Pairing id: a cover and its watermarked version share it.
    pub id: String,
    /// Path relative to the dataset root; empty for in-memory media.
    pub file: String,
    pub role: Role,
    pub corpus: CorpusTag,
    pub index: u64,
    /// Key that watermarked this item, empty for clean media.
    pub key_id: String,
    /// `seed/purpose/index` chain the item was generated from.
    pub lineage: String,
    pub clamp_fraction: f64,
}

impl ManifestRecord {
    pub fn new(role: Role, corpus: CorpusTag, index: u64, seed: u64) -> Self {
        ManifestRecord {
            id: format!("{corpus}-{index:06}"),
            file: String::new(),
            role,
            corpus,
            index,
            key_id: String::new(),
            lineage: format!("{seed}/{corpus}/{index}"),
            clamp_fraction: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

/// Summary of a successful [`Manifest::audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestAudit {
    pub extraction_pairs: usize,
    pub eval: usize,
    pub clean_corpus: usize,
    pub max_clamp_fraction: f64,
    pub pairing_checksum: String,
}

const HEADER: [&str; 8] = [
    "id",
    "file",
    "role",
    "corpus",
    "index",
    "key_id",
    "lineage",
    "clamp_fraction",
];

impl Manifest {
    pub fn push(&mut self, record: ManifestRecord) {
        self.records.push(record);
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(move |r| r.role == role)
    }

    /// SHA-256 over the ordered ids of watermarked extraction items; equal
    /// checksums mean graybox pairs were consumed in the same order.
    pub fn pairing_checksum(&self) -> String {
        let mut h = Sha256::new();
        for r in self.with_role(Role::Watermarked) {
            h.update(r.id.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks eval/extraction disjointness, graybox pairing and corpus tags.
    pub fn audit(&self) -> Result<ManifestAudit> {
        let fail = |reason: String| Error::Malformed {
            what: "manifest",
            reason,
        };
        let ids = |role| self.with_role(role).map(|r| r.id.as_str()).collect::<HashSet<_>>();
        let covers = ids(Role::Cover);
        let marked = ids(Role::Watermarked);
        let eval = ids(Role::Eval);
        if let Some(id) = eval.iter().find(|id| covers.contains(*id) || marked.contains(*id)) {
            return Err(fail(format!("`{id}` is used for both extraction and evaluation")));
        }
        if let Some(id) = marked.iter().find(|id| !covers.contains(*id)) {
            return Err(fail(format!("watermarked `{id}` has no paired cover")));
        }
        let mut seen: HashMap<(&str, Role), usize> = HashMap::new();
        for r in &self.records {
            let expected = if r.role == Role::CleanCorpus {
                CorpusTag::Clean
            } else {
                CorpusTag::Cover
            };
            if r.corpus != expected {
                return Err(fail(format!("`{}` ({}) carries corpus tag {}", r.id, r.role, r.corpus)));
            }
            *seen.entry((r.id.as_str(), r.role)).or_default() += 1;
        }
        if let Some(((id, role), _)) = seen.iter().find(|(_, &c)| c > 1) {
            return Err(fail(format!("`{id}` appears twice as {role}")));
        }
        Ok(ManifestAudit {
            extraction_pairs: marked.len(),
            eval: eval.len(),
            clean_corpus: ids(Role::CleanCorpus).len(),
            max_clamp_fraction: self
                .records
                .iter()
                .map(|r| r.clamp_fraction)
                .fold(0.0, f64::max),
            pairing_checksum: self.pairing_checksum(),
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| csv_error(path, e);
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(HEADER).map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.id.as_str(),
                &r.file,
                r.role.name(),
                r.corpus.name(),
                &r.index.to_string(),
                &r.key_id,
                &r.lineage,
                &format!("{:.6}", r.clamp_fraction),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.iter().ne(HEADER) {
            return Err(Error::Malformed {
                what: "manifest",
                reason: format!("unexpected header in {}", path.display()),
            });
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| csv_error(path, e))?;
            let num = |i: usize| {
                row[i].parse::<f64>().map_err(|e| Error::Malformed {
                    what: "manifest",
                    reason: format!("{}: {e}", HEADER[i]),
                })
            };
            records.push(ManifestRecord {
                id: row[0].to_owned(),
                file: row[1].to_owned(),
                role: row[2].parse()?,
                corpus: row[3].parse()?,
                index: num(4)? as u64,
                key_id: row[5].to_owned(),
                lineage: row[6].to_owned(),
                clamp_fraction: num(7)?,
            });
        }
        Ok(Manifest { records })
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        let mut m = Manifest::default();
        for i in 0..3 {
            m.push(ManifestRecord::new(Role::Cover, CorpusTag::Cover, i, 1));
            let mut w = ManifestRecord::new(Role::Watermarked, CorpusTag::Cover, i, 1);
            w.key_id = "k".into();
            m.push(w);
            m.push(ManifestRecord::new(Role::CleanCorpus, CorpusTag::Clean, i, 1));
        }
        m.push(ManifestRecord::new(Role::Eval, CorpusTag::Cover, 10, 1));
        m
    }

    #[test]
    fn audit_accepts_disjoint_manifest() {
        let a = sample().audit().unwrap();
        assert_eq!((a.extraction_pairs, a.eval, a.clean_corpus), (3, 1, 3));
    }

    #[test]
    fn audit_rejects_leaks_and_bad_pairs() {
        let mut m = sample();
        m.push(ManifestRecord::new(Role::Eval, CorpusTag::Cover, 1, 1));
        assert!(m.audit().is_err());

        let mut m = sample();
        m.records.retain(|r| !(r.role == Role::Cover && r.index == 2));
        assert!(m.audit().is_err());

        let mut m = sample();
        m.push(ManifestRecord::new(Role::CleanCorpus, CorpusTag::Cover, 50, 1));
        assert!(m.audit().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        let m = sample();
        m.write_csv(&path).unwrap();
        assert_eq!(Manifest::read_csv(&path).unwrap(), m);
    }
}
