//! Dataset manifests, triple files, and atomic output.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! ratings = "ratings.tsv"
//! scale = [1.0, 5.0]
//!
//! [[sources]]
//! kind = "user"      # or "item"
//! index = 0
//! path = "user_0.tsv"
//! ```
//!
//! Paths are relative to the manifest's directory. Sources are kept in the
//! order listed, which is the order used when sources are added one by one.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{entity_namespace, RatingDataset, SourceMatrix};
use crate::entity::{Namespace, SourceId, SourceKind};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub kind: SourceKind,
    pub index: usize,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub ratings: PathBuf,
    pub scale: [f64; 2],
    #[serde(default)]
    pub sources: Vec<SourceEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            msg: e.message().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always serializable")
    }
}

/// A dataset loaded from disk: the rating matrix and its sources in
/// manifest order.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub ratings: RatingDataset,
    pub sources: Vec<SourceMatrix>,
}

pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let ratings = SparseMatrix::read_triples(&base.join(&manifest.ratings), Namespace::User, Namespace::Item)?;
    let ratings = RatingDataset::new(ratings, manifest.scale[0], manifest.scale[1])?;
    let sources = manifest
        .sources
        .iter()
        .map(|s| {
            let id = SourceId {
                kind: s.kind,
                index: s.index,
            };
            let m = SparseMatrix::read_triples(&base.join(&s.path), entity_namespace(s.kind), Namespace::Attribute(id))?;
            SourceMatrix::new(id, m)
        })
        .collect::<Result<_>>()?;
    Ok(LoadedDataset { ratings, sources })
}

/// Writes `ratings.tsv`, one file per source, and `manifest.toml` into
/// `dir`. Returns the manifest path.
pub fn write_dataset(dir: &Path, ratings: &RatingDataset, sources: &[SourceMatrix]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(&dir.join("ratings.tsv"), ratings.ratings.to_triples().as_bytes())?;
    let mut entries = Vec::new();
    for s in sources {
        let name = PathBuf::from(format!("{}_{}.tsv", s.id.kind, s.id.index));
        write_atomic(&dir.join(&name), s.matrix.to_triples().as_bytes())?;
        entries.push(SourceEntry {
            kind: s.id.kind,
            index: s.id.index,
            path: name,
        });
    }
    let manifest = Manifest {
        ratings: "ratings.tsv".into(),
        scale: [ratings.scale_lo, ratings.scale_hi],
        sources: entries,
    };
    let path = dir.join("manifest.toml");
    write_atomic(&path, manifest.to_toml().as_bytes())?;
    Ok(path)
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
