//! Versioned dataset manifests: every corpus image is listed with its label,
//! split, and full provenance so experiments are reproducible and leakage is
//! checkable.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Supported manifest format version.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Manifest(format!("unknown split {other:?}"))),
        }
    }
}

/// One corpus image. `entry_id` is unique per entry; `image_id` names the
/// source content and is shared by all variants derived from it, which is
/// what the leakage check keys on.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub entry_id: String,
    pub image_id: String,
    pub image_path: String,
    pub label: String,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codec_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_codec_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postprocessing: Option<String>,
}

impl ManifestEntry {
    /// Human-readable evaluation condition: label plus whichever provenance
    /// tags are set. Entries sharing a condition string form one report cell.
    pub fn condition(&self) -> String {
        let mut parts = vec![self.label.clone()];
        if let Some(c) = &self.codec_id {
            parts.push(format!("codec={c}"));
        }
        if let Some(s) = self.strength {
            parts.push(format!("s={s}"));
        }
        if let Some(p) = self.prior_strength {
            parts.push(format!("b0={p}"));
        }
        if let Some(g) = &self.generator_id {
            parts.push(format!("gen={g}"));
        }
        if let Some(p) = &self.postprocessing {
            parts.push(format!("post={p}"));
        }
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub labels: Vec<String>,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    root: PathBuf,
}

impl DatasetManifest {
    pub fn new(root: &Path, labels: Vec<String>, entries: Vec<ManifestEntry>) -> Self {
        DatasetManifest {
            version: MANIFEST_VERSION,
            labels,
            entries,
            root: root.to_path_buf(),
        }
    }

    /// Directory that relative image paths resolve against.
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.image_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn entries_in(&self, split: Split) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.split == split).collect()
    }

    pub fn require_split(&self, split: Split) -> Result<Vec<&ManifestEntry>> {
        let entries = self.entries_in(split);
        if entries.is_empty() {
            return Err(Error::EmptySplit {
                split: split.as_str().to_string(),
            });
        }
        Ok(entries)
    }

    /// Structural checks: version, label set, unique entry ids, no image_id
    /// straddling splits, and all referenced files present on disk.
    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!(
                "manifest version {} unsupported (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        if self.entries.is_empty() {
            return Err(Error::Manifest("manifest has no entries".into()));
        }
        if self.labels.is_empty() {
            return Err(Error::Manifest("manifest declares no labels".into()));
        }
        let mut seen_entry = HashMap::new();
        let mut split_of = HashMap::new();
        for e in &self.entries {
            if !self.labels.contains(&e.label) {
                return Err(Error::Manifest(format!(
                    "entry {} has undeclared label {:?}",
                    e.entry_id, e.label
                )));
            }
            if seen_entry.insert(&e.entry_id, ()).is_some() {
                return Err(Error::Manifest(format!(
                    "duplicate entry_id {:?}",
                    e.entry_id
                )));
            }
            match split_of.insert(&e.image_id, e.split) {
                Some(prev) if prev != e.split => {
                    return Err(Error::SplitLeakage {
                        id: e.image_id.clone(),
                    });
                }
                _ => {}
            }
            let path = self.resolve(e);
            if !path.is_file() {
                return Err(Error::MissingFile(path.display().to_string()));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Load and validate; relative image paths resolve against the manifest's
    /// parent directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::MissingFile(format!("{}: {e}", path.display())))?;
        let mut manifest: DatasetManifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Manifest(format!("unreadable manifest: {e}")))?;
        manifest.root = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        manifest.validate()?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) {
        std::fs::write(dir.join(name), b"x").unwrap();
    }

    fn entry(id: &str, image: &str, path: &str, label: &str, split: Split) -> ManifestEntry {
        ManifestEntry {
            entry_id: id.into(),
            image_id: image.into(),
            image_path: path.into(),
            label: label.into(),
            split,
            codec_id: None,
            strength: None,
            prior_codec_id: None,
            prior_strength: None,
            generator_id: None,
            postprocessing: None,
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a.png");
        touch(dir.path(), "b.png");
        let m = DatasetManifest::new(
            dir.path(),
            vec!["original".into(), "compressed".into()],
            vec![
                entry("a", "img0", "a.png", "original", Split::Train),
                entry("b", "img1", "b.png", "compressed", Split::Test),
            ],
        );
        let path = dir.path().join("manifest.json");
        m.save(&path).unwrap();
        let loaded = DatasetManifest::load(&path).unwrap();
        assert_eq!(loaded.entries, m.entries);
        assert_eq!(loaded.root(), dir.path());
    }

    #[test]
    fn split_leakage_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a.png");
        touch(dir.path(), "b.png");
        let m = DatasetManifest::new(
            dir.path(),
            vec!["original".into()],
            vec![
                entry("a", "img0", "a.png", "original", Split::Train),
                entry("b", "img0", "b.png", "original", Split::Test),
            ],
        );
        assert!(matches!(m.validate(), Err(Error::SplitLeakage { id }) if id == "img0"));
    }

    #[test]
    fn missing_file_and_bad_label_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a.png");
        let missing = DatasetManifest::new(
            dir.path(),
            vec!["original".into()],
            vec![entry("a", "img0", "gone.png", "original", Split::Train)],
        );
        assert!(matches!(missing.validate(), Err(Error::MissingFile(_))));
        let bad_label = DatasetManifest::new(
            dir.path(),
            vec!["original".into()],
            vec![entry("a", "img0", "a.png", "compressed", Split::Train)],
        );
        assert!(matches!(bad_label.validate(), Err(Error::Manifest(_))));
    }

    #[test]
    fn unsupported_version_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a.png");
        let mut m = DatasetManifest::new(
            dir.path(),
            vec!["original".into()],
            vec![entry("a", "img0", "a.png", "original", Split::Train)],
        );
        m.version = 2;
        assert!(matches!(m.validate(), Err(Error::Manifest(_))));
    }

    #[test]
    fn empty_split_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "a.png");
        let m = DatasetManifest::new(
            dir.path(),
            vec!["original".into()],
            vec![entry("a", "img0", "a.png", "original", Split::Train)],
        );
        assert!(m.require_split(Split::Train).is_ok());
        assert!(matches!(
            m.require_split(Split::Test),
            Err(Error::EmptySplit { split }) if split == "test"
        ));
    }

    #[test]
    fn condition_string_carries_provenance() {
        let mut e = entry("a", "img0", "a.png", "double", Split::Test);
        e.codec_id = Some("baseline_dct".into());
        e.strength = Some(80.0);
        e.prior_strength = Some(30.0);
        e.postprocessing = Some("jpg90".into());
        assert_eq!(e.condition(), "double codec=baseline_dct s=80 b0=30 post=jpg90");
    }
}
