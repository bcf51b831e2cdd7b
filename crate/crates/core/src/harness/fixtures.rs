//! Recorded empirical constants with the command that produced them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bumped whenever a suite's generator or evaluation changes in a way that
/// invalidates recorded constants.
pub const CODE_VERSION: &str = "1";

pub const FIXTURES_ENV: &str = "MLLAB_FIXTURES";

/// Whether a recorded constant bounds future observations from above or below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub id: String,
    pub value: f64,
    pub bound: Bound,
    pub command: String,
    pub hash: String,
}

/// SHA-256 over everything that determines what a constant means, excluding
/// the seed and trial count that only sample it.
pub fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(CODE_VERSION.as_bytes());
    for part in parts {
        h.update([0u8]);
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn default_path() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(p) => PathBuf::from(p),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("constants.json"),
    }
}

/// The fixture file: a JSON list of records sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixtureStore {
    fixtures: Vec<Fixture>,
}

impl FixtureStore {
    pub fn load(path: &Path) -> Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(source) => {
                return Err(Error::Io {
                    path: path.to_path_buf(),
                    source,
                })
            }
        };
        let fixtures: Vec<Fixture> =
            serde_json::from_str(&text).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Ok(Self { fixtures })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut text = serde_json::to_string_pretty(&self.fixtures).expect("fixtures serialize");
        text.push('\n');
        std::fs::write(path, text).map_err(io)
    }

    pub fn get(&self, id: &str) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| f.id == id)
    }

    pub fn insert(&mut self, fixture: Fixture) {
        self.fixtures.retain(|f| f.id != fixture.id);
        self.fixtures.push(fixture);
        self.fixtures.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fixture> {
        self.fixtures.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_separates_parts() {
        assert_ne!(content_hash(&["ab", "c"]), content_hash(&["a", "bc"]));
        assert_eq!(content_hash(&["x"]).len(), 64);
    }

    #[test]
    fn store_round_trip() {
        let dir = std::env::temp_dir().join(format!("mllab-fixtures-{}", std::process::id()));
        let path = dir.join("c.json");
        let mut store = FixtureStore::default();
        for id in ["b", "a", "b"] {
            store.insert(Fixture {
                id: id.into(),
                value: 1.5,
                bound: Bound::Upper,
                command: "cmd".into(),
                hash: content_hash(&[id]),
            });
        }
        store.save(&path).unwrap();
        let back = FixtureStore::load(&path).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.iter().map(|f| f.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert!(FixtureStore::load(&dir.join("missing.json")).unwrap().get("a").is_none());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
