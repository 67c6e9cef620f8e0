use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SplitSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    /// CSV location, relative paths resolve against the registry's base directory.
    pub path: PathBuf,
    pub split: [f64; 3],
    #[serde(default)]
    pub frequency: Option<String>,
}

impl DatasetEntry {
    pub fn split_spec(&self) -> Result<SplitSpec> {
        SplitSpec::new(self.split[0], self.split[1], self.split[2])
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    datasets: BTreeMap<String, DatasetEntry>,
}

/// Dataset name to file and split mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRegistry {
    pub base_dir: PathBuf,
    pub entries: BTreeMap<String, DatasetEntry>,
}

impl DatasetRegistry {
    /// The standard benchmark files, expected under `base_dir` with their usual names.
    pub fn builtin(base_dir: impl Into<PathBuf>) -> Self {
        let mut entries = BTreeMap::new();
        let mut add = |name: &str, file: &str, split: SplitSpec, freq: &str| {
            entries.insert(
                name.to_string(),
                DatasetEntry {
                    path: PathBuf::from(file),
                    split: split.ratios,
                    frequency: Some(freq.to_string()),
                },
            );
        };
        add("ETTh1", "ETTh1.csv", SplitSpec::ETT, "1h");
        add("ETTh2", "ETTh2.csv", SplitSpec::ETT, "1h");
        add("ETTm1", "ETTm1.csv", SplitSpec::ETT, "15min");
        add("ETTm2", "ETTm2.csv", SplitSpec::ETT, "15min");
        add("weather", "weather.csv", SplitSpec::DEFAULT, "10min");
        add("electricity", "electricity.csv", SplitSpec::DEFAULT, "1h");
        add("traffic", "traffic.csv", SplitSpec::DEFAULT, "1h");
        DatasetRegistry {
            base_dir: base_dir.into(),
            entries,
        }
    }

    /// Parses a TOML registry of `[datasets.<name>]` tables. Relative paths
    /// resolve against the file's directory.
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>, origin: &Path) -> Result<Self> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| Error::Format {
            path: origin.to_path_buf(),
            msg: e.to_string(),
        })?;
        for (name, entry) in &file.datasets {
            entry
                .split_spec()
                .map_err(|e| Error::config(format!("dataset {name}: {e}")))?;
        }
        Ok(DatasetRegistry {
            base_dir: base_dir.into(),
            entries: file.datasets,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base, path)
    }

    pub fn get(&self, name: &str) -> Result<&DatasetEntry> {
        self.entries.get(name).ok_or_else(|| {
            Error::config(format!(
                "unknown dataset {name:?}; registered: {}",
                self.entries.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn resolve(&self, name: &str) -> Result<PathBuf> {
        Ok(self.base_dir.join(&self.get(name)?.path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_ratios() {
        let r = DatasetRegistry::builtin("/data");
        assert_eq!(r.get("ETTh1").unwrap().split, [0.6, 0.2, 0.2]);
        assert_eq!(r.get("weather").unwrap().split, [0.7, 0.1, 0.2]);
        assert_eq!(
            r.resolve("ETTm1").unwrap(),
            PathBuf::from("/data/ETTm1.csv")
        );
        assert!(matches!(r.get("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn toml_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("datasets.toml");
        fs::write(
            &p,
            "[datasets.sine]\npath = \"sine.csv\"\nsplit = [0.7, 0.1, 0.2]\nfrequency = \"1h\"\n",
        )
        .unwrap();
        let r = DatasetRegistry::load(&p).unwrap();
        assert_eq!(r.resolve("sine").unwrap(), dir.path().join("sine.csv"));

        fs::write(
            &p,
            "[datasets.bad]\npath = \"x.csv\"\nsplit = [0.5, 0.5, 0.5]\n",
        )
        .unwrap();
        assert!(matches!(DatasetRegistry::load(&p), Err(Error::Config(_))));
        fs::write(&p, "[datasets.bad]\npath = 3\n").unwrap();
        assert!(matches!(
            DatasetRegistry::load(&p),
            Err(Error::Format { .. })
        ));
        assert!(DatasetRegistry::load(&dir.path().join("missing.toml"))
            .unwrap_err()
            .is_io());
    }
}
