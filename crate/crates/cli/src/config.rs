//! Run configuration file.
//!
//! ```toml
//! out = "results"
//! jobs = 4
//!
//! [groundtruth]
//! speed_threshold = 10.0      # m/s
//! heading_threshold = 45.0    # degrees
//!
//! [synth]
//! trajectories = 100
//! n_points = 1000
//!
//! [[dataset]]
//! name = "ais"
//! path = "ais.csv"            # relative to this file
//! mapping = "ais.mapping.toml" # file, or an inline table
//! truth = "ais.labels"        # optional; ground truth is computed otherwise
//!
//! [[detector]]
//! name = "hampel-pos"
//! detector = "hampel"
//! hampel.window_half = 5
//! hampel.n_sigmas = 3.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trajclean::detectors::DetectorConfig;
use trajclean::eval::NamedDetector;
use trajclean::groundtruth::GroundTruthConfig;
use trajclean::ingest::ColumnMapping;
use trajclean::synth::SynthSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSection {
    pub trajectories: usize,
    #[serde(flatten)]
    pub spec: SynthSpec,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            trajectories: 1,
            spec: SynthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    pub mapping: ColumnMapping,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub groundtruth: GroundTruthConfig,
    pub synth: SynthSection,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(skip)]
    pub detectors: Vec<NamedDetector>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: None,
            jobs: 1,
            groundtruth: GroundTruthConfig::default(),
            synth: SynthSection::default(),
            datasets: Vec::new(),
            detectors: Vec::new(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    out: Option<PathBuf>,
    jobs: Option<usize>,
    #[serde(default)]
    groundtruth: Option<GroundTruthConfig>,
    #[serde(default)]
    synth: Option<SynthSection>,
    #[serde(default)]
    dataset: Vec<RawDataset>,
    #[serde(default)]
    detector: Vec<toml::Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: Option<String>,
    path: PathBuf,
    mapping: Option<toml::Value>,
    truth: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&src, base)
    }

    /// Parses a config, resolving relative paths against `base`.
    pub fn parse(src: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(src).map_err(|e| CliError::Config(e.message().to_owned()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let groundtruth = raw.groundtruth.unwrap_or_default();
        groundtruth.validate()?;

        let mut datasets = Vec::new();
        for d in raw.dataset {
            let mapping = match d.mapping {
                None => ColumnMapping::default(),
                Some(toml::Value::String(p)) => ColumnMapping::load(resolve(p.into()))?,
                Some(toml::Value::Table(t)) => ColumnMapping::from_toml_table(&t)?,
                Some(_) => {
                    return Err(CliError::Config(
                        "dataset mapping must be a file path or a table".into(),
                    ))
                }
            };
            let name = d.name.unwrap_or_else(|| stem(&d.path));
            datasets.push(DatasetEntry {
                name,
                path: resolve(d.path),
                mapping,
                truth: d.truth.map(resolve),
            });
        }

        let mut detectors = Vec::new();
        for entry in &raw.detector {
            let config = DetectorConfig::from_toml_table(entry)?;
            let name = match entry.get("name") {
                Some(toml::Value::String(s)) => s.clone(),
                Some(_) => return Err(CliError::Config("detector `name` must be a string".into())),
                None => config.method_name().replace('/', "-"),
            };
            detectors.push(NamedDetector { name, config });
        }

        let cfg = Self {
            out: raw.out.map(resolve),
            jobs: raw.jobs.unwrap_or(1),
            groundtruth,
            synth: raw.synth.unwrap_or_default(),
            datasets,
            detectors,
        };
        cfg.check_names()?;
        Ok(cfg)
    }

    /// Dataset and detector names become file names; keep them plain and unique.
    pub fn check_names(&self) -> Result<()> {
        let plain = |s: &str| {
            !s.is_empty()
                && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
                && !s.starts_with('.')
        };
        let mut seen = std::collections::BTreeSet::new();
        for name in self.datasets.iter().map(|d| &d.name) {
            if !plain(name) || !seen.insert(name) {
                return Err(CliError::Config(format!("bad or duplicate dataset name {name:?}")));
            }
        }
        seen.clear();
        for name in self.detectors.iter().map(|d| &d.name) {
            if !plain(name) || name == "truth" || !seen.insert(name) {
                return Err(CliError::Config(format!("bad or duplicate detector name {name:?}")));
            }
        }
        Ok(())
    }

    /// Config echo for the run manifest, detectors in their file form.
    pub fn to_manifest_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let detectors: Vec<serde_json::Value> = self
            .detectors
            .iter()
            .map(|d| {
                let mut t = d.config.to_toml_table();
                t.insert("name".into(), toml::Value::String(d.name.clone()));
                serde_json::to_value(t).expect("toml tables serialize")
            })
            .collect();
        v["detector"] = serde_json::Value::Array(detectors);
        v
    }
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use trajclean::detectors::SpeedBoundedVariant;

    #[test]
    fn full_config() {
        let cfg = RunConfig::parse(
            r#"
            jobs = 3
            [groundtruth]
            tS = 5.0
            tH = 30.0
            [synth]
            trajectories = 7
            n_points = 50
            seed = 9
            [[dataset]]
            name = "a"
            path = "a.csv"
            mapping = { id = "MMSI", t = "ts", lat = "LAT", lon = "LON", kind = "ais" }
            [[detector]]
            detector = "speed_bounded"
            speed_bounded.v_max = 40.0
            speed_bounded.variant = "optimal"
            [[detector]]
            name = "lof3"
            detector = "lof"
            lof = { k = 3, threshold = 1.5 }
            "#,
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.jobs, 3);
        assert_eq!(cfg.groundtruth.speed_threshold, 5.0);
        assert_eq!(cfg.synth.trajectories, 7);
        assert_eq!(cfg.synth.spec.n_points, 50);
        assert_eq!(cfg.synth.spec.base_speed, 10.0);
        assert_eq!(cfg.datasets[0].path, PathBuf::from("/data/a.csv"));
        assert_eq!(cfg.detectors[0].name, "speed_bounded-optimal");
        match &cfg.detectors[0].config {
            DetectorConfig::SpeedBounded(p) => assert_eq!(p.variant, SpeedBoundedVariant::Optimal),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.detectors[1].name, "lof3");
        let manifest = cfg.to_manifest_json();
        assert_eq!(manifest["detector"][1]["lof"]["k"], 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new(".");
        for src in [
            "bogus = 1",
            "[groundtruth]\nspeed_threshold = -1\nheading_threshold = 10",
            "[[detector]]\ndetector = 'hampel'\nhampel.window_half = 0\nhampel.n_sigmas = 3",
            "[[detector]]\nname = 'a/b'\ndetector = 'lof'\nlof = { k = 3, threshold = 2 }",
            "[[dataset]]\npath = 'x.csv'\n[[dataset]]\npath = 'x.csv'",
        ] {
            assert!(matches!(RunConfig::parse(src, base), Err(CliError::Config(_))), "{src}");
        }
    }
}
