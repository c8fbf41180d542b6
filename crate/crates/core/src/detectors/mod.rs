//! Point-level outlier detectors behind one interface.
//!
//! Every detector takes a [`Trajectory`] and a [`DetectorConfig`] and returns
//! a [`DetectionResult`]. Detectors are pure functions of their inputs; only
//! the elapsed time varies between runs.

mod hampel;
mod heuristic;
mod kalman;
mod lof;
mod speed_bounded;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelSet, SpeedBounds, Trajectory, TrajectoryPoint};

pub use hampel::{detect_hampel, hampel_identify, HampelChannel, HampelParams, HampelSignal};
pub use heuristic::{detect_speed_heuristic, SpeedHeuristicParams};
pub use kalman::{detect_kalman, KalmanParams};
pub use lof::{detect_lof, lof_scores, LofParams};
pub use speed_bounded::{
    detect_speed_bounded, kept_indices, SpeedBoundedParams, SpeedBoundedVariant,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum DetectorConfig {
    SpeedHeuristic(SpeedHeuristicParams),
    Hampel(HampelParams),
    Kalman(KalmanParams),
    Lof(LofParams),
    SpeedBounded(SpeedBoundedParams),
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            DetectorConfig::SpeedHeuristic(p) => SpeedBounds::new(p.v_min, p.v_max).map(|_| ()),
            DetectorConfig::Hampel(p) => p.validate(),
            DetectorConfig::Kalman(p) => p.validate(),
            DetectorConfig::Lof(p) => p.validate(),
            DetectorConfig::SpeedBounded(p) => p.validate(),
        }
    }

    /// Value of the `detector` key: the parameter table's name.
    pub fn kind(&self) -> &'static str {
        match self {
            DetectorConfig::SpeedHeuristic(_) => "speed_heuristic",
            DetectorConfig::Hampel(_) => "hampel",
            DetectorConfig::Kalman(_) => "kalman",
            DetectorConfig::Lof(_) => "lof",
            DetectorConfig::SpeedBounded(_) => "speed_bounded",
        }
    }

    /// Reads a config-file entry such as
    ///
    /// ```toml
    /// detector = "hampel"
    /// hampel.window_half = 5
    /// hampel.n_sigmas = 3.0
    /// ```
    ///
    /// Parameters may also sit directly beside `detector`. Keys `name` and
    /// `detector` are reserved.
    pub fn from_toml_table(entry: &toml::Table) -> Result<Self> {
        let kind = entry
            .get("detector")
            .and_then(toml::Value::as_str)
            .ok_or_else(|| config_error("detector entry needs a string `detector` key"))?;
        let mut params = match entry.get(kind) {
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => return Err(config_error(format!("`{kind}` must be a table of parameters"))),
            None => entry
                .iter()
                .filter(|(k, _)| k.as_str() != "name" && k.as_str() != "detector")
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        };
        params.insert("detector".into(), toml::Value::String(kind.to_owned()));
        let cfg: DetectorConfig = toml::Value::Table(params)
            .try_into()
            .map_err(|e: toml::de::Error| config_error(format!("detector `{kind}`: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`from_toml_table`](Self::from_toml_table), nested form.
    pub fn to_toml_table(&self) -> toml::Table {
        let mut flat = toml::Table::try_from(self).expect("detector configs serialize to TOML");
        flat.remove("detector");
        let mut entry = toml::Table::new();
        entry.insert("detector".into(), toml::Value::String(self.kind().into()));
        entry.insert(self.kind().into(), toml::Value::Table(flat));
        entry
    }

    /// Short stable name of the method, e.g. `hampel` or `speed_bounded/optimal`.
    pub fn method_name(&self) -> String {
        match self {
            DetectorConfig::SpeedHeuristic(_) => "speed_heuristic".into(),
            DetectorConfig::Hampel(_) => "hampel".into(),
            DetectorConfig::Kalman(_) => "kalman".into(),
            DetectorConfig::Lof(_) => "lof".into(),
            DetectorConfig::SpeedBounded(p) => format!("speed_bounded/{}", p.variant.as_str()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub flags: LabelSet,
    /// Corrected points for flagged indices (Hampel and Kalman only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub replacements: BTreeMap<usize, TrajectoryPoint>,
    /// Wall-clock seconds spent in the detector.
    pub elapsed: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DetectionResult {
    pub(crate) fn flags(flags: LabelSet) -> Self {
        Self {
            flags,
            ..Self::default()
        }
    }
}

/// Runs the configured detector on one trajectory and times it.
pub fn detect(traj: &Trajectory, cfg: &DetectorConfig) -> Result<DetectionResult> {
    cfg.validate()?;
    let start = clock::now();
    let mut result = match cfg {
        DetectorConfig::SpeedHeuristic(p) => detect_speed_heuristic(traj, p)?,
        DetectorConfig::Hampel(p) => detect_hampel(traj, p)?,
        DetectorConfig::Kalman(p) => detect_kalman(traj, p)?,
        DetectorConfig::Lof(p) => detect_lof(traj, p)?,
        DetectorConfig::SpeedBounded(p) => detect_speed_bounded(traj, p)?,
    };
    result.elapsed = clock::since(start);
    debug_assert!(result.flags.max().is_none_or(|m| m < traj.len()));
    Ok(result)
}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[cfg(not(target_arch = "wasm32"))]
mod clock {
    use std::time::Instant;

    pub fn now() -> Instant {
        Instant::now()
    }

    pub fn since(start: Instant) -> f64 {
        start.elapsed().as_secs_f64()
    }
}

// std::time::Instant is unavailable on wasm32-unknown-unknown.
#[cfg(target_arch = "wasm32")]
mod clock {
    pub fn now() {}

    pub fn since(_: ()) -> f64 {
        0.0
    }
}
