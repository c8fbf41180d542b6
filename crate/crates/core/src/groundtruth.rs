//! Ground truth by cross-checking computed kinematics against the speed and
//! course reported by the object's own sensors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{circular_diff, initial_bearing, ordered_speed};
use crate::labels::Labels;
use crate::model::{LabelSet, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundTruthConfig {
    /// Speed disagreement threshold, m/s.
    #[serde(alias = "tS")]
    pub speed_threshold: f64,
    /// Heading disagreement threshold, degrees.
    #[serde(alias = "tH")]
    pub heading_threshold: f64,
}

impl Default for GroundTruthConfig {
    /// Repository defaults, not calibrated values.
    fn default() -> Self {
        Self {
            speed_threshold: 10.0,
            heading_threshold: 45.0,
        }
    }
}

impl GroundTruthConfig {
    pub fn new(speed_threshold: f64, heading_threshold: f64) -> Result<Self> {
        let cfg = Self {
            speed_threshold,
            heading_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.speed_threshold.is_nan() || self.speed_threshold <= 0.0 {
            return Err(Error::Config(format!(
                "speed threshold must be > 0, got {}",
                self.speed_threshold
            )));
        }
        if !(self.heading_threshold > 0.0 && self.heading_threshold <= 180.0) {
            return Err(Error::Config(format!(
                "heading threshold must be in (0, 180], got {}",
                self.heading_threshold
            )));
        }
        Ok(())
    }
}

/// Flags point `i` when the speed or bearing computed from `i` to `i + 1`
/// disagrees with the values recorded at `i`. Only channels present on the
/// point are tested, and the bearing channel is skipped when both fixes share
/// a position. The final point has no successor and is never flagged.
pub fn label_trajectory(traj: &Trajectory, cfg: &GroundTruthConfig) -> LabelSet {
    let pts = traj.points();
    let mut flags = LabelSet::new();
    for (i, pair) in pts.windows(2).enumerate() {
        let (p, next) = (&pair[0], &pair[1]);
        let speed_bad = p
            .recorded_speed
            .is_some_and(|rec| (ordered_speed(p, next) - rec).abs() >= cfg.speed_threshold);
        let bearing_bad = !speed_bad
            && p.recorded_bearing.is_some_and(|rec| {
                let b = initial_bearing(p, next);
                !b.degenerate && circular_diff(b.degrees, rec) >= cfg.heading_threshold
            });
        if speed_bad || bearing_bad {
            flags.insert(i);
        }
    }
    flags
}

/// Labels every trajectory; output keyed (and ordered) by object id.
pub fn label_outliers(trajectories: &[Trajectory], cfg: &GroundTruthConfig) -> Labels {
    trajectories
        .iter()
        .map(|t| (t.object_id().to_owned(), label_trajectory(t, cfg)))
        .collect()
}
