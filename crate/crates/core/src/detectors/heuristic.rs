use serde::{Deserialize, Serialize};

use super::DetectionResult;
use crate::error::Result;
use crate::geo::fixes;
use crate::model::{LabelSet, SpeedBounds, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedHeuristicParams {
    #[serde(default)]
    pub v_min: f64,
    pub v_max: f64,
}

/// Sequential speed filter. Each point is compared with the last point that
/// was kept; points whose implied speed leaves `[v_min, v_max]` are flagged
/// and never become a predecessor. The first point is always kept.
pub fn detect_speed_heuristic(traj: &Trajectory, params: &SpeedHeuristicParams) -> Result<DetectionResult> {
    let bounds = SpeedBounds::new(params.v_min, params.v_max)?;
    let fixes = fixes(traj.points());
    let mut flags = Vec::new();
    if let Some(first) = fixes.first() {
        let mut last_kept = first;
        for (i, fix) in fixes.iter().enumerate().skip(1) {
            if bounds.contains(last_kept.speed_to(fix)) {
                last_kept = fix;
            } else {
                flags.push(i);
            }
        }
    }
    Ok(DetectionResult::flags(LabelSet::from(flags)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::test_util::line;
    use crate::geo::segment_speed;

    fn params(v_max: f64) -> SpeedHeuristicParams {
        SpeedHeuristicParams { v_min: 0.0, v_max }
    }

    #[test]
    fn flags_fast_spike() {
        let traj = line(&[(0.0, 0.0), (1.0, 10.0), (2.0, 1010.0), (3.0, 30.0), (4.0, 40.0)]);
        let r = detect_speed_heuristic(&traj, &params(50.0)).unwrap();
        assert_eq!(r.flags.as_slice(), &[2]);
    }

    #[test]
    fn in_bounds_track_is_clean() {
        let traj = line(&[(0.0, 0.0), (1.0, 10.0), (2.0, 25.0), (3.0, 30.0)]);
        assert!(detect_speed_heuristic(&traj, &params(20.0)).unwrap().flags.is_empty());
    }

    #[test]
    fn consecutive_outliers_against_step_oracle() {
        let traj = line(&[
            (0.0, 0.0),
            (1.0, 10.0),
            (2.0, 5000.0),
            (3.0, 5010.0),
            (4.0, 5020.0),
            (5.0, 50.0),
            (6.0, 60.0),
        ]);
        let r = detect_speed_heuristic(&traj, &params(100.0)).unwrap();
        assert_eq!(r.flags.as_slice(), &[2, 3, 4]);

        // step-through oracle on the public speed function
        let pts = traj.points();
        let mut last = 0;
        let mut expected = vec![];
        for i in 1..pts.len() {
            let v = segment_speed(&pts[last], &pts[i]).unwrap();
            if v <= 100.0 {
                last = i;
            } else {
                expected.push(i);
            }
        }
        assert_eq!(r.flags.as_slice(), expected.as_slice());
    }

    #[test]
    fn minimum_speed_is_enforced() {
        let traj = line(&[(0.0, 0.0), (1.0, 10.0), (2.0, 10.5), (3.0, 30.0)]);
        let r = detect_speed_heuristic(&traj, &SpeedHeuristicParams { v_min: 5.0, v_max: 50.0 }).unwrap();
        assert_eq!(r.flags.as_slice(), &[2]);
    }

    #[test]
    fn short_tracks() {
        assert!(detect_speed_heuristic(&line(&[(0.0, 0.0)]), &params(1.0)).unwrap().flags.is_empty());
        assert!(detect_speed_heuristic(&line(&[]), &params(1.0)).unwrap().flags.is_empty());
    }
}
