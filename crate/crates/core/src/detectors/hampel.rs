//! Hampel identifier: windowed median with a MAD-based spread estimate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{config_error, DetectionResult};
use crate::error::Result;
use crate::geo::{ordered_speed, LocalPlane};
use crate::model::{LabelSet, Trajectory, TrajectoryPoint};

/// Gaussian consistency factor turning a MAD into a standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HampelChannel {
    /// Implied speed arriving at each point.
    Speed,
    /// Local-plane east and north coordinates, filtered independently.
    #[default]
    Position,
    /// Planar distance from the trajectory centroid.
    CentroidDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HampelParams {
    pub window_half: usize,
    pub n_sigmas: f64,
    #[serde(default)]
    pub channel: HampelChannel,
}

impl HampelParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_half < 1 {
            return Err(config_error("hampel.window_half must be >= 1"));
        }
        if self.n_sigmas.is_nan() || self.n_sigmas <= 0.0 {
            return Err(config_error("hampel.n_sigmas must be > 0"));
        }
        Ok(())
    }
}

/// Per-sample output of the identifier on a scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct HampelSignal {
    pub flags: Vec<usize>,
    /// Window median at every index.
    pub medians: Vec<f64>,
    /// Scaled MAD at every index.
    pub sigmas: Vec<f64>,
}

/// Flags index `i` when `|x[i] - m| > n_sigmas * 1.4826 * MAD`, with `m` and
/// MAD taken over the window `[i - k, i + k]` clipped to the signal.
pub fn hampel_identify(signal: &[f64], window_half: usize, n_sigmas: f64) -> HampelSignal {
    let n = signal.len();
    let mut flags = Vec::new();
    let mut medians = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    let mut window = Vec::with_capacity(2 * window_half + 1);
    for i in 0..n {
        let lo = i.saturating_sub(window_half);
        let hi = (i + window_half).min(n - 1);
        window.clear();
        window.extend_from_slice(&signal[lo..=hi]);
        let m = median(&mut window);
        for v in window.iter_mut() {
            *v = (*v - m).abs();
        }
        let sigma = MAD_SCALE * median(&mut window);
        if (signal[i] - m).abs() > n_sigmas * sigma {
            flags.push(i);
        }
        medians.push(m);
        sigmas.push(sigma);
    }
    HampelSignal { flags, medians, sigmas }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Applies the identifier to the configured channel. Flagged points get a
/// replacement carrying the window median: for `position` the flagged axes
/// are moved to their medians, for `centroid_distance` the point is moved
/// radially to the median distance, and for `speed` the median speed is
/// stored in `recorded_speed`.
pub fn detect_hampel(traj: &Trajectory, params: &HampelParams) -> Result<DetectionResult> {
    params.validate()?;
    let pts = traj.points();
    if pts.len() < 3 {
        return Ok(DetectionResult::default());
    }
    let (k, ns) = (params.window_half, params.n_sigmas);
    let mut replacements = BTreeMap::new();
    let flags: LabelSet = match params.channel {
        HampelChannel::Speed => {
            let mut speeds: Vec<f64> = pts.windows(2).map(|w| ordered_speed(&w[0], &w[1])).collect();
            speeds.insert(0, speeds[0]);
            let out = hampel_identify(&speeds, k, ns);
            for &i in &out.flags {
                replacements.insert(
                    i,
                    TrajectoryPoint {
                        recorded_speed: Some(out.medians[i]),
                        ..pts[i].clone()
                    },
                );
            }
            out.flags.into()
        }
        HampelChannel::Position => {
            let plane = LocalPlane::centred_on(pts);
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|p| plane.project_point(p)).unzip();
            let fx = hampel_identify(&xs, k, ns);
            let fy = hampel_identify(&ys, k, ns);
            let flags: LabelSet = fx.flags.iter().chain(&fy.flags).copied().collect();
            for i in &flags {
                let x = if fx.flags.binary_search(&i).is_ok() { fx.medians[i] } else { xs[i] };
                let y = if fy.flags.binary_search(&i).is_ok() { fy.medians[i] } else { ys[i] };
                replacements.insert(i, moved(&pts[i], &plane, x, y));
            }
            flags
        }
        HampelChannel::CentroidDistance => {
            let plane = LocalPlane::centred_on(pts);
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| plane.project_point(p)).collect();
            let dist: Vec<f64> = xy.iter().map(|(x, y)| x.hypot(*y)).collect();
            let out = hampel_identify(&dist, k, ns);
            for &i in &out.flags {
                let (x, y) = xy[i];
                let scale = if dist[i] > 0.0 { out.medians[i] / dist[i] } else { 0.0 };
                replacements.insert(i, moved(&pts[i], &plane, x * scale, y * scale));
            }
            out.flags.into()
        }
    };
    Ok(DetectionResult {
        flags,
        replacements,
        ..DetectionResult::default()
    })
}

fn moved(p: &TrajectoryPoint, plane: &LocalPlane, x: f64, y: f64) -> TrajectoryPoint {
    let (lat, lon) = plane.unproject(x, y);
    TrajectoryPoint {
        lat,
        lon,
        ..p.clone()
    }
}
