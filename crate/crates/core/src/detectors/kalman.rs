//! Constant-velocity Kalman filter with innovation gating.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use super::{config_error, DetectionResult};
use crate::error::Result;
use crate::geo::LocalPlane;
use crate::model::{LabelSet, Trajectory, TrajectoryPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanParams {
    /// Standard deviation of the white acceleration noise, m/s².
    pub process_noise_sigma: f64,
    /// Standard deviation of position measurements, m.
    pub measurement_noise_sigma: f64,
    /// Mahalanobis distance above which a fix is rejected.
    pub gate: f64,
}

impl KalmanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.process_noise_sigma > 0.0 && self.process_noise_sigma.is_finite()) {
            return Err(config_error("kalman.process_noise_sigma must be > 0"));
        }
        if !(self.measurement_noise_sigma > 0.0 && self.measurement_noise_sigma.is_finite()) {
            return Err(config_error("kalman.measurement_noise_sigma must be > 0"));
        }
        if self.gate.is_nan() || self.gate <= 0.0 {
            return Err(config_error("kalman.gate must be > 0"));
        }
        Ok(())
    }
}

/// State `(x, y, vx, vy)` in a local east/north plane.
pub(crate) struct CvFilter {
    pub state: Vector4<f64>,
    pub cov: Matrix4<f64>,
    accel_var: f64,
    meas: Matrix2<f64>,
}

const H: Matrix2x4<f64> = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);

impl CvFilter {
    /// Starts from two fixes: position of the second, velocity from their
    /// difference.
    pub fn from_two(p0: Vector2<f64>, p1: Vector2<f64>, dt: f64, params: &KalmanParams) -> Self {
        let r2 = params.measurement_noise_sigma.powi(2);
        let v = (p1 - p0) / dt;
        let vv = 2.0 * r2 / (dt * dt);
        Self {
            state: Vector4::new(p1.x, p1.y, v.x, v.y),
            cov: Matrix4::from_diagonal(&Vector4::new(r2, r2, vv, vv)),
            accel_var: params.process_noise_sigma.powi(2),
            meas: Matrix2::from_diagonal_element(r2),
        }
    }

    pub fn predict(&mut self, dt: f64) {
        let mut f = Matrix4::identity();
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let q = self.accel_var;
        let (a, b, c) = (dt.powi(4) / 4.0 * q, dt.powi(3) / 2.0 * q, dt * dt * q);
        #[rustfmt::skip]
        let process = Matrix4::new(
            a,   0.0, b,   0.0,
            0.0, a,   0.0, b,
            b,   0.0, c,   0.0,
            0.0, b,   0.0, c,
        );
        self.state = f * self.state;
        self.cov = f * self.cov * f.transpose() + process;
    }

    /// Innovation and its covariance for a measurement at the predicted state.
    pub fn innovation(&self, z: Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        let y = z - H * self.state;
        let s = H * self.cov * H.transpose() + self.meas;
        (y, s)
    }

    pub fn update(&mut self, y: Vector2<f64>, s_inv: Matrix2<f64>) {
        let gain = self.cov * H.transpose() * s_inv;
        self.state += gain * y;
        // Joseph form keeps the covariance symmetric positive definite
        let i_kh = Matrix4::identity() - gain * H;
        self.cov = i_kh * self.cov * i_kh.transpose() + gain * self.meas * gain.transpose();
    }
}

/// Predicts each fix from the ones before it and flags fixes whose squared
/// Mahalanobis innovation exceeds `gate²`. Flagged fixes do not update the
/// filter; their replacement is the predicted position.
pub fn detect_kalman(traj: &Trajectory, params: &KalmanParams) -> Result<DetectionResult> {
    params.validate()?;
    let pts = traj.points();
    if pts.len() < 3 {
        return Ok(DetectionResult::default());
    }
    let plane = LocalPlane::centred_on(pts);
    let xy: Vec<Vector2<f64>> = pts
        .iter()
        .map(|p| {
            let (x, y) = plane.project_point(p);
            Vector2::new(x, y)
        })
        .collect();

    let mut filter = CvFilter::from_two(xy[0], xy[1], pts[1].t - pts[0].t, params);
    let gate2 = params.gate * params.gate;
    let mut flags = Vec::new();
    let mut replacements = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut last_t = pts[1].t;

    for i in 2..pts.len() {
        filter.predict(pts[i].t - last_t);
        last_t = pts[i].t;
        let (y, s) = filter.innovation(xy[i]);
        let Some(s_inv) = s.try_inverse() else {
            warnings.push(format!("singular innovation covariance at index {i}"));
            continue;
        };
        let d2 = (y.transpose() * s_inv * y)[(0, 0)];
        if d2 > gate2 {
            flags.push(i);
            let (lat, lon) = plane.unproject(filter.state.x, filter.state.y);
            replacements.insert(
                i,
                TrajectoryPoint {
                    lat,
                    lon,
                    ..pts[i].clone()
                },
            );
        } else {
            filter.update(y, s_inv);
        }
    }
    Ok(DetectionResult {
        flags: LabelSet::from(flags),
        replacements,
        elapsed: 0.0,
        warnings,
    })
}
