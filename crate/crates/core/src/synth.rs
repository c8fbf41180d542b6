//! Synthetic trajectories with labelled, injected outliers.
//!
//! Randomness comes from ChaCha8 seeded with the spec's seed; trajectory `i`
//! of a dataset reads ChaCha stream `i`. Gaussian jitter uses the Box-Muller
//! transform over `1 - u` with `u` a 53-bit uniform in `[0, 1)`.

use std::io::Write;

use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LocalPlane;
use crate::model::{LabelSet, Trajectory, TrajectoryPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_points: usize,
    /// m/s
    pub base_speed: f64,
    /// Degrees clockwise from north.
    pub base_bearing: f64,
    /// Seconds between fixes.
    pub sample_interval: f64,
    /// Per-axis standard deviation of position noise, meters.
    pub position_noise_sigma: f64,
    pub outlier_rate: f64,
    /// Meters.
    pub outlier_displacement: f64,
    pub seed: u64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub start_time: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_points: 1000,
            base_speed: 10.0,
            base_bearing: 45.0,
            sample_interval: 1.0,
            position_noise_sigma: 1.0,
            outlier_rate: 0.05,
            outlier_displacement: 1000.0,
            seed: 42,
            origin_lat: 55.0,
            origin_lon: 12.0,
            start_time: 1_700_000_000.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_points < 2 {
            return fail(format!("n_points must be >= 2, got {}", self.n_points));
        }
        if !(0.0..=1.0).contains(&self.outlier_rate) {
            return fail(format!("outlier_rate {} outside [0, 1]", self.outlier_rate));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return fail(format!("sample_interval must be > 0, got {}", self.sample_interval));
        }
        if !(self.outlier_displacement >= 0.0 && self.outlier_displacement.is_finite()) {
            return fail(format!(
                "outlier_displacement must be >= 0, got {}",
                self.outlier_displacement
            ));
        }
        if !(self.base_speed >= 0.0 && self.base_speed.is_finite()) {
            return fail(format!("base_speed must be >= 0, got {}", self.base_speed));
        }
        if !(self.position_noise_sigma >= 0.0 && self.position_noise_sigma.is_finite()) {
            return fail(format!(
                "position_noise_sigma must be >= 0, got {}",
                self.position_noise_sigma
            ));
        }
        if !self.base_bearing.is_finite()
            || !(-90.0..=90.0).contains(&self.origin_lat)
            || !self.origin_lon.is_finite()
            || !self.start_time.is_finite()
        {
            return fail("origin, start time and bearing must be finite and valid".into());
        }
        let north = self.base_speed * self.sample_interval * self.n_points.saturating_sub(1) as f64
            * self.base_bearing.to_radians().cos();
        let reach = ((north.abs() + self.outlier_displacement) / crate::geo::EARTH_RADIUS_M).to_degrees();
        let end_lat = self.origin_lat + reach.copysign(north);
        if !(-89.0..=89.0).contains(&end_lat) {
            return fail(format!(
                "track would reach latitude {end_lat:.1}; shorten it or change base_bearing"
            ));
        }
        Ok(())
    }

    /// Number of displaced points: `round(outlier_rate * (n_points - 2))`.
    pub fn outlier_count(&self) -> usize {
        (self.outlier_rate * (self.n_points - 2) as f64).round() as usize
    }
}

/// Single trajectory with id `synth`, drawn from stream 0.
pub fn generate_trajectory(spec: &SynthSpec) -> Result<(Trajectory, LabelSet)> {
    spec.validate()?;
    Ok(generate_stream(spec, "synth", 0))
}

/// `count` independent trajectories with ids `synth-00000`, `synth-00001`, ...
pub fn generate_dataset(spec: &SynthSpec, count: usize) -> Result<Vec<(Trajectory, LabelSet)>> {
    spec.validate()?;
    Ok((0..count)
        .map(|i| generate_stream(spec, &format!("synth-{i:05}"), i as u64))
        .collect())
}

fn generate_stream(spec: &SynthSpec, id: &str, stream: u64) -> (Trajectory, LabelSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);

    let labels = pick_outliers(&mut rng, spec.n_points, spec.outlier_count());

    let plane = LocalPlane::new(spec.origin_lat, spec.origin_lon);
    let heading = spec.base_bearing.to_radians();
    let (ux, uy) = (heading.sin(), heading.cos());
    let step = spec.base_speed * spec.sample_interval;
    let bearing = crate::geo::normalize_degrees(spec.base_bearing);
    let id: std::sync::Arc<str> = id.into();

    let mut points = Vec::with_capacity(spec.n_points);
    for i in 0..spec.n_points {
        let along = step * i as f64;
        let (nx, ny) = gaussian_pair(&mut rng);
        let mut x = along * ux + nx * spec.position_noise_sigma;
        let mut y = along * uy + ny * spec.position_noise_sigma;
        if labels.contains(i) {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            x += spec.outlier_displacement * theta.cos();
            y += spec.outlier_displacement * theta.sin();
        }
        let (lat, lon) = plane.unproject(x, y);
        points.push(TrajectoryPoint {
            object_id: id.clone(),
            t: spec.start_time + spec.sample_interval * i as f64,
            lat,
            lon,
            recorded_speed: Some(spec.base_speed),
            recorded_bearing: Some(bearing),
        });
    }
    let traj = Trajectory::new(id, points).expect("generated timestamps strictly increase");
    (traj, labels)
}

/// Chooses `k` interior indices of `0..n`. When `k` leaves room, the chosen
/// indices are pairwise non-adjacent so each outlier has a clean predecessor.
fn pick_outliers(rng: &mut ChaCha8Rng, n: usize, k: usize) -> LabelSet {
    let slots = n.saturating_sub(2);
    let k = k.min(slots);
    if k == 0 {
        return LabelSet::new();
    }
    if k <= slots.div_ceil(2) {
        // k sorted picks from slots - k + 1 positions, spread by rank
        let mut picks = index::sample(rng, slots - k + 1, k).into_vec();
        picks.sort_unstable();
        picks.into_iter().enumerate().map(|(rank, p)| 1 + p + rank).collect()
    } else {
        index::sample(rng, slots, k).into_iter().map(|p| p + 1).collect()
    }
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Writes trajectories in the default ingest schema
/// (`object_id,t,lat,lon,speed,bearing`, epoch seconds, m/s).
pub fn write_csv<W: Write>(out: W, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["object_id", "t", "lat", "lon", "speed", "bearing"])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for traj in trajectories {
        for p in traj.points() {
            w.write_record([
                p.object_id.to_string(),
                p.t.to_string(),
                p.lat.to_string(),
                p.lon.to_string(),
                opt(p.recorded_speed),
                opt(p.recorded_bearing),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
