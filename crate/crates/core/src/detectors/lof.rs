//! Local Outlier Factor over local-plane positions.

use serde::{Deserialize, Serialize};

use super::{config_error, DetectionResult};
use crate::error::Result;
use crate::geo::LocalPlane;
use crate::model::{LabelSet, Trajectory};

/// Added to the mean reachability distance so coincident points keep a
/// finite density.
pub const LRD_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LofParams {
    pub k: usize,
    pub threshold: f64,
}

impl LofParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(config_error("lof.k must be >= 1"));
        }
        if self.threshold.is_nan() || self.threshold <= 1.0 {
            return Err(config_error("lof.threshold must be > 1"));
        }
        Ok(())
    }
}

struct Neighbourhood {
    k_distance: f64,
    /// `(index, distance)` of every point within the k-distance, ties included.
    members: Vec<(usize, f64)>,
}

/// LOF score of every point. The k-neighbourhood of `p` holds all other
/// points no farther than its k-th nearest neighbour, so ties can make it
/// larger than `k`. Requires `points.len() > k`.
pub fn lof_scores(points: &[(f64, f64)], k: usize) -> Vec<f64> {
    let n = points.len();
    assert!(k >= 1 && n > k, "LOF needs more than k points");

    let mut dists = Vec::with_capacity(n - 1);
    let hoods: Vec<Neighbourhood> = (0..n)
        .map(|i| {
            let (xi, yi) = points[i];
            dists.clear();
            dists.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (j, (points[j].0 - xi).hypot(points[j].1 - yi))),
            );
            let (_, kth, _) = dists.select_nth_unstable_by(k - 1, |a, b| a.1.total_cmp(&b.1));
            let k_distance = kth.1;
            let mut members: Vec<(usize, f64)> =
                dists.iter().copied().filter(|&(_, d)| d <= k_distance).collect();
            members.sort_unstable_by_key(|&(j, _)| j);
            Neighbourhood { k_distance, members }
        })
        .collect();

    let lrd: Vec<f64> = hoods
        .iter()
        .map(|h| {
            let total: f64 = h
                .members
                .iter()
                .map(|&(o, d)| d.max(hoods[o].k_distance))
                .sum();
            1.0 / (total / h.members.len() as f64 + LRD_EPSILON)
        })
        .collect();

    hoods
        .iter()
        .zip(&lrd)
        .map(|(h, &own)| {
            let mean: f64 = h.members.iter().map(|&(o, _)| lrd[o]).sum::<f64>() / h.members.len() as f64;
            mean / own
        })
        .collect()
}

/// Flags points whose LOF exceeds the threshold. With `k` or fewer points
/// the neighbourhood is undefined and nothing is flagged.
pub fn detect_lof(traj: &Trajectory, params: &LofParams) -> Result<DetectionResult> {
    params.validate()?;
    let pts = traj.points();
    if pts.len() <= params.k {
        return Ok(DetectionResult {
            warnings: vec![format!(
                "degenerate neighbourhood: {} points with k = {}",
                pts.len(),
                params.k
            )],
            ..DetectionResult::default()
        });
    }
    let plane = LocalPlane::centred_on(pts);
    let xy: Vec<(f64, f64)> = pts.iter().map(|p| plane.project_point(p)).collect();
    let flags: LabelSet = lof_scores(&xy, params.k)
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| (s > params.threshold).then_some(i))
        .collect();
    Ok(DetectionResult::flags(flags))
}
