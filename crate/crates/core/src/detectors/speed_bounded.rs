//! Speed-bounded consistent subsequences.
//!
//! Two fixes `i < j` are consistent when the speed implied between them lies
//! in `[v_min, v_max]`. Each variant picks fixes to keep; everything else is
//! flagged.

use serde::{Deserialize, Serialize};

use super::{config_error, DetectionResult};
use crate::error::Result;
use crate::geo::{fixes, Fix};
use crate::model::{LabelSet, SpeedBounds, Trajectory};

pub const DEFAULT_CANDIDATE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedBoundedVariant {
    Greedy,
    SmartGreedy,
    LocalGreedy,
    Optimal,
}

impl SpeedBoundedVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeedBoundedVariant::Greedy => "greedy",
            SpeedBoundedVariant::SmartGreedy => "smart_greedy",
            SpeedBoundedVariant::LocalGreedy => "local_greedy",
            SpeedBoundedVariant::Optimal => "optimal",
        }
    }
}

fn default_min_component() -> usize {
    1
}

fn default_cap() -> usize {
    DEFAULT_CANDIDATE_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBoundedParams {
    #[serde(flatten)]
    pub bounds: SpeedBounds,
    pub variant: SpeedBoundedVariant,
    /// Smallest connected component kept by `local_greedy`.
    #[serde(default = "default_min_component")]
    pub min_component: usize,
    /// Most candidate subsequences tracked by `smart_greedy`.
    #[serde(default = "default_cap")]
    pub candidate_cap: usize,
}

impl SpeedBoundedParams {
    pub fn new(v_min: f64, v_max: f64, variant: SpeedBoundedVariant) -> Self {
        Self {
            bounds: SpeedBounds { v_min, v_max },
            variant,
            min_component: 1,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if self.min_component < 1 {
            return Err(config_error("speed_bounded.min_component must be >= 1"));
        }
        if self.candidate_cap < 1 {
            return Err(config_error("speed_bounded.candidate_cap must be >= 1"));
        }
        Ok(())
    }
}

pub fn detect_speed_bounded(traj: &Trajectory, params: &SpeedBoundedParams) -> Result<DetectionResult> {
    params.validate()?;
    if traj.len() < 2 {
        return Ok(DetectionResult::default());
    }
    let kept = kept_indices(traj, params);
    let mut keep = vec![false; traj.len()];
    for i in kept {
        keep[i] = true;
    }
    Ok(DetectionResult::flags(LabelSet::complement_of(&keep)))
}

/// Indices retained by the configured variant, ascending.
pub fn kept_indices(traj: &Trajectory, params: &SpeedBoundedParams) -> Vec<usize> {
    let fixes = fixes(traj.points());
    let ok = |i: usize, j: usize| params.bounds.contains(fixes[i].speed_to(&fixes[j]));
    if fixes.is_empty() {
        return Vec::new();
    }
    match params.variant {
        SpeedBoundedVariant::Greedy => greedy(fixes.len(), ok),
        SpeedBoundedVariant::SmartGreedy => smart_greedy(fixes.len(), params.candidate_cap, ok),
        SpeedBoundedVariant::LocalGreedy => local_greedy(&fixes, params),
        SpeedBoundedVariant::Optimal => optimal(fixes.len(), ok),
    }
}

fn greedy(n: usize, ok: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut kept = vec![0];
    for j in 1..n {
        if ok(*kept.last().unwrap(), j) {
            kept.push(j);
        }
    }
    kept
}

struct Candidate {
    seq: Vec<usize>,
    /// Tracks (or dominates) the plain greedy chain; never evicted.
    greedy: bool,
}

fn smart_greedy(n: usize, cap: usize, ok: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut cands = vec![Candidate {
        seq: vec![0],
        greedy: true,
    }];
    for j in 1..n {
        let mut extended = false;
        for c in cands.iter_mut() {
            if ok(*c.seq.last().unwrap(), j) {
                c.seq.push(j);
                extended = true;
            }
        }
        if !extended {
            cands.push(Candidate {
                seq: vec![j],
                greedy: false,
            });
        } else {
            merge_equal_tails(&mut cands);
        }
        while cands.len() > cap {
            let victim = cands
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.greedy)
                .min_by(|(ia, a), (ib, b)| a.seq.len().cmp(&b.seq.len()).then(ib.cmp(ia)))
                .map(|(i, _)| i);
            match victim {
                Some(i) => {
                    cands.remove(i);
                }
                None => break,
            }
        }
    }
    // first-created wins ties
    let mut best = 0;
    for (i, c) in cands.iter().enumerate() {
        if c.seq.len() > cands[best].seq.len() {
            best = i;
        }
    }
    cands.swap_remove(best).seq
}

/// Candidates ending at the same fix extend identically from now on, so only
/// the longest (earliest on ties) is worth tracking.
fn merge_equal_tails(cands: &mut Vec<Candidate>) {
    let mut i = 0;
    while i < cands.len() {
        let tail = *cands[i].seq.last().unwrap();
        let mut j = i + 1;
        while j < cands.len() {
            if *cands[j].seq.last().unwrap() == tail {
                let greedy = cands[i].greedy || cands[j].greedy;
                if cands[j].seq.len() > cands[i].seq.len() {
                    cands.swap(i, j);
                }
                cands[i].greedy = greedy;
                cands.remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }
}

fn local_greedy(fixes: &[Fix], params: &SpeedBoundedParams) -> Vec<usize> {
    // successive-pair edges make every connected component a run
    let mut kept = Vec::new();
    let mut start = 0;
    for j in 1..=fixes.len() {
        let linked = j < fixes.len() && params.bounds.contains(fixes[j - 1].speed_to(&fixes[j]));
        if !linked {
            if j - start >= params.min_component {
                kept.extend(start..j);
            }
            start = j;
        }
    }
    kept
}

/// Longest chain in the consistency DAG; among longest chains, the
/// lexicographically smallest index sequence.
#[allow(clippy::needless_range_loop)]
fn optimal(n: usize, ok: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    // longest[i]: length of the longest chain starting at i
    let mut longest = vec![1usize; n];
    let mut next = vec![usize::MAX; n];
    for i in (0..n).rev() {
        let mut best_tail = 0;
        for j in i + 1..n {
            // chains from j are at most n - j long
            if n - j <= best_tail {
                break;
            }
            if longest[j] > best_tail && ok(i, j) {
                best_tail = longest[j];
                next[i] = j;
            }
        }
        longest[i] = 1 + best_tail;
    }
    let max = *longest.iter().max().unwrap();
    let mut i = longest.iter().position(|&l| l == max).unwrap();
    let mut kept = vec![i];
    while next[i] != usize::MAX {
        i = next[i];
        kept.push(i);
    }
    kept
}
