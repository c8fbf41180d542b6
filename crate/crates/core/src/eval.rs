//! Scoring predicted labels against ground truth.
//!
//! Confusion counts are pooled over all trajectories of a dataset before
//! precision, recall and F-beta are computed (micro-averaging).

use std::io::Write;
use std::ops::AddAssign;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{detect, DetectorConfig};
use crate::error::{Error, Result};
use crate::labels::Labels;
use crate::model::{LabelSet, Trajectory};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
        self.tn += rhs.tn;
    }
}

/// Counts agreement between predicted and true outlier indices over `n` points.
pub fn confusion(pred: &LabelSet, truth: &LabelSet, n: usize) -> Result<ConfusionMatrix> {
    for index in pred.iter().chain(truth.iter()) {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
    }
    // both sets are sorted: merge
    let (p, t) = (pred.as_slice(), truth.as_slice());
    let (mut i, mut j, mut tp) = (0, 0, 0);
    while i < p.len() && j < t.len() {
        match p[i].cmp(&t[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                tp += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let fp = p.len() - tp;
    let fn_ = t.len() - tp;
    Ok(ConfusionMatrix {
        tp,
        fp,
        fn_,
        tn: n - tp - fp - fn_,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreWarning {
    /// Nothing was predicted; precision taken as 0.
    NoPredictions,
    /// Nothing to find; recall taken as 0.
    NoTrueOutliers,
}

/// Precision, taken as 0 when nothing was predicted.
pub fn precision(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fp)
}

/// Recall, taken as 0 when there are no true outliers.
pub fn recall(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fn_)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn score_warnings(cm: &ConfusionMatrix) -> Vec<ScoreWarning> {
    let mut w = Vec::new();
    if cm.tp + cm.fp == 0 {
        w.push(ScoreWarning::NoPredictions);
    }
    if cm.tp + cm.fn_ == 0 {
        w.push(ScoreWarning::NoTrueOutliers);
    }
    w
}

/// `(1 + β²)·P·R / (β²·P + R)`, or 0 when `P = R = 0`.
pub fn fbeta(cm: &ConfusionMatrix, beta: f64) -> f64 {
    assert!(beta > 0.0, "beta must be positive, got {beta}");
    let (p, r) = (precision(cm), recall(cm));
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f_05: f64,
    pub f_1: f64,
    pub f_2: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<ScoreWarning>,
}

impl Scores {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        Self {
            precision: precision(cm),
            recall: recall(cm),
            f_05: fbeta(cm, 0.5),
            f_1: fbeta(cm, 1.0),
            f_2: fbeta(cm, 2.0),
            warnings: score_warnings(cm),
        }
    }
}

/// A detector configuration under a unique display name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDetector {
    pub name: String,
    #[serde(flatten)]
    pub config: DetectorConfig,
}

/// Trajectories with their ground truth. Trajectories absent from `truth`
/// are treated as outlier-free.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub name: String,
    pub source: String,
    pub trajectories: Vec<Trajectory>,
    pub truth: Labels,
}

/// Dataset accounting: total points, where they came from, how many are outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub source: String,
    pub trajectories: usize,
    pub total_points: usize,
    pub outliers: usize,
    pub outlier_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub object_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub detector: String,
    pub method: String,
    pub dataset: String,
    pub confusion: ConfusionMatrix,
    #[serde(flatten)]
    pub scores: Scores,
    pub total_points: usize,
    pub truth_outliers: usize,
    pub predicted_outliers: usize,
    /// Wall-clock seconds summed over detector calls.
    pub elapsed: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub datasets: Vec<DatasetSummary>,
    /// One entry per detector × dataset, detectors in configured order.
    pub entries: Vec<ReportEntry>,
}

/// Report plus the predicted labels behind it.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub report: EvaluationReport,
    /// `(detector, dataset) → labels`, same order as the report entries.
    pub predictions: Vec<((String, String), Labels)>,
}

impl RunOutput {
    pub fn has_failures(&self) -> bool {
        self.report.entries.iter().any(|e| !e.failures.is_empty())
    }
}

/// Runs every detector on every trajectory of every dataset and scores the
/// pooled predictions. `jobs > 1` spreads detector calls over that many
/// threads; results do not depend on it. A failing or panicking detector
/// call is recorded in the entry's `failures` and its trajectory contributes
/// no counts.
pub fn evaluate_run(
    detectors: &[NamedDetector],
    datasets: &[LabeledDataset],
    jobs: usize,
) -> Result<RunOutput> {
    let mut seen = std::collections::BTreeSet::new();
    for d in detectors {
        if !seen.insert(d.name.as_str()) {
            return Err(Error::Config(format!("duplicate detector name {:?}", d.name)));
        }
        d.config.validate()?;
    }

    let units: Vec<(usize, usize, usize)> = detectors
        .iter()
        .enumerate()
        .flat_map(|(di, _)| {
            datasets.iter().enumerate().flat_map(move |(si, ds)| {
                (0..ds.trajectories.len()).map(move |ti| (di, si, ti))
            })
        })
        .collect();

    let run_unit = |&(di, si, ti): &(usize, usize, usize)| -> std::result::Result<(LabelSet, f64), String> {
        let traj = &datasets[si].trajectories[ti];
        let cfg = &detectors[di].config;
        match catch_unwind(AssertUnwindSafe(|| detect(traj, cfg))) {
            Ok(Ok(r)) => Ok((r.flags, r.elapsed)),
            Ok(Err(e)) => Err(e.to_string()),
            Err(panic) => Err(panic_message(panic)),
        }
    };

    let results: Vec<std::result::Result<(LabelSet, f64), String>> = if jobs <= 1 {
        units.iter().map(run_unit).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| units.par_iter().map(run_unit).collect())
    };

    let mut report = EvaluationReport {
        datasets: datasets.iter().map(summarize).collect(),
        entries: Vec::new(),
    };
    let mut predictions = Vec::new();
    let mut results = results.into_iter();
    for det in detectors {
        for ds in datasets {
            let mut cm = ConfusionMatrix::default();
            let mut elapsed = 0.0;
            let mut failures = Vec::new();
            let mut labels = Labels::new();
            for traj in &ds.trajectories {
                let id = traj.object_id().to_owned();
                let empty = LabelSet::new();
                let truth = ds.truth.get(&id).unwrap_or(&empty);
                match results.next().expect("one result per unit") {
                    Ok((flags, secs)) => {
                        elapsed += secs;
                        match confusion(&flags, truth, traj.len()) {
                            Ok(c) => cm += c,
                            Err(e) => failures.push(Failure {
                                object_id: id.clone(),
                                error: e.to_string(),
                            }),
                        }
                        labels.insert(id, flags);
                    }
                    Err(error) => failures.push(Failure { object_id: id, error }),
                }
            }
            let predicted = labels.values().map(LabelSet::len).sum();
            report.entries.push(ReportEntry {
                detector: det.name.clone(),
                method: det.config.method_name(),
                dataset: ds.name.clone(),
                scores: Scores::from_confusion(&cm),
                total_points: cm.total(),
                truth_outliers: cm.tp + cm.fn_,
                predicted_outliers: predicted,
                confusion: cm,
                elapsed,
                failures,
            });
            predictions.push(((det.name.clone(), ds.name.clone()), labels));
        }
    }
    Ok(RunOutput { report, predictions })
}

fn summarize(ds: &LabeledDataset) -> DatasetSummary {
    let total_points: usize = ds.trajectories.iter().map(Trajectory::len).sum();
    let outliers: usize = ds
        .trajectories
        .iter()
        .filter_map(|t| ds.truth.get(t.object_id()))
        .map(LabelSet::len)
        .sum();
    DatasetSummary {
        name: ds.name.clone(),
        source: ds.source.clone(),
        trajectories: ds.trajectories.len(),
        total_points,
        outliers,
        outlier_percent: if total_points == 0 {
            0.0
        } else {
            100.0 * outliers as f64 / total_points as f64
        },
    }
}

fn panic_message(panic: Box<dyn std::any::Any + Send>) -> String {
    let msg = panic
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| panic.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("detector panicked: {msg}")
}

impl EvaluationReport {
    /// Nested `detector → dataset → metrics` JSON, with dataset accounting
    /// under `datasets`.
    pub fn to_json(&self, include_timings: bool) -> serde_json::Value {
        let mut by_detector = serde_json::Map::new();
        for e in &self.entries {
            let mut metrics = serde_json::to_value(e).expect("report entries serialize");
            let obj = metrics.as_object_mut().expect("entry is an object");
            obj.remove("detector");
            obj.remove("dataset");
            if !include_timings {
                obj.remove("elapsed");
            }
            by_detector
                .entry(e.detector.clone())
                .or_insert_with(|| serde_json::Value::Object(Default::default()))
                .as_object_mut()
                .expect("detector node is an object")
                .insert(e.dataset.clone(), metrics);
        }
        serde_json::json!({
            "datasets": self.datasets,
            "results": by_detector,
        })
    }

    /// One row per detector × dataset. Timings are included only when asked,
    /// so the table without them is reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, out: W, include_timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "detector", "method", "dataset", "total_points", "truth_outliers",
            "predicted_outliers", "tp", "fp", "fn", "tn", "precision", "recall", "f_05", "f_1",
            "f_2", "failures",
        ];
        if include_timings {
            header.push("elapsed_s");
        }
        w.write_record(&header)?;
        for e in &self.entries {
            let c = &e.confusion;
            let s = &e.scores;
            let mut row = vec![
                e.detector.clone(),
                e.method.clone(),
                e.dataset.clone(),
                e.total_points.to_string(),
                e.truth_outliers.to_string(),
                e.predicted_outliers.to_string(),
                c.tp.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.tn.to_string(),
                s.precision.to_string(),
                s.recall.to_string(),
                s.f_05.to_string(),
                s.f_1.to_string(),
                s.f_2.to_string(),
                e.failures.len().to_string(),
            ];
            if include_timings {
                row.push(e.elapsed.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<report csv>", e))?;
        Ok(())
    }
}
