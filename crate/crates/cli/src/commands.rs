use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use trajclean::eval::{evaluate_run, LabeledDataset, RunOutput};
use trajclean::groundtruth::label_outliers;
use trajclean::ingest::{parse_dataset, ColumnMapping, IngestReport};
use trajclean::labels::{load_labels, write_labels, Labels};
use trajclean::synth::{generate_dataset, write_csv};
use trajclean::Trajectory;

use crate::config::{stem, DatasetEntry, RunConfig};
use crate::error::{CliError, Result};
use crate::{CommonArgs, SynthArgs};

const DEFAULT_OUT: &str = "trajclean-out";

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.dataset {
        let mapping = match &args.mapping {
            Some(m) => ColumnMapping::load(m)?,
            None => ColumnMapping::default(),
        };
        cfg.datasets = vec![DatasetEntry {
            name: stem(path),
            path: path.clone(),
            mapping,
            truth: args.truth.clone(),
        }];
        cfg.check_names()?;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    if cfg.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if cfg.datasets.is_empty() {
        return Err(CliError::Config("no dataset configured (use --config or --dataset)".into()));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::file(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| CliError::file(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::file(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn write_label_file(path: &Path, labels: &Labels) -> Result<()> {
    write_file(path, |w| write_labels(w, labels))
}

struct Loaded {
    entry: DatasetEntry,
    trajectories: Vec<Trajectory>,
    report: IngestReport,
}

fn load_datasets(cfg: &RunConfig) -> Result<Vec<Loaded>> {
    cfg.datasets
        .iter()
        .map(|entry| {
            let (trajectories, report) = parse_dataset(&entry.path, &entry.mapping)?;
            info!(
                "{}: {} rows, {} points, {} rejected, {} trajectories",
                entry.name, report.rows_read, report.points_accepted, report.rows_rejected, report.trajectories_built
            );
            Ok(Loaded {
                entry: entry.clone(),
                trajectories,
                report,
            })
        })
        .collect()
}

fn truth_for(cfg: &RunConfig, ds: &Loaded) -> Result<Labels> {
    match &ds.entry.truth {
        Some(path) => Ok(load_labels(path)?),
        None => Ok(label_outliers(&ds.trajectories, &cfg.groundtruth)),
    }
}

pub fn label(args: &CommonArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let out = out_dir(&cfg);
    for ds in load_datasets(&cfg)? {
        let labels = label_outliers(&ds.trajectories, &cfg.groundtruth);
        let dir = out.join(&ds.entry.name);
        create_dir(&dir)?;
        write_label_file(&dir.join("truth.labels"), &labels)?;
        write_json(&dir.join("ingest.json"), &ds.report)?;
        let n: usize = labels.values().map(|l| l.len()).sum();
        println!("{}: {n} outliers in {} points", ds.entry.name, ds.report.points_accepted);
    }
    Ok(())
}

fn run_detectors(cfg: &RunConfig, datasets: &[Loaded], truths: Vec<Labels>) -> Result<RunOutput> {
    if cfg.detectors.is_empty() {
        return Err(CliError::Config("no detector configured".into()));
    }
    let labeled: Vec<LabeledDataset> = datasets
        .iter()
        .zip(truths)
        .map(|(ds, truth)| LabeledDataset {
            name: ds.entry.name.clone(),
            source: ds.entry.path.display().to_string(),
            trajectories: ds.trajectories.clone(),
            truth,
        })
        .collect();
    Ok(evaluate_run(&cfg.detectors, &labeled, cfg.jobs)?)
}

fn write_predictions(out: &Path, run: &RunOutput) -> Result<()> {
    for ((detector, dataset), labels) in &run.predictions {
        let dir = out.join(dataset);
        create_dir(&dir)?;
        write_label_file(&dir.join(format!("{detector}.labels")), labels)?;
    }
    Ok(())
}

fn failure_count(run: &RunOutput) -> usize {
    let mut n = 0;
    for e in &run.report.entries {
        for f in &e.failures {
            warn!("{} on {} / {}: {}", e.detector, e.dataset, f.object_id, f.error);
            n += 1;
        }
    }
    n
}

pub fn detect(args: &CommonArgs) -> Result<()> {
    let cfg = load_config(args)?;
    if cfg.detectors.is_empty() {
        return Err(CliError::Config("no detector configured".into()));
    }
    let out = out_dir(&cfg);
    let datasets = load_datasets(&cfg)?;
    let empty = vec![Labels::new(); datasets.len()];
    let run = run_detectors(&cfg, &datasets, empty)?;
    write_predictions(&out, &run)?;
    for e in &run.report.entries {
        println!("{} on {}: {} flagged", e.detector, e.dataset, e.predicted_outliers);
    }
    match failure_count(&run) {
        0 => Ok(()),
        n => Err(CliError::DetectorFailures(n)),
    }
}

pub fn eval(args: &CommonArgs) -> Result<()> {
    let cfg = load_config(args)?;
    if cfg.detectors.is_empty() {
        return Err(CliError::Config("no detector configured".into()));
    }
    let out = out_dir(&cfg);
    let datasets = load_datasets(&cfg)?;
    let truths = datasets.iter().map(|ds| truth_for(&cfg, ds)).collect::<Result<Vec<_>>>()?;

    create_dir(&out)?;
    for (ds, truth) in datasets.iter().zip(&truths) {
        let dir = out.join(&ds.entry.name);
        create_dir(&dir)?;
        write_label_file(&dir.join("truth.labels"), truth)?;
        write_json(&dir.join("ingest.json"), &ds.report)?;
    }

    let run = run_detectors(&cfg, &datasets, truths)?;
    write_predictions(&out, &run)?;
    let report = &run.report;
    write_json(&out.join("report.json"), &report.to_json(true))?;
    write_json(&out.join("scores.json"), &report.to_json(false))?;
    write_file(&out.join("report.csv"), |w| {
        report.write_csv(w, true).map_err(std::io::Error::other)
    })?;
    write_file(&out.join("scores.csv"), |w| {
        report.write_csv(w, false).map_err(std::io::Error::other)
    })?;
    write_json(
        &out.join("manifest.json"),
        &serde_json::json!({
            "toolkit": "trajclean",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": "eval",
            "config": cfg.to_manifest_json(),
            "ingest": datasets.iter().map(|d| serde_json::json!({
                "dataset": d.entry.name,
                "report": d.report,
            })).collect::<Vec<_>>(),
        }),
    )?;

    for e in &report.entries {
        println!(
            "{:<24} {:<16} P={:.4} R={:.4} F0.5={:.4} F1={:.4} F2={:.4} t={:.3}s",
            e.detector, e.dataset, e.scores.precision, e.scores.recall, e.scores.f_05, e.scores.f_1, e.scores.f_2, e.elapsed
        );
    }
    match failure_count(&run) {
        0 => Ok(()),
        n => Err(CliError::DetectorFailures(n)),
    }
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let section = &mut cfg.synth;
    let spec = &mut section.spec;
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.trajectories {
        section.trajectories = v;
    }
    if let Some(v) = args.points {
        spec.n_points = v;
    }
    if let Some(v) = args.outlier_rate {
        spec.outlier_rate = v;
    }
    if let Some(v) = args.displacement {
        spec.outlier_displacement = v;
    }
    if let Some(v) = args.noise {
        spec.position_noise_sigma = v;
    }
    if let Some(v) = args.speed {
        spec.base_speed = v;
    }
    if let Some(v) = args.interval {
        spec.sample_interval = v;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }

    let generated = generate_dataset(&cfg.synth.spec, cfg.synth.trajectories)?;
    let out = out_dir(&cfg);
    create_dir(&out)?;
    let labels: Labels = generated
        .iter()
        .map(|(t, l)| (t.object_id().to_owned(), l.clone()))
        .collect();
    let trajectories: Vec<Trajectory> = generated.into_iter().map(|(t, _)| t).collect();

    let csv_path = out.join("synth.csv");
    write_file(&csv_path, |w| write_csv(w, &trajectories).map_err(std::io::Error::other))?;
    write_label_file(&out.join("synth.labels"), &labels)?;
    write_file(&out.join("synth.mapping.toml"), |w| {
        let text = toml::to_string(&ColumnMapping::default()).map_err(std::io::Error::other)?;
        w.write_all(text.as_bytes())
    })?;
    write_json(&out.join("synth.spec.json"), &cfg.synth)?;
    let n: usize = labels.values().map(|l| l.len()).sum();
    println!(
        "wrote {} ({} trajectories, {} points, {n} outliers)",
        csv_path.display(),
        trajectories.len(),
        trajectories.iter().map(Trajectory::len).sum::<usize>()
    );
    Ok(())
}
