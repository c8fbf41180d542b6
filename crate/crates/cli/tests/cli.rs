use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trajclean::detectors::{DetectorConfig, HampelChannel, HampelParams, SpeedBoundedParams, SpeedBoundedVariant};
use trajclean::eval::{confusion, ConfusionMatrix, Scores};
use trajclean::groundtruth::{label_outliers, GroundTruthConfig};
use trajclean::ingest::{parse_dataset, ColumnMapping};
use trajclean::labels::read_labels;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajclean"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn trajclean")
}

fn synth(dir: &Path) {
    let out = run(&["synth", "--seed", "7", "--trajectories", "6", "--points", "300", "--out", "data"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const DETECTORS: &str = r#"
[[detector]]
name = "hampel"
detector = "hampel"
hampel.window_half = 5
hampel.n_sigmas = 3.0

[[detector]]
name = "optimal"
detector = "speed_bounded"
speed_bounded = { v_max = 60.0, variant = "optimal" }
"#;

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(&["synth", "--seed", "42", "--trajectories", "3", "--points", "200", "--out", out], tmp.path());
        assert!(o.status.success());
    }
    for f in ["synth.csv", "synth.labels", "synth.mapping.toml", "synth.spec.json"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let o = run(&["synth", "--seed", "43", "--trajectories", "3", "--points", "200", "--out", "c"], tmp.path());
    assert!(o.status.success());
    assert_ne!(
        fs::read(tmp.path().join("a/synth.csv")).unwrap(),
        fs::read(tmp.path().join("c/synth.csv")).unwrap()
    );
}

#[test]
fn eval_without_detectors_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let o = run(&["eval", "--dataset", "data/synth.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[[detector]]\ndetector = \"nope\"\n").unwrap();
    let o = run(&["eval", "--config", "bad.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    fs::write(tmp.path().join("jobs.toml"), DETECTORS).unwrap();
    let o = run(&["eval", "--config", "jobs.toml", "--dataset", "x.csv", "--jobs", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), DETECTORS).unwrap();
    let o = run(&["eval", "--config", "run.toml", "--dataset", "missing.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["label", "--config", "missing.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn label_writes_truth_and_ingest_report() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let o = run(&["label", "--dataset", "data/synth.csv", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(tmp.path().join("out/synth/truth.labels")).unwrap();
    let written = read_labels(text.as_bytes()).unwrap();
    let (trajs, report) = parse_dataset(tmp.path().join("data/synth.csv"), &ColumnMapping::default()).unwrap();
    assert_eq!(written, label_outliers(&trajs, &GroundTruthConfig::default()));

    let ingest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/synth/ingest.json")).unwrap()).unwrap();
    assert_eq!(ingest["rows_read"], report.rows_read);
    assert_eq!(ingest["points_accepted"], 1800);
}

#[test]
fn detect_writes_one_label_file_per_detector() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    fs::write(tmp.path().join("run.toml"), DETECTORS).unwrap();
    let o = run(&["detect", "--config", "run.toml", "--dataset", "data/synth.csv", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for det in ["hampel", "optimal"] {
        assert!(tmp.path().join(format!("out/synth/{det}.labels")).is_file());
    }
    assert!(!tmp.path().join("out/scores.csv").exists());
}

/// Scores from the CLI equal a pipeline scripted against the library.
#[test]
fn eval_matches_scripted_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let cfg = format!(
        "[[dataset]]\nname = \"s\"\npath = \"data/synth.csv\"\nmapping = \"data/synth.mapping.toml\"\ntruth = \"data/synth.labels\"\n{DETECTORS}"
    );
    fs::write(tmp.path().join("run.toml"), cfg).unwrap();
    let o = run(&["eval", "--config", "run.toml", "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (trajs, _) = parse_dataset(tmp.path().join("data/synth.csv"), &ColumnMapping::default()).unwrap();
    let truth = read_labels(fs::read(tmp.path().join("data/synth.labels")).unwrap().as_slice()).unwrap();
    let scores: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/scores.json")).unwrap()).unwrap();

    let configs = [
        (
            "hampel",
            DetectorConfig::Hampel(HampelParams { window_half: 5, n_sigmas: 3.0, channel: HampelChannel::Position }),
        ),
        ("optimal", DetectorConfig::SpeedBounded(SpeedBoundedParams::new(0.0, 60.0, SpeedBoundedVariant::Optimal))),
    ];
    for (name, cfg) in configs {
        let mut cm = ConfusionMatrix::default();
        for t in &trajs {
            let flags = trajclean::detectors::detect(t, &cfg).unwrap().flags;
            let truth = truth.get(t.object_id()).cloned().unwrap_or_default();
            cm += confusion(&flags, &truth, t.len()).unwrap();
        }
        let expected = Scores::from_confusion(&cm);
        let got = &scores["results"][name]["s"];
        assert_eq!(got["confusion"]["tp"], cm.tp, "{name}");
        assert_eq!(got["confusion"]["fn"], cm.fn_, "{name}");
        for (key, want) in [
            ("precision", expected.precision),
            ("recall", expected.recall),
            ("f_1", expected.f_1),
        ] {
            assert_eq!(got[key].as_f64().unwrap(), want, "{name} {key}");
        }
    }
    for f in ["report.json", "report.csv", "scores.csv", "manifest.json", "s/truth.labels", "s/hampel.labels"] {
        assert!(tmp.path().join("out").join(f).is_file(), "{f}");
    }
}

#[test]
fn mapping_file_drives_ingestion() {
    let tmp = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let dataset = fixtures.join("ais_sample.csv");
    let mapping = fixtures.join("ais_sample.mapping.toml");
    let o = run(
        &["label", "--dataset", dataset.to_str().unwrap(), "--mapping", mapping.to_str().unwrap(), "--out", "out"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ingest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/ais_sample/ingest.json")).unwrap()).unwrap();
    assert_eq!(ingest["rows_read"], 61);
}
