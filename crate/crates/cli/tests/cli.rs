use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use snakefit::config::ExperimentConfig;
use snakefit::formats::{self, TrajectoryTable};
use snakefit::plot::{overlay_svg, View};
use snakefit::runner::{dense_curve, MANIFEST_FILE, METRICS_FILE};
use snakefit_core::analysis::{contact_pattern, run_frequency};
use snakefit_core::{sample_equal_arclength, GaitParams, RobotModel};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snakefit"))
}

const SMALL: &str = r#"
name = "small"
frequencies = [0.5, 1.0, 1.5]
frames_per_cycle = 24
methods = ["reconstructor", "baseline", "cold_start"]
seed = 3

[robot]
joints = 8

[gait]
family = "sigmoid_filtered"
amplitude_y = 0.5
amplitude_z = 0.6
omega_y = 6.283185307179586
omega_z = 6.283185307179586
phase = -1.5707963267948966
"#;

fn small(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml_str(SMALL).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

#[test]
fn bundled_configs_load() {
    let mut count = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}

#[test]
fn invalid_values_name_their_key() {
    let negative = SMALL.replace("joints = 8", "joints = 8\nlink_length = -0.1");
    let err = ExperimentConfig::from_toml_str(&negative).unwrap_err().to_string();
    assert!(err.contains("link_length"), "{err}");

    let unknown = SMALL.replace("joints = 8", "joints = 8\nlink_lenght = 0.1");
    let err = ExperimentConfig::from_toml_str(&unknown).unwrap_err().to_string();
    assert!(err.contains("link_lenght"), "{err}");

    let empty = SMALL.replace("frequencies = [0.5, 1.0, 1.5]", "frequencies = []");
    let err = ExperimentConfig::from_toml_str(&empty).unwrap_err().to_string();
    assert!(err.contains("frequencies"), "{err}");

    let family = SMALL.replace("sigmoid_filtered", "cubic");
    assert!(ExperimentConfig::from_toml_str(&family).is_err());
}

#[test]
fn malformed_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, SMALL.replace("joints = 8", "joints = 8\nlink_length = -0.1")).unwrap();
    let out = bin().arg("run").arg(&path).arg("--out-dir").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("link_length"));
}

#[test]
fn nonconvergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.toml");
    fs::write(&path, format!("{SMALL}\n[solver]\nmax_iterations = 1\n")).unwrap();
    let out = bin().arg("run").arg(&path).arg("--out-dir").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o").join(METRICS_FILE).exists());
}

#[test]
fn bundled_sidewinding_trajectory_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(configs_dir().join("sidewinding.toml"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sidewinding_f1.000_reconstructor_trajectory.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 200);
    assert_eq!(lines[0].split(',').count(), 17);
    assert!(lines.iter().all(|l| l.split(',').count() == 17));
    assert!(text.ends_with('\n'));
    let metrics = formats::read_metrics(fs::File::open(dir.path().join(METRICS_FILE)).unwrap()).unwrap();
    assert_eq!(metrics.len(), 2);
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    snakefit::run(&small(dir.path()), Some(1)).unwrap();
    let ta = tree(dir.path());
    snakefit::run(&small(dir.path()), Some(4)).unwrap();
    let tb = tree(dir.path());
    assert_eq!(ta.len(), tb.len());
    for ((na, ca), (nb, cb)) in ta.iter().zip(&tb) {
        assert_eq!(na, nb);
        assert!(ca == cb, "{na} differs");
    }
}

#[test]
fn outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let summary = snakefit::run(&cfg, None).unwrap();
    let spec = cfg.gait_spec();
    let fr = run_frequency(&spec, 1.0).unwrap();

    let manifest = formats::read_manifest(fs::File::open(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest, summary.manifest);
    assert_eq!(manifest.runs.len(), 9);

    for run in &fr.runs {
        let entry = manifest.runs.iter().find(|r| r.f_hz == 1.0 && r.method == run.method).unwrap();
        let table = formats::read_trajectory(fs::File::open(dir.path().join(&entry.trajectory)).unwrap()).unwrap();
        assert_eq!(table, TrajectoryTable::from_trajectory(&run.trajectory));
        let ws = formats::read_workspace(fs::File::open(dir.path().join(&entry.workspace)).unwrap()).unwrap();
        for ((t, pts), frame) in ws.iter().zip(run.trajectory.frames()) {
            assert_eq!(*t, frame.time);
            assert_eq!(pts, &frame.workspace.points);
        }
        let contact = formats::read_contact(fs::File::open(dir.path().join(&entry.contact)).unwrap()).unwrap();
        assert_eq!(contact, contact_pattern(&run.trajectory, cfg.marker_count));
        assert_eq!(contact.marker_count(), 8);
        assert_eq!(contact.frame_count(), 24);
    }
    let metrics = formats::read_metrics(fs::File::open(dir.path().join(METRICS_FILE)).unwrap()).unwrap();
    let again: Vec<_> = fr.runs.iter().map(|r| r.record.clone()).collect();
    assert_eq!(&metrics[3..6], &again[..]);

    let resolved = ExperimentConfig::load(&dir.path().join(&manifest.config)).unwrap();
    assert_eq!(resolved, cfg.resolved());
}

#[test]
fn metric_statistics_match_stored_frames() {
    let cfg = small(Path::new("unused"));
    let fr = run_frequency(&cfg.gait_spec(), 1.0).unwrap();
    for run in &fr.runs {
        let d = run.trajectory.fit_errors();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let std = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((run.record.mean_D_bl2 - mean).abs() <= 1e-12);
        assert!((run.record.std_D_bl2 - std).abs() <= 1e-12);
    }
}

fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed svg");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| {
            n.attribute("points")
                .unwrap()
                .split_whitespace()
                .map(|pair| {
                    let (x, y) = pair.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

#[test]
fn overlay_has_two_polylines_per_view() {
    let robot = RobotModel::new(16);
    let params = GaitParams::sidewinding();
    let samples = sample_equal_arclength(&params.at(0.3), &robot).unwrap();
    let curve = dense_curve(&params, robot.body_length(), 0.3).unwrap();
    for view in [View::Xy, View::Xz, View::Yz, View::Oblique] {
        let lines = polylines(&overlay_svg(&curve, &samples.points, view));
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].len(), samples.len());
    }
}

#[test]
fn straight_frame_overlays_coincide() {
    let robot = RobotModel::new(6);
    let params = GaitParams::straight();
    let samples = sample_equal_arclength(&params.at(0.0), &robot).unwrap();
    let curve = dense_curve(&params, robot.body_length(), 0.0).unwrap();
    let lines = polylines(&overlay_svg(&curve, &samples.points, View::Xy));
    for (x, y) in &lines[1] {
        assert!(y.abs() < 1e-6);
        assert!((-1e-6..=1.0 + 1e-6).contains(x));
    }
    assert_eq!(lines[0].first(), lines[1].first());
    assert_eq!(lines[0].last(), lines[1].last());
}

#[test]
fn plot_command_writes_overlay() {
    let dir = tempfile::tempdir().unwrap();
    snakefit::run(&small(dir.path()), None).unwrap();
    let traj = dir.path().join("small_f1.000_reconstructor_trajectory.csv");
    let out = bin().arg("plot").arg(&traj).arg("5").arg("--view").arg("xz").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(dir.path().join("small_f1.000_reconstructor_frame5_xz.svg")).unwrap();
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].len(), 10);

    let out = bin().arg("plot").arg(&traj).arg("99").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
