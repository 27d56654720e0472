//! `run` and `plot` commands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use snakefit_core::analysis::{run_frequency, FrequencyRun, Method};
use snakefit_core::curve::RescaledCurve;
use snakefit_core::{GaitParams, Vec3};

use crate::config::{ConfigError, ExperimentConfig};
use crate::formats::{self, FormatError, Manifest, ManifestDesired, ManifestRun, TrajectoryTable};
use crate::plot::{overlay_svg, View};

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Vertices of the dense curve polyline in overlays.
pub const CURVE_VERTICES: usize = 400;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] snakefit_core::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{nonconverged} of {frames} optimiser frames did not converge (allowed fraction {allowed})")]
    NotConverged { nonconverged: usize, frames: usize, allowed: f64 },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::NotConverged { .. } => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn stem(gait: &str, f: f64, method: Method) -> String {
    format!("{gait}_f{f:.3}_{}", method.name())
}

/// Dense polyline of the rescaled desired curve at time `t`.
pub fn dense_curve(params: &GaitParams, body_length: f64, t: f64) -> Result<Vec<Vec3>> {
    let curve = params.at(t);
    let rescaled = RescaledCurve::new(&curve, body_length)?;
    Ok((0..CURVE_VERTICES).map(|i| rescaled.point_at_param(i as f64 / (CURVE_VERTICES - 1) as f64)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub optimiser_frames: usize,
    pub nonconverged: usize,
}

/// Runs every frequency (in parallel on `threads` workers when given), then
/// writes all artifacts in sweep order. Returns `NotConverged` after writing
/// when too many optimiser frames failed.
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunSummary> {
    config.validate()?;
    let spec = config.gait_spec();
    let sweep = || -> Vec<std::result::Result<FrequencyRun, snakefit_core::Error>> {
        config.frequencies.par_iter().map(|&f| run_frequency(&spec, f)).collect()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Usage(format!("thread pool: {e}")))?
            .install(sweep),
        None => sweep(),
    };
    let runs = results.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    let resolved = config.resolved();
    let path = dir.join(CONFIG_FILE);
    let mut w = create(&path)?;
    w.write_all(resolved.to_toml_string().as_bytes()).map_err(|source| RunError::Io { path: path.clone(), source })?;
    finish(&path, w)?;

    let mut manifest = Manifest {
        gait: config.name.clone(),
        config: CONFIG_FILE.into(),
        metrics: METRICS_FILE.into(),
        runs: Vec::new(),
        desired_contact: Vec::new(),
    };
    let mut records = Vec::new();
    let (mut optimiser_frames, mut nonconverged) = (0, 0);
    let body_length = spec.robot.body_length();
    for fr in &runs {
        let desired = format!("{}_f{:.3}_desired_contact.csv", config.name, fr.f_hz);
        let path = dir.join(&desired);
        let mut w = create(&path)?;
        formats::write_contact(&mut w, &fr.desired_contact)?;
        finish(&path, w)?;
        manifest.desired_contact.push(ManifestDesired { f_hz: fr.f_hz, contact: desired });

        let first = &fr.runs[0].trajectory.frames()[0];
        let curve0 = dense_curve(&spec.params.with_frequency(fr.f_hz), body_length, first.time)?;
        for run in &fr.runs {
            let base = stem(&config.name, fr.f_hz, run.method);
            let entry = ManifestRun {
                method: run.method,
                f_hz: fr.f_hz,
                trajectory: format!("{base}_trajectory.csv"),
                workspace: format!("{base}_workspace.csv"),
                contact: format!("{base}_contact.csv"),
                overlay: format!("{base}_overlay.svg"),
            };
            let path = dir.join(&entry.trajectory);
            let mut w = create(&path)?;
            formats::write_trajectory(&mut w, &TrajectoryTable::from_trajectory(&run.trajectory))?;
            finish(&path, w)?;
            let path = dir.join(&entry.workspace);
            let mut w = create(&path)?;
            formats::write_workspace(&mut w, &run.trajectory)?;
            finish(&path, w)?;
            let path = dir.join(&entry.contact);
            let mut w = create(&path)?;
            formats::write_contact(&mut w, &run.contact)?;
            finish(&path, w)?;
            let path = dir.join(&entry.overlay);
            let svg = overlay_svg(&curve0, &run.trajectory.frames()[0].workspace.points, View::Oblique);
            std::fs::write(&path, svg).map_err(|source| RunError::Io { path: path.clone(), source })?;

            if run.method != Method::Baseline {
                optimiser_frames += run.trajectory.len();
                nonconverged += run.trajectory.frames().iter().filter(|f| !f.converged).count();
            }
            records.push(run.record.clone());
            manifest.runs.push(entry);
        }
    }
    let path = dir.join(METRICS_FILE);
    let mut w = create(&path)?;
    formats::write_metrics(&mut w, &records)?;
    finish(&path, w)?;
    let path = dir.join(MANIFEST_FILE);
    let mut w = create(&path)?;
    formats::write_manifest(&mut w, &manifest)?;
    finish(&path, w)?;

    if optimiser_frames > 0 && nonconverged as f64 > config.max_nonconverged_fraction * optimiser_frames as f64 {
        return Err(RunError::NotConverged {
            nonconverged,
            frames: optimiser_frames,
            allowed: config.max_nonconverged_fraction,
        });
    }
    Ok(RunSummary { output_dir: dir.clone(), manifest, optimiser_frames, nonconverged })
}

/// Overlay of one frame of a trajectory written by [`run`]. The manifest and
/// resolved config are read from the trajectory's directory.
pub fn plot(trajectory: &Path, frame: usize, view: View, out: Option<&Path>) -> Result<PathBuf> {
    let dir = trajectory.parent().unwrap_or(Path::new("."));
    let file_name = trajectory
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| RunError::Usage(format!("not a file: {}", trajectory.display())))?;
    let manifest = formats::read_manifest(open(&dir.join(MANIFEST_FILE))?)?;
    let entry = manifest
        .runs
        .iter()
        .find(|r| r.trajectory == file_name)
        .ok_or_else(|| RunError::Usage(format!("{file_name} is not listed in {MANIFEST_FILE}")))?;
    let config = ExperimentConfig::load(&dir.join(&manifest.config))?;
    let table = formats::read_trajectory(open(trajectory)?)?;
    let frames = formats::read_workspace(open(&dir.join(&entry.workspace))?)?;
    if frame >= table.times.len() || frame >= frames.len() {
        return Err(RunError::Usage(format!("frame {frame} out of range (0..{})", table.times.len())));
    }
    let t = table.times[frame];
    let params = config.gait_params().with_frequency(entry.f_hz);
    let curve = dense_curve(&params, config.robot().body_length(), t)?;
    let svg = overlay_svg(&curve, &frames[frame].1, view);
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => dir.join(format!(
            "{}_frame{frame}_{}.svg",
            file_name.trim_end_matches("_trajectory.csv"),
            view.name()
        )),
    };
    std::fs::write(&path, svg).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}
