//! Evaluation metrics: fit error statistics, smoothness, contact patterns and
//! method comparison reports.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::baseline::{baseline_sequence, fit_joint_law, fit_sequence_coldstart};
use crate::curve::{frame_times, sample_equal_arclength, CurveSamples, GaitParams, RescaledCurve};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kinematics::{Configuration, RobotModel, WorkspaceSolution};
use crate::reconstruct::{fit_sequence, FitResult, SolverSettings};

pub const DEFAULT_MARKERS: usize = 8;
pub const DEFAULT_FRAMES_PER_CYCLE: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub time: f64,
    pub config: Configuration,
    pub workspace: WorkspaceSolution,
    /// Fit error `D` of this frame (BL²).
    pub fit_error: f64,
    pub converged: bool,
}

/// A chronological sequence of fitted configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitTrajectory {
    frames: Vec<TrajectoryFrame>,
    pub frames_per_cycle: usize,
    pub robot: RobotModel,
}

impl GaitTrajectory {
    /// Fails unless there are at least two frames with strictly increasing times.
    pub fn new(robot: RobotModel, frames: Vec<TrajectoryFrame>, frames_per_cycle: usize) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidParameter { name: "frames", reason: "need at least two frames" });
        }
        if frames.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidParameter { name: "times", reason: "must be strictly increasing" });
        }
        if let Some(bad) = frames.iter().find(|f| f.config.joint_angles.len() != robot.joints) {
            return Err(Error::DimensionMismatch {
                expected: robot.joints,
                found: bad.config.joint_angles.len(),
            });
        }
        Ok(GaitTrajectory { frames, frames_per_cycle, robot })
    }

    pub fn from_fits(robot: RobotModel, times: &[f64], fits: Vec<FitResult>, frames_per_cycle: usize) -> Result<Self> {
        if times.len() != fits.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: fits.len() });
        }
        let frames = times
            .iter()
            .zip(fits)
            .map(|(&time, fit)| TrajectoryFrame {
                time,
                config: fit.config,
                workspace: fit.workspace,
                fit_error: fit.objective,
                converged: fit.converged,
            })
            .collect();
        Self::new(robot, frames, frames_per_cycle)
    }

    pub fn frames(&self) -> &[TrajectoryFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fit_errors(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.fit_error).collect()
    }

    pub fn converged_fraction(&self) -> f64 {
        self.frames.iter().filter(|f| f.converged).count() as f64 / self.frames.len() as f64
    }

    /// Same frames in reverse order with negated times.
    pub fn reversed(&self) -> Self {
        let frames = self
            .frames
            .iter()
            .rev()
            .map(|f| TrajectoryFrame { time: -f.time, ..f.clone() })
            .collect();
        GaitTrajectory { frames, ..self.clone() }
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean absolute joint change between consecutive frames, in degrees.
pub fn smoothness(traj: &GaitTrajectory) -> f64 {
    smoothness_of(traj.frames.iter().map(|f| f.config.joint_angles.as_slice()))
}

/// [`smoothness`] over raw joint-angle rows (radians).
pub fn smoothness_of<'a, I>(rows: I) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut prev: Option<&[f64]> = None;
    let (mut total, mut count) = (0.0, 0usize);
    for row in rows {
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(row) {
                total += (b - a).abs();
                count += 1;
            }
        }
        prev = Some(row);
    }
    if count == 0 {
        return 0.0;
    }
    (total / count as f64).to_degrees()
}

/// Markers × frames contact grid, `true` when in contact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactPattern {
    marker_count: usize,
    frame_count: usize,
    cells: Vec<bool>,
}

impl ContactPattern {
    /// Builds from per-frame marker heights. Each frame must hold
    /// `marker_count` heights.
    pub fn from_heights(marker_count: usize, heights: &[Vec<f64>]) -> Result<Self> {
        let mut cells = alloc::vec![false; marker_count * heights.len()];
        for (k, frame) in heights.iter().enumerate() {
            if frame.len() != marker_count {
                return Err(Error::DimensionMismatch { expected: marker_count, found: frame.len() });
            }
            let mean = frame.iter().sum::<f64>() / marker_count as f64;
            for (m, z) in frame.iter().enumerate() {
                // ties are not contact
                cells[m * heights.len() + k] = *z < mean;
            }
        }
        Ok(ContactPattern { marker_count, frame_count: heights.len(), cells })
    }

    pub fn from_cells(marker_count: usize, frame_count: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != marker_count * frame_count {
            return Err(Error::DimensionMismatch { expected: marker_count * frame_count, found: cells.len() });
        }
        Ok(ContactPattern { marker_count, frame_count, cells })
    }

    pub fn marker_count(&self) -> usize {
        self.marker_count
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn get(&self, marker: usize, frame: usize) -> bool {
        self.cells[marker * self.frame_count + frame]
    }

    pub fn row(&self, marker: usize) -> &[bool] {
        &self.cells[marker * self.frame_count..(marker + 1) * self.frame_count]
    }

    pub fn column(&self, frame: usize) -> Vec<bool> {
        (0..self.marker_count).map(|m| self.get(m, frame)).collect()
    }

    pub fn complement(&self) -> Self {
        ContactPattern { cells: self.cells.iter().map(|c| !c).collect(), ..self.clone() }
    }
}

/// Arc positions of `count` evenly spaced markers on a body of `length`.
pub fn marker_arcs(count: usize, length: f64) -> Vec<f64> {
    (0..count).map(|m| (m as f64 + 0.5) / count as f64 * length).collect()
}

fn polyline_heights(points: &[Vec3], arcs: &[f64]) -> Vec<f64> {
    arcs.iter().map(|&s| crate::geometry::polyline_point_at(points, s).z).collect()
}

/// Contact grid of a fitted trajectory, markers placed along the chain.
pub fn contact_pattern(traj: &GaitTrajectory, marker_count: usize) -> ContactPattern {
    let arcs = marker_arcs(marker_count, traj.robot.body_length());
    let heights: Vec<Vec<f64>> =
        traj.frames.iter().map(|f| polyline_heights(&f.workspace.points, &arcs)).collect();
    ContactPattern::from_heights(marker_count, &heights).expect("marker count fixed above")
}

/// Contact grid of the desired curves themselves, markers placed at the same
/// arc positions along each rescaled curve.
pub fn desired_contact_pattern(
    params: &GaitParams,
    robot: &RobotModel,
    times: &[f64],
    marker_count: usize,
) -> Result<ContactPattern> {
    let arcs = marker_arcs(marker_count, robot.body_length());
    let mut heights = Vec::with_capacity(times.len());
    for &t in times {
        let curve = params.at(t);
        let rescaled = RescaledCurve::new(&curve, robot.body_length())?;
        heights.push(arcs.iter().map(|&s| rescaled.point_at_arclength(s).z).collect());
    }
    ContactPattern::from_heights(marker_count, &heights)
}

/// Percentage of matching cells.
pub fn pattern_similarity(a: &ContactPattern, b: &ContactPattern) -> Result<f64> {
    if a.marker_count != b.marker_count {
        return Err(Error::DimensionMismatch { expected: a.marker_count, found: b.marker_count });
    }
    if a.frame_count != b.frame_count {
        return Err(Error::DimensionMismatch { expected: a.frame_count, found: b.frame_count });
    }
    if a.cells.is_empty() {
        return Ok(100.0);
    }
    let same = a.cells.iter().zip(&b.cells).filter(|(x, y)| x == y).count();
    Ok(100.0 * same as f64 / a.cells.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    /// Warm-started optimiser.
    Reconstructor,
    /// Sinusoidal joint law.
    Baseline,
    /// Optimiser seeded independently per frame.
    ColdStart,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Reconstructor => "reconstructor",
            Method::Baseline => "baseline",
            Method::ColdStart => "cold_start",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct ReportRecord {
    pub gait: String,
    pub method: Method,
    pub f_hz: f64,
    pub mean_D_bl2: f64,
    pub std_D_bl2: f64,
    pub smoothness_deg: f64,
    pub csps_percent: f64,
    pub converged_fraction: f64,
}

/// Everything needed to run one gait family through a set of methods.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitSpec {
    pub name: String,
    pub params: GaitParams,
    pub robot: RobotModel,
    pub frames_per_cycle: usize,
    pub cycles: usize,
    /// Frequency at which `frames_per_cycle` frames span one cycle.
    pub reference_freq: f64,
    pub settings: SolverSettings,
    pub marker_count: usize,
    pub methods: Vec<Method>,
    /// Seed of the cold-start perturbations.
    pub seed: u64,
}

impl GaitSpec {
    pub fn new(name: &str, params: GaitParams, robot: RobotModel) -> Self {
        GaitSpec {
            name: String::from(name),
            params,
            robot,
            frames_per_cycle: DEFAULT_FRAMES_PER_CYCLE,
            cycles: 1,
            reference_freq: 1.0,
            settings: SolverSettings::default(),
            marker_count: DEFAULT_MARKERS,
            methods: alloc::vec![Method::Reconstructor, Method::Baseline],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.robot.validate()?;
        self.settings.validate()?;
        if self.frames_per_cycle < 2 {
            return Err(Error::InvalidParameter { name: "frames_per_cycle", reason: "must be >= 2" });
        }
        if self.cycles < 1 {
            return Err(Error::InvalidParameter { name: "cycles", reason: "must be >= 1" });
        }
        if !(self.reference_freq > 0.0) || !self.reference_freq.is_finite() {
            return Err(Error::InvalidParameter { name: "reference_freq", reason: "must be finite and > 0" });
        }
        if self.marker_count < 1 {
            return Err(Error::InvalidParameter { name: "marker_count", reason: "must be >= 1" });
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter { name: "methods", reason: "must not be empty" });
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        frame_times(self.frames_per_cycle, self.cycles, self.reference_freq)
    }

    /// Equal-arclength samples of every frame at frequency `f`.
    pub fn frames(&self, f: f64) -> Result<Vec<CurveSamples>> {
        let params = self.params.with_frequency(f);
        self.times().iter().map(|&t| sample_equal_arclength(&params.at(t), &self.robot)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub trajectory: GaitTrajectory,
    pub contact: ContactPattern,
    pub record: ReportRecord,
}

/// All methods at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRun {
    pub f_hz: f64,
    pub samples: Vec<CurveSamples>,
    pub desired_contact: ContactPattern,
    pub runs: Vec<MethodRun>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub gait: String,
    pub frequencies: Vec<FrequencyRun>,
}

impl ComparisonReport {
    pub fn records(&self) -> Vec<ReportRecord> {
        self.frequencies.iter().flat_map(|f| f.runs.iter().map(|r| r.record.clone())).collect()
    }
}

/// Runs every method of `spec` at frequency `f`.
pub fn run_frequency(spec: &GaitSpec, f: f64) -> Result<FrequencyRun> {
    spec.validate()?;
    let params = spec.params.with_frequency(f);
    params.validate()?;
    let times = spec.times();
    let samples = spec.frames(f)?;
    let desired = desired_contact_pattern(&params, &spec.robot, &times, spec.marker_count)?;
    let mut runs = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let fits = match method {
            Method::Reconstructor => fit_sequence(&spec.robot, &samples, &spec.settings)?,
            Method::Baseline => {
                let law = fit_joint_law(&params, &spec.robot)?;
                baseline_sequence(&law, &spec.robot, &samples, &times)?
            }
            Method::ColdStart => fit_sequence_coldstart(&spec.robot, &samples, &spec.settings, spec.seed)?,
        };
        let trajectory = GaitTrajectory::from_fits(spec.robot, &times, fits, spec.frames_per_cycle)?;
        let contact = contact_pattern(&trajectory, spec.marker_count);
        let (mean, std) = mean_std(&trajectory.fit_errors());
        let record = ReportRecord {
            gait: spec.name.clone(),
            method,
            f_hz: f,
            mean_D_bl2: mean,
            std_D_bl2: std,
            smoothness_deg: smoothness(&trajectory),
            csps_percent: pattern_similarity(&contact, &desired)?,
            converged_fraction: trajectory.converged_fraction(),
        };
        runs.push(MethodRun { method, trajectory, contact, record });
    }
    Ok(FrequencyRun { f_hz: f, samples, desired_contact: desired, runs })
}

/// Runs every method at every frequency, in order.
pub fn compare_methods(spec: &GaitSpec, frequencies: &[f64]) -> Result<ComparisonReport> {
    if frequencies.is_empty() {
        return Err(Error::InvalidParameter { name: "frequencies", reason: "must not be empty" });
    }
    let runs = frequencies.iter().map(|&f| run_frequency(spec, f)).collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { gait: spec.name.clone(), frequencies: runs })
}
