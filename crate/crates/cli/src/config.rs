//! Experiment configuration files (TOML).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snakefit_core::analysis::{GaitSpec, Method};
use snakefit_core::{CurveFamily, Formulation, GaitParams, JointAxis, RobotModel, SolverSettings};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisPattern {
    PitchFirst,
    YawFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub joints: usize,
    /// Defaults to a unit body length, `1 / (joints + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_length: Option<f64>,
    #[serde(default = "default_axis_pattern")]
    pub axis_pattern: AxisPattern,
    #[serde(default = "default_joint_limit")]
    pub joint_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitConfig {
    pub family: CurveFamily,
    pub amplitude_y: f64,
    pub amplitude_z: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub phase: f64,
    #[serde(default = "default_gamma")]
    pub sigmoid_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    #[serde(default = "default_constraint_tolerance")]
    pub constraint_tolerance: f64,
    #[serde(default = "default_formulation")]
    pub formulation: Formulation,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: default_max_iterations(),
            gradient_tolerance: default_gradient_tolerance(),
            constraint_tolerance: default_constraint_tolerance(),
            formulation: default_formulation(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Gait label used in file names and reports.
    pub name: String,
    /// Temporal frequencies to sweep (rad/s).
    pub frequencies: Vec<f64>,
    #[serde(default = "default_frames_per_cycle")]
    pub frames_per_cycle: usize,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    /// Frequency at which `frames_per_cycle` frames span one cycle.
    #[serde(default = "default_reference_freq")]
    pub reference_freq: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_marker_count")]
    pub marker_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Exit with status 2 when more optimiser frames than this fail to converge.
    #[serde(default = "default_max_nonconverged")]
    pub max_nonconverged_fraction: f64,
    pub robot: RobotConfig,
    pub gait: GaitConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_axis_pattern() -> AxisPattern {
    AxisPattern::PitchFirst
}
fn default_joint_limit() -> f64 {
    FRAC_PI_2
}
fn default_gamma() -> f64 {
    4.0
}
fn default_max_iterations() -> usize {
    500
}
fn default_gradient_tolerance() -> f64 {
    1e-8
}
fn default_constraint_tolerance() -> f64 {
    1e-6
}
fn default_formulation() -> Formulation {
    Formulation::Reduced
}
fn default_frames_per_cycle() -> usize {
    200
}
fn default_cycles() -> usize {
    1
}
fn default_reference_freq() -> f64 {
    1.0
}
fn default_methods() -> Vec<Method> {
    vec![Method::Reconstructor, Method::Baseline]
}
fn default_marker_count() -> usize {
    8
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_max_nonconverged() -> f64 {
    0.01
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and > 0 (got {v})")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and >= 0 (got {v})")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite (got {v})")))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(invalid("name", "use letters, digits, `_` or `-`"));
        }
        if self.frequencies.is_empty() {
            return Err(invalid("frequencies", "must not be empty"));
        }
        for f in &self.frequencies {
            positive("frequencies", *f)?;
        }
        if self.frames_per_cycle < 2 {
            return Err(invalid("frames_per_cycle", "must be >= 2"));
        }
        if self.cycles < 1 {
            return Err(invalid("cycles", "must be >= 1"));
        }
        positive("reference_freq", self.reference_freq)?;
        if self.methods.is_empty() {
            return Err(invalid("methods", "must not be empty"));
        }
        if self.marker_count < 1 {
            return Err(invalid("marker_count", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.max_nonconverged_fraction) {
            return Err(invalid("max_nonconverged_fraction", "must lie in [0, 1]"));
        }

        if self.robot.joints < 1 {
            return Err(invalid("robot.joints", "must be >= 1"));
        }
        if let Some(l) = self.robot.link_length {
            positive("robot.link_length", l)?;
        }
        positive("robot.joint_limit", self.robot.joint_limit)?;
        if self.robot.joint_limit > std::f64::consts::PI {
            return Err(invalid("robot.joint_limit", "must be <= pi"));
        }

        non_negative("gait.amplitude_y", self.gait.amplitude_y)?;
        non_negative("gait.amplitude_z", self.gait.amplitude_z)?;
        finite("gait.omega_y", self.gait.omega_y)?;
        finite("gait.omega_z", self.gait.omega_z)?;
        finite("gait.phase", self.gait.phase)?;
        positive("gait.sigmoid_gamma", self.gait.sigmoid_gamma)?;

        if self.solver.max_iterations < 1 {
            return Err(invalid("solver.max_iterations", "must be >= 1"));
        }
        positive("solver.gradient_tolerance", self.solver.gradient_tolerance)?;
        positive("solver.constraint_tolerance", self.solver.constraint_tolerance)?;
        Ok(())
    }

    pub fn robot(&self) -> RobotModel {
        let mut robot = RobotModel::new(self.robot.joints).with_joint_limit(self.robot.joint_limit);
        if let Some(l) = self.robot.link_length {
            robot = robot.with_link_length(l);
        }
        match self.robot.axis_pattern {
            AxisPattern::PitchFirst => robot.with_first_axis(JointAxis::Pitch),
            AxisPattern::YawFirst => robot.with_first_axis(JointAxis::Yaw),
        }
    }

    /// Gait parameters at the first sweep frequency.
    pub fn gait_params(&self) -> GaitParams {
        GaitParams {
            amplitude_y: self.gait.amplitude_y,
            amplitude_z: self.gait.amplitude_z,
            omega_y: self.gait.omega_y,
            omega_z: self.gait.omega_z,
            temporal_freq: self.frequencies[0],
            phase: self.gait.phase,
            sigmoid_gamma: self.gait.sigmoid_gamma,
            family: self.gait.family,
        }
    }

    pub fn gait_spec(&self) -> GaitSpec {
        let mut spec = GaitSpec::new(&self.name, self.gait_params(), self.robot());
        spec.frames_per_cycle = self.frames_per_cycle;
        spec.cycles = self.cycles;
        spec.reference_freq = self.reference_freq;
        spec.methods = self.methods.clone();
        spec.marker_count = self.marker_count;
        spec.seed = self.seed;
        spec.settings = SolverSettings {
            max_iterations: self.solver.max_iterations,
            gradient_tolerance: self.solver.gradient_tolerance,
            constraint_tolerance: self.solver.constraint_tolerance,
            formulation: self.solver.formulation,
            ..SolverSettings::default()
        };
        spec
    }

    /// Copy with every defaulted value written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.robot.link_length = Some(self.robot().link_length);
        out
    }
}
