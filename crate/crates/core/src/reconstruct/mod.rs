//! Curve-to-configuration reconstruction.
//!
//! The default [`Formulation::Reduced`] solver optimises the base orientation
//! (as a rotation vector relative to the seed) and the joint angles under box
//! bounds, with the base position fixed in closed form by centroid alignment.
//! [`Formulation::Penalty`] solves the same problem over raw points and
//! normals and exists to cross-check the reduced solver.

mod bfgs;
mod penalty;
mod reduced;

use alloc::vec;
use alloc::vec::Vec;

use crate::curve::CurveSamples;
use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec3};
use crate::kinematics::{
    constraint_residuals, forward_kinematics, joint_angles_from_workspace, Configuration,
    ResidualReport, RobotModel, WorkspaceSolution,
};

pub use reduced::ReducedObjective;

#[derive(Debug, Clone, PartialEq)]
pub enum SeedPolicy {
    ZeroConfig,
    PreviousFrame,
    Explicit(Configuration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Formulation {
    Reduced,
    Penalty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub constraint_tolerance: f64,
    pub seed_policy: SeedPolicy,
    /// Step for finite-difference gradient checks; unused by the solver.
    pub finite_diff_step: f64,
    pub formulation: Formulation,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            constraint_tolerance: 1e-6,
            seed_policy: SeedPolicy::ZeroConfig,
            finite_diff_step: 1e-7,
            formulation: Formulation::Reduced,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter { name: "max_iterations", reason: "must be >= 1" });
        }
        for (name, v) in [
            ("gradient_tolerance", self.gradient_tolerance),
            ("constraint_tolerance", self.constraint_tolerance),
            ("finite_diff_step", self.finite_diff_step),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: "must be > 0" });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub config: Configuration,
    pub workspace: WorkspaceSolution,
    /// Sum of squared sample-to-robot distances (BL²).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: ResidualReport,
    /// Objective after each accepted iteration, seed first.
    pub history: Vec<f64>,
}

/// `Σ ‖C_i − C'_i‖²`.
pub fn objective(samples: &CurveSamples, sol: &WorkspaceSolution) -> f64 {
    samples.points.iter().zip(&sol.points).map(|(c, p)| (c - p).norm_squared()).sum()
}

/// Translates `shape` so its centroid coincides with the samples' centroid,
/// the unique objective-minimising translation for a fixed shape.
pub fn align_centroid(samples: &CurveSamples, shape: &WorkspaceSolution) -> WorkspaceSolution {
    shape.translated(&(centroid(&samples.points) - centroid(&shape.points)))
}

fn check_inputs(robot: &RobotModel, samples: &CurveSamples, seed: &Configuration) -> Result<()> {
    robot.validate()?;
    if samples.len() != robot.point_count() {
        return Err(Error::DimensionMismatch { expected: robot.point_count(), found: samples.len() });
    }
    if seed.joint_angles.len() != robot.joints {
        return Err(Error::InvalidSeed { reason: "joint count does not match the robot" });
    }
    if !seed.within_limits(robot) {
        return Err(Error::InvalidSeed { reason: "joint angle outside the joint limit" });
    }
    Ok(())
}

/// Fits one frame starting from `seed`.
///
/// A result that misses the stopping criteria is still returned, with
/// `converged = false`.
pub fn fit_frame(
    robot: &RobotModel,
    samples: &CurveSamples,
    settings: &SolverSettings,
    seed: &Configuration,
) -> Result<FitResult> {
    settings.validate()?;
    check_inputs(robot, samples, seed)?;
    match settings.formulation {
        Formulation::Reduced => Ok(fit_reduced(robot, samples, settings, seed)),
        Formulation::Penalty => fit_penalty(robot, samples, settings, seed),
    }
}

fn fit_reduced(
    robot: &RobotModel,
    samples: &CurveSamples,
    settings: &SolverSettings,
    seed: &Configuration,
) -> FitResult {
    let problem = ReducedObjective::new(robot, &samples.points, seed.base_orientation);
    let dim = problem.dimension();
    let mut x0 = vec![0.0; dim];
    x0[3..].copy_from_slice(&seed.joint_angles);
    let limit = robot.joint_limit;
    let mut lower = vec![-limit; dim];
    let mut upper = vec![limit; dim];
    for i in 0..3 {
        lower[i] = f64::NEG_INFINITY;
        upper[i] = f64::INFINITY;
    }
    let solver = bfgs::BoxBfgs {
        max_iterations: settings.max_iterations,
        gradient_tolerance: settings.gradient_tolerance,
        stall_tolerance: 1e-14,
        stall_window: 5,
        max_step: 0.5,
    };
    let min = solver.minimize(|x, g| problem.value_and_gradient(x, g), &x0, &lower, &upper);
    let workspace = problem.chain(&min.x);
    let config = Configuration {
        base_position: workspace.points[0],
        base_orientation: problem.orientation(&min.x),
        joint_angles: min.x[3..].to_vec(),
    };
    let residuals = constraint_residuals(robot, &workspace, samples);
    FitResult {
        config,
        objective: objective(samples, &workspace),
        workspace,
        iterations: min.iterations,
        converged: min.converged && residuals.within(settings.constraint_tolerance),
        residuals,
        history: min.history,
    }
}

fn fit_penalty(
    robot: &RobotModel,
    samples: &CurveSamples,
    settings: &SolverSettings,
    seed: &Configuration,
) -> Result<FitResult> {
    let start = align_centroid(samples, &forward_kinematics(robot, seed));
    let solver = penalty::PenaltySolver {
        max_outer: 40,
        max_inner: settings.max_iterations,
        constraint_tolerance: settings.constraint_tolerance * 1e-3,
    };
    let out = solver.solve(robot, &samples.points, &start);
    let config = joint_angles_from_workspace(robot, &out.workspace)?;
    let residuals = constraint_residuals(robot, &out.workspace, samples);
    Ok(FitResult {
        config,
        objective: objective(samples, &out.workspace),
        workspace: out.workspace,
        iterations: out.iterations,
        converged: out.converged && residuals.within(settings.constraint_tolerance),
        residuals,
        history: out.history,
    })
}

/// Fits a chronological sequence, seeding each frame with the previous
/// frame's optimum.
pub fn fit_sequence(
    robot: &RobotModel,
    frames: &[CurveSamples],
    settings: &SolverSettings,
) -> Result<Vec<FitResult>> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter { name: "frames", reason: "need at least one frame" });
    }
    let mut seed = match &settings.seed_policy {
        SeedPolicy::Explicit(config) => config.clone(),
        SeedPolicy::ZeroConfig | SeedPolicy::PreviousFrame => Configuration::zero(robot.joints),
    };
    let mut results = Vec::with_capacity(frames.len());
    for samples in frames {
        let result = fit_frame(robot, samples, settings, &seed)?;
        seed = clamp_to_limits(robot, &result.config);
        results.push(result);
    }
    Ok(results)
}

/// Penalty-mode optima may sit marginally outside the joint limits.
fn clamp_to_limits(robot: &RobotModel, config: &Configuration) -> Configuration {
    let mut seed = config.clone();
    for t in &mut seed.joint_angles {
        *t = t.clamp(-robot.joint_limit, robot.joint_limit);
    }
    seed
}

/// Per-point residual vectors `C'_i − C_i`.
pub fn residual_vectors(samples: &CurveSamples, sol: &WorkspaceSolution) -> Vec<Vec3> {
    samples.points.iter().zip(&sol.points).map(|(c, p)| p - c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exp_so3;
    use approx::assert_relative_eq;

    #[test]
    fn objective_zero_on_match_and_shift() {
        let robot = RobotModel::new(4);
        let sol = forward_kinematics(&robot, &Configuration::zero(4));
        let samples = CurveSamples::from_points(sol.points.clone(), robot.link_length);
        assert_eq!(objective(&samples, &sol), 0.0);
        let d = 0.03;
        let shifted = sol.translated(&Vec3::new(d, 0.0, 0.0));
        assert_relative_eq!(objective(&samples, &shifted), 6.0 * d * d, epsilon = 1e-15);
    }

    #[test]
    fn align_centroid_identity_and_single_point() {
        let robot = RobotModel::new(3);
        let sol = forward_kinematics(&robot, &Configuration::zero(3));
        let samples = CurveSamples::from_points(sol.points.clone(), robot.link_length);
        assert_eq!(align_centroid(&samples, &sol), sol);

        let target = CurveSamples::from_points(vec![Vec3::new(1.0, 2.0, 3.0)], 1.0);
        let single = WorkspaceSolution { points: vec![Vec3::zeros()], normals: vec![] };
        assert_eq!(align_centroid(&target, &single).points[0], Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn straight_samples_fit_exactly() {
        let robot = RobotModel::new(6);
        let points = (0..8).map(|i| Vec3::new(0.2, 0.1, 0.0) + Vec3::y() * (i as f64 / 7.0)).collect();
        let samples = CurveSamples::from_points(points, robot.link_length);
        let fit =
            fit_frame(&robot, &samples, &SolverSettings::default(), &Configuration::zero(6)).unwrap();
        assert!(fit.objective <= 1e-12, "D = {}", fit.objective);
        assert!(fit.joint_angles_max() < 1e-5);
        assert!(fit.converged);
    }

    #[test]
    fn invalid_seed_rejected() {
        let robot = RobotModel::new(2);
        let samples = CurveSamples::from_points(vec![Vec3::zeros(); 4], robot.link_length);
        let mut seed = Configuration::zero(2);
        seed.joint_angles[1] = 2.0;
        assert!(matches!(
            fit_frame(&robot, &samples, &SolverSettings::default(), &seed),
            Err(Error::InvalidSeed { .. })
        ));
        let short = CurveSamples::from_points(vec![Vec3::zeros(); 3], robot.link_length);
        assert!(matches!(
            fit_frame(&robot, &short, &SolverSettings::default(), &Configuration::zero(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn recovers_reachable_shape() {
        let robot = RobotModel::new(5);
        let truth = Configuration {
            base_position: Vec3::new(0.3, -0.1, 0.05),
            base_orientation: exp_so3(&Vec3::new(0.1, 0.2, -0.15)),
            joint_angles: vec![0.3, -0.2, 0.4, 0.1, -0.35],
        };
        let sol = forward_kinematics(&robot, &truth);
        let samples = CurveSamples::from_points(sol.points, robot.link_length);
        let fit =
            fit_frame(&robot, &samples, &SolverSettings::default(), &Configuration::zero(5)).unwrap();
        assert!(fit.objective < 1e-10, "D = {}", fit.objective);
        for (a, b) in fit.config.joint_angles.iter().zip(&truth.joint_angles) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_frame_sequence_matches_fit_frame() {
        let robot = RobotModel::new(4);
        let mut config = Configuration::zero(4);
        config.joint_angles = vec![0.2, 0.5, -0.3, 0.1];
        let samples =
            CurveSamples::from_points(forward_kinematics(&robot, &config).points, robot.link_length);
        let settings = SolverSettings::default();
        let seq = fit_sequence(&robot, core::slice::from_ref(&samples), &settings).unwrap();
        let single = fit_frame(&robot, &samples, &settings, &Configuration::zero(4)).unwrap();
        assert_eq!(seq, vec![single]);
    }

    impl FitResult {
        fn joint_angles_max(&self) -> f64 {
            self.config.joint_angles.iter().fold(0.0, |m, t| f64::max(m, t.abs()))
        }
    }
}
