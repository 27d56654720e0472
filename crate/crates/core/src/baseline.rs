//! Per-joint sinusoid baseline and a cold-start ablation of the reconstructor.
//!
//! The baseline splits the 3D curve into its horizontal (`xy`) and vertical
//! (`xz`) projections and drives yaw and pitch joints with travelling sine
//! waves. Spatial frequency maps to a per-joint phase step `ω·l`, so joints of
//! the same axis (spaced `2l`) advance by `ω·2l`. Each amplitude is a 1D
//! least-squares fit of a planar chain to the matching projection at `t = 0`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{sample_equal_arclength, CurveSamples, GaitParams, SpaceCurve};
use crate::error::{Error, Result};
use crate::geometry::{centroid, kabsch, Rot3, Vec3};
use crate::kinematics::{
    constraint_residuals, forward_kinematics, Configuration, JointAxis, RobotModel,
    WorkspaceSolution,
};
use crate::reconstruct::{fit_frame, objective, FitResult, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SinusoidJointLaw {
    pub alpha_yaw: f64,
    pub alpha_pitch: f64,
    /// Phase step per joint index (rad).
    pub spatial_freq_yaw: f64,
    pub spatial_freq_pitch: f64,
    pub temporal_freq: f64,
    pub phase_yaw: f64,
    pub phase_pitch: f64,
    /// Planar fit cost at the chosen amplitudes (BL²).
    pub yaw_fit_residual: f64,
    pub pitch_fit_residual: f64,
}

type Vec2 = Vector2<f64>;

/// Bend of joint `k` about its canonical actuator axis (`+Z` yaw, `+Y` pitch).
fn physical_bend(law: &SinusoidJointLaw, axis: JointAxis, k: usize, t: f64) -> f64 {
    let wave = law.temporal_freq * t;
    match axis {
        JointAxis::Yaw => {
            law.alpha_yaw * (law.spatial_freq_yaw * k as f64 + wave + law.phase_yaw).sin()
        }
        JointAxis::Pitch => {
            law.alpha_pitch * (law.spatial_freq_pitch * k as f64 + wave + law.phase_pitch).sin()
        }
    }
}

/// Joint angles at time `t`; the base pose is identity at the origin.
pub fn eval_joint_law(law: &SinusoidJointLaw, robot: &RobotModel, t: f64) -> Configuration {
    let mut config = Configuration::zero(robot.joints);
    for (k, theta) in config.joint_angles.iter_mut().enumerate() {
        *theta = robot.axis_sign(k) * physical_bend(law, robot.axis(k), k, t);
    }
    config
}

/// Planar chain bending only at joints of `axis`, heading `+x`.
fn planar_chain(law: &SinusoidJointLaw, robot: &RobotModel, axis: JointAxis) -> Vec<Vec2> {
    let l = robot.link_length;
    let mut heading = 0.0;
    let mut p = Vec2::zeros();
    let mut out = Vec::with_capacity(robot.point_count());
    out.push(p);
    p += Vec2::new(l, 0.0);
    out.push(p);
    for k in 0..robot.joints {
        if robot.axis(k) == axis {
            let bend = physical_bend(law, axis, k, 0.0);
            // yaw turns x towards +y; positive pitch turns x towards −z
            heading += match axis {
                JointAxis::Yaw => bend,
                JointAxis::Pitch => -bend,
            };
        }
        p += Vec2::new(heading.cos(), heading.sin()) * l;
        out.push(p);
    }
    out
}

/// Cost of the best 2D rigid alignment of `chain` onto `target`.
fn procrustes_2d(chain: &[Vec2], target: &[Vec2]) -> f64 {
    let m = chain.len() as f64;
    let ca = chain.iter().fold(Vec2::zeros(), |a, p| a + p) / m;
    let cb = target.iter().fold(Vec2::zeros(), |a, p| a + p) / m;
    let (mut dot, mut cross) = (0.0, 0.0);
    for (p, q) in chain.iter().zip(target) {
        let (a, b) = (p - ca, q - cb);
        dot += a.dot(&b);
        cross += a.x * b.y - a.y * b.x;
    }
    let angle = cross.atan2(dot);
    let (s, c) = angle.sin_cos();
    chain
        .iter()
        .zip(target)
        .map(|(p, q)| {
            let a = p - ca;
            let rotated = Vec2::new(c * a.x - s * a.y, s * a.x + c * a.y);
            (rotated - (q - cb)).norm_squared()
        })
        .sum()
}

const GOLDEN_TOL: f64 = 1e-8;

/// Minimiser of a unimodal function on `[lo, hi]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > GOLDEN_TOL {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Planar sub-curve of a 3D curve: `xy` for yaw, `xz` for pitch.
struct Projection<'a, C: SpaceCurve> {
    curve: &'a C,
    axis: JointAxis,
}

impl<C: SpaceCurve> Projection<'_, C> {
    fn flatten(&self, p: Vec3) -> Vec3 {
        match self.axis {
            JointAxis::Yaw => Vec3::new(p.x, p.y, 0.0),
            JointAxis::Pitch => Vec3::new(p.x, 0.0, p.z),
        }
    }
}

impl<C: SpaceCurve> SpaceCurve for Projection<'_, C> {
    fn point(&self, x: f64) -> Vec3 {
        self.flatten(self.curve.point(x))
    }

    fn tangent(&self, x: f64) -> Option<Vec3> {
        self.curve.tangent(x).map(|t| self.flatten(t))
    }
}

/// The projected sub-curve rescaled to one body length and sampled like a
/// backbone of its own.
fn projected_samples<C: SpaceCurve>(curve: &C, axis: JointAxis, robot: &RobotModel) -> Result<Vec<Vec2>> {
    let samples = sample_equal_arclength(&Projection { curve, axis }, robot)?;
    Ok(samples
        .points
        .iter()
        .map(|p| match axis {
            JointAxis::Yaw => Vec2::new(p.x, p.y),
            JointAxis::Pitch => Vec2::new(p.x, p.z),
        })
        .collect())
}

/// Fits joint-wave amplitudes to the horizontal and vertical projections of
/// the gait curve at `t = 0`, each rescaled to one body length.
pub fn fit_joint_law(params: &GaitParams, robot: &RobotModel) -> Result<SinusoidJointLaw> {
    params.validate()?;
    robot.validate()?;
    let curve = params.at(0.0);
    let l = robot.link_length;
    let mut law = SinusoidJointLaw {
        alpha_yaw: 0.0,
        alpha_pitch: 0.0,
        spatial_freq_yaw: params.omega_y * l,
        spatial_freq_pitch: params.omega_z * l,
        temporal_freq: params.temporal_freq,
        // joint k sits one link behind the head; horizontal curvature has the
        // opposite sign of the sine, vertical bending is taken along it
        phase_yaw: params.omega_y * l + PI,
        phase_pitch: params.omega_z * l + params.phase,
        yaw_fit_residual: 0.0,
        pitch_fit_residual: 0.0,
    };
    let horizontal = projected_samples(&curve, JointAxis::Yaw, robot)?;
    let vertical = projected_samples(&curve, JointAxis::Pitch, robot)?;

    for axis in [JointAxis::Yaw, JointAxis::Pitch] {
        let target = match axis {
            JointAxis::Yaw => &horizontal,
            JointAxis::Pitch => &vertical,
        };
        let cost = |alpha: f64| {
            let mut trial = law;
            match axis {
                JointAxis::Yaw => trial.alpha_yaw = alpha,
                JointAxis::Pitch => trial.alpha_pitch = alpha,
            }
            procrustes_2d(&planar_chain(&trial, robot, axis), target)
        };
        let mut alpha = golden_section(cost, 0.0, robot.joint_limit);
        let mut residual = cost(alpha);
        if cost(0.0) <= residual {
            alpha = 0.0;
            residual = cost(0.0);
        }
        match axis {
            JointAxis::Yaw => {
                law.alpha_yaw = alpha;
                law.yaw_fit_residual = residual;
            }
            JointAxis::Pitch => {
                law.alpha_pitch = alpha;
                law.pitch_fit_residual = residual;
            }
        }
    }
    Ok(law)
}

/// Places `config`'s shape on the samples with the optimal rotation and
/// translation (the base pose is free for the baseline).
pub fn place_on_samples(
    robot: &RobotModel,
    config: &Configuration,
    samples: &CurveSamples,
) -> (Configuration, WorkspaceSolution) {
    let shape = forward_kinematics(robot, config);
    let shape_centroid = centroid(&shape.points);
    let target_centroid = centroid(&samples.points);
    let a: Vec<Vec3> = shape.points.iter().map(|p| p - shape_centroid).collect();
    let b: Vec<Vec3> = samples.points.iter().map(|p| p - target_centroid).collect();
    let rotation: Rot3 = kabsch(&a, &b);
    let translation: Vector3<f64> = target_centroid - rotation * shape_centroid;
    let placed = shape.transformed(&rotation, &translation);
    let config = Configuration {
        base_position: placed.points[0],
        base_orientation: rotation * config.base_orientation,
        joint_angles: config.joint_angles.clone(),
    };
    (config, placed)
}

/// Baseline configurations for a frame sequence at the given times.
pub fn baseline_sequence(
    law: &SinusoidJointLaw,
    robot: &RobotModel,
    frames: &[CurveSamples],
    times: &[f64],
) -> Result<Vec<FitResult>> {
    if frames.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: frames.len(), found: times.len() });
    }
    Ok(frames
        .iter()
        .zip(times)
        .map(|(samples, &t)| {
            let (config, workspace) = place_on_samples(robot, &eval_joint_law(law, robot, t), samples);
            let d = objective(samples, &workspace);
            FitResult {
                residuals: constraint_residuals(robot, &workspace, samples),
                config,
                workspace,
                objective: d,
                iterations: 0,
                converged: true,
                history: alloc::vec![d],
            }
        })
        .collect())
}

/// Half-width of the uniform joint perturbation around the zero seed.
pub const COLD_START_PERTURBATION: f64 = 0.2;

/// Solves every frame independently from a randomly perturbed zero seed.
pub fn fit_sequence_coldstart(
    robot: &RobotModel,
    frames: &[CurveSamples],
    settings: &SolverSettings,
    rng_seed: u64,
) -> Result<Vec<FitResult>> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter { name: "frames", reason: "need at least one frame" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    frames
        .iter()
        .map(|samples| {
            let mut seed = Configuration::zero(robot.joints);
            for t in &mut seed.joint_angles {
                let bound = COLD_START_PERTURBATION.min(robot.joint_limit);
                *t = rng.random_range(-bound..=bound);
            }
            fit_frame(robot, samples, settings, &seed)
        })
        .collect()
}
