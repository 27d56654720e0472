//! Alternating pitch/yaw serial chain.
//!
//! Joint `k` (0-based) rotates about a fixed axis `a_k` of the frame of the
//! link that precedes it. Link direction is the local `+x` axis. Consecutive
//! axes satisfy `a_{k+1} = e_x × a_k`, which gives the period-four pattern
//! `+Y, +Z, −Y, −Z` (pitch first) and makes `a_k × a_{k+1} = e_x`, so every
//! interior link is `l·(n_{k} × n_{k+1})` in world coordinates.
//!
//! Joint angles are right-handed about the world normal `n_k = R_k·a_k`.
//! [`RobotModel::axis_sign`] maps them onto the canonical pitch (`+Y`) and
//! yaw (`+Z`) actuator directions.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::Unit;
use num_traits::Float;

use crate::curve::CurveSamples;
use crate::error::{Error, Result};
use crate::geometry::{centroid, Rot3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum JointAxis {
    Pitch,
    Yaw,
}

impl JointAxis {
    pub fn other(self) -> Self {
        match self {
            JointAxis::Pitch => JointAxis::Yaw,
            JointAxis::Yaw => JointAxis::Pitch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotModel {
    pub joints: usize,
    pub link_length: f64,
    /// Axis type of the head joint; the rest alternate.
    pub first_axis: JointAxis,
    /// Symmetric joint travel limit in radians.
    pub joint_limit: f64,
}

impl RobotModel {
    /// `n` joints, unit body length, pitch first, `±π/2` travel.
    pub fn new(joints: usize) -> Self {
        RobotModel {
            joints,
            link_length: 1.0 / (joints as f64 + 1.0),
            first_axis: JointAxis::Pitch,
            joint_limit: FRAC_PI_2,
        }
    }

    pub fn with_link_length(mut self, link_length: f64) -> Self {
        self.link_length = link_length;
        self
    }

    pub fn with_first_axis(mut self, axis: JointAxis) -> Self {
        self.first_axis = axis;
        self
    }

    pub fn with_joint_limit(mut self, limit: f64) -> Self {
        self.joint_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints < 1 {
            return Err(Error::InvalidParameter { name: "joints", reason: "must be >= 1" });
        }
        if !(self.link_length > 0.0 && self.link_length.is_finite()) {
            return Err(Error::InvalidParameter { name: "link_length", reason: "must be > 0" });
        }
        if !(self.joint_limit > 0.0) {
            return Err(Error::InvalidParameter { name: "joint_limit", reason: "must be > 0" });
        }
        Ok(())
    }

    pub fn body_length(&self) -> f64 {
        (self.joints as f64 + 1.0) * self.link_length
    }

    /// Number of points `C'_0 .. C'_{n+1}`.
    pub fn point_count(&self) -> usize {
        self.joints + 2
    }

    pub fn axis(&self, k: usize) -> JointAxis {
        if k.is_multiple_of(2) {
            self.first_axis
        } else {
            self.first_axis.other()
        }
    }

    /// Rotation axis of joint `k` in the frame of the link preceding it.
    pub fn local_axis(&self, k: usize) -> Vec3 {
        let sign = self.axis_sign(k);
        match self.axis(k) {
            JointAxis::Pitch => Vec3::y() * sign,
            JointAxis::Yaw => Vec3::z() * sign,
        }
    }

    /// `+1` when joint `k` turns about `+Y`/`+Z`, `−1` when about `−Y`/`−Z`.
    pub fn axis_sign(&self, k: usize) -> f64 {
        let flip = match self.first_axis {
            JointAxis::Pitch => k % 4 >= 2,
            JointAxis::Yaw => matches!(k % 4, 1 | 2),
        };
        if flip {
            -1.0
        } else {
            1.0
        }
    }
}

/// Base pose plus joint angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub base_position: Vec3,
    /// Orientation of the first link frame.
    pub base_orientation: Rot3,
    pub joint_angles: Vec<f64>,
}

impl Configuration {
    /// Straight chain at the origin, heading `+x`.
    pub fn zero(joints: usize) -> Self {
        Configuration {
            base_position: Vec3::zeros(),
            base_orientation: Rot3::identity(),
            joint_angles: alloc::vec![0.0; joints],
        }
    }

    pub fn within_limits(&self, robot: &RobotModel) -> bool {
        self.joint_angles.len() == robot.joints
            && self.joint_angles.iter().all(|t| t.is_finite() && t.abs() <= robot.joint_limit)
    }
}

/// Joint/endpoint positions and rotation-plane normals.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceSolution {
    /// `C'_0 .. C'_{n+1}`.
    pub points: Vec<Vec3>,
    /// `n_1 .. n_n`.
    pub normals: Vec<Vec3>,
}

impl WorkspaceSolution {
    pub fn links(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.points.windows(2).map(|w| w[1] - w[0])
    }

    /// Applies `p ↦ R·p + t` to every point and `R` to every normal.
    pub fn transformed(&self, rotation: &Rot3, translation: &Vec3) -> Self {
        WorkspaceSolution {
            points: self.points.iter().map(|p| rotation * p + translation).collect(),
            normals: self.normals.iter().map(|n| rotation * n).collect(),
        }
    }

    pub fn translated(&self, offset: &Vec3) -> Self {
        WorkspaceSolution {
            points: self.points.iter().map(|p| p + offset).collect(),
            normals: self.normals.clone(),
        }
    }
}

pub fn forward_kinematics(robot: &RobotModel, config: &Configuration) -> WorkspaceSolution {
    let l = robot.link_length;
    let mut frame = config.base_orientation;
    let mut position = config.base_position;
    let mut points = Vec::with_capacity(robot.point_count());
    let mut normals = Vec::with_capacity(robot.joints);
    points.push(position);
    position += frame * Vec3::x() * l;
    points.push(position);
    for (k, &theta) in config.joint_angles.iter().enumerate() {
        let axis = robot.local_axis(k);
        normals.push(frame * axis);
        frame *= Rot3::from_axis_angle(&Unit::new_unchecked(axis), theta);
        position += frame * Vec3::x() * l;
        points.push(position);
    }
    WorkspaceSolution { points, normals }
}

const MIN_LINK: f64 = 1e-9;

/// Recovers joint angles and base pose from workspace points and normals.
///
/// `θ_k = atan2((j_k × j_{k+1})·n_k, j_k·j_{k+1})`. The base frame is built
/// from the first link and the first normal (orthogonalised).
pub fn joint_angles_from_workspace(
    robot: &RobotModel,
    sol: &WorkspaceSolution,
) -> Result<Configuration> {
    if sol.points.len() != robot.point_count() {
        return Err(Error::DimensionMismatch {
            expected: robot.point_count(),
            found: sol.points.len(),
        });
    }
    if sol.normals.len() != robot.joints {
        return Err(Error::DimensionMismatch { expected: robot.joints, found: sol.normals.len() });
    }
    let links: Vec<Vec3> = sol.links().collect();
    if let Some(index) = links.iter().position(|j| j.norm() < MIN_LINK) {
        return Err(Error::DegenerateLink { index });
    }
    let joint_angles = sol
        .normals
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let (a, b) = (links[k], links[k + 1]);
            a.cross(&b).dot(n).atan2(a.dot(&b))
        })
        .collect();

    let x = links[0].normalize();
    let n0 = sol.normals[0];
    let along = n0 - x * n0.dot(&x);
    if along.norm() < MIN_LINK {
        return Err(Error::DegenerateLink { index: 0 });
    }
    // Column of the base frame that the first joint axis occupies.
    let axis_col = along.normalize() * robot.axis_sign(0);
    let (y, z) = match robot.first_axis {
        JointAxis::Pitch => (axis_col, x.cross(&axis_col)),
        JointAxis::Yaw => (axis_col.cross(&x), axis_col),
    };
    let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
    Ok(Configuration {
        base_position: sol.points[0],
        base_orientation: Rot3::from_matrix_unchecked(m),
        joint_angles,
    })
}

/// Worst violation of each constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    /// `max |‖n_i‖ − 1|`
    pub unit_normal: f64,
    /// `max |n_{i−1}·n_i|`
    pub orthogonality: f64,
    /// `max ‖j_i − l·(n_{i−1} × n_i)‖` over interior links.
    pub interior_links: f64,
    /// Length and in-plane violations of the first and last links; the
    /// in-plane terms are `|j·n| / l`.
    pub end_links: f64,
    /// `‖Σ C'_i − Σ C_i‖`
    pub centroid: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.unit_normal, self.orthogonality, self.interior_links, self.end_links, self.centroid]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn constraint_residuals(
    robot: &RobotModel,
    sol: &WorkspaceSolution,
    samples: &CurveSamples,
) -> ResidualReport {
    let l = robot.link_length;
    let links: Vec<Vec3> = sol.links().collect();
    let n = &sol.normals;
    let unit_normal = n.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    let orthogonality = n.windows(2).map(|w| w[0].dot(&w[1]).abs()).fold(0.0, f64::max);
    let interior_links = (1..n.len())
        .map(|k| (links[k] - n[k - 1].cross(&n[k]) * l).norm())
        .fold(0.0, f64::max);
    let end_links = match (links.first(), links.last(), n.first(), n.last()) {
        (Some(first), Some(last), Some(n_first), Some(n_last)) => [
            (first.norm() - l).abs(),
            first.dot(n_first).abs() / l,
            (last.norm() - l).abs(),
            last.dot(n_last).abs() / l,
        ]
        .into_iter()
        .fold(0.0, f64::max),
        _ => 0.0,
    };
    let count = sol.points.len() as f64;
    let centroid = ((centroid(&sol.points) - centroid(&samples.points)) * count).norm();
    ResidualReport { unit_normal, orthogonality, interior_links, end_links, centroid }
}
