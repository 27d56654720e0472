//! Objective over `(δ, θ)` where the base orientation is `R_seed·exp(δ)`.
//!
//! Constraints (unit normals, orthogonal consecutive planes, links along the
//! normal cross products) hold by construction through forward kinematics;
//! the centroid constraint is met by translating every candidate chain onto
//! the sample centroid, which is the optimal translation for a fixed shape.

use alloc::vec::Vec;

use crate::geometry::{centroid, exp_so3, right_jacobian_so3, Rot3, Vec3};
use crate::kinematics::{forward_kinematics, Configuration, RobotModel, WorkspaceSolution};

pub struct ReducedObjective<'a> {
    robot: &'a RobotModel,
    targets: &'a [Vec3],
    target_centroid: Vec3,
    seed_orientation: Rot3,
}

impl<'a> ReducedObjective<'a> {
    pub fn new(robot: &'a RobotModel, targets: &'a [Vec3], seed_orientation: Rot3) -> Self {
        ReducedObjective { robot, targets, target_centroid: centroid(targets), seed_orientation }
    }

    pub fn dimension(&self) -> usize {
        3 + self.robot.joints
    }

    pub fn orientation(&self, x: &[f64]) -> Rot3 {
        self.seed_orientation * exp_so3(&Vec3::new(x[0], x[1], x[2]))
    }

    /// Centroid-aligned chain for the reduced variables `x`.
    pub fn chain(&self, x: &[f64]) -> WorkspaceSolution {
        let config = Configuration {
            base_position: Vec3::zeros(),
            base_orientation: self.orientation(x),
            joint_angles: x[3..].to_vec(),
        };
        let shape = forward_kinematics(self.robot, &config);
        let offset = self.target_centroid - centroid(&shape.points);
        shape.translated(&offset)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let chain = self.chain(x);
        chain.points.iter().zip(self.targets).map(|(p, c)| (p - c).norm_squared()).sum()
    }

    /// Objective value; writes the exact gradient into `grad`.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let chain = self.chain(x);
        let pts = &chain.points;
        // dF/dC'_i; the optimal translation makes these sum to zero.
        let g: Vec<Vec3> = pts.iter().zip(self.targets).map(|(p, c)| (p - c) * 2.0).collect();
        let value = pts.iter().zip(self.targets).map(|(p, c)| (p - c).norm_squared()).sum();

        // Suffix sums of C'_i × g_i and g_i.
        let count = pts.len();
        let mut moment = Vec3::zeros();
        let mut force = Vec3::zeros();
        let mut moments = alloc::vec![Vec3::zeros(); count + 1];
        let mut forces = alloc::vec![Vec3::zeros(); count + 1];
        for i in (0..count).rev() {
            moment += pts[i].cross(&g[i]);
            force += g[i];
            moments[i] = moment;
            forces[i] = force;
        }

        // Joint k sits at C'_{k+1} and moves C'_{k+2} onwards.
        for (k, n) in chain.normals.iter().enumerate() {
            let pivot = pts[k + 1];
            let torque = moments[k + 2] - pivot.cross(&forces[k + 2]);
            grad[3 + k] = n.dot(&torque);
        }

        let torque = moments[0] - pts[0].cross(&forces[0]);
        let body = self.orientation(x).inverse() * torque;
        let jr = right_jacobian_so3(&Vec3::new(x[0], x[1], x[2]));
        let d = jr.transpose() * body;
        grad[..3].copy_from_slice(d.as_slice());
        value
    }
}
