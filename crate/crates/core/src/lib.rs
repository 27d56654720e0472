//! Reconstruction of continuous 3D backbone curves on twist-free snake robots
//! built from alternating single-axis pitch and yaw joints.
//!
//! The crate is `no_std` (with `alloc`). IO, configuration files and the
//! command line front end live in the `snakefit` crate.
#![no_std]
// `num_traits::Float` is shadowed by inherent float methods whenever std ends
// up in the dependency graph (tests, or num-traits/std via another crate)
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod baseline;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod reconstruct;

pub use analysis::{
    compare_methods, contact_pattern, desired_contact_pattern, pattern_similarity, smoothness,
    ComparisonReport, ContactPattern, GaitSpec, GaitTrajectory, Method, ReportRecord,
};
pub use baseline::{eval_joint_law, fit_joint_law, fit_sequence_coldstart, SinusoidJointLaw};
pub use curve::{
    arc_length, frame_times, sample_equal_arclength, BackboneCurve, CurveFamily, CurveSamples,
    GaitParams, SpaceCurve,
};
pub use error::{Error, Result};
pub use geometry::{Rot3, Vec3};
pub use kinematics::{
    constraint_residuals, forward_kinematics, joint_angles_from_workspace, Configuration,
    JointAxis, ResidualReport, RobotModel, WorkspaceSolution,
};
pub use reconstruct::{
    align_centroid, fit_frame, fit_sequence, objective, FitResult, Formulation, SeedPolicy,
    SolverSettings,
};
