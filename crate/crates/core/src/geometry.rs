//! Small 3D helpers shared by the kinematics, solver and baseline code.

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_traits::Float;

pub type Vec3 = Vector3<f64>;
pub type Rot3 = Rotation3<f64>;

/// Exponential map from a rotation vector (axis times angle) to a rotation.
pub fn exp_so3(omega: &Vec3) -> Rot3 {
    Rot3::from_scaled_axis(*omega)
}

/// Rotation vector of `rot` with norm in `[0, π]`.
pub fn log_so3(rot: &Rot3) -> Vec3 {
    rot.scaled_axis()
}

fn hat(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Right Jacobian of SO(3): `exp(ω + δ) ≈ exp(ω)·exp(J_r(ω)·δ)`.
pub fn right_jacobian_so3(omega: &Vec3) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let w = hat(omega);
    let w2 = w * w;
    let (a, b) = if theta2 < 1e-8 {
        // Taylor terms of (1 - cos θ)/θ² and (θ - sin θ)/θ³.
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        let theta = theta2.sqrt();
        ((1.0 - theta.cos()) / theta2, (theta - theta.sin()) / (theta2 * theta))
    };
    Matrix3::identity() - w * a + w2 * b
}

/// Optimal rotation `R` minimising `Σ‖R·a_i − b_i‖²` for centred point sets.
///
/// Degenerate (rank-deficient) inputs still return a proper rotation.
pub fn kabsch(a: &[Vec3], b: &[Vec3]) -> Rot3 {
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += q * p.transpose();
    }
    let svd = h.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Rot3::identity(),
    };
    let d = (u * v_t).determinant();
    let corr = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d.signum()));
    Rot3::from_matrix_unchecked(u * corr * v_t)
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    if points.is_empty() {
        return Vec3::zeros();
    }
    points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64
}

/// Point at arc length `s` along a polyline; clamps to the ends.
pub fn polyline_point_at(points: &[Vec3], s: f64) -> Vec3 {
    let mut remaining = s.max(0.0);
    for w in points.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if remaining <= seg && seg > 0.0 {
            return w[0] + (w[1] - w[0]) * (remaining / seg);
        }
        remaining -= seg;
    }
    *points.last().expect("polyline has at least one point")
}
