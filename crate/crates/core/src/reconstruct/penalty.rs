//! Raw formulation: points and normals as free variables, every geometric
//! constraint enforced through an augmented Lagrangian. Each subproblem is a
//! nonlinear least-squares problem solved by Levenberg–Marquardt.
//!
//! Joint limits enter as `j_k·j_{k+1} ≥ l²·cos θ_max`, which for links of
//! length `l` turning about a perpendicular axis is the same as `|θ_k| ≤ θ_max`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::geometry::Vec3;
use crate::kinematics::{RobotModel, WorkspaceSolution};

pub(crate) struct PenaltySolution {
    pub workspace: WorkspaceSolution,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

struct Constraint {
    value: f64,
    grad: Vec<(usize, f64)>,
    /// `value ≤ 0` instead of `value = 0`.
    inequality: bool,
}

impl Constraint {
    fn eq(value: f64, grad: Vec<(usize, f64)>) -> Self {
        Constraint { value, grad, inequality: false }
    }

    /// Shifted residual of the augmented Lagrangian term.
    fn shifted(&self, multiplier: f64, penalty: f64) -> f64 {
        let r = self.value + multiplier / penalty;
        if self.inequality {
            r.max(0.0)
        } else {
            r
        }
    }

    fn violation(&self) -> f64 {
        if self.inequality {
            self.value.max(0.0)
        } else {
            self.value.abs()
        }
    }

    fn update(&self, multiplier: &mut f64, penalty: f64) {
        *multiplier += penalty * self.value;
        if self.inequality {
            *multiplier = multiplier.max(0.0);
        }
    }
}

struct Layout {
    joints: usize,
}

impl Layout {
    fn point(&self, i: usize) -> usize {
        3 * i
    }
    fn normal(&self, k: usize) -> usize {
        3 * (self.joints + 2) + 3 * k
    }
    fn len(&self) -> usize {
        3 * (self.joints + 2) + 3 * self.joints
    }
    fn get(&self, z: &[f64], start: usize) -> Vec3 {
        Vec3::new(z[start], z[start + 1], z[start + 2])
    }
}

fn push_vec(grad: &mut Vec<(usize, f64)>, start: usize, v: &Vec3) {
    for a in 0..3 {
        grad.push((start + a, v[a]));
    }
}

fn constraints(layout: &Layout, l: f64, cos_limit: f64, targets_sum: &Vec3, z: &[f64]) -> Vec<Constraint> {
    let n = layout.joints;
    let p = |i: usize| layout.get(z, layout.point(i));
    let nm = |k: usize| layout.get(z, layout.normal(k));
    let mut out = Vec::with_capacity(5 * n + 8);

    for k in 0..n {
        let v = nm(k);
        let mut grad = Vec::new();
        push_vec(&mut grad, layout.normal(k), &(v * 2.0));
        out.push(Constraint::eq(v.norm_squared() - 1.0, grad));
    }
    for k in 1..n {
        let (a, b) = (nm(k - 1), nm(k));
        let mut grad = Vec::new();
        push_vec(&mut grad, layout.normal(k - 1), &b);
        push_vec(&mut grad, layout.normal(k), &a);
        out.push(Constraint::eq(a.dot(&b), grad));
    }
    // interior links j_i = C'_i − C'_{i−1} = l·(n_{i−1} × n_i), 2 ≤ i ≤ n
    for i in 2..=n {
        let (a, b) = (nm(i - 2), nm(i - 1));
        let link = p(i) - p(i - 1);
        let cross = a.cross(&b);
        for c in 0..3 {
            let mut ea = Vec3::zeros();
            ea[c] = 1.0;
            // ∂(a×b)_c/∂a = b × e_c, ∂(a×b)_c/∂b = e_c × a
            let da = b.cross(&ea);
            let db = ea.cross(&a);
            let mut grad = Vec::with_capacity(12);
            grad.push((layout.point(i) + c, 1.0));
            grad.push((layout.point(i - 1) + c, -1.0));
            push_vec(&mut grad, layout.normal(i - 2), &(-da * l));
            push_vec(&mut grad, layout.normal(i - 1), &(-db * l));
            out.push(Constraint::eq(link[c] - l * cross[c], grad));
        }
    }
    for (head, tail, k) in [(0, 1, 0), (n, n + 1, n - 1)] {
        let link = p(tail) - p(head);
        let normal = nm(k);
        let mut grad = Vec::new();
        push_vec(&mut grad, layout.point(tail), &(link / l));
        push_vec(&mut grad, layout.point(head), &(-link / l));
        out.push(Constraint::eq((link.norm_squared() - l * l) / (2.0 * l), grad));
        let mut grad = Vec::new();
        push_vec(&mut grad, layout.point(tail), &normal);
        push_vec(&mut grad, layout.point(head), &(-normal));
        push_vec(&mut grad, layout.normal(k), &link);
        out.push(Constraint::eq(link.dot(&normal), grad));
    }
    let sum = (0..n + 2).fold(Vec3::zeros(), |acc, i| acc + p(i));
    for c in 0..3 {
        let grad = (0..n + 2).map(|i| (layout.point(i) + c, 1.0)).collect();
        out.push(Constraint::eq(sum[c] - targets_sum[c], grad));
    }
    if cos_limit > -1.0 {
        for k in 0..n {
            let (a, b) = (p(k + 1) - p(k), p(k + 2) - p(k + 1));
            let mut grad = Vec::with_capacity(9);
            push_vec(&mut grad, layout.point(k), &(b / l));
            push_vec(&mut grad, layout.point(k + 1), &((a - b) / l));
            push_vec(&mut grad, layout.point(k + 2), &(-a / l));
            out.push(Constraint { value: (l * l * cos_limit - a.dot(&b)) / l, grad, inequality: true });
        }
    }
    out
}

struct Merit<'a> {
    layout: &'a Layout,
    l: f64,
    cos_limit: f64,
    targets: &'a [Vec3],
    targets_sum: Vec3,
    multipliers: &'a [f64],
    penalty: f64,
}

impl Merit<'_> {
    fn fit(&self, z: &[f64]) -> f64 {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, c)| (self.layout.get(z, self.layout.point(i)) - c).norm_squared())
            .sum()
    }

    fn value(&self, z: &[f64]) -> f64 {
        let cons = constraints(self.layout, self.l, self.cos_limit, &self.targets_sum, z);
        let w = 0.5 * self.penalty;
        self.fit(z)
            + cons
                .iter()
                .zip(self.multipliers)
                .map(|(c, lam)| w * c.shifted(*lam, self.penalty).powi(2))
                .sum::<f64>()
    }

    /// Gauss–Newton normal equations `(JᵀJ, Jᵀr)` scaled so `Φ = ‖r‖²`.
    fn normal_equations(&self, z: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let dim = self.layout.len();
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut b = DVector::<f64>::zeros(dim);
        for (i, c) in self.targets.iter().enumerate() {
            let start = self.layout.point(i);
            let r = self.layout.get(z, start) - c;
            for k in 0..3 {
                a[(start + k, start + k)] += 1.0;
                b[start + k] += r[k];
            }
        }
        let w = 0.5 * self.penalty;
        for (c, lam) in constraints(self.layout, self.l, self.cos_limit, &self.targets_sum, z)
            .iter()
            .zip(self.multipliers)
        {
            let r = c.shifted(*lam, self.penalty);
            if r == 0.0 && c.inequality {
                continue;
            }
            for &(i, gi) in &c.grad {
                b[i] += w * r * gi;
                for &(j, gj) in &c.grad {
                    a[(i, j)] += w * gi * gj;
                }
            }
        }
        (a, b)
    }
}

pub(crate) struct PenaltySolver {
    pub max_outer: usize,
    pub max_inner: usize,
    pub constraint_tolerance: f64,
}

impl PenaltySolver {
    pub fn solve(
        &self,
        robot: &RobotModel,
        targets: &[Vec3],
        seed: &WorkspaceSolution,
    ) -> PenaltySolution {
        let layout = Layout { joints: robot.joints };
        let mut z = vec![0.0; layout.len()];
        for (i, p) in seed.points.iter().enumerate() {
            z[layout.point(i)..layout.point(i) + 3].copy_from_slice(p.as_slice());
        }
        for (k, v) in seed.normals.iter().enumerate() {
            z[layout.normal(k)..layout.normal(k) + 3].copy_from_slice(v.as_slice());
        }
        let targets_sum = targets.iter().fold(Vec3::zeros(), |acc, c| acc + c);
        let cos_limit = robot.joint_limit.min(core::f64::consts::PI).cos();
        let count = constraints(&layout, robot.link_length, cos_limit, &targets_sum, &z).len();
        let mut multipliers = vec![0.0; count];
        let seed_fit: f64 = seed.points.iter().zip(targets).map(|(p, c)| (p - c).norm_squared()).sum();
        // Far-off seeds start loose so the points settle onto the targets first;
        // close seeds start tight and stay in their basin.
        let mut penalty = (1.0 / seed_fit.max(1e-12)).clamp(1e-2, 1e4);
        let mut violation = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        let mut history = Vec::new();

        for _ in 0..self.max_outer {
            let merit = Merit {
                layout: &layout,
                l: robot.link_length,
                cos_limit,
                targets,
                targets_sum,
                multipliers: &multipliers,
                penalty,
            };
            iterations += levenberg_marquardt(&merit, &mut z, self.max_inner);
            history.push(merit.fit(&z));

            let cons = constraints(&layout, robot.link_length, cos_limit, &targets_sum, &z);
            let worst = cons.iter().fold(0.0_f64, |m, c| m.max(c.violation()));
            for (lam, c) in multipliers.iter_mut().zip(&cons) {
                c.update(lam, penalty);
            }
            if worst <= self.constraint_tolerance {
                converged = true;
                break;
            }
            if worst > 0.25 * violation {
                penalty = (penalty * 10.0).min(1e10);
            }
            violation = worst;
        }

        let points = (0..robot.point_count()).map(|i| layout.get(&z, layout.point(i))).collect();
        let normals = (0..robot.joints).map(|k| layout.get(&z, layout.normal(k))).collect();
        PenaltySolution { workspace: WorkspaceSolution { points, normals }, iterations, converged, history }
    }
}

/// Minimises the merit function in place; returns the iteration count.
fn levenberg_marquardt(merit: &Merit<'_>, z: &mut [f64], max_iterations: usize) -> usize {
    let mut damping = 1e-6;
    let mut value = merit.value(z);
    let mut trial = z.to_vec();
    for iteration in 1..=max_iterations {
        let (a, b) = merit.normal_equations(z);
        if b.amax() <= 1e-13 {
            return iteration;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = a.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += damping * (a[(i, i)] + 1e-9);
            }
            let Some(chol) = damped.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&b);
            for (t, (zi, si)) in trial.iter_mut().zip(z.iter().zip(step.iter())) {
                *t = zi - si;
            }
            let candidate = merit.value(&trial);
            if candidate < value {
                let relative = (value - candidate) / value.max(1e-300);
                z.copy_from_slice(&trial);
                value = candidate;
                damping = (damping / 3.0).max(1e-12);
                improved = true;
                if relative < 1e-15 {
                    return iteration;
                }
                break;
            }
            damping *= 4.0;
        }
        if !improved {
            return iteration;
        }
    }
    max_iterations
}
