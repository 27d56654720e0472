//! Projected BFGS for smooth objectives with simple bounds.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

pub(crate) struct BoxBfgs {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Objective decrease below which an iteration counts as stalled.
    pub stall_tolerance: f64,
    /// Consecutive stalled iterations that count as convergence.
    pub stall_window: usize,
    /// Largest step in any coordinate per iteration.
    pub max_step: f64,
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted iteration, starting with the seed.
    pub history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            let p = xi - clamp(xi - gi, lo, hi);
            p * p
        })
        .sum::<f64>()
        .sqrt()
}

impl BoxBfgs {
    /// Minimises `objective` (which writes the gradient into its second
    /// argument) from `x0` subject to `lower ≤ x ≤ upper`.
    pub fn minimize<F>(&self, mut objective: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        let m = x0.len();
        let mut x: Vec<f64> =
            x0.iter().zip(lower.iter().zip(upper)).map(|(&v, (&lo, &hi))| clamp(v, lo, hi)).collect();
        let mut g = vec![0.0; m];
        let mut f = objective(&x, &mut g);
        // direct Hessian approximation; directions solve its free block
        let mut b = identity(m);
        let mut history = vec![f];
        let mut stalled = 0;
        let mut converged = false;
        let mut iterations = 0;

        let mut x_new = vec![0.0; m];
        let mut g_new = vec![0.0; m];
        let mut d = vec![0.0; m];

        while iterations < self.max_iterations {
            if projected_gradient_norm(&x, &g, lower, upper) <= self.gradient_tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let free: Vec<bool> = (0..m)
                .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
                .collect();
            if !search_direction(&b, &g, &free, &mut d) || dot(&d, &g) >= 0.0 {
                b = identity(m);
                search_direction(&b, &g, &free, &mut d);
            }
            let largest = d.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if largest > self.max_step {
                let s = self.max_step / largest;
                d.iter_mut().for_each(|v| *v *= s);
            }

            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                for i in 0..m {
                    x_new[i] = clamp(x[i] + step * d[i], lower[i], upper[i]);
                }
                let predicted: f64 = (0..m).map(|i| g[i] * (x_new[i] - x[i])).sum();
                let f_try = objective(&x_new, &mut g_new);
                if f_try.is_finite() && f_try <= f + ARMIJO * predicted {
                    accepted = Some(f_try);
                    break;
                }
                step *= 0.5;
            }
            let Some(f_next) = accepted else {
                if is_identity(&b) {
                    // No descent possible along the projected gradient.
                    break;
                }
                b = identity(m);
                continue;
            };

            let s: Vec<f64> = (0..m).map(|i| x_new[i] - x[i]).collect();
            let y: Vec<f64> = (0..m).map(|i| g_new[i] - g[i]).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
                if iterations == 1 || is_identity(&b) {
                    let scale = dot(&y, &y) / sy;
                    b.iter_mut().for_each(|v| *v *= scale);
                }
                bfgs_update(&mut b, &s, &y, sy);
            }

            let decrease = f - f_next;
            core::mem::swap(&mut x, &mut x_new);
            core::mem::swap(&mut g, &mut g_new);
            f = f_next;
            history.push(f);

            if decrease < self.stall_tolerance {
                stalled += 1;
                if stalled >= self.stall_window {
                    converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        if !converged && projected_gradient_norm(&x, &g, lower, upper) <= self.gradient_tolerance {
            converged = true;
        }
        Minimum { x, value: f, iterations, converged, history }
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut h = vec![0.0; m * m];
    for i in 0..m {
        h[i * m + i] = 1.0;
    }
    h
}

fn is_identity(h: &[f64]) -> bool {
    let m = (h.len() as f64).sqrt() as usize;
    (0..m).all(|i| (0..m).all(|j| h[i * m + j] == if i == j { 1.0 } else { 0.0 }))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `B_FF·d_F = −g_F` on free coordinates, zero elsewhere. Returns
/// `false` when the free block is not positive definite.
fn search_direction(b: &[f64], g: &[f64], free: &[bool], d: &mut [f64]) -> bool {
    let m = g.len();
    let idx: Vec<usize> = (0..m).filter(|&i| free[i]).collect();
    d.iter_mut().for_each(|v| *v = 0.0);
    if idx.is_empty() {
        return true;
    }
    let k = idx.len();
    let block = DMatrix::from_fn(k, k, |r, c| b[idx[r] * m + idx[c]]);
    let Some(chol) = block.cholesky() else {
        return false;
    };
    let rhs = DVector::from_fn(k, |r, _| -g[idx[r]]);
    let sol = chol.solve(&rhs);
    for (r, &i) in idx.iter().enumerate() {
        d[i] = sol[r];
    }
    true
}

/// Hessian update `B ← B − (Bs)(Bs)ᵀ/(sᵀBs) + yyᵀ/(yᵀs)`.
fn bfgs_update(b: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let m = s.len();
    let bs: Vec<f64> = (0..m).map(|i| (0..m).map(|j| b[i * m + j] * s[j]).sum()).collect();
    let sbs = dot(s, &bs);
    if !(sbs > 0.0) {
        return;
    }
    for i in 0..m {
        for j in 0..m {
            b[i * m + j] += y[i] * y[j] / sy - bs[i] * bs[j] / sbs;
        }
    }
}
