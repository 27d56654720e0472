//! Parametric backbone curves and equal-arc-length sampling.
//!
//! A backbone curve maps `x ∈ [0, 1]` to a point `(x, y(x, t), z(x, t))`.
//! Samples are taken after rescaling the curve about its anterior endpoint so
//! that its total arc length equals the robot body length.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kinematics::RobotModel;

/// Which parametric equation drives the vertical (`z`) wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CurveFamily {
    /// `z = A_z sin(ω_z x + f t + φ)`
    PlainSinusoid,
    /// `z = A_z σ(sin(ω_z x + f t + φ))` with `σ(u) = 1 / (1 + e^{-γu})`
    SigmoidFiltered,
}

/// Gait parameters of a travelling-wave backbone curve.
///
/// Amplitudes are lengths in the same units as `x` (the curve is rescaled to
/// one body length before sampling).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitParams {
    pub amplitude_y: f64,
    pub amplitude_z: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Temporal frequency; the wave phase advances by `f·t`.
    pub temporal_freq: f64,
    pub phase: f64,
    pub sigmoid_gamma: f64,
    pub family: CurveFamily,
}

impl GaitParams {
    pub fn straight() -> Self {
        GaitParams {
            amplitude_y: 0.0,
            amplitude_z: 0.0,
            omega_y: 0.0,
            omega_z: 0.0,
            temporal_freq: 1.0,
            phase: 0.0,
            sigmoid_gamma: 4.0,
            family: CurveFamily::PlainSinusoid,
        }
    }

    /// Sidewinding: `A_y = π/4, A_z = π/3, ω = 2π, φ = −π/2`.
    pub fn sidewinding() -> Self {
        GaitParams {
            amplitude_y: FRAC_PI_4,
            amplitude_z: FRAC_PI_3,
            omega_y: 2.0 * PI,
            omega_z: 2.0 * PI,
            temporal_freq: 1.0,
            phase: -FRAC_PI_2,
            ..Self::straight()
        }
    }

    /// Sinus lifting: `A_y = A_z = π/4, ω_y = 2π, ω_z = 3π, φ = π/2`.
    pub fn sinus_lifting() -> Self {
        GaitParams {
            amplitude_y: FRAC_PI_4,
            amplitude_z: FRAC_PI_4,
            omega_y: 2.0 * PI,
            omega_z: 3.0 * PI,
            temporal_freq: 1.0,
            phase: FRAC_PI_2,
            ..Self::straight()
        }
    }

    /// Helical rolling: `A_y = A_z = π/3, ω_y = ω_z = 4π, φ = π/2`.
    pub fn helical_rolling() -> Self {
        GaitParams {
            amplitude_y: FRAC_PI_3,
            amplitude_z: FRAC_PI_3,
            omega_y: 4.0 * PI,
            omega_z: 4.0 * PI,
            temporal_freq: 1.0,
            phase: FRAC_PI_2,
            ..Self::straight()
        }
    }

    /// Sidewinding with a sigmoid-filtered vertical wave (`γ = 4`).
    pub fn sidewinding_sigmoid(temporal_freq: f64) -> Self {
        GaitParams {
            temporal_freq,
            sigmoid_gamma: 4.0,
            family: CurveFamily::SigmoidFiltered,
            ..Self::sidewinding()
        }
    }

    pub fn with_frequency(mut self, temporal_freq: f64) -> Self {
        self.temporal_freq = temporal_freq;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.amplitude_y,
            self.amplitude_z,
            self.omega_y,
            self.omega_z,
            self.temporal_freq,
            self.phase,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter { name: "gait", reason: "non-finite parameter" });
        }
        if self.amplitude_y < 0.0 {
            return Err(Error::InvalidParameter { name: "amplitude_y", reason: "must be >= 0" });
        }
        if self.amplitude_z < 0.0 {
            return Err(Error::InvalidParameter { name: "amplitude_z", reason: "must be >= 0" });
        }
        if self.family == CurveFamily::SigmoidFiltered
            && !(self.sigmoid_gamma > 0.0 && self.sigmoid_gamma.is_finite())
        {
            return Err(Error::InvalidParameter { name: "sigmoid_gamma", reason: "must be > 0" });
        }
        Ok(())
    }

    pub fn at(self, time: f64) -> BackboneCurve {
        BackboneCurve { params: self, time }
    }
}

/// Frame times for a gait sequence.
///
/// The time step is fixed so that a gait at `reference_freq` completes one
/// cycle in `frames_per_cycle` frames; faster gaits advance further per frame.
pub fn frame_times(frames_per_cycle: usize, cycles: usize, reference_freq: f64) -> Vec<f64> {
    let dt = 2.0 * PI / (frames_per_cycle as f64 * reference_freq);
    (0..frames_per_cycle * cycles).map(|k| k as f64 * dt).collect()
}

/// Anything that can be evaluated on `[0, 1]`.
pub trait SpaceCurve {
    /// Point at parameter `x`; callers guarantee `x ∈ [0, 1]`.
    fn point(&self, x: f64) -> Vec3;

    /// Analytic derivative `dP/dx`, when available.
    fn tangent(&self, _x: f64) -> Option<Vec3> {
        None
    }
}

/// A gait curve frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackboneCurve {
    pub params: GaitParams,
    pub time: f64,
}

fn sigmoid(gamma: f64, u: f64) -> f64 {
    1.0 / (1.0 + (-gamma * u).exp())
}

impl BackboneCurve {
    pub fn new(params: GaitParams, time: f64) -> Self {
        BackboneCurve { params, time }
    }

    /// Checked evaluation.
    pub fn eval(&self, x: f64) -> Result<Vec3> {
        check_unit(x, "x")?;
        Ok(self.point(x))
    }

    fn phases(&self, x: f64) -> (f64, f64) {
        let p = &self.params;
        let wave = p.temporal_freq * self.time;
        (p.omega_y * x + wave, p.omega_z * x + wave + p.phase)
    }
}

impl SpaceCurve for BackboneCurve {
    fn point(&self, x: f64) -> Vec3 {
        let p = &self.params;
        let (uy, uz) = self.phases(x);
        let y = p.amplitude_y * uy.sin();
        let z = match p.family {
            CurveFamily::PlainSinusoid => p.amplitude_z * uz.sin(),
            CurveFamily::SigmoidFiltered => p.amplitude_z * sigmoid(p.sigmoid_gamma, uz.sin()),
        };
        Vec3::new(x, y, z)
    }

    fn tangent(&self, x: f64) -> Option<Vec3> {
        let p = &self.params;
        let (uy, uz) = self.phases(x);
        let dy = p.amplitude_y * p.omega_y * uy.cos();
        let dz = match p.family {
            CurveFamily::PlainSinusoid => p.amplitude_z * p.omega_z * uz.cos(),
            CurveFamily::SigmoidFiltered => {
                let s = sigmoid(p.sigmoid_gamma, uz.sin());
                p.amplitude_z * p.sigmoid_gamma * s * (1.0 - s) * p.omega_z * uz.cos()
            }
        };
        Some(Vec3::new(1.0, dy, dz))
    }
}

fn check_unit(x: f64, what: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

const POLYLINE_SEGMENTS: usize = 4096;
const SIMPSON_MAX_DEPTH: u32 = 40;

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * eps, depth - 1)
        + simpson_step(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * eps, depth - 1)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, (a, fa), (m, fm), (b, fb), whole, eps, SIMPSON_MAX_DEPTH)
}

fn polyline_length<C: SpaceCurve + ?Sized>(curve: &C, lo: f64, hi: f64, segments: usize) -> f64 {
    let mut prev = curve.point(lo);
    let mut total = 0.0;
    for k in 1..=segments {
        let x = lo + (hi - lo) * k as f64 / segments as f64;
        let p = curve.point(x);
        total += (p - prev).norm();
        prev = p;
    }
    total
}

/// Unchecked arc length between two parameters (`lo ≤ hi`).
fn arc_length_raw<C: SpaceCurve + ?Sized>(
    curve: &C,
    lo: f64,
    hi: f64,
    eps: f64,
    panels: usize,
) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if curve.tangent(lo).is_some() {
        (0..panels)
            .map(|k| {
                let a = lo + (hi - lo) * k as f64 / panels as f64;
                let b = lo + (hi - lo) * (k + 1) as f64 / panels as f64;
                adaptive_simpson(
                    |x| curve.tangent(x).map_or(0.0, |d| d.norm()),
                    a,
                    b,
                    eps / panels as f64,
                )
            })
            .sum()
    } else {
        // Chord error is O(h²): one Richardson step removes it.
        let coarse = polyline_length(curve, lo, hi, POLYLINE_SEGMENTS);
        let fine = polyline_length(curve, lo, hi, 2 * POLYLINE_SEGMENTS);
        (4.0 * fine - coarse) / 3.0
    }
}

/// Arc length of `curve` between `x_lo` and `x_hi`.
pub fn arc_length<C: SpaceCurve + ?Sized>(curve: &C, x_lo: f64, x_hi: f64) -> Result<f64> {
    check_unit(x_lo, "x_lo")?;
    check_unit(x_hi, "x_hi")?;
    if x_lo > x_hi {
        return Err(Error::Domain { what: "x_lo (greater than x_hi)", value: x_lo });
    }
    Ok(arc_length_raw(curve, x_lo, x_hi, 1e-12 * (x_hi - x_lo).max(1e-3), 16))
}

/// Cumulative arc-length table for fast forward and inverse lookups.
pub struct ArcLengthMap<'a, C: SpaceCurve + ?Sized> {
    curve: &'a C,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

const MAP_PANELS: usize = 256;
const PANEL_EPS: f64 = 1e-14;

impl<'a, C: SpaceCurve + ?Sized> ArcLengthMap<'a, C> {
    pub fn new(curve: &'a C) -> Self {
        let knots: Vec<f64> = (0..=MAP_PANELS).map(|k| k as f64 / MAP_PANELS as f64).collect();
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        for w in knots.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + arc_length_raw(curve, w[0], w[1], PANEL_EPS, 1));
        }
        ArcLengthMap { curve, knots, cumulative }
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn panel(&self, x: f64) -> usize {
        ((x * MAP_PANELS as f64).floor() as usize).min(MAP_PANELS - 1)
    }

    /// Arc length from `0` to `x`.
    pub fn arc_at(&self, x: f64) -> f64 {
        let k = self.panel(x);
        self.cumulative[k] + arc_length_raw(self.curve, self.knots[k], x, PANEL_EPS, 1)
    }

    /// Parameter `x` with `arc_at(x) = s`, found by bisection.
    pub fn param_at(&self, s: f64, tol: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total() {
            return 1.0;
        }
        let k = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1).min(MAP_PANELS - 1);
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let err = self.arc_at(mid) - s;
            if err.abs() <= tol || hi - lo <= f64::EPSILON {
                break;
            }
            if err > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        mid
    }
}

/// Equal-arc-length samples `C_0 .. C_{n+1}` of a rescaled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    pub points: Vec<Vec3>,
    /// Curve parameters of each sample.
    pub params: Vec<f64>,
    /// Arc length between consecutive samples after rescaling.
    pub segment_arclength: f64,
    /// Uniform scale applied about the anterior endpoint.
    pub scale_factor: f64,
}

impl CurveSamples {
    /// Wraps raw points (e.g. for tests or externally supplied targets).
    pub fn from_points(points: Vec<Vec3>, segment_arclength: f64) -> Self {
        let m = points.len().max(2) - 1;
        let params = (0..points.len()).map(|i| i as f64 / m as f64).collect();
        CurveSamples { points, params, segment_arclength, scale_factor: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A curve rescaled about `P(0)` to a prescribed total length.
pub struct RescaledCurve<'a, C: SpaceCurve + ?Sized> {
    map: ArcLengthMap<'a, C>,
    anchor: Vec3,
    scale: f64,
}

const INVERSION_TOL: f64 = 1e-12;

impl<'a, C: SpaceCurve + ?Sized> RescaledCurve<'a, C> {
    pub fn new(curve: &'a C, target_length: f64) -> Result<Self> {
        let map = ArcLengthMap::new(curve);
        let total = map.total();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::ZeroLength);
        }
        if !(target_length > 0.0) {
            return Err(Error::InvalidParameter { name: "link_length", reason: "must be > 0" });
        }
        Ok(RescaledCurve { anchor: curve.point(0.0), scale: target_length / total, map })
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    pub fn length(&self) -> f64 {
        self.map.total() * self.scale
    }

    /// Curve parameter at rescaled arc length `s`.
    pub fn param_at(&self, s: f64) -> f64 {
        self.map.param_at(s / self.scale, INVERSION_TOL)
    }

    pub fn point_at_param(&self, x: f64) -> Vec3 {
        self.anchor + (self.map.curve.point(x) - self.anchor) * self.scale
    }

    pub fn point_at_arclength(&self, s: f64) -> Vec3 {
        self.point_at_param(self.param_at(s))
    }
}

/// Samples `n + 2` points at equal arc-length spacing `l` after rescaling the
/// curve to body length `(n + 1)·l`.
pub fn sample_equal_arclength<C: SpaceCurve + ?Sized>(
    curve: &C,
    robot: &RobotModel,
) -> Result<CurveSamples> {
    robot.validate()?;
    let l = robot.link_length;
    let rescaled = RescaledCurve::new(curve, robot.body_length())?;
    let count = robot.joints + 2;
    let mut params = Vec::with_capacity(count);
    for i in 0..count {
        let x = match i {
            0 => 0.0,
            i if i == count - 1 => 1.0,
            i => rescaled.param_at(i as f64 * l),
        };
        params.push(x);
    }
    let points = params.iter().map(|&x| rescaled.point_at_param(x)).collect();
    Ok(CurveSamples { points, params, segment_arclength: l, scale_factor: rescaled.scale_factor() })
}
