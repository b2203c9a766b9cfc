//! Closed-form solutions and initial data.

use crate::dynamics::State;
use crate::error::{check_len, KbkError, Result};
use crate::grid::Grid;

/// Soliton of speed `c` (|c| < 1) with its peak at `x0` when `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub c: f64,
    pub x0: f64,
    pub eps: f64,
}

impl SolitonParams {
    pub fn new(c: f64, x0: f64) -> Result<Self> {
        SolitonParams { c, x0, eps: 1.0 }.validated()
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        SolitonParams { eps, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.c.abs() < 1.0) {
            return Err(KbkError::InvalidParameter(format!(
                "soliton speed must satisfy |C| < 1, got {}",
                self.c
            )));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(KbkError::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !self.x0.is_finite() {
            return Err(KbkError::InvalidParameter("x0 must be finite".into()));
        }
        Ok(self)
    }
}

/// Wraps `xi` into `[-πL, πL)`.
fn wrap(xi: f64, grid: &Grid) -> f64 {
    let p = grid.period();
    let half = 0.5 * p;
    (xi + half).rem_euclid(p) - half
}

/// `v = 2(1−c²) / (ε·[cosh(√(1−c²)·ξ/√ε) − c])`; the ε = 1 case is the KBK soliton.
pub fn soliton_velocity(c: f64, eps: f64, xi: f64) -> f64 {
    let a = 1.0 - c * c;
    2.0 * a / (eps * ((a.sqrt() * xi / eps.sqrt()).cosh() - c))
}

/// KBK soliton (`ε = 1`): `η = C·v − v²/2`.
pub fn good_soliton(p: &SolitonParams, t: f64, grid: &Grid) -> Result<State> {
    let p = p.validated()?;
    if p.eps != 1.0 {
        return Err(KbkError::InvalidParameter(
            "the soliton pair is certified for eps = 1 only; use scaled_soliton_unvalidated".into(),
        ));
    }
    State::from_fn(grid, |x| {
        let v = soliton_velocity(p.c, 1.0, wrap(x - p.c * t - p.x0, grid));
        (p.c * v - 0.5 * v * v, v)
    })
}

/// The ε-scaled velocity profile `v_{c,ε}` on the grid.
pub fn scaled_soliton_profile(p: &SolitonParams, t: f64, grid: &Grid) -> Result<Vec<f64>> {
    let p = p.validated()?;
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| soliton_velocity(p.c, p.eps, wrap(x - p.c * t - p.x0, grid)))
        .collect())
}

/// `v_{c,ε}` paired with `η = c·v − (ε/2)·v²`. Not a validated solution of
/// the evolved system for `ε ≠ 1`; see [`rescaled_soliton`] for that.
pub fn scaled_soliton_unvalidated(p: &SolitonParams, t: f64, grid: &Grid) -> Result<State> {
    let v = scaled_soliton_profile(p, t, grid)?;
    let eta = v.iter().map(|&v| p.c * v - 0.5 * p.eps * v * v).collect();
    State::new(grid, eta, v)
}

/// Traveling wave of the rescaled system
/// `η_t + v_x + (ηv)_x − ε²v_xxx = 0, v_t + η_x + v v_x = 0`:
/// the ε = 1 soliton with `ξ` replaced by `ξ/ε`.
pub fn rescaled_soliton(p: &SolitonParams, t: f64, grid: &Grid) -> Result<State> {
    let p = p.validated()?;
    State::from_fn(grid, |x| {
        let xi = wrap(x - p.c * t - p.x0, grid) / p.eps;
        let v = soliton_velocity(p.c, 1.0, xi);
        (p.c * v - 0.5 * v * v, v)
    })
}

/// `v = 2/(ε·cosh(x/√ε))`, `η = −(ε/2)·v²`.
pub fn stationary_solution(eps: f64, grid: &Grid) -> Result<State> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(KbkError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    State::from_fn(grid, |x| {
        let v = 2.0 / (eps * (x / eps.sqrt()).cosh());
        (-0.5 * eps * v * v, v)
    })
}

/// Solitary wave of the ill-posed (`α = +1`) system, speed `k > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadSolitonParams {
    pub k: f64,
}

impl BadSolitonParams {
    pub fn new(k: f64) -> Result<Self> {
        if k > 1.0 && k.is_finite() {
            Ok(BadSolitonParams { k })
        } else {
            Err(KbkError::InvalidParameter(format!(
                "bad-system solitary wave needs k > 1, got {k}"
            )))
        }
    }
}

/// Pointwise `(η, v)` of the bad-system solitary wave. Evaluation only.
pub fn bad_soliton(p: &BadSolitonParams, t: f64, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = BadSolitonParams::new(p.k)?;
    let k = p.k;
    let a = k * k - 1.0;
    let b = (3.0 * a).sqrt();
    Ok(x.iter()
        .map(|&x| {
            let ch = (b * (x - k * t)).cosh();
            let v = 2.0 * a / (ch + k);
            let eta = 2.0 * a * (k * ch + 1.0) / ((ch + k) * (ch + k));
            (eta, v)
        })
        .unzip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianKind {
    /// `η = 0, v = A·exp(−x²)`
    VelocityBump,
    /// `η = A·exp(−x²), v = 0`
    ElevationBump,
}

pub fn gaussian_data(kind: GaussianKind, amplitude: f64, grid: &Grid) -> Result<State> {
    State::from_fn(grid, |x| {
        let g = amplitude * (-x * x).exp();
        match kind {
            GaussianKind::VelocityBump => (0.0, g),
            GaussianKind::ElevationBump => (g, 0.0),
        }
    })
}

/// Sup norm of `−ε φ'' + (1−c²) φ + (3/2) c ε φ² − (ε²/2) φ³`.
pub fn traveling_wave_residual(v: &[f64], c: f64, eps: f64, grid: &Grid) -> Result<f64> {
    check_len(grid.len(), v.len())?;
    let vxx = grid.derivative(v, 2)?;
    Ok(v.iter()
        .zip(&vxx)
        .map(|(&p, &pxx)| {
            (-eps * pxx + (1.0 - c * c) * p + 1.5 * c * eps * p * p - 0.5 * eps * eps * p * p * p).abs()
        })
        .fold(0.0, f64::max))
}

/// Sup norm of `−v'' + v − (ε²/2) v³`.
pub fn stationary_residual(v: &[f64], eps: f64, grid: &Grid) -> Result<f64> {
    check_len(grid.len(), v.len())?;
    let vxx = grid.derivative(v, 2)?;
    Ok(v.iter()
        .zip(&vxx)
        .map(|(&p, &pxx)| (-pxx + p - 0.5 * eps * eps * p * p * p).abs())
        .fold(0.0, f64::max))
}
