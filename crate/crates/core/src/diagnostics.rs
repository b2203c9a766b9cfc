//! Conserved quantities, resolution indicators and soliton fitting.
//!
//! All integrals use the periodic trapezoid rule and spectral derivatives
//! of the grid, so they are spectrally accurate for resolved states.

use num_complex::Complex64;

use crate::dynamics::State;
use crate::error::{KbkError, Result};
use crate::exact::soliton_velocity;
use crate::grid::Grid;

/// Number of complex conserved densities tracked in a record.
pub const RHO_COUNT: usize = 4;

/// Default half-width of the soliton-fit window.
pub const DEFAULT_FIT_WINDOW: f64 = 5.0;

/// Tail level below which a state counts as spectrally resolved.
pub const RESOLVED_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub delta: f64,
    pub h0: f64,
    pub i3: f64,
    pub mass_eta: f64,
    pub mass_v: f64,
    pub rho_integrals: Vec<Complex64>,
    pub tail: f64,
    pub min_depth: f64,
}

impl DiagnosticsRecord {
    /// Evaluates every diagnostic at time `t`; `delta` is measured against
    /// `reference_energy` when given and is zero otherwise.
    pub fn compute(state: &State, eps: f64, t: f64, reference_energy: Option<f64>) -> Result<Self> {
        let grid = state.grid();
        let energy = energy(state, eps)?;
        let delta = reference_energy.map_or(0.0, |e0| relative_drift(energy, e0).value);
        let rho_integrals = (1..=RHO_COUNT)
            .map(|n| conserved_density(n, state).and_then(|rho| grid.integrate_complex(&rho)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticsRecord {
            t,
            energy,
            delta,
            h0: h0(state)?,
            i3: i3(state)?,
            mass_eta: grid.integrate(&state.eta)?,
            mass_v: grid.integrate(&state.v)?,
            rho_integrals,
            tail: dft_tail(state)?,
            min_depth: min_depth(state),
        })
    }
}

/// `½∫(η² + (1+η)v² + ε²v_x²) dx`.
pub fn energy(state: &State, eps: f64) -> Result<f64> {
    let grid = state.grid();
    let vx = grid.derivative(&state.v, 1)?;
    let density: Vec<f64> = state
        .eta
        .iter()
        .zip(&state.v)
        .zip(&vx)
        .map(|((&e, &v), &vx)| 0.5 * (e * e + (1.0 + e) * v * v + eps * eps * vx * vx))
        .collect();
    grid.integrate(&density)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub value: f64,
    /// Set when the reference vanishes and `value` is the absolute `|E_t|`.
    pub is_absolute: bool,
}

/// `|E_t/E_0 − 1|`, or `|E_t|` (flagged) when `E_0 = 0`.
pub fn relative_drift(e_t: f64, e_0: f64) -> Drift {
    if e_0 == 0.0 {
        Drift {
            value: e_t.abs(),
            is_absolute: true,
        }
    } else {
        Drift {
            value: (e_t / e_0 - 1.0).abs(),
            is_absolute: false,
        }
    }
}

/// `∫ η v dx`.
pub fn h0(state: &State) -> Result<f64> {
    let p: Vec<f64> = state.eta.iter().zip(&state.v).map(|(a, b)| a * b).collect();
    state.grid().integrate(&p)
}

/// Higher-order conserved functional of the good flow (ε = 1):
///
/// ```text
/// (1/8)∫[4v_xx² + 8v_x² + 4v² + 4η_x² + 4η² + 6v²v_x² − 16ηvv_xx
///        − 6ηv_x² + 10ηv² + 2η³ + v⁴ + 6η²v² + ηv⁴] dx
/// ```
///
/// The `ηv_x²` coefficient is −6; with −4 (see [`i3_literal`]) the
/// functional is not invariant.
pub fn i3(state: &State) -> Result<f64> {
    i3_with(state, -6.0)
}

/// [`i3`] with `−4ηv_x²`, the form usually quoted. Kept for comparison; it
/// drifts along general trajectories.
pub fn i3_literal(state: &State) -> Result<f64> {
    i3_with(state, -4.0)
}

fn i3_with(state: &State, eta_vx2: f64) -> Result<f64> {
    let grid = state.grid();
    let v_hat = grid.forward(&state.v)?;
    let vx = grid.inverse(&grid.spectral_derivative(&v_hat, 1)?)?;
    let vxx = grid.inverse(&grid.spectral_derivative(&v_hat, 2)?)?;
    let ex = grid.derivative(&state.eta, 1)?;
    let density: Vec<f64> = (0..grid.len())
        .map(|j| {
            let (e, v, vx, vxx, ex) = (state.eta[j], state.v[j], vx[j], vxx[j], ex[j]);
            let v2 = v * v;
            4.0 * vxx * vxx + 8.0 * vx * vx + 4.0 * v2 + 4.0 * ex * ex + 4.0 * e * e
                + 6.0 * v2 * vx * vx
                - 16.0 * e * v * vxx
                + eta_vx2 * e * vx * vx
                + 10.0 * e * v2
                + 2.0 * e * e * e
                + v2 * v2
                + 6.0 * e * e * v2
                + e * v2 * v2
        })
        .collect();
    Ok(grid.integrate(&density)? / 8.0)
}

/// Which closed form starts the density recursion at `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rho2Variant {
    /// `ρ₂ = i v ρ₁ − 2ρ₁ₓ + (i/2) v`
    WithVelocityTerm,
    /// General recursion with `ρ₀ = 0`: `ρ₂ = i v ρ₁ − 2ρ₁ₓ`
    RecursionOnly,
}

/// Variant used by [`conserved_density`]; selected by the drift study in
/// the integration tests (both give conserved `∫ρ₂`, only this one keeps
/// `∫ρ₃` and `∫ρ₄` conserved).
pub const DEFAULT_RHO2: Rho2Variant = Rho2Variant::WithVelocityTerm;

fn complex_derivative(grid: &Grid, f: &[Complex64]) -> Result<Vec<Complex64>> {
    let spec = grid.forward_complex(f)?;
    grid.inverse_complex(&grid.spectral_derivative(&spec, 1)?)
}

/// Densities `ρ₁..ρₙ` of the complex conservation laws.
pub fn conserved_densities(n_max: usize, state: &State, variant: Rho2Variant) -> Result<Vec<Vec<Complex64>>> {
    if !(1..=RHO_COUNT).contains(&n_max) {
        return Err(KbkError::InvalidParameter(format!(
            "density index must be in 1..={RHO_COUNT}, got {n_max}"
        )));
    }
    let grid = state.grid();
    let i = Complex64::i();
    let vx = grid.derivative(&state.v, 1)?;
    let rho1: Vec<Complex64> = state
        .eta
        .iter()
        .zip(&vx)
        .map(|(&e, &vx)| Complex64::new(0.5 * e, 0.5 * vx))
        .collect();
    let mut rhos = vec![rho1];
    for n in 1..n_max {
        // builds ρ_{n+1}
        let rho_n = &rhos[n - 1];
        let rho_nx = complex_derivative(grid, rho_n)?;
        let next: Vec<Complex64> = (0..grid.len())
            .map(|j| {
                let v = state.v[j];
                let mut r = i * v * rho_n[j] - 2.0 * rho_nx[j];
                if n == 1 {
                    if variant == Rho2Variant::WithVelocityTerm {
                        r += 0.5 * i * v;
                    }
                } else {
                    r -= rhos[n - 2][j];
                    for k in 1..n {
                        r -= 2.0 * rhos[k - 1][j] * rhos[n - k - 1][j];
                    }
                }
                r
            })
            .collect();
        rhos.push(next);
    }
    Ok(rhos)
}

/// `ρₙ` for `n ∈ 1..=4` with the default `ρ₂` variant.
pub fn conserved_density(n: usize, state: &State) -> Result<Vec<Complex64>> {
    conserved_densities(n, state, DEFAULT_RHO2).map(|mut v| v.pop().expect("n >= 1"))
}

/// Largest modulus among the top-decile `|m|` modes of `η̂` and `v̂`,
/// relative to the largest modulus over both spectra.
pub fn dft_tail(state: &State) -> Result<f64> {
    let grid = state.grid();
    let (eta_hat, v_hat) = grid.forward_pair(&state.eta, &state.v)?;
    let cutoff = 0.9 * (grid.len() / 2) as f64;
    let mut top = 0.0f64;
    let mut all = 0.0f64;
    for spec in [&eta_hat, &v_hat] {
        for (j, z) in spec.iter().enumerate() {
            let a = z.norm();
            all = all.max(a);
            if grid.mode_number(j).unsigned_abs() as f64 >= cutoff {
                top = top.max(a);
            }
        }
    }
    Ok(if all > 0.0 { top / all } else { 0.0 })
}

/// `min_j (1 + η_j)`; positive iff the non-cavitation condition holds on the grid.
pub fn min_depth(state: &State) -> f64 {
    state.eta.iter().fold(f64::INFINITY, |m, &e| m.min(1.0 + e))
}

/// Norms of the parity-breaking parts `(‖odd part of η‖∞, ‖even part of v‖∞)`
/// about `x = 0`.
pub fn parity_defect(state: &State) -> (f64, f64) {
    let n = state.eta.len();
    let mut odd_eta = 0.0f64;
    let mut even_v = 0.0f64;
    for j in 0..n {
        let mj = (n - j) % n;
        odd_eta = odd_eta.max(0.5 * (state.eta[j] - state.eta[mj]).abs());
        even_v = even_v.max(0.5 * (state.v[j] + state.v[mj]).abs());
    }
    (odd_eta, even_v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonFit {
    pub c_fit: f64,
    pub x0_fit: f64,
    pub peak: f64,
    /// Relative L² misfit of `v` within the fit window.
    pub residual: f64,
}

/// Fits a KBK soliton to the global maximum of `v`.
pub fn fit_soliton(state: &State, window_halfwidth: f64) -> Result<SolitonFit> {
    fit_soliton_in(state, window_halfwidth, None)
}

/// Fits a KBK soliton to the maximum of `v` inside `search = (x_lo, x_hi)`
/// (whole grid when `None`). The peak is located on the grid, refined by a
/// three-point parabola and then polished by Newton iterations on the
/// trigonometric interpolant. The speed follows from the peak height
/// `2(1 + C)`.
pub fn fit_soliton_in(state: &State, window_halfwidth: f64, search: Option<(f64, f64)>) -> Result<SolitonFit> {
    if !(window_halfwidth > 0.0) {
        return Err(KbkError::InvalidParameter(format!(
            "fit window must be positive, got {window_halfwidth}"
        )));
    }
    let grid = state.grid();
    let n = grid.len();
    let x = grid.nodes();
    let v = &state.v;

    let jmax = (0..n)
        .filter(|&j| search.map_or(true, |(lo, hi)| x[j] >= lo && x[j] <= hi))
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .ok_or_else(|| KbkError::FitFailure("empty search region".into()))?;

    let (ym, y0, yp) = (v[(jmax + n - 1) % n], v[jmax], v[(jmax + 1) % n]);
    let curvature = ym - 2.0 * y0 + yp;
    let dx = grid.quad_weight();
    let (mut x0, mut peak) = if curvature < 0.0 {
        let offset = 0.5 * (ym - yp) / curvature;
        (x[jmax] + offset * dx, y0 - 0.25 * (ym - yp) * offset)
    } else {
        (x[jmax], y0)
    };

    let interp = TrigInterpolant::new(grid, v)?;
    let x_parabola = x0;
    let mut xn = x0;
    for _ in 0..30 {
        let (_, d1, d2) = interp.eval(xn);
        if d2 >= 0.0 {
            break;
        }
        let dxn = d1 / d2;
        xn -= dxn;
        if (xn - x_parabola).abs() > dx {
            break;
        }
        if dxn.abs() < 1e-15 * grid.period() {
            let (val, _, _) = interp.eval(xn);
            x0 = xn;
            peak = val;
            break;
        }
    }

    if !(peak > 0.0 && peak < 4.0) {
        return Err(KbkError::FitFailure(format!(
            "peak value {peak} implies |C| >= 1"
        )));
    }
    let c_fit = 0.5 * peak - 1.0;

    let period = grid.period();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        let d = (x[j] - x0 + 0.5 * period).rem_euclid(period) - 0.5 * period;
        if d.abs() <= window_halfwidth {
            let model = soliton_velocity(c_fit, 1.0, d);
            num += (v[j] - model).powi(2);
            den += v[j] * v[j];
        }
    }
    let residual = if den > 0.0 { (num / den).sqrt() } else { f64::INFINITY };

    Ok(SolitonFit {
        c_fit,
        x0_fit: wrap_to_domain(x0, grid),
        peak,
        residual,
    })
}

fn wrap_to_domain(x: f64, grid: &Grid) -> f64 {
    let p = grid.period();
    (x + 0.5 * p).rem_euclid(p) - 0.5 * p
}

/// Band-limited interpolant of a real grid function.
struct TrigInterpolant {
    spectrum: Vec<Complex64>,
    k: Vec<f64>,
    origin: f64,
    inv_n: f64,
}

impl TrigInterpolant {
    fn new(grid: &Grid, f: &[f64]) -> Result<Self> {
        let mut spectrum = grid.forward(f)?;
        spectrum[grid.len() / 2] = Complex64::default();
        Ok(TrigInterpolant {
            spectrum,
            k: grid.odd_wavenumbers().to_vec(),
            origin: grid.nodes()[0],
            inv_n: 1.0 / grid.len() as f64,
        })
    }

    /// Value and first two derivatives at `x`.
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for (c, &k) in self.spectrum.iter().zip(&self.k) {
            let term = c * Complex64::from_polar(1.0, k * (x - self.origin));
            f += term.re;
            d1 -= k * term.im;
            d2 -= k * k * term.re;
        }
        (f * self.inv_n, d1 * self.inv_n, d2 * self.inv_n)
    }
}
