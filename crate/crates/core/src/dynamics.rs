//! Right-hand side of the good KBK system
//!
//! ```text
//! η_t + v_x + (ηv)_x − ε²·v_xxx = 0
//! v_t + η_x + v·v_x            = 0
//! ```
//!
//! in Fourier space, together with the change of variables
//! `û± = v̂ ± η̂/s(k)`, `s(k) = √(1 + ε²k²)` that diagonalizes its linear part:
//!
//! ```text
//! (û±)_t = ∓ i·k·s(k)·û± − i·k·( ½·(v²)^ ± (ηv)^ / s(k) )
//! ```
//!
//! Products are formed pointwise in physical space. `ε = 1` is the
//! unscaled system; smaller `ε` is the small-dispersion scaling.

use num_complex::Complex64;

use crate::error::{check_len, KbkError, Result};
use crate::etd::StiffSystem;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub eps: f64,
    /// Fraction of the spectrum kept in products; `1.0` disables de-aliasing.
    pub dealias_fraction: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            eps: 1.0,
            dealias_fraction: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(eps: f64) -> Result<Self> {
        ModelParams {
            eps,
            dealias_fraction: 1.0,
        }
        .validated()
    }

    /// Enables the 2/3 rule on the quadratic products.
    pub fn with_two_thirds_dealiasing(self) -> Self {
        ModelParams {
            dealias_fraction: 2.0 / 3.0,
            ..self
        }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(KbkError::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(KbkError::InvalidParameter(format!(
                "dealias fraction must be in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(self)
    }
}

/// Physical state: surface elevation `eta` and velocity `v` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    grid: Grid,
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(grid: &Grid, eta: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), eta.len())?;
        check_len(grid.len(), v.len())?;
        if !eta.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(KbkError::InvalidParameter(
                "state contains non-finite values".into(),
            ));
        }
        Ok(State {
            grid: grid.clone(),
            eta,
            v,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        State {
            grid: grid.clone(),
            eta: vec![0.0; grid.len()],
            v: vec![0.0; grid.len()],
        }
    }

    /// Builds a state by evaluating `f(x) -> (eta, v)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (eta, v) = grid.nodes().iter().map(|&x| f(x)).unzip();
        State::new(grid, eta, v)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Largest pointwise difference over both fields.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.eta
            .iter()
            .zip(&other.eta)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Spectra of the decoupled variables, stored as `[û₊ | û₋]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    grid: Grid,
    data: Vec<Complex64>,
}

impl DiagonalState {
    pub fn from_parts(grid: &Grid, u_plus: &[Complex64], u_minus: &[Complex64]) -> Result<Self> {
        check_len(grid.len(), u_plus.len())?;
        check_len(grid.len(), u_minus.len())?;
        let mut data = Vec::with_capacity(2 * grid.len());
        data.extend_from_slice(u_plus);
        data.extend_from_slice(u_minus);
        Ok(DiagonalState {
            grid: grid.clone(),
            data,
        })
    }

    pub(crate) fn from_packed(grid: &Grid, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), 2 * grid.len());
        DiagonalState {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u_plus(&self) -> &[Complex64] {
        &self.data[..self.grid.len()]
    }

    pub fn u_minus(&self) -> &[Complex64] {
        &self.data[self.grid.len()..]
    }

    /// Packed `[û₊ | û₋]` layout used by the integrator.
    pub fn as_packed(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_packed(self) -> Vec<Complex64> {
        self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `Λ±(k) = ∓ i·k·√(1 + ε²k²)` per mode (zero at the Nyquist mode).
pub fn linear_symbol(grid: &Grid, params: &ModelParams, branch: Branch) -> Vec<Complex64> {
    let sign = match branch {
        Branch::Plus => -1.0,
        Branch::Minus => 1.0,
    };
    grid.odd_wavenumbers()
        .iter()
        .zip(grid.wavenumbers())
        .map(|(&k_odd, &k)| Complex64::new(0.0, sign * k_odd * depth_factor(params.eps, k)))
        .collect()
}

fn depth_factor(eps: f64, k: f64) -> f64 {
    (1.0 + eps * eps * k * k).sqrt()
}

/// Precomputed per-mode arrays of the KBK system on one grid.
#[derive(Debug, Clone)]
pub struct KbkModel {
    grid: Grid,
    params: ModelParams,
    /// `s(k) = √(1 + ε²k²)`
    depth: Vec<f64>,
    /// `i·k` with the Nyquist mode zeroed
    ik: Vec<Complex64>,
    /// `[Λ₊ | Λ₋]`
    lambda: Vec<Complex64>,
    mask: Option<Vec<bool>>,
}

impl KbkModel {
    pub fn new(grid: &Grid, params: ModelParams) -> Result<Self> {
        let params = params.validated()?;
        let depth = grid
            .wavenumbers()
            .iter()
            .map(|&k| depth_factor(params.eps, k))
            .collect();
        let ik = grid
            .odd_wavenumbers()
            .iter()
            .map(|&k| Complex64::new(0.0, k))
            .collect();
        let mut lambda = linear_symbol(grid, &params, Branch::Plus);
        lambda.extend(linear_symbol(grid, &params, Branch::Minus));
        let mask = if params.dealias_fraction < 1.0 {
            Some(grid.dealias_mask(params.dealias_fraction)?)
        } else {
            None
        };
        Ok(KbkModel {
            grid: grid.clone(),
            params,
            depth,
            ik,
            lambda,
            mask,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn to_diagonal(&self, state: &State) -> Result<DiagonalState> {
        self.check_grid(state.grid())?;
        let (eta_hat, v_hat) = self.grid.forward_pair(&state.eta, &state.v)?;
        let n = self.grid.len();
        let mut data = vec![Complex64::default(); 2 * n];
        for m in 0..n {
            let scaled = eta_hat[m] / self.depth[m];
            data[m] = v_hat[m] + scaled;
            data[n + m] = v_hat[m] - scaled;
        }
        Ok(DiagonalState::from_packed(&self.grid, data))
    }

    pub fn from_diagonal(&self, diag: &DiagonalState) -> Result<State> {
        self.check_grid(diag.grid())?;
        let (eta_hat, v_hat) = self.physical_spectra(diag.as_packed());
        let (eta, v) = self.grid.inverse_pair(&eta_hat, &v_hat)?;
        Ok(State {
            grid: self.grid.clone(),
            eta,
            v,
        })
    }

    /// `(η̂, v̂)` from packed diagonal spectra.
    fn physical_spectra(&self, packed: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.grid.len();
        let (up, um) = packed.split_at(n);
        let eta_hat = (0..n).map(|m| 0.5 * self.depth[m] * (up[m] - um[m])).collect();
        let v_hat = (0..n).map(|m| 0.5 * (up[m] + um[m])).collect();
        (eta_hat, v_hat)
    }

    /// Spectra of `½v²` and `ηv`, masked when de-aliasing is on.
    fn product_spectra(&self, eta: &[f64], v: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let half_v2: Vec<f64> = v.iter().map(|x| 0.5 * x * x).collect();
        let eta_v: Vec<f64> = eta.iter().zip(v).map(|(a, b)| a * b).collect();
        let (mut p, mut q) = self
            .grid
            .forward_pair(&half_v2, &eta_v)
            .expect("grid-sized buffers");
        if let Some(mask) = &self.mask {
            for ((pm, qm), &keep) in p.iter_mut().zip(q.iter_mut()).zip(mask) {
                if !keep {
                    *pm = Complex64::default();
                    *qm = Complex64::default();
                }
            }
        }
        (p, q)
    }

    /// `N±(û) = −i·k·( ½(v²)^ ± (ηv)^ / s(k) )`.
    pub fn nonlinear_term(&self, diag: &DiagonalState) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.check_grid(diag.grid())?;
        let mut out = vec![Complex64::default(); 2 * self.grid.len()];
        self.nonlinear_into(diag.as_packed(), &mut out);
        let minus = out.split_off(self.grid.len());
        Ok((out, minus))
    }

    fn nonlinear_into(&self, packed: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.len();
        let (eta_hat, v_hat) = self.physical_spectra(packed);
        let (eta, v) = self
            .grid
            .inverse_pair(&eta_hat, &v_hat)
            .expect("grid-sized buffers");
        let (p, q) = self.product_spectra(&eta, &v);
        let (out_plus, out_minus) = out.split_at_mut(n);
        for m in 0..n {
            let q_scaled = q[m] / self.depth[m];
            out_plus[m] = -self.ik[m] * (p[m] + q_scaled);
            out_minus[m] = -self.ik[m] * (p[m] - q_scaled);
        }
    }

    /// `Λû + N(û)` in diagonal variables.
    pub fn diagonal_rhs(&self, diag: &DiagonalState) -> Result<DiagonalState> {
        self.check_grid(diag.grid())?;
        let mut out = vec![Complex64::default(); 2 * self.grid.len()];
        self.nonlinear_into(diag.as_packed(), &mut out);
        for ((o, &lam), &u) in out.iter_mut().zip(&self.lambda).zip(diag.as_packed()) {
            *o += lam * u;
        }
        Ok(DiagonalState::from_packed(&self.grid, out))
    }

    /// `(η_t, v_t)` evaluated directly from the physical-variable Fourier form.
    pub fn rhs_physical(&self, state: &State) -> Result<State> {
        self.check_grid(state.grid())?;
        let n = self.grid.len();
        let (eta_hat, v_hat) = self.grid.forward_pair(&state.eta, &state.v)?;
        let (p, q) = self.product_spectra(&state.eta, &state.v);
        let mut eta_t = vec![Complex64::default(); n];
        let mut v_t = vec![Complex64::default(); n];
        for m in 0..n {
            let ik = self.ik[m];
            let s2 = self.depth[m] * self.depth[m];
            eta_t[m] = -ik * (s2 * v_hat[m] + q[m]);
            v_t[m] = -ik * (eta_hat[m] + p[m]);
        }
        let (eta, v) = self.grid.inverse_pair(&eta_t, &v_t)?;
        Ok(State {
            grid: self.grid.clone(),
            eta,
            v,
        })
    }

    fn check_grid(&self, other: &Grid) -> Result<()> {
        if *other == self.grid {
            Ok(())
        } else {
            Err(KbkError::InvalidParameter(format!(
                "grid mismatch: model built for {:?}, got {:?}",
                self.grid, other
            )))
        }
    }
}

impl StiffSystem for KbkModel {
    fn linear(&self) -> &[Complex64] {
        &self.lambda
    }

    fn nonlinear(&self, u: &[Complex64], out: &mut [Complex64]) {
        self.nonlinear_into(u, out);
    }
}
