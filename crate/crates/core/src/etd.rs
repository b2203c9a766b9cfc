//! Fourth-order exponential time differencing (Cox–Matthews ETDRK4) for
//! `u_t = Λ·u + N(u)` with a diagonal linear part `Λ`.
//!
//! The φ-function weights lose digits to cancellation near `z = Λh = 0`.
//! For `|z| < 1/2` they are evaluated as the mean of the closed form over
//! `M` points on a circle of radius `r` around `z`; the closed form is used
//! everywhere else.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::diagnostics::DiagnosticsRecord;
use crate::dynamics::{KbkModel, State};
use crate::error::{KbkError, Result};

const CONTOUR_POINTS: usize = 32;
const CONTOUR_RADIUS: f64 = 1.0;
const CONTOUR_THRESHOLD: f64 = 0.5;

/// A semilinear system with diagonal stiff part.
pub trait StiffSystem {
    /// Diagonal of `Λ`, one entry per unknown.
    fn linear(&self) -> &[Complex64];
    /// Writes `N(u)` into `out`.
    fn nonlinear(&self, u: &[Complex64], out: &mut [Complex64]);
}

/// Per-mode ETDRK4 coefficients for a fixed step `h`.
#[derive(Debug, Clone)]
pub struct EtdTables {
    pub h: f64,
    pub e_full: Vec<Complex64>,
    pub e_half: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
    pub f3: Vec<Complex64>,
}

impl EtdTables {
    pub fn len(&self) -> usize {
        self.e_full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_full.is_empty()
    }
}

/// `(Q, f1, f2, f3) / h` as closed forms in `z`.
fn weights_closed(z: Complex64) -> [Complex64; 4] {
    let ez = z.exp();
    let z3 = z * z * z;
    [
        ((z / 2.0).exp() - 1.0) / z,
        (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
        2.0 * (2.0 + z + ez * (z - 2.0)) / z3,
        (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3,
    ]
}

fn weights_contour(z: Complex64) -> [Complex64; 4] {
    let mut acc = [Complex64::default(); 4];
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let w = z + Complex64::from_polar(CONTOUR_RADIUS, theta);
        for (a, v) in acc.iter_mut().zip(weights_closed(w)) {
            *a += v;
        }
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

/// Builds the ETDRK4 tables for `Λ` and step `h`.
pub fn phi_tables(lambda: &[Complex64], h: f64) -> Result<EtdTables> {
    if !(h.is_finite() && h > 0.0) {
        return Err(KbkError::InvalidParameter(format!(
            "time step must be positive, got {h}"
        )));
    }
    let n = lambda.len();
    let mut t = EtdTables {
        h,
        e_full: Vec::with_capacity(n),
        e_half: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        f1: Vec::with_capacity(n),
        f2: Vec::with_capacity(n),
        f3: Vec::with_capacity(n),
    };
    for &lam in lambda {
        let z = lam * h;
        let [q, f1, f2, f3] = if z.norm() < CONTOUR_THRESHOLD {
            weights_contour(z)
        } else {
            weights_closed(z)
        };
        t.e_full.push(z.exp());
        t.e_half.push((z / 2.0).exp());
        t.q.push(h * q);
        t.f1.push(h * f1);
        t.f2.push(h * f2);
        t.f3.push(h * f3);
    }
    Ok(t)
}

/// Scratch buffers for repeated steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    nu: Vec<Complex64>,
    a: Vec<Complex64>,
    na: Vec<Complex64>,
    b: Vec<Complex64>,
    nb: Vec<Complex64>,
    c: Vec<Complex64>,
    nc: Vec<Complex64>,
}

impl Workspace {
    pub fn new(len: usize) -> Self {
        let z = vec![Complex64::default(); len];
        Workspace {
            nu: z.clone(),
            a: z.clone(),
            na: z.clone(),
            b: z.clone(),
            nb: z.clone(),
            c: z.clone(),
            nc: z,
        }
    }
}

/// One ETDRK4 step, in place.
pub fn step_in_place<S: StiffSystem + ?Sized>(
    system: &S,
    tables: &EtdTables,
    u: &mut [Complex64],
    ws: &mut Workspace,
) {
    let n = u.len();
    assert_eq!(tables.len(), n, "tables built for a different system size");
    system.nonlinear(u, &mut ws.nu);
    for m in 0..n {
        ws.a[m] = tables.e_half[m] * u[m] + tables.q[m] * ws.nu[m];
    }
    system.nonlinear(&ws.a, &mut ws.na);
    for m in 0..n {
        ws.b[m] = tables.e_half[m] * u[m] + tables.q[m] * ws.na[m];
    }
    system.nonlinear(&ws.b, &mut ws.nb);
    for m in 0..n {
        ws.c[m] = tables.e_half[m] * ws.a[m] + tables.q[m] * (2.0 * ws.nb[m] - ws.nu[m]);
    }
    system.nonlinear(&ws.c, &mut ws.nc);
    for m in 0..n {
        u[m] = tables.e_full[m] * u[m]
            + tables.f1[m] * ws.nu[m]
            + tables.f2[m] * (ws.na[m] + ws.nb[m])
            + tables.f3[m] * ws.nc[m];
    }
}

/// One ETDRK4 step returning the new state.
pub fn step<S: StiffSystem + ?Sized>(
    system: &S,
    tables: &EtdTables,
    u: &[Complex64],
) -> Vec<Complex64> {
    let mut out = u.to_vec();
    let mut ws = Workspace::new(u.len());
    step_in_place(system, tables, &mut out, &mut ws);
    out
}

/// Integrates `initial` to `t_final` with `nt` equal steps, calling
/// `callback(step, t, state)` whenever `observe(step)` is true (step 0 is
/// the initial state, step `nt` the final one).
pub fn evolve_observed<O, F>(
    initial: &State,
    model: &KbkModel,
    t_final: f64,
    nt: usize,
    mut observe: O,
    mut callback: F,
) -> Result<State>
where
    O: FnMut(usize) -> bool,
    F: FnMut(usize, f64, &State) -> Result<()>,
{
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(KbkError::InvalidParameter(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if nt == 0 {
        return Err(KbkError::InvalidParameter("need at least one time step".into()));
    }
    let h = t_final / nt as f64;
    let tables = phi_tables(&model.linear_symbols(), h)?;
    let mut u = model.to_diagonal(initial)?.into_packed();
    let mut previous = u.clone();
    let mut ws = Workspace::new(u.len());
    let grid = model.grid().clone();

    if observe(0) {
        callback(0, 0.0, initial)?;
    }
    for n in 1..=nt {
        previous.copy_from_slice(&u);
        step_in_place(model, &tables, &mut u, &mut ws);
        let t = if n == nt { t_final } else { n as f64 * h };
        if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            let last = model
                .from_diagonal(&crate::dynamics::DiagonalState::from_packed(&grid, previous))
                .ok()
                .filter(State::is_finite)
                .and_then(|s| DiagnosticsRecord::compute(&s, model.eps(), (n - 1) as f64 * h, None).ok());
            return Err(KbkError::BlowUp {
                step: n,
                time: t,
                last_finite: Box::new(last),
            });
        }
        let wanted = observe(n);
        if n == nt || wanted {
            let state = model.from_diagonal(&crate::dynamics::DiagonalState::from_packed(
                &grid,
                u.clone(),
            ))?;
            if wanted {
                callback(n, t, &state)?;
            }
            if n == nt {
                return Ok(state);
            }
        }
    }
    unreachable!("loop returns at the final step")
}

/// [`evolve_observed`] with a fixed callback cadence (every `every` steps,
/// plus the initial and final states).
pub fn evolve<F>(
    initial: &State,
    model: &KbkModel,
    t_final: f64,
    nt: usize,
    every: usize,
    callback: F,
) -> Result<State>
where
    F: FnMut(usize, f64, &State) -> Result<()>,
{
    let every = every.max(1);
    evolve_observed(
        initial,
        model,
        t_final,
        nt,
        |n| n % every == 0 || n == nt,
        callback,
    )
}

/// Integrates without observation.
pub fn evolve_plain(initial: &State, model: &KbkModel, t_final: f64, nt: usize) -> Result<State> {
    evolve_observed(initial, model, t_final, nt, |_| false, |_, _, _| Ok(()))
}

impl KbkModel {
    /// `[Λ₊ | Λ₋]` in the packed diagonal layout.
    pub fn linear_symbols(&self) -> Vec<Complex64> {
        StiffSystem::linear(self).to_vec()
    }

    /// One ETDRK4 step of the KBK flow in diagonal variables.
    pub fn step(
        &self,
        diag: &crate::dynamics::DiagonalState,
        tables: &EtdTables,
    ) -> crate::dynamics::DiagonalState {
        crate::dynamics::DiagonalState::from_packed(self.grid(), step(self, tables, diag.as_packed()))
    }
}
