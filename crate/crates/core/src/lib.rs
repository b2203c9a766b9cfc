//! Pseudospectral simulation of the good Kaup–Broer–Kupershmidt system
//!
//! ```text
//! η_t + v_x + (ηv)_x − ε²·v_xxx = 0
//! v_t + η_x + v·v_x            = 0
//! ```
//!
//! on a periodic domain, with a Fourier discretization in space and the
//! ETDRK4 exponential integrator in time. The crate also carries the exact
//! solutions, conserved-quantity diagnostics and the scenario runner used
//! by the `kbk` command-line tool.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod etd;
pub mod exact;
pub mod experiment;
pub mod grid;

pub use diagnostics::{DiagnosticsRecord, SolitonFit};
pub use dynamics::{Branch, DiagonalState, KbkModel, ModelParams, State};
pub use error::{KbkError, Result};
pub use etd::{evolve, evolve_observed, evolve_plain, phi_tables, EtdTables};
pub use exact::{GaussianKind, SolitonParams};
pub use grid::Grid;
