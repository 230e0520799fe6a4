//! Steady-state isothermal gas flow in pipeline networks.
//!
//! The pressure along each pipe obeys a first-order ODE that keeps the
//! gravity and convective-inertia terms and admits a non-ideal equation of
//! state; pipes couple at junctions through pressure continuity, compressor
//! boost ratios and mass balance. The resulting differential-algebraic
//! system is solved with Newton-Raphson: per-pipe residuals come from the
//! ODE solution operator in the transformed variable `pi = p^3`, Jacobian
//! entries from forward-sensitivity integrations, and initial guesses from
//! a two-point collocation coarse model.
//!
//! Crate layout:
//!
//! - [`eos`] — ideal and CNGA equations of state;
//! - [`nondim`] — nominal scales, dimensionless groups, network scaling;
//! - [`rk`] — adaptive embedded Runge-Kutta integration;
//! - [`pipe`] — pipe ODE right-hand sides, sensitivities, edge residual;
//! - [`integrals`] — closed-form ideal-gas first integrals (validation oracle);
//! - [`network`] — graph model and structural diagnostics;
//! - [`solver`] — system assembly and the damped Newton iteration;
//! - [`synth`] — seeded synthetic network generation;
//! - [`studies`] — inclination sweeps, gravity-effect comparisons, residual
//!   validation reports;
//! - [`io`] — network/solution file formats and table writers.

pub mod eos;
pub mod integrals;
pub mod io;
pub mod network;
pub mod nondim;
pub mod pipe;
pub mod rk;
pub mod solver;
pub mod studies;
pub mod synth;

pub use eos::{EosKind, EosModel};
pub use network::{Network, NodeKind};
pub use nondim::{NominalConfig, NominalScales};
pub use pipe::TermToggles;
pub use solver::{solve, InitStrategy, SolveOptions, SolveReport, Solution};
