//! Single-pipe physics in nondimensional form.
//!
//! The along-pipe pressure obeys
//!
//! ```text
//! dp/dx = G(p, f) = rho * (R2 rho^2 sin(theta) - R1 beta f|f|) / (rho^2 - R1 f^2 rho'(p))
//! ```
//!
//! with constant mass flow `f`. Integration is carried out in the transformed
//! variable `pi = p^3`, which conditions the ODE much better over network
//! iterations; the sensitivities `s_p = dp/dp_in` and `s_f = dp/df` of the
//! physical pressure are integrated alongside via their variational equations.

use crate::eos::{EosError, ScaledEos};
use crate::rk::{self, RkError, StepControl, Trajectory};
use thiserror::Error;

/// Relative threshold below which the ODE denominator counts as vanished.
const CHOKE_EPS: f64 = 1e-12;

/// Model-term switches: gravity and convective inertia can be excluded to
/// reproduce the reduced equation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermToggles {
    pub gravity: bool,
    pub inertia: bool,
}

impl Default for TermToggles {
    fn default() -> Self {
        Self {
            gravity: true,
            inertia: true,
        }
    }
}

impl TermToggles {
    pub const FULL: Self = Self {
        gravity: true,
        inertia: true,
    };
    pub const NONE: Self = Self {
        gravity: false,
        inertia: false,
    };
    pub const GRAVITY_ONLY: Self = Self {
        gravity: true,
        inertia: false,
    };
    pub const INERTIA_ONLY: Self = Self {
        gravity: false,
        inertia: true,
    };
}

/// Nondimensional pipe geometry together with its dimensionless groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeGeometry {
    /// Length in units of the nominal length.
    pub length: f64,
    /// Diameter in units of the nominal length.
    pub diameter: f64,
    /// Cross-sectional area in units of the nominal area.
    pub area: f64,
    /// Darcy friction factor.
    pub friction: f64,
    /// Component of the gravity unit vector along the flow direction;
    /// positive means the pipe descends in the flow direction.
    pub sin_theta: f64,
    /// M^2 / (Eu * area^2).
    pub r1: f64,
    /// M^2 / (Eu * Fr^2).
    pub r2: f64,
    /// friction / (2 * diameter).
    pub beta: f64,
}

#[derive(Debug, Error)]
pub enum PipeError {
    #[error("choked flow: ODE denominator vanished at p = {pressure:.6e}, f = {flow:.6e} (nondimensional)")]
    ChokedFlow { pressure: f64, flow: f64 },
    #[error("non-physical pressure during integration: pi = {pi:.6e} at x = {x:.6e}")]
    NonPhysicalPressure { pi: f64, x: f64 },
    #[error("integration exceeded the step budget ({max_steps} steps) at x = {x:.6e}")]
    StiffnessBudgetExceeded { x: f64, max_steps: usize },
    #[error("integration step size underflowed at x = {x:.6e}")]
    StepUnderflow { x: f64 },
    #[error(transparent)]
    Eos(#[from] EosError),
}

impl From<RkError<PipeError>> for PipeError {
    fn from(err: RkError<PipeError>) -> Self {
        match err {
            RkError::Rhs(e) => e,
            RkError::MaxStepsExceeded { x, max_steps } => {
                PipeError::StiffnessBudgetExceeded { x, max_steps }
            }
            RkError::StepUnderflow { x } => PipeError::StepUnderflow { x },
        }
    }
}

/// Pressure profile along a pipe, with optional sensitivities.
///
/// The grid is the sequence of accepted integrator steps and always contains
/// both endpoints. Sensitivities refer to the physical pressure: `s_p(0) = 1`,
/// `s_f(0) = 0`.
#[derive(Debug, Clone)]
pub struct PipeSolution {
    pub positions: Vec<f64>,
    pub pressures: Vec<f64>,
    pub sens_inlet: Option<Vec<f64>>,
    pub sens_flow: Option<Vec<f64>>,
    pub flow: f64,
}

impl PipeSolution {
    pub fn outlet_pressure(&self) -> f64 {
        *self.pressures.last().expect("non-empty profile")
    }

    /// `(s_p(L), s_f(L))` when the solution was integrated with sensitivities.
    pub fn outlet_sensitivities(&self) -> Option<(f64, f64)> {
        match (&self.sens_inlet, &self.sens_flow) {
            (Some(sp), Some(sf)) => Some((*sp.last().unwrap(), *sf.last().unwrap())),
            _ => None,
        }
    }
}

/// Evaluates `G(p, f)` together with its partial derivatives in `p` and `f`.
struct GEval {
    g: f64,
    g_p: f64,
    g_f: f64,
}

fn eval_g(
    p: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
) -> Result<GEval, PipeError> {
    let rho = eos.density(p)?;
    let drho = eos.drho_dp(p)?;
    let d2rho = eos.d2rho_dp2();
    let sin_theta = if toggles.gravity { geom.sin_theta } else { 0.0 };

    let num = geom.r2 * rho * rho * sin_theta - geom.r1 * geom.beta * f * f.abs();
    let (den, den_p, den_f) = if toggles.inertia {
        (
            rho * rho - geom.r1 * f * f * drho,
            2.0 * rho * drho - geom.r1 * f * f * d2rho,
            -2.0 * geom.r1 * f * drho,
        )
    } else {
        (rho * rho, 2.0 * rho * drho, 0.0)
    };
    if den <= CHOKE_EPS * rho * rho {
        return Err(PipeError::ChokedFlow { pressure: p, flow: f });
    }

    let num_p = 2.0 * geom.r2 * rho * drho * sin_theta;
    let num_f = -2.0 * geom.r1 * geom.beta * f.abs();

    let g = rho * num / den;
    let g_p = (drho * num + rho * num_p) / den - rho * num * den_p / (den * den);
    let g_f = rho * (num_f * den - num * den_f) / (den * den);
    Ok(GEval { g, g_p, g_f })
}

/// Right-hand side `G(p, f) = dp/dx` of the pipe ODE.
pub fn rhs_g(
    p: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
) -> Result<f64, PipeError> {
    Ok(eval_g(p, f, geom, eos, toggles)?.g)
}

/// Analytical partial derivatives `(G_p, G_f)` of the right-hand side.
pub fn rhs_g_partials(
    p: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
) -> Result<(f64, f64), PipeError> {
    let e = eval_g(p, f, geom, eos, toggles)?;
    Ok((e.g_p, e.g_f))
}

/// Transformed right-hand side `H(pi, f) = d(pi)/dx` with `pi = p^3`.
pub fn rhs_h(
    pi: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
) -> Result<f64, PipeError> {
    if pi <= 0.0 || pi.is_nan() {
        return Err(PipeError::NonPhysicalPressure { pi, x: f64::NAN });
    }
    let p = pi.cbrt();
    Ok(3.0 * p * p * rhs_g(p, f, geom, eos, toggles)?)
}

/// `H` together with its partial derivatives in `pi` and `f`, used by the
/// two-point collocation rows: `H_pi = 2 G / p + G_p`, `H_f = 3 p^2 G_f`.
pub fn rhs_h_with_partials(
    pi: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
) -> Result<(f64, f64, f64), PipeError> {
    if pi <= 0.0 || pi.is_nan() {
        return Err(PipeError::NonPhysicalPressure { pi, x: f64::NAN });
    }
    let p = pi.cbrt();
    let e = eval_g(p, f, geom, eos, toggles)?;
    let h = 3.0 * p * p * e.g;
    let h_pi = 2.0 * e.g / p + e.g_p;
    let h_f = 3.0 * p * p * e.g_f;
    Ok((h, h_pi, h_f))
}

/// Integrates the pressure profile from `p(0) = p_in` to `x = length`.
pub fn integrate_pressure(
    p_in: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
    ctrl: &StepControl,
) -> Result<PipeSolution, PipeError> {
    if p_in <= 0.0 || p_in.is_nan() {
        return Err(PipeError::NonPhysicalPressure {
            pi: p_in * p_in * p_in,
            x: 0.0,
        });
    }
    let rhs = |x: f64, y: &[f64; 1]| -> Result<[f64; 1], PipeError> {
        let pi = y[0];
        if pi <= 0.0 || pi.is_nan() {
            return Err(PipeError::NonPhysicalPressure { pi, x });
        }
        Ok([rhs_h(pi, f, geom, eos, toggles)?])
    };
    let traj = rk::integrate(rhs, 0.0, geom.length, [p_in.powi(3)], ctrl)
        .map_err(PipeError::from)?;
    Ok(solution_from_trajectory::<1>(&traj, f, false))
}

/// Integrates pressure and the forward sensitivities `s_p`, `s_f` jointly.
pub fn integrate_with_sensitivities(
    p_in: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
    ctrl: &StepControl,
) -> Result<PipeSolution, PipeError> {
    if p_in <= 0.0 || p_in.is_nan() {
        return Err(PipeError::NonPhysicalPressure {
            pi: p_in * p_in * p_in,
            x: 0.0,
        });
    }
    let rhs = |x: f64, y: &[f64; 3]| -> Result<[f64; 3], PipeError> {
        let pi = y[0];
        if pi <= 0.0 || pi.is_nan() {
            return Err(PipeError::NonPhysicalPressure { pi, x });
        }
        let p = pi.cbrt();
        let e = eval_g(p, f, geom, eos, toggles)?;
        Ok([3.0 * p * p * e.g, e.g_p * y[1], e.g_p * y[2] + e.g_f])
    };
    let traj = rk::integrate(rhs, 0.0, geom.length, [p_in.powi(3), 1.0, 0.0], ctrl)
        .map_err(PipeError::from)?;
    Ok(solution_from_trajectory::<3>(&traj, f, true))
}

fn solution_from_trajectory<const N: usize>(
    traj: &Trajectory<N>,
    flow: f64,
    with_sens: bool,
) -> PipeSolution {
    let positions = traj.xs.clone();
    let pressures = traj.ys.iter().map(|y| y[0].cbrt()).collect();
    let (sens_inlet, sens_flow) = if with_sens && N >= 3 {
        (
            Some(traj.ys.iter().map(|y| y[1]).collect()),
            Some(traj.ys.iter().map(|y| y[2]).collect()),
        )
    } else {
        (None, None)
    };
    PipeSolution {
        positions,
        pressures,
        sens_inlet,
        sens_flow,
        flow,
    }
}

/// The per-pipe residual `F = pi(L) - p_out^3` and its derivatives with
/// respect to the physical end pressures and the flow.
#[derive(Debug, Clone, Copy)]
pub struct EdgeResidual {
    pub value: f64,
    pub d_inlet_pressure: f64,
    pub d_outlet_pressure: f64,
    pub d_flow: f64,
    /// Integrated outlet pressure `p(L)` (physical, nondimensional).
    pub outlet_pressure: f64,
}

/// Evaluates the solution-operator residual for the end-pressure pair
/// `(p_in, p_out)` and flow `f`, with derivatives from the forward
/// sensitivities:
///
/// ```text
/// F       = p(L)^3 - p_out^3
/// dF/dp_in  = 3 p(L)^2 s_p(L)
/// dF/df     = 3 p(L)^2 s_f(L)
/// dF/dp_out = -3 p_out^2
/// ```
pub fn residual_f(
    p_in: f64,
    p_out: f64,
    f: f64,
    geom: &PipeGeometry,
    eos: &ScaledEos,
    toggles: TermToggles,
    ctrl: &StepControl,
) -> Result<EdgeResidual, PipeError> {
    let sol = integrate_with_sensitivities(p_in, f, geom, eos, toggles, ctrl)?;
    let p_l = sol.outlet_pressure();
    let (s_p, s_f) = sol.outlet_sensitivities().expect("sensitivities requested");
    Ok(EdgeResidual {
        value: p_l.powi(3) - p_out.powi(3),
        d_inlet_pressure: 3.0 * p_l * p_l * s_p,
        d_outlet_pressure: -3.0 * p_out * p_out,
        d_flow: 3.0 * p_l * p_l * s_f,
        outlet_pressure: p_l,
    })
}
