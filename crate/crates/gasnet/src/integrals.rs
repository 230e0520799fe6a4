//! Closed-form first integrals of the pipe ODE for the ideal gas.
//!
//! For `rho = Eu * p` the pipe ODE integrates in closed form for every
//! combination of the gravity and inertia terms. With `R1h = R1/Eu`,
//! `R2h = R2*Eu` and `gamma = 2 L R2h sin(theta)` the four variants read
//!
//! ```text
//! frictional          p0^2 - pL^2 - 2 L R1h beta f|f|                     = 0
//! with inertia        p0^2 - pL^2 - R1h f^2 ln(p0^2/pL^2)
//!                      - 2 L R1h beta f|f|                                = 0
//! with gravity        e^g p0^2 - pL^2 - 2 L R1h beta f|f| (e^g - 1)/g     = 0
//! gravity + inertia   (R1h f^2 - d) ln((p0^2-d)/(pL^2-d))
//!                      - R1h f^2 ln(p0^2/pL^2) - 2 L R1h beta f|f|        = 0
//! ```
//!
//! with `d = beta R1h f|f| / (R2h sin(theta))`. These relations serve as the
//! independent oracle for the ODE solution path: they never call the
//! integrator.

use crate::pipe::TermToggles;
use thiserror::Error;

/// Below this magnitude of `gamma` the gravity variants switch to their
/// zero-gravity limits to avoid 0/0 in `(e^g - 1)/g` and a diverging branch
/// parameter.
const GAMMA_EPS: f64 = 1e-8;
/// Below this flow magnitude the combined variant degenerates (all its terms
/// carry a factor of `f`), so it dispatches to the gravity-only form.
const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IntegralError {
    #[error("first-integral branch violation: p^2 - delta changes sign between the pipe ends (p0 = {p0:.6e}, pl = {pl:.6e}, delta = {delta:.6e})")]
    BranchViolation { p0: f64, pl: f64, delta: f64 },
    #[error("end pressures must be positive (p0 = {p0:.6e}, pl = {pl:.6e})")]
    NonPositivePressure { p0: f64, pl: f64 },
    #[error("no sign change of the residual found in [{lo:.6e}, {hi:.6e}]")]
    NoBracket { lo: f64, hi: f64 },
}

/// Parameters of the ideal-gas first integrals for one pipe.
#[derive(Debug, Clone, Copy)]
pub struct IdealCaseParams {
    /// Nondimensional pipe length.
    pub length: f64,
    /// friction / (2 * diameter), nondimensional.
    pub beta: f64,
    /// R1 / Eu.
    pub r1_hat: f64,
    /// R2 * Eu.
    pub r2_hat: f64,
    pub sin_theta: f64,
    pub toggles: TermToggles,
}

impl IdealCaseParams {
    /// `gamma = 2 L R2h sin(theta)`, the hydrostatic exponent.
    pub fn gamma(&self) -> f64 {
        2.0 * self.length * self.r2_hat * self.sin_theta
    }

    fn gravity_active(&self) -> bool {
        self.toggles.gravity && self.gamma().abs() >= GAMMA_EPS
    }

    /// Evaluates the first-integral residual for end pressures `(p0, pl)`
    /// and flow `f`, dispatching on the active terms.
    pub fn residual(&self, p0: f64, pl: f64, f: f64) -> Result<f64, IntegralError> {
        if p0 <= 0.0 || pl <= 0.0 || p0.is_nan() || pl.is_nan() {
            return Err(IntegralError::NonPositivePressure { p0, pl });
        }
        let friction = 2.0 * self.length * self.r1_hat * self.beta * f * f.abs();
        match (self.gravity_active(), self.toggles.inertia) {
            (false, false) => Ok(p0 * p0 - pl * pl - friction),
            (false, true) => {
                let inertia = self.r1_hat * f * f * ((p0 * p0) / (pl * pl)).ln();
                Ok(p0 * p0 - pl * pl - inertia - friction)
            }
            (true, false) => Ok(self.gravity_only_residual(p0, pl, friction)),
            (true, true) => {
                if f.abs() < FLOW_EPS {
                    // Every term of the combined form carries a factor of f;
                    // the hydrostatic relation is the meaningful limit.
                    return Ok(self.gravity_only_residual(p0, pl, friction));
                }
                let delta = self.beta * self.r1_hat * f * f.abs()
                    / (self.r2_hat * self.sin_theta);
                let a0 = p0 * p0 - delta;
                let al = pl * pl - delta;
                if a0 * al <= 0.0 {
                    return Err(IntegralError::BranchViolation { p0, pl, delta });
                }
                let r1f2 = self.r1_hat * f * f;
                Ok((r1f2 - delta) * (a0 / al).ln()
                    - r1f2 * ((p0 * p0) / (pl * pl)).ln()
                    - friction)
            }
        }
    }

    fn gravity_only_residual(&self, p0: f64, pl: f64, friction: f64) -> f64 {
        let gamma = self.gamma();
        gamma.exp() * p0 * p0 - pl * pl - friction * (gamma.exp() - 1.0) / gamma
    }

    /// Lower admissible bound on a pressure given the active terms (choking
    /// and branch limits), used to restrict root brackets.
    fn pressure_floor(&self, p_ref_sq: f64, f: f64) -> f64 {
        let mut floor: f64 = 0.0;
        if self.toggles.inertia {
            floor = floor.max((self.r1_hat * f * f).sqrt() * (1.0 + 1e-9));
        }
        if self.gravity_active() && self.toggles.inertia && f.abs() >= FLOW_EPS {
            let delta =
                self.beta * self.r1_hat * f * f.abs() / (self.r2_hat * self.sin_theta);
            if delta > 0.0 && p_ref_sq > delta {
                floor = floor.max(delta.sqrt() * (1.0 + 1e-9));
            }
        }
        floor
    }

    /// Solves the residual for the outlet pressure at given inlet pressure
    /// and flow. The root is bracketed in `[1e-6, 10 p0]` (tightened by the
    /// choking/branch bounds) and polished to `|residual| < 1e-12` scaled.
    pub fn solve_outlet(&self, p0: f64, f: f64) -> Result<f64, IntegralError> {
        let lo = 1e-6_f64.max(self.pressure_floor(p0 * p0, f));
        let mut hi = 10.0 * p0;
        if self.gravity_active() && self.toggles.inertia && f.abs() >= FLOW_EPS {
            let delta =
                self.beta * self.r1_hat * f * f.abs() / (self.r2_hat * self.sin_theta);
            if delta > 0.0 && p0 * p0 < delta {
                hi = hi.min(delta.sqrt() * (1.0 - 1e-9));
            }
        }
        if lo >= hi {
            return Err(IntegralError::NoBracket { lo, hi });
        }
        let scale = (p0 * p0).max(1.0);
        solve_scalar(|pl| self.residual(p0, pl, f), lo, hi, 1e-12 * scale)
    }

    /// Solves the residual for the flow given both end pressures.
    pub fn solve_flow(&self, p0: f64, pl: f64) -> Result<f64, IntegralError> {
        let scale = (p0 * p0).max(1.0);
        let f_cap = if self.toggles.inertia {
            0.999_999 * (p0.min(pl)) / self.r1_hat.sqrt()
        } else {
            1e12
        };

        if self.gravity_active() && self.toggles.inertia {
            // Every term of the combined form carries a factor of f^2, so
            // the raw residual has a spurious pinch at f = 0. Search each
            // half-axis with the residual normalized by f^2 instead, after
            // checking the hydrostatic f = 0 candidate.
            if self.residual(p0, pl, 0.0)?.abs() < 1e-12 * scale {
                return Ok(0.0);
            }
            let normalized = |f: f64| self.residual(p0, pl, f).map(|r| r / (f * f));
            for side in [1.0f64, -1.0] {
                let (a, b) = (side * f_cap * 1e-9, side * f_cap);
                let root = solve_scalar(normalized, a.min(b), a.max(b), 1e-10 * scale);
                if let Ok(x) = root {
                    // Polish against the raw residual if it brackets nearby.
                    let (lo, hi) = (x * (1.0 - 1e-3), x * (1.0 + 1e-3));
                    let (lo, hi) = (lo.min(hi), lo.max(hi));
                    if let (Ok(ra), Ok(rb)) =
                        (self.residual(p0, pl, lo), self.residual(p0, pl, hi))
                    {
                        if ra * rb < 0.0 {
                            if let Ok(y) = solve_scalar(
                                |f| self.residual(p0, pl, f),
                                lo,
                                hi,
                                1e-12 * scale,
                            ) {
                                return Ok(y);
                            }
                        }
                    }
                    return Ok(x);
                }
            }
            return Err(IntegralError::NoBracket {
                lo: -f_cap,
                hi: f_cap,
            });
        }

        // The remaining variants are monotone decreasing in f with no pinch;
        // expand symmetric brackets until a sign change.
        let mut f_max = f_cap.min(1.0);
        loop {
            let r_lo = self.residual(p0, pl, f_max);
            let r_hi = self.residual(p0, pl, -f_max);
            if let (Ok(r_lo), Ok(r_hi)) = (r_lo, r_hi) {
                if r_lo * r_hi <= 0.0 {
                    return solve_scalar(
                        |f| self.residual(p0, pl, f),
                        -f_max,
                        f_max,
                        1e-12 * scale,
                    );
                }
            }
            if f_max >= f_cap {
                return Err(IntegralError::NoBracket {
                    lo: -f_max,
                    hi: f_max,
                });
            }
            f_max = (f_max * 2.0).min(f_cap);
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`: scans for a sign change (skipping
/// points where the residual is undefined), then bisects with secant
/// acceleration until `|f| < tol`.
fn solve_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, IntegralError>
where
    F: Fn(f64) -> Result<f64, IntegralError>,
{
    const SCAN: usize = 256;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=SCAN {
        let x = lo + (hi - lo) * i as f64 / SCAN as f64;
        let Ok(v) = f(x) else { continue };
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            return Ok(x);
        }
        if let Some((px, pv)) = prev {
            if pv * v < 0.0 {
                bracket = Some((px, pv, x, v));
                break;
            }
        }
        prev = Some((x, v));
    }
    let Some((mut a, mut fa, mut b, mut fb)) = bracket else {
        return Err(IntegralError::NoBracket { lo, hi });
    };

    for _ in 0..200 {
        // Secant candidate, safeguarded to the interior of the bracket.
        let mut x = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = mid;
        }
        let fx = match f(x) {
            Ok(v) if v.is_finite() => v,
            _ => {
                // Undefined interior point: fall back to plain bisection.
                let fm = f(mid).ok().filter(|v| v.is_finite());
                match fm {
                    Some(v) => {
                        if v * fa < 0.0 {
                            b = mid;
                            fb = v;
                        } else {
                            a = mid;
                            fa = v;
                        }
                        continue;
                    }
                    None => return Err(IntegralError::NoBracket { lo: a, hi: b }),
                }
            }
        };
        if fx.abs() < tol || (b - a).abs() < 1e-15 * b.abs().max(1.0) {
            return Ok(x);
        }
        if fx * fa < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(toggles: TermToggles) -> IdealCaseParams {
        IdealCaseParams {
            length: 1.0,
            beta: 1286.9198312236288,
            r1_hat: 1.2257827588896188e-4,
            r2_hat: 7.995460604745507,
            sin_theta: 2.0_f64.to_radians().sin(),
            toggles,
        }
    }

    #[test]
    fn zero_flow_no_gravity_reduces_to_pressure_difference() {
        let p = params(TermToggles::NONE);
        assert_eq!(p.residual(1.2, 1.2, 0.0).unwrap(), 0.0);
        let r = p.residual(1.2, 1.0, 0.0).unwrap();
        assert!((r - (1.44 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gravity_residual_approaches_the_flat_form_as_gamma_vanishes() {
        // Below the 1e-8 guard the dispatch switches to the flat form.
        let flat = params(TermToggles::NONE);
        let mut p = params(TermToggles::GRAVITY_ONLY);
        p.sin_theta = 1e-10 / (2.0 * p.length * p.r2_hat);
        let r_grav = p.residual(1.0, 0.9, 0.8).unwrap();
        let r_flat = flat.residual(1.0, 0.9, 0.8).unwrap();
        assert!((r_grav - r_flat).abs() < 1e-8);
        // Just above the guard the series limit (e^g - 1)/g -> 1 keeps the
        // directly-evaluated form within O(gamma) of the flat one.
        p.sin_theta = 2e-8 / (2.0 * p.length * p.r2_hat);
        let r_above = p.residual(1.0, 0.9, 0.8).unwrap();
        assert!((r_above - r_flat).abs() < 1e-6);
        assert_ne!(r_above, r_flat);
    }

    #[test]
    fn outlet_of_the_quarter_drop_case_is_one_half() {
        // p0 = 1 and 2 L R1h beta f|f| = 0.75 puts the root at exactly 0.5.
        let mut p = params(TermToggles::NONE);
        p.length = 1.0;
        p.beta = 0.375 / p.r1_hat;
        let pl = p.solve_outlet(1.0, 1.0).unwrap();
        assert!((pl - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outlet_and_flow_solves_are_inverse() {
        for toggles in [
            TermToggles::NONE,
            TermToggles::INERTIA_ONLY,
            TermToggles::GRAVITY_ONLY,
            TermToggles::FULL,
        ] {
            let p = params(toggles);
            let f = 0.85;
            let pl = p.solve_outlet(1.0, f).unwrap();
            let back = p.solve_flow(1.0, pl).unwrap();
            assert!(
                (back - f).abs() < 1e-9,
                "toggles {toggles:?}: {back} vs {f}"
            );
        }
    }

    #[test]
    fn negative_flow_raises_outlet_pressure() {
        let p = params(TermToggles::NONE);
        let pl = p.solve_outlet(1.0, -1.0).unwrap();
        assert!(pl > 1.0);
        // Antisymmetry of the no-gravity form: swapping ends and negating
        // the flow negates the residual.
        let r1 = p.residual(1.0, pl, -1.0).unwrap();
        let r2 = p.residual(pl, 1.0, 1.0).unwrap();
        assert!((r1 + r2).abs() < 1e-12);
    }

    #[test]
    fn combined_form_rejects_branch_crossings() {
        let p = params(TermToggles::FULL);
        // delta sits between the end pressures squared for these inputs.
        let delta = p.beta * p.r1_hat * 1.0 / (p.r2_hat * p.sin_theta);
        let p0 = (delta * 1.2).sqrt();
        let pl = (delta * 0.8).sqrt();
        let err = p.residual(p0, pl, 1.0).unwrap_err();
        assert!(matches!(err, IntegralError::BranchViolation { .. }));
    }

    #[test]
    fn combined_form_with_zero_flow_is_hydrostatic() {
        let p = params(TermToggles::FULL);
        let pl = p.solve_outlet(1.0, 0.0).unwrap();
        assert!((pl - (p.gamma().exp()).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn roots_converge_to_the_reduced_variants() {
        // Shrinking R1h with the friction product held fixed sends each
        // variant's root to its zero-inertia counterpart.
        let base = params(TermToggles::FULL);
        let reduced = params(TermToggles::GRAVITY_ONLY);
        let target = reduced.solve_outlet(1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let shrink = 0.25_f64.powi(k);
            let mut p = base;
            p.r1_hat *= shrink;
            p.beta /= shrink;
            let pl = p.solve_outlet(1.0, 1.0).unwrap();
            let dev = (pl - target).abs();
            assert!(dev <= prev * 1.001 + 1e-14, "k = {k}: {dev:.3e} vs {prev:.3e}");
            prev = dev;
        }
        assert!(prev < 1e-6, "final deviation {prev:.3e}");
    }

    #[test]
    fn no_bracket_is_reported_for_impossible_drops() {
        // Friction consumes more than the available pressure head.
        let mut p = params(TermToggles::NONE);
        p.beta = 10.0 / p.r1_hat;
        let err = p.solve_outlet(1.0, 1.0).unwrap_err();
        assert!(matches!(err, IntegralError::NoBracket { .. }));
    }
}
