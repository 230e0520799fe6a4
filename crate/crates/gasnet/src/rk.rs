//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! The right-hand side is fallible: physics code signals choked flow or a
//! non-physical state through its error type. A failure at the start of a
//! step aborts the integration; a failure inside a trial stage is treated
//! like a rejected step and the step size is reduced.

/// Step-size and error control for the integrator.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Relative local error tolerance per step.
    pub rel_tol: f64,
    /// Absolute local error tolerance per step.
    pub abs_tol: f64,
    /// Budget of accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 100_000,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug)]
pub enum RkError<E> {
    /// The right-hand side failed at an accepted point.
    Rhs(E),
    /// The step budget was exhausted before reaching the end point.
    MaxStepsExceeded { x: f64, max_steps: usize },
    /// The step size underflowed while retrying failed stages.
    StepUnderflow { x: f64 },
}

/// Accepted integration steps; `xs` ascends from the start to the end point.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub xs: Vec<f64>,
    pub ys: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &[f64; N] {
        self.ys.last().expect("trajectory holds at least the start point")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (the seventh stage is the FSAL evaluation).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 5.0;

/// Integrates `dy/dx = rhs(x, y)` from `x0` to `x_end > x0`, recording every
/// accepted step. The start point is always included.
pub fn integrate<const N: usize, E0, F>(
    mut rhs: F,
    x0: f64,
    x_end: f64,
    y0: [f64; N],
    ctrl: &StepControl,
) -> Result<Trajectory<N>, RkError<E0>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E0>,
{
    let span = x_end - x0;
    assert!(span > 0.0, "integration span must be positive");
    let mut xs = vec![x0];
    let mut ys = vec![y0];
    let mut x = x0;
    let mut y = y0;
    let mut h = 0.01 * span;
    let h_floor = span * 1e-15;
    let mut steps = 0usize;

    while x < x_end {
        if steps >= ctrl.max_steps {
            return Err(RkError::MaxStepsExceeded {
                x,
                max_steps: ctrl.max_steps,
            });
        }
        steps += 1;

        // Land exactly on the end point instead of taking a sliver step after.
        if x + 1.01 * h >= x_end {
            h = x_end - x;
        }

        let mut k = [[0.0; N]; 7];
        k[0] = match rhs(x, &y) {
            Ok(v) => v,
            Err(e) => return Err(RkError::Rhs(e)),
        };

        let mut stage_failed = false;
        'stages: for s in 1..7 {
            let mut ys_trial = y;
            for (i, slot) in ys_trial.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                *slot += h * acc;
            }
            match rhs(x + C[s] * h, &ys_trial) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    stage_failed = true;
                    break 'stages;
                }
            }
        }
        if stage_failed {
            h *= 0.5;
            if h < h_floor {
                return Err(RkError::StepUnderflow { x });
            }
            continue;
        }

        let mut y_new = y;
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut dy = 0.0;
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                dy += B[j] * kj[i];
                e += E[j] * kj[i];
            }
            y_new[i] += h * dy;
            let scale = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (h * e / scale) * (h * e / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            x += h;
            y = y_new;
            xs.push(x);
            ys.push(y);
            let grow = if err == 0.0 {
                MAX_GROW
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROW)
            };
            h *= grow;
        } else {
            let shrink = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, SAFETY)
            } else {
                0.5
            };
            h *= shrink;
            if h < h_floor {
                return Err(RkError::StepUnderflow { x });
            }
        }
    }

    Ok(Trajectory { xs, ys })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_growth_is_integrated_accurately() {
        let ctrl = StepControl::with_tolerance(1e-10, 1e-12);
        let traj = integrate::<1, Infallible, _>(|_, y| Ok([y[0]]), 0.0, 2.0, [1.0], &ctrl)
            .unwrap();
        let expect = 2.0_f64.exp();
        assert!((traj.last()[0] - expect).abs() / expect < 1e-9);
    }

    #[test]
    fn coupled_oscillator_conserves_energy() {
        let ctrl = StepControl::with_tolerance(1e-10, 1e-12);
        let traj = integrate::<2, Infallible, _>(
            |_, y| Ok([y[1], -y[0]]),
            0.0,
            10.0,
            [1.0, 0.0],
            &ctrl,
        )
        .unwrap();
        let [c, s] = traj.last();
        assert!((c - 10.0_f64.cos()).abs() < 1e-8);
        assert!((s + 10.0_f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn tiny_span_reaches_the_end_point() {
        let ctrl = StepControl::default();
        let traj =
            integrate::<1, Infallible, _>(|_, y| Ok([y[0]]), 0.0, 1e-12, [1.0], &ctrl).unwrap();
        assert_eq!(*traj.xs.last().unwrap(), 1e-12);
    }

    #[test]
    fn rhs_failure_at_start_aborts() {
        let ctrl = StepControl::default();
        let res = integrate::<1, &'static str, _>(|_, _| Err("bad"), 0.0, 1.0, [1.0], &ctrl);
        assert!(matches!(res, Err(RkError::Rhs("bad"))));
    }

    #[test]
    fn step_budget_is_enforced() {
        let ctrl = StepControl {
            rel_tol: 1e-14,
            abs_tol: 1e-16,
            max_steps: 5,
        };
        let res = integrate::<1, Infallible, _>(
            |x, _| Ok([(40.0 * x).sin() * 40.0]),
            0.0,
            50.0,
            [0.0],
            &ctrl,
        );
        assert!(matches!(res, Err(RkError::MaxStepsExceeded { .. })));
    }
}
