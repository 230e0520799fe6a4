//! Study drivers: single-pipe inclination sweeps, network-wide gravity
//! effect comparisons, and first-integral residual validation of solved
//! networks.

use crate::eos::{EosKind, EosModel};
use crate::integrals::IdealCaseParams;
use crate::network::{EdgeSpec, EdgeSpecKind, Network, Node, NodeKind};
use crate::nondim::{scale_network, NominalConfig, ScaledNetwork};
use crate::pipe::TermToggles;
use crate::solver::{
    redimensionalize, solve, solve_collocation, InitStrategy, ScaledSolution, SolveError,
    SolveOptions, Solution,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("validation refused: {reason}")]
    Refused { reason: String },
}

/// Parameters of a single pressure-fed pipe with a withdrawal at the far
/// end, in SI units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SinglePipeSpec {
    /// m
    pub length: f64,
    /// m
    pub diameter: f64,
    pub friction: f64,
    /// Pa, held at the inlet.
    pub inlet_pressure: f64,
    /// kg/s withdrawn at the outlet.
    pub flow: f64,
}

impl SinglePipeSpec {
    /// The Yamal-Europe pipeline parameters: 122 km, 1.422 m diameter,
    /// friction 0.03, 8.8 MPa inlet, 400 kg/s withdrawal.
    pub const YAMAL: Self = Self {
        length: 122_000.0,
        diameter: 1.422,
        friction: 0.03,
        inlet_pressure: 8.8e6,
        flow: 400.0,
    };

    /// Two-node network for this pipe at the given inclination. Positive
    /// angles tilt the pipe downward along the flow direction.
    pub fn network(&self, angle_deg: f64) -> Network {
        Network::new(
            vec![
                Node {
                    id: "inlet".into(),
                    kind: NodeKind::Slack {
                        pressure: self.inlet_pressure,
                    },
                    elevation: None,
                },
                Node {
                    id: "outlet".into(),
                    kind: NodeKind::NonSlack {
                        injection: -self.flow,
                    },
                    elevation: None,
                },
            ],
            vec![EdgeSpec {
                id: "pipe".into(),
                from: "inlet".into(),
                to: "outlet".into(),
                kind: EdgeSpecKind::Pipe {
                    length: self.length,
                    diameter: self.diameter,
                    area: None,
                    friction: self.friction,
                    sin_theta: Some(angle_deg.to_radians().sin()),
                },
            }],
        )
        .expect("well-formed two-node network")
    }

    /// Nominal scales natural to this pipe: its length, inlet pressure and
    /// withdrawal rate (so the nondimensional flow is one).
    pub fn nominal(&self) -> NominalConfig {
        NominalConfig {
            length: Some(self.length),
            pressure: Some(self.inlet_pressure),
            velocity: None,
            density: None,
        }
    }
}

/// One row of the inclination sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub angle_deg: f64,
    pub eos: EosKind,
    pub include_inertia: bool,
    /// Pa; absent when the solve failed.
    pub outlet_pressure: Option<f64>,
    /// Relative change against the same model's horizontal run.
    pub rel_change: Option<f64>,
    pub error: Option<String>,
}

/// Sweeps the pipe inclination for every model and inertia setting; each
/// series is baselined against its own horizontal run. Per-row failures are
/// recorded in the row and the sweep continues.
pub fn sweep_incline(
    spec: &SinglePipeSpec,
    angles_deg: &[f64],
    models: &[EosModel],
    opts: &SolveOptions,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    let nominal = spec.nominal();
    for model in models {
        for include_inertia in [true, false] {
            let run_opts = SolveOptions {
                toggles: TermToggles {
                    gravity: true,
                    inertia: include_inertia,
                },
                ..opts.clone()
            };
            let outlet = |angle: f64| -> Result<f64, SolveError> {
                let net = spec.network(angle);
                let (sol, _) = solve(&net, model, &nominal, &run_opts)?;
                Ok(sol.node_pressures[1])
            };
            let baseline = outlet(0.0);
            for &angle in angles_deg {
                let row = match (&baseline, outlet(angle)) {
                    (Ok(base), Ok(p)) => SweepRow {
                        angle_deg: angle,
                        eos: model.kind,
                        include_inertia,
                        outlet_pressure: Some(p),
                        rel_change: Some((p - base) / base),
                        error: None,
                    },
                    (Err(e), _) => SweepRow {
                        angle_deg: angle,
                        eos: model.kind,
                        include_inertia,
                        outlet_pressure: None,
                        rel_change: None,
                        error: Some(format!("horizontal baseline failed: {e}")),
                    },
                    (_, Err(e)) => SweepRow {
                        angle_deg: angle,
                        eos: model.kind,
                        include_inertia,
                        outlet_pressure: None,
                        rel_change: None,
                        error: Some(e.to_string()),
                    },
                };
                rows.push(row);
            }
        }
    }
    rows
}

pub fn sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<(), crate::io::IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "angle_deg",
        "eos",
        "inertia",
        "outlet_pressure_pa",
        "rel_change_vs_horizontal",
        "status",
    ])?;
    for r in rows {
        w.write_record(&[
            r.angle_deg.to_string(),
            r.eos.to_string(),
            r.include_inertia.to_string(),
            r.outlet_pressure.map(|v| v.to_string()).unwrap_or_default(),
            r.rel_change.map(|v| v.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_else(|| "ok".into()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Density histogram (area one) with the cumulative fraction at each right
/// bin edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        assert!(bins > 0 && !values.is_empty());
        let max = values.iter().cloned().fold(0.0, f64::max).max(1e-30);
        let width = max / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let k = ((v / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let n = values.len() as f64;
        let edges = (0..=bins).map(|k| k as f64 * width).collect();
        let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += c as f64 / n;
                acc
            })
            .collect();
        Self {
            edges,
            density,
            cumulative,
        }
    }
}

/// Nodal comparison of solves with and without the gravity term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GravityEffect {
    pub node_ids: Vec<String>,
    /// Pa
    pub with_gravity: Vec<f64>,
    /// Pa
    pub without_gravity: Vec<f64>,
    /// Signed (p_with - p_without) / p_without per node.
    pub rel_diff: Vec<f64>,
    /// Histogram of |rel_diff|.
    pub histogram: Histogram,
    /// Empirical CDF of |rel_diff|: sorted values with fractions.
    pub cdf: Vec<(f64, f64)>,
}

pub fn gravity_effect(
    net: &Network,
    model: &EosModel,
    nominal: &NominalConfig,
    opts: &SolveOptions,
    bins: usize,
) -> Result<GravityEffect, SolveError> {
    let run = |gravity: bool| -> Result<Solution, SolveError> {
        let run_opts = SolveOptions {
            toggles: TermToggles {
                gravity,
                ..opts.toggles
            },
            ..opts.clone()
        };
        Ok(solve(net, model, nominal, &run_opts)?.0)
    };
    let with = run(true)?;
    let without = run(false)?;
    let rel_diff: Vec<f64> = with
        .node_pressures
        .iter()
        .zip(&without.node_pressures)
        .map(|(w, wo)| (w - wo) / wo)
        .collect();
    let abs: Vec<f64> = rel_diff.iter().map(|r| r.abs()).collect();
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(k, &v)| (v, (k + 1) as f64 / n))
        .collect();
    Ok(GravityEffect {
        node_ids: net.nodes().iter().map(|n| n.id.clone()).collect(),
        with_gravity: with.node_pressures,
        without_gravity: without.node_pressures,
        rel_diff,
        histogram: Histogram::from_values(&abs, bins),
        cdf,
    })
}

pub fn gravity_nodes_csv<W: std::io::Write>(
    g: &GravityEffect,
    out: W,
) -> Result<(), crate::io::IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "id",
        "pressure_with_gravity_pa",
        "pressure_without_gravity_pa",
        "rel_diff",
    ])?;
    for i in 0..g.node_ids.len() {
        w.write_record(&[
            g.node_ids[i].clone(),
            g.with_gravity[i].to_string(),
            g.without_gravity[i].to_string(),
            g.rel_diff[i].to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn gravity_histogram_csv<W: std::io::Write>(
    g: &GravityEffect,
    out: W,
) -> Result<(), crate::io::IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_left", "bin_right", "density", "cdf_at_right"])?;
    for k in 0..g.histogram.density.len() {
        w.write_record(&[
            g.histogram.edges[k].to_string(),
            g.histogram.edges[k + 1].to_string(),
            g.histogram.density[k].to_string(),
            g.histogram.cumulative[k].to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Maximum first-integral residuals over all pipes, for the collocation- and
/// ODE-stage solutions of a horizontal ideal-gas network (the validation
/// table layout).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ValidationReport {
    pub collocation_frictional: f64,
    pub collocation_with_inertia: f64,
    pub ode_frictional: f64,
    pub ode_with_inertia: f64,
}

/// Maximum |first-integral residual| of a nondimensional solution over all
/// pipes; `with_inertia` selects between the frictional and the
/// friction-plus-inertia relation.
pub fn max_first_integral_residual(
    scaled: &ScaledNetwork,
    sol: &ScaledSolution,
    with_inertia: bool,
) -> f64 {
    let eu = scaled.groups.euler;
    let pressures = sol.pressures();
    let mut max = 0.0f64;
    for (e, edge) in scaled.net.edges().iter().enumerate() {
        let Some(geom) = scaled.geometry(e) else { continue };
        let params = IdealCaseParams {
            length: geom.length,
            beta: geom.beta,
            r1_hat: geom.r1 / eu,
            r2_hat: geom.r2 * eu,
            sin_theta: geom.sin_theta,
            toggles: TermToggles {
                gravity: geom.sin_theta != 0.0,
                inertia: with_inertia,
            },
        };
        if let Ok(r) = params.residual(pressures[edge.from], pressures[edge.to], sol.flows[e]) {
            max = max.max(r.abs());
        }
    }
    max
}

fn assert_validatable(net: &Network, model: &EosModel) -> Result<(), StudyError> {
    if model.kind != EosKind::Ideal {
        return Err(StudyError::Refused {
            reason: "first-integral validation applies to the ideal gas EoS only".into(),
        });
    }
    let inclined: Vec<&str> = net
        .edges()
        .iter()
        .filter(|e| e.pipe_params().is_some_and(|p| p.sin_theta != 0.0))
        .map(|e| e.id.as_str())
        .collect();
    if !inclined.is_empty() {
        return Err(StudyError::Refused {
            reason: format!(
                "first-integral validation requires horizontal pipes; inclined: {}",
                inclined.join(", ")
            ),
        });
    }
    Ok(())
}

/// Runs the two-stage solve and reports the maximum residual of both
/// ideal-gas first integrals for each stage's solution. Refuses non-ideal
/// models and inclined networks.
pub fn validate_first_integrals(
    net: &Network,
    model: &EosModel,
    nominal: &NominalConfig,
    opts: &SolveOptions,
) -> Result<ValidationReport, StudyError> {
    assert_validatable(net, model)?;
    let diags = net.validate();
    if Network::has_fatal(&diags) {
        return Err(SolveError::InvalidNetwork(diags).into());
    }
    let scales = nominal.resolve(net, model).map_err(SolveError::from)?;
    let scaled = scale_network(net, &scales, model);

    let (u1, _) = solve_collocation(&scaled, opts, None)?;
    let colloc = ScaledSolution::from_unknowns(&scaled.net, &u1);

    let ode_opts = SolveOptions {
        init: InitStrategy::Warm(u1),
        ..opts.clone()
    };
    let (ode, _) = crate::solver::solve_scaled(&scaled, &ode_opts)?;

    Ok(ValidationReport {
        collocation_frictional: max_first_integral_residual(&scaled, &colloc, false),
        collocation_with_inertia: max_first_integral_residual(&scaled, &colloc, true),
        ode_frictional: max_first_integral_residual(&scaled, &ode, false),
        ode_with_inertia: max_first_integral_residual(&scaled, &ode, true),
    })
}

/// Evaluates the first-integral residuals of an externally supplied
/// solution (SI nodal pressures and edge flows in network order).
pub fn injected_solution_residuals(
    net: &Network,
    model: &EosModel,
    nominal: &NominalConfig,
    node_pressures: &[f64],
    flows: &[f64],
) -> Result<(f64, f64), StudyError> {
    assert_validatable(net, model)?;
    let scales = nominal.resolve(net, model).map_err(SolveError::from)?;
    let scaled = scale_network(net, &scales, model);
    let sol = ScaledSolution {
        pi: node_pressures
            .iter()
            .map(|p| (p / scales.pressure).powi(3))
            .collect(),
        flows: flows.iter().map(|f| f / scales.mass_flow).collect(),
    };
    Ok((
        max_first_integral_residual(&scaled, &sol, false),
        max_first_integral_residual(&scaled, &sol, true),
    ))
}

/// Along-pipe profile of a single pipe in SI units, with outlet
/// sensitivities, bypassing the network solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipeProfile {
    /// m
    pub x: Vec<f64>,
    /// Pa
    pub pressure: Vec<f64>,
    /// dp/dp_in, dimensionless.
    pub sens_inlet: Vec<f64>,
    /// dp/df, Pa/(kg/s).
    pub sens_flow: Vec<f64>,
}

pub fn pipe_profile(
    spec: &SinglePipeSpec,
    angle_deg: f64,
    model: &EosModel,
    toggles: TermToggles,
    ctrl: &crate::rk::StepControl,
) -> Result<PipeProfile, StudyError> {
    let net = spec.network(angle_deg);
    let scales = spec
        .nominal()
        .resolve(&net, model)
        .map_err(SolveError::from)?;
    let scaled = scale_network(&net, &scales, model);
    let geom = scaled.geometry(0).expect("single pipe");
    let f_bar = spec.flow / scales.mass_flow;
    let sol = crate::pipe::integrate_with_sensitivities(
        spec.inlet_pressure / scales.pressure,
        f_bar,
        geom,
        &scaled.eos,
        toggles,
        ctrl,
    )
    .map_err(|source| SolveError::Pipe {
        pipe: "pipe".into(),
        source,
    })?;
    Ok(PipeProfile {
        x: sol.positions.iter().map(|x| x * scales.length).collect(),
        pressure: sol.pressures.iter().map(|p| p * scales.pressure).collect(),
        sens_inlet: sol.sens_inlet.clone().unwrap(),
        sens_flow: sol
            .sens_flow
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s * scales.pressure / scales.mass_flow)
            .collect(),
    })
}

pub fn profile_csv<W: std::io::Write>(
    p: &PipeProfile,
    out: W,
) -> Result<(), crate::io::IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "x_m",
        "pressure_pa",
        "sens_inlet",
        "sens_flow_pa_per_kg_s",
    ])?;
    for i in 0..p.x.len() {
        w.write_record(&[
            p.x[i].to_string(),
            p.pressure[i].to_string(),
            p.sens_inlet[i].to_string(),
            p.sens_flow[i].to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Re-exported solve wrapper producing both the SI solution and the scaled
/// context, used by commands that post-process solutions.
pub fn solve_with_context(
    net: &Network,
    model: &EosModel,
    nominal: &NominalConfig,
    opts: &SolveOptions,
) -> Result<(ScaledNetwork, ScaledSolution, Solution, crate::solver::SolveReport), SolveError> {
    let scales = nominal.resolve(net, model)?;
    let scaled = scale_network(net, &scales, model);
    let (sol, report) = crate::solver::solve_scaled(&scaled, &opts.clone())?;
    let si = redimensionalize(&scaled, &sol);
    Ok((scaled, sol, si, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal() -> EosModel {
        EosModel::with_defaults(EosKind::Ideal)
    }

    #[test]
    fn horizontal_row_has_exactly_zero_relative_change() {
        let rows = sweep_incline(
            &SinglePipeSpec::YAMAL,
            &[0.0, 1.0],
            &[ideal()],
            &SolveOptions::default(),
        );
        let zero = rows.iter().find(|r| r.angle_deg == 0.0).unwrap();
        assert_eq!(zero.rel_change, Some(0.0));
        assert!(zero.error.is_none());
    }

    #[test]
    fn sweep_at_two_degrees_matches_the_gravity_integral_root() {
        // Independently derived root of the gravity-only relation at +2 deg
        // for the Yamal parameters: 10.128915 MPa.
        let rows = sweep_incline(
            &SinglePipeSpec::YAMAL,
            &[2.0],
            &[ideal()],
            &SolveOptions::default(),
        );
        let row = rows
            .iter()
            .find(|r| !r.include_inertia && r.angle_deg == 2.0)
            .unwrap();
        let p = row.outlet_pressure.unwrap();
        let expect = 10_128_915.201604296;
        assert!((p - expect).abs() / expect < 1e-6, "{p}");
    }

    #[test]
    fn all_horizontal_network_shows_no_gravity_effect() {
        let net = crate::synth::generate(&crate::synth::SynthConfig::horizontal(20, 1, 5));
        let g = gravity_effect(
            &net,
            &ideal(),
            &NominalConfig::default(),
            &SolveOptions::default(),
            10,
        )
        .unwrap();
        for r in &g.rel_diff {
            assert_eq!(*r, 0.0);
        }
    }

    #[test]
    fn gravity_cdf_is_monotone_and_ends_at_one() {
        let net = crate::synth::generate(&crate::synth::SynthConfig::mountainous(30, 1, 11));
        let g = gravity_effect(
            &net,
            &ideal(),
            &NominalConfig::default(),
            &SolveOptions::default(),
            12,
        )
        .unwrap();
        for w in g.cdf.windows(2) {
            assert!(w[1].1 >= w[0].1);
            assert!(w[1].0 >= w[0].0);
        }
        assert!((g.cdf.last().unwrap().1 - 1.0).abs() < 1e-12);
        assert!((g.histogram.cumulative.last().unwrap() - 1.0).abs() < 1e-12);
        // Histogram integrates to one.
        let area: f64 = g
            .histogram
            .density
            .iter()
            .enumerate()
            .map(|(k, d)| d * (g.histogram.edges[k + 1] - g.histogram.edges[k]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_pipe_gravity_effect_equals_the_sweep_row() {
        let spec = SinglePipeSpec::YAMAL;
        let angle = 1.5;
        let rows = sweep_incline(&spec, &[angle], &[ideal()], &SolveOptions::default());
        let row = rows.iter().find(|r| r.include_inertia).unwrap();
        let g = gravity_effect(
            &spec.network(angle),
            &ideal(),
            &spec.nominal(),
            &SolveOptions::default(),
            5,
        )
        .unwrap();
        // The outlet node's with-gravity pressure is the sweep pressure.
        let outlet = g.node_ids.iter().position(|id| id == "outlet").unwrap();
        let rel = (g.with_gravity[outlet] - row.outlet_pressure.unwrap()).abs()
            / row.outlet_pressure.unwrap();
        assert!(rel < 1e-9);
    }

    #[test]
    fn validation_refuses_non_ideal_and_inclined_networks() {
        let cnga = EosModel::with_defaults(EosKind::Cnga);
        let net = SinglePipeSpec::YAMAL.network(0.0);
        let err = validate_first_integrals(
            &net,
            &cnga,
            &NominalConfig::default(),
            &SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, StudyError::Refused { .. }));

        let inclined = SinglePipeSpec::YAMAL.network(2.0);
        let err = validate_first_integrals(
            &inclined,
            &ideal(),
            &NominalConfig::default(),
            &SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, StudyError::Refused { .. }));
    }

    #[test]
    fn validation_reports_collocation_above_ode_residuals() {
        let net = crate::synth::generate(&crate::synth::SynthConfig::horizontal(25, 1, 17));
        let opts = SolveOptions {
            toggles: TermToggles::NONE,
            tol: 1e-10,
            integration: crate::rk::StepControl::with_tolerance(1e-12, 1e-14),
            ..SolveOptions::default()
        };
        let rep =
            validate_first_integrals(&net, &ideal(), &NominalConfig::default(), &opts).unwrap();
        assert!(rep.ode_frictional < 1e-8, "ode frictional {:.3e}", rep.ode_frictional);
        assert!(rep.collocation_frictional.is_finite());
        assert!(rep.collocation_frictional >= rep.ode_frictional);
        // Coarse-stage quality: good enough to serve as an initial guess.
        assert!(rep.collocation_frictional < 1e-2, "colloc frictional {:.3e}", rep.collocation_frictional);
    }

    #[test]
    fn injected_exact_solution_has_negligible_residual() {
        // Construct the exact no-inertia solution of a single pipe from the
        // first integral itself, then validate it.
        let spec = SinglePipeSpec::YAMAL;
        let net = spec.network(0.0);
        let model = ideal();
        let nominal = spec.nominal();
        let scales = nominal.resolve(&net, &model).unwrap();
        let scaled = scale_network(&net, &scales, &model);
        let geom = scaled.geometry(0).unwrap();
        let params = IdealCaseParams {
            length: geom.length,
            beta: geom.beta,
            r1_hat: geom.r1 / scaled.groups.euler,
            r2_hat: geom.r2 * scaled.groups.euler,
            sin_theta: 0.0,
            toggles: TermToggles::NONE,
        };
        let f_bar = spec.flow / scales.mass_flow;
        let pl = params.solve_outlet(1.0, f_bar).unwrap();
        let (frictional, _) = injected_solution_residuals(
            &net,
            &model,
            &nominal,
            &[spec.inlet_pressure, pl * scales.pressure],
            &[spec.flow],
        )
        .unwrap();
        assert!(frictional < 1e-12, "frictional residual {frictional:.3e}");
    }
}
