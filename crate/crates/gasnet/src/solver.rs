//! Assembly and Newton-Raphson solution of the network system.
//!
//! Unknowns are the transformed nodal pressures `pi = p^3` followed by the
//! edge flows; equations are ordered compressor rows, pipe rows, non-slack
//! balance rows, slack rows:
//!
//! ```text
//! (a) a^3 pi_i - pi_j                 = 0     per compressor (i, j)
//! (b) F(p_i, p_j, f)                  = 0     per pipe (i, j)
//! (c) sum(f out) - sum(f in) - q*     = 0     per non-slack node
//! (d) pi_j - (p*_j)^3                 = 0     per slack node
//! ```
//!
//! Pipe rows come either from the ODE solution operator (with Jacobian
//! entries from the forward sensitivities) or from the two-point collocation
//! approximation, which serves as the coarse stage that supplies the Newton
//! initial guess.

use crate::network::{EdgeKind, Network, NodeKind};
use crate::nondim::{scale_network, NominalConfig, ScaleError, ScaledNetwork};
use crate::pipe::{self, PipeError, TermToggles};
use crate::rk::StepControl;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("network is not well-posed: {}", format_diags(.0))]
    InvalidNetwork(Vec<crate::network::Diagnostic>),
    #[error("pipe '{pipe}': {source}")]
    Pipe {
        pipe: String,
        #[source]
        source: PipeError,
    },
    #[error("jacobian factorization failed at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("Newton did not converge after {iterations} iterations (residual max-norm {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Best iterate seen, `[pi..., f...]`, for post-mortem inspection.
        best: Vec<f64>,
    },
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

fn format_diags(diags: &[crate::network::Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// How the Newton iteration is started.
#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// Solve the collocation coarse system first (default).
    Collocation,
    /// Start directly from the flat-pressure / tree-flow guess.
    Flat,
    /// Start from a given unknown vector, `[pi..., f...]`.
    Warm(Vec<f64>),
}

/// Which pipe-row formulation is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipeEquationMode {
    Ode,
    Collocation,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence tolerance on the residual max-norm (transformed scale).
    pub tol: f64,
    pub max_iter: usize,
    pub toggles: TermToggles,
    /// Step control for the per-pipe integrations. Kept tighter than `tol`
    /// so integration error does not mask Newton convergence.
    pub integration: StepControl,
    pub init: InitStrategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            toggles: TermToggles::default(),
            integration: StepControl::with_tolerance(1e-10, 1e-12),
            init: InitStrategy::Collocation,
        }
    }
}

const ARMIJO_SLOPE: f64 = 1e-4;
const MIN_STEP: f64 = 1.0 / (1 << 20) as f64;
/// Line-search safeguard: transformed pressures may not shrink below this
/// fraction of their current value in one step.
const PI_SHRINK_FLOOR: f64 = 0.1;

/// Iteration diagnostics for one Newton stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual_norm: f64,
    /// Residual max-norm per iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    /// Accepted line-search step length per iteration.
    pub damping: Vec<f64>,
}

/// Outcome diagnostics of a two-stage solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    /// Newton iterations of the ODE stage.
    pub iterations: usize,
    /// Newton iterations of the collocation stage (0 when skipped).
    pub collocation_iterations: usize,
    /// Final residual max-norm on the transformed (pi) scale.
    pub residual_norm: f64,
    /// Largest per-pipe end-pressure mismatch |p(L) - p_j| implied by the
    /// final residual (pressure-scale view of the same numbers).
    pub max_pressure_residual: f64,
    pub per_equation_residuals: Vec<f64>,
    pub damping: Vec<f64>,
    pub collocation_damping: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Nondimensional solution: transformed pressures per node, flows per edge.
#[derive(Debug, Clone)]
pub struct ScaledSolution {
    pub pi: Vec<f64>,
    pub flows: Vec<f64>,
}

impl ScaledSolution {
    pub fn from_unknowns(net: &Network, u: &[f64]) -> Self {
        let v = net.node_count();
        Self {
            pi: u[..v].to_vec(),
            flows: u[v..].to_vec(),
        }
    }

    pub fn to_unknowns(&self) -> Vec<f64> {
        let mut u = self.pi.clone();
        u.extend_from_slice(&self.flows);
        u
    }

    /// Physical nondimensional pressures `p = pi^(1/3)`.
    pub fn pressures(&self) -> Vec<f64> {
        self.pi.iter().map(|pi| pi.cbrt()).collect()
    }
}

/// Dimensional solution in SI units.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Nodal pressures, Pa.
    pub node_pressures: Vec<f64>,
    /// Transformed nondimensional nodal pressures `pi = (p/p0)^3`.
    pub node_pi: Vec<f64>,
    /// Edge mass flows, kg/s, positive along the declared direction.
    pub flows: Vec<f64>,
    /// Computed injections at slack nodes, kg/s.
    pub slack_injections: Vec<(usize, f64)>,
}

/// Converts a nondimensional solution back to SI units.
pub fn redimensionalize(scaled: &ScaledNetwork, sol: &ScaledSolution) -> Solution {
    let p0 = scaled.scales.pressure;
    let f0 = scaled.scales.mass_flow;
    let flows: Vec<f64> = sol.flows.iter().map(|f| f * f0).collect();
    Solution {
        node_pressures: sol.pi.iter().map(|pi| pi.cbrt() * p0).collect(),
        node_pi: sol.pi.clone(),
        flows: flows.clone(),
        slack_injections: scaled.net.slack_injections(&flows),
    }
}

/// Row bookkeeping: equations in the fixed order (a) compressors, (b) pipes,
/// (c) non-slack balances, (d) slack rows; unknowns are node pi values then
/// edge flows.
struct Layout {
    n_nodes: usize,
    compressor_edges: Vec<usize>,
    pipe_edges: Vec<usize>,
    nonslack_nodes: Vec<usize>,
    slack_nodes: Vec<usize>,
}

impl Layout {
    fn new(net: &Network) -> Self {
        let compressor_edges = net
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_pipe())
            .map(|(i, _)| i)
            .collect();
        let pipe_edges = net
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_pipe())
            .map(|(i, _)| i)
            .collect();
        let mut nonslack_nodes = Vec::new();
        let mut slack_nodes = Vec::new();
        for (i, n) in net.nodes().iter().enumerate() {
            match n.kind {
                NodeKind::Slack { .. } => slack_nodes.push(i),
                NodeKind::NonSlack { .. } => nonslack_nodes.push(i),
            }
        }
        Self {
            n_nodes: net.node_count(),
            compressor_edges,
            pipe_edges,
            nonslack_nodes,
            slack_nodes,
        }
    }

    fn size(&self) -> usize {
        self.n_nodes
            + self.compressor_edges.len()
            + self.pipe_edges.len()
    }

    fn flow_slot(&self, edge: usize) -> usize {
        self.n_nodes + edge
    }
}

/// Assembled view of one network system with fixed term toggles.
pub struct System<'a> {
    scaled: &'a ScaledNetwork,
    toggles: TermToggles,
    integration: StepControl,
    layout: Layout,
}

impl<'a> System<'a> {
    pub fn new(scaled: &'a ScaledNetwork, toggles: TermToggles, integration: StepControl) -> Self {
        Self {
            scaled,
            toggles,
            integration,
            layout: Layout::new(&scaled.net),
        }
    }

    pub fn unknown_count(&self) -> usize {
        self.layout.size()
    }

    /// Flat-pressure initial guess with balance-consistent spanning-tree
    /// flows: every non-slack balance row is satisfied exactly at iteration
    /// zero. A small circulation is superposed on each chord's fundamental
    /// cycle; this preserves the balances while keeping every flow away
    /// from zero, where d(f|f|)/df vanishes and cycles through compressors
    /// would make the Jacobian exactly singular.
    pub fn initial_guess(&self) -> Vec<f64> {
        const CIRCULATION: f64 = 1e-2;
        let net = &self.scaled.net;
        let v = net.node_count();
        let (root, p_star) = net.first_slack().expect("validated network has a slack node");
        let mut u = vec![0.0; self.unknown_count()];
        for slot in u.iter_mut().take(v) {
            *slot = p_star.powi(3);
        }

        // BFS spanning tree rooted at the first slack node.
        let mut parent_edge = vec![usize::MAX; v];
        let mut parent = vec![usize::MAX; v];
        let mut depth = vec![0usize; v];
        let mut order = Vec::with_capacity(v);
        let mut seen = vec![false; v];
        let mut queue = std::collections::VecDeque::from([root]);
        seen[root] = true;
        while let Some(n) = queue.pop_front() {
            order.push(n);
            let (inc, out) = net.incidence(n);
            for &e in inc.iter().chain(out) {
                let edge = &net.edges()[e];
                let other = if edge.from == n { edge.to } else { edge.from };
                if !seen[other] {
                    seen[other] = true;
                    parent_edge[other] = e;
                    parent[other] = n;
                    depth[other] = depth[n] + 1;
                    queue.push_back(other);
                }
            }
        }

        // Net supply of each subtree, accumulated leaves-first, flows out
        // through the parent edge.
        let mut supply = vec![0.0; v];
        for (i, n) in net.nodes().iter().enumerate() {
            if let NodeKind::NonSlack { injection } = n.kind {
                supply[i] = injection;
            }
        }
        let mut in_tree = vec![false; net.edge_count()];
        for &n in order.iter().rev() {
            if n == root {
                continue;
            }
            let e = parent_edge[n];
            in_tree[e] = true;
            let edge = &net.edges()[e];
            u[self.layout.flow_slot(e)] = if edge.from == n {
                supply[n]
            } else {
                -supply[n]
            };
            supply[parent[n]] += supply[n];
        }

        // Circulations: push CIRCULATION along each chord and return it
        // through the tree path between the chord's endpoints.
        let adjust = |u: &mut Vec<f64>, e: usize, from_node: usize, amount: f64| {
            let slot = self.layout.flow_slot(e);
            if net.edges()[e].from == from_node {
                u[slot] += amount;
            } else {
                u[slot] -= amount;
            }
        };
        for e in 0..net.edge_count() {
            if in_tree[e] {
                continue;
            }
            let edge = &net.edges()[e];
            u[self.layout.flow_slot(e)] += CIRCULATION;
            // Return path: edge.to back up to the common ancestor, then
            // down to edge.from.
            let (mut x, mut y) = (edge.to, edge.from);
            while x != y {
                if depth[x] >= depth[y] {
                    adjust(&mut u, parent_edge[x], x, CIRCULATION);
                    x = parent[x];
                } else {
                    adjust(&mut u, parent_edge[y], parent[y], CIRCULATION);
                    y = parent[y];
                }
            }
        }
        u
    }

    /// Assembles the residual vector at the unknown vector `u`.
    pub fn residual(&self, u: &[f64], mode: PipeEquationMode) -> Result<Vec<f64>, SolveError> {
        let net = &self.scaled.net;
        let mut r = Vec::with_capacity(self.unknown_count());
        for &e in &self.layout.compressor_edges {
            let edge = &net.edges()[e];
            let EdgeKind::Compressor { ratio } = edge.kind else { unreachable!() };
            r.push(ratio.powi(3) * u[edge.from] - u[edge.to]);
        }
        for &e in &self.layout.pipe_edges {
            let edge = &net.edges()[e];
            let geom = self.scaled.geometry(e).expect("pipe edge has geometry");
            let (pi_i, pi_j) = (u[edge.from], u[edge.to]);
            let f = u[self.layout.flow_slot(e)];
            let value = match mode {
                PipeEquationMode::Ode => {
                    let sol = pipe::integrate_pressure(
                        pi_i.cbrt(),
                        f,
                        geom,
                        &self.scaled.eos,
                        self.toggles,
                        &self.integration,
                    )
                    .map_err(|source| SolveError::Pipe {
                        pipe: edge.id.clone(),
                        source,
                    })?;
                    sol.outlet_pressure().powi(3) - pi_j
                }
                PipeEquationMode::Collocation => {
                    let h_i = pipe::rhs_h(pi_i, f, geom, &self.scaled.eos, self.toggles)
                        .map_err(|source| SolveError::Pipe {
                            pipe: edge.id.clone(),
                            source,
                        })?;
                    let h_j = pipe::rhs_h(pi_j, f, geom, &self.scaled.eos, self.toggles)
                        .map_err(|source| SolveError::Pipe {
                            pipe: edge.id.clone(),
                            source,
                        })?;
                    (pi_i - pi_j) / geom.length + 0.5 * (h_i + h_j)
                }
            };
            r.push(value);
        }
        for &n in &self.layout.nonslack_nodes {
            let NodeKind::NonSlack { injection } = net.nodes()[n].kind else { unreachable!() };
            let mut acc = -injection;
            let (inc, out) = net.incidence(n);
            for &e in out {
                acc += u[self.layout.flow_slot(e)];
            }
            for &e in inc {
                acc -= u[self.layout.flow_slot(e)];
            }
            r.push(acc);
        }
        for &n in &self.layout.slack_nodes {
            let NodeKind::Slack { pressure } = net.nodes()[n].kind else { unreachable!() };
            r.push(u[n] - pressure.powi(3));
        }
        Ok(r)
    }

    /// Assembles the residual and its sparse Jacobian in one pass; pipe rows
    /// integrate the forward-sensitivity system so residual and derivatives
    /// refer to the same integration.
    pub fn residual_and_jacobian(
        &self,
        u: &[f64],
        mode: PipeEquationMode,
    ) -> Result<(Vec<f64>, SparseColMat<usize, f64>), SolveError> {
        let net = &self.scaled.net;
        let n = self.unknown_count();
        let mut r = Vec::with_capacity(n);
        let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(4 * n);
        let mut row = 0usize;

        for &e in &self.layout.compressor_edges {
            let edge = &net.edges()[e];
            let EdgeKind::Compressor { ratio } = edge.kind else { unreachable!() };
            r.push(ratio.powi(3) * u[edge.from] - u[edge.to]);
            trips.push(Triplet::new(row, edge.from, ratio.powi(3)));
            trips.push(Triplet::new(row, edge.to, -1.0));
            row += 1;
        }

        for &e in &self.layout.pipe_edges {
            let edge = &net.edges()[e];
            let geom = self.scaled.geometry(e).expect("pipe edge has geometry");
            let (pi_i, pi_j) = (u[edge.from], u[edge.to]);
            let f = u[self.layout.flow_slot(e)];
            let wrap = |source| SolveError::Pipe {
                pipe: edge.id.clone(),
                source,
            };
            match mode {
                PipeEquationMode::Ode => {
                    let p_i = pi_i.cbrt();
                    let p_j = pi_j.cbrt();
                    let res = pipe::residual_f(
                        p_i,
                        p_j,
                        f,
                        geom,
                        &self.scaled.eos,
                        self.toggles,
                        &self.integration,
                    )
                    .map_err(wrap)?;
                    r.push(res.value);
                    // Chain rule to the transformed unknowns: d pi_i / d p_i = 3 p_i^2.
                    trips.push(Triplet::new(
                        row,
                        edge.from,
                        res.d_inlet_pressure / (3.0 * p_i * p_i),
                    ));
                    trips.push(Triplet::new(row, edge.to, -1.0));
                    trips.push(Triplet::new(row, self.layout.flow_slot(e), res.d_flow));
                }
                PipeEquationMode::Collocation => {
                    let (h_i, hp_i, hf_i) =
                        pipe::rhs_h_with_partials(pi_i, f, geom, &self.scaled.eos, self.toggles)
                            .map_err(&wrap)?;
                    let (h_j, hp_j, hf_j) =
                        pipe::rhs_h_with_partials(pi_j, f, geom, &self.scaled.eos, self.toggles)
                            .map_err(&wrap)?;
                    r.push((pi_i - pi_j) / geom.length + 0.5 * (h_i + h_j));
                    trips.push(Triplet::new(
                        row,
                        edge.from,
                        1.0 / geom.length + 0.5 * hp_i,
                    ));
                    trips.push(Triplet::new(
                        row,
                        edge.to,
                        -1.0 / geom.length + 0.5 * hp_j,
                    ));
                    trips.push(Triplet::new(
                        row,
                        self.layout.flow_slot(e),
                        0.5 * (hf_i + hf_j),
                    ));
                }
            }
            row += 1;
        }

        for &node in &self.layout.nonslack_nodes {
            let NodeKind::NonSlack { injection } = net.nodes()[node].kind else { unreachable!() };
            let mut acc = -injection;
            let (inc, out) = net.incidence(node);
            for &e in out {
                acc += u[self.layout.flow_slot(e)];
                trips.push(Triplet::new(row, self.layout.flow_slot(e), 1.0));
            }
            for &e in inc {
                acc -= u[self.layout.flow_slot(e)];
                trips.push(Triplet::new(row, self.layout.flow_slot(e), -1.0));
            }
            r.push(acc);
            row += 1;
        }

        for &node in &self.layout.slack_nodes {
            let NodeKind::Slack { pressure } = net.nodes()[node].kind else { unreachable!() };
            r.push(u[node] - pressure.powi(3));
            trips.push(Triplet::new(row, node, 1.0));
            row += 1;
        }

        let jac = SparseColMat::try_new_from_triplets(n, n, &trips)
            .expect("triplet indices are in range");
        Ok((r, jac))
    }

    /// Damped Newton iteration on the chosen pipe-equation mode.
    fn newton(
        &self,
        mut u: Vec<f64>,
        mode: PipeEquationMode,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, NewtonStats), SolveError> {
        let n_nodes = self.layout.n_nodes;
        let mut stats = NewtonStats::default();
        let mut best = u.clone();
        let mut best_norm = f64::INFINITY;

        for iteration in 0..=max_iter {
            let r = self.residual(&u, mode)?;
            let norm = max_norm(&r);
            stats.residual_history.push(norm);
            if norm < best_norm {
                best_norm = norm;
                best.copy_from_slice(&u);
            }
            if norm <= tol {
                stats.iterations = iteration;
                stats.residual_norm = norm;
                return Ok((u, stats));
            }
            if iteration == max_iter {
                break;
            }

            let (r_full, jac) = self.residual_and_jacobian(&u, mode)?;
            let lu = jac
                .sp_lu()
                .map_err(|_| SolveError::SingularJacobian { iteration })?;
            let rhs = Mat::from_fn(r_full.len(), 1, |i, _| -r_full[i]);
            let delta = lu.solve(&rhs);
            if (0..r_full.len()).any(|i| !delta[(i, 0)].is_finite()) {
                return Err(SolveError::SingularJacobian { iteration });
            }

            // Keep transformed pressures comfortably positive.
            let mut t_cap = 1.0_f64;
            for i in 0..n_nodes {
                let d = delta[(i, 0)];
                if d < 0.0 {
                    t_cap = t_cap.min((1.0 - PI_SHRINK_FLOOR) * u[i] / -d);
                }
            }

            let norm_full = max_norm(&r_full);
            let mut t = t_cap.min(1.0);
            let mut accepted = false;
            while t >= MIN_STEP {
                let trial: Vec<f64> = u
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| v + t * delta[(i, 0)])
                    .collect();
                // A failed trial (choked pipe, negative pressure) counts
                // as an unacceptable step like any other.
                if let Ok(rt) = self.residual(&trial, mode) {
                    if max_norm(&rt) <= (1.0 - ARMIJO_SLOPE * t) * norm_full {
                        u = trial;
                        stats.damping.push(t);
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(SolveError::NonConvergence {
                    iterations: iteration,
                    residual: norm,
                    best,
                });
            }
        }

        Err(SolveError::NonConvergence {
            iterations: max_iter,
            residual: best_norm,
            best,
        })
    }
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves the collocation coarse system; the result serves as the initial
/// guess for the ODE-stage Newton iteration. The network must have passed
/// [`Network::validate`] (connected, at least one slack node).
pub fn solve_collocation(
    scaled: &ScaledNetwork,
    opts: &SolveOptions,
    u0: Option<&[f64]>,
) -> Result<(Vec<f64>, NewtonStats), SolveError> {
    let sys = System::new(scaled, opts.toggles, opts.integration);
    let start = match u0 {
        Some(u) => u.to_vec(),
        None => sys.initial_guess(),
    };
    sys.newton(start, PipeEquationMode::Collocation, opts.tol, opts.max_iter)
}

/// Two-stage solve of the nondimensional network system.
pub fn solve_scaled(
    scaled: &ScaledNetwork,
    opts: &SolveOptions,
) -> Result<(ScaledSolution, SolveReport), SolveError> {
    let diags = scaled.net.validate();
    if Network::has_fatal(&diags) {
        return Err(SolveError::InvalidNetwork(diags));
    }
    let sys = System::new(scaled, opts.toggles, opts.integration);

    let mut stage_warnings: Vec<String> = Vec::new();
    let (start, colloc_stats) = match &opts.init {
        InitStrategy::Collocation => match solve_collocation(scaled, opts, None) {
            Ok((u, stats)) => (u, Some(stats)),
            // The coarse system may have no solution (two endpoints cannot
            // represent a steep profile); continue from the flat guess.
            Err(
                SolveError::NonConvergence { .. }
                | SolveError::SingularJacobian { .. }
                | SolveError::Pipe { .. },
            ) => {
                stage_warnings.push(
                    "collocation stage did not converge; starting the ODE stage from the flat \
                     initial guess"
                        .into(),
                );
                (sys.initial_guess(), None)
            }
            Err(e) => return Err(e),
        },
        InitStrategy::Flat => (sys.initial_guess(), None),
        InitStrategy::Warm(u) => (u.clone(), None),
    };

    let (u, stats) = sys.newton(start, PipeEquationMode::Ode, opts.tol, opts.max_iter)?;
    let solution = ScaledSolution::from_unknowns(&scaled.net, &u);

    let per_equation = sys.residual(&u, PipeEquationMode::Ode)?;
    let max_pressure_residual = pressure_scale_residual(&sys, &solution, &per_equation);
    let mut warnings: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    warnings.extend(stage_warnings);
    for &e in &sys.layout.compressor_edges {
        let f = solution.flows[e];
        if f < 0.0 {
            warnings.push(format!(
                "compressor '{}' carries reverse flow ({f:.6e} nondimensional)",
                scaled.net.edges()[e].id
            ));
        }
    }

    let report = SolveReport {
        converged: true,
        iterations: stats.iterations,
        collocation_iterations: colloc_stats.as_ref().map_or(0, |s| s.iterations),
        residual_norm: stats.residual_norm,
        max_pressure_residual,
        per_equation_residuals: per_equation,
        damping: stats.damping,
        collocation_damping: colloc_stats.map(|s| s.damping).unwrap_or_default(),
        residual_history: stats.residual_history,
        warnings,
    };
    Ok((solution, report))
}

/// Largest |p(L) - p_j| over pipe rows implied by the transformed residuals.
fn pressure_scale_residual(sys: &System, sol: &ScaledSolution, residuals: &[f64]) -> f64 {
    let offset = sys.layout.compressor_edges.len();
    sys.layout
        .pipe_edges
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let pi_j = sol.pi[sys.scaled.net.edges()[e].to];
            ((pi_j + residuals[offset + k]).cbrt() - pi_j.cbrt()).abs()
        })
        .fold(0.0, f64::max)
}

/// Validates, nondimensionalizes, solves and redimensionalizes a network.
pub fn solve(
    net: &Network,
    model: &crate::eos::EosModel,
    nominal: &NominalConfig,
    opts: &SolveOptions,
) -> Result<(Solution, SolveReport), SolveError> {
    let diags = net.validate();
    if Network::has_fatal(&diags) {
        return Err(SolveError::InvalidNetwork(diags));
    }
    let scales = nominal.resolve(net, model)?;
    let scaled = scale_network(net, &scales, model);
    let (sol, report) = solve_scaled(&scaled, opts)?;
    Ok((redimensionalize(&scaled, &sol), report))
}
