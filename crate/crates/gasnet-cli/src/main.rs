//! `gasnet` — steady-state gas pipeline network simulation.
//!
//! Subcommands: `solve`, `validate`, `sweep-incline`, `gravity-effect`,
//! `pipe-profile`, `info`. Exit codes: 0 success, 2 solver non-convergence,
//! 3 input error.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gasnet::eos::{EosKind, EosModel};
use gasnet::io::{self, LoadedNetwork, SolutionFile};
use gasnet::network::Network;
use gasnet::rk::StepControl;
use gasnet::solver::{InitStrategy, SolveError, SolveOptions};
use gasnet::studies::{self, SinglePipeSpec};
use gasnet::TermToggles;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gasnet",
    about = "Steady-state isothermal gas flow in pipeline networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EosArg {
    /// Use the equation of state declared in the network file.
    File,
    Ideal,
    Cnga,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    /// Two-point collocation coarse solve (default).
    Collocation,
    /// Flat pressures with spanning-tree flows.
    Flat,
    /// Warm start from a solution file (requires --init-file).
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Equation of state override.
    #[arg(long, value_enum, default_value = "file")]
    eos: EosArg,
    /// Drop the gravity term from the momentum balance.
    #[arg(long)]
    no_gravity: bool,
    /// Drop the convective-inertia term from the momentum balance.
    #[arg(long)]
    no_inertia: bool,
    /// Newton convergence tolerance (residual max-norm, transformed scale).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Relative tolerance of the per-pipe ODE integrations.
    #[arg(long, default_value_t = 1e-10)]
    ode_tol: f64,
    /// Newton initialization strategy.
    #[arg(long, value_enum, default_value = "collocation")]
    init: InitArg,
    /// Solution file supplying the warm start for --init file.
    #[arg(long)]
    init_file: Option<PathBuf>,
    /// Continue despite structural warnings (errors still abort).
    #[arg(long)]
    lenient: bool,
}

impl SolverArgs {
    fn toggles(&self) -> TermToggles {
        TermToggles {
            gravity: !self.no_gravity,
            inertia: !self.no_inertia,
        }
    }

    fn model(&self, loaded: &LoadedNetwork) -> anyhow::Result<EosModel> {
        Ok(match self.eos {
            EosArg::File => loaded.model,
            EosArg::Ideal => EosModel::ideal(
                loaded.model.gas_constant,
                loaded.model.temperature,
            )?,
            EosArg::Cnga => EosModel::cnga(
                loaded.model.gas_constant,
                loaded.model.temperature,
                loaded.model.specific_gravity,
                loaded.model.p_atm,
            )?,
        })
    }

    fn options(&self, net: &Network) -> anyhow::Result<SolveOptions> {
        let init = match self.init {
            InitArg::Collocation => InitStrategy::Collocation,
            InitArg::Flat => InitStrategy::Flat,
            InitArg::File => {
                let path = self
                    .init_file
                    .as_ref()
                    .context("--init file requires --init-file <PATH>")?;
                let sol = io::read_solution(path)?;
                InitStrategy::Warm(warm_start(net, &sol)?)
            }
        };
        Ok(SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            toggles: self.toggles(),
            integration: StepControl::with_tolerance(self.ode_tol, self.ode_tol * 1e-2),
            init,
        })
    }
}

/// Maps a solution file onto the unknown vector of a network; pressures and
/// flows are matched by id.
fn warm_start(net: &Network, sol: &SolutionFile) -> anyhow::Result<Vec<f64>> {
    let mut u = vec![0.0; net.node_count() + net.edge_count()];
    for rec in &sol.nodes {
        let i = net
            .node_index(&rec.id)
            .with_context(|| format!("warm start references unknown node '{}'", rec.id))?;
        u[i] = rec.pi;
    }
    for rec in &sol.edges {
        let e = net
            .edges()
            .iter()
            .position(|edge| edge.id == rec.id)
            .with_context(|| format!("warm start references unknown edge '{}'", rec.id))?;
        // Solution files carry SI flows; the caller rescales after resolve.
        u[net.node_count() + e] = rec.flow;
    }
    Ok(u)
}

#[derive(Args, Clone)]
struct PipeArgs {
    /// Pipe length, m.
    #[arg(long, default_value_t = SinglePipeSpec::YAMAL.length)]
    length: f64,
    /// Pipe diameter, m.
    #[arg(long, default_value_t = SinglePipeSpec::YAMAL.diameter)]
    diameter: f64,
    /// Darcy friction factor.
    #[arg(long, default_value_t = SinglePipeSpec::YAMAL.friction)]
    friction: f64,
    /// Inlet (slack) pressure, Pa.
    #[arg(long, default_value_t = SinglePipeSpec::YAMAL.inlet_pressure)]
    p_in: f64,
    /// Withdrawal at the outlet, kg/s.
    #[arg(long, default_value_t = SinglePipeSpec::YAMAL.flow)]
    flow: f64,
}

impl PipeArgs {
    fn spec(&self) -> SinglePipeSpec {
        SinglePipeSpec {
            length: self.length,
            diameter: self.diameter,
            friction: self.friction,
            inlet_pressure: self.p_in,
            flow: self.flow,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a network file and write the solution.
    Solve {
        network: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output path (JSON) or prefix (CSV tables).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Include along-pipe pressure profiles in the output.
        #[arg(long)]
        profiles: bool,
    },
    /// Check a horizontal ideal-gas solution against the closed-form first
    /// integrals (max residual over pipes, collocation and ODE stages).
    Validate {
        network: PathBuf,
        /// Evaluate an existing solution file instead of re-solving.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Sweep the inclination of a single pipe and report outlet pressures.
    SweepIncline {
        #[command(flatten)]
        pipe: PipeArgs,
        /// Largest inclination magnitude, degrees.
        #[arg(long, default_value_t = 4.0)]
        angle_max: f64,
        /// Angle grid step, degrees.
        #[arg(long, default_value_t = 0.5)]
        angle_step: f64,
        /// Gas constant Rg, J/(kg K).
        #[arg(long, default_value_t = gasnet::eos::DEFAULT_GAS_CONSTANT)]
        gas_constant: f64,
        /// Temperature, K.
        #[arg(long, default_value_t = gasnet::eos::DEFAULT_TEMPERATURE)]
        temperature: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Compare nodal pressures with and without gravity; emit per-node
    /// differences plus a histogram/CDF of their magnitudes.
    GravityEffect {
        network: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Output prefix; writes <prefix>_nodes.csv and <prefix>_hist.csv
        /// (CSV) or <prefix>.json.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Integrate a single pipe and emit (x, p, s_p, s_f) as CSV.
    PipeProfile {
        #[command(flatten)]
        pipe: PipeArgs,
        /// Inclination, degrees; positive tilts the pipe downward along
        /// the flow.
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, value_enum, default_value = "ideal")]
        eos: EosArg,
        #[arg(long)]
        no_gravity: bool,
        #[arg(long)]
        no_inertia: bool,
        /// Relative integration tolerance.
        #[arg(long, default_value_t = 1e-8)]
        ode_tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Print network statistics and diagnostics.
    Info {
        network: PathBuf,
        /// Also dump the dimensionless groups (M, Eu, Fr and per-pipe
        /// R1, R2, beta) as CSV.
        #[arg(long)]
        print_groups: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Input-shaped failures exit 3, solver failures 2.
            let code = if err.downcast_ref::<io::IoError>().is_some() {
                EXIT_INPUT
            } else if let Some(solve) = err.downcast_ref::<SolveError>() {
                match solve {
                    SolveError::InvalidNetwork(_) => EXIT_INPUT,
                    _ => EXIT_NONCONVERGENCE,
                }
            } else if err.downcast_ref::<gasnet::studies::StudyError>().is_some() {
                EXIT_INPUT
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path, lenient: bool) -> anyhow::Result<LoadedNetwork> {
    let loaded = io::read_network(path)?;
    let diags = loaded.network.validate();
    for d in &diags {
        eprintln!("{d}");
    }
    let blocking = if lenient {
        Network::has_fatal(&diags)
    } else {
        !diags.is_empty()
    };
    if blocking {
        anyhow::bail!(io::IoError::InvalidNode {
            id: path.display().to_string(),
            reason: "network failed validation (use --lenient to ignore warnings)".into(),
        });
    }
    Ok(loaded)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve {
            network,
            solver,
            output,
            format,
            profiles,
        } => {
            let loaded = load(&network, solver.lenient)?;
            let model = solver.model(&loaded)?;
            let mut opts = solver.options(&loaded.network)?;
            // Solution files carry nondimensional pi but SI flows; rescale
            // the flow slots of a warm start.
            if let InitStrategy::Warm(u) = &mut opts.init {
                let scales = loaded.nominal.resolve(&loaded.network, &model)?;
                for slot in u.iter_mut().skip(loaded.network.node_count()) {
                    *slot /= scales.mass_flow;
                }
            }
            let (scaled, scaled_sol, si, report) =
                studies::solve_with_context(&loaded.network, &model, &loaded.nominal, &opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let mut file =
                SolutionFile::new(&loaded.name, &model, &loaded.network, &si, report);
            if profiles {
                file.profiles = Some(io::solution_profiles(
                    &scaled,
                    &scaled_sol,
                    opts.toggles,
                    &opts.integration,
                )?);
            }
            emit_solution(&file, output.as_deref(), format)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Validate {
            network,
            solution,
            solver,
            format,
        } => {
            let loaded = load(&network, solver.lenient)?;
            let model = solver.model(&loaded)?;
            if let Some(sol_path) = solution {
                let sol = io::read_solution(&sol_path)?;
                let pressures: Vec<f64> = loaded
                    .network
                    .nodes()
                    .iter()
                    .map(|n| {
                        sol.nodes
                            .iter()
                            .find(|r| r.id == n.id)
                            .map(|r| r.pressure)
                            .context("solution file misses a node")
                    })
                    .collect::<Result<_, _>>()?;
                let flows: Vec<f64> = loaded
                    .network
                    .edges()
                    .iter()
                    .map(|e| {
                        sol.edges
                            .iter()
                            .find(|r| r.id == e.id)
                            .map(|r| r.flow)
                            .context("solution file misses an edge")
                    })
                    .collect::<Result<_, _>>()?;
                let (frictional, with_inertia) = studies::injected_solution_residuals(
                    &loaded.network,
                    &model,
                    &loaded.nominal,
                    &pressures,
                    &flows,
                )?;
                match format {
                    FormatArg::Json => println!(
                        "{}",
                        serde_json::json!({"frictional_max_residual": frictional, "with_inertia_max_residual": with_inertia})
                    ),
                    FormatArg::Csv => {
                        println!("relation,max_residual_nondim");
                        println!("frictional,{frictional}");
                        println!("with_inertia,{with_inertia}");
                    }
                }
            } else {
                let opts = solver.options(&loaded.network)?;
                let rep = studies::validate_first_integrals(
                    &loaded.network,
                    &model,
                    &loaded.nominal,
                    &opts,
                )?;
                match format {
                    FormatArg::Json => println!("{}", serde_json::to_string_pretty(&rep)?),
                    FormatArg::Csv => {
                        println!("stage,frictional_max_residual,with_inertia_max_residual");
                        println!("collocation,{},{}", rep.collocation_frictional, rep.collocation_with_inertia);
                        println!("ode,{},{}", rep.ode_frictional, rep.ode_with_inertia);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::SweepIncline {
            pipe,
            angle_max,
            angle_step,
            gas_constant,
            temperature,
            output,
            format,
        } => {
            anyhow::ensure!(angle_step > 0.0, "--angle-step must be positive");
            let mut angles = Vec::new();
            let mut a = -angle_max;
            while a <= angle_max + 1e-12 {
                angles.push((a * 1e6).round() / 1e6);
                a += angle_step;
            }
            let models = [
                EosModel::ideal(gas_constant, temperature)?,
                EosModel::cnga(
                    gas_constant,
                    temperature,
                    gasnet::eos::DEFAULT_SPECIFIC_GRAVITY,
                    gasnet::eos::DEFAULT_ATMOSPHERIC_PRESSURE,
                )?,
            ];
            let rows =
                studies::sweep_incline(&pipe.spec(), &angles, &models, &SolveOptions::default());
            match format {
                FormatArg::Csv => {
                    write_or_stdout(output.as_deref(), |w| studies::sweep_csv(&rows, w))?
                }
                FormatArg::Json => emit_json(&rows, output.as_deref())?,
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::GravityEffect {
            network,
            solver,
            bins,
            output,
            format,
        } => {
            let loaded = load(&network, solver.lenient)?;
            let model = solver.model(&loaded)?;
            let opts = solver.options(&loaded.network)?;
            let effect =
                studies::gravity_effect(&loaded.network, &model, &loaded.nominal, &opts, bins)?;
            match (format, output) {
                (FormatArg::Json, out) => {
                    let text = serde_json::to_string_pretty(&effect)?;
                    match out {
                        Some(p) => std::fs::write(p.with_extension("json"), text)?,
                        None => println!("{text}"),
                    }
                }
                (FormatArg::Csv, Some(prefix)) => {
                    let nodes = prefix_path(&prefix, "_nodes.csv");
                    let hist = prefix_path(&prefix, "_hist.csv");
                    studies::gravity_nodes_csv(&effect, std::fs::File::create(&nodes)?)?;
                    studies::gravity_histogram_csv(&effect, std::fs::File::create(&hist)?)?;
                    eprintln!("wrote {} and {}", nodes.display(), hist.display());
                }
                (FormatArg::Csv, None) => {
                    println!("# nodes");
                    studies::gravity_nodes_csv(&effect, std::io::stdout())?;
                    println!("# histogram");
                    studies::gravity_histogram_csv(&effect, std::io::stdout())?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::PipeProfile {
            pipe,
            angle,
            eos,
            no_gravity,
            no_inertia,
            ode_tol,
            output,
            format,
        } => {
            let model = match eos {
                EosArg::Cnga => EosModel::with_defaults(EosKind::Cnga),
                _ => EosModel::with_defaults(EosKind::Ideal),
            };
            let toggles = TermToggles {
                gravity: !no_gravity,
                inertia: !no_inertia,
            };
            let profile = studies::pipe_profile(
                &pipe.spec(),
                angle,
                &model,
                toggles,
                &StepControl::with_tolerance(ode_tol, ode_tol * 1e-2),
            )?;
            match format {
                FormatArg::Csv => {
                    write_or_stdout(output.as_deref(), |w| studies::profile_csv(&profile, w))?
                }
                FormatArg::Json => emit_json(&profile, output.as_deref())?,
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Info {
            network,
            print_groups,
        } => {
            let loaded = io::read_network(&network)?;
            let net = &loaded.network;
            let diags = net.validate();
            println!("network:     {}", loaded.name);
            println!("eos:         {}", loaded.model.kind);
            println!("nodes:       {}", net.node_count());
            println!(
                "  slack:     {}",
                net.slack_nodes().count()
            );
            println!("edges:       {}", net.edge_count());
            println!("  pipes:     {}", net.pipe_count());
            println!("  compressors: {}", net.compressor_count());
            println!(
                "total pipe length: {:.3} km",
                net.total_pipe_length() / 1e3
            );
            println!("unknowns:    {}", net.node_count() + net.edge_count());
            if diags.is_empty() {
                println!("validation:  ok");
            } else {
                println!("validation:  {} finding(s)", diags.len());
                for d in &diags {
                    println!("  {d}");
                }
            }
            if print_groups {
                let scales = loaded.nominal.resolve(net, &loaded.model)?;
                let scaled = gasnet::nondim::scale_network(net, &scales, &loaded.model);
                io::groups_csv(&scaled, std::io::stdout())?;
            }
            Ok(if Network::has_fatal(&diags) {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn emit_json<T: serde::Serialize>(value: &T, output: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_or_stdout<F>(output: Option<&Path>, write: F) -> anyhow::Result<()>
where
    F: FnOnce(Box<dyn std::io::Write>) -> Result<(), io::IoError>,
{
    let sink: Box<dyn std::io::Write> = match output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    write(sink)?;
    Ok(())
}

fn prefix_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit_solution(
    file: &SolutionFile,
    output: Option<&Path>,
    format: FormatArg,
) -> anyhow::Result<()> {
    match format {
        FormatArg::Json => {
            let text = file.to_json_string()?;
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
        }
        FormatArg::Csv => match output {
            Some(prefix) => {
                let nodes = prefix_path(prefix, "_nodes.csv");
                let edges = prefix_path(prefix, "_edges.csv");
                io::nodes_csv(file, std::fs::File::create(&nodes)?)?;
                io::edges_csv(file, std::fs::File::create(&edges)?)?;
                if let Some(profiles) = &file.profiles {
                    let p = prefix_path(prefix, "_profiles.csv");
                    io::profiles_csv(profiles, std::fs::File::create(&p)?)?;
                }
                eprintln!("wrote {} and {}", nodes.display(), edges.display());
            }
            None => {
                println!("# nodes");
                io::nodes_csv(file, std::io::stdout())?;
                println!("# edges");
                io::edges_csv(file, std::io::stdout())?;
            }
        },
    }
    Ok(())
}
