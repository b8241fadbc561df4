//! Command-line front end. Exit status: 0 success, 1 usage error, 2 runtime
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use super::{
    read_instance, read_json, run_algorithm, write_csv, write_instance, ExperimentConfig, HarnessError, Sweep,
};
use crate::algorithms::{rate_of, solve_model_exact, Algorithm, AlgorithmError, OracleLimits, RoutingOutcome};
use crate::exec::Execution;
use crate::fidelity::{
    dephasing_probability, depolarizing_probability, end_to_end_fidelity, link_werner, loss_probability,
    propagation_delay, timing_budget, ChannelParams, TimingBudget, DEFAULT_DEADLINE_S,
};
use crate::formulation::build_merr_model;
use crate::topology::{generate_demands, load_topology, MerrInstance, TopologyFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "merr", version, about = "Entanglement routing for quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Route one instance with one algorithm and print the outcome as JSON.
    Solve(SolveArgs),
    /// Run a sweep described by a JSON config and write CSV rows.
    Experiment(ExperimentArgs),
    /// Draw random demands on a topology and print an instance file.
    GenDemands(GenDemandsArgs),
    /// Evaluate channel noise, path fidelity and the timing budget.
    Fidelity(FidelityArgs),
    /// Exact optimum of a small instance by exhaustive search.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance JSON: {"graph": {...}, "demands": [["s","d"], ...], "l_max": N}.
    #[arg(long)]
    instance: PathBuf,
    /// One of ilp, hbra, rra, plba, oracle.
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Seed for randomized rounding.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Branch-and-bound node limit for ilp.
    #[arg(long, default_value_t = crate::lp::DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    /// Force a demand onto a path before solving, as DEMAND:NODE,NODE,...
    /// (ilp only; repeatable).
    #[arg(long, value_parser = parse_pin)]
    pin: Vec<(usize, Vec<String>)>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination, overriding output_path in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Run cells one after another on the calling thread.
    #[arg(long)]
    sequential: bool,
    /// Leave runtime_ms blank so that reruns are byte-identical.
    #[arg(long)]
    no_runtime: bool,
}

#[derive(Debug, Args)]
struct GenDemandsArgs {
    /// Topology file (edge-list JSON or GraphML).
    #[arg(long)]
    topology: PathBuf,
    /// edge-list-json or graphml; guessed from the extension by default.
    #[arg(long)]
    format: Option<TopologyFormat>,
    /// Number of demands.
    #[arg(long)]
    n: usize,
    /// Only pairs at most this many hops apart are eligible.
    #[arg(long, default_value_t = 8)]
    max_sp_hops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hop bound written into the instance.
    #[arg(long, default_value_t = 8)]
    l_max: u32,
}

#[derive(Debug, Args)]
struct FidelityArgs {
    /// ChannelParams JSON; a noiseless, lossless channel when absent.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Comma-separated link lengths in km.
    #[arg(long, value_delimiter = ',', conflicts_with = "hops")]
    distances: Vec<f64>,
    /// Number of equal links (with --distance-km).
    #[arg(long)]
    hops: Option<usize>,
    /// Length of each link for --hops.
    #[arg(long, default_value_t = crate::topology::DEFAULT_DISTANCE_KM)]
    distance_km: f64,
    /// Seconds spent entangling links.
    #[arg(long, default_value_t = 0.0)]
    t_entangle: f64,
    /// Seconds spent reporting link states to the controller.
    #[arg(long, default_value_t = 0.0)]
    t_report: f64,
    /// Seconds spent computing routes.
    #[arg(long, default_value_t = 0.0)]
    t_route: f64,
    /// Seconds spent dispatching swap instructions.
    #[arg(long, default_value_t = 0.0)]
    t_dispatch: f64,
    /// Decoherence deadline in seconds.
    #[arg(long, default_value_t = DEFAULT_DEADLINE_S)]
    deadline: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Instance JSON.
    #[arg(long)]
    instance: PathBuf,
    /// Give up when a demand has more bounded simple paths than this.
    #[arg(long)]
    max_paths: Option<usize>,
    /// Give up after this many search nodes.
    #[arg(long)]
    max_search_nodes: Option<usize>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_pin(s: &str) -> Result<(usize, Vec<String>), String> {
    let (demand, path) = s.split_once(':').ok_or("expected DEMAND:NODE,NODE,...")?;
    let demand = demand
        .trim()
        .parse()
        .map_err(|_| format!("bad demand index `{demand}`"))?;
    let nodes: Vec<String> = path.split(',').map(|n| n.trim().to_string()).collect();
    if nodes.len() < 2 || nodes.iter().any(String::is_empty) {
        return Err("a pinned path needs at least two non-empty node labels".into());
    }
    Ok((demand, nodes))
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::GenDemands(a) => gen_demands(a, out),
        Command::Fidelity(a) => fidelity(a, out),
        Command::Oracle(a) => oracle(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(HarnessError),
}

impl<E: Into<HarnessError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::Runtime(HarnessError::io(std::path::Path::new("<stdout>"), e))
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    writeln!(out, "{text}").map_err(io_err)
}

#[derive(Serialize)]
struct Report<'a> {
    algorithm: Algorithm,
    met: usize,
    total: usize,
    rate: Option<f64>,
    #[serde(flatten)]
    outcome: &'a RoutingOutcome,
}

fn report(
    out: &mut dyn Write,
    algorithm: Algorithm,
    inst: &MerrInstance,
    outcome: &RoutingOutcome,
) -> Result<(), Failure> {
    let total = inst.demands.len();
    print_json(
        out,
        &Report {
            algorithm,
            met: outcome.met_count(),
            total,
            rate: rate_of(outcome.met_count(), total).ok().map(|r| r.as_f64()),
            outcome,
        },
    )
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !a.pin.is_empty() && a.algo != Algorithm::Ilp {
        return Err(Failure::Usage("--pin is only supported with --algo ilp".into()));
    }
    let inst = read_instance(&a.instance)?;
    let outcome = if a.pin.is_empty() {
        let mut cfg = ExperimentConfig::new(&a.instance);
        cfg.node_limit = a.node_limit;
        run_algorithm(a.algo, &inst, a.seed, &cfg)?
    } else {
        let mut model = build_merr_model(&inst).map_err(AlgorithmError::from)?;
        for (demand, path) in &a.pin {
            if *demand >= inst.demands.len() {
                return Err(Failure::Usage(format!(
                    "--pin names demand {demand}, instance has {}",
                    inst.demands.len()
                )));
            }
            model.pin_path(*demand, path).map_err(AlgorithmError::from)?;
        }
        solve_model_exact(&model, a.node_limit)?
    };
    report(out, a.algo, &inst, &outcome)
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if a.output.is_some() {
        cfg.output_path = a.output;
    }
    if a.sequential {
        cfg.execution = Execution::Sequential;
    }
    if a.no_runtime {
        cfg.record_runtime = false;
    }
    let target = cfg.output_path.clone();
    let rows = Sweep::prepare(cfg)?.run();
    match target {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &rows)?;
            fs::write(&path, buf).map_err(|e| HarnessError::io(&path, e))?;
        }
        None => write_csv(out, &rows)?,
    }
    Ok(())
}

fn gen_demands(a: GenDemandsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.l_max == 0 {
        return Err(Failure::Usage("--l-max must be at least 1".into()));
    }
    let format = a.format.unwrap_or_else(|| TopologyFormat::from_path(&a.topology));
    let file = fs::File::open(&a.topology).map_err(|e| HarnessError::io(&a.topology, e))?;
    let graph = load_topology(std::io::BufReader::new(file), format).map_err(HarnessError::from)?;
    let demands = generate_demands(&graph, a.n, a.max_sp_hops, a.seed).map_err(HarnessError::from)?;
    let inst = MerrInstance {
        graph,
        demands,
        l_max: a.l_max,
    };
    writeln!(out, "{}", write_instance(&inst)).map_err(io_err)
}

#[derive(Serialize)]
struct LinkReport {
    distance_km: f64,
    propagation_delay_s: f64,
    loss_probability: f64,
    dephasing_probability: f64,
    depolarizing_probability: f64,
    werner: f64,
}

fn fidelity(a: FidelityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let params = match &a.params {
        Some(p) => read_json::<ChannelParams>(p)?,
        None => ChannelParams::default(),
    };
    params.validate().map_err(HarnessError::from)?;
    let distances = match a.hops {
        Some(h) => vec![a.distance_km; h],
        None => a.distances.clone(),
    };
    if distances.is_empty() {
        return Err(Failure::Usage(
            "give the path as --distances D,D,... or --hops N".into(),
        ));
    }
    let mut links = Vec::with_capacity(distances.len());
    for &d in &distances {
        let dt = propagation_delay(d, params.c_fiber_km_per_s).map_err(HarnessError::from)?;
        links.push(LinkReport {
            distance_km: d,
            propagation_delay_s: dt,
            loss_probability: loss_probability(&params, d).map_err(HarnessError::from)?,
            dephasing_probability: dephasing_probability(params.r_deph_hz, dt).map_err(HarnessError::from)?,
            depolarizing_probability: depolarizing_probability(params.r_depo_hz, dt).map_err(HarnessError::from)?,
            werner: link_werner(&params, d).map_err(HarnessError::from)?,
        });
    }
    let fidelity = end_to_end_fidelity(&distances, &params).map_err(HarnessError::from)?;
    let timing = timing_budget(&TimingBudget {
        t_entangle_s: a.t_entangle,
        t_report_s: a.t_report,
        t_route_s: a.t_route,
        t_dispatch_s: a.t_dispatch,
        deadline_s: a.deadline,
    })
    .map_err(HarnessError::from)?;
    print_json(
        out,
        &json!({ "params": params, "links": links, "fidelity": fidelity, "timing": timing }),
    )
}

fn oracle(a: OracleArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    let mut cfg = ExperimentConfig::new(&a.instance);
    let defaults = OracleLimits::default();
    cfg.oracle_limits = OracleLimits {
        max_paths_per_demand: a.max_paths.unwrap_or(defaults.max_paths_per_demand),
        max_search_nodes: a.max_search_nodes.unwrap_or(defaults.max_search_nodes),
    };
    let outcome = run_algorithm(Algorithm::Oracle, &inst, 0, &cfg)?;
    report(out, Algorithm::Oracle, &inst, &outcome)
}
