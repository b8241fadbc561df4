//! Experiment sweeps, result rows and instance files.
//!
//! A sweep visits every `(n_demands, l_max, trial)` cell. Each cell gets a
//! seed hashed from the base seed, the topology name and the cell
//! coordinates, so every algorithm in a cell sees the same instance and a
//! cell's rows do not depend on which other cells run. Rows come back in
//! cell order whatever the execution mode.

pub mod cli;
mod instance;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    brute_force_routing, hbra, plba, rate_of, rra, solve_ilp_exact_with, Algorithm, AlgorithmError, OracleLimits,
    RoutingOutcome,
};
use crate::exec::{self, Execution};
use crate::fidelity::{loss_probability, ChannelParams, FidelityError};
use crate::lp::DEFAULT_NODE_LIMIT;
use crate::rng::{derive_seed, StableHasher};
use crate::topology::{
    generate_demands, load_topology, sample_reduced_network, sample_reduced_network_with, MerrInstance, NetworkGraph,
    TopologyError, TopologyFormat,
};

pub use instance::{read_instance, write_instance, InstanceDoc};

pub const CSV_HEADER: [&str; 9] = [
    "topology",
    "algorithm",
    "n_demands",
    "l_max",
    "seed",
    "met",
    "rate",
    "runtime_ms",
    "lp_objective",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn default_n_demands() -> Vec<usize> {
    (2..=20).step_by(2).collect()
}

fn default_l_max() -> Vec<u32> {
    vec![8]
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Ilp, Algorithm::Hbra, Algorithm::Rra, Algorithm::Plba]
}

fn one() -> usize {
    1
}

fn default_p() -> f64 {
    1.0
}

fn default_max_sp_hops() -> usize {
    8
}

fn default_node_limit() -> usize {
    DEFAULT_NODE_LIMIT
}

fn yes() -> bool {
    true
}

/// Sweep description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology_path: PathBuf,
    /// Inferred from the file extension when absent.
    #[serde(default)]
    pub topology_format: Option<TopologyFormat>,
    /// Name written to the `topology` column and hashed into seeds; defaults
    /// to the file stem.
    #[serde(default)]
    pub topology_name: Option<String>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_n_demands")]
    pub n_demands: Vec<usize>,
    #[serde(default = "default_l_max")]
    pub l_max: Vec<u32>,
    #[serde(default = "one")]
    pub trials_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Per-link entanglement success probability.
    #[serde(default = "default_p")]
    pub p_entangle: f64,
    /// Demands are drawn among pairs at most this many hops apart.
    #[serde(default = "default_max_sp_hops")]
    pub max_sp_hops: usize,
    /// CSV destination; standard output when absent.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// When set, each link succeeds with probability
    /// `1 - p_loss^entanglement_attempts` for its own length instead of
    /// `p_entangle`.
    #[serde(default)]
    pub channel_params_path: Option<PathBuf>,
    #[serde(default = "one")]
    pub entanglement_attempts: usize,
    /// Leave `runtime_ms` blank when false, making output byte-reproducible.
    #[serde(default = "yes")]
    pub record_runtime: bool,
    #[serde(default)]
    pub oracle_limits: OracleLimits,
    #[serde(default = "default_node_limit")]
    pub node_limit: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    /// Config with defaults for everything but the topology.
    pub fn new(topology_path: impl Into<PathBuf>) -> Self {
        serde_json::from_value(serde_json::json!({ "topology_path": topology_path.into() }))
            .expect("defaults deserialize")
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.topology_path);
        cfg.output_path.as_mut().map(rebase);
        cfg.channel_params_path.as_mut().map(rebase);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty");
        }
        if self.n_demands.is_empty() || self.n_demands.contains(&0) {
            return bad("n_demands must be a non-empty list of positive counts");
        }
        if self.l_max.is_empty() || self.l_max.contains(&0) {
            return bad("l_max must be a non-empty list of positive bounds");
        }
        if self.trials_per_cell == 0 {
            return bad("trials_per_cell must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p_entangle) {
            return bad("p_entangle must lie in [0, 1]");
        }
        if self.entanglement_attempts == 0 {
            return bad("entanglement_attempts must be at least 1");
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        self.topology_name.clone().unwrap_or_else(|| {
            self.topology_path
                .file_stem()
                .map_or_else(|| "topology".to_string(), |s| s.to_string_lossy().into_owned())
        })
    }
}

/// One algorithm on one instance. `met`, `rate` and `runtime_ms` are empty
/// for skipped runs, `lp_objective` for algorithms that solve no program.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub topology: String,
    pub algorithm: Algorithm,
    pub n_demands: usize,
    pub l_max: u32,
    pub seed: u64,
    pub met: Option<usize>,
    pub rate: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub lp_objective: Option<f64>,
    /// Why the run produced no result.
    #[serde(skip)]
    pub skipped: Option<String>,
}

/// Seed of one sweep cell.
pub fn trial_seed(base_seed: u64, topology: &str, n_demands: usize, l_max: u32, trial: usize) -> u64 {
    StableHasher::new()
        .u64(base_seed)
        .str(topology)
        .u64(n_demands as u64)
        .u64(u64::from(l_max))
        .u64(trial as u64)
        .finish()
}

/// A loaded topology plus how to thin it.
pub struct Sweep {
    pub cfg: ExperimentConfig,
    pub name: String,
    pub graph: NetworkGraph,
    channel: Option<ChannelParams>,
}

impl Sweep {
    pub fn prepare(cfg: ExperimentConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let format = cfg
            .topology_format
            .unwrap_or_else(|| TopologyFormat::from_path(&cfg.topology_path));
        let file = fs::File::open(&cfg.topology_path).map_err(|e| HarnessError::io(&cfg.topology_path, e))?;
        let graph = load_topology(std::io::BufReader::new(file), format)?;
        let channel = match &cfg.channel_params_path {
            Some(p) => {
                let params: ChannelParams = read_json(p)?;
                params.validate()?;
                Some(params)
            }
            None => None,
        };
        Ok(Self {
            name: cfg.name(),
            cfg,
            graph,
            channel,
        })
    }

    /// `(n_demands, l_max, trial)` in output order.
    pub fn cells(&self) -> Vec<(usize, u32, usize)> {
        let mut cells = Vec::new();
        for &n in &self.cfg.n_demands {
            for &l in &self.cfg.l_max {
                for t in 0..self.cfg.trials_per_cell {
                    cells.push((n, l, t));
                }
            }
        }
        cells
    }

    /// The instance of one cell: a thinned copy of the topology and demands
    /// drawn on the full topology.
    pub fn instance(&self, n: usize, l_max: u32, seed: u64) -> Result<MerrInstance, HarnessError> {
        let reduce_seed = derive_seed(seed, "reduce");
        let graph = match &self.channel {
            Some(params) => {
                let attempts = i32::try_from(self.cfg.entanglement_attempts).unwrap_or(i32::MAX);
                // Parameters and distances are validated, so the loss is always defined.
                sample_reduced_network_with(
                    &self.graph,
                    |e| loss_probability(params, e.distance_km).map_or(0.0, |l| 1.0 - l.powi(attempts)),
                    reduce_seed,
                )?
            }
            None if self.cfg.p_entangle < 1.0 => sample_reduced_network(&self.graph, self.cfg.p_entangle, reduce_seed)?,
            None => self.graph.clone(),
        };
        let demands = generate_demands(&self.graph, n, self.cfg.max_sp_hops, derive_seed(seed, "demands"))?;
        let inst = MerrInstance { graph, demands, l_max };
        inst.validate()?;
        Ok(inst)
    }

    /// Runs every selected algorithm on one cell.
    pub fn run_cell(&self, n: usize, l_max: u32, trial: usize) -> Vec<ResultRow> {
        let seed = trial_seed(self.cfg.base_seed, &self.name, n, l_max, trial);
        let row = |algorithm| ResultRow {
            topology: self.name.clone(),
            algorithm,
            n_demands: n,
            l_max,
            seed,
            met: None,
            rate: None,
            runtime_ms: None,
            lp_objective: None,
            skipped: None,
        };
        let inst = match self.instance(n, l_max, seed) {
            Ok(inst) => inst,
            Err(e) => {
                log::warn!("{} n={n} l_max={l_max} trial={trial}: {e}", self.name);
                return self
                    .cfg
                    .algorithms
                    .iter()
                    .map(|&a| ResultRow {
                        skipped: Some(e.to_string()),
                        ..row(a)
                    })
                    .collect();
            }
        };
        self.cfg
            .algorithms
            .iter()
            .map(|&a| {
                let mut r = row(a);
                match run_algorithm(a, &inst, seed, &self.cfg) {
                    Ok(out) => {
                        r.met = Some(out.met_count());
                        r.rate = Some(rate_of(out.met_count(), n).map_or(0.0, |x| x.as_f64()));
                        r.runtime_ms = self.cfg.record_runtime.then_some(out.stats.runtime_ms);
                        r.lp_objective = out.stats.lp_objective;
                    }
                    Err(e) => {
                        log::warn!("{} {a} n={n} l_max={l_max} trial={trial}: skipped: {e}", self.name);
                        r.skipped = Some(e.to_string());
                    }
                }
                r
            })
            .collect()
    }

    pub fn run(&self) -> Vec<ResultRow> {
        let cells = self.cells();
        exec::map(self.cfg.execution, &cells, |&(n, l, t)| self.run_cell(n, l, t))
            .into_iter()
            .flatten()
            .collect()
    }
}

/// Runs `algorithm` on `instance`. `seed` is the cell seed; randomized
/// rounding draws from its own sub-stream of it.
pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &MerrInstance,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<RoutingOutcome, AlgorithmError> {
    match algorithm {
        Algorithm::Ilp => solve_ilp_exact_with(instance, cfg.node_limit),
        Algorithm::Hbra => hbra(instance),
        Algorithm::Rra => rra(instance, derive_seed(seed, "rra")),
        Algorithm::Plba => plba(instance),
        Algorithm::Oracle => brute_force_routing(instance, cfg.oracle_limits),
    }
}

/// Loads the topology, runs the sweep and writes the CSV to `output_path`
/// when one is configured.
pub fn run_experiment(cfg: ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let output = cfg.output_path.clone();
    let rows = Sweep::prepare(cfg)?.run();
    if let Some(path) = output {
        let file = fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_csv(&mut w, &rows)?;
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.algorithm.to_string(),
            r.n_demands.to_string(),
            r.l_max.to_string(),
            r.seed.to_string(),
            opt(r.met.map(|m| m.to_string())),
            opt(r.rate.map(|x| format!("{x:.6}"))),
            opt(r.runtime_ms.map(|x| format!("{x:.3}"))),
            opt(r.lp_objective.map(|x| format!("{x:.6}"))),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}
