// SPDX-License-Identifier: Apache-2.0

//! `diffpath` command-line entry points.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use crate::error::{Error, Result};
use crate::evaluation::{
    all_harmonic_centrality, edge_type_counts, score_snapshot, top_k_label_share, Distance, Label,
};
use crate::inference::{infer_dynamic, infer_static, CascadeStore, InferenceConfig, Sampling, StepSchedule};
use crate::io::{self, NodeTable, RunManifest};
use crate::model::{Family, RateSnapshot, TransmissionModel};
use crate::synth::{self, KroneckerSpec, PatternConfig, PatternKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "diffpath", version, about = "Infer time-varying diffusion networks from cascades")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a Kronecker ground-truth network with evolving edge rates.
    KroneckerGen(KroneckerArgs),
    /// Simulate cascades over a ground-truth network.
    Simulate(SimulateArgs),
    /// Infer a time-varying network, one snapshot per time step.
    Infer(InferArgs),
    /// Infer a single static network from all cascades.
    InferStatic(StaticArgs),
    /// Score a snapshot series against ground truth.
    Evaluate(EvaluateArgs),
    /// Centrality and edge-type dynamics of a snapshot series.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Exp,
    Pow,
    Ray,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplingArg {
    Uniform,
    Exp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Const,
    Invsqrt,
}

#[derive(Debug, Args)]
struct ModelOpts {
    #[arg(long, value_enum, default_value = "exp")]
    model: ModelArg,
    /// Minimum delay of the power-law model (required with --model pow).
    #[arg(long)]
    delta: Option<f64>,
}

impl ModelOpts {
    fn resolve(&self) -> Result<TransmissionModel> {
        let family = match self.model {
            ModelArg::Exp => Family::Exp,
            ModelArg::Pow => Family::Pow,
            ModelArg::Ray => Family::Ray,
        };
        TransmissionModel::new(family, self.delta)
    }
}

#[derive(Debug, Args)]
struct KroneckerArgs {
    #[arg(long)]
    out: PathBuf,
    /// Seed matrix entries a,b,c,d of [a,b;c,d].
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [0.9, 0.5, 0.5, 0.3])]
    seed_matrix: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    iterations: u32,
    #[arg(long, default_value_t = 2048)]
    edges: usize,
    /// Onsets are drawn from [0, horizon).
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.5)]
    peak_min: f64,
    #[arg(long, default_value_t = 2.0)]
    peak_max: f64,
    #[arg(long, default_value_t = 20.0)]
    duration_min: f64,
    #[arg(long, default_value_t = 60.0)]
    duration_max: f64,
    #[arg(long, default_value_t = 20.0)]
    period_min: f64,
    #[arg(long, default_value_t = 50.0)]
    period_max: f64,
    /// Pattern kinds to draw from.
    #[arg(long, value_delimiter = ',', default_value = "slab,square,chainsaw,hump,constant")]
    patterns: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelOpts,
    /// Number of unit time steps.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    per_step: usize,
    /// Observation window of each cascade.
    #[arg(long, default_value_t = 10.0)]
    obs_window: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolverOpts {
    #[command(flatten)]
    model: ModelOpts,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.95)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, value_enum, default_value = "const")]
    schedule: ScheduleArg,
    /// SG iterations per step (default: min(5000, 10 x window cascades)).
    #[arg(long)]
    iters: Option<usize>,
    /// Sampling window length.
    #[arg(long, default_value_t = 10.0)]
    window: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    sampling: SamplingArg,
    /// Recency scale of exponential sampling (default: window / 3).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long, default_value_t = 1e-2)]
    init_rate: f64,
    /// Observation window for cascade records that do not carry one.
    #[arg(long, default_value_t = 10.0)]
    obs_window: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverOpts {
    fn resolve(&self) -> Result<InferenceConfig> {
        let config = InferenceConfig {
            model: self.model.resolve()?,
            epsilon: self.epsilon,
            rho: self.rho,
            gamma0: self.gamma,
            schedule: match self.schedule {
                ScheduleArg::Const => StepSchedule::Constant,
                ScheduleArg::Invsqrt => StepSchedule::InvSqrt,
            },
            iterations: self.iters,
            sample_window: self.window,
            sampling: match self.sampling {
                SamplingArg::Uniform => Sampling::Uniform,
                SamplingArg::Exp => Sampling::Exponential { tau: self.tau },
            },
            time_resolution: self.resolution,
            init_rate: self.init_rate,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    cascades: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverOpts,
    /// First snapshot time (default: earliest cascade start).
    #[arg(long)]
    t_start: Option<f64>,
    /// Snapshots stop before this time (default: latest cascade start + resolution).
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Debug, Args)]
struct StaticArgs {
    #[arg(long)]
    cascades: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, default_value_t = 50)]
    max_epochs: usize,
    /// Relative likelihood improvement below which epochs stop.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    snapshots: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    snapshots: PathBuf,
    /// Cascade file whose node table supplies labels.
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    /// Use 1/rate path lengths instead of hop counts.
    #[arg(long)]
    weighted: bool,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn configure_threads() {
    if let Some(n) = std::env::var("DIFFPATH_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns 0 on success, 1 on usage errors, 2 on data errors.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let outcome = match cli.command {
        Command::KroneckerGen(a) => kronecker_gen(a),
        Command::Simulate(a) => simulate(a),
        Command::Infer(a) => infer(a),
        Command::InferStatic(a) => infer_static_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Analyze(a) => analyze(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn kronecker_gen(a: KroneckerArgs) -> Result<(), Failure> {
    let m = &a.seed_matrix;
    let spec = KroneckerSpec { seed: [[m[0], m[1]], [m[2], m[3]]], iterations: a.iterations, target_edges: a.edges };
    spec.validate().map_err(usage)?;
    let kinds =
        a.patterns.iter().map(|k| k.trim().parse::<PatternKind>()).collect::<Result<Vec<_>>>().map_err(usage)?;
    let patterns = PatternConfig {
        peak: (a.peak_min, a.peak_max),
        horizon: a.horizon,
        duration: (a.duration_min, a.duration_max),
        period: (a.period_min, a.period_max),
        kinds,
    };
    let edges = synth::generate_kronecker(&spec, a.seed)?;
    let net = synth::assign_patterns(spec.nodes(), &edges, &patterns, a.seed).map_err(usage)?;
    io::write_ground_truth(&a.out, &net)?;
    RunManifest::new("kronecker-gen", None, vec![], path_str(&a.out), a.seed).write(&manifest_beside(&a.out))?;
    Ok(())
}

fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let model = a.model.resolve().map_err(usage)?;
    let net = io::read_ground_truth(&a.truth)?;
    let cascades =
        synth::generate_cascade_set(&net, &model, a.steps, a.per_step, a.obs_window, a.seed).map_err(usage)?;
    io::write_cascade_file(&a.out, &NodeTable::anonymous(net.nodes()), &cascades)?;
    RunManifest::new("simulate", None, vec![path_str(&a.truth)], path_str(&a.out), a.seed)
        .write(&manifest_beside(&a.out))?;
    Ok(())
}

fn load_store(path: &Path, obs_window: f64) -> Result<(NodeTable, CascadeStore)> {
    let file = io::parse_cascade_file(path, obs_window)?;
    for w in &file.warnings {
        warn!("{w}");
    }
    Ok((file.nodes, CascadeStore::new(file.cascades)))
}

fn infer(a: InferArgs) -> Result<(), Failure> {
    let config = a.solver.resolve().map_err(usage)?;
    let (_, store) = load_store(&a.cascades, a.solver.obs_window)?;
    let first = store.cascades().first().map_or(0.0, |c| c.start_time);
    let last = store.cascades().last().map_or(0.0, |c| c.start_time);
    let t_start = a.t_start.unwrap_or(first);
    let t_end = a.t_end.unwrap_or(last + config.time_resolution);
    if !(t_end > t_start) {
        return Err(Failure::Usage(format!("empty time range [{t_start}, {t_end})")));
    }
    let result = infer_dynamic(&store, (t_start, t_end), &config)?;
    io::write_snapshot_series(&a.out, &result.snapshots)?;
    io::write_text(&a.out.join("diagnostics.csv"), &io::format_diagnostics(&result.diagnostics))?;
    RunManifest::new("infer", Some(config.clone()), vec![path_str(&a.cascades)], path_str(&a.out), config.seed)
        .write(&a.out.join("manifest.json"))?;
    Ok(())
}

fn infer_static_cmd(a: StaticArgs) -> Result<(), Failure> {
    let config = a.solver.resolve().map_err(usage)?;
    let (_, store) = load_store(&a.cascades, a.solver.obs_window)?;
    if store.is_empty() {
        return Err(Failure::Data(Error::Domain(format!("{}: no cascades", path_str(&a.cascades)))));
    }
    let result = infer_static(&store, &config, a.max_epochs, a.tol)?;
    io::write_snapshot_series(&a.out, std::slice::from_ref(&result.snapshot))?;
    RunManifest::new("infer-static", Some(config.clone()), vec![path_str(&a.cascades)], path_str(&a.out), config.seed)
        .write(&a.out.join("manifest.json"))?;
    Ok(())
}

fn check_universe(snapshots: &[RateSnapshot], nodes: usize, what: &str) -> Result<()> {
    for snap in snapshots {
        if let Some(((s, d), _)) = snap.iter().find(|((s, d), _)| *s as usize >= nodes || *d as usize >= nodes) {
            return Err(Error::Mismatch(format!(
                "snapshot step {} has edge ({s},{d}) outside the {nodes}-node universe of {what}",
                snap.time_step
            )));
        }
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let snapshots = io::read_snapshot_series(&a.snapshots)?;
    let net = io::read_ground_truth(&a.truth)?;
    check_universe(&snapshots, net.nodes(), &path_str(&a.truth))?;
    let scores: Vec<_> =
        snapshots.iter().map(|s| (s.time, score_snapshot(s, &net.rates_at(s.time_step, s.time)))).collect();
    io::write_text(&a.out, &io::format_scores(&scores))?;
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    if a.top_k == 0 {
        return Err(Failure::Usage("--top-k must be at least 1".into()));
    }
    let snapshots = io::read_snapshot_series(&a.snapshots)?;
    let nodes = io::parse_cascade_file(&a.nodes, 1.0)?.nodes;
    let universe = nodes.universe();
    check_universe(&snapshots, universe, &path_str(&a.nodes))?;
    let distance = if a.weighted { Distance::InverseRate } else { Distance::Hops };
    let label = |n: u32| nodes.labels.get(&n).copied().unwrap_or(Label::Unknown);

    let mut centrality = Vec::new();
    let mut edge_types = Vec::new();
    let mut shares = String::from("t,media,blog,unknown\n");
    for snap in &snapshots {
        for (node, c) in all_harmonic_centrality(snap, universe, distance).into_iter().enumerate() {
            if nodes.names.contains_key(&(node as u32)) {
                centrality.push((snap.time, node as u32, label(node as u32), c));
            }
        }
        edge_types.push((snap.time, edge_type_counts(snap, &nodes.labels)));
        let share = top_k_label_share(snap, universe, &nodes.labels, a.top_k)?;
        shares.push_str(&format!("{},{},{},{}\n", snap.time, share.media, share.blog, share.unknown));
    }
    io::write_text(&a.out.join("centrality.csv"), &io::format_centrality(&centrality))?;
    io::write_text(&a.out.join("edge_types.csv"), &io::format_edge_types(&edge_types))?;
    io::write_text(&a.out.join("top_k_share.csv"), &shares)?;
    Ok(())
}
