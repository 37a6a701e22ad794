//! Command-line entry point: instance generation, single-path solving,
//! full recommendation runs and landscape scans.
//!
//! All randomness flows from the `--seed` flag; outputs are never
//! overwritten without `--force`. Failures print one machine-parseable
//! line, `error[<kind>]: <message>`, on stderr and exit nonzero.

mod config;

use clap::{Args, Parser, Subcommand};
use quopt::encode::{EncodingConfig, PenaltyStrategy, ScalingStrategy};
use quopt::instances::{self, InstanceFormat};
use quopt::monitor;
use quopt::optimizers::{init_params, InitStrategy, Method, Objective, OptimizerConfig};
use quopt::pathfinder::{
    self, Algorithm, Budget, Decomposition, EvalSettings, PathCatalog, RecommendSettings,
    ScoreWeights, SolutionPath,
};
use quopt::qsim::{qaoa_state_with_table, EnergyTable, ParameterVector};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use config::{pick, FileConfig};

#[derive(Parser)]
#[command(
    name = "quopt",
    version,
    about = "Workbench for quantum-assisted combinatorial optimization on CVRP instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file in the native format.
    Generate(GenerateArgs),
    /// Run one fully specified solution path on an instance.
    Solve(SolveArgs),
    /// Enumerate, evaluate and rank all catalog paths on an instance.
    Recommend(RecommendArgs),
    /// Scan the loss landscape of one encoded subproblem.
    Landscape(LandscapeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of non-depot nodes.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    capacity: u32,
    /// Smallest node demand.
    #[arg(long, default_value_t = 1)]
    demand_lo: u32,
    /// Largest node demand (defaults to the capacity).
    #[arg(long)]
    demand_hi: Option<u32>,
    /// Side length of the square holding the nodes.
    #[arg(long, default_value_t = 10.0)]
    bbox: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance name embedded in the file.
    #[arg(long)]
    name: Option<String>,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Clone)]
struct InstanceArg {
    /// Instance file to load.
    #[arg(long)]
    instance: PathBuf,
    /// Instance file format.
    #[arg(long, value_parser = ["native", "euc2d"], default_value = "native")]
    format: String,
}

#[derive(Args, Clone, Default)]
struct TuningArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Largest subproblem, in qubits, that may run.
    #[arg(long)]
    qubit_cap: Option<usize>,
    /// Objective-evaluation budget per optimizer run.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Shots sampled from each final state.
    #[arg(long)]
    shots: Option<u64>,
    /// Safety factor on the searched minimum penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// Multiplier on the bounding-box penalty.
    #[arg(long)]
    bbox_factor: Option<f64>,
    /// Factor applied to the Gershgorin width estimate.
    #[arg(long)]
    calibration: Option<f64>,
    /// Circuit depth override (otherwise the recommendation rule applies).
    #[arg(long)]
    depth: Option<usize>,
    /// Wall-clock budget per path, in seconds.
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Config file supplying the same keys; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct PathArgs {
    #[arg(long, value_parser = ["cluster-first", "direct-cvrp"])]
    decomposition: Option<String>,
    #[arg(long, value_parser = ["exact-min-search", "bounding-box"])]
    penalty: Option<String>,
    #[arg(long, value_parser = ["exact-width", "gershgorin-bound", "none"])]
    scaling: Option<String>,
    #[arg(long, value_parser = ["qaoa", "classical-exact", "classical-heuristic"])]
    algorithm: Option<String>,
    #[arg(long, value_parser = ["adam", "nelder-mead", "umda", "quasi-newton"])]
    optimizer: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[command(flatten)]
    path: PathArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Directory for the report and trace files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Also scan the landscape around the final parameters.
    #[arg(long)]
    landscape: bool,
    /// Half-extent of that scan.
    #[arg(long, default_value_t = 0.5)]
    landscape_extent: f64,
    /// Scan resolution k; the grid is (2k+1) squared.
    #[arg(long, default_value_t = 10)]
    landscape_resolution: usize,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RecommendArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Directory for recommendation, reports and summary.
    #[arg(long)]
    out_dir: PathBuf,
    /// Score weights quality,feasibility,cost.
    #[arg(long)]
    weights: Option<String>,
    /// Worker threads for path evaluation (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    instance: InstanceArg,
    #[command(flatten)]
    path: PathArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Which cluster's subproblem to scan.
    #[arg(long, default_value_t = 0)]
    cluster: usize,
    /// Scan center angles, comma separated (defaults to the ramp start).
    #[arg(long)]
    center: Option<String>,
    /// Half-extent along each scan axis.
    #[arg(long, default_value_t = 0.5)]
    extent: f64,
    /// Resolution k; the grid is (2k+1) squared.
    #[arg(long, default_value_t = 10)]
    resolution: usize,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

struct CliError {
    kind: String,
    message: String,
}

impl CliError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

impl From<quopt::Error> for CliError {
    fn from(e: quopt::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Recommend(args) => cmd_recommend(args),
        Command::Landscape(args) => cmd_landscape(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind, e.message);
            ExitCode::FAILURE
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let hi = args.demand_hi.unwrap_or(args.capacity);
    let mut inst = instances::generate_random(
        args.n,
        args.capacity,
        (args.demand_lo, hi),
        args.bbox,
        args.seed,
    )?;
    if let Some(name) = args.name {
        inst.name = name;
    }
    let text = instances::write_native(&inst)?;
    ensure_clear(&args.out, args.force)?;
    std::fs::write(&args.out, text)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let file_config = FileConfig::load(args.tuning.config.as_deref())?;
    let inst = load_instance_file(&args.instance)?;
    let path = resolve_path(&args.path, &file_config)?;
    let settings = resolve_eval_settings(&args.tuning, &file_config, &path)?;
    let seed = pick(args.tuning.seed, file_config.seed, 0);

    let estimate = pathfinder::estimate_qubits(&path, &inst)?;
    if path.algorithm == Algorithm::Qaoa && estimate > settings.encoding.qubit_cap {
        return Err(CliError::new(
            "path-pruned",
            format!(
                "path {} needs an estimated {estimate} qubits, above the cap of {}",
                path.id(),
                settings.encoding.qubit_cap
            ),
        ));
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let report_path = args.out_dir.join("report.json");
    ensure_clear(&report_path, args.force)?;

    let path_seed = pathfinder::path_seed(seed, &path.id());
    let (report, traces) =
        pathfinder::evaluate_path_with_traces(&inst, &path, path_seed, &settings);

    write_json(&report_path, &report)?;
    for (i, trace) in traces.iter().enumerate() {
        let trace_path = args.out_dir.join(format!("trace_sub{i}.tsv"));
        ensure_clear(&trace_path, args.force)?;
        monitor::write_file(&trace_path, |out| monitor::export_trace(trace, out))?;
        if trace.params.len() >= 2 {
            let projection = monitor::project_trajectory(trace)?;
            let projection_path = args.out_dir.join(format!("projection_sub{i}.tsv"));
            ensure_clear(&projection_path, args.force)?;
            monitor::write_file(&projection_path, |out| {
                monitor::export_projection(&projection, out)
            })?;
        }
    }

    if path.algorithm == Algorithm::Qaoa && report.status.is_ok() {
        let setups = pathfinder::prepare_quantum_setups(&inst, &path, &settings)?;
        for (i, setup) in setups.iter().enumerate() {
            let ising_path = args.out_dir.join(format!("ising_sub{i}.json"));
            ensure_clear(&ising_path, args.force)?;
            write_json(&ising_path, &setup.ising.to_document())?;
            if !args.landscape {
                continue;
            }
            let table = EnergyTable::new(&setup.ising)?;
            let objective = Objective::new(2 * setup.depth, |flat: &[f64]| {
                let params = ParameterVector::from_flat(flat).expect("2p angles");
                qaoa_state_with_table(&table, &params)
                    .and_then(|s| s.expectation(&table))
                    .expect("validated model")
            });
            let center = traces[i].best_params().to_vec();
            let (u, v) = monitor::axis_plane(center.len())?;
            let scan = monitor::landscape_scan(
                &objective,
                &center,
                &u,
                &v,
                args.landscape_extent,
                args.landscape_resolution,
            )?;
            let scan_path = args.out_dir.join(format!("landscape_sub{i}.tsv"));
            ensure_clear(&scan_path, args.force)?;
            monitor::write_file(&scan_path, |out| monitor::export_landscape(&scan, out))?;
        }
    }

    let length = report
        .solution
        .as_ref()
        .map(|s| format!("{:.6}", s.total_length))
        .unwrap_or_else(|| "-".into());
    let ratio = report
        .approximation_ratio
        .map(|r| format!("{r:.6}"))
        .unwrap_or_else(|| "-".into());
    println!(
        "path {}: status {}, length {length}, ratio {ratio}, evaluations {}",
        report.path_id,
        report.status.label(),
        report.total_evaluations
    );
    println!("wrote {}", report_path.display());
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> CliResult<()> {
    let file_config = FileConfig::load(args.tuning.config.as_deref())?;
    let inst = load_instance_file(&args.instance)?;
    // Weights and parallelism resolve like every other tunable.
    let weights = match (&args.weights, &file_config.weights) {
        (Some(text), _) => parse_weights(text)?,
        (None, Some(values)) => ScoreWeights {
            quality: values[0],
            feasibility: values[1],
            cost: values[2],
        },
        (None, None) => ScoreWeights::default(),
    };
    let default_path = SolutionPath::quantum(
        Decomposition::ClusterFirst,
        PenaltyStrategy::ExactMinSearch,
        ScalingStrategy::ExactWidth,
        Method::QuasiNewton,
    );
    let settings = RecommendSettings {
        eval: resolve_eval_settings(&args.tuning, &file_config, &default_path)?,
        weights,
        seed: pick(args.tuning.seed, file_config.seed, 0),
        jobs: pick(args.jobs, file_config.jobs, 0),
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let recommendation_path = args.out_dir.join("recommendation.json");
    let reports_path = args.out_dir.join("reports.json");
    let summary_path = args.out_dir.join("summary.txt");
    for p in [&recommendation_path, &reports_path, &summary_path] {
        ensure_clear(p, args.force)?;
    }

    let outcome = pathfinder::recommend(&inst, &PathCatalog::default_catalog(), &settings)?;

    write_json(&recommendation_path, &outcome.recommendation)?;
    write_json(&reports_path, &outcome.reports)?;
    std::fs::write(&summary_path, pathfinder::render_summary(&outcome))?;

    if let Some(top) = outcome.recommendation.ranking.first() {
        println!(
            "top path: {} (status {}, score {})",
            top.path_id,
            top.status,
            top.score
                .map(|s| format!("{s:.4}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    println!("wrote {}", recommendation_path.display());
    Ok(())
}

fn cmd_landscape(args: LandscapeArgs) -> CliResult<()> {
    let file_config = FileConfig::load(args.tuning.config.as_deref())?;
    let inst = load_instance_file(&args.instance)?;
    let mut path_args = args.path.clone();
    // The scan is over the encoded objective; the algorithm is implied.
    path_args.algorithm = Some("qaoa".into());
    let path = resolve_path(&path_args, &file_config)?;
    let settings = resolve_eval_settings(&args.tuning, &file_config, &path)?;
    let seed = pick(args.tuning.seed, file_config.seed, 0);

    let setups = pathfinder::prepare_quantum_setups(&inst, &path, &settings)?;
    if setups.is_empty() {
        return Err(CliError::new(
            "degenerate",
            "the instance has no clusters to scan",
        ));
    }
    let setup = setups.get(args.cluster).ok_or_else(|| {
        CliError::new(
            "config",
            format!(
                "cluster index {} out of range; the instance has {} clusters",
                args.cluster,
                setups.len()
            ),
        )
    })?;
    let dim = 2 * setup.depth;
    let center = match &args.center {
        Some(text) => {
            let values = parse_float_list(text)?;
            if values.len() != dim {
                return Err(CliError::new(
                    "dimension-mismatch",
                    format!(
                        "center has {} angles, the circuit needs {dim}",
                        values.len()
                    ),
                ));
            }
            values
        }
        None => init_params(setup.depth, InitStrategy::LinearRamp, seed)?.to_flat(),
    };
    let table = EnergyTable::new(&setup.ising)?;
    let objective = Objective::new(dim, |flat: &[f64]| {
        let params = ParameterVector::from_flat(flat).expect("2p angles");
        qaoa_state_with_table(&table, &params)
            .and_then(|s| s.expectation(&table))
            .expect("validated model")
    });
    let (u, v) = monitor::axis_plane(dim)?;
    let scan = monitor::landscape_scan(&objective, &center, &u, &v, args.extent, args.resolution)?;
    ensure_clear(&args.out, args.force)?;
    monitor::write_file(&args.out, |out| monitor::export_landscape(&scan, out))?;
    println!(
        "scanned cluster {} ({} qubits, depth {}): {} evaluations",
        args.cluster,
        setup.ising.n,
        setup.depth,
        objective.evaluations()
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn load_instance_file(arg: &InstanceArg) -> CliResult<instances::CvrpInstance> {
    let text = std::fs::read_to_string(&arg.instance)
        .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", arg.instance.display())))?;
    let format = match arg.format.as_str() {
        "euc2d" => InstanceFormat::Euc2d,
        _ => InstanceFormat::Native,
    };
    Ok(instances::load_instance(&text, format)?)
}

fn resolve_path(args: &PathArgs, file: &FileConfig) -> CliResult<SolutionPath> {
    let decomposition =
        match pick_str(&args.decomposition, &file.decomposition, "cluster-first").as_str() {
            "direct-cvrp" => Decomposition::DirectCvrp,
            _ => Decomposition::ClusterFirst,
        };
    let algorithm = pick_str(&args.algorithm, &file.algorithm, "qaoa");
    let path = match algorithm.as_str() {
        "classical-exact" => SolutionPath::classical(decomposition, Algorithm::ClassicalExact),
        "classical-heuristic" => {
            SolutionPath::classical(decomposition, Algorithm::ClassicalHeuristic)
        }
        _ => {
            let penalty = match pick_str(&args.penalty, &file.penalty, "exact-min-search").as_str()
            {
                "bounding-box" => PenaltyStrategy::BoundingBox,
                _ => PenaltyStrategy::ExactMinSearch,
            };
            let scaling = match pick_str(&args.scaling, &file.scaling, "exact-width").as_str() {
                "gershgorin-bound" => ScalingStrategy::GershgorinBound,
                "none" => ScalingStrategy::Unscaled,
                _ => ScalingStrategy::ExactWidth,
            };
            let optimizer =
                Method::parse(&pick_str(&args.optimizer, &file.optimizer, "quasi-newton"))?;
            SolutionPath::quantum(decomposition, penalty, scaling, optimizer)
        }
    };
    if path.algorithm.is_classical() && path.decomposition == Decomposition::DirectCvrp {
        return Err(CliError::new(
            "config",
            "classical baselines run on the cluster-first decomposition only",
        ));
    }
    Ok(path)
}

fn resolve_eval_settings(
    tuning: &TuningArgs,
    file: &FileConfig,
    path: &SolutionPath,
) -> CliResult<EvalSettings> {
    let defaults = EncodingConfig::default();
    let encoding = EncodingConfig {
        penalty_strategy: path.penalty_strategy.unwrap_or(defaults.penalty_strategy),
        scaling_strategy: path.scaling_strategy.unwrap_or(defaults.scaling_strategy),
        lambda: pick(tuning.lambda, file.lambda, defaults.lambda),
        bbox_factor: pick(tuning.bbox_factor, file.bbox_factor, defaults.bbox_factor),
        calibration: pick(tuning.calibration, file.calibration, defaults.calibration),
        qubit_cap: pick(tuning.qubit_cap, file.qubit_cap, defaults.qubit_cap),
    };
    encoding.validate()?;
    let timeout = pick(tuning.timeout_secs, file.timeout_secs, 0.0);
    let budget = Budget {
        max_evals: pick(tuning.max_evals, file.max_evals, 20_000),
        timeout: (timeout > 0.0).then(|| Duration::from_secs_f64(timeout)),
    };
    let mut optimizer_template =
        OptimizerConfig::new(path.optimizer.unwrap_or(Method::QuasiNewton));
    optimizer_template.max_evals = budget.max_evals;
    Ok(EvalSettings {
        encoding,
        budget,
        shots: pick(tuning.shots, file.shots, 4096),
        depth_override: tuning.depth.or(file.depth),
        optimizer_template,
    })
}

fn pick_str(flag: &Option<String>, file: &Option<String>, default: &str) -> String {
    flag.clone()
        .or_else(|| file.clone())
        .unwrap_or_else(|| default.to_string())
}

fn parse_weights(text: &str) -> CliResult<ScoreWeights> {
    let values = parse_float_list(text)?;
    if values.len() != 3 {
        return Err(CliError::new(
            "config",
            "weights need exactly three values: quality,feasibility,cost",
        ));
    }
    if values.iter().any(|w| *w < 0.0) {
        return Err(CliError::new("config", "weights must be nonnegative"));
    }
    Ok(ScoreWeights {
        quality: values[0],
        feasibility: values[1],
        cost: values[2],
    })
}

fn parse_float_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::new("config", format!("bad number `{part}`")))
        })
        .collect()
}

fn ensure_clear(path: &Path, force: bool) -> CliResult<()> {
    if path.exists() && !force {
        return Err(CliError::new(
            "output-exists",
            format!(
                "{} already exists (pass --force to overwrite)",
                path.display()
            ),
        ));
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new("io", format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
