//! Batch front end: generate instances, solve or greedily pebble them,
//! validate traces, and emit tradeoff curves.
//!
//! Exit codes: 0 success, 1 domain error (infeasible budget, invalid trace,
//! threshold violations), 2 usage error. Output on stdout is deterministic
//! machine-readable JSON/CSV; diagnostics go to stderr.

use clap::{Args, Parser, Subcommand};
use rbpebble_core::*;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rbpebble", version, about = "Red-blue pebble game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a gadget DAG
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Build a reduction instance from an undirected graph
    Reduce {
        #[command(subcommand)]
        what: ReduceCommand,
    },
    /// Exact optimal-cost search
    Solve(SolveArgs),
    /// Greedy heuristic pebbling
    Greedy(GreedyArgs),
    /// Replay and check a trace file
    Validate(ValidateArgs),
    /// Exact cost over a range of red-pebble budgets, as CSV
    Tradeoff(TradeoffArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Alternating-chain DAG with two control groups
    Tradeoff {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid of input groups that misleads greedy scheduling
    Grid {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        kprime: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReduceCommand {
    /// Hamiltonian-path instance with per-model cost threshold
    Hampath {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "1/100")]
        epsilon: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vertex-cover instance (oneshot, R = k + 1)
    Vertexcover {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// base|oneshot|nodel|compcost
    #[arg(long)]
    model: String,
    /// compute cost as a rational P/Q in (0,1); compcost only
    #[arg(long, default_value = "1/100")]
    epsilon: String,
    /// free: sources computable at will; blue-sources: sources start blue
    #[arg(long, default_value = "free")]
    start: String,
    /// any: any pebble on sinks; blue-sinks: blue pebbles required
    #[arg(long, default_value = "any")]
    finish: String,
}

impl ModelArgs {
    fn build(&self) -> Result<ModelSpec, String> {
        let variant: Variant = self.model.parse().map_err(|e| format!("{e}"))?;
        let epsilon = parse_epsilon(&self.epsilon).map_err(|e| format!("{e}"))?;
        let start = match self.start.as_str() {
            "free" => StartConvention::FreeSources,
            "blue-sources" => StartConvention::BlueSources,
            other => return Err(format!("unknown start convention `{other}`")),
        };
        let finish = match self.finish.as_str() {
            "any" => FinishConvention::AnyPebbleOnSinks,
            "blue-sinks" => FinishConvention::BlueOnSinks,
            other => return Err(format!("unknown finish convention `{other}`")),
        };
        Ok(ModelSpec::with_epsilon(variant, epsilon)
            .map_err(|e| format!("{e}"))?
            .with_conventions(start, finish))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// red pebble budget
    #[arg(long)]
    red: usize,
    /// state expansion cap (default 5000000, or RBPEBBLE_MAX_STATES)
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    red: usize,
    /// most-red|fewest-blue|best-ratio
    #[arg(long, default_value = "most-red")]
    rule: String,
    /// farthest|lowest-id
    #[arg(long, default_value = "farthest")]
    eviction: String,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    red: usize,
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    r_min: usize,
    #[arg(long)]
    r_max: usize,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    max_states: Option<usize>,
}

#[derive(Serialize)]
struct SolveOutput {
    cost: RatioOut,
    exhausted: bool,
    states_expanded: usize,
    loads: u64,
    stores: u64,
    computes: u64,
    deletes: u64,
    trace_len: usize,
}

#[derive(Serialize)]
struct RatioOut {
    num: i64,
    den: i64,
}

impl From<Cost> for RatioOut {
    fn from(c: Cost) -> Self {
        RatioOut {
            num: *c.numer(),
            den: *c.denom(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(DomainError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

struct DomainError(String);

impl<E: std::fmt::Display> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, DomainError> {
    fs::read_to_string(path).map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), DomainError> {
    fs::write(path, content).map_err(|e| DomainError(format!("{}: {e}", path.display())))
}

fn limits(max_states: Option<usize>) -> SearchLimits {
    let mut l = SearchLimits::default();
    if let Some(env) = std::env::var("RBPEBBLE_MAX_STATES")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        l.max_states = env;
    }
    if let Some(m) = max_states {
        l.max_states = m;
    }
    l
}

fn run(cli: Cli) -> Result<(), DomainError> {
    match cli.command {
        Command::Gen { what } => match what {
            GenCommand::Tradeoff { d, m, out } => {
                let dag = gen_tradeoff_dag(d, m)?;
                write(&out, &serialize_dag(&dag))?;
                eprintln!("wrote {} ({} nodes)", out.display(), dag.node_count());
            }
            GenCommand::Grid { l, k, kprime, out } => {
                let grid = gen_greedy_grid(l, k, kprime)?;
                write(&out, &serialize_dag(&grid.dag))?;
                eprintln!(
                    "wrote {} ({} nodes, {} groups, R = {})",
                    out.display(),
                    grid.dag.node_count(),
                    grid.dag.groups().len(),
                    grid.r
                );
            }
        },
        Command::Reduce { what } => match what {
            ReduceCommand::Hampath {
                graph,
                model,
                epsilon,
                out,
            } => {
                let g = parse_graph(&read(&graph)?)?;
                let variant: Variant = model.parse()?;
                let eps = parse_epsilon(&epsilon)?;
                let spec = ModelSpec::with_epsilon(variant, eps)?;
                let inst = reduce_hampath(&g, &spec)?;
                write_instance(&out, &inst)?;
            }
            ReduceCommand::Vertexcover { graph, k, out } => {
                let g = parse_graph(&read(&graph)?)?;
                let inst = reduce_vertex_cover(&g, k)?;
                if let Some(w) = inst.dag.meta().get("warning") {
                    eprintln!("warning: {w}");
                }
                write_instance(&out, &inst)?;
            }
        },
        Command::Solve(args) => {
            let dag = parse_dag(&read(&args.dag)?)?;
            let model = args.model.build()?;
            let res = solve_exact(&dag, &model, args.red, &limits(args.max_states))?;
            let rep = validate_trace(&dag, &model, args.red, &res.trace)?;
            let out = SolveOutput {
                cost: res.cost.into(),
                exhausted: res.exhausted,
                states_expanded: res.states_expanded,
                loads: rep.loads,
                stores: rep.stores,
                computes: rep.computes,
                deletes: rep.deletes,
                trace_len: res.trace.len(),
            };
            println!("{}", serde_json::to_string(&out).expect("serializable"));
            if let Some(path) = args.trace_out {
                write(&path, &serialize_trace(&dag, &res.trace))?;
            }
            eprintln!(
                "solved: cost {} ({}), {} states",
                res.cost,
                if res.exhausted { "optimal" } else { "upper bound" },
                res.states_expanded
            );
        }
        Command::Greedy(args) => {
            let dag = parse_dag(&read(&args.dag)?)?;
            let model = args.model.build()?;
            let rule = match args.rule.as_str() {
                "most-red" => GreedyRule::MostRedInputs,
                "fewest-blue" => GreedyRule::FewestBlueInputs,
                "best-ratio" => GreedyRule::BestRedRatio,
                other => return Err(DomainError(format!("unknown rule `{other}`"))),
            };
            let eviction = match args.eviction.as_str() {
                "farthest" => EvictionPolicy::FarthestNextUse,
                "lowest-id" => EvictionPolicy::LowestId,
                other => return Err(DomainError(format!("unknown eviction `{other}`"))),
            };
            let trace = greedy_pebble(&dag, &model, args.red, GreedyPolicy { rule, eviction })?;
            let rep = validate_trace(&dag, &model, args.red, &trace)?;
            println!("{}", serde_json::to_string(&rep).expect("serializable"));
            if let Some(path) = args.trace_out {
                write(&path, &serialize_trace(&dag, &trace))?;
            }
            eprintln!("greedy: cost {} over {} moves", rep.total, trace.len());
        }
        Command::Validate(args) => {
            let dag = parse_dag(&read(&args.dag)?)?;
            let model = args.model.build()?;
            let trace = parse_trace(&dag, &read(&args.trace)?)?;
            let rep = validate_trace(&dag, &model, args.red, &trace)?;
            println!("{}", serde_json::to_string(&rep).expect("serializable"));
            eprintln!("valid: {rep}");
        }
        Command::Tradeoff(args) => {
            let dag = parse_dag(&read(&args.dag)?)?;
            let model = args.model.build()?;
            let points = tradeoff_curve(
                &dag,
                &model,
                args.r_min,
                args.r_max,
                &limits(args.max_states),
            )?;
            let mut csv = String::from("R,cost_num,cost_den,exhausted\n");
            for p in &points {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    p.r,
                    p.cost.numer(),
                    p.cost.denom(),
                    p.exhausted
                ));
            }
            write(&args.csv, &csv)?;
            print!("{csv}");
            eprintln!("tradeoff: {} points -> {}", points.len(), args.csv.display());
        }
    }
    Ok(())
}

fn write_instance(out: &Path, inst: &ReductionInstance) -> Result<(), DomainError> {
    write(out, &serialize_dag(&inst.dag))?;
    let sidecar = out.with_extension("meta.json");
    write(&sidecar, &serialize_sidecar(inst))?;
    eprintln!(
        "wrote {} and {} ({} nodes, R = {})",
        out.display(),
        sidecar.display(),
        inst.dag.node_count(),
        inst.r
    );
    Ok(())
}
