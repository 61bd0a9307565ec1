//! `kcd`: k-closures, k-Markov equivalence, essential graphs and k-PC from
//! the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or format error, 3 internal
//! invariant violation. Diagnostics go to stderr as `error[<kind>]: <message>`.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kcd_core::bench::{self, BayesNet, ExperimentConfig, LinearScm};
use kcd_core::citest::{data_tester, CiBackend, CiTestConfig, CiTester, DataKind, Dataset, OracleTester};
use kcd_core::closure::{construct_k_closure, is_valid_k_closure, k_markov_equivalent, k_markov_equivalent_direct, k_markov_witness};
use kcd_core::enumeration::{
    k_essential_oracle_with, pag_oracle, EnumerationError, EquivalenceRoute, OracleOptions, DEFAULT_DAG_CAP,
    DEFAULT_PAG_EDGE_BUDGET,
};
use kcd_core::graphs::parse_graph;
use kcd_core::kpc::{kpc_learn, pc_stable_learn, KpcOptions, PcOptions, Step5Mode};
use kcd_core::{ConditioningBound, Dag, MixedGraph, Pmg, SearchScope};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "kcd", version, about = "Causal discovery with bounded conditioning sets")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "KCD_THREADS")]
    threads: Option<usize>,
    /// Log verbosity; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the k-closure of a DAG.
    Closure {
        #[arg(long)]
        k: usize,
        /// DAG in the text graph format.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: GraphOut,
    },
    /// Check whether a mixed graph is a valid k-closure.
    Validate {
        #[arg(long)]
        k: usize,
        graph: PathBuf,
    },
    /// Decide k-Markov equivalence of two DAGs.
    Equiv {
        #[arg(long)]
        k: usize,
        first: PathBuf,
        second: PathBuf,
        /// Compare separation statements directly instead of closures.
        #[arg(long)]
        direct: bool,
    },
    /// k-essential graph of a DAG by exhaustive enumeration.
    Essential {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest number of vertices to enumerate.
        #[arg(long, default_value_t = DEFAULT_DAG_CAP)]
        cap: usize,
        #[command(flatten)]
        out: GraphOut,
    },
    /// PAG of a maximal ancestral graph by exhaustive enumeration.
    Pag {
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest number of edges to enumerate over.
        #[arg(long, default_value_t = DEFAULT_PAG_EDGE_BUDGET)]
        max_edges: usize,
        #[command(flatten)]
        out: GraphOut,
    },
    /// Learn a graph with k-PC or PC-stable.
    Learn(LearnArgs),
    /// Sample a dataset from a DAG.
    Simulate(SimulateArgs),
    /// Run a benchmark sweep described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; falls back to `output` in the config, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphOut {
    /// Write the graph here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a Graphviz rendering.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["truth", "data"])))]
struct LearnArgs {
    /// Answer CI queries by separation in this graph.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// CSV dataset with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Learner::Kpc)]
    learner: Learner,
    /// Conditioning-set bound (k-PC) or level cap (PC-stable).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Scope::All)]
    scope: Scope,
    #[arg(long, value_enum, default_value_t = Step5::Single)]
    step5: Step5,
    /// Skip the discriminating-path rule R4.
    #[arg(long)]
    no_r4: bool,
    /// Test used with --data; chosen from the column types by default.
    #[arg(long, value_enum)]
    ci_backend: Option<Backend>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Mean expected count per cell below which G² gives up on a test.
    #[arg(long, default_value_t = 0.0)]
    min_cell_expectation: f64,
    /// Write the rule trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    out: GraphOut,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Model::Discrete)]
    model: Model,
    /// States per variable for random CPTs.
    #[arg(long, default_value_t = 2)]
    states: usize,
    /// JSON file with fixed CPTs instead of random ones.
    #[arg(long, conflicts_with = "states")]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    coef_lo: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    coef_hi: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Learner {
    Kpc,
    Pc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    All,
    Neighbors,
}

#[derive(Clone, Copy, ValueEnum)]
enum Step5 {
    Single,
    Fixpoint,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    GSquare,
    FisherZ,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Discrete,
    Linear,
}

/// Marks an error as a broken internal guarantee (exit code 3).
#[derive(Debug)]
struct Invariant(String);

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invariant {}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path) -> Result<Pmg> {
    parse_graph(&read_text(path)?).with_context(|| format!("{}", path.display()))
}

fn read_dag(path: &Path) -> Result<Dag> {
    Dag::from_pmg(read_graph(path)?).with_context(|| format!("{} is not a DAG", path.display()))
}

fn read_mixed(path: &Path) -> Result<MixedGraph> {
    MixedGraph::from_pmg(read_graph(path)?).with_context(|| format!("{} is not a mixed graph", path.display()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(g: &Pmg, out: &GraphOut) -> Result<()> {
    let mut w = sink(out.out.as_deref())?;
    write!(w, "{g}")?;
    w.flush()?;
    if let Some(p) = &out.dot {
        fs::write(p, g.to_dot()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

fn enumeration_error(e: EnumerationError, flag: &str) -> anyhow::Error {
    match e {
        EnumerationError::CapExceeded { .. } | EnumerationError::BudgetExceeded { .. } => {
            anyhow::anyhow!("{e}; raise {flag} to allow a longer enumeration")
        }
        EnumerationError::EmptyEdgeTypeSet => Invariant(e.to_string()).into(),
        other => other.into(),
    }
}

fn learn(args: &LearnArgs) -> Result<()> {
    let (tester, names): (Box<dyn CiTester + Send>, _) = if let Some(p) = &args.truth {
        let truth = read_mixed(p)?;
        let names = truth.names().clone();
        (Box::new(OracleTester::new(truth)), names)
    } else {
        let p = args.data.as_ref().expect("clap requires a source");
        let kind = match args.ci_backend {
            Some(Backend::GSquare) => DataKind::Discrete,
            Some(Backend::FisherZ) => DataKind::Continuous,
            None => DataKind::Auto,
        };
        let file = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
        let data = Dataset::from_csv(file, kind).with_context(|| format!("{}", p.display()))?;
        let backend = if data.is_discrete() { CiBackend::GSquare } else { CiBackend::FisherZ };
        let config = CiTestConfig {
            alpha: args.alpha,
            min_cell_expectation: args.min_cell_expectation,
            backend,
        };
        (data_tester(&data, &config)?, data.names().clone())
    };
    let graph = match args.learner {
        Learner::Kpc => {
            let Some(k) = args.k else { bail!("--k is required for k-PC") };
            let options = KpcOptions {
                scope: match args.scope {
                    Scope::All => SearchScope::AllSubsets,
                    Scope::Neighbors => SearchScope::NeighborSubsets,
                },
                step5: match args.step5 {
                    Step5::Single => Step5Mode::Single,
                    Step5::Fixpoint => Step5Mode::Fixpoint,
                    Step5::Off => Step5Mode::Off,
                },
                r4: !args.no_r4,
            };
            let state = kpc_learn(&tester, names, ConditioningBound::new(k), options)?;
            if let Some(p) = &args.trace {
                let mut w = sink(Some(p))?;
                let g = &state.k_graph;
                for e in &state.trace {
                    let line = serde_json::json!({
                        "rule": e.rule,
                        "at": g.name(e.at),
                        "other": g.name(e.other),
                        "mark": e.mark,
                        "witness": e.witness.iter().map(|&v| g.name(v)).collect::<Vec<_>>(),
                    });
                    writeln!(w, "{line}")?;
                }
                w.flush()?;
            }
            for c in &state.conflicts {
                log::warn!("rule conflict: {c:?}");
            }
            if args.truth.is_some() {
                if let Some(path) = &state.r4_witness {
                    return Err(Invariant(format!("unresolved discriminating path {path:?} under a separation oracle")).into());
                }
            }
            state.k_graph
        }
        Learner::Pc => {
            let out = pc_stable_learn(
                &tester,
                names,
                PcOptions {
                    max_level: args.k,
                    ..Default::default()
                },
            )?;
            for (u, v) in &out.conflicts {
                log::warn!("v-structure conflict on {} - {}", out.graph.name(*u), out.graph.name(*v));
            }
            out.graph
        }
    };
    let degenerate = tester.degenerate_count();
    if degenerate > 0 {
        log::info!("{degenerate} CI tests were degenerate and answered independent");
    }
    emit(&graph, &args.out)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let dag = read_dag(&args.input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let data = match args.model {
        Model::Discrete => {
            let bn = match &args.params {
                Some(p) => BayesNet::from_json(dag, &read_text(p)?)?,
                None if args.states >= 2 => BayesNet::random(dag, args.states, &mut rng),
                None => bail!("--states must be at least 2"),
            };
            bench::sample_discrete(&bn, args.rows, &mut rng)
        }
        Model::Linear => {
            if args.coef_lo > args.coef_hi {
                bail!("--coef-lo exceeds --coef-hi");
            }
            let scm = LinearScm::random(dag, args.coef_lo, args.coef_hi, &mut rng);
            bench::sample_linear(&scm, args.rows, &mut rng)
        }
    };
    let mut w = sink(args.out.as_deref())?;
    data.to_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Closure { k, input, out } => {
            let d = read_dag(&input)?;
            let bound = ConditioningBound::new(k);
            let c = construct_k_closure(&d, bound);
            if let Err(v) = is_valid_k_closure(c.graph(), bound) {
                return Err(Invariant(format!("constructed closure is invalid: {}", v.describe(c.graph()))).into());
            }
            emit(c.graph(), &out)
        }
        Command::Validate { k, graph } => {
            let g = read_mixed(&graph)?;
            match is_valid_k_closure(&g, ConditioningBound::new(k)) {
                Ok(()) => println!("valid: true"),
                Err(v) => println!("valid: false, reason: {}", v.describe(&g)),
            }
            Ok(())
        }
        Command::Equiv { k, first, second, direct } => {
            let (d1, d2) = (read_dag(&first)?, read_dag(&second)?);
            let bound = ConditioningBound::new(k);
            let eq = if direct {
                k_markov_equivalent_direct(&d1, &d2, bound)?
            } else {
                k_markov_equivalent(&d1, &d2, bound)?
            };
            println!("k-markov-equivalent: {eq}");
            if !eq {
                if let Some(q) = k_markov_witness(&d1, &d2, bound)? {
                    println!("witness: {} _||_ {} | {{{}}}", d1.name(q.a), d1.name(q.b), d1.set_names(q.cond).join(","));
                }
            }
            Ok(())
        }
        Command::Essential { k, input, cap, out } => {
            let d = read_dag(&input)?;
            let opts = OracleOptions {
                cap,
                route: EquivalenceRoute::Closure,
            };
            let g = k_essential_oracle_with(&d, ConditioningBound::new(k), opts).map_err(|e| enumeration_error(e, "--cap"))?;
            emit(&g, &out)
        }
        Command::Pag { input, max_edges, out } => {
            let m = read_mixed(&input)?;
            let g = pag_oracle(&m, max_edges).map_err(|e| enumeration_error(e, "--max-edges"))?;
            emit(&g, &out)
        }
        Command::Learn(args) => learn(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Bench { config, seed, out } => {
            let mut cfg = ExperimentConfig::from_toml(&read_text(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = bench::run_experiment(&cfg)?;
            let dest = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            let mut w = sink(dest.as_deref())?;
            bench::write_csv(&result.rows, &mut w)?;
            w.flush()?;
            eprintln!("rows: {}, degenerate tests: {}", result.rows.len(), result.degenerate_tests);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error[usage]: {e}");
            return ExitCode::from(1);
        }
    }
    panic::set_hook(Box::new(|info| eprintln!("error[invariant]: {info}")));
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) if e.downcast_ref::<Invariant>().is_some() => {
            eprintln!("error[invariant]: {e:#}");
            ExitCode::from(3)
        }
        Ok(Err(e)) => {
            eprintln!("error[input]: {e:#}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}
