use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use kcirc::robustness::Strategy;
use kcirc_cli::commands::{
    cmd_bounds, cmd_check, cmd_generate, cmd_reproduce_paper, cmd_simulate, BoundsArgs, CheckArgs,
    GlobalOpts, OutputFormat,
};
use kcirc_cli::config::{parse_init, parse_node_list, parse_signal, ExperimentConfig, GraphSource};
use kcirc_cli::parallel::effective_threads;
use kcirc_cli::CliError;

#[derive(Parser)]
#[command(name = "kcirc", version)]
#[command(about = "k-circulant digraphs: exact robustness, closed-form bounds, and resilient-consensus experiments")]
struct Cli {
    /// Seed for every randomized quantity (also the default for config files)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for exhaustive checks (default: KCIRC_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for emitted files
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    /// Report format on standard output
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    PartitionsOnly,
    FullPairs,
}

#[derive(Subcommand)]
enum Command {
    /// Write a circulant digraph in the edge-list format
    Generate {
        /// Node count
        #[arg(long)]
        n: usize,
        /// Connection parameter: offsets 1..=k
        #[arg(long)]
        k: Option<usize>,
        /// Explicit offset list, e.g. 1,2,3
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<u32>>,
        /// Output file (standard output if omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a DOT rendering here
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Exact robustness report (edge-list file, builtin, or circulant parameters)
    Check {
        /// Edge-list file to analyze
        graph: Option<PathBuf>,
        /// Built-in graph: fig3-counterexample
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<u32>>,
        /// Enumeration strategy
        #[arg(long, value_enum, default_value_t = StrategyArg::PartitionsOnly)]
        strategy: StrategyArg,
        /// Assert (r,s)-robustness; repeatable
        #[arg(long, num_args = 2, value_names = ["R", "S"], action = ArgAction::Append)]
        rs: Vec<usize>,
        /// Also report underlying vertex connectivity
        #[arg(long)]
        connectivity: bool,
        /// Print only the closed-form bounds (no enumeration)
        #[arg(long)]
        bound_only: bool,
        /// Assert the exact maximum
        #[arg(long)]
        expect_max_r: Option<usize>,
    },
    /// Closed-form bound table over ranges of n and k, as CSV
    Bounds {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        /// Upper k (default n-1 per row)
        #[arg(long)]
        k_max: Option<usize>,
        /// Also run the exact checkers where the budget allows
        #[arg(long)]
        verify: bool,
        /// Output file (standard output if omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one consensus simulation and emit trajectory CSVs
    Simulate {
        /// Configuration file; flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
        /// Edge-list file
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Built-in graph: fig3-counterexample
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<u32>>,
        /// Adversarial agents, 0-indexed, e.g. 0,6
        #[arg(long)]
        adversaries: Option<String>,
        /// malicious | byzantine
        #[arg(long)]
        model: Option<String>,
        /// f-local | f-total
        #[arg(long)]
        scope: Option<String>,
        /// Adversary-scope bound
        #[arg(long)]
        f: Option<usize>,
        /// Filter parameter of the update rule (defaults to --f)
        #[arg(long)]
        f_filter: Option<usize>,
        /// constant:C | ramp:START,SLOPE | sin:CENTER,AMP,PERIOD | random:LO,HI | per-edge:LO,HI
        #[arg(long)]
        signal: Option<String>,
        /// Weight floor (default 1 / (2 * max in-degree))
        #[arg(long)]
        alpha: Option<f64>,
        /// uniform:LO,HI | values:X0,X1,...
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Exit nonzero unless the run converges inside the safety interval
        #[arg(long)]
        expect_consensus: bool,
    },
    /// Re-run the bundled reference experiments and validate their expectations
    ReproducePaper,
}

fn graph_source_from(
    positional: Option<PathBuf>,
    file_flag: Option<PathBuf>,
    builtin: Option<String>,
    n: Option<usize>,
    k: Option<usize>,
    offsets: Option<Vec<u32>>,
) -> Result<Option<GraphSource>, CliError> {
    let mut sources: Vec<GraphSource> = Vec::new();
    if let Some(path) = positional.or(file_flag) {
        sources.push(GraphSource::EdgeList(path));
    }
    if let Some(name) = builtin {
        sources.push(GraphSource::Builtin(name));
    }
    match (n, k, offsets) {
        (Some(n), Some(k), None) => sources.push(GraphSource::KCirculant { n, k }),
        (Some(n), None, Some(offsets)) => sources.push(GraphSource::Offsets { n, offsets }),
        (None, None, None) => {}
        _ => {
            return Err(CliError::invalid(
                "circulant parameters need --n together with exactly one of --k or --offsets",
            ))
        }
    }
    match sources.len() {
        0 => Ok(None),
        1 => Ok(Some(sources.remove(0))),
        _ => Err(CliError::invalid("more than one graph source given")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let global = GlobalOpts {
        seed: cli.seed.unwrap_or(42),
        threads: effective_threads(cli.threads),
        output_dir: cli.output_dir,
        format: match cli.format {
            FormatArg::Human => OutputFormat::Human,
            FormatArg::Csv => OutputFormat::Csv,
        },
    };

    match cli.command {
        Command::Generate { n, k, offsets, output, dot } => cmd_generate(n, k, offsets, output, dot),
        Command::Check { graph, builtin, n, k, offsets, strategy, rs, connectivity, bound_only, expect_max_r } => {
            let source = graph_source_from(graph, None, builtin, n, k, offsets)?
                .ok_or_else(|| CliError::invalid("check needs a graph: file, --builtin, or --n with --k/--offsets"))?;
            if rs.len() % 2 != 0 {
                return Err(CliError::invalid("--rs takes pairs of values"));
            }
            let rs_pairs = rs.chunks(2).map(|c| (c[0], c[1])).collect();
            cmd_check(
                CheckArgs {
                    source,
                    strategy: match strategy {
                        StrategyArg::PartitionsOnly => Strategy::PartitionsOnly,
                        StrategyArg::FullPairs => Strategy::FullPairs,
                    },
                    rs: rs_pairs,
                    connectivity,
                    bound_only,
                    expect_max_r,
                },
                &global,
            )
        }
        Command::Bounds { n_min, n_max, k_min, k_max, verify, output } => {
            cmd_bounds(BoundsArgs { n_min, n_max, k_min, k_max, verify, output }, &global)
        }
        Command::Simulate {
            config,
            graph,
            builtin,
            n,
            k,
            offsets,
            adversaries,
            model,
            scope,
            f,
            f_filter,
            signal,
            alpha,
            init,
            horizon,
            tol,
            expect_consensus,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        CliError::invalid(format!("cannot read {}: {e}", path.display()))
                    })?;
                    ExperimentConfig::parse(&text)?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(source) = graph_source_from(None, graph, builtin, n, k, offsets)? {
                cfg.graph = source;
            }
            if let Some(list) = adversaries {
                cfg.adversaries = parse_node_list(&list)?;
            }
            if let Some(m) = model {
                cfg.model = match m.as_str() {
                    "malicious" => kcirc::sim::AdversaryModel::Malicious,
                    "byzantine" => kcirc::sim::AdversaryModel::Byzantine,
                    other => return Err(CliError::invalid(format!("unknown model `{other}`"))),
                };
            }
            if let Some(s) = scope {
                cfg.scope = match s.as_str() {
                    "f-local" => kcirc::sim::AdversaryScope::FLocal,
                    "f-total" => kcirc::sim::AdversaryScope::FTotal,
                    other => return Err(CliError::invalid(format!("unknown scope `{other}`"))),
                };
            }
            if let Some(f) = f {
                cfg.f = f;
                if f_filter.is_none() {
                    cfg.f_filter = f;
                }
            }
            if let Some(ff) = f_filter {
                cfg.f_filter = ff;
            }
            if let Some(text) = signal {
                cfg.signal = parse_signal(&text)?;
            }
            if let Some(a) = alpha {
                cfg.alpha = Some(a);
            }
            if let Some(text) = init {
                cfg.init = parse_init(&text)?;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            cmd_simulate(&cfg, expect_consensus, &global)
        }
        Command::ReproducePaper => cmd_reproduce_paper(&global),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code.clamp(0, 255) as u8)
        }
    }
}
