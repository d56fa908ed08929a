//! Implementations behind the `kcirc` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kcirc::bounds::{corollary1_rs_bound, theorem1_lower_bound};
use kcirc::connectivity::{build_connectivity_counterexample, underlying_vertex_connectivity};
use kcirc::graph::{make_circulant, make_k_circulant, CirculantSpec, Digraph, NodeId};
use kcirc::robustness::{enumeration_domain, RobustnessError, RobustnessReport, Strategy};
use kcirc::sim::{simulate, AdversarySpec, InitialCondition, SimError, SimulationResult};
use kcirc::wmsr::WeightScheme;

use crate::config::{ExperimentConfig, GraphSource, InitSpec};
use crate::formats::{
    byzantine_sends_csv, format_real, parse_edge_list, serialize_edge_list, subset_csv,
    subset_human, to_dot, trajectories_csv,
};
use crate::parallel::{is_rs_robust_parallel, max_r_robustness_parallel};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Csv,
}

#[derive(Debug, Clone)]
pub struct GlobalOpts {
    pub seed: u64,
    pub threads: usize,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

fn emit(format: OutputFormat, key: &str, human: String, csv: String) {
    match format {
        OutputFormat::Human => println!("{human}"),
        OutputFormat::Csv => println!("{key},{csv}"),
    }
}

fn note(format: OutputFormat, text: &str) {
    if format == OutputFormat::Human {
        println!("{text}");
    }
}

const LABEL_NOTE: &str =
    "labels: nodes are 0-indexed in files and reports; 1-indexed figure labels are id + 1";

pub fn load_graph(source: &GraphSource) -> Result<Digraph, CliError> {
    match source {
        GraphSource::KCirculant { n, k } => {
            make_k_circulant(*n, *k).map_err(|e| CliError::invalid(e.to_string()))
        }
        GraphSource::Offsets { n, offsets } => {
            let spec = CirculantSpec::new(*n, offsets.clone())
                .map_err(|e| CliError::invalid(e.to_string()))?;
            make_circulant(&spec).map_err(|e| CliError::invalid(e.to_string()))
        }
        GraphSource::EdgeList(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::invalid(format!("cannot read {}: {e}", path.display()))
            })?;
            parse_edge_list(&text)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
        }
        GraphSource::Builtin(name) => match name.as_str() {
            "fig3-counterexample" => Ok(build_connectivity_counterexample()),
            other => Err(CliError::invalid(format!(
                "unknown builtin `{other}`; available: fig3-counterexample"
            ))),
        },
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

pub fn cmd_generate(
    n: usize,
    k: Option<usize>,
    offsets: Option<Vec<u32>>,
    output: Option<PathBuf>,
    dot: Option<PathBuf>,
) -> Result<(), CliError> {
    let source = match (k, offsets) {
        (Some(k), None) => GraphSource::KCirculant { n, k },
        (None, Some(offsets)) => GraphSource::Offsets { n, offsets },
        _ => return Err(CliError::invalid("generate needs exactly one of --k or --offsets")),
    };
    let g = load_graph(&source)?;
    let text = serialize_edge_list(&g);
    match &output {
        Some(path) => {
            write_file(path, &text)?;
            println!("wrote {} ({} nodes, {} edges)", path.display(), g.node_count(), g.edge_count());
        }
        None => print!("{text}"),
    }
    if let Some(path) = dot {
        write_file(&path, &to_dot(&g))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub struct CheckArgs {
    pub source: GraphSource,
    pub strategy: Strategy,
    pub rs: Vec<(usize, usize)>,
    pub connectivity: bool,
    pub bound_only: bool,
    pub expect_max_r: Option<usize>,
}

fn budget_refusal(e: RobustnessError) -> CliError {
    CliError::invalid(format!("{e}; rerun with --bound-only for the closed-form bounds"))
}

pub fn cmd_check(args: CheckArgs, global: &GlobalOpts) -> Result<(), CliError> {
    let fmt = global.format;
    let g = load_graph(&args.source)?;
    let kk = g.k_circulant_k();

    emit(fmt, "n", format!("graph: {} nodes, {} edges", g.node_count(), g.edge_count()), g.node_count().to_string());
    if fmt == OutputFormat::Csv {
        emit(fmt, "edges", String::new(), g.edge_count().to_string());
    }
    match kk {
        Some(k) => emit(fmt, "k_circulant", format!("family: k-circulant with k = {k}"), k.to_string()),
        None => emit(fmt, "k_circulant", "family: not k-circulant".into(), String::new()),
    }
    note(fmt, LABEL_NOTE);

    let mut failures: Vec<String> = Vec::new();

    if let Some(k) = kk {
        let t1 = theorem1_lower_bound(g.node_count(), k).expect("k-circulant parameters are legal");
        let c1 = corollary1_rs_bound(k).expect("k >= 1");
        emit(fmt, "theorem1_bound", format!("closed-form bound: at least {t1}-robust"), t1.to_string());
        emit(
            fmt,
            "corollary1_bound",
            format!("closed-form bound: at least ({c1},{c1})-robust"),
            c1.to_string(),
        );
    } else if args.bound_only {
        return Err(CliError::invalid(
            "--bound-only needs a k-circulant graph; the closed forms do not apply",
        ));
    }

    if args.bound_only {
        return Ok(());
    }

    enumeration_domain(&g, args.strategy).map_err(budget_refusal)?;
    let report = max_r_robustness_parallel(&g, args.strategy, global.threads)
        .map_err(budget_refusal)?;
    emit(
        fmt,
        "strategy",
        format!("strategy: {}", args.strategy),
        args.strategy.as_str().to_string(),
    );
    emit(fmt, "max_r", format!("exact max_r: {}", report.max_r), report.max_r.to_string());
    if args.strategy == Strategy::PartitionsOnly && kk.is_none() {
        note(
            fmt,
            "note: the partition strategy is an upper bound on arbitrary digraphs; \
             rerun with --strategy full-pairs to confirm the exact value",
        );
    }
    if let Some(w) = &report.witness {
        let r = report.max_r + 1;
        emit(
            fmt,
            "witness_r",
            format!(
                "witness at r = {r}: S1 = {}, S2 = {}",
                subset_human(&w.s1),
                subset_human(&w.s2)
            ),
            r.to_string(),
        );
        if fmt == OutputFormat::Csv {
            emit(fmt, "witness_s1", String::new(), subset_csv(&w.s1));
            emit(fmt, "witness_s2", String::new(), subset_csv(&w.s2));
        }
    }
    if let Some(k) = kk {
        let t1 = theorem1_lower_bound(g.node_count(), k).expect("legal");
        let gap = report.max_r as i64 - t1 as i64;
        let wording = if gap == 0 {
            "exact value meets the bound".to_string()
        } else {
            format!("exact value exceeds the bound by {gap}")
        };
        emit(fmt, "bound_gap", format!("bound comparison: {wording}"), gap.to_string());
    }
    let f_tol = report.max_r.saturating_sub(1) / 2;
    emit(
        fmt,
        "f_local_tolerance",
        format!("certified f-local malicious tolerance: F = {f_tol}"),
        f_tol.to_string(),
    );

    for &(r, s) in &args.rs {
        let rs_report = is_rs_robust_parallel(&g, r, s, global.threads)
            .map_err(budget_refusal)?;
        let verdict = if rs_report.holds { "holds" } else { "fails" };
        let mut human = format!("({r},{s})-robust: {verdict}");
        if let Some(w) = &rs_report.witness {
            let _ = write!(
                human,
                " [witness S1 = {} (|X| = {}), S2 = {} (|X| = {})]",
                subset_human(&w.pair.s1),
                w.x1_size,
                subset_human(&w.pair.s2),
                w.x2_size
            );
        }
        emit(fmt, &format!("rs_{r}_{s}"), human, verdict.to_string());
        if !rs_report.holds {
            failures.push(format!("expected ({r},{s})-robustness to hold, observed a violation"));
        }
    }

    if args.connectivity {
        let kappa = underlying_vertex_connectivity(&g)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        emit(
            fmt,
            "vertex_connectivity",
            format!("underlying vertex connectivity: {kappa}"),
            kappa.to_string(),
        );
    }

    if let Some(expected) = args.expect_max_r {
        if report.max_r != expected {
            failures.push(format!("expected max_r = {expected}, observed {}", report.max_r));
        }
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::invalid(failures.join("; ")))
    }
}

pub struct BoundsArgs {
    pub n_min: usize,
    pub n_max: usize,
    pub k_min: usize,
    pub k_max: Option<usize>,
    pub verify: bool,
    pub output: Option<PathBuf>,
}

pub fn cmd_bounds(args: BoundsArgs, global: &GlobalOpts) -> Result<(), CliError> {
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(CliError::invalid("bounds needs 2 <= n-min <= n-max"));
    }
    let mut out = String::from("n,k,theorem1_r,corollary1_t,exact_max_r,rs_tt_holds,status\n");
    for n in args.n_min..=args.n_max {
        let k_hi = args.k_max.unwrap_or(n - 1).min(n - 1);
        for k in args.k_min.max(1)..=k_hi {
            let t1 = theorem1_lower_bound(n, k).expect("loop bounds keep (n, k) legal");
            let c1 = corollary1_rs_bound(k).expect("k >= 1");
            let (exact, rs_tt, status) = if args.verify {
                verify_row(n, k, c1, global)
            } else {
                (String::new(), String::new(), "bounds-only".to_string())
            };
            let _ = writeln!(out, "{n},{k},{t1},{c1},{exact},{rs_tt},{status}");
        }
    }
    match &args.output {
        Some(path) => {
            write_file(path, &out)?;
            println!("wrote {}", path.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn verify_row(n: usize, k: usize, t: usize, global: &GlobalOpts) -> (String, String, String) {
    let g = make_k_circulant(n, k).expect("legal parameters");
    let exact = match max_r_robustness_parallel(&g, Strategy::PartitionsOnly, global.threads) {
        Ok(report) => Some(report.max_r),
        Err(RobustnessError::BudgetExceeded { .. }) | Err(RobustnessError::GraphTooLarge { .. }) => None,
        Err(e) => unreachable!("unexpected enumeration failure: {e}"),
    };
    let rs = if t >= 1 {
        match is_rs_robust_parallel(&g, t, t, global.threads) {
            Ok(report) => Some(report.holds),
            Err(RobustnessError::BudgetExceeded { .. }) | Err(RobustnessError::GraphTooLarge { .. }) => None,
            Err(e) => unreachable!("unexpected enumeration failure: {e}"),
        }
    } else {
        Some(true)
    };
    let status = if exact.is_some() && rs.is_some() { "verified" } else { "skipped" };
    (
        exact.map(|v| v.to_string()).unwrap_or_default(),
        rs.map(|v| v.to_string()).unwrap_or_default(),
        status.to_string(),
    )
}

/// Everything one simulation run produces, before it is written out.
pub struct SimOutcome {
    pub result: SimulationResult,
    pub resolved: ExperimentConfig,
    pub safe: bool,
}

pub fn run_simulation(cfg: &ExperimentConfig) -> Result<SimOutcome, CliError> {
    let g = load_graph(&cfg.graph)?;
    let scheme = match cfg.alpha {
        Some(alpha) => WeightScheme::uniform(alpha).map_err(|e| CliError::invalid(e.to_string()))?,
        None => WeightScheme::uniform_for_graph(&g),
    };
    let spec = AdversarySpec {
        model: cfg.model,
        scope: cfg.scope,
        f: cfg.f,
        members: cfg.adversaries.clone(),
        signal: cfg.signal,
    };
    let init = match &cfg.init {
        InitSpec::Uniform { lo, hi } => InitialCondition::UniformRange { lo: *lo, hi: *hi },
        InitSpec::Values(values) => InitialCondition::Explicit(values.clone()),
    };
    let result = simulate(&g, &spec, &scheme, &init, cfg.f_filter, cfg.horizon, cfg.tol, cfg.seed)
        .map_err(|e| match &e {
            SimError::Placement(_) => CliError::invalid(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        })?;
    let safe = match result.consensus_value {
        Some(c) => c >= result.safety_interval.0 && c <= result.safety_interval.1,
        None => false,
    };
    Ok(SimOutcome { result, resolved: cfg.clone(), safe })
}

fn simulation_summary(outcome: &SimOutcome) -> String {
    let result = &outcome.result;
    let mut s = String::new();
    let _ = writeln!(s, "{LABEL_NOTE}");
    let adversaries: Vec<String> =
        outcome.resolved.adversaries.iter().map(|a| a.to_string()).collect();
    let labels: Vec<String> =
        outcome.resolved.adversaries.iter().map(|a| (a + 1).to_string()).collect();
    if adversaries.is_empty() {
        let _ = writeln!(s, "adversaries: none");
    } else {
        let _ = writeln!(
            s,
            "adversaries: {} ({}, figure labels {})",
            adversaries.join(", "),
            outcome.resolved.model.as_str(),
            labels.join(", ")
        );
    }
    let _ = writeln!(s, "seed: {}", outcome.resolved.seed);
    let _ = writeln!(s, "converged: {}", result.converged);
    match result.converged_at {
        Some(t) => {
            let _ = writeln!(s, "converged_at: {t}");
        }
        None => {
            let _ = writeln!(s, "converged_at: -");
        }
    }
    match result.consensus_value {
        Some(c) => {
            let _ = writeln!(s, "consensus_value: {}", format_real(c));
        }
        None => {
            let _ = writeln!(s, "consensus_value: -");
        }
    }
    let spread = result.spread_series.last().copied().unwrap_or(0.0);
    let _ = writeln!(s, "final_spread: {}", format_real(spread));
    let _ = writeln!(
        s,
        "safety_interval: [{}, {}]",
        format_real(result.safety_interval.0),
        format_real(result.safety_interval.1)
    );
    let verdict = if !result.converged {
        "not-converged"
    } else if outcome.safe {
        "inside-safety-interval"
    } else {
        "OUTSIDE-safety-interval"
    };
    let _ = writeln!(s, "safety: {verdict}");
    s
}

pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    expect_consensus: bool,
    global: &GlobalOpts,
) -> Result<(), CliError> {
    let outcome = run_simulation(cfg)?;
    std::fs::create_dir_all(&global.output_dir)?;
    write_file(&global.output_dir.join("trajectories.csv"), &trajectories_csv(&outcome.result))?;
    write_file(&global.output_dir.join("config.txt"), &outcome.resolved.to_text())?;
    let summary = simulation_summary(&outcome);
    write_file(&global.output_dir.join("summary.txt"), &summary)?;
    if let Some(csv) = byzantine_sends_csv(&outcome.result) {
        write_file(&global.output_dir.join("byzantine_sends.csv"), &csv)?;
    }
    match global.format {
        OutputFormat::Human => print!("{summary}"),
        OutputFormat::Csv => {
            let result = &outcome.result;
            println!("converged,{}", result.converged);
            println!(
                "converged_at,{}",
                result.converged_at.map(|t| t.to_string()).unwrap_or_default()
            );
            println!(
                "consensus_value,{}",
                result.consensus_value.map(format_real).unwrap_or_default()
            );
            println!(
                "final_spread,{}",
                format_real(result.spread_series.last().copied().unwrap_or(0.0))
            );
            println!("safe,{}", outcome.safe);
        }
    }
    println!("wrote {}", global.output_dir.join("trajectories.csv").display());

    if expect_consensus && !(outcome.result.converged && outcome.safe) {
        return Err(CliError::invalid(format!(
            "expected consensus within the safety interval; observed converged = {}, safe = {}",
            outcome.result.converged, outcome.safe
        )));
    }
    Ok(())
}

struct ScenarioReport {
    name: &'static str,
    exact_max_r: usize,
    bound: usize,
    rs_bound: usize,
    f_tolerance: usize,
    outcome: SimOutcome,
}

fn reproduce_scenario(
    name: &'static str,
    k: usize,
    adversaries: Vec<NodeId>,
    f: usize,
    seed: u64,
    global: &GlobalOpts,
) -> Result<ScenarioReport, CliError> {
    let g = make_k_circulant(15, k).expect("reference parameters are legal");
    let report: RobustnessReport =
        max_r_robustness_parallel(&g, Strategy::PartitionsOnly, global.threads)
            .map_err(|e| CliError::internal(e.to_string()))?;
    let bound = theorem1_lower_bound(15, k).expect("legal");
    let rs_bound = corollary1_rs_bound(k).expect("legal");
    let f_tolerance = report.max_r.saturating_sub(1) / 2;

    let cfg = ExperimentConfig {
        graph: GraphSource::KCirculant { n: 15, k },
        adversaries,
        model: kcirc::sim::AdversaryModel::Malicious,
        scope: kcirc::sim::AdversaryScope::FLocal,
        f,
        f_filter: f,
        signal: kcirc::sim::AdversarySignal::Sinusoid {
            center: 0.0,
            amplitude: 50.0,
            period: 20.0,
        },
        alpha: None,
        init: InitSpec::Uniform { lo: -50.0, hi: 50.0 },
        horizon: 500,
        tol: 1e-6,
        seed,
    };
    let outcome = run_simulation(&cfg)?;
    write_file(
        &global.output_dir.join(format!("{name}_trajectories.csv")),
        &trajectories_csv(&outcome.result),
    )?;
    write_file(&global.output_dir.join(format!("{name}_config.txt")), &cfg.to_text())?;
    Ok(ScenarioReport { name, exact_max_r: report.max_r, bound, rs_bound, f_tolerance, outcome })
}

pub fn cmd_reproduce_paper(global: &GlobalOpts) -> Result<(), CliError> {
    std::fs::create_dir_all(&global.output_dir)?;
    let mut summary = String::new();
    let mut failures: Vec<String> = Vec::new();

    let _ = writeln!(summary, "{LABEL_NOTE}");
    let _ = writeln!(summary, "base seed: {}", global.seed);

    let scenarios = [
        reproduce_scenario("d1", 6, vec![0, 6], 1, global.seed, global)?,
        reproduce_scenario("d2", 9, vec![0, 6, 12], 2, global.seed + 1, global)?,
    ];
    for (expected_f, scenario) in [(1usize, &scenarios[0]), (2usize, &scenarios[1])] {
        let _ = writeln!(summary, "\n[{}]", scenario.name);
        let gap = scenario.exact_max_r - scenario.bound.min(scenario.exact_max_r);
        let gap_word = if scenario.exact_max_r == scenario.bound {
            "equality".to_string()
        } else {
            format!("strict excess +{gap}")
        };
        let _ = writeln!(
            summary,
            "exact max_r: {} (closed-form bound {}, {gap_word})",
            scenario.exact_max_r, scenario.bound
        );
        let _ = writeln!(
            summary,
            "closed-form (t,t) level: t = {} ",
            scenario.rs_bound
        );
        let _ = writeln!(summary, "certified f-local tolerance: F = {}", scenario.f_tolerance);
        summary.push_str(&simulation_summary(&scenario.outcome));

        if scenario.exact_max_r < scenario.bound {
            failures.push(format!(
                "{}: expected max_r >= {}, observed {}",
                scenario.name, scenario.bound, scenario.exact_max_r
            ));
        }
        if scenario.f_tolerance != expected_f {
            failures.push(format!(
                "{}: expected certified F = {expected_f}, observed {}",
                scenario.name, scenario.f_tolerance
            ));
        }
        if !scenario.outcome.result.converged {
            failures.push(format!("{}: expected convergence within 500 steps", scenario.name));
        } else if !scenario.outcome.safe {
            failures.push(format!(
                "{}: expected the consensus value inside the safety interval",
                scenario.name
            ));
        }
    }

    let counterexample = build_connectivity_counterexample();
    write_file(
        &global.output_dir.join("counterexample.txt"),
        &serialize_edge_list(&counterexample),
    )?;
    let kappa = underlying_vertex_connectivity(&counterexample)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let ce_report = max_r_robustness_parallel(&counterexample, Strategy::PartitionsOnly, global.threads)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let _ = writeln!(summary, "\n[counterexample]");
    let _ = writeln!(summary, "underlying vertex connectivity: {kappa}");
    let _ = writeln!(summary, "exact max_r: {}", ce_report.max_r);
    if kappa != 4 {
        failures.push(format!("counterexample: expected connectivity 4, observed {kappa}"));
    }
    if ce_report.max_r != 1 {
        failures.push(format!("counterexample: expected max_r 1, observed {}", ce_report.max_r));
    }

    let verdict = if failures.is_empty() { "all expectations hold" } else { "EXPECTATION FAILURES" };
    let _ = writeln!(summary, "\nverdict: {verdict}");
    for f in &failures {
        let _ = writeln!(summary, "  {f}");
    }
    write_file(&global.output_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    println!("wrote {}", global.output_dir.join("summary.txt").display());

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::invalid(failures.join("; ")))
    }
}
