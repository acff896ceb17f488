//! Command line front end: simulate reaction networks, grade temporal
//! properties on traces and check robustness against uncertain initial
//! concentrations.
//!
//! Exit codes: 0 for a completed analysis (whatever its verdict), 1 for
//! usage and input errors, 2 when the numerics give up (integration
//! failure, no converging sample, steady state out of reach).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crnrobust::model::{Interval, IntervalMarking, ModelError, ReactionNetwork};
use crnrobust::mono::{
    build_r_graph, classify_chain, classify_monotonicity, consistent_labeling, r_graph_dot,
    ChainStep, MonotonicityKind, MonotonicityVerdict, Sign,
};
use crnrobust::odesim::{find_steady_state, simulate, SimOptions, SteadyStateReport, Trace};
use crnrobust::qfltl::{
    abstract_formula, parse_formula, satisfaction_domain, Formula, QfltlFormula,
};
use crnrobust::robust::{
    check_alpha_robustness, estimate_robustness, AlphaQuery, AlphaReport, AlphaStatus,
    ProbeStrategy, RobustnessError, RobustnessQuery,
};

#[derive(Parser)]
#[command(
    name = "crnrobust",
    version,
    about = "Reaction network simulation and robustness analysis",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Integrator relative tolerance
    #[arg(long, global = true, default_value_t = 1e-8)]
    rel_tol: f64,

    /// Integrator absolute tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    abs_tol: f64,

    /// Derivative max-norm below which the system counts as steady
    #[arg(long, global = true, default_value_t = 1e-6)]
    ss_tol: f64,

    /// Seed for every randomized step
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the network and print the trace as CSV
    Simulate(SimulateArgs),
    /// Evaluate a temporal formula on a trace and grade it
    Check(CheckArgs),
    /// Estimate expected satisfaction over the interval marking
    Robustness(RobustnessArgs),
    /// Structural monotonicity of steady outputs in initial concentrations
    Monotonicity(MonotonicityArgs),
    /// Check that steady outputs fit a window of width alpha over the marking
    AlphaCheck(AlphaArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Simulation horizon
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,

    /// Number of evenly spaced output samples
    #[arg(long, default_value_t = 1001)]
    points: usize,

    /// Steady-state window length; defaults to 5% of the horizon
    #[arg(long)]
    ss_window: Option<f64>,

    /// How far past the horizon the steady-state search may extend;
    /// defaults to ten horizons
    #[arg(long)]
    t_max_extend: Option<f64>,
}

impl SimArgs {
    fn options(&self, cli: &Cli) -> SimOptions {
        let mut opts = SimOptions::for_horizon(self.t_end);
        opts.output_points = self.points;
        opts.rel_tol = cli.rel_tol;
        opts.abs_tol = cli.abs_tol;
        opts.ss_tol = cli.ss_tol;
        if let Some(w) = self.ss_window {
            opts.ss_window = w;
        }
        if let Some(t) = self.t_max_extend {
            opts.t_max_extend = t;
        }
        opts
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Model file (JSON)
    model: PathBuf,

    #[command(flatten)]
    sim: SimArgs,

    /// Keep integrating past the horizon until a steady state holds
    #[arg(long)]
    until_steady: bool,

    /// Write the CSV trace here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,

    /// Initial concentration override (repeatable)
    #[arg(long = "set", value_name = "SPECIES=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Model to simulate; omit when checking an existing trace
    model: Option<PathBuf>,

    /// Temporal formula, e.g. "F([B] > 2 & F([B] < 10))"
    #[arg(long)]
    formula: String,

    /// Existing trace CSV to check instead of simulating
    #[arg(long, conflicts_with = "model")]
    trace: Option<PathBuf>,

    #[command(flatten)]
    sim: SimArgs,

    /// Simulate until steady state before checking
    #[arg(long)]
    until_steady: bool,
}

#[derive(Args)]
struct RobustnessArgs {
    /// Model file (JSON)
    model: PathBuf,

    /// Temporal formula to grade on every sampled trace
    #[arg(long)]
    formula: String,

    /// Monte-Carlo sample count
    #[arg(long, default_value_t = 100)]
    samples: usize,

    /// Interval override `Species=lo:hi` or pin `Species=v` (repeatable)
    #[arg(long = "interval", value_name = "SPECIES=LO:HI")]
    intervals: Vec<String>,

    #[command(flatten)]
    sim: SimArgs,

    /// Write per-sample initial states and degrees as CSV
    #[arg(long, value_name = "FILE")]
    emit_samples: Option<PathBuf>,
}

#[derive(Args)]
struct MonotonicityArgs {
    /// Model file (JSON)
    model: PathBuf,

    /// Input species whose initial concentration varies
    #[arg(long, required_unless_present_any = ["chain", "auto"])]
    input: Option<String>,

    /// Output species observed at steady state
    #[arg(long, required_unless_present_any = ["chain", "auto"])]
    output: Option<String>,

    /// Restrict the analysis to these reactions (comma separated)
    #[arg(long, value_delimiter = ',')]
    reactions: Vec<String>,

    /// Cascade step `R1,R2:Input->Output` (repeatable, in order)
    #[arg(long, conflicts_with_all = ["input", "output", "reactions", "auto"])]
    chain: Vec<String>,

    /// Try every ordered species pair and report the conclusive ones
    #[arg(long, conflicts_with_all = ["input", "output"])]
    auto: bool,

    /// Write the R-graph in Graphviz format here
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct AlphaArgs {
    /// Model file (JSON)
    model: PathBuf,

    /// Output species observed at steady state
    #[arg(long)]
    output: String,

    /// Window width that counts as robust
    #[arg(long)]
    alpha: f64,

    /// Probe placement: `grid:N`, `mc:N` or `endpoints`
    #[arg(long, default_value = "grid:10")]
    strategy: String,

    /// Interval override `Species=lo:hi` or pin `Species=v` (repeatable)
    #[arg(long = "interval", value_name = "SPECIES=LO:HI")]
    intervals: Vec<String>,

    #[command(flatten)]
    sim: SimArgs,

    /// Write per-probe initial states and outputs as CSV
    #[arg(long, value_name = "FILE")]
    emit_samples: Option<PathBuf>,
}

enum CliError {
    /// Bad input: exit code 1.
    Usage(String),
    /// The numerics gave up: exit code 2.
    Runtime(String),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RobustnessError> for CliError {
    fn from(e: RobustnessError) -> Self {
        match e {
            RobustnessError::Sim(_) | RobustnessError::AllSamplesFailed(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive through the error path but
            // are not errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Check(args) => cmd_check(cli, args),
        Command::Robustness(args) => cmd_robustness(cli, args),
        Command::Monotonicity(args) => cmd_monotonicity(cli, args),
        Command::AlphaCheck(args) => cmd_alpha(cli, args),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<ReactionNetwork, CliError> {
    let text = read_file(path)?;
    ReactionNetwork::parse(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_property(text: &str) -> Result<Formula, CliError> {
    parse_formula(text).map_err(|e| CliError::Usage(format!("formula: {e}")))
}

/// `Species=lo:hi` widens, `Species=v` pins.
fn apply_interval_overrides(
    marking: &mut IntervalMarking,
    specs: &[String],
) -> Result<(), CliError> {
    for spec in specs {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad interval `{spec}`, want SPECIES=LO:HI")))?;
        let bad = |what: &str| CliError::Usage(format!("bad {what} in interval `{spec}`"));
        let iv = match range.split_once(':') {
            Some((lo, hi)) => {
                let lo: f64 = lo.trim().parse().map_err(|_| bad("lower bound"))?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad("upper bound"))?;
                Interval::new(lo, hi)?
            }
            None => {
                let v: f64 = range.trim().parse().map_err(|_| bad("value"))?;
                Interval::point(v)?
            }
        };
        marking.set_by_name(name.trim(), iv)?;
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<(), CliError> {
    let net = load_network(&args.model)?;
    let opts = args.sim.options(cli);
    let mut initial = net.initial_state();
    for spec in &args.set {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad override `{spec}`, want SPECIES=VALUE")))?;
        let idx = net
            .species_index(name.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown species `{}`", name.trim())))?;
        initial[idx] = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad value in override `{spec}`")))?;
    }

    let odes = net.derive_odes();
    let (trace, steady): (Trace, Option<SteadyStateReport>) = if args.until_steady {
        let (trace, report) = find_steady_state(&odes, &initial, &opts)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        (trace, Some(report))
    } else {
        let trace =
            simulate(&odes, &initial, &opts).map_err(|e| CliError::Runtime(e.to_string()))?;
        (trace, None)
    };

    let csv = trace.to_csv();
    // The steady report shares stdout only when the trace goes to a file.
    match &args.output {
        Some(path) => {
            write_file(path, &csv)?;
            if let Some(report) = &steady {
                print_steady(cli, report);
            }
        }
        None => {
            print!("{csv}");
            if let Some(report) = &steady {
                eprintln!(
                    "{}",
                    if cli.json {
                        serde_json::to_string(report).expect("reports serialize")
                    } else {
                        steady_text(report)
                    }
                );
            }
        }
    }
    Ok(())
}

fn steady_text(report: &SteadyStateReport) -> String {
    match report.t_reached {
        Some(t) => format!("steady state reached at t = {t}"),
        None => "steady state not reached".to_string(),
    }
}

fn print_steady(cli: &Cli, report: &SteadyStateReport) {
    if cli.json {
        println!("{}", json_line(report));
    } else {
        println!("{}", steady_text(report));
    }
}

#[derive(Serialize)]
struct CheckReport {
    satisfied: bool,
    /// Distance from the formula's constants to the satisfaction domain;
    /// null when the domain is empty (serialized infinity).
    violation_degree: f64,
    satisfaction_degree: f64,
    reference: Vec<f64>,
    domain: String,
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Result<(), CliError> {
    let formula = parse_property(&args.formula)?;
    let trace = match (&args.model, &args.trace) {
        (Some(model), None) => {
            let net = load_network(model)?;
            let opts = args.sim.options(cli);
            let odes = net.derive_odes();
            if args.until_steady {
                find_steady_state(&odes, &net.initial_state(), &opts)
                    .map_err(|e| CliError::Runtime(e.to_string()))?
                    .0
            } else {
                simulate(&odes, &net.initial_state(), &opts)
                    .map_err(|e| CliError::Runtime(e.to_string()))?
            }
        }
        (None, Some(path)) => {
            let text = read_file(path)?;
            Trace::from_csv(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        _ => {
            return Err(CliError::Usage(
                "give either a model file or --trace, not both or neither".into(),
            ))
        }
    };

    let satisfied = crnrobust::qfltl::eval_ltl(&trace, &formula)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let qf: QfltlFormula =
        abstract_formula(&formula).map_err(|e| CliError::Usage(e.to_string()))?;
    let domain = satisfaction_domain(&trace, &qf).map_err(|e| CliError::Usage(e.to_string()))?;
    let vd = domain.distance(qf.reference());
    let report = CheckReport {
        satisfied,
        violation_degree: vd,
        satisfaction_degree: 1.0 / (1.0 + vd),
        reference: qf.reference().to_vec(),
        domain: domain.to_string(),
    };

    if cli.json {
        println!("{}", json_line(&report));
    } else {
        println!("satisfied: {}", report.satisfied);
        println!("violation degree: {}", report.violation_degree);
        println!("satisfaction degree: {}", report.satisfaction_degree);
        if !report.reference.is_empty() {
            let refs: Vec<String> = report.reference.iter().map(f64::to_string).collect();
            println!("reference: ({})", refs.join(", "));
        }
        println!("domain: {}", report.domain);
    }
    Ok(())
}

fn cmd_robustness(cli: &Cli, args: &RobustnessArgs) -> Result<(), CliError> {
    let net = load_network(&args.model)?;
    let formula = parse_property(&args.formula)?;
    let mut marking = net.interval_marking();
    apply_interval_overrides(&mut marking, &args.intervals)?;
    let names: Vec<String> = marking.names().to_vec();

    let mut report = estimate_robustness(&RobustnessQuery {
        network: &net,
        marking,
        formula,
        samples: args.samples,
        seed: cli.seed,
        sim: args.sim.options(cli),
        record_samples: args.emit_samples.is_some(),
    })?;

    if let Some(path) = &args.emit_samples {
        let samples = report.samples.take().expect("recorded when requested");
        let mut csv = format!("sample_index,{},sd\n", names.join(","));
        for (i, s) in samples.iter().enumerate() {
            let values: Vec<String> = s.initial.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(csv, "{i},{},{:.16e}", values.join(","), s.satisfaction_degree);
        }
        write_file(path, &csv)?;
    }

    if cli.json {
        println!("{}", json_line(&report));
    } else {
        println!("robustness estimate: {} (std error {})", report.estimate, report.std_error);
        println!("samples: {} ok, {} failed", report.samples_used, report.samples_failed);
    }
    Ok(())
}

fn parse_strategy(text: &str, seed: u64) -> Result<ProbeStrategy, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "bad strategy `{text}`, want `grid:N`, `mc:N` or `endpoints`"
        ))
    };
    if text == "endpoints" {
        return Ok(ProbeStrategy::MonotoneEndpoints);
    }
    let (kind, n) = text.split_once(':').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    match kind {
        "grid" => Ok(ProbeStrategy::Grid(n)),
        "mc" => Ok(ProbeStrategy::MonteCarlo { samples: n, seed }),
        _ => Err(bad()),
    }
}

fn cmd_alpha(cli: &Cli, args: &AlphaArgs) -> Result<(), CliError> {
    let net = load_network(&args.model)?;
    let mut marking = net.interval_marking();
    apply_interval_overrides(&mut marking, &args.intervals)?;
    let names: Vec<String> = marking.names().to_vec();

    let report = check_alpha_robustness(&AlphaQuery {
        network: &net,
        marking,
        output: args.output.clone(),
        alpha: args.alpha,
        strategy: parse_strategy(&args.strategy, cli.seed)?,
        sim: args.sim.options(cli),
    })?;

    if let Some(path) = &args.emit_samples {
        let mut csv = format!("probe_index,{},steady_output,t_reached\n", names.join(","));
        for (i, p) in report.probes.iter().enumerate() {
            let values: Vec<String> = p.initial.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(
                csv,
                "{i},{},{:.16e},{}",
                values.join(","),
                p.output,
                p.t_reached
            );
        }
        write_file(path, &csv)?;
    }

    if cli.json {
        println!("{}", json_line(&report));
    } else {
        print_alpha_text(&report);
    }
    if report.status != AlphaStatus::Ok {
        return Err(CliError::Runtime(format!(
            "{} probe(s) never reached a steady state",
            report.failures.len()
        )));
    }
    Ok(())
}

fn print_alpha_text(report: &AlphaReport) {
    println!("strategy: {}", report.strategy_used);
    println!(
        "status: {}",
        match report.status {
            AlphaStatus::Ok => "ok",
            AlphaStatus::SteadyStateFailure => "steady state failure",
        }
    );
    match (report.observed_min, report.observed_max, report.spread, report.center_k) {
        (Some(lo), Some(hi), Some(spread), Some(center)) => {
            println!("output band: [{lo}, {hi}], center {center}, spread {spread}");
        }
        _ => println!("output band: unavailable"),
    }
    println!(
        "robust: {} (alpha {}{})",
        report.robust,
        report.alpha,
        if report.exact { ", exact bounds" } else { "" }
    );
    println!("probes: {} ok, {} failed", report.probes.len(), report.failures.len());
}

fn parse_chain_step(spec: &str) -> Result<ChainStep, CliError> {
    let bad = || CliError::Usage(format!("bad chain step `{spec}`, want `R1,R2:Input->Output`"));
    let (reactions, io) = spec.split_once(':').ok_or_else(bad)?;
    let (input, output) = io.split_once("->").ok_or_else(bad)?;
    let reactions: Vec<String> =
        reactions.split(',').map(|r| r.trim().to_string()).filter(|r| !r.is_empty()).collect();
    if reactions.is_empty() || input.trim().is_empty() || output.trim().is_empty() {
        return Err(bad());
    }
    Ok(ChainStep {
        reactions,
        input: input.trim().to_string(),
        output: output.trim().to_string(),
    })
}

fn kind_text(kind: &MonotonicityKind) -> String {
    match kind {
        MonotonicityKind::PositivelyMonotonic => "positively monotonic".into(),
        MonotonicityKind::NegativelyMonotonic => "negatively monotonic".into(),
        MonotonicityKind::Inconclusive(reason) => format!("inconclusive ({reason})"),
    }
}

fn print_verdict_text(v: &MonotonicityVerdict) {
    println!("{} -> {}: {}", v.input, v.output, kind_text(&v.kind));
    if let Some(witness) = &v.witness {
        let signs: Vec<String> = v
            .reactions
            .iter()
            .zip(witness)
            .map(|(r, s)| format!("{r} [{}]", if *s == Sign::Plus { "+" } else { "-" }))
            .collect();
        println!("labeling: {}", signs.join(", "));
    }
    if let (Some(ri), Some(ro), Some(pi), Some(po)) =
        (&v.input_reaction, &v.output_reaction, v.input_product, v.output_product)
    {
        println!("input via {ri} (product {pi:+}), output via {ro} (product {po:+})");
    }
}

fn cmd_monotonicity(cli: &Cli, args: &MonotonicityArgs) -> Result<(), CliError> {
    let net = load_network(&args.model)?;
    let analyzed = if args.reactions.is_empty() {
        net.clone()
    } else {
        let names: Vec<&str> = args.reactions.iter().map(String::as_str).collect();
        net.sub_network(&names)?
    };

    if let Some(path) = &args.dot {
        let graph = build_r_graph(&analyzed);
        let labeling = consistent_labeling(&graph);
        write_file(path, &r_graph_dot(&analyzed, &graph, labeling.as_deref()))?;
    }

    if !args.chain.is_empty() {
        let steps: Vec<ChainStep> =
            args.chain.iter().map(|s| parse_chain_step(s)).collect::<Result<_, _>>()?;
        let report =
            classify_chain(&net, &steps).map_err(|e| CliError::Usage(e.to_string()))?;
        if cli.json {
            println!("{}", json_line(&report));
        } else {
            for (step, verdict) in steps.iter().zip(&report.steps) {
                println!("step {}: {}", step.reactions.join(","), kind_text(&verdict.kind));
            }
            println!("chain {} -> {}: {}", steps[0].input, steps[steps.len() - 1].output,
                kind_text(&report.kind));
        }
        return Ok(());
    }

    if args.auto {
        let names = analyzed.species_names();
        let mut conclusive: Vec<MonotonicityVerdict> = Vec::new();
        for input in &names {
            for output in &names {
                if input == output {
                    continue;
                }
                let verdict = classify_monotonicity(&analyzed, input, output)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                if verdict.kind.is_monotonic() {
                    conclusive.push(verdict);
                }
            }
        }
        if cli.json {
            println!("{}", json_line(&conclusive));
        } else if conclusive.is_empty() {
            println!("no conclusive species pair");
        } else {
            for v in &conclusive {
                println!("{} -> {}: {}", v.input, v.output, kind_text(&v.kind));
            }
        }
        return Ok(());
    }

    let input = args.input.as_deref().expect("required by clap");
    let output = args.output.as_deref().expect("required by clap");
    let verdict = classify_monotonicity(&analyzed, input, output)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if cli.json {
        println!("{}", json_line(&verdict));
    } else {
        print_verdict_text(&verdict);
    }
    Ok(())
}
