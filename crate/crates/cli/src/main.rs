use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tcsp::bench::{censored_entries, read_csv, rerun_doubled, run_bench, write_csv};
use tcsp::clock::ThreadCpuClock;
use tcsp::config::{parse_config_id, parse_consistency, parse_strategy};
use tcsp::report::{curve_points_csv, render_summary, solve_result_json, summarize};
use tcsp::stats::{build_pairs, pairwise_ranking, wilcoxon_censored, DEFAULT_CLOCK_FLOOR_MS};
use tcsp_core::{
    closure_oracle, generate_random, parse_instance, serialize_instance, solve, OracleProperty,
    SolveConfig, SolveStatus,
};

#[derive(Parser)]
#[command(name = "tcsp", about = "Table-constraint CSP solver and benchmark harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Generate a random instance to stdout (or a file).
    Gen(GenArgs),
    /// Run the brute-force closure oracle on an instance.
    Verify(VerifyArgs),
    /// Run a benchmark campaign over a directory of instances.
    Bench(BenchArgs),
    /// Execute doubled-limit reruns for censored results.
    Rerun(RerunArgs),
    /// Censored Wilcoxon signed-rank test for one configuration pair.
    Analyze(AnalyzeArgs),
    /// Rank all configurations in a results file.
    Rank(RankArgs),
    /// Completion / Sum CPU / Average NV summary of a results file.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value = "gac")]
    consistency: String,
    #[arg(long, default_value = "old")]
    strategy: String,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    vars: u32,
    #[arg(long)]
    dom: u32,
    #[arg(long)]
    arity: u32,
    #[arg(long)]
    cons: u32,
    #[arg(long)]
    tightness: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    property: String,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Configuration id, e.g. poac/alls; repeatable.
    #[arg(long = "config", required = true)]
    configs: Vec<String>,
    #[arg(long)]
    timeout_ms: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct RerunArgs {
    results: PathBuf,
    /// Re-run censored entries at twice their original limit.
    #[arg(long)]
    double: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    results: PathBuf,
    /// Two configuration ids, e.g. poac/alls,poac/old.
    #[arg(long)]
    pair: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct RankArgs {
    results: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SummarizeArgs {
    results: PathBuf,
    /// Also write cumulative (cpu, solved) curve points to this CSV file.
    #[arg(long)]
    curves: Option<PathBuf>,
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let consistency = parse_consistency(&args.consistency)?;
    let strategy = parse_strategy(&args.strategy)?;
    if !strategy.legal_with(consistency) {
        bail!(
            "strategy `{}` cannot be paired with consistency `{}`",
            args.strategy,
            args.consistency
        );
    }
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let csp = parse_instance(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.file.display()))?;

    let mut config = SolveConfig::new(consistency, strategy);
    if let Some(ms) = args.timeout_ms {
        config = config.with_time_limit_ms(ms);
    }
    let mut clock = ThreadCpuClock::start();
    let result = solve(&csp, &config, &mut clock)?;

    if args.json {
        println!("{}", solve_result_json(&csp, &result));
        return Ok(());
    }
    println!("status: {}", result.status);
    println!("nodes: {}", result.nodes);
    println!("cpu_ms: {}", result.cpu_ms);
    println!(
        "wipeouts: gac={} poac={} rnic={}",
        result.wipeouts.gac, result.wipeouts.poac, result.wipeouts.rnic
    );
    if result.status == SolveStatus::Sat {
        let a = result.solution.as_ref().unwrap();
        let rendered: Vec<String> = a
            .iter()
            .map(|(v, val)| format!("{}={}", csp.variable(v).name, val))
            .collect();
        println!("solution: {}", rendered.join(" "));
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let csp = generate_random(args.vars, args.dom, args.arity, args.cons, args.tightness, args.seed)?;
    let text = serialize_instance(&csp);
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let property = OracleProperty::parse(&args.property)
        .ok_or_else(|| anyhow::anyhow!("unknown property `{}` (expected gac, sac, poac, or rnic)", args.property))?;
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let csp = parse_instance(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.file.display()))?;
    let closure = closure_oracle(&csp, property)?;

    println!("property: {}", args.property);
    println!(
        "consistent: {}",
        if closure.consistent() { "yes" } else { "no (wipeout)" }
    );
    for (i, var) in csp.variables().iter().enumerate() {
        let values: Vec<String> = closure.domains[i].iter().map(|v| v.to_string()).collect();
        println!("var {} : {}", var.name, values.join(" "));
    }
    if let Some(tables) = &closure.tables {
        for (i, con) in csp.constraints().iter().enumerate() {
            let rendered: Vec<String> = tables[i]
                .iter()
                .map(|t| {
                    let cells: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    format!("({})", cells.join(" "))
                })
                .collect();
            println!("con {} : {}", con.name, rendered.join(" "));
        }
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut configs = Vec::new();
    for spec in &args.configs {
        configs.push(parse_config_id(spec)?);
    }
    let table = run_bench(&args.dir, &configs, args.timeout_ms, args.workers)?;
    write_csv(&table, &args.out)?;
    let completed = table.rows.iter().filter(|r| r.status.completed()).count();
    println!(
        "{} rows written to {} ({} completed)",
        table.rows.len(),
        args.out.display(),
        completed
    );
    Ok(())
}

fn cmd_rerun(args: &RerunArgs) -> Result<()> {
    if !args.double {
        bail!("rerun requires --double (doubled-limit reruns are the only supported mode)");
    }
    let mut table = read_csv(&args.results)?;
    let pending = censored_entries(&table).len();
    let executed = rerun_doubled(&mut table)?;
    write_csv(&table, &args.results)?;
    println!("{executed} doubled run(s) executed ({pending} were pending)");
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let Some((a, b)) = args.pair.split_once(',') else {
        bail!("--pair takes two configuration ids, e.g. poac/alls,poac/old");
    };
    let table = read_csv(&args.results)?;
    let pairs = build_pairs(&table, a, b);
    if pairs.is_empty() {
        bail!("no common instances for `{a}` and `{b}` in {}", args.results.display());
    }
    let report = wilcoxon_censored(&pairs, args.alpha, DEFAULT_CLOCK_FLOOR_MS);
    println!("pair: {a} vs {b} (alpha={})", args.alpha);
    print!("{report}");
    if !report.needs_rerun.is_empty() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let table = read_csv(&args.results)?;
    let configs = table.config_ids();
    let outcome = pairwise_ranking(&table, &configs, args.alpha, DEFAULT_CLOCK_FLOOR_MS)?;
    print!("{outcome}");
    Ok(())
}

fn cmd_summarize(args: &SummarizeArgs) -> Result<()> {
    let table = read_csv(&args.results)?;
    let summary = summarize(&table);
    print!("{}", render_summary(&summary));
    if let Some(path) = &args.curves {
        fs::write(path, curve_points_csv(&table))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("curve points written to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly when stdout is closed mid-pipe (e.g. `tcsp verify | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args).map(|_| ExitCode::SUCCESS),
        Command::Gen(args) => cmd_gen(args).map(|_| ExitCode::SUCCESS),
        Command::Verify(args) => cmd_verify(args).map(|_| ExitCode::SUCCESS),
        Command::Bench(args) => cmd_bench(args).map(|_| ExitCode::SUCCESS),
        Command::Rerun(args) => cmd_rerun(args).map(|_| ExitCode::SUCCESS),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Rank(args) => cmd_rank(args).map(|_| ExitCode::SUCCESS),
        Command::Summarize(args) => cmd_summarize(args).map(|_| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
