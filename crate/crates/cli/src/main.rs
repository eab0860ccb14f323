//! `mpfee`: evaluate fee mechanisms on bid files, run Monte Carlo
//! experiments and the verification suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 parse failure, 3 an
//! invariant was violated.

mod bidfile;
mod config;
mod recipes;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mpfee::montecarlo::export::{to_json, write_csv};
use mpfee::montecarlo::stream::{trial_rng, Purpose};
use mpfee::rsop::random_partition;
use mpfee::strategic::deviation_report;
use mpfee::verify::{run_check, Check, VerifyConfig};
use mpfee::{
    m_epsilon_wrap, monopolistic_price, rsop, BidVector, Distribution, Exec, ExperimentResult,
    ExperimentSpec, FeeSchedule, Side,
};

use crate::bidfile::parse_bids;
use crate::config::{parse_config, parse_metrics, parse_n_list};

#[derive(Parser)]
#[command(name = "mpfee", version, about = "Transaction fee mechanism toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the monopolistic price mechanism on a bid file.
    Mp(BidsArg),
    /// Run the random sampling optimal price auction on a bid file.
    Rsop(RsopArgs),
    /// Report a user's cheapest strategic deviation.
    Deviation(DeviationArgs),
    /// Run Monte Carlo experiments from a config file or bundled recipe.
    Experiment(ExperimentArgs),
    /// Check the fast algorithms against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BidsArg {
    /// Whitespace-separated bids, `#` starts a comment; `-` reads stdin.
    bids: PathBuf,
}

#[derive(Args)]
struct RsopArgs {
    #[command(flatten)]
    bids: BidsArg,
    /// Side labels, one `A` or `B` per bid, e.g. "A B B".
    #[arg(long, conflicts_with = "seed")]
    partition: Option<String>,
    /// Seed for a random partition.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also print the fees of the `M_ε` wrapper at this `ε` in [0, 1).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct DeviationArgs {
    #[command(flatten)]
    bids: BidsArg,
    /// One-based user index.
    #[arg(long, default_value_t = 1)]
    user: usize,
    /// Also search split bids with up to this many copies.
    #[arg(long)]
    max_splits: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file with one or more `[experiment]` blocks.
    #[arg(required_unless_present_any = ["recipe", "list_recipes"], conflicts_with = "recipe")]
    config: Option<PathBuf>,
    /// Bundled recipe name instead of a config file.
    #[arg(long)]
    recipe: Option<String>,
    /// List bundled recipes and exit.
    #[arg(long)]
    list_recipes: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated population sizes.
    #[arg(long)]
    n: Option<String>,
    /// Distribution, e.g. `uniform:lo=0,hi=1` or `inverse_trunc:D=10`.
    #[arg(long)]
    dist: Option<String>,
    /// Comma-separated metric names.
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    max_splits: Option<usize>,
    /// Enable the optimal-strategic-bid diagnostic at this level.
    #[arg(long)]
    eta: Option<f64>,
    /// Output file; results go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, env = "MPFEE_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Write wall-clock runtimes instead of `NA`; output is then no longer
    /// reproducible byte for byte.
    #[arg(long)]
    record_runtime: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest vector length in the exhaustive dominance enumeration.
    #[arg(long)]
    n_max: Option<usize>,
    /// Grid points per unit interval for the exhaustive enumeration.
    #[arg(long)]
    resolution: Option<usize>,
    /// Random instances per check.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the full acceptance-suite instance counts.
    #[arg(long)]
    full: bool,
    /// Run only the named checks.
    #[arg(long = "check")]
    checks: Vec<String>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Parse(String),
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Parse(m) | CliError::Invariant(m) => m,
        }
    }
}

impl From<mpfee::Error> for CliError {
    fn from(e: mpfee::Error) -> Self {
        match e {
            mpfee::Error::Distribution { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mp(args) => cmd_mp(&args),
        Command::Rsop(args) => cmd_rsop(&args),
        Command::Deviation(args) => cmd_deviation(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Validation(format!("reading stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))
    }
}

fn load_bids(arg: &BidsArg) -> CliResult<BidVector> {
    let text = read_input(&arg.bids)?;
    let bids = parse_bids(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(BidVector::new(bids)?)
}

fn fee_table(v: &BidVector, schedule: &FeeSchedule) -> String {
    let mut out = String::from("user bid fee\n");
    for (i, bid) in v.as_slice().iter().enumerate() {
        let fee = schedule
            .fee_of(i)
            .map_or_else(|| "-".to_string(), |f| f.to_string());
        let _ = writeln!(out, "{} {bid} {fee}", i + 1);
    }
    out
}

fn one_based(users: &[usize]) -> String {
    users
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_mp(args: &BidsArg) -> CliResult<()> {
    let v = load_bids(args)?;
    let out = monopolistic_price(&v);
    println!(
        "R={} k*={} price={} winners={}",
        out.revenue,
        out.k_star,
        out.price,
        out.winners.len()
    );
    println!("winning users: {}", one_based(&out.winners));
    print!("{}", fee_table(&v, &out.fee_schedule()));
    Ok(())
}

fn parse_partition(text: &str, n: usize) -> CliResult<Vec<Side>> {
    let sides = text
        .split_whitespace()
        .enumerate()
        .map(|(i, label)| match label {
            "A" | "a" => Ok(Side::A),
            "B" | "b" => Ok(Side::B),
            _ => Err(CliError::Parse(format!(
                "partition token `{label}` at position {} is not A or B",
                i + 1
            ))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    if sides.len() != n {
        return Err(CliError::Validation(format!(
            "partition has {} labels for {n} bids",
            sides.len()
        )));
    }
    Ok(sides)
}

fn cmd_rsop(args: &RsopArgs) -> CliResult<()> {
    let v = load_bids(&args.bids)?;
    let partition = match &args.partition {
        Some(text) => parse_partition(text, v.len())?,
        None => {
            let mut rng = trial_rng(args.seed, Purpose::Partition, v.len(), 0);
            random_partition(v.len(), &mut rng)
        }
    };
    let out = rsop(&v, &partition)?;
    let labels: String = partition
        .iter()
        .map(|s| s.label().to_string())
        .collect::<Vec<_>>()
        .join(" ");
    println!("partition: {labels}");
    println!("price_A={} price_B={}", out.price_a, out.price_b);
    println!(
        "winners_A: {}  winners_B: {}",
        one_based(&out.winners_a),
        one_based(&out.winners_b)
    );
    let schedule = out.fee_schedule();
    println!("revenue={}", out.revenue);
    print!("{}", fee_table(&v, &schedule));

    if let Some(eps) = args.epsilon {
        let wrapped = m_epsilon_wrap(&schedule, v.as_slice(), eps)?;
        println!("M_eps (eps={eps}) revenue={}", wrapped.total());
        print!("{}", fee_table(&v, &wrapped));
    }

    let mp = monopolistic_price(&v).revenue;
    if out.revenue <= mp {
        println!("dominance RSOP={} <= R={mp}: ok", out.revenue);
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "dominance violated: RSOP={} > R={mp}",
            out.revenue
        )))
    }
}

fn cmd_deviation(args: &DeviationArgs) -> CliResult<()> {
    let v = load_bids(&args.bids)?;
    if args.user == 0 || args.user > v.len() {
        return Err(CliError::Validation(format!(
            "user {} is out of range 1..={}",
            args.user,
            v.len()
        )));
    }
    let report = deviation_report(&v, args.user - 1, args.max_splits)?;
    println!(
        "user={} bid={} p_honest={} p_strategic={} delta={}",
        args.user,
        v.as_slice()[args.user - 1],
        report.p_honest,
        report.p_strategic,
        report.delta_single
    );
    if let (Some(cost), Some(delta), Some(split)) =
        (report.p_multi, report.delta_multi, &report.multi_split)
    {
        println!(
            "p_multi={cost} delta_multi={delta} copies={} bid_per_copy={}",
            split.len(),
            split[0]
        );
    }
    Ok(())
}

fn load_specs(args: &ExperimentArgs) -> CliResult<Vec<ExperimentSpec>> {
    let text = match (&args.recipe, &args.config) {
        (Some(name), _) => recipes::recipe(name)
            .ok_or_else(|| {
                let names: Vec<_> = recipes::RECIPES.iter().map(|r| r.0).collect();
                CliError::Validation(format!(
                    "unknown recipe `{name}`; available: {}",
                    names.join(", ")
                ))
            })?
            .to_string(),
        (None, Some(path)) => read_input(path)?,
        (None, None) => unreachable!("clap requires a config or a recipe"),
    };
    let mut specs = parse_config(&text).map_err(|e| CliError::Parse(e.to_string()))?;

    let parse_err = |flag: &str, e: String| CliError::Parse(format!("--{flag}: {e}"));
    let n_values = args
        .n
        .as_deref()
        .map(parse_n_list)
        .transpose()
        .map_err(|e| parse_err("n", e))?;
    let metrics = args
        .metrics
        .as_deref()
        .map(parse_metrics)
        .transpose()
        .map_err(|e| parse_err("metrics", e))?;
    let distribution = args
        .dist
        .as_deref()
        .map(str::parse::<Distribution>)
        .transpose()
        .map_err(|e| parse_err("dist", e.to_string()))?;

    for spec in &mut specs {
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(trials) = args.trials {
            spec.trials = trials;
        }
        if let Some(n) = &n_values {
            spec.n_values = n.clone();
        }
        if let Some(m) = &metrics {
            spec.metrics = m.clone();
        }
        if let Some(d) = &distribution {
            spec.distribution = d.clone();
        }
        if let Some(s) = args.max_splits {
            spec.max_splits = s;
        }
        if let Some(eta) = args.eta {
            spec.eta_diagnostic = Some(eta);
        }
    }
    specs
        .into_iter()
        .map(|s| s.validated().map_err(CliError::from))
        .collect()
}

fn summary_table(results: &[ExperimentResult]) -> String {
    let mut out = format!(
        "{:<28} {:>7} {:<14} {:>12} {:>11} {:>6}\n",
        "distribution", "n", "metric", "estimate", "std_error", "diag"
    );
    for result in results {
        for row in &result.rows {
            let se = row
                .std_error
                .map_or_else(|| "NA".to_string(), |s| format!("{s:.3e}"));
            let _ = writeln!(
                out,
                "{:<28} {:>7} {:<14} {:>12.6} {:>11} {:>6}",
                result.distribution,
                row.n,
                row.metric.name(),
                row.estimate,
                se,
                row.diag_violations
            );
        }
    }
    out
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    if args.list_recipes {
        for (name, _) in recipes::RECIPES {
            println!("{name}");
        }
        return Ok(());
    }
    let specs = load_specs(args)?;
    let workers = args.workers.map_or_else(
        || std::thread::available_parallelism().map_or(1, |n| n.get()),
        |w| w as usize,
    );
    let exec = Exec::parallel(workers);
    let results = specs
        .iter()
        .map(|spec| mpfee::montecarlo::run(spec, exec))
        .collect::<Result<Vec<_>, _>>()?;

    let mut data = Vec::new();
    match args.format {
        Format::Csv => write_csv(&results, &mut data, args.record_runtime)?,
        Format::Json => {
            let value = to_json(&results, args.record_runtime);
            data = serde_json::to_vec_pretty(&value)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            data.push(b'\n');
        }
    }
    let table = summary_table(&results);
    match &args.out {
        Some(path) => {
            fs::write(path, &data)
                .map_err(|e| CliError::Validation(format!("writing {}: {e}", path.display())))?;
            print!("{table}");
            println!("wrote {}", path.display());
        }
        None => {
            io::stdout()
                .write_all(&data)
                .map_err(|e| CliError::Validation(format!("writing stdout: {e}")))?;
            eprint!("{table}");
        }
    }

    let violations: Vec<String> = results
        .iter()
        .filter(|r| r.diagnostics.total_violations() > 0)
        .map(|r| format!("{}: {:?}", r.distribution, r.diagnostics))
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "inline invariant violations: {}",
            violations.join("; ")
        )))
    }
}

fn parse_check(name: &str) -> CliResult<Check> {
    name.parse::<Check>().map_err(|_| {
        let names: Vec<_> = Check::ALL.iter().map(|c| c.name()).collect();
        CliError::Parse(format!(
            "unknown check `{name}`; available: {}",
            names.join(", ")
        ))
    })
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let mut config = if args.full {
        VerifyConfig::full()
    } else {
        VerifyConfig::default()
    };
    if let Some(count) = args.instances {
        config = config.with_instances(count);
    }
    if let Some(n_max) = args.n_max {
        config.n_max = n_max;
    }
    if let Some(resolution) = args.resolution {
        config.resolution = resolution;
    }
    config.seed = args.seed;
    config.inject_fault = args.inject_fault.as_deref().map(parse_check).transpose()?;
    let checks = if args.checks.is_empty() {
        Check::ALL.to_vec()
    } else {
        args.checks
            .iter()
            .map(|c| parse_check(c))
            .collect::<CliResult<Vec<_>>>()?
    };

    let mut failed = Vec::new();
    for check in checks {
        let report = run_check(check, &config)?;
        println!("{report}");
        if !report.passed() {
            failed.push(check.name());
        }
    }
    if failed.is_empty() {
        println!("verify: all checks passed");
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "failing checks: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_labels() {
        assert_eq!(
            parse_partition("A b B", 3).unwrap(),
            vec![Side::A, Side::B, Side::B]
        );
        assert_eq!(parse_partition("A C", 2).unwrap_err().code(), 2);
        assert_eq!(parse_partition("A", 2).unwrap_err().code(), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
