//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Monte Carlo runs are shared between criteria and executed once; a
//! criterion's runtime is the sum of the runs and checks it depends on.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mpfee::montecarlo::export::to_csv_string;
use mpfee::montecarlo::{run, Exec, ExperimentResult, ExperimentSpec, Metric};
use mpfee::verify::{run_check, Check, CheckReport, VerifyConfig};
use mpfee::Distribution;

const SEED: u64 = 42;
const ETA: f64 = 0.1;
const MSB_SPLITS: usize = 8;

/// Lower bound on the worst-case discount ratio under the Inverse
/// distribution, `(1 - λ'/λ)(e^{-2/λ'}/λ - 4e^{-λ/2})` at `λ = 40, λ' = 1`.
fn inverse_delta_floor() -> f64 {
    let (lambda, lambda_p): (f64, f64) = (40.0, 1.0);
    (1.0 - lambda_p / lambda) * ((-2.0 / lambda_p).exp() / lambda - 4.0 * (-lambda / 2.0).exp())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum RunId {
    Uniform,
    InverseTruncated,
    Inverse,
    UniformShifted,
}

impl RunId {
    fn spec(self) -> ExperimentSpec {
        let dist = |s: &str| s.parse::<Distribution>().unwrap();
        let mut spec = match self {
            RunId::Uniform => {
                let mut s = ExperimentSpec::new(
                    dist("uniform:lo=0,hi=1"),
                    vec![
                        Metric::DeltaMax,
                        Metric::DeltaAvg,
                        Metric::DeltaMaxMsb,
                        Metric::DeltaAvgMsb,
                    ],
                );
                s.eta_diagnostic = Some(ETA);
                s
            }
            RunId::InverseTruncated => {
                let mut s = ExperimentSpec::new(dist("inverse_trunc:D=10"), vec![Metric::DeltaMax]);
                s.eta_diagnostic = Some(ETA);
                s
            }
            RunId::Inverse => ExperimentSpec::new(
                dist("inverse"),
                vec![
                    Metric::DeltaMax,
                    Metric::DeltaAvg,
                    Metric::RevMp,
                    Metric::RevRsop,
                ],
            ),
            RunId::UniformShifted => {
                let mut s = ExperimentSpec::new(dist("uniform:lo=1,hi=2"), vec![Metric::RevRatio]);
                s.n_values = vec![10_000];
                s.trials = 1_000;
                s
            }
        };
        spec.seed = SEED;
        spec.max_splits = MSB_SPLITS;
        spec
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Default)]
struct Runs {
    results: HashMap<RunId, (ExperimentResult, Duration)>,
}

impl Runs {
    fn get(&mut self, id: RunId) -> (&ExperimentResult, Duration) {
        let entry = self.results.entry(id).or_insert_with(|| {
            let start = Instant::now();
            let result = run(&id.spec(), Exec::parallel(workers())).expect("valid spec");
            (result, start.elapsed())
        });
        (&entry.0, entry.1)
    }
}

struct Verdict {
    passed: bool,
    summary: String,
    elapsed: Duration,
}

impl Verdict {
    fn new(elapsed: Duration) -> Self {
        Verdict {
            passed: true,
            summary: String::new(),
            elapsed,
        }
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.summary.is_empty() {
            self.summary.push_str("; ");
        }
        self.summary.push_str(what.as_ref());
        if !ok {
            self.passed = false;
            self.summary.push_str(" [failed]");
        }
    }

    fn within(&mut self, budget_secs: u64) {
        let ok = self.elapsed <= Duration::from_secs(budget_secs);
        self.require(
            ok,
            format!(
                "runtime {:.1}s <= {budget_secs}s",
                self.elapsed.as_secs_f64()
            ),
        );
    }

    fn add_check(&mut self, report: &CheckReport) {
        self.elapsed += Duration::from_millis(report.elapsed_ms as u64);
        let mut text = format!(
            "{} {}/{} ok",
            report.check,
            report.cases - report.failures,
            report.cases
        );
        if let Some(first) = &report.first_failure {
            text.push_str(&format!(" (first failure: {first})"));
        }
        self.require(report.passed(), text);
    }
}

fn estimates(result: &ExperimentResult, metric: Metric) -> Vec<(usize, f64)> {
    result.series(metric)
}

fn format_series(series: &[(usize, f64)]) -> String {
    series
        .iter()
        .map(|(n, x)| format!("{n}:{x:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn strictly_decreasing(series: &[(usize, f64)]) -> bool {
    series.windows(2).all(|w| w[1].1 < w[0].1)
}

fn at(series: &[(usize, f64)], n: usize) -> f64 {
    series
        .iter()
        .find(|(m, _)| *m == n)
        .map(|p| p.1)
        .expect("n in grid")
}

/// Strictly decreasing over the grid and halved between `n = 10^2` and
/// `n = 10^4`.
fn trend(v: &mut Verdict, label: &str, result: &ExperimentResult, metric: Metric) {
    let series = estimates(result, metric);
    let ok = strictly_decreasing(&series) && at(&series, 10_000) < 0.5 * at(&series, 100);
    v.require(ok, format!("{label} {metric} [{}]", format_series(&series)));
}

fn criterion_1() -> Verdict {
    let config = VerifyConfig::full();
    let mut v = Verdict::new(Duration::ZERO);
    v.add_check(&run_check(Check::DominanceExhaustive, &config).unwrap());
    v.add_check(&run_check(Check::DominanceRandom, &config).unwrap());
    v.within(120);
    v
}

fn criterion_2() -> Verdict {
    let config = VerifyConfig::full();
    let mut v = Verdict::new(Duration::ZERO);
    for check in [
        Check::StrategicOracle,
        Check::DeltaMaxOracle,
        Check::MultiOracle,
    ] {
        v.add_check(&run_check(check, &config).unwrap());
    }
    v.within(300);
    v
}

fn criterion_3(runs: &mut Runs) -> Verdict {
    let (uniform, t1) = runs.get(RunId::Uniform);
    let uniform = uniform.clone();
    let (truncated, t2) = runs.get(RunId::InverseTruncated);
    let mut v = Verdict::new(t1 + t2);
    trend(&mut v, "uniform[0,1]", &uniform, Metric::DeltaMax);
    trend(&mut v, "inverse_trunc D=10", truncated, Metric::DeltaMax);
    v.within(600);
    v
}

fn criterion_4(runs: &mut Runs) -> Verdict {
    let (uniform, t1) = runs.get(RunId::Uniform);
    let uniform = uniform.clone();
    let (inverse, t2) = runs.get(RunId::Inverse);
    let mut v = Verdict::new(t1 + t2);
    trend(&mut v, "uniform[0,1]", &uniform, Metric::DeltaAvg);
    trend(&mut v, "inverse", inverse, Metric::DeltaAvg);
    trend(&mut v, "uniform[0,1]", &uniform, Metric::DeltaMaxMsb);
    trend(&mut v, "uniform[0,1]", &uniform, Metric::DeltaAvgMsb);
    let pairs = [
        (Metric::DeltaMaxMsb, Metric::DeltaMax),
        (Metric::DeltaAvgMsb, Metric::DeltaAvg),
    ];
    let dominated = pairs.iter().all(|&(msb, single)| {
        estimates(&uniform, msb)
            .iter()
            .zip(estimates(&uniform, single))
            .all(|(a, b)| a.1 >= b.1)
    });
    v.require(
        dominated,
        "split-bid estimate >= single-bid estimate at every n",
    );
    v.require(
        uniform.diagnostics.ordering_violations == 0,
        format!(
            "per-trial split >= single ordering violations = {}",
            uniform.diagnostics.ordering_violations
        ),
    );
    v.within(900);
    v
}

fn criterion_5(runs: &mut Runs) -> Verdict {
    let (inverse, t) = runs.get(RunId::Inverse);
    let mut v = Verdict::new(t);
    let c = inverse_delta_floor();
    v.require((c - 0.00329).abs() < 1e-5, format!("c = {c:.6}"));
    let series: Vec<_> = estimates(inverse, Metric::DeltaMax)
        .into_iter()
        .filter(|(n, _)| *n >= 100)
        .collect();
    v.require(
        series.len() == 3 && series.iter().all(|(_, x)| *x > c),
        format!("inverse delta_max > c [{}]", format_series(&series)),
    );
    v.within(300);
    v
}

fn criterion_6(runs: &mut Runs) -> Verdict {
    let (inverse, t) = runs.get(RunId::Inverse);
    let mut v = Verdict::new(t);
    let rsop = inverse.row(Metric::RevRsop, 10_000).unwrap();
    v.require(
        (0.85..=1.15).contains(&rsop.estimate),
        format!("E[RSOP]/n at n=10^4 = {:.4} in [0.85, 1.15]", rsop.estimate),
    );
    let trimmed = estimates(inverse, Metric::RevMpTrimmed);
    let growth = at(&trimmed, 10_000) / at(&trimmed, 100);
    v.require(
        growth >= 2.0,
        format!(
            "5%-trimmed R/n growth n=10^2 -> 10^4 = {growth:.3} >= 2 [{}]",
            format_series(&trimmed)
        ),
    );
    v.within(300);
    v
}

fn criterion_7(runs: &mut Runs) -> Verdict {
    let (shifted, t) = runs.get(RunId::UniformShifted);
    let mut v = Verdict::new(t);
    let row = shifted.row(Metric::RevRatio, 10_000).unwrap();
    v.require(
        row.estimate <= 1.05 && row.trials_used == 1_000,
        format!(
            "uniform[1,2] n=10^4 mean R/RSOP = {:.5} <= 1.05 over {} trials",
            row.estimate, row.trials_used
        ),
    );
    v.within(120);
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new(Duration::ZERO);
    v.add_check(&run_check(Check::EpsilonIdentity, &VerifyConfig::full()).unwrap());
    v.within(60);
    v
}

fn criterion_9(runs: &mut Runs) -> Verdict {
    let mut v = Verdict::new(Duration::ZERO);
    for id in [RunId::Uniform, RunId::InverseTruncated] {
        let (result, _) = runs.get(id);
        let d = result.diagnostics;
        v.require(
            d.osb_checked > 0 && d.osb_violations == 0,
            format!(
                "{}: {} trials with delta_max >= {ETA} checked, {} counterexamples",
                result.distribution, d.osb_checked, d.osb_violations
            ),
        );
    }
    v
}

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let mut spec = ExperimentSpec::new(
        "uniform:lo=0,hi=1".parse().unwrap(),
        vec![
            Metric::DeltaMax,
            Metric::DeltaAvg,
            Metric::DeltaMaxMsb,
            Metric::RevMp,
            Metric::RevRsop,
            Metric::RevRatio,
        ],
    );
    spec.seed = SEED;
    spec.trials = 2_000;
    spec.n_values = vec![10, 100, 1_000];
    spec.eta_diagnostic = Some(ETA);
    let render = |exec| to_csv_string(&[run(&spec, exec).unwrap()], false).unwrap();
    let reference = render(Exec::Sequential);
    let mut v = Verdict::new(Duration::ZERO);
    let mut all_same = true;
    for workers in [1, 2, 3, 8] {
        all_same &= render(Exec::parallel(workers)) == reference;
    }
    all_same &= render(Exec::Sequential) == reference;
    v.elapsed = start.elapsed();
    v.require(
        all_same,
        format!(
            "{} CSV bytes identical across sequential and 1/2/3/8 workers",
            reference.len()
        ),
    );
    v
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    type Criterion<'a> = (&'static str, Box<dyn FnMut(&mut Runs) -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 rsop dominance", Box::new(|_| criterion_1())),
        ("2 oracle equivalence", Box::new(|_| criterion_2())),
        ("3 bounded-support delta_max trend", Box::new(criterion_3)),
        ("4 delta_avg and split-bid trends", Box::new(criterion_4)),
        ("5 inverse delta_max floor", Box::new(criterion_5)),
        ("6 inverse revenue", Box::new(criterion_6)),
        ("7 uniform[1,2] revenue ratio", Box::new(criterion_7)),
        ("8 m_epsilon identity", Box::new(|_| criterion_8())),
        ("9 optimal shaded bid diagnostic", Box::new(criterion_9)),
        (
            "10 determinism across workers",
            Box::new(|_| criterion_10()),
        ),
    ];

    println!("acceptance suite: seed {SEED}, {} worker(s)", workers());
    let mut failed = Vec::new();
    for (name, mut criterion) in criteria {
        let verdict = criterion(&mut runs);
        println!(
            "{} criterion {name}: {} ({:.1}s)",
            if verdict.passed { "PASS" } else { "FAIL" },
            verdict.summary,
            verdict.elapsed.as_secs_f64()
        );
        if !verdict.passed {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}
