//! Seeded Monte Carlo estimation of discount ratios and revenues.
//!
//! Each trial draws `n` iid bids from the experiment's distribution and
//! evaluates every enabled metric on that one sample, so paired metrics
//! (e.g. `δ_max` against `δ_1`) are compared on identical bids. Trials are
//! independent work items; the reduction always runs in trial order, which
//! makes results a pure function of the spec whatever the worker count.

pub mod export;
mod stats;
pub mod stream;
mod trial;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::strategic::DEFAULT_MAX_SPLITS;

pub use stats::{mean_estimate, mean_estimate_zero_floor, trimmed_mean_estimate, Estimate};
use trial::{run_trial, Checks, Scratch, TrialOutcome};

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_N_VALUES: [usize; 4] = [10, 100, 1_000, 10_000];
pub const DEFAULT_AUDIT_RATE: f64 = 0.01;
/// Fraction trimmed from each end for the heavy-tail revenue row.
pub const TRIM_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DeltaMax,
    DeltaAvg,
    DeltaMaxMsb,
    DeltaAvgMsb,
    /// Mean of `R(v)/n`.
    RevMp,
    /// 5% two-sided trimmed mean of `R(v)/n`; reported whenever `RevMp` is.
    RevMpTrimmed,
    /// Mean of `RSOP(v)/n`.
    RevRsop,
    /// Mean of `R(v)/RSOP(v)` over trials with positive RSOP revenue.
    RevRatio,
}

impl Metric {
    pub const COUNT: usize = 8;
    pub const ALL: [Metric; Metric::COUNT] = [
        Metric::DeltaMax,
        Metric::DeltaAvg,
        Metric::DeltaMaxMsb,
        Metric::DeltaAvgMsb,
        Metric::RevMp,
        Metric::RevMpTrimmed,
        Metric::RevRsop,
        Metric::RevRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::DeltaMax => "delta_max",
            Metric::DeltaAvg => "delta_avg",
            Metric::DeltaMaxMsb => "delta_max_msb",
            Metric::DeltaAvgMsb => "delta_avg_msb",
            Metric::RevMp => "rev_mp",
            Metric::RevMpTrimmed => "rev_mp_trim05",
            Metric::RevRsop => "rev_rsop",
            Metric::RevRatio => "rev_ratio",
        }
    }

    pub fn is_delta(self) -> bool {
        matches!(
            self,
            Metric::DeltaMax | Metric::DeltaAvg | Metric::DeltaMaxMsb | Metric::DeltaAvgMsb
        )
    }

    pub fn is_msb(self) -> bool {
        matches!(self, Metric::DeltaMaxMsb | Metric::DeltaAvgMsb)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Spec(format!("unknown metric `{}`", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub distribution: Distribution,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub max_splits: usize,
    /// Enables the optimal-strategic-bid structural check at this `η` on
    /// bounded-support distributions.
    pub eta_diagnostic: Option<f64>,
    /// Fraction of trials re-evaluated by the slow full-scan path.
    pub audit_rate: f64,
}

impl ExperimentSpec {
    pub fn new(distribution: Distribution, metrics: Vec<Metric>) -> Self {
        ExperimentSpec {
            distribution,
            n_values: DEFAULT_N_VALUES.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            metrics,
            max_splits: DEFAULT_MAX_SPLITS,
            eta_diagnostic: None,
            audit_rate: DEFAULT_AUDIT_RATE,
        }
    }

    /// Checks the spec and normalizes the metric list (sorted, deduplicated,
    /// trimmed revenue row added alongside `rev_mp`).
    pub fn validated(mut self) -> Result<Self> {
        if self.metrics.is_empty() {
            return Err(Error::Spec("no metrics requested".into()));
        }
        if self.metrics.contains(&Metric::RevMpTrimmed) {
            self.metrics.push(Metric::RevMp);
        }
        if self.metrics.contains(&Metric::RevMp) {
            self.metrics.push(Metric::RevMpTrimmed);
        }
        self.metrics.sort();
        self.metrics.dedup();
        if self.n_values.is_empty() {
            return Err(Error::Spec("no n values".into()));
        }
        if self.trials == 0 {
            return Err(Error::Spec("trials must be at least 1".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0) {
            return Err(Error::Spec(format!("n = {n}: need at least one bidder")));
        }
        if self.metrics.iter().any(|m| m.is_delta()) {
            if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
                return Err(Error::Spec(format!(
                    "n = {n} with a delta metric: a lone bidder always has discount 1, \
                     so delta metrics require n >= 2"
                )));
            }
        }
        if self.metrics.iter().any(|m| m.is_msb()) && self.max_splits == 0 {
            return Err(Error::Spec(
                "split-bid metrics require max_splits >= 1".into(),
            ));
        }
        if let Some(eta) = self.eta_diagnostic {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::EtaOutOfRange(eta));
            }
        }
        if !(0.0..=1.0).contains(&self.audit_rate) {
            return Err(Error::Spec(format!(
                "audit rate {} outside [0, 1]",
                self.audit_rate
            )));
        }
        Ok(self)
    }
}

/// How trials are scheduled. Without the `parallel` feature, `Parallel`
/// runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel { workers: usize },
}

impl Exec {
    pub fn parallel(workers: usize) -> Self {
        Exec::Parallel {
            workers: workers.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub metric: Metric,
    pub n: usize,
    pub estimate: f64,
    /// `None` when undefined (a single usable trial).
    pub std_error: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    /// Trials that contributed a value (ratio rows skip zero RSOP revenue).
    pub trials_used: usize,
    /// Inline invariant violations seen in this `n`'s trials.
    pub diag_violations: u64,
    /// Wall time for this `n`'s trials (all metrics together).
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Trials with `δ_max >= η` on bounded support that went through the
    /// structural check.
    pub osb_checked: u64,
    pub osb_violations: u64,
    /// Trials re-evaluated by a slow path.
    pub audits: u64,
    pub audit_mismatches: u64,
    /// Trials where RSOP revenue exceeded MP revenue.
    pub dominance_violations: u64,
    /// Trials where a paired ordering (`δ_max >= δ_1`, split >= single)
    /// failed.
    pub ordering_violations: u64,
}

impl Diagnostics {
    pub fn total_violations(&self) -> u64 {
        self.osb_violations
            + self.audit_mismatches
            + self.dominance_violations
            + self.ordering_violations
    }
}

impl From<Checks> for Diagnostics {
    fn from(c: Checks) -> Self {
        Diagnostics {
            osb_checked: c.osb_checked,
            osb_violations: c.osb_violations,
            audits: c.audits,
            audit_mismatches: c.audit_mismatches,
            dominance_violations: c.dominance_violations,
            ordering_violations: c.ordering_violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub distribution: String,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<MetricRow>,
    pub diagnostics: Diagnostics,
}

impl ExperimentResult {
    pub fn row(&self, metric: Metric, n: usize) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.metric == metric && r.n == n)
    }

    /// Estimates of `metric` in `n_values` order.
    pub fn series(&self, metric: Metric) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| (r.n, r.estimate))
            .collect()
    }
}

fn run_trials(spec: &ExperimentSpec, n: usize, exec: Exec) -> Vec<TrialOutcome> {
    let dist = &spec.distribution;
    match exec {
        Exec::Sequential => {
            let mut scratch = Scratch::default();
            (0..spec.trials)
                .map(|t| run_trial(spec, dist, n, t, &mut scratch))
                .collect()
        }
        #[cfg(feature = "parallel")]
        Exec::Parallel { .. } => {
            use rayon::prelude::*;
            (0..spec.trials)
                .into_par_iter()
                .map_init(Scratch::default, |scratch, t| {
                    run_trial(spec, dist, n, t, scratch)
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        Exec::Parallel { .. } => run_trials(spec, n, Exec::Sequential),
    }
}

fn summarize(metric: Metric, outcomes: &[TrialOutcome]) -> Estimate {
    let xs: Vec<f64> = outcomes
        .iter()
        .map(|o| o.values[metric as usize])
        .filter(|x| !x.is_nan())
        .collect();
    match metric {
        m if m.is_delta() => mean_estimate_zero_floor(&xs),
        Metric::RevMpTrimmed => trimmed_mean_estimate(&xs, TRIM_FRACTION),
        _ => mean_estimate(&xs),
    }
}

fn run_in(spec: &ExperimentSpec, exec: Exec) -> ExperimentResult {
    let mut rows = Vec::new();
    let mut total = Checks::default();
    for &n in &spec.n_values {
        let start = Instant::now();
        let outcomes = run_trials(spec, n, exec);
        let mut checks = Checks::default();
        for o in &outcomes {
            checks.add(&o.checks);
        }
        total.add(&checks);
        let runtime_ms = start.elapsed().as_millis() as u64;
        for &metric in &spec.metrics {
            let est = summarize(metric, &outcomes);
            rows.push(MetricRow {
                metric,
                n,
                estimate: est.value,
                std_error: est.std_error,
                ci95: est.ci95(),
                trials_used: est.count,
                diag_violations: checks.violations(),
                runtime_ms,
            });
        }
    }
    ExperimentResult {
        distribution: spec.distribution.to_string(),
        seed: spec.seed,
        trials: spec.trials,
        rows,
        diagnostics: total.into(),
    }
}

/// Runs every enabled metric for every `n`.
pub fn run(spec: &ExperimentSpec, exec: Exec) -> Result<ExperimentResult> {
    let spec = spec.clone().validated()?;
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel { workers } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Pool(e.to_string()))?;
            Ok(pool.install(|| run_in(&spec, exec)))
        }
        _ => Ok(run_in(&spec, exec)),
    }
}

macro_rules! single_metric_runner {
    ($(#[$doc:meta])* $name:ident, $($metric:expr),+) => {
        $(#[$doc])*
        pub fn $name(spec: &ExperimentSpec, exec: Exec) -> Result<ExperimentResult> {
            let mut spec = spec.clone();
            spec.metrics = vec![$($metric),+];
            run(&spec, exec)
        }
    };
}

single_metric_runner!(
    /// `Δ_n^max` for each `n`.
    estimate_delta_max,
    Metric::DeltaMax
);
single_metric_runner!(
    /// `Δ_n^average`, from user 1's discount.
    estimate_delta_avg,
    Metric::DeltaAvg
);
single_metric_runner!(
    /// Split-bid `Δ_n^max` and `Δ_n^average`.
    estimate_delta_msb,
    Metric::DeltaMaxMsb,
    Metric::DeltaAvgMsb
);
single_metric_runner!(
    /// `E[R]/n` (raw and trimmed), `E[RSOP]/n` and mean `R/RSOP`.
    estimate_revenue,
    Metric::RevMp,
    Metric::RevRsop,
    Metric::RevRatio
);
