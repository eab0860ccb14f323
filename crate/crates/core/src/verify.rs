//! Differential verification of the production algorithms against the
//! brute-force oracles, plus the revenue dominance and fee-wrapper
//! identities.
//!
//! Each [`Check`] draws its random instances from its own seeded stream, so
//! a report is reproducible from `(seed, check, instance index)` alone.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bids::BidVector;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::fees::{m_epsilon_wrap, FeeSchedule};
use crate::mono::monopolistic_price;
use crate::montecarlo::stream::mix;
use crate::oracle::{
    brute_rsop_revenue, dominance_with, oracle_delta_max, oracle_p_multi, oracle_p_strategic,
    split_admitted, GridSpec,
};
use crate::rsop::{random_partition, rsop};
use crate::strategic::{delta_max, delta_max_full_scan, p_multi, p_strategic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `RSOP <= R` on every grid vector and partition up to `n_max` bidders.
    DominanceExhaustive,
    /// `RSOP <= R` for sampled vectors from every distribution family.
    DominanceRandom,
    /// Fast `p^strategic` equals the breakpoint oracle exactly.
    StrategicOracle,
    /// Both `δ_max` paths equal the from-scratch oracle exactly.
    DeltaMaxOracle,
    /// Production `p^multi` is feasible and within grid spacing of the
    /// exhaustive split search.
    MultiOracle,
    /// `M_ε` over RSOP satisfies its revenue and utility identities in exact
    /// rational arithmetic.
    EpsilonIdentity,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::DominanceExhaustive,
        Check::DominanceRandom,
        Check::StrategicOracle,
        Check::DeltaMaxOracle,
        Check::MultiOracle,
        Check::EpsilonIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::DominanceExhaustive => "rsop_dominance_exhaustive",
            Check::DominanceRandom => "rsop_dominance_random",
            Check::StrategicOracle => "p_strategic_oracle",
            Check::DeltaMaxOracle => "delta_max_oracle",
            Check::MultiOracle => "p_multi_oracle",
            Check::EpsilonIdentity => "m_epsilon_identity",
        }
    }

    fn stream_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Spec(format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Largest vector length in the exhaustive dominance enumeration.
    pub n_max: usize,
    /// Grid points per unit interval; the exhaustive grid is `(0, 1]`.
    pub resolution: usize,
    /// Random dominance instances per distribution family.
    pub dominance_instances: usize,
    /// Largest vector length in the random dominance check.
    pub dominance_n_max: usize,
    pub strategic_instances: usize,
    pub delta_instances: usize,
    pub multi_instances: usize,
    /// Largest number of split bids searched by the split oracle.
    pub multi_splits: usize,
    pub epsilon_instances: usize,
    pub seed: u64,
    /// Deliberately corrupts the production side of one check so the
    /// harness can be shown to catch it.
    #[doc(hidden)]
    pub inject_fault: Option<Check>,
}

/// Largest vector length drawn by the strategic oracle check.
pub const STRATEGIC_N_MAX: usize = 10;
/// Largest vector length drawn by the `δ_max` oracle check.
pub const DELTA_N_MAX: usize = 50;
/// Largest vector length drawn by the split oracle check.
pub const MULTI_N_MAX: usize = 8;
/// Largest vector length drawn by the `M_ε` identity check.
pub const EPSILON_N_MAX: usize = 200;
/// The `ε` values checked; `1/10` and `1/2` are exact rationals.
pub const EPSILONS: [(i64, i64); 3] = [(0, 1), (1, 10), (1, 2)];

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 12,
            resolution: 4,
            dominance_instances: 10_000,
            dominance_n_max: 200,
            strategic_instances: 10_000,
            delta_instances: 1_000,
            multi_instances: 200,
            multi_splits: 4,
            epsilon_instances: 1_000,
            seed: 0,
            inject_fault: None,
        }
    }
}

impl VerifyConfig {
    /// The instance counts of the acceptance suite.
    pub fn full() -> Self {
        VerifyConfig {
            dominance_instances: 100_000,
            delta_instances: 10_000,
            multi_instances: 1_000,
            epsilon_instances: 10_000,
            ..VerifyConfig::default()
        }
    }

    /// Sets every random instance count to `count`.
    pub fn with_instances(mut self, count: usize) -> Self {
        self.dominance_instances = count;
        self.strategic_instances = count;
        self.delta_instances = count;
        self.multi_instances = count;
        self.epsilon_instances = count;
        self
    }

    fn faulty(&self, check: Check) -> bool {
        self.inject_fault == Some(check)
    }

    fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.dominance_n_max == 0 || self.multi_splits == 0 {
            return Err(Error::Spec(
                "n_max, dominance_n_max and multi_splits must be at least 1".into(),
            ));
        }
        GridSpec::new(self.resolution, 1.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
    pub detail: String,
    pub elapsed_ms: u128,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<26} cases={} failures={} {} ({} ms)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.check.name(),
            self.cases,
            self.failures,
            self.detail,
            self.elapsed_ms
        )?;
        if let Some(first) = &self.first_failure {
            write!(f, "\n     first failure: {first}")?;
        }
        Ok(())
    }
}

/// Counts cases and keeps the first failing one.
struct Tally {
    cases: u64,
    failures: u64,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            cases: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }
}

fn instance_rng(seed: u64, check: Check, instance: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(seed) ^ check.stream_tag()));
    rng.set_stream(instance as u64);
    rng
}

/// One instance of every distribution family.
pub fn family_representatives() -> Vec<Distribution> {
    let parse = |s: &str| s.parse::<Distribution>().expect("valid literal");
    [
        "inverse",
        "inverse_trunc:D=10",
        "uniform:lo=0,hi=1",
        "exp:rate=1",
        "discrete:points=0.5@0.25;1@0.25;2@0.25;4@0.25",
        "const:v=2.5",
    ]
    .into_iter()
    .map(parse)
    .collect()
}

/// Bids of length `n`: either on the quarter grid `0, 0.25, …, 4` (so ties
/// are frequent) or continuous from a randomly chosen family.
fn mixed_bids(rng: &mut ChaCha8Rng, n: usize, families: &[Distribution]) -> Vec<f64> {
    if rng.random::<bool>() {
        (0..n)
            .map(|_| rng.random_range(0..=16u32) as f64 / 4.0)
            .collect()
    } else {
        let family = &families[rng.random_range(0..families.len())];
        (0..n).map(|_| family.sample_one(rng)).collect()
    }
}

pub fn run_check(check: Check, config: &VerifyConfig) -> Result<CheckReport> {
    config.validate()?;
    let start = Instant::now();
    let (tally, detail) = match check {
        Check::DominanceExhaustive => dominance_exhaustive(config),
        Check::DominanceRandom => dominance_random(config),
        Check::StrategicOracle => strategic_oracle(config),
        Check::DeltaMaxOracle => delta_max_oracle(config),
        Check::MultiOracle => multi_oracle(config),
        Check::EpsilonIdentity => epsilon_identity(config),
    };
    Ok(CheckReport {
        check,
        cases: tally.cases,
        failures: tally.failures,
        first_failure: tally.first_failure,
        detail,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

pub fn run_all(config: &VerifyConfig) -> Result<Vec<CheckReport>> {
    Check::ALL
        .into_iter()
        .map(|c| run_check(c, config))
        .collect()
}

fn dominance_exhaustive(config: &VerifyConfig) -> (Tally, String) {
    let grid = GridSpec::new(config.resolution, 1.0).expect("validated");
    let fault = config.faulty(Check::DominanceExhaustive);
    let report = dominance_with(config.n_max, &grid, |a, b| {
        let revenue = brute_rsop_revenue(a, b);
        if fault {
            revenue + 1.0
        } else {
            revenue
        }
    });
    let tally = Tally {
        cases: report.evaluations,
        failures: report.violations,
        first_failure: report
            .first_violation
            .map(|(v, sides)| format!("bids {v:?} sides {sides:?}")),
    };
    let detail = format!(
        "pairs_covered={:.0} grid_points={} n_max={}",
        report.pairs_covered,
        grid.points().len(),
        config.n_max
    );
    (tally, detail)
}

fn dominance_random(config: &VerifyConfig) -> (Tally, String) {
    let fault = config.faulty(Check::DominanceRandom);
    let families = family_representatives();
    let mut tally = Tally::new();
    for (f, family) in families.iter().enumerate() {
        for i in 0..config.dominance_instances {
            let mut rng = instance_rng(config.seed, Check::DominanceRandom, i * families.len() + f);
            let n = rng.random_range(1..=config.dominance_n_max);
            let v = family.sample(&mut rng, n).expect("n >= 1");
            let partition = random_partition(n, &mut rng);
            let mut rsop_revenue = rsop(&v, &partition).expect("lengths match").revenue;
            if fault {
                rsop_revenue += 1.0;
            }
            let mp_revenue = monopolistic_price(&v).revenue;
            tally.record(rsop_revenue <= mp_revenue, || {
                format!("{family} n={n} instance={i}: RSOP {rsop_revenue} > R {mp_revenue}")
            });
        }
    }
    let detail = format!(
        "families={} per_family={} n<={}",
        families.len(),
        config.dominance_instances,
        config.dominance_n_max
    );
    (tally, detail)
}

fn strategic_oracle(config: &VerifyConfig) -> (Tally, String) {
    let fault = config.faulty(Check::StrategicOracle);
    let families = family_representatives();
    let mut tally = Tally::new();
    for i in 0..config.strategic_instances {
        let mut rng = instance_rng(config.seed, Check::StrategicOracle, i);
        let n = rng.random_range(1..=STRATEGIC_N_MAX);
        let others = mixed_bids(&mut rng, n - 1, &families);
        let mut fast = p_strategic(&others);
        if fault {
            fast = fast.next_up();
        }
        let slow = oracle_p_strategic(&others);
        tally.record(fast == slow, || {
            format!("others {others:?}: fast {fast} oracle {slow}")
        });
    }
    (tally, format!("n<={STRATEGIC_N_MAX} exact"))
}

fn delta_max_oracle(config: &VerifyConfig) -> (Tally, String) {
    let fault = config.faulty(Check::DeltaMaxOracle);
    let families = family_representatives();
    let mut tally = Tally::new();
    for i in 0..config.delta_instances {
        let mut rng = instance_rng(config.seed, Check::DeltaMaxOracle, i);
        let n = rng.random_range(1..=DELTA_N_MAX);
        let bids = mixed_bids(&mut rng, n, &families);
        let v = BidVector::new(bids.clone()).expect("sampled bids are valid");
        let mut fast = delta_max(&v);
        if fault {
            fast += 1e-9;
        }
        let scan = delta_max_full_scan(&v);
        let slow = oracle_delta_max(&bids);
        tally.record(fast == slow && scan == slow, || {
            format!("bids {bids:?}: fast {fast} full scan {scan} oracle {slow}")
        });
    }
    (
        tally,
        format!("n<={DELTA_N_MAX} exact, fast and full-scan paths"),
    )
}

fn multi_oracle(config: &VerifyConfig) -> (Tally, String) {
    const MULTI_RESOLUTION: usize = 4;
    let fault = config.faulty(Check::MultiOracle);
    let uniform = Distribution::uniform(0.0, 4.0).expect("valid range");
    let mut tally = Tally::new();
    let mut worst_gap = 0.0f64;
    for i in 0..config.multi_instances {
        let mut rng = instance_rng(config.seed, Check::MultiOracle, i);
        let n = rng.random_range(1..=MULTI_N_MAX);
        let splits = rng.random_range(1..=config.multi_splits);
        let others = mixed_bids(&mut rng, n - 1, std::slice::from_ref(&uniform));
        let cap = others.iter().copied().fold(1.0, f64::max);
        let grid = GridSpec::new(MULTI_RESOLUTION, cap).expect("cap >= 1");

        let mut production = p_multi(&others, splits).expect("splits >= 1");
        if fault {
            production.bid /= 2.0;
            production.cost /= 2.0;
        }
        let oracle = oracle_p_multi(&others, splits, &grid);
        let feasible = split_admitted(&others, &production.split());
        let slack = 1e-12 * oracle.cost.max(1.0);
        let below = production.cost <= oracle.cost + slack;
        let close = oracle.cost <= production.cost + splits as f64 * grid.spacing() + slack;
        worst_gap = worst_gap.max(oracle.cost - production.cost);
        tally.record(feasible && below && close, || {
            format!(
                "others {others:?} splits={splits}: production {production:?} (feasible={feasible}) oracle {oracle:?}"
            )
        });
    }
    let detail = format!(
        "n<={MULTI_N_MAX} splits<={} grid=1/{MULTI_RESOLUTION} max_gap={worst_gap:.4}",
        config.multi_splits
    );
    (tally, detail)
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn epsilon_identity(config: &VerifyConfig) -> (Tally, String) {
    let fault = config.faulty(Check::EpsilonIdentity);
    let families = family_representatives();
    let epsilons: Vec<BigRational> = EPSILONS
        .iter()
        .map(|&(p, q)| BigRational::new(p.into(), q.into()))
        .collect();
    let mut tally = Tally::new();

    let rejects_one = {
        let schedule = FeeSchedule::from_entries(vec![(0usize, BigRational::zero())]);
        m_epsilon_wrap(&schedule, &[BigRational::one()], BigRational::one()).is_err()
    };
    tally.record(rejects_one, || "epsilon = 1 was accepted".into());

    for i in 0..config.epsilon_instances {
        let mut rng = instance_rng(config.seed, Check::EpsilonIdentity, i);
        let family = &families[rng.random_range(0..families.len())];
        let n = rng.random_range(1..=EPSILON_N_MAX);
        let v = family.sample(&mut rng, n).expect("n >= 1");
        let partition = random_partition(n, &mut rng);
        let base = rsop(&v, &partition).expect("lengths match").fee_schedule();

        let bids: Vec<BigRational> = v.as_slice().iter().map(|&x| to_rational(x)).collect();
        let base = base.map(|&fee| to_rational(fee));
        let utility = base.total_utility(&bids);
        for eps in &epsilons {
            let applied = if fault {
                eps + BigRational::new(1.into(), 1_000_000.into())
            } else {
                eps.clone()
            };
            let wrapped = match m_epsilon_wrap(&base, &bids, applied) {
                Ok(w) => w,
                Err(e) => {
                    tally.record(false, || format!("{family} n={n} eps={eps}: {e}"));
                    continue;
                }
            };
            let one_plus = BigRational::one() + eps;
            let same_winners = wrapped.winners().eq(base.winners());
            let total_ok = wrapped.total() == base.total() + eps / &one_plus * &utility;
            let residual_ok =
                base.entries()
                    .iter()
                    .zip(wrapped.entries())
                    .all(|((user, fee), (_, new_fee))| {
                        &bids[*user] - new_fee == (&bids[*user] - fee) / &one_plus
                    });
            tally.record(same_winners && total_ok && residual_ok, || {
                format!(
                    "{family} n={n} instance={i} eps={eps}: winners={same_winners} total={total_ok} residuals={residual_ok}"
                )
            });
        }
    }
    let detail =
        format!("exact rationals, eps in {{0, 1/10, 1/2}}, eps=1 rejected, n<={EPSILON_N_MAX}");
    (tally, detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> VerifyConfig {
        VerifyConfig {
            n_max: 5,
            dominance_n_max: 30,
            ..VerifyConfig::default()
        }
        .with_instances(40)
    }

    #[test]
    fn every_check_passes_on_a_small_run() {
        for report in run_all(&tiny()).unwrap() {
            assert!(report.passed(), "{report}");
            assert!(report.cases > 0);
        }
    }

    #[test]
    fn every_injected_fault_is_caught() {
        for check in Check::ALL {
            let config = VerifyConfig {
                inject_fault: Some(check),
                ..tiny()
            };
            let report = run_check(check, &config).unwrap();
            assert!(!report.passed(), "fault in {check} went unnoticed");
            assert!(report.first_failure.is_some());
            for other in Check::ALL.into_iter().filter(|&c| c != check) {
                assert!(run_check(other, &config).unwrap().passed());
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for check in Check::ALL {
            assert_eq!(check.name().parse::<Check>().unwrap(), check);
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn rejects_degenerate_config() {
        let config = VerifyConfig {
            resolution: 0,
            ..VerifyConfig::default()
        };
        assert!(run_check(Check::DominanceExhaustive, &config).is_err());
    }
}
