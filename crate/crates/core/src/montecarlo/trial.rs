//! One Monte Carlo trial: draw `n` bids, evaluate every requested metric on
//! the same sample and run the inline invariant checks.

use crate::bids::sort_desc;
use crate::distributions::Distribution;
use crate::mono::mono_sorted;
use crate::oracle::{oracle_p_multi, split_admitted, GridSpec};
use crate::rsop::RsopScratch;
use crate::strategic::{
    delta_max_full_scan_sorted, delta_max_multi_full_scan_sorted, min_winning_bid, osb_check,
    p_multi_sorted, ratio,
};

use super::stream::{selected, trial_rng, Purpose};
use super::{ExperimentSpec, Metric};

/// Slow-path split audits are skipped above this size (they are quadratic
/// in `n` times the split count).
pub(crate) const MSB_SCAN_AUDIT_MAX_N: usize = 1000;
/// Largest `n` for which split audits also run the grid oracle.
pub(crate) const MSB_ORACLE_AUDIT_MAX_N: usize = 10;
const MSB_ORACLE_SPLITS: usize = 3;
const CROSS_CHECK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Checks {
    pub osb_checked: u64,
    pub osb_violations: u64,
    pub audits: u64,
    pub audit_mismatches: u64,
    pub dominance_violations: u64,
    pub ordering_violations: u64,
}

impl Checks {
    pub fn violations(&self) -> u64 {
        self.osb_violations
            + self.audit_mismatches
            + self.dominance_violations
            + self.ordering_violations
    }

    pub fn add(&mut self, o: &Checks) {
        self.osb_checked += o.osb_checked;
        self.osb_violations += o.osb_violations;
        self.audits += o.audits;
        self.audit_mismatches += o.audit_mismatches;
        self.dominance_violations += o.dominance_violations;
        self.ordering_violations += o.ordering_violations;
    }
}

/// Per-metric values of one trial; `NaN` where not computed or undefined.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TrialOutcome {
    pub values: [f64; Metric::COUNT],
    pub checks: Checks,
}

/// Buffers reused across the trials one worker runs.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    bids: Vec<f64>,
    sorted: Vec<f64>,
    others: Vec<f64>,
    rsop: RsopScratch,
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= CROSS_CHECK_RTOL * a.abs().max(b.abs())
}

pub(crate) fn run_trial(
    spec: &ExperimentSpec,
    dist: &Distribution,
    n: usize,
    trial: usize,
    s: &mut Scratch,
) -> TrialOutcome {
    let mut values = [f64::NAN; Metric::COUNT];
    let mut checks = Checks::default();
    let wants = |m: Metric| spec.metrics.contains(&m);

    s.bids.resize(n, 0.0);
    dist.fill(
        &mut trial_rng(spec.seed, Purpose::Bids, n, trial),
        &mut s.bids,
    );
    s.sorted.clear();
    s.sorted.extend_from_slice(&s.bids);
    sort_desc(&mut s.sorted);
    let desc = &s.sorted[..];
    let mono = mono_sorted(desc);
    let audit = selected(spec.seed, n, trial, spec.audit_rate);

    let bound = dist.support_upper();
    let osb_eta = spec.eta_diagnostic.filter(|_| bound.is_some());
    let delta_metrics = [
        Metric::DeltaMax,
        Metric::DeltaAvg,
        Metric::DeltaMaxMsb,
        Metric::DeltaAvgMsb,
    ];
    let any_delta = delta_metrics.iter().any(|&m| wants(m));

    if any_delta || osb_eta.is_some() {
        // The highest bidder's deviation; the others are desc[1..].
        let top_others = &desc[1..];
        let delta_max = ratio(desc[0], min_winning_bid(top_others, 1), mono.price);
        if wants(Metric::DeltaMax) {
            values[Metric::DeltaMax as usize] = delta_max;
            if audit {
                checks.audits += 1;
                if !close(delta_max, delta_max_full_scan_sorted(desc)) {
                    checks.audit_mismatches += 1;
                }
            }
        }
        if let (Some(eta), Some(d)) = (osb_eta, bound) {
            if delta_max >= eta {
                checks.osb_checked += 1;
                let holds = osb_check(desc, eta, d).map(|c| c.holds).unwrap_or(false);
                if !holds {
                    checks.osb_violations += 1;
                }
            }
        }

        let needs_user1 = wants(Metric::DeltaAvg) || wants(Metric::DeltaAvgMsb);
        if needs_user1 {
            // Drop one copy of user 1's bid; which copy is irrelevant.
            let v1 = s.bids[0];
            let pos = desc.partition_point(|&x| x > v1);
            s.others.clear();
            s.others.extend_from_slice(&desc[..pos]);
            s.others.extend_from_slice(&desc[pos + 1..]);
        }
        let v1 = s.bids[0];
        if wants(Metric::DeltaAvg) {
            let d1 = ratio(v1, min_winning_bid(&s.others, 1), mono.price);
            values[Metric::DeltaAvg as usize] = d1;
            if wants(Metric::DeltaMax) && d1 > delta_max {
                checks.ordering_violations += 1;
            }
        }

        if wants(Metric::DeltaMaxMsb) {
            let multi = p_multi_sorted(top_others, spec.max_splits);
            let dm = ratio(desc[0], multi.cost, mono.price);
            values[Metric::DeltaMaxMsb as usize] = dm;
            if wants(Metric::DeltaMax) && dm < delta_max {
                checks.ordering_violations += 1;
            }
            if audit && n <= MSB_SCAN_AUDIT_MAX_N {
                checks.audits += 1;
                let mut ok = close(dm, delta_max_multi_full_scan_sorted(desc, spec.max_splits));
                ok &= split_admitted(top_others, &multi.split());
                if n <= MSB_ORACLE_AUDIT_MAX_N {
                    ok &= msb_oracle_agrees(top_others, spec.max_splits);
                }
                if !ok {
                    checks.audit_mismatches += 1;
                }
            }
        }
        if wants(Metric::DeltaAvgMsb) {
            let multi = p_multi_sorted(&s.others, spec.max_splits);
            let dm = ratio(v1, multi.cost, mono.price);
            values[Metric::DeltaAvgMsb as usize] = dm;
            let single = values[Metric::DeltaAvg as usize];
            if !single.is_nan() && dm < single {
                checks.ordering_violations += 1;
            }
            let max_msb = values[Metric::DeltaMaxMsb as usize];
            if !max_msb.is_nan() && dm > max_msb {
                checks.ordering_violations += 1;
            }
        }
    }

    if wants(Metric::RevMp) || wants(Metric::RevRsop) || wants(Metric::RevRatio) {
        let mut part_rng = trial_rng(spec.seed, Purpose::Partition, n, trial);
        let rsop = s.rsop.revenue(&s.bids, &mut part_rng);
        if rsop > mono.revenue {
            checks.dominance_violations += 1;
        }
        let nf = n as f64;
        values[Metric::RevMp as usize] = mono.revenue / nf;
        values[Metric::RevMpTrimmed as usize] = mono.revenue / nf;
        values[Metric::RevRsop as usize] = rsop / nf;
        if rsop > 0.0 {
            values[Metric::RevRatio as usize] = mono.revenue / rsop;
        }
    }

    TrialOutcome { values, checks }
}

/// Production split price on `others` never exceeds the grid oracle's.
fn msb_oracle_agrees(others: &[f64], max_splits: usize) -> bool {
    let cap = others.first().copied().unwrap_or(0.0);
    if cap <= 0.0 {
        return true;
    }
    let splits = max_splits.min(MSB_ORACLE_SPLITS);
    let resolution = ((16.0 / cap).floor() as usize).max(1);
    let Ok(grid) = GridSpec::new(resolution, cap) else {
        return true;
    };
    let production = p_multi_sorted(others, splits).cost;
    let oracle = oracle_p_multi(others, splits, &grid).cost;
    production <= oracle * (1.0 + CROSS_CHECK_RTOL)
}
