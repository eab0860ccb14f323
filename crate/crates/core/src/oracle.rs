//! Brute-force reference implementations.
//!
//! Nothing here reuses the production algorithms: prices come from a naive
//! sort-and-scan, and the minimal winning bid is found by evaluating the
//! admission predicate on an exhaustive breakpoint set. They are slow and
//! intended for small instances only.
//!
//! Breakpoint completeness for `oracle_p_strategic`: with the others sorted
//! `c_1 >= … >= c_m`, adding a bid `w` changes which price MP picks only
//! when `w` crosses one of the `c_j` (the rank of `w` changes) or when `k·w`
//! crosses one of the fixed candidate revenues `j·c_j` (the winning rank
//! changes). Between consecutive breakpoints the predicate is constant, and
//! every lower end of an admitted region is closed, so the minimum admitted
//! bid is 0, one of the `c_j`, one of `j·c_j / k`, or the smallest float at
//! or above such a quotient. Only those points are evaluated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rsop::Side;

/// Candidate bid values `i / resolution` for `i = 1 ..= bid_cap·resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    resolution: usize,
    bid_cap: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, bid_cap: f64) -> Result<Self> {
        if resolution == 0 || !(bid_cap > 0.0 && bid_cap.is_finite()) {
            return Err(Error::Spec(format!(
                "grid needs resolution >= 1 and bid_cap > 0 (got {resolution}, {bid_cap})"
            )));
        }
        Ok(GridSpec {
            resolution,
            bid_cap,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let top = (self.bid_cap * self.resolution as f64 + 1e-9).floor() as usize;
        (1..=top)
            .map(|i| i as f64 / self.resolution as f64)
            .collect()
    }
}

/// `(revenue, price)` of MP by sorting a copy and scanning every rank.
pub fn brute_mono(bids: &[f64]) -> (f64, f64) {
    let mut b = bids.to_vec();
    b.sort_by(|x, y| y.partial_cmp(x).expect("bids are not NaN"));
    let mut best = (0.0, 0.0);
    for k in 1..=b.len() {
        let rev = k as f64 * b[k - 1];
        if k == 1 || rev >= best.0 {
            best = (rev, b[k - 1]);
        }
    }
    best
}

/// MP price of two non-increasing lists taken together, by merging them and
/// scanning every rank.
fn merged_price(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 1..=a.len() + b.len() {
        let x = if j == b.len() || (i < a.len() && a[i] >= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        let rev = k as f64 * x;
        if rev >= best.0 {
            best = (rev, x);
        }
    }
    best.1
}

fn naive_sorted_desc(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|x, y| y.partial_cmp(x).expect("bids are not NaN"));
    v
}

/// Whether a user submitting `split` alongside `others` has every copy
/// admitted, i.e. the price is at most the cheapest copy.
pub fn split_admitted(others: &[f64], split: &[f64]) -> bool {
    let split = naive_sorted_desc(split);
    let bottom = *split.last().expect("non-empty split");
    merged_price(&naive_sorted_desc(others), &split) <= bottom
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.retain(|x| x.is_finite() && *x >= 0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

pub fn oracle_p_strategic(others: &[f64]) -> f64 {
    if others.is_empty() {
        return 0.0;
    }
    let c = naive_sorted_desc(others);
    let m = c.len();
    let mut cands = vec![0.0];
    cands.extend_from_slice(&c);
    for j in 1..=m {
        let revenue = j as f64 * c[j - 1];
        for k in 1..=m + 1 {
            let q = revenue / k as f64;
            cands.extend([q, q.next_up(), q.next_up().next_up()]);
        }
    }
    sorted_unique(cands)
        .into_iter()
        .find(|&w| merged_price(&c, &[w]) <= w)
        .expect("the largest other bid is always admitted")
}

/// Best split found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSplit {
    pub cost: f64,
    pub split: Vec<f64>,
}

/// Exhaustive search over non-increasing split vectors of length
/// `1 ..= max_splits` with values on `grid`, the other bids and 0. The result
/// is a feasible point, so it bounds the true `p^multi` from above.
pub fn oracle_p_multi(others: &[f64], max_splits: usize, grid: &GridSpec) -> OracleSplit {
    if others.is_empty() {
        return OracleSplit {
            cost: 0.0,
            split: vec![0.0],
        };
    }
    let mut values = grid.points();
    values.push(0.0);
    values.extend_from_slice(others);
    let mut values = sorted_unique(values);
    values.reverse();

    let sorted_others = naive_sorted_desc(others);
    let mut best = OracleSplit {
        cost: f64::INFINITY,
        split: Vec::new(),
    };
    let mut current = Vec::with_capacity(max_splits);
    for u in 1..=max_splits {
        search(&sorted_others, &values, u, 0, &mut current, &mut best);
    }
    best
}

fn search(
    others: &[f64],
    values: &[f64],
    len: usize,
    from: usize,
    current: &mut Vec<f64>,
    best: &mut OracleSplit,
) {
    if current.len() == len {
        let bottom = *current.last().expect("len >= 1");
        let cost = len as f64 * bottom;
        if cost < best.cost && merged_price(others, current) <= bottom {
            *best = OracleSplit {
                cost,
                split: current.clone(),
            };
        }
        return;
    }
    for i in from..values.len() {
        current.push(values[i]);
        search(others, values, len, i, current, best);
        current.pop();
    }
}

/// `max_i δ_i` computed for every user from scratch.
pub fn oracle_delta_max(v: &[f64]) -> f64 {
    let honest = brute_mono(v).1;
    let mut best = 0.0f64;
    for i in 0..v.len() {
        let mut others = v.to_vec();
        let bid = others.remove(i);
        let strategic = oracle_p_strategic(&others);
        let delta = if bid >= strategic && honest > 0.0 {
            (1.0 - strategic / honest).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.max(delta);
    }
    best
}

/// RSOP revenue computed directly from the two sides' bids.
pub fn brute_rsop_revenue(side_a: &[f64], side_b: &[f64]) -> f64 {
    let price_a = if side_a.is_empty() {
        0.0
    } else {
        brute_mono(side_a).1
    };
    let price_b = if side_b.is_empty() {
        0.0
    } else {
        brute_mono(side_b).1
    };
    let wins_a = side_a.iter().filter(|&&x| x >= price_b).count();
    let wins_b = side_b.iter().filter(|&&x| x >= price_a).count();
    wins_a as f64 * price_b + wins_b as f64 * price_a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    /// Distinct evaluations performed.
    pub evaluations: u64,
    /// `(bid vector, partition)` pairs covered, i.e. `Σ_n (2g)^n` for a
    /// `g`-point grid.
    pub pairs_covered: f64,
    pub violations: u64,
    pub first_violation: Option<(Vec<f64>, Vec<Side>)>,
}

/// Vectors up to this length are enumerated literally, vector by vector and
/// partition by partition.
pub const LITERAL_DOMINANCE_N: usize = 6;

/// Checks `RSOP(v) <= R(v)` for every bid vector with `1 ..= n_max` entries
/// on the grid and every partition of it.
///
/// Both revenues are invariant under permuting users together with their
/// side labels, so beyond [`LITERAL_DOMINANCE_N`] each permutation class,
/// i.e. a pair of multisets (side A, side B), is evaluated once and stands
/// for all of its members.
pub fn oracle_rsop_dominance(n_max: usize, grid: &GridSpec) -> DominanceReport {
    dominance_with(n_max, grid, brute_rsop_revenue)
}

pub(crate) fn dominance_with(
    n_max: usize,
    grid: &GridSpec,
    rsop_revenue: impl Fn(&[f64], &[f64]) -> f64,
) -> DominanceReport {
    let values = grid.points();
    let g = values.len();
    let mut report = DominanceReport {
        evaluations: 0,
        pairs_covered: 0.0,
        violations: 0,
        first_violation: None,
    };
    let record = |report: &mut DominanceReport, a: &[f64], b: &[f64], weight: f64| {
        report.evaluations += 1;
        report.pairs_covered += weight;
        let mut all = a.to_vec();
        all.extend_from_slice(b);
        if rsop_revenue(a, b) > brute_mono(&all).0 {
            report.violations += 1;
            if report.first_violation.is_none() {
                let part = std::iter::repeat_n(Side::A, a.len())
                    .chain(std::iter::repeat_n(Side::B, b.len()))
                    .collect();
                report.first_violation = Some((all, part));
            }
        }
    };

    for n in 1..=n_max.min(LITERAL_DOMINANCE_N) {
        let labels = 2 * g;
        let total = labels.pow(n as u32);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for code in 0..total {
            a.clear();
            b.clear();
            let mut c = code;
            for _ in 0..n {
                let label = c % labels;
                c /= labels;
                if label < g {
                    a.push(values[label]);
                } else {
                    b.push(values[label - g]);
                }
            }
            record(&mut report, &a, &b, 1.0);
        }
    }

    let mut counts = vec![0usize; 2 * g];
    for n in LITERAL_DOMINANCE_N + 1..=n_max {
        compositions(&mut counts, 0, n, &mut |counts| {
            let mut a = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for (label, &c) in counts.iter().enumerate() {
                let side = if label < g { &mut a } else { &mut b };
                side.extend(std::iter::repeat_n(values[label % g], c));
            }
            record(&mut report, &a, &b, multinomial(n, counts));
        });
    }
    report
}

/// Calls `f` for every way of writing `remaining` as an ordered sum over
/// `counts[slot..]`.
fn compositions(counts: &mut [usize], slot: usize, remaining: usize, f: &mut impl FnMut(&[usize])) {
    if slot == counts.len() - 1 {
        counts[slot] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[slot] = c;
        compositions(counts, slot + 1, remaining - c, f);
    }
}

fn multinomial(n: usize, counts: &[usize]) -> f64 {
    let ln_fact = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    (ln_fact(n) - counts.iter().map(|&c| ln_fact(c)).sum::<f64>())
        .exp()
        .round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_strategic_examples() {
        assert_eq!(oracle_p_strategic(&[4.0, 3.0, 1.0]), 2.0);
        assert!((oracle_p_strategic(&[1.0, 1.0]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(oracle_p_strategic(&[]), 0.0);
    }

    #[test]
    fn p_multi_examples() {
        let grid = GridSpec::new(4, 4.0).unwrap();
        let o = oracle_p_multi(&[4.0, 3.0, 1.0], 3, &grid);
        assert_eq!(o.cost, 2.0);
        assert_eq!(oracle_p_multi(&[], 3, &grid).cost, 0.0);
        let o = oracle_p_multi(&[6.0, 1.0, 1.0, 1.0], 3, &GridSpec::new(2, 6.0).unwrap());
        assert_eq!(o.cost, 2.0);
    }

    #[test]
    fn delta_max_examples() {
        assert_eq!(oracle_delta_max(&[10.0, 4.0, 3.0, 1.0]), 0.8);
        assert!((oracle_delta_max(&[3.0, 3.0, 3.0]) - 1.0 / 3.0).abs() < 1e-15);
        // Highest bidder faces (0): any bid wins, p^strategic = 0.
        assert_eq!(oracle_delta_max(&[5.0, 0.0]), 1.0);
    }

    #[test]
    fn dominance_small() {
        let grid = GridSpec::new(4, 1.0).unwrap();
        assert_eq!(grid.points(), vec![0.25, 0.5, 0.75, 1.0]);
        let r = oracle_rsop_dominance(3, &grid);
        assert_eq!(r.violations, 0);
        assert_eq!(r.pairs_covered, (8.0 + 64.0 + 512.0));
        let r = oracle_rsop_dominance(1, &grid);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn class_enumeration_covers_everything() {
        let grid = GridSpec::new(2, 1.0).unwrap();
        let r = oracle_rsop_dominance(9, &grid);
        let expected: f64 = (1..=9).map(|n| 4f64.powi(n)).sum();
        assert_eq!(r.pairs_covered, expected);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn detects_a_planted_violation() {
        // Sanity check of the comparison itself: a revenue above R must count.
        assert!(brute_rsop_revenue(&[4.0], &[4.0]) <= brute_mono(&[4.0, 4.0]).0);
        assert!(brute_rsop_revenue(&[4.0], &[4.0]) > brute_mono(&[4.0, 3.0]).0);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 1.0).is_err());
        assert!(GridSpec::new(1, 0.0).is_err());
    }
}
