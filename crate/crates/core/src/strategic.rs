//! Optimal strategic deviations under the monopolistic price mechanism.
//!
//! A user facing the other bids `c_1 >= … >= c_m` who submits `u` copies of
//! a bid `w` is admitted iff the monopolistic price of the combined list is
//! at most `w`. Write `r = 1 + #{c_k > w}` for the rank of the first copy.
//! The combined list then reads
//!
//! ```text
//!   rank k < r        : c_k          (> w)
//!   rank r .. r+u-1   : w
//!   rank k >= r+u     : c_{k-u}      (<= w)
//! ```
//!
//! and the price is at most `w` exactly when the best `k·d_k` at ranks `>= r`
//! is at least the best at ranks `< r` (ties go to the larger rank). With
//! `H_r = max_{k<r} k·c_k` and `T_r = max_{j>=r} (j+u)·c_j` this is
//! `max((r+u-1)·w, T_r) >= H_r`. On the interval `c_r <= w < c_{r-1}` where
//! the rank is fixed, the cheapest admitted `w` is therefore `c_r` when
//! `T_r >= H_r` and otherwise `max(c_r, H_r/(r+u-1))` if that still lies
//! below `c_{r-1}`. Scanning ranks from the bottom, the first admissible
//! interval gives the minimum.
//!
//! For `u = 1` this is `p^strategic`. For split bids, lowering any copy that
//! sits above the cheapest one down to it never hurts admission and leaves
//! the cost `u·w` unchanged, so equal splits are optimal and `p^multi` is the
//! minimum of `u·w_u` over `u`.

use serde::Serialize;

use crate::bids::{sort_desc, BidVector};
use crate::error::{Error, Result};
use crate::mono::{mono_sorted, rank_revenue};

pub const DEFAULT_MAX_SPLITS: usize = 8;

/// Smallest `w` such that `k·w >= target` in floating point.
#[inline]
fn ceil_quotient(target: f64, k: usize) -> f64 {
    let mut w = target / k as f64;
    while rank_revenue(k, w) < target {
        w = w.next_up();
    }
    w
}

/// Cheapest bid `w` such that `copies` bids of `w` added to `others`
/// (sorted non-increasing) are all admitted by MP. Zero when `others` is
/// empty.
pub fn min_winning_bid(others: &[f64], copies: usize) -> f64 {
    debug_assert!(copies >= 1);
    debug_assert!(others.windows(2).all(|w| w[0] >= w[1]));
    let m = others.len();
    if m == 0 {
        return 0.0;
    }

    // prefix[r] = max_{k <= r} k·c_k, prefix[0] = -inf.
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(f64::NEG_INFINITY);
    for (i, &c) in others.iter().enumerate() {
        let prev = prefix[i];
        prefix.push(f64::max(prev, rank_revenue(i + 1, c)));
    }

    // Walk r = m+1 down to 1, maintaining tail = max_{j >= r} (j+u)·c_j.
    let mut tail = f64::NEG_INFINITY;
    for r in (1..=m + 1).rev() {
        if r <= m {
            tail = tail.max(rank_revenue(r + copies, others[r - 1]));
        }
        let lo = if r <= m { others[r - 1] } else { 0.0 };
        let hi = if r >= 2 { others[r - 2] } else { f64::INFINITY };
        if lo >= hi {
            continue;
        }
        let head = prefix[r - 1];
        let cand = if tail >= head {
            lo
        } else {
            ceil_quotient(head, r + copies - 1).max(lo)
        };
        if cand < hi {
            return cand;
        }
    }
    unreachable!("rank 1 is always admissible")
}

fn sorted_copy(bids: &[f64]) -> Vec<f64> {
    let mut buf = bids.to_vec();
    sort_desc(&mut buf);
    buf
}

/// `p^strategic(v_{-i})`: the lowest bid with which a user is still
/// admitted, given everyone else's bids in any order.
pub fn p_strategic(others: &[f64]) -> f64 {
    min_winning_bid(&sorted_copy(others), 1)
}

/// MP price when the user bids `user_bid` alongside `others`.
pub fn p_honest(user_bid: f64, others: &[f64]) -> f64 {
    let mut all = Vec::with_capacity(others.len() + 1);
    all.push(user_bid);
    all.extend_from_slice(others);
    sort_desc(&mut all);
    mono_sorted(&all).price
}

/// `1 - cost/honest` when the user can afford `cost`, else 0.
#[inline]
pub(crate) fn ratio(user_bid: f64, cost: f64, honest: f64) -> f64 {
    if user_bid < cost || honest <= 0.0 {
        return 0.0;
    }
    (1.0 - cost / honest).clamp(0.0, 1.0)
}

pub fn discount_ratio(user_bid: f64, others: &[f64]) -> f64 {
    ratio(user_bid, p_strategic(others), p_honest(user_bid, others))
}

/// Cheapest split-bid deviation: `copies` bids of `bid` each, costing
/// `copies·bid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiBid {
    pub cost: f64,
    pub copies: usize,
    pub bid: f64,
}

impl MultiBid {
    pub fn split(&self) -> Vec<f64> {
        vec![self.bid; self.copies]
    }
}

/// `p^multi` over `others` sorted non-increasing. Ties in cost prefer fewer
/// copies.
pub fn p_multi_sorted(others: &[f64], max_splits: usize) -> MultiBid {
    let mut best = MultiBid {
        cost: f64::INFINITY,
        copies: 0,
        bid: 0.0,
    };
    for u in 1..=max_splits {
        let bid = min_winning_bid(others, u);
        let cost = u as f64 * bid;
        if cost < best.cost {
            best = MultiBid {
                cost,
                copies: u,
                bid,
            };
        }
    }
    best
}

pub fn p_multi(others: &[f64], max_splits: usize) -> Result<MultiBid> {
    if max_splits == 0 {
        return Err(Error::NoSplits);
    }
    Ok(p_multi_sorted(&sorted_copy(others), max_splits))
}

pub fn discount_ratio_multi(user_bid: f64, others: &[f64], max_splits: usize) -> Result<f64> {
    let multi = p_multi(others, max_splits)?;
    Ok(ratio(user_bid, multi.cost, p_honest(user_bid, others)))
}

/// `δ_max` on a list sorted non-increasing, evaluated for the highest bidder
/// only.
pub fn delta_max_sorted(desc: &[f64]) -> f64 {
    let honest = mono_sorted(desc).price;
    ratio(desc[0], min_winning_bid(&desc[1..], 1), honest)
}

/// Split-bid `δ_max`, evaluated for the highest bidder only.
pub fn delta_max_multi_sorted(desc: &[f64], max_splits: usize) -> f64 {
    let honest = mono_sorted(desc).price;
    ratio(desc[0], p_multi_sorted(&desc[1..], max_splits).cost, honest)
}

/// Maximum discount ratio over users via the highest bidder.
pub fn delta_max(v: &BidVector) -> f64 {
    delta_max_sorted(&sorted_copy(v.as_slice()))
}

/// Calls `f(bid, others)` for every position of a sorted list, reusing one
/// buffer for `others`.
fn for_each_leave_one_out(desc: &[f64], mut f: impl FnMut(f64, &[f64])) {
    let mut others = Vec::with_capacity(desc.len().saturating_sub(1));
    for i in 0..desc.len() {
        others.clear();
        others.extend_from_slice(&desc[..i]);
        others.extend_from_slice(&desc[i + 1..]);
        f(desc[i], &others);
    }
}

/// `δ_max` by scanning every user of a sorted list.
pub fn delta_max_full_scan_sorted(desc: &[f64]) -> f64 {
    let honest = mono_sorted(desc).price;
    let mut best = 0.0f64;
    for_each_leave_one_out(desc, |bid, others| {
        best = best.max(ratio(bid, min_winning_bid(others, 1), honest));
    });
    best
}

pub fn delta_max_multi_full_scan_sorted(desc: &[f64], max_splits: usize) -> f64 {
    let honest = mono_sorted(desc).price;
    let mut best = 0.0f64;
    for_each_leave_one_out(desc, |bid, others| {
        best = best.max(ratio(bid, p_multi_sorted(others, max_splits).cost, honest));
    });
    best
}

/// Maximum discount ratio over users, computing every user's ratio.
pub fn delta_max_full_scan(v: &BidVector) -> f64 {
    delta_max_full_scan_sorted(&sorted_copy(v.as_slice()))
}

/// What one user gains by deviating from truthful bidding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    /// Zero-based.
    pub user_index: usize,
    pub p_honest: f64,
    pub p_strategic: f64,
    pub delta_single: f64,
    pub p_multi: Option<f64>,
    pub delta_multi: Option<f64>,
    pub multi_split: Option<Vec<f64>>,
}

/// Split-bid fields are filled when `max_splits` is given.
pub fn deviation_report(
    v: &BidVector,
    user: usize,
    max_splits: Option<usize>,
) -> Result<DeviationReport> {
    let others = sorted_copy(&v.others(user)?);
    let bid = v.as_slice()[user];
    let honest = p_honest(bid, &others);
    let strategic = min_winning_bid(&others, 1);
    let mut report = DeviationReport {
        user_index: user,
        p_honest: honest,
        p_strategic: strategic,
        delta_single: ratio(bid, strategic, honest),
        p_multi: None,
        delta_multi: None,
        multi_split: None,
    };
    if let Some(splits) = max_splits {
        if splits == 0 {
            return Err(Error::NoSplits);
        }
        let multi = p_multi_sorted(&others, splits);
        report.p_multi = Some(multi.cost);
        report.delta_multi = Some(ratio(bid, multi.cost, honest));
        report.multi_split = Some(multi.split());
    }
    Ok(report)
}

/// Result of the optimal-strategic-bid structural condition: some rank `j`
/// with `b_j <= b_{k*}(1 - η/2)` and `j·b_j >= k*·b_{k*} - 2D²/(η·b_{k*})`.
/// A large `δ_max` at level `η` on bids bounded by `D` forces it to hold.
///
/// Ranks run over `1 ..= n + 1` with `b_{n+1} = 0`: a shaded bid below every
/// other bid sits between `b_n` and the bottom of the support `[0, D]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OsbCheck {
    pub eta: f64,
    pub support_bound: f64,
    pub holds: bool,
    /// One-based rank of the first witness.
    pub witness_rank: Option<usize>,
}

pub fn osb_check(desc: &[f64], eta: f64, support_bound: f64) -> Result<OsbCheck> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    if let Some(&top) = desc.first() {
        if top > support_bound {
            return Err(Error::AboveSupport {
                bid: top,
                bound: support_bound,
            });
        }
    }
    let mono = mono_sorted(desc);
    let cutoff = mono.price * (1.0 - eta / 2.0);
    let floor = mono.revenue - 2.0 * support_bound * support_bound / (eta * mono.price);
    let witness_rank = desc
        .iter()
        .chain(std::iter::once(&0.0))
        .enumerate()
        .position(|(i, &b)| b <= cutoff && rank_revenue(i + 1, b) >= floor)
        .map(|i| i + 1);
    Ok(OsbCheck {
        eta,
        support_bound,
        holds: witness_rank.is_some(),
        witness_rank,
    })
}
