//! The monopolistic price mechanism.
//!
//! With bids sorted `b_1 >= … >= b_n`, the miner admits the `k*` highest
//! bids and charges each of them `b_{k*}`, where `k*` maximizes `k·b_k`.
//! Among several maximizers the largest `k` is taken.

use serde::Serialize;

use crate::bids::{BidVector, SortedBids};
use crate::fees::FeeSchedule;

/// Revenue-maximizing single price over a bid list already sorted
/// non-increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonoPoint {
    /// `R = k*·b_{k*}`.
    pub revenue: f64,
    /// One-based rank `k*`; zero only for an empty list.
    pub k_star: usize,
    /// `b_{k*}`; zero for an empty list.
    pub price: f64,
}

impl MonoPoint {
    pub const EMPTY: MonoPoint = MonoPoint {
        revenue: 0.0,
        k_star: 0,
        price: 0.0,
    };
}

/// `k·b_k` for one-based rank `k`. Every caller that compares candidate
/// revenues goes through this so the arithmetic is identical everywhere.
#[inline]
pub fn rank_revenue(k: usize, bid: f64) -> f64 {
    k as f64 * bid
}

/// Monopolistic price of a non-increasing slice. Ties in `k·b_k` resolve to
/// the largest `k`.
pub fn mono_sorted(desc: &[f64]) -> MonoPoint {
    let mut best = MonoPoint::EMPTY;
    for (i, &b) in desc.iter().enumerate() {
        let k = i + 1;
        let rev = rank_revenue(k, b);
        if best.k_star == 0 || rev >= best.revenue {
            best = MonoPoint {
                revenue: rev,
                k_star: k,
                price: b,
            };
        }
    }
    best
}

/// Outcome of the MP mechanism on a full bid vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpOutcome {
    pub revenue: f64,
    pub k_star: usize,
    pub price: f64,
    /// Zero-based user indices of the winners, ascending.
    pub winners: Vec<usize>,
}

impl MpOutcome {
    /// Every winner pays `price`.
    pub fn fee_schedule(&self) -> FeeSchedule {
        FeeSchedule::from_entries(self.winners.iter().map(|&i| (i, self.price)).collect())
    }
}

pub fn monopolistic_price(v: &BidVector) -> MpOutcome {
    monopolistic_price_sorted(&v.sorted())
}

/// Winners are the `k*` highest sorted ranks, with equal bids ordered by
/// input position.
pub fn monopolistic_price_sorted(sorted: &SortedBids) -> MpOutcome {
    let point = mono_sorted(sorted.values());
    let mut winners = sorted.original_index()[..point.k_star].to_vec();
    winners.sort_unstable();
    MpOutcome {
        revenue: point.revenue,
        k_star: point.k_star,
        price: point.price,
        winners,
    }
}

/// Monopolistic price of an unsorted list; 0 when empty. Allocates.
pub fn mono_price_of(bids: &[f64]) -> f64 {
    let mut buf = bids.to_vec();
    crate::bids::sort_desc(&mut buf);
    mono_sorted(&buf).price
}
