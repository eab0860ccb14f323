//! Per-winner fee schedules, the pay-your-bid baseline and the `M_ε`
//! wrapper.

use num_traits::{Num, ToPrimitive};
use serde::Serialize;

use crate::bids::BidVector;
use crate::error::{Error, Result};

/// What each winner pays. `total` is always the sum of the fees, computed
/// in entry order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeeSchedule<T = f64> {
    entries: Vec<(usize, T)>,
    total: T,
}

impl<T: Num + Clone> FeeSchedule<T> {
    pub fn from_entries(entries: Vec<(usize, T)>) -> Self {
        let total = entries
            .iter()
            .fold(T::zero(), |acc, (_, fee)| acc + fee.clone());
        FeeSchedule { entries, total }
    }

    pub fn empty() -> Self {
        FeeSchedule {
            entries: Vec::new(),
            total: T::zero(),
        }
    }

    /// `(user, fee)` pairs, zero-based user indices.
    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn total(&self) -> T {
        self.total.clone()
    }

    pub fn winners(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn fee_of(&self, user: usize) -> Option<T> {
        self.entries
            .iter()
            .find(|&&(i, _)| i == user)
            .map(|(_, f)| f.clone())
    }

    /// Sum over winners of `bid - fee`.
    pub fn total_utility(&self, bids: &[T]) -> T {
        self.entries.iter().fold(T::zero(), |acc, (i, fee)| {
            acc + (bids[*i].clone() - fee.clone())
        })
    }

    /// Maps every fee through `f`, e.g. to move to exact arithmetic.
    pub fn map<U: Num + Clone>(&self, mut f: impl FnMut(&T) -> U) -> FeeSchedule<U> {
        FeeSchedule::from_entries(self.entries.iter().map(|(i, x)| (*i, f(x))).collect())
    }
}

/// The `min(capacity, n)` highest bidders each pay their own bid.
pub fn pay_your_bid(v: &BidVector, capacity: usize) -> FeeSchedule {
    let sorted = v.sorted();
    let take = capacity.min(v.len());
    FeeSchedule::from_entries(
        sorted.original_index()[..take]
            .iter()
            .zip(sorted.values())
            .map(|(&i, &b)| (i, b))
            .collect(),
    )
}

/// Keeps the allocation of `base` and moves each winner's fee toward her
/// bid: `p' = p + ε/(1+ε)·(v - p)`, so her remaining utility is
/// `(v - p)/(1+ε)`.
///
/// Generic over the number type so the identities can be checked in exact
/// rational arithmetic as well as `f64`.
pub fn m_epsilon_wrap<T>(base: &FeeSchedule<T>, bids: &[T], epsilon: T) -> Result<FeeSchedule<T>>
where
    T: Num + Clone + PartialOrd + ToPrimitive,
{
    let f64_of = |x: &T| x.to_f64().unwrap_or(f64::NAN);
    if epsilon < T::zero() || epsilon >= T::one() {
        return Err(Error::EpsilonOutOfRange(f64_of(&epsilon)));
    }
    let mut entries = Vec::with_capacity(base.entries.len());
    for (user, fee) in &base.entries {
        let bid = bids.get(*user).ok_or(Error::UserOutOfRange {
            user: *user,
            n: bids.len(),
        })?;
        if fee > bid {
            return Err(Error::FeeExceedsBid {
                user: *user,
                fee: f64_of(fee),
                bid: f64_of(bid),
            });
        }
        entries.push((*user, wrapped_fee(fee, bid, &epsilon)));
    }
    Ok(FeeSchedule::from_entries(entries))
}

fn wrapped_fee<T: Num + Clone>(fee: &T, bid: &T, epsilon: &T) -> T {
    let share = epsilon.clone() / (T::one() + epsilon.clone());
    fee.clone() + share * (bid.clone() - fee.clone())
}
