//! Random sampling optimal price auction.
//!
//! Bids are split into sides A and B. Each side is offered the other side's
//! monopolistic price (0 for an empty side) and everyone at or above it wins
//! at that price.

use rand::Rng;
use serde::Serialize;

use crate::bids::{sort_desc, BidVector};
use crate::error::{Error, Result};
use crate::fees::FeeSchedule;
use crate::mono::mono_sorted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn label(self) -> char {
        match self {
            Side::A => 'A',
            Side::B => 'B',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsopOutcome {
    pub partition: Vec<Side>,
    /// Monopolistic price of side A; charged to winners on side B.
    pub price_a: f64,
    /// Monopolistic price of side B; charged to winners on side A.
    pub price_b: f64,
    /// Zero-based users of side A with bid `>= price_b`.
    pub winners_a: Vec<usize>,
    /// Zero-based users of side B with bid `>= price_a`.
    pub winners_b: Vec<usize>,
    pub revenue: f64,
}

impl RsopOutcome {
    pub fn fee_schedule(&self) -> FeeSchedule {
        let mut entries: Vec<(usize, f64)> = self
            .winners_a
            .iter()
            .map(|&i| (i, self.price_b))
            .chain(self.winners_b.iter().map(|&i| (i, self.price_a)))
            .collect();
        entries.sort_by_key(|&(i, _)| i);
        FeeSchedule::from_entries(entries)
    }
}

pub fn rsop(v: &BidVector, partition: &[Side]) -> Result<RsopOutcome> {
    let bids = v.as_slice();
    if partition.len() != bids.len() {
        return Err(Error::PartitionLength {
            expected: bids.len(),
            got: partition.len(),
        });
    }
    let side_price = |side: Side| {
        let mut vals: Vec<f64> = bids
            .iter()
            .zip(partition)
            .filter(|(_, &s)| s == side)
            .map(|(&b, _)| b)
            .collect();
        sort_desc(&mut vals);
        mono_sorted(&vals).price
    };
    let price_a = side_price(Side::A);
    let price_b = side_price(Side::B);
    let winners_on = |side: Side, price: f64| -> Vec<usize> {
        (0..bids.len())
            .filter(|&i| partition[i] == side && bids[i] >= price)
            .collect()
    };
    let winners_a = winners_on(Side::A, price_b);
    let winners_b = winners_on(Side::B, price_a);
    let revenue = winners_a.len() as f64 * price_b + winners_b.len() as f64 * price_a;
    Ok(RsopOutcome {
        partition: partition.to_vec(),
        price_a,
        price_b,
        winners_a,
        winners_b,
        revenue,
    })
}

/// Each user goes to side A or B independently with probability 1/2.
pub fn random_partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Side> {
    (0..n)
        .map(|_| {
            if rng.random::<bool>() {
                Side::A
            } else {
                Side::B
            }
        })
        .collect()
}

pub fn rsop_random<R: Rng + ?Sized>(v: &BidVector, rng: &mut R) -> RsopOutcome {
    let partition = random_partition(v.len(), rng);
    rsop(v, &partition).expect("partition length matches by construction")
}

/// Reusable buffers for evaluating RSOP revenue many times without
/// allocating.
#[derive(Debug, Default)]
pub struct RsopScratch {
    side_a: Vec<f64>,
    side_b: Vec<f64>,
}

impl RsopScratch {
    /// Revenue only, drawing the partition from `rng` exactly as
    /// [`random_partition`] does.
    pub fn revenue<R: Rng + ?Sized>(&mut self, bids: &[f64], rng: &mut R) -> f64 {
        self.side_a.clear();
        self.side_b.clear();
        for &b in bids {
            if rng.random::<bool>() {
                self.side_a.push(b);
            } else {
                self.side_b.push(b);
            }
        }
        sort_desc(&mut self.side_a);
        sort_desc(&mut self.side_b);
        let price_a = mono_sorted(&self.side_a).price;
        let price_b = mono_sorted(&self.side_b).price;
        let wins_a = self.side_a.partition_point(|&b| b >= price_b);
        let wins_b = self.side_b.partition_point(|&b| b >= price_a);
        wins_a as f64 * price_b + wins_b as f64 * price_a
    }
}
