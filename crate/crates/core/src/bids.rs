use serde::Serialize;

use crate::error::{Error, Result};

/// Raw bids `v_1, …, v_n` in user order. Always non-empty, finite and
/// non-negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidVector(Vec<f64>);

impl BidVector {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        if bids.is_empty() {
            return Err(Error::EmptyBids);
        }
        check_bids(&bids)?;
        Ok(BidVector(bids))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    // Never true; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Bids of everyone except `user`, in input order.
    pub fn others(&self, user: usize) -> Result<Vec<f64>> {
        if user >= self.0.len() {
            return Err(Error::UserOutOfRange {
                user,
                n: self.0.len(),
            });
        }
        let mut rest = self.0.clone();
        rest.remove(user);
        Ok(rest)
    }

    pub fn sorted(&self) -> SortedBids {
        sort_bids(self)
    }

    /// Every bid multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        BidVector::new(self.0.iter().map(|b| b * s).collect())
    }
}

impl TryFrom<Vec<f64>> for BidVector {
    type Error = Error;

    fn try_from(bids: Vec<f64>) -> Result<Self> {
        BidVector::new(bids)
    }
}

impl AsRef<[f64]> for BidVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_bids(bids: &[f64]) -> Result<()> {
    match bids.iter().position(|b| !b.is_finite() || *b < 0.0) {
        Some(position) => Err(Error::InvalidBid {
            position,
            value: bids[position],
        }),
        None => Ok(()),
    }
}

/// Bids sorted non-increasing, `values[j] >= values[j + 1]`, together with
/// the (zero-based) input position of each sorted entry. Equal bids keep
/// their input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedBids {
    values: Vec<f64>,
    original_index: Vec<usize>,
}

impl SortedBids {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sort_bids(v: &BidVector) -> SortedBids {
    let bids = v.as_slice();
    let mut original_index: Vec<usize> = (0..bids.len()).collect();
    // `sort_by` is stable, so equal bids stay in input order.
    original_index.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]));
    let values = original_index.iter().map(|&i| bids[i]).collect();
    SortedBids {
        values,
        original_index,
    }
}

/// Sorts a scratch buffer of bids non-increasing in place.
#[inline]
pub fn sort_desc(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
}
