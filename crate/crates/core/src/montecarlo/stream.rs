//! Per-trial random streams.
//!
//! Every trial owns a ChaCha8 stream chosen from `(seed, purpose, n)` by the
//! key and from the trial index by ChaCha's stream selector, so any trial
//! can be replayed in isolation and the schedule of workers never matters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// The bid sample. Shared by every metric so paired comparisons see
    /// identical bids.
    Bids = 0x6269_6473,
    /// The RSOP side assignment.
    Partition = 0x7273_6f70,
    /// Choosing which trials get the slow-path audit.
    Audit = 0x6175_6474,
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn key(seed: u64, purpose: Purpose, n: usize) -> u64 {
    mix(mix(mix(seed) ^ purpose as u64) ^ n as u64)
}

pub fn trial_rng(seed: u64, purpose: Purpose, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key(seed, purpose, n));
    rng.set_stream(trial as u64);
    rng
}

/// Deterministic Bernoulli(`rate`) selection of a trial.
pub fn selected(seed: u64, n: usize, trial: usize, rate: f64) -> bool {
    let h = mix(key(seed, Purpose::Audit, n) ^ trial as u64);
    ((h >> 11) as f64 / (1u64 << 53) as f64) < rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(42, Purpose::Bids, 100, 7).random();
        let b: u64 = trial_rng(42, Purpose::Bids, 100, 7).random();
        assert_eq!(a, b);
        let others = [
            trial_rng(42, Purpose::Bids, 100, 8).random::<u64>(),
            trial_rng(42, Purpose::Bids, 1000, 7).random::<u64>(),
            trial_rng(42, Purpose::Partition, 100, 7).random::<u64>(),
            trial_rng(43, Purpose::Bids, 100, 7).random::<u64>(),
        ];
        assert!(others.iter().all(|&x| x != a));
    }

    #[test]
    fn audit_rate_is_roughly_right() {
        let hits = (0..100_000).filter(|&t| selected(1, 10, t, 0.01)).count();
        assert!((800..1200).contains(&hits), "{hits}");
        assert_eq!((0..1000).filter(|&t| selected(1, 10, t, 0.0)).count(), 0);
        assert_eq!((0..1000).filter(|&t| selected(1, 10, t, 1.0)).count(), 1000);
    }
}
