//! Single-block transaction fee auctions.
//!
//! This crate implements the monopolistic price (MP) mechanism, the random
//! sampling optimal price (RSOP) auction, the pay-your-bid baseline and the
//! `M_ε` fee wrapper; exact computation of a user's optimal strategic
//! deviations (single shaded bid and split bids); value distributions used
//! to drive experiments; and a seeded Monte Carlo harness estimating the
//! expected discount ratios and revenues of these mechanisms.
//!
//! Everything is a pure function of its inputs. The Monte Carlo harness
//! distributes trials over a rayon pool when the `parallel` feature is on
//! and produces bit-identical results regardless of the worker count.

pub mod bids;
pub mod distributions;
pub mod error;
pub mod fees;
pub mod mono;
pub mod montecarlo;
pub mod oracle;
pub mod rsop;
pub mod strategic;
pub mod verify;

pub use bids::{BidVector, SortedBids};
pub use distributions::Distribution;
pub use error::{Error, Result};
pub use fees::{m_epsilon_wrap, pay_your_bid, FeeSchedule};
pub use mono::{monopolistic_price, MpOutcome};
pub use montecarlo::{Exec, ExperimentResult, ExperimentSpec, Metric};
pub use rsop::{rsop, rsop_random, RsopOutcome, Side};
pub use strategic::{
    delta_max, delta_max_full_scan, discount_ratio, discount_ratio_multi, osb_check, p_honest,
    p_multi, p_strategic, DeviationReport, MultiBid, OsbCheck,
};
