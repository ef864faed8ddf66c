//! Size-level scarcity analytics for fashion retail pre-packs.
//!
//! The Top-Dog-Index ranks the sizes of a branch by how early they sell out
//! compared to their siblings. Around it sit consistency checks and repairs
//! for raw transaction data, robustness diagnostics, a one-piece pre-pack
//! repacking step, test-vs-control evaluation with exact rank-sum
//! certainties, and a stochastic market simulator used as ground truth.

pub mod cli;
pub mod domain;
pub mod error;
pub mod evaluation;
pub mod market_sim;
pub mod prepack;
pub mod robustness;
pub mod tdi;

pub use domain::{SizeSet, Transaction, TransactionSet};
pub use error::{Error, Result};
pub use tdi::{Dampening, Stockout, TdiProfile};
