//! Truthful VCG auctions for trading femtocell access time, plus the radio
//! simulator and Monte Carlo harness used to evaluate them.

pub mod bids;
pub mod cli;
pub mod config;
pub mod double_auction;
pub mod error;
pub mod experiments;
pub mod matching;
pub mod radio_sim;
pub mod reverse_auction;
pub mod valuation;

pub use bids::BidVector;
pub use error::{AuctionError, Result};
