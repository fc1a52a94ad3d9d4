//! Trend-following convexity laboratory.
//!
//! The crate implements the exact relation between the P&L of a trend
//! following strategy and the spread between long-term and short-term
//! realized variance: exponential moving-average identities, single-asset
//! and multi-asset trend strategies, the Risk-Parity convexity bound, and a
//! model-free strangle book whose hedged P&L is a variance swap.
//!
//! Everything here is pure computation over slices and owned vectors, so the
//! crate is `no_std` (it needs `alloc`). File formats, configuration and the
//! command-line runner live in the companion `trendcx` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod filters;
pub mod options;
pub mod portfolio;
pub mod strategy;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
