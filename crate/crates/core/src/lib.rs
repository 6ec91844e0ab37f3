//! Beam search decoding with a certified optimal stopping rule.
//!
//! The decoder stops as soon as the best completed hypothesis found so far
//! provably dominates everything still reachable from the beam. A bounded
//! per-token length reward is supported without losing that guarantee, and
//! the usual baselines (stop when the beam top completes, shrinking beam
//! with length normalization or unbounded reward) are provided for
//! comparison. The [`oracle`] module holds brute-force references used to
//! check all of it.
//!
//! Search code is generic over the score type through [`Real`]; the
//! aliases at the crate root fix it to `f64` (or `f32` with the `32` suffix).

pub mod beam;
pub mod config;
pub mod error;
pub mod hypothesis;
pub mod oracle;
pub mod real;
pub mod result;
pub mod scoring;
pub mod search;
pub mod tracker;
pub mod vocab;

pub use config::{Strategy, TieBreak};
pub use error::{Error, Result};
pub use real::Real;
pub use scoring::{CopyChannelModel, NgramModel, ScoringModel, SeededModel, TableModel};
pub use search::{LengthEstimate, StopReason, StoppingDecision};
pub use vocab::{TokenId, Vocab};

pub type Hypothesis = hypothesis::Hypothesis<f64>;
pub type Beam = beam::Beam<f64>;
pub type BestTracker = tracker::BestTracker<f64>;
pub type Scorer = tracker::Scorer<f64>;
pub type SearchConfig = config::SearchConfig<f64>;
pub type DecodeResult = result::DecodeResult<f64>;
pub type TraceReport = oracle::TraceReport<f64>;

pub type Hypothesis32 = hypothesis::Hypothesis<f32>;
pub type Beam32 = beam::Beam<f32>;
pub type BestTracker32 = tracker::BestTracker<f32>;
pub type Scorer32 = tracker::Scorer<f32>;
pub type SearchConfig32 = config::SearchConfig<f32>;
pub type DecodeResult32 = result::DecodeResult<f32>;
pub type TraceReport32 = oracle::TraceReport<f32>;
