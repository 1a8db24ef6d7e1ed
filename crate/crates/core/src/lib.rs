//! Fake-account detection from friend-request response behavior.
//!
//! New accounts on a social network must send friend requests to become
//! connected, and the people they ask react differently to abusive senders
//! than to benign ones. This crate scores each new account by combining, in a
//! Bayesian posterior, *who* the account asked (per-target selection rates)
//! with *how those targets responded* (per-target accept rates), where both
//! rate families are estimated separately for fake and real senders on a
//! labeled training population.
//!
//! The pieces:
//!
//! - [`graph`]: the directed request graph (`source -> target`, with the
//!   target's accept/reject response on every edge).
//! - [`labels`]: known/unknown account labels, plus label-noise injection for
//!   robustness experiments.
//! - [`rates`]: confidence-weighted per-target rate estimation with
//!   shrinkage toward each target's overall rate.
//! - [`scorer`]: the posterior scorer itself, in log-odds form, plus a
//!   slow product-form oracle used to cross-check it.
//! - [`baselines`]: reject-rate, trust propagation (SybilRank), and a local
//!   belief rule (SybilSCAR-C) for comparison.
//! - [`synth`]: synthetic request-graph generators and response simulation.
//! - [`eval`]: ROC AUC, per-out-degree breakdowns, and experiment sweeps.

pub mod baselines;
pub mod eval;
pub mod graph;
pub mod labels;
pub mod rates;
pub mod scorer;
pub mod synth;

pub use graph::{GraphError, NodeId, RequestEdge, RequestGraph};
pub use labels::{LabelError, LabelTable};
pub use rates::{ConfidencePrior, RateEntry, RateError, RateTable, TargetCounts};
pub use scorer::{ScoreEntry, ScoreError, ScoreTable, ScoringConfig, Variant};
