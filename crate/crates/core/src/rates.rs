//! Per-target rate estimation from labeled request traffic.
//!
//! For every request target `j` we estimate four quantities, split by the
//! *sender's* class:
//!
//! - selection rates `sel_fake[j]` / `sel_real[j]`: the probability that a
//!   single request drawn from the labeled fake (resp. real) population is
//!   addressed to `j`;
//! - accept rates `acc_fake[j]` / `acc_real[j]`: the probability that `j`
//!   accepts a request arriving from a fake (resp. real) sender.
//!
//! Raw per-class frequencies are noisy for low-traffic targets, so both
//! estimators shrink the per-class frequency toward the target's *overall*
//! (class-blind) rate. The shrinkage strength is a per-target confidence
//! prior — pseudo-observations in the units of the estimator's denominator —
//! and taking it to infinity collapses the two classes onto the overall
//! rate, which disables that signal entirely.
//!
//! Labels are fake-probabilities, so a sender with label `0.7` contributes
//! weight `0.7` to the fake counts and `0.3` to the real counts of every
//! target they asked; hard 0/1 labels reduce to plain counting.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{NodeId, RequestGraph};
use crate::labels::LabelTable;

/// Default clamp width: estimated rates are kept away from the boundary so
/// their logarithms stay finite.
pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

/// Default confidence prior for selection rates. Selection shrinkage
/// competes against *population-level* request totals, so a useful default
/// is of that magnitude: large enough that a target needs many labeled
/// requests before its selection ratio drifts far from neutral.
pub const DEFAULT_SIGMA: f64 = 1e5;

/// Default confidence prior for accept rates. Accept shrinkage competes
/// against a single target's per-class request count, so roughly one
/// pseudo-observation is already meaningful regularization.
pub const DEFAULT_PHI: f64 = 1.0;

/// Problems during rate estimation.
#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    /// No labeled sender sent any request, so no rate can be estimated.
    #[error("empty training set: no request has a labeled sender")]
    EmptyTrainingSet,
    /// The label table does not cover the graph's node range.
    #[error("label table covers {labels} nodes but the graph has {nodes}")]
    LabelSizeMismatch { labels: usize, nodes: usize },
    /// A confidence prior value was negative or NaN.
    #[error("confidence prior must be a non-negative finite number, got {value}")]
    InvalidPrior { target: Option<u32>, value: f64 },
    /// A per-target prior vector has the wrong length.
    #[error("per-target confidence prior has length {got}, expected {expected}")]
    PriorLengthMismatch { expected: usize, got: usize },
    /// The clamp width must satisfy `0 <= eps < 0.5`.
    #[error("clamp width must be in [0, 0.5), got {0}")]
    InvalidClampEps(f64),
    /// Mismatched vector lengths when assembling a table from parts.
    #[error("rate table parts have inconsistent lengths")]
    PartsLengthMismatch,
}

/// Shrinkage strength, in pseudo-observations, applied to every target or
/// individually per target. [`Infinite`](ConfidencePrior::Infinite) is the
/// exact limit in which per-class rates equal the overall rate.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfidencePrior {
    /// One strength for all targets.
    Uniform(f64),
    /// A strength per target; must match the node count.
    PerTarget(Vec<f64>),
    /// The infinite-shrinkage limit (class signal disabled).
    Infinite,
}

/// Prior strength resolved for one target.
#[derive(Clone, Copy)]
enum PriorAt {
    Finite(f64),
    Infinite,
}

impl ConfidencePrior {
    fn validate(&self, n: usize) -> Result<(), RateError> {
        match self {
            ConfidencePrior::Uniform(v) => {
                if !v.is_finite() || *v < 0.0 {
                    return Err(RateError::InvalidPrior {
                        target: None,
                        value: *v,
                    });
                }
            }
            ConfidencePrior::PerTarget(vs) => {
                if vs.len() != n {
                    return Err(RateError::PriorLengthMismatch {
                        expected: n,
                        got: vs.len(),
                    });
                }
                for (j, v) in vs.iter().enumerate() {
                    if !v.is_finite() || *v < 0.0 {
                        return Err(RateError::InvalidPrior {
                            target: Some(j as u32),
                            value: *v,
                        });
                    }
                }
            }
            ConfidencePrior::Infinite => {}
        }
        Ok(())
    }

    fn at(&self, j: usize) -> PriorAt {
        match self {
            ConfidencePrior::Uniform(v) => PriorAt::Finite(*v),
            ConfidencePrior::PerTarget(vs) => PriorAt::Finite(vs[j]),
            ConfidencePrior::Infinite => PriorAt::Infinite,
        }
    }
}

/// Request and accept totals per target, split by sender class, plus the
/// population totals needed by the selection estimator.
///
/// All counts are label-weighted, so they are exact integers whenever the
/// training labels are hard 0/1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TargetCounts {
    req_fake: Vec<f64>,
    req_real: Vec<f64>,
    acc_fake: Vec<f64>,
    acc_real: Vec<f64>,
    /// Total requests sent by the labeled population, fake-weighted.
    sent_fake: f64,
    /// Total requests sent by the labeled population, real-weighted.
    sent_real: f64,
}

impl TargetCounts {
    /// An all-zero table over `n` targets.
    pub fn new(n: usize) -> Self {
        TargetCounts {
            req_fake: vec![0.0; n],
            req_real: vec![0.0; n],
            acc_fake: vec![0.0; n],
            acc_real: vec![0.0; n],
            sent_fake: 0.0,
            sent_real: 0.0,
        }
    }

    /// Tallies every request whose sender is labeled. Requests from unknown
    /// senders are ignored; targets may be labeled or not.
    pub fn accumulate(graph: &RequestGraph, labels: &LabelTable) -> Result<Self, RateError> {
        if labels.len() != graph.node_count() {
            return Err(RateError::LabelSizeMismatch {
                labels: labels.len(),
                nodes: graph.node_count(),
            });
        }
        let mut counts = TargetCounts::new(graph.node_count());
        for edge in graph.edges() {
            if let Some(label) = labels.get(edge.source) {
                counts.record(edge.target, edge.accepted, label);
            }
        }
        Ok(counts)
    }

    /// Like [`accumulate`](Self::accumulate) but sharded over edge ranges and
    /// merged. With hard 0/1 labels the result is bit-identical to the
    /// sequential tally (integer-valued sums commute exactly).
    pub fn accumulate_parallel(
        graph: &RequestGraph,
        labels: &LabelTable,
        shard_size: usize,
    ) -> Result<Self, RateError> {
        if labels.len() != graph.node_count() {
            return Err(RateError::LabelSizeMismatch {
                labels: labels.len(),
                nodes: graph.node_count(),
            });
        }
        let shard_size = shard_size.max(1);
        let shards: Vec<TargetCounts> = graph
            .edges()
            .par_chunks(shard_size)
            .map(|chunk| {
                let mut counts = TargetCounts::new(graph.node_count());
                for edge in chunk {
                    if let Some(label) = labels.get(edge.source) {
                        counts.record(edge.target, edge.accepted, label);
                    }
                }
                counts
            })
            .collect();
        let mut merged = TargetCounts::new(graph.node_count());
        for shard in shards {
            merged.merge(&shard);
        }
        Ok(merged)
    }

    /// Adds one request to the tally. `label` is the sender's
    /// fake-probability.
    pub fn record(&mut self, target: NodeId, accepted: bool, label: f64) {
        let j = target.index();
        let (w_fake, w_real) = (label, 1.0 - label);
        self.req_fake[j] += w_fake;
        self.req_real[j] += w_real;
        if accepted {
            self.acc_fake[j] += w_fake;
            self.acc_real[j] += w_real;
        }
        self.sent_fake += w_fake;
        self.sent_real += w_real;
    }

    /// Adds another tally into this one. Commutative and associative, so
    /// shards can be combined in any grouping.
    pub fn merge(&mut self, other: &TargetCounts) {
        assert_eq!(self.len(), other.len(), "cannot merge counts of different sizes");
        for j in 0..self.len() {
            self.req_fake[j] += other.req_fake[j];
            self.req_real[j] += other.req_real[j];
            self.acc_fake[j] += other.acc_fake[j];
            self.acc_real[j] += other.acc_real[j];
        }
        self.sent_fake += other.sent_fake;
        self.sent_real += other.sent_real;
    }

    /// Number of targets covered.
    pub fn len(&self) -> usize {
        self.req_fake.len()
    }

    pub fn is_empty(&self) -> bool {
        self.req_fake.is_empty()
    }

    /// Fake-weighted requests received by `j`.
    pub fn req_fake(&self, j: usize) -> f64 {
        self.req_fake[j]
    }

    /// Real-weighted requests received by `j`.
    pub fn req_real(&self, j: usize) -> f64 {
        self.req_real[j]
    }

    /// All labeled requests received by `j`.
    pub fn req_total(&self, j: usize) -> f64 {
        self.req_fake[j] + self.req_real[j]
    }

    /// Fake-weighted accepts by `j`.
    pub fn acc_fake(&self, j: usize) -> f64 {
        self.acc_fake[j]
    }

    /// Real-weighted accepts by `j`.
    pub fn acc_real(&self, j: usize) -> f64 {
        self.acc_real[j]
    }

    /// All labeled accepts by `j`.
    pub fn acc_total(&self, j: usize) -> f64 {
        self.acc_fake[j] + self.acc_real[j]
    }

    /// Total requests sent by labeled fakes.
    pub fn sent_fake(&self) -> f64 {
        self.sent_fake
    }

    /// Total requests sent by labeled reals.
    pub fn sent_real(&self) -> f64 {
        self.sent_real
    }

    /// Total requests sent by the labeled population.
    pub fn sent_total(&self) -> f64 {
        self.sent_fake + self.sent_real
    }
}

/// A pair of per-target rate vectors, one per sender class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRates {
    pub fake: Vec<f64>,
    pub real: Vec<f64>,
}

/// Estimates per-class accept rates with shrinkage toward each target's
/// overall accept rate.
///
/// For a target with per-class requests `req_c` and accepts `acc_c`, the
/// estimate is `(acc_c + phi * overall) / (req_c + phi)` where `overall` is
/// the target's class-blind accept frequency. Degenerate cases:
///
/// - a target nobody labeled asked falls back, for both classes, to the
///   global mean accept rate over all labeled traffic (0.5 when there is no
///   labeled traffic at all);
/// - `phi = 0` with zero requests from one class falls back to `overall`;
/// - an infinite prior is exactly `overall` for both classes.
///
/// Results are clamped into `[clamp_eps, 1 - clamp_eps]`.
pub fn estimate_accept_rates(
    counts: &TargetCounts,
    confidence: &ConfidencePrior,
    clamp_eps: f64,
) -> Result<ClassRates, RateError> {
    confidence.validate(counts.len())?;
    validate_clamp(clamp_eps)?;

    let sent = counts.sent_total();
    let accepted: f64 = (0..counts.len()).map(|j| counts.acc_total(j)).sum();
    let global_mean = if sent > 0.0 { accepted / sent } else { 0.5 };

    let clamp = |x: f64| x.clamp(clamp_eps, 1.0 - clamp_eps);
    let mut fake = Vec::with_capacity(counts.len());
    let mut real = Vec::with_capacity(counts.len());
    for j in 0..counts.len() {
        let req = counts.req_total(j);
        if req == 0.0 {
            fake.push(clamp(global_mean));
            real.push(clamp(global_mean));
            continue;
        }
        let overall = counts.acc_total(j) / req;
        let prior = confidence.at(j);
        let one = |req_c: f64, acc_c: f64| -> f64 {
            match prior {
                PriorAt::Infinite => overall,
                PriorAt::Finite(phi) => {
                    let denom = req_c + phi;
                    if denom == 0.0 {
                        overall
                    } else {
                        (acc_c + phi * overall) / denom
                    }
                }
            }
        };
        fake.push(clamp(one(counts.req_fake(j), counts.acc_fake(j))));
        real.push(clamp(one(counts.req_real(j), counts.acc_real(j))));
    }
    Ok(ClassRates { fake, real })
}

/// Estimates per-class selection rates with shrinkage toward each target's
/// overall share of labeled traffic.
///
/// For a target receiving `req_c` requests from class `c`, whose population
/// sent `sent_c` requests in total, the estimate is
/// `(req_c + sigma * overall) / (sent_c + sigma)` where `overall` is the
/// target's share of all labeled requests. Degenerate cases:
///
/// - no labeled traffic at all is an error ([`RateError::EmptyTrainingSet`]);
/// - an infinite prior is exactly `overall` for both classes;
/// - `sigma = 0` when one class sent nothing falls back to `overall`
///   (the per-class share is undefined, and `overall` is its natural limit).
///
/// Results are clamped into `[clamp_eps, 1]`: a floor keeps logarithms
/// finite, and no upper clamp below 1 is needed because shares cannot
/// exceed 1.
pub fn estimate_selection_rates(
    counts: &TargetCounts,
    confidence: &ConfidencePrior,
    clamp_eps: f64,
) -> Result<ClassRates, RateError> {
    confidence.validate(counts.len())?;
    validate_clamp(clamp_eps)?;

    let sent = counts.sent_total();
    if sent <= 0.0 {
        return Err(RateError::EmptyTrainingSet);
    }

    let clamp = |x: f64| x.clamp(clamp_eps, 1.0);
    let mut fake = Vec::with_capacity(counts.len());
    let mut real = Vec::with_capacity(counts.len());
    for j in 0..counts.len() {
        let overall = counts.req_total(j) / sent;
        let prior = confidence.at(j);
        let one = |req_c: f64, sent_c: f64| -> f64 {
            match prior {
                PriorAt::Infinite => overall,
                PriorAt::Finite(sigma) => {
                    let denom = sent_c + sigma;
                    if denom == 0.0 {
                        overall
                    } else {
                        (req_c + sigma * overall) / denom
                    }
                }
            }
        };
        fake.push(clamp(one(counts.req_fake(j), counts.sent_fake())));
        real.push(clamp(one(counts.req_real(j), counts.sent_real())));
    }
    Ok(ClassRates { fake, real })
}

/// The four estimated rates for one target, as consumed by the scorer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEntry {
    pub sel_fake: f64,
    pub sel_real: f64,
    pub acc_fake: f64,
    pub acc_real: f64,
    /// Whether any labeled sender asked this target. Non-informative targets
    /// contribute nothing to a score.
    pub informative: bool,
}

impl RateEntry {
    /// A neutral entry that contributes nothing.
    pub fn non_informative() -> Self {
        RateEntry {
            sel_fake: 0.0,
            sel_real: 0.0,
            acc_fake: 0.5,
            acc_real: 0.5,
            informative: false,
        }
    }
}

/// Estimated selection and accept rates for every target in a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    sel: ClassRates,
    acc: ClassRates,
    informative: Vec<bool>,
}

impl RateTable {
    /// Assembles a table from explicit per-target vectors (all of one
    /// length). Used by file loaders and tests; the estimation pipeline is
    /// [`build_rate_table`].
    pub fn from_parts(
        sel: ClassRates,
        acc: ClassRates,
        informative: Vec<bool>,
    ) -> Result<Self, RateError> {
        let n = informative.len();
        if sel.fake.len() != n || sel.real.len() != n || acc.fake.len() != n || acc.real.len() != n
        {
            return Err(RateError::PartsLengthMismatch);
        }
        Ok(RateTable {
            sel,
            acc,
            informative,
        })
    }

    /// Number of targets covered.
    pub fn len(&self) -> usize {
        self.informative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.informative.is_empty()
    }

    /// The rates for target `j`. Ids beyond the table (possible when a table
    /// trained on one graph is applied to a larger one) are non-informative.
    pub fn entry(&self, j: NodeId) -> RateEntry {
        let idx = j.index();
        if idx >= self.len() || !self.informative[idx] {
            return RateEntry::non_informative();
        }
        RateEntry {
            sel_fake: self.sel.fake[idx],
            sel_real: self.sel.real[idx],
            acc_fake: self.acc.fake[idx],
            acc_real: self.acc.real[idx],
            informative: true,
        }
    }

    /// Per-target selection rates (fake, real).
    pub fn selection(&self) -> &ClassRates {
        &self.sel
    }

    /// Per-target accept rates (fake, real).
    pub fn accept(&self) -> &ClassRates {
        &self.acc
    }

    /// Whether target `j` received any labeled request.
    pub fn is_informative(&self, j: NodeId) -> bool {
        self.informative.get(j.index()).copied().unwrap_or(false)
    }

    /// Count of informative targets.
    pub fn informative_count(&self) -> usize {
        self.informative.iter().filter(|b| **b).count()
    }
}

/// Runs the full estimation pipeline: tally labeled traffic, estimate
/// selection and accept rates under the given confidence priors, and mark
/// informative targets.
pub fn build_rate_table(
    graph: &RequestGraph,
    labels: &LabelTable,
    sigma: &ConfidencePrior,
    phi: &ConfidencePrior,
    clamp_eps: f64,
) -> Result<RateTable, RateError> {
    let counts = TargetCounts::accumulate(graph, labels)?;
    let sel = estimate_selection_rates(&counts, sigma, clamp_eps)?;
    let acc = estimate_accept_rates(&counts, phi, clamp_eps)?;
    let informative = (0..counts.len()).map(|j| counts.req_total(j) > 0.0).collect();
    RateTable::from_parts(sel, acc, informative)
}

fn validate_clamp(clamp_eps: f64) -> Result<(), RateError> {
    if !clamp_eps.is_finite() || !(0.0..0.5).contains(&clamp_eps) {
        return Err(RateError::InvalidClampEps(clamp_eps));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Graph: senders 0 (fake) and 1 (real) both ask targets 2 and 3;
    /// target 2 accepts only the real sender, target 3 accepts both.
    /// Node 4 receives nothing.
    fn fixture() -> (RequestGraph, LabelTable) {
        let graph = RequestGraph::build(
            5,
            vec![
                (0, 2, false),
                (0, 3, true),
                (1, 2, true),
                (1, 3, true),
            ],
        )
        .unwrap();
        let labels =
            LabelTable::from_labels(vec![Some(1.0), Some(0.0), None, None, None]).unwrap();
        (graph, labels)
    }

    #[test]
    fn accumulate_tallies_by_sender_class() {
        let (graph, labels) = fixture();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        assert_eq!(counts.req_fake(2), 1.0);
        assert_eq!(counts.req_real(2), 1.0);
        assert_eq!(counts.acc_fake(2), 0.0);
        assert_eq!(counts.acc_real(2), 1.0);
        assert_eq!(counts.req_total(3), 2.0);
        assert_eq!(counts.acc_total(3), 2.0);
        assert_eq!(counts.req_total(4), 0.0);
        assert_eq!(counts.sent_fake(), 2.0);
        assert_eq!(counts.sent_real(), 2.0);
    }

    #[test]
    fn accumulate_ignores_unlabeled_senders() {
        let graph = RequestGraph::build(3, vec![(0, 1, true), (2, 1, true)]).unwrap();
        let labels = LabelTable::from_labels(vec![Some(1.0), None, None]).unwrap();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        assert_eq!(counts.req_total(1), 1.0, "request from unlabeled node 2 must not count");
        assert_eq!(counts.sent_total(), 1.0);
    }

    #[test]
    fn fractional_labels_split_weight_between_classes() {
        let graph = RequestGraph::build(2, vec![(0, 1, true)]).unwrap();
        let labels = LabelTable::from_labels(vec![Some(0.7), None]).unwrap();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        assert!((counts.req_fake(1) - 0.7).abs() < 1e-15);
        assert!((counts.req_real(1) - 0.3).abs() < 1e-15);
        assert!((counts.acc_fake(1) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn parallel_accumulation_matches_sequential_on_hard_labels() {
        let (graph, labels) = fixture();
        let sequential = TargetCounts::accumulate(&graph, &labels).unwrap();
        for shard in [1, 2, 3, 100] {
            let parallel = TargetCounts::accumulate_parallel(&graph, &labels, shard).unwrap();
            assert_eq!(parallel, sequential, "shard size {shard}");
        }
    }

    #[test]
    fn zero_confidence_recovers_raw_frequencies() {
        let (graph, labels) = fixture();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        let acc = estimate_accept_rates(&counts, &ConfidencePrior::Uniform(0.0), 0.0).unwrap();
        // Target 2: fake sender rejected (0/1), real sender accepted (1/1).
        assert_eq!(acc.fake[2], 0.0);
        assert_eq!(acc.real[2], 1.0);
        let sel = estimate_selection_rates(&counts, &ConfidencePrior::Uniform(0.0), 0.0).unwrap();
        // Each class sent 2 requests, one to each target.
        assert_eq!(sel.fake[2], 0.5);
        assert_eq!(sel.real[3], 0.5);
        assert_eq!(sel.fake[4], 0.0);
    }

    #[test]
    fn infinite_confidence_collapses_to_overall_rates() {
        let (graph, labels) = fixture();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        let acc = estimate_accept_rates(&counts, &ConfidencePrior::Infinite, 0.0).unwrap();
        assert_eq!(acc.fake[2], 0.5, "target 2 accepted 1 of 2 overall");
        assert_eq!(acc.real[2], 0.5);
        let sel = estimate_selection_rates(&counts, &ConfidencePrior::Infinite, 0.0).unwrap();
        assert_eq!(sel.fake[2], 0.5, "target 2 got 2 of 4 labeled requests");
        assert_eq!(sel.real[2], 0.5);
    }

    #[test]
    fn shrinkage_moves_between_raw_and_overall() {
        let (graph, labels) = fixture();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        let acc = estimate_accept_rates(&counts, &ConfidencePrior::Uniform(1.0), 0.0).unwrap();
        // Target 2 fake: (0 + 1 * 0.5) / (1 + 1) = 0.25, between raw 0 and overall 0.5.
        assert!((acc.fake[2] - 0.25).abs() < 1e-12);
        // Target 2 real: (1 + 1 * 0.5) / (1 + 1) = 0.75.
        assert!((acc.real[2] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unasked_target_gets_global_mean_accept_rate() {
        let (graph, labels) = fixture();
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        let acc = estimate_accept_rates(&counts, &ConfidencePrior::Uniform(5.0), 0.0).unwrap();
        // 3 of 4 labeled requests were accepted overall.
        assert_eq!(acc.fake[4], 0.75);
        assert_eq!(acc.real[4], 0.75);
    }

    #[test]
    fn empty_training_set_is_an_error_for_selection() {
        let graph = RequestGraph::build(3, vec![(0, 1, true)]).unwrap();
        let labels = LabelTable::new(3); // nobody labeled
        let counts = TargetCounts::accumulate(&graph, &labels).unwrap();
        let err =
            estimate_selection_rates(&counts, &ConfidencePrior::Uniform(1.0), 0.0).unwrap_err();
        assert_eq!(err, RateError::EmptyTrainingSet);
        let err = build_rate_table(
            &graph,
            &labels,
            &ConfidencePrior::Uniform(1.0),
            &ConfidencePrior::Uniform(1.0),
            DEFAULT_CLAMP_EPS,
        )
        .unwrap_err();
        assert_eq!(err, RateError::EmptyTrainingSet);
    }

    #[test]
    fn clamping_respects_bounds() {
        let (graph, labels) = fixture();
        let table = build_rate_table(
            &graph,
            &labels,
            &ConfidencePrior::Uniform(0.0),
            &ConfidencePrior::Uniform(0.0),
            1e-6,
        )
        .unwrap();
        for j in 0..table.len() {
            let e = table.entry(NodeId(j as u32));
            if !e.informative {
                continue;
            }
            assert!(e.acc_fake >= 1e-6 && e.acc_fake <= 1.0 - 1e-6);
            assert!(e.acc_real >= 1e-6 && e.acc_real <= 1.0 - 1e-6);
            assert!(e.sel_fake >= 1e-6 && e.sel_fake <= 1.0);
            assert!(e.sel_real >= 1e-6 && e.sel_real <= 1.0);
        }
        // Raw 1.0 accept rate must have been pulled down to 1 - eps.
        let e3 = table.entry(NodeId(3));
        assert_eq!(e3.acc_fake, 1.0 - 1e-6);
    }

    #[test]
    fn entry_out_of_range_is_non_informative() {
        let (graph, labels) = fixture();
        let table = build_rate_table(
            &graph,
            &labels,
            &ConfidencePrior::Uniform(1.0),
            &ConfidencePrior::Uniform(1.0),
            DEFAULT_CLAMP_EPS,
        )
        .unwrap();
        assert!(!table.entry(NodeId(4)).informative, "nothing asked node 4");
        assert!(!table.entry(NodeId(999)).informative);
        assert_eq!(table.informative_count(), 2);
    }

    #[test]
    fn prior_validation_catches_bad_values() {
        let counts = TargetCounts::new(2);
        assert!(matches!(
            estimate_accept_rates(&counts, &ConfidencePrior::Uniform(-1.0), 0.0),
            Err(RateError::InvalidPrior { target: None, .. })
        ));
        assert!(matches!(
            estimate_accept_rates(
                &counts,
                &ConfidencePrior::PerTarget(vec![1.0]),
                0.0
            ),
            Err(RateError::PriorLengthMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(
            estimate_accept_rates(&counts, &ConfidencePrior::Uniform(f64::NAN), 0.0),
            Err(RateError::InvalidPrior { .. })
        ));
        assert!(matches!(
            estimate_accept_rates(&counts, &ConfidencePrior::Uniform(0.0), 0.6),
            Err(RateError::InvalidClampEps(_))
        ));
    }

    #[test]
    fn label_size_mismatch_is_detected() {
        let graph = RequestGraph::build(3, vec![(0, 1, true)]).unwrap();
        let labels = LabelTable::new(2);
        assert_eq!(
            TargetCounts::accumulate(&graph, &labels).unwrap_err(),
            RateError::LabelSizeMismatch { labels: 2, nodes: 3 }
        );
    }
}
