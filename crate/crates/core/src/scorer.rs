//! Posterior fake-probability scoring of unlabeled accounts.
//!
//! The score of a new account combines its prior fake probability with one
//! Bayes factor per request it sent. For a request to target `j`, the
//! evidence consists of two independent parts:
//!
//! - *selection*: fake and real senders pick targets at different rates, so
//!   merely asking `j` multiplies the fake odds by `sel_fake[j] / sel_real[j]`;
//! - *response*: `j` accepts fakes and reals at different rates, so the
//!   observed accept (or reject) multiplies the odds by the corresponding
//!   likelihood ratio.
//!
//! Scoring works in log-odds space (sums of per-edge deltas), which keeps
//! hundreds of tiny factors from underflowing. [`product_form_oracle`]
//! recomputes the same posterior as a literal normalized product with
//! explicit mantissa/exponent bookkeeping; it is slow and capped in size,
//! and exists so tests can check the fast path against an independent route.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{NodeId, RequestGraph};
use crate::labels::LabelTable;
use crate::rates::{RateEntry, RateTable};

/// Largest out-degree the product-form oracle accepts. The oracle is a
/// cross-check, not a production path, so it refuses bulk work.
pub const ORACLE_EDGE_LIMIT: usize = 200;

/// Which evidence enters the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Selection and response evidence (the full model).
    Full,
    /// Selection evidence only: scores depend on who was asked, not on the
    /// answers.
    SelectionOnly,
    /// Response evidence only: equivalent to infinite selection shrinkage.
    ResponseOnly,
}

/// Prior fake probability of the account being scored.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// One prior for every account (e.g. the population fake share).
    Global(f64),
    /// An individual prior per node; must match the node count.
    PerNode(Vec<f64>),
}

impl Prior {
    fn validate(&self, n: usize) -> Result<(), ScoreError> {
        match self {
            Prior::Global(p) => validate_probability(*p),
            Prior::PerNode(ps) => {
                if ps.len() != n {
                    return Err(ScoreError::PriorLengthMismatch {
                        expected: n,
                        got: ps.len(),
                    });
                }
                ps.iter().try_for_each(|p| validate_probability(*p))
            }
        }
    }

    fn for_node(&self, node: NodeId) -> f64 {
        match self {
            Prior::Global(p) => *p,
            Prior::PerNode(ps) => ps[node.index()],
        }
    }
}

fn validate_probability(p: f64) -> Result<(), ScoreError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(ScoreError::InvalidPrior(p));
    }
    Ok(())
}

/// Scoring problems.
#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    /// The requested node id is outside the graph.
    #[error("node {node} is outside the graph (n = {n})")]
    UnknownNode { node: NodeId, n: usize },
    /// A prior probability was outside `[0, 1]`.
    #[error("prior probability {0} is outside [0, 1]")]
    InvalidPrior(f64),
    /// A per-node prior vector has the wrong length.
    #[error("per-node prior has length {got}, expected {expected}")]
    PriorLengthMismatch { expected: usize, got: usize },
    /// The label table does not cover the graph's node range.
    #[error("label table covers {labels} nodes but the graph has {nodes}")]
    LabelSizeMismatch { labels: usize, nodes: usize },
    /// The clamp width must satisfy `0 <= eps < 0.5`.
    #[error("clamp width must be in [0, 0.5), got {0}")]
    InvalidClampEps(f64),
    /// The oracle refuses accounts with more requests than its cap.
    #[error("oracle limit: node sent {count} requests, cap is {limit}")]
    TooManyEdgesForOracle { count: usize, limit: usize },
    /// Both class products vanished (possible only with a zero clamp width),
    /// leaving the posterior 0/0.
    #[error("posterior is indeterminate: both class likelihoods are zero")]
    DegenerateProduct,
}

/// How to score: prior, evidence variant, and numeric guards.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringConfig {
    pub prior: Prior,
    pub variant: Variant,
    /// Safety clamp re-applied to rates at scoring time, in case a loaded
    /// table was built with a smaller (or zero) clamp than desired.
    pub clamp_eps: f64,
    /// Record per-edge log-odds contributions in each entry.
    pub record_contributions: bool,
}

impl ScoringConfig {
    pub fn new(prior: Prior, variant: Variant) -> Self {
        ScoringConfig {
            prior,
            variant,
            clamp_eps: crate::rates::DEFAULT_CLAMP_EPS,
            record_contributions: false,
        }
    }

    pub fn with_clamp_eps(mut self, clamp_eps: f64) -> Self {
        self.clamp_eps = clamp_eps;
        self
    }

    pub fn with_contributions(mut self, record: bool) -> Self {
        self.record_contributions = record;
        self
    }

    fn validate(&self, n: usize) -> Result<(), ScoreError> {
        if !self.clamp_eps.is_finite() || !(0.0..0.5).contains(&self.clamp_eps) {
            return Err(ScoreError::InvalidClampEps(self.clamp_eps));
        }
        self.prior.validate(n)
    }
}

/// Log-odds evidence from one request, for explanation output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeContribution {
    pub target: NodeId,
    pub accepted: bool,
    /// Log-odds delta from the target having been selected.
    pub selection: f64,
    /// Log-odds delta from the target's response.
    pub response: f64,
}

/// One scored account.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEntry {
    pub node: NodeId,
    /// Posterior fake probability, `sigmoid(log_odds)`.
    pub p_fake: f64,
    /// Posterior log-odds of being fake.
    pub log_odds: f64,
    /// Number of requests that carried evidence (informative targets only).
    pub edges_used: u32,
    /// Per-edge deltas, present when requested in the config.
    pub contributions: Option<Vec<EdgeContribution>>,
}

/// Scores for a population of accounts, in ascending node order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    entries: Vec<ScoreEntry>,
    edges_visited: u64,
}

impl ScoreTable {
    pub fn entries(&self) -> &[ScoreEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for `node`, if it was scored.
    pub fn get(&self, node: NodeId) -> Option<&ScoreEntry> {
        self.entries
            .binary_search_by_key(&node, |e| e.node)
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Total out-edges examined while scoring. Scoring looks at each scored
    /// account's requests exactly once, so this grows linearly with the
    /// edge volume of the scored population.
    pub fn edges_visited(&self) -> u64 {
        self.edges_visited
    }

    /// Expands to a dense per-node vector of length `n`, with `fill` for
    /// nodes that were not scored.
    pub fn to_dense(&self, n: usize, fill: f64) -> Vec<f64> {
        let mut dense = vec![fill; n];
        for e in &self.entries {
            dense[e.node.index()] = e.p_fake;
        }
        dense
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-odds of a probability; `0 -> -inf`, `1 -> +inf`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn clamp_entry(entry: RateEntry, eps: f64) -> RateEntry {
    RateEntry {
        sel_fake: entry.sel_fake.clamp(eps, 1.0),
        sel_real: entry.sel_real.clamp(eps, 1.0),
        acc_fake: entry.acc_fake.clamp(eps, 1.0 - eps),
        acc_real: entry.acc_real.clamp(eps, 1.0 - eps),
        informative: entry.informative,
    }
}

/// The `(selection, response)` log-odds deltas contributed by one request,
/// already masked by `variant`. A non-informative target contributes
/// `(0, 0)`.
pub fn edge_log_odds(
    entry: &RateEntry,
    accepted: bool,
    variant: Variant,
    clamp_eps: f64,
) -> (f64, f64) {
    if !entry.informative {
        return (0.0, 0.0);
    }
    let e = clamp_entry(*entry, clamp_eps);
    let selection = match variant {
        Variant::Full | Variant::SelectionOnly => e.sel_fake.ln() - e.sel_real.ln(),
        Variant::ResponseOnly => 0.0,
    };
    let response = match variant {
        Variant::Full | Variant::ResponseOnly => {
            if accepted {
                e.acc_fake.ln() - e.acc_real.ln()
            } else {
                (1.0 - e.acc_fake).ln() - (1.0 - e.acc_real).ln()
            }
        }
        Variant::SelectionOnly => 0.0,
    };
    (selection, response)
}

/// Requests of `user` in ascending target order, fixing the summation order
/// regardless of input edge order.
fn sorted_targets(graph: &RequestGraph, user: NodeId) -> Vec<(NodeId, bool)> {
    let mut targets = graph.out_edges(user).to_vec();
    targets.sort_unstable_by_key(|(t, _)| *t);
    targets
}

/// Scores a single account: prior log-odds plus the per-request deltas,
/// summed over targets in ascending id order.
pub fn score_user(
    graph: &RequestGraph,
    rates: &RateTable,
    user: NodeId,
    config: &ScoringConfig,
) -> Result<ScoreEntry, ScoreError> {
    if user.index() >= graph.node_count() {
        return Err(ScoreError::UnknownNode {
            node: user,
            n: graph.node_count(),
        });
    }
    config.validate(graph.node_count())?;
    Ok(score_user_unchecked(graph, rates, user, config))
}

/// Scoring body without the per-call validation, for use in bulk scoring
/// where the config was validated once up front.
fn score_user_unchecked(
    graph: &RequestGraph,
    rates: &RateTable,
    user: NodeId,
    config: &ScoringConfig,
) -> ScoreEntry {
    let prior = config.prior.for_node(user);
    let mut log_odds = logit(prior);
    let mut edges_used = 0u32;
    let mut contributions = config.record_contributions.then(Vec::new);

    for (target, accepted) in sorted_targets(graph, user) {
        let entry = rates.entry(target);
        if !entry.informative {
            continue;
        }
        let (selection, response) =
            edge_log_odds(&entry, accepted, config.variant, config.clamp_eps);
        log_odds += selection + response;
        edges_used += 1;
        if let Some(list) = contributions.as_mut() {
            list.push(EdgeContribution {
                target,
                accepted,
                selection,
                response,
            });
        }
    }

    ScoreEntry {
        node: user,
        p_fake: sigmoid(log_odds),
        log_odds,
        edges_used,
        contributions,
    }
}

/// Scores every unlabeled account in parallel. Labeled accounts are skipped;
/// entries come back in ascending node order regardless of thread schedule.
pub fn score_all(
    graph: &RequestGraph,
    rates: &RateTable,
    labels: &LabelTable,
    config: &ScoringConfig,
) -> Result<ScoreTable, ScoreError> {
    if labels.len() != graph.node_count() {
        return Err(ScoreError::LabelSizeMismatch {
            labels: labels.len(),
            nodes: graph.node_count(),
        });
    }
    config.validate(graph.node_count())?;
    let (_, unknown) = labels.split_known_unknown();
    let entries: Vec<ScoreEntry> = unknown
        .par_iter()
        .map(|&node| score_user_unchecked(graph, rates, node, config))
        .collect();
    let edges_visited = unknown
        .iter()
        .map(|&node| graph.out_degree(node) as u64)
        .sum();
    Ok(ScoreTable {
        entries,
        edges_visited,
    })
}

// --- product-form oracle ------------------------------------------------

/// A positive number as `mantissa * 2^exp2`, renormalized so long products
/// never underflow or overflow.
#[derive(Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exp2: i64,
}

impl Scaled {
    fn new(x: f64) -> Self {
        let mut s = Scaled {
            mantissa: x,
            exp2: 0,
        };
        s.normalize();
        s
    }

    fn mul(&mut self, x: f64) {
        self.mantissa *= x;
        self.normalize();
    }

    fn normalize(&mut self) {
        if self.mantissa == 0.0 {
            self.exp2 = 0;
            return;
        }
        const LO: f64 = 1e-150;
        const HI: f64 = 1e150;
        const SHIFT: i64 = 512;
        let scale_up = (SHIFT as f64).exp2();
        let scale_down = (-SHIFT as f64).exp2();
        while self.mantissa.abs() < LO {
            self.mantissa *= scale_up;
            self.exp2 -= SHIFT;
        }
        while self.mantissa.abs() > HI {
            self.mantissa *= scale_down;
            self.exp2 += SHIFT;
        }
    }

    /// `self / other` as a plain f64, saturating to `inf`/`0` when the
    /// exponent gap exceeds the double range.
    fn ratio(self, other: Scaled) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        if other.mantissa == 0.0 {
            return f64::INFINITY;
        }
        let d = (self.exp2 - other.exp2).clamp(-4096, 4096) as f64;
        (self.mantissa / other.mantissa) * d.exp2()
    }
}

/// Recomputes one account's posterior as the literal normalized product
///
/// ```text
/// p = prior * F / (prior * F + (1 - prior) * R)
/// ```
///
/// where `F` (resp. `R`) multiplies, over informative targets, the selected
/// variant's selection rate and response likelihood under the fake (resp.
/// real) class. Partial products carry an explicit power-of-two exponent, so
/// no intermediate is ever flushed to zero or infinity.
///
/// This is deliberately an independent route from [`score_user`] — products
/// instead of log sums — for cross-checking. It refuses accounts with more
/// than [`ORACLE_EDGE_LIMIT`] requests.
pub fn product_form_oracle(
    graph: &RequestGraph,
    rates: &RateTable,
    user: NodeId,
    config: &ScoringConfig,
) -> Result<f64, ScoreError> {
    if user.index() >= graph.node_count() {
        return Err(ScoreError::UnknownNode {
            node: user,
            n: graph.node_count(),
        });
    }
    config.validate(graph.node_count())?;
    let count = graph.out_degree(user);
    if count > ORACLE_EDGE_LIMIT {
        return Err(ScoreError::TooManyEdgesForOracle {
            count,
            limit: ORACLE_EDGE_LIMIT,
        });
    }

    let prior = config.prior.for_node(user);
    if prior == 0.0 {
        return Ok(0.0);
    }
    if prior == 1.0 {
        return Ok(1.0);
    }

    let mut fake_mass = Scaled::new(prior);
    let mut real_mass = Scaled::new(1.0 - prior);
    for (target, accepted) in sorted_targets(graph, user) {
        let entry = rates.entry(target);
        if !entry.informative {
            continue;
        }
        let e = clamp_entry(entry, config.clamp_eps);
        let (mut fake_factor, mut real_factor) = (1.0, 1.0);
        if matches!(config.variant, Variant::Full | Variant::SelectionOnly) {
            fake_factor *= e.sel_fake;
            real_factor *= e.sel_real;
        }
        if matches!(config.variant, Variant::Full | Variant::ResponseOnly) {
            if accepted {
                fake_factor *= e.acc_fake;
                real_factor *= e.acc_real;
            } else {
                fake_factor *= 1.0 - e.acc_fake;
                real_factor *= 1.0 - e.acc_real;
            }
        }
        fake_mass.mul(fake_factor);
        real_mass.mul(real_factor);
    }

    if fake_mass.mantissa == 0.0 && real_mass.mantissa == 0.0 {
        return Err(ScoreError::DegenerateProduct);
    }
    let odds = fake_mass.ratio(real_mass);
    if odds.is_infinite() {
        return Ok(1.0);
    }
    Ok(if odds <= 1.0 {
        odds / (1.0 + odds)
    } else {
        1.0 / (1.0 + 1.0 / odds)
    })
}
