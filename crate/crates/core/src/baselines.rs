//! Comparison detectors: reject rate, trust propagation, and local belief
//! propagation.
//!
//! The propagation baselines run on the *accepted* subgraph viewed as an
//! undirected simple graph, since an accepted request is the only mutual
//! relationship in the data. All of them emit one score per node; the
//! orientation (higher = more trusted vs. more fake-like) is documented per
//! function, and the evaluation layer normalizes to fake-likeness.

use thiserror::Error;

use crate::graph::{NodeId, RequestGraph};
use crate::labels::LabelTable;

/// Problems while running a baseline.
#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    /// Trust propagation needs at least one seed node.
    #[error("empty seed set: trust propagation needs at least one trusted node")]
    EmptySeedSet,
    /// A seed id is outside the graph.
    #[error("seed node {node} is outside the graph (n = {n})")]
    SeedOutOfRange { node: NodeId, n: usize },
    /// The label table does not cover the graph's node range.
    #[error("label table covers {labels} nodes but the graph has {nodes}")]
    LabelSizeMismatch { labels: usize, nodes: usize },
}

/// Undirected, deduplicated view of the accepted edges.
#[derive(Debug, Clone)]
pub struct AcceptedView {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl AcceptedView {
    /// Collapses accepted requests into undirected links; reciprocal
    /// accepted requests become a single link.
    pub fn from_graph(graph: &RequestGraph) -> Self {
        let n = graph.node_count();
        let mut pairs: Vec<(u32, u32)> = graph
            .edges()
            .iter()
            .filter(|e| e.accepted)
            .map(|e| {
                let (a, b) = (e.source.0, e.target.0);
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            adj[a as usize].push(NodeId(b));
            adj[b as usize].push(NodeId(a));
        }
        for neighbors in &mut adj {
            neighbors.sort_unstable();
        }
        AcceptedView {
            adj,
            edge_count: pairs.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Undirected link count after deduplication.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v.index()].len()
    }

    /// Mean undirected degree, `2E / n` (0 for an empty graph).
    pub fn average_degree(&self) -> f64 {
        if self.adj.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / self.adj.len() as f64
    }
}

/// Fraction of a user's requests that were rejected; 0 for users who sent
/// none. Higher = more fake-like.
pub fn reject_rate(graph: &RequestGraph, user: NodeId) -> f64 {
    let sent = graph.out_edges(user);
    if sent.is_empty() {
        return 0.0;
    }
    let rejected = sent.iter().filter(|(_, accepted)| !accepted).count();
    rejected as f64 / sent.len() as f64
}

/// [`reject_rate`] for every node.
pub fn reject_rate_all(graph: &RequestGraph) -> Vec<f64> {
    graph.nodes().map(|v| reject_rate(graph, v)).collect()
}

/// Default number of trust-propagation rounds: `ceil(log2 n)`, the early
/// termination that keeps trust from fully mixing across the whole graph.
pub fn default_trust_iterations(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize
}

/// Seed-based trust propagation over the accepted subgraph.
///
/// Trust starts uniformly on the seeds (total mass 1) and each round every
/// node redistributes its trust equally over its neighbors; isolated nodes
/// keep theirs, so total mass is conserved. After `iterations` rounds the
/// result is degree-normalized. Higher = more trusted; isolated nodes score
/// 0.
pub fn trust_propagation(
    view: &AcceptedView,
    seeds: &[NodeId],
    iterations: usize,
) -> Result<Vec<f64>, BaselineError> {
    let n = view.node_count();
    if seeds.is_empty() {
        return Err(BaselineError::EmptySeedSet);
    }
    let mut seed_flags = vec![false; n];
    for &seed in seeds {
        if seed.index() >= n {
            return Err(BaselineError::SeedOutOfRange { node: seed, n });
        }
        seed_flags[seed.index()] = true;
    }
    let seed_count = seed_flags.iter().filter(|f| **f).count();

    let mut trust = vec![0.0; n];
    for (i, flag) in seed_flags.iter().enumerate() {
        if *flag {
            trust[i] = 1.0 / seed_count as f64;
        }
    }
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        for (v, slot) in next.iter_mut().enumerate() {
            let v = NodeId(v as u32);
            if view.degree(v) == 0 {
                *slot = trust[v.index()];
            } else {
                *slot = view
                    .neighbors(v)
                    .iter()
                    .map(|&u| trust[u.index()] / view.degree(u) as f64)
                    .sum();
            }
        }
        std::mem::swap(&mut trust, &mut next);
    }

    Ok((0..n)
        .map(|v| {
            let d = view.degree(NodeId(v as u32));
            if d == 0 {
                0.0
            } else {
                trust[v] / d as f64
            }
        })
        .collect())
}

/// Trusted seeds for [`trust_propagation`]: labeled nodes on the real side
/// (label `< 0.5`).
pub fn trusted_seeds(labels: &LabelTable) -> Vec<NodeId> {
    labels
        .known()
        .filter(|&(_, value)| value < 0.5)
        .map(|(node, _)| node)
        .collect()
}

/// Settings for [`local_belief`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBeliefParams {
    /// Edge weight; `None` picks half the inverse average degree, which
    /// keeps neighbor influence bounded on typical graphs.
    pub weight: Option<f64>,
    /// Prior belief for nodes labeled fake.
    pub q_fake: f64,
    /// Prior belief for nodes labeled real.
    pub q_real: f64,
    /// Prior belief for unlabeled nodes.
    pub q_unknown: f64,
    pub max_iterations: usize,
    /// Stop once no belief moves more than this between rounds.
    pub tolerance: f64,
}

impl Default for LocalBeliefParams {
    fn default() -> Self {
        LocalBeliefParams {
            weight: None,
            q_fake: 0.9,
            q_real: 0.1,
            q_unknown: 0.5,
            max_iterations: 30,
            tolerance: 1e-4,
        }
    }
}

/// Local belief update over the accepted subgraph: each round recomputes
///
/// ```text
/// p[v] = q[v] + sum over neighbors u of  w * (p[u] - 0.5)
/// ```
///
/// with synchronous (Jacobi) updates, clamped to `[0, 1]`, until beliefs
/// stop moving or `max_iterations` is hit. Priors `q` come from the labels;
/// fractional labels interpolate between `q_real` and `q_fake`. Higher =
/// more fake-like.
pub fn local_belief(
    view: &AcceptedView,
    labels: &LabelTable,
    params: &LocalBeliefParams,
) -> Result<Vec<f64>, BaselineError> {
    let n = view.node_count();
    if labels.len() != n {
        return Err(BaselineError::LabelSizeMismatch {
            labels: labels.len(),
            nodes: n,
        });
    }
    let weight = params.weight.unwrap_or_else(|| {
        let avg = view.average_degree();
        if avg > 0.0 {
            0.5 / avg
        } else {
            0.0
        }
    });

    let prior: Vec<f64> = (0..n)
        .map(|v| match labels.get(NodeId(v as u32)) {
            Some(value) => params.q_real + (params.q_fake - params.q_real) * value,
            None => params.q_unknown,
        })
        .collect();

    let mut belief = prior.clone();
    let mut next = vec![0.0; n];
    for _ in 0..params.max_iterations {
        let mut max_delta: f64 = 0.0;
        for (v, slot) in next.iter_mut().enumerate() {
            let v_id = NodeId(v as u32);
            let influence: f64 = view
                .neighbors(v_id)
                .iter()
                .map(|&u| weight * (belief[u.index()] - 0.5))
                .sum();
            let updated = (prior[v] + influence).clamp(0.0, 1.0);
            max_delta = max_delta.max((updated - belief[v]).abs());
            *slot = updated;
        }
        std::mem::swap(&mut belief, &mut next);
        if max_delta <= params.tolerance {
            break;
        }
    }
    Ok(belief)
}
