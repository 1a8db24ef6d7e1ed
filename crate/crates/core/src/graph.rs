//! Directed friend-request graph.
//!
//! Every edge is one friend request `source -> target` together with the
//! target's response (accepted or rejected). At most one request per ordered
//! pair is allowed and self-requests are rejected at construction, so the
//! multiset of requests a user sent is exactly their out-neighborhood.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Dense node index, contiguous in `0..n` for a graph on `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    /// The index as a `usize`, for direct vector addressing.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(raw: u32) -> Self {
        NodeId(raw)
    }
}

/// One friend request; `accepted` is the target's response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub accepted: bool,
}

/// Why an edge list cannot form a [`RequestGraph`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    /// The same ordered pair appeared more than once in the input.
    #[error("duplicate request {0} -> {1}")]
    DuplicateEdge(NodeId, NodeId),
    /// A node sent a request to itself.
    #[error("self-request at node {0}")]
    SelfLoop(NodeId),
    /// An endpoint is outside `0..n` (fields: source, target, n).
    #[error("edge {0} -> {1} references a node outside 0..{2}")]
    NodeOutOfRange(u32, u32, usize),
}

/// Directed request graph with per-edge responses and both adjacency
/// directions precomputed.
///
/// Out-edges of `i` are the requests `i` sent; in-edges of `j` are the
/// requests `j` received. Both lists preserve input order.
#[derive(Debug, Clone)]
pub struct RequestGraph {
    n: usize,
    edges: Vec<RequestEdge>,
    out_adj: Vec<Vec<(NodeId, bool)>>,
    in_adj: Vec<Vec<(NodeId, bool)>>,
}

impl RequestGraph {
    /// Builds a graph on nodes `0..n` from `(source, target, accepted)`
    /// triples, validating every edge.
    pub fn build(
        n: usize,
        edges: impl IntoIterator<Item = (u32, u32, bool)>,
    ) -> Result<Self, GraphError> {
        let iter = edges.into_iter();
        let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(iter.size_hint().0);
        let mut edge_list = Vec::with_capacity(iter.size_hint().0);
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];

        for (source, target, accepted) in iter {
            if source as usize >= n || target as usize >= n {
                return Err(GraphError::NodeOutOfRange(source, target, n));
            }
            if source == target {
                return Err(GraphError::SelfLoop(NodeId(source)));
            }
            if !seen.insert((source, target)) {
                return Err(GraphError::DuplicateEdge(NodeId(source), NodeId(target)));
            }
            let (source, target) = (NodeId(source), NodeId(target));
            edge_list.push(RequestEdge {
                source,
                target,
                accepted,
            });
            out_adj[source.index()].push((target, accepted));
            in_adj[target.index()].push((source, accepted));
        }

        Ok(RequestGraph {
            n,
            edges: edge_list,
            out_adj,
            in_adj,
        })
    }

    /// Number of nodes `n`; valid ids are `0..n`.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of requests.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All requests in input order.
    pub fn edges(&self) -> &[RequestEdge] {
        &self.edges
    }

    /// Iterator over all node ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n as u32).map(NodeId)
    }

    /// Requests sent by `i`: `(target, accepted)` in input order.
    pub fn out_edges(&self, i: NodeId) -> &[(NodeId, bool)] {
        &self.out_adj[i.index()]
    }

    /// Requests received by `j`: `(source, accepted)` in input order.
    pub fn in_edges(&self, j: NodeId) -> &[(NodeId, bool)] {
        &self.in_adj[j.index()]
    }

    /// Number of requests `i` sent.
    pub fn out_degree(&self, i: NodeId) -> usize {
        self.out_adj[i.index()].len()
    }

    /// Number of requests `j` received.
    pub fn in_degree(&self, j: NodeId) -> usize {
        self.in_adj[j.index()].len()
    }
}
