//! Account labels: known fake/real annotations over part of the population.
//!
//! A label is the probability that the account is fake, so `1.0` marks a
//! known fake, `0.0` a known real account, and fractional values express
//! annotation confidence. Accounts without a label are the *unknown* (new)
//! population that the scorer targets.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

use crate::graph::NodeId;

/// Problems with label values.
#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    /// A label probability was outside `[0, 1]` (or not finite).
    #[error("label {value} for node {node} is outside [0, 1]")]
    OutOfRange { node: NodeId, value: f64 },
    /// An operation that flips labels needs exact 0/1 labels.
    #[error("node {node} has fractional label {value}; label flipping requires hard 0/1 labels")]
    NonBinaryLabel { node: NodeId, value: f64 },
}

/// Per-node labels for nodes `0..n`; `None` means unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    labels: Vec<Option<f64>>,
}

impl LabelTable {
    /// A table of `n` unknown nodes.
    pub fn new(n: usize) -> Self {
        LabelTable {
            labels: vec![None; n],
        }
    }

    /// Wraps an explicit label vector, validating every present value.
    pub fn from_labels(labels: Vec<Option<f64>>) -> Result<Self, LabelError> {
        for (i, label) in labels.iter().enumerate() {
            if let Some(value) = *label {
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(LabelError::OutOfRange {
                        node: NodeId(i as u32),
                        value,
                    });
                }
            }
        }
        Ok(LabelTable { labels })
    }

    /// Number of nodes covered (labeled or not).
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The label of `node`, if known.
    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.labels[node.index()]
    }

    /// Sets or clears one label.
    pub fn set(&mut self, node: NodeId, label: Option<f64>) -> Result<(), LabelError> {
        if let Some(value) = label {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(LabelError::OutOfRange { node, value });
            }
        }
        self.labels[node.index()] = label;
        Ok(())
    }

    /// Splits the population into (labeled, unlabeled) node ids, each in
    /// ascending order.
    pub fn split_known_unknown(&self) -> (Vec<NodeId>, Vec<NodeId>) {
        let mut known = Vec::new();
        let mut unknown = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            let id = NodeId(i as u32);
            match label {
                Some(_) => known.push(id),
                None => unknown.push(id),
            }
        }
        (known, unknown)
    }

    /// Iterator over `(node, label)` for labeled nodes, ascending by id.
    pub fn known(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|v| (NodeId(i as u32), v)))
    }

    /// Number of labeled nodes.
    pub fn known_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Returns a copy where each hard 0/1 label was independently flipped
    /// with probability `flip_prob`. Unknown nodes stay unknown. Models
    /// annotation error in the training labels.
    ///
    /// Deterministic in `seed`; nodes are visited in ascending id order.
    pub fn inject_noise(&self, flip_prob: f64, seed: u64) -> Result<LabelTable, LabelError> {
        assert!(
            (0.0..=1.0).contains(&flip_prob),
            "flip probability must be in [0, 1], got {flip_prob}"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut flipped = self.labels.clone();
        for (i, slot) in flipped.iter_mut().enumerate() {
            if let Some(value) = *slot {
                if value != 0.0 && value != 1.0 {
                    return Err(LabelError::NonBinaryLabel {
                        node: NodeId(i as u32),
                        value,
                    });
                }
                // Draw for every labeled node so the stream position does not
                // depend on the outcome of earlier draws.
                if rng.random::<f64>() < flip_prob {
                    *slot = Some(1.0 - value);
                }
            }
        }
        Ok(LabelTable { labels: flipped })
    }
}
