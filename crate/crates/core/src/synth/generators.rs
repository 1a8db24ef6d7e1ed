//! Directed request-graph generators.
//!
//! Each generator emits a duplicate-free edge list `(source, target)` on
//! nodes `0..n`, with no self-loops, deterministically from the supplied
//! RNG. Responses are attached later by the simulation layer.
//!
//! Dense pair spaces (uniform random, block model) are sampled with
//! geometric skips, so the cost is proportional to the number of edges
//! produced rather than the number of candidate pairs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ClassAssignment, SynthError};

/// How often a stub re-pairing is retried before the stub pair is dropped
/// in the fixed-degree-sequence generator.
const RESWAP_ATTEMPTS: usize = 50;

// --- uniform random -----------------------------------------------------

/// Uniform random digraph: every ordered pair `(i, j)`, `i != j`, is an
/// edge independently with probability `edge_prob`.
///
/// Pairs are visited in a fixed row-major order with geometric skips, so the
/// run time is `O(edges)` and the output is sorted by `(source, target)`.
pub fn gen_uniform_random(
    n: usize,
    edge_prob: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(u32, u32)>, SynthError> {
    if !(0.0..=1.0).contains(&edge_prob) || !edge_prob.is_finite() {
        return Err(SynthError::InvalidConfig(format!(
            "edge probability must be in [0, 1], got {edge_prob}"
        )));
    }
    if n < 2 || edge_prob == 0.0 {
        return Ok(Vec::new());
    }
    let row = (n - 1) as u64;
    let total = n as u64 * row;
    let mut edges = Vec::new();
    let slot_to_pair = |s: u64| -> (u32, u32) {
        let i = (s / row) as u32;
        let r = (s % row) as u32;
        let j = if r >= i { r + 1 } else { r };
        (i, j)
    };
    if edge_prob >= 1.0 {
        edges.extend((0..total).map(slot_to_pair));
        return Ok(edges);
    }
    let log_q = (1.0 - edge_prob).ln();
    let mut slot: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        // A pathological draw can produce a huge skip; saturate instead of
        // wrapping past the end.
        let skip = if skip >= total as f64 { total } else { skip as u64 };
        slot = slot.saturating_add(skip);
        if slot >= total {
            break;
        }
        edges.push(slot_to_pair(slot));
        slot += 1;
        if slot >= total {
            break;
        }
    }
    Ok(edges)
}

// --- fixed degree sequence ----------------------------------------------

/// A distribution over node degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum DegreeDist {
    /// `P(d) ∝ d^-exponent` on `min..=cap`.
    PowerLaw { exponent: f64, min: u32, cap: u32 },
    /// Explicit `(degree, weight)` support.
    Histogram(Vec<(u32, f64)>),
}

impl DegreeDist {
    pub fn validate(&self) -> Result<(), SynthError> {
        match self {
            DegreeDist::PowerLaw { exponent, min, cap } => {
                if !exponent.is_finite() {
                    return Err(SynthError::InvalidConfig(format!(
                        "power-law exponent must be finite, got {exponent}"
                    )));
                }
                if *min == 0 || min > cap {
                    return Err(SynthError::InvalidConfig(format!(
                        "power-law support must satisfy 1 <= min <= cap, got {min}..={cap}"
                    )));
                }
            }
            DegreeDist::Histogram(entries) => {
                if entries.is_empty() {
                    return Err(SynthError::InvalidConfig(
                        "degree histogram is empty".into(),
                    ));
                }
                let mut total = 0.0;
                for (d, w) in entries {
                    if !w.is_finite() || *w < 0.0 {
                        return Err(SynthError::InvalidConfig(format!(
                            "degree {d} has invalid weight {w}"
                        )));
                    }
                    total += w;
                }
                if total <= 0.0 {
                    return Err(SynthError::InvalidConfig(
                        "degree histogram has zero total weight".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn support(&self) -> Vec<(u32, f64)> {
        match self {
            DegreeDist::PowerLaw { exponent, min, cap } => (*min..=*cap)
                .map(|d| (d, (d as f64).powf(-exponent)))
                .collect(),
            DegreeDist::Histogram(entries) => entries.clone(),
        }
    }

    /// Expected degree under the distribution.
    pub fn mean(&self) -> f64 {
        let support = self.support();
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        support.iter().map(|(d, w)| *d as f64 * w).sum::<f64>() / total
    }

    /// Picks the power-law lower cutoff on `1..=cap` whose mean is closest
    /// to `target_mean`, holding `exponent` and `cap` fixed.
    pub fn power_law_with_mean(
        exponent: f64,
        cap: u32,
        target_mean: f64,
    ) -> Result<DegreeDist, SynthError> {
        if cap == 0 || !target_mean.is_finite() || target_mean <= 0.0 {
            return Err(SynthError::InvalidConfig(format!(
                "power-law mean search needs cap >= 1 and a positive target, got cap {cap}, target {target_mean}"
            )));
        }
        let mut best = None;
        for min in 1..=cap {
            let candidate = DegreeDist::PowerLaw { exponent, min, cap };
            candidate.validate()?;
            let gap = (candidate.mean() - target_mean).abs();
            match best {
                None => best = Some((gap, candidate)),
                Some((best_gap, _)) if gap < best_gap => best = Some((gap, candidate)),
                _ => {}
            }
        }
        Ok(best.expect("support 1..=cap is non-empty").1)
    }
}

/// Cumulative-weight sampler over a small discrete support.
struct DiscreteSampler {
    values: Vec<u32>,
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    fn new(support: &[(u32, f64)]) -> Self {
        let mut running = 0.0;
        let mut values = Vec::with_capacity(support.len());
        let mut cumulative = Vec::with_capacity(support.len());
        for (v, w) in support {
            running += w;
            values.push(*v);
            cumulative.push(running);
        }
        DiscreteSampler { values, cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        let total = *self.cumulative.last().unwrap();
        let target = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        self.values[idx.min(self.values.len() - 1)]
    }
}

/// Edges plus the number of stub pairs that had to be discarded.
#[derive(Debug, Clone)]
pub struct FixedDegreeOutput {
    pub edges: Vec<(u32, u32)>,
    /// Stub pairs dropped because no conflict-free re-pairing was found.
    /// Small relative to the edge count on any non-adversarial sequence.
    pub dropped: usize,
}

/// Fixed-degree-sequence digraph: each node draws one degree `d_i`, used as
/// both its out- and in-stub count, and out-stubs are matched to a shuffled
/// permutation of in-stubs.
///
/// Conflicting matches (self-loop or duplicate pair) are re-paired by
/// swapping with a random later in-stub; a pair still conflicted after
/// [`RESWAP_ATTEMPTS`] tries is dropped and counted.
pub fn gen_fixed_degrees(
    n: usize,
    degrees: &DegreeDist,
    rng: &mut ChaCha8Rng,
) -> Result<FixedDegreeOutput, SynthError> {
    degrees.validate()?;
    if n < 2 {
        return Err(SynthError::InvalidConfig(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let sampler = DiscreteSampler::new(&degrees.support());
    let node_degree: Vec<u32> = (0..n).map(|_| sampler.sample(rng)).collect();
    let stub_count: usize = node_degree.iter().map(|&d| d as usize).sum();
    if stub_count == 0 {
        return Err(SynthError::DegenerateSequence);
    }

    let mut out_stubs = Vec::with_capacity(stub_count);
    let mut in_stubs = Vec::with_capacity(stub_count);
    for (i, &d) in node_degree.iter().enumerate() {
        for _ in 0..d {
            out_stubs.push(i as u32);
            in_stubs.push(i as u32);
        }
    }
    in_stubs.shuffle(rng);

    let mut seen = std::collections::HashSet::with_capacity(stub_count);
    let mut edges = Vec::with_capacity(stub_count);
    let mut dropped = 0usize;
    for k in 0..stub_count {
        let source = out_stubs[k];
        let mut paired = false;
        for _ in 0..RESWAP_ATTEMPTS {
            let target = in_stubs[k];
            if source != target && !seen.contains(&(source, target)) {
                seen.insert((source, target));
                edges.push((source, target));
                paired = true;
                break;
            }
            if k + 1 >= stub_count {
                break; // nothing left to swap with
            }
            let swap_with = rng.random_range(k + 1..stub_count);
            in_stubs.swap(k, swap_with);
        }
        if !paired {
            dropped += 1;
        }
    }
    Ok(FixedDegreeOutput { edges, dropped })
}

// --- two-block model ----------------------------------------------------

/// Per-ordered-block edge probabilities of a two-class block model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockProbs {
    pub real_to_real: f64,
    pub real_to_fake: f64,
    pub fake_to_real: f64,
    pub fake_to_fake: f64,
}

impl BlockProbs {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, p) in [
            ("real_to_real", self.real_to_real),
            ("real_to_fake", self.real_to_fake),
            ("fake_to_real", self.fake_to_real),
            ("fake_to_fake", self.fake_to_fake),
        ] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidConfig(format!(
                    "block probability {name} must be in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    fn prob(&self, sender_fake: bool, target_fake: bool) -> f64 {
        match (sender_fake, target_fake) {
            (false, false) => self.real_to_real,
            (false, true) => self.real_to_fake,
            (true, false) => self.fake_to_real,
            (true, true) => self.fake_to_fake,
        }
    }

    /// Derives block probabilities from a desired mean out-degree and two
    /// affinity ratios: each sender spreads its expected `mean_degree`
    /// requests between the classes, sending `affinity` times more total
    /// volume to real targets than to fake ones.
    pub fn from_mean_degree(
        n: usize,
        n_fake: usize,
        mean_degree: f64,
        real_affinity: f64,
        fake_affinity: f64,
    ) -> Result<BlockProbs, SynthError> {
        if n < 2 || n_fake > n {
            return Err(SynthError::InvalidConfig(format!(
                "invalid class sizes: n {n}, fakes {n_fake}"
            )));
        }
        for (name, a) in [("real", real_affinity), ("fake", fake_affinity)] {
            if !a.is_finite() || a < 0.0 {
                return Err(SynthError::InvalidConfig(format!(
                    "{name} affinity must be non-negative, got {a}"
                )));
            }
        }
        let n_real = n - n_fake;
        // Split the out-degree budget k into class shares k * a/(a+1) to
        // reals and k/(a+1) to fakes, then divide by the number of available
        // targets in that class (one less when the sender is in the class).
        let split = |affinity: f64| -> (f64, f64) {
            let to_real = mean_degree * affinity / (affinity + 1.0);
            let to_fake = mean_degree / (affinity + 1.0);
            (to_real, to_fake)
        };
        let per_target = |volume: f64, targets: usize| -> Result<f64, SynthError> {
            if targets == 0 {
                if volume > 0.0 {
                    return Err(SynthError::InvalidConfig(
                        "block model routes volume to an empty class".into(),
                    ));
                }
                return Ok(0.0);
            }
            let p = volume / targets as f64;
            if p > 1.0 {
                return Err(SynthError::InvalidConfig(format!(
                    "block model needs per-pair probability {p:.3} > 1; lower the mean degree or affinity"
                )));
            }
            Ok(p)
        };
        let (real_to_real_vol, real_to_fake_vol) = split(real_affinity);
        let (fake_to_real_vol, fake_to_fake_vol) = split(fake_affinity);
        let probs = BlockProbs {
            real_to_real: per_target(real_to_real_vol, n_real.saturating_sub(1))?,
            real_to_fake: per_target(real_to_fake_vol, n_fake)?,
            fake_to_real: per_target(fake_to_real_vol, n_real)?,
            fake_to_fake: per_target(fake_to_fake_vol, n_fake.saturating_sub(1))?,
        };
        probs.validate()?;
        Ok(probs)
    }
}

/// Two-block digraph: the edge probability of `(i, j)` depends only on the
/// classes of `i` and `j`. Blocks are sampled with the same geometric-skip
/// scheme as the uniform generator, in a fixed block order.
pub fn gen_two_block(
    n: usize,
    classes: &ClassAssignment,
    block: &BlockProbs,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(u32, u32)>, SynthError> {
    block.validate()?;
    if classes.len() != n {
        return Err(SynthError::InvalidConfig(format!(
            "class assignment covers {} nodes, expected {n}",
            classes.len()
        )));
    }
    let reals: Vec<u32> = (0..n as u32).filter(|&i| !classes.is_fake_raw(i)).collect();
    let fakes: Vec<u32> = (0..n as u32).filter(|&i| classes.is_fake_raw(i)).collect();
    let mut edges = Vec::new();
    for (senders_fake, targets_fake) in [(false, false), (false, true), (true, false), (true, true)]
    {
        let senders = if senders_fake { &fakes } else { &reals };
        let targets = if targets_fake { &fakes } else { &reals };
        let p = block.prob(senders_fake, targets_fake);
        sample_block(senders, targets, senders_fake == targets_fake, p, rng, &mut edges);
    }
    Ok(edges)
}

/// Skip-samples the `senders x targets` grid at probability `p`, excluding
/// the diagonal when both lists are the same class (same index = same node).
fn sample_block(
    senders: &[u32],
    targets: &[u32],
    same_class: bool,
    p: f64,
    rng: &mut ChaCha8Rng,
    edges: &mut Vec<(u32, u32)>,
) {
    if p <= 0.0 || senders.is_empty() || targets.is_empty() {
        return;
    }
    let cols = if same_class {
        targets.len() - 1
    } else {
        targets.len()
    } as u64;
    if cols == 0 {
        return;
    }
    let total = senders.len() as u64 * cols;
    let slot_to_pair = |s: u64| -> (u32, u32) {
        let a = (s / cols) as usize;
        let r = (s % cols) as usize;
        let b = if same_class && r >= a { r + 1 } else { r };
        (senders[a], targets[b])
    };
    if p >= 1.0 {
        edges.extend((0..total).map(slot_to_pair));
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut slot: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        let skip = if skip >= total as f64 { total } else { skip as u64 };
        slot = slot.saturating_add(skip);
        if slot >= total {
            break;
        }
        edges.push(slot_to_pair(slot));
        slot += 1;
        if slot >= total {
            break;
        }
    }
}

// --- weighted out-link attachment ---------------------------------------

/// Per-target attraction weights as seen by each sender class.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractionTable {
    pub for_real_senders: Vec<f64>,
    pub for_fake_senders: Vec<f64>,
}

impl AttractionTable {
    pub fn validate(&self, n: usize) -> Result<(), SynthError> {
        if self.for_real_senders.len() != n || self.for_fake_senders.len() != n {
            return Err(SynthError::InvalidConfig(format!(
                "attraction table must cover all {n} nodes"
            )));
        }
        for w in self
            .for_real_senders
            .iter()
            .chain(self.for_fake_senders.iter())
        {
            if !w.is_finite() || *w <= 0.0 {
                return Err(SynthError::InvalidConfig(format!(
                    "attraction weights must be positive and finite, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Fenwick tree over per-node weights, supporting point updates and
/// searching for the index covering a cumulative target.
struct WeightTree {
    tree: Vec<f64>,
    len: usize,
}

impl WeightTree {
    fn from_weights(weights: &[f64]) -> Self {
        let len = weights.len();
        let mut tree = vec![0.0; len + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=len {
            let parent = i + (i & i.wrapping_neg());
            if parent <= len {
                tree[parent] += tree[i];
            }
        }
        WeightTree { tree, len }
    }

    fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i <= self.len {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut sum = 0.0;
        let mut i = self.len;
        while i > 0 {
            sum += self.tree[i];
            i &= i - 1;
        }
        sum
    }

    /// Index whose cumulative weight interval contains `target`.
    fn locate(&self, mut target: f64) -> usize {
        let mut pos = 0usize;
        let mut step = self.len.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.len && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(self.len.saturating_sub(1))
    }
}

/// Weighted out-link digraph: every node sends exactly `out_degree`
/// requests, drawn without replacement over the other nodes with
/// probability proportional to the attraction weights for the sender's
/// class. Models fakes and reals gravitating to different targets.
pub fn gen_weighted_outlinks(
    n: usize,
    classes: &ClassAssignment,
    out_degree: u32,
    attraction: &AttractionTable,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(u32, u32)>, SynthError> {
    attraction.validate(n)?;
    if classes.len() != n {
        return Err(SynthError::InvalidConfig(format!(
            "class assignment covers {} nodes, expected {n}",
            classes.len()
        )));
    }
    let k = out_degree as usize;
    if k > n.saturating_sub(1) {
        return Err(SynthError::InsufficientTargets {
            requested: k,
            available: n.saturating_sub(1),
        });
    }
    let mut real_tree = WeightTree::from_weights(&attraction.for_real_senders);
    let mut fake_tree = WeightTree::from_weights(&attraction.for_fake_senders);
    let mut edges = Vec::with_capacity(n * k);
    let mut removed: Vec<(usize, f64)> = Vec::with_capacity(k + 1);

    for sender in 0..n {
        let sender_fake = classes.is_fake_raw(sender as u32);
        let (tree, weights) = if sender_fake {
            (&mut fake_tree, &attraction.for_fake_senders)
        } else {
            (&mut real_tree, &attraction.for_real_senders)
        };
        // Mask the sender itself, then draw k targets without replacement.
        tree.add(sender, -weights[sender]);
        removed.push((sender, weights[sender]));
        for _ in 0..k {
            let total = tree.total();
            let target_mass = rng.random::<f64>() * total;
            let mut idx = tree.locate(target_mass);
            // Float drift can land on an already-removed (zero-weight)
            // index; deterministically step to the nearest live one.
            if removed.iter().any(|&(r, _)| r == idx) {
                idx = nearest_live(idx, n, &removed);
            }
            edges.push((sender as u32, idx as u32));
            tree.add(idx, -weights[idx]);
            removed.push((idx, weights[idx]));
        }
        for &(idx, w) in &removed {
            tree.add(idx, w);
        }
        removed.clear();
    }
    Ok(edges)
}

/// Closest index to `idx` (preferring upward) that is not in `removed`.
fn nearest_live(idx: usize, n: usize, removed: &[(usize, f64)]) -> usize {
    for offset in 1..n {
        for candidate in [idx.checked_add(offset), idx.checked_sub(offset)] {
            if let Some(c) = candidate {
                if c < n && !removed.iter().any(|&(r, _)| r == c) {
                    return c;
                }
            }
        }
    }
    idx
}
