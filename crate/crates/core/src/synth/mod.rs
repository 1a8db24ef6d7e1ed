//! Synthetic request networks with ground-truth classes.
//!
//! A scenario is built in five deterministic stages, each driven by its own
//! sub-seed derived from the master seed: class assignment, graph
//! generation, response-profile assignment, response simulation, and the
//! known/unknown split. Stage isolation means, for example, that changing
//! the generator family does not reshuffle which nodes are fake.
//!
//! The response model gives every node two accept propensities — one for
//! requests from real senders, one for requests from fakes — drawn from
//! per-class Beta distributions. Discriminating profiles (real nodes
//! accepting reals much more readily than fakes) are what gives the
//! posterior scorer its signal; the profile parameters are tunable stand-ins
//! meant to be reported alongside any experiment.

pub mod generators;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal};
use thiserror::Error;

use crate::graph::{GraphError, RequestGraph};
use crate::labels::LabelTable;
pub use generators::{
    AttractionTable, BlockProbs, DegreeDist, FixedDegreeOutput, gen_fixed_degrees,
    gen_two_block, gen_uniform_random, gen_weighted_outlinks,
};

/// Problems while building synthetic data.
#[derive(Debug, Error)]
pub enum SynthError {
    /// A parameter is outside its valid range; the message names it.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Every drawn degree was zero, so no graph can be built.
    #[error("degenerate degree sequence: all degrees are zero")]
    DegenerateSequence,
    /// A node must send more requests than there are possible targets.
    #[error("cannot draw {requested} distinct targets from {available} candidates")]
    InsufficientTargets { requested: usize, available: usize },
    /// A generated edge list failed graph validation (a generator bug).
    #[error("generated edges failed validation: {0}")]
    Graph(#[from] GraphError),
}

/// One SplitMix64 scramble of `base` and `salt`, for deriving independent
/// stream seeds from a master seed.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// --- classes ------------------------------------------------------------

/// Ground-truth fake/real assignment with an exact fake count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAssignment {
    is_fake: Vec<bool>,
    fake_count: usize,
}

impl ClassAssignment {
    /// Marks exactly `round(fraction_fake * n)` nodes as fake, uniformly at
    /// random.
    pub fn by_exact_count(
        n: usize,
        fraction_fake: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, SynthError> {
        if !(0.0..=1.0).contains(&fraction_fake) || !fraction_fake.is_finite() {
            return Err(SynthError::InvalidConfig(format!(
                "fake fraction must be in [0, 1], got {fraction_fake}"
            )));
        }
        let fake_count = (fraction_fake * n as f64).round() as usize;
        let mut ids: Vec<u32> = (0..n as u32).collect();
        ids.shuffle(rng);
        let mut is_fake = vec![false; n];
        for &id in &ids[..fake_count] {
            is_fake[id as usize] = true;
        }
        Ok(ClassAssignment { is_fake, fake_count })
    }

    /// Wraps an explicit assignment.
    pub fn from_flags(is_fake: Vec<bool>) -> Self {
        let fake_count = is_fake.iter().filter(|b| **b).count();
        ClassAssignment { is_fake, fake_count }
    }

    pub fn len(&self) -> usize {
        self.is_fake.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_fake.is_empty()
    }

    pub fn is_fake(&self, node: crate::graph::NodeId) -> bool {
        self.is_fake[node.index()]
    }

    /// Like [`is_fake`](Self::is_fake) for a raw id.
    pub fn is_fake_raw(&self, node: u32) -> bool {
        self.is_fake[node as usize]
    }

    pub fn fake_count(&self) -> usize {
        self.fake_count
    }

    pub fn real_count(&self) -> usize {
        self.is_fake.len() - self.fake_count
    }

    /// Ground-truth labels (1 = fake) for every node.
    pub fn to_labels(&self) -> LabelTable {
        let labels = self
            .is_fake
            .iter()
            .map(|&f| Some(if f { 1.0 } else { 0.0 }))
            .collect();
        LabelTable::from_labels(labels).expect("0/1 labels are always valid")
    }
}

// --- response profiles --------------------------------------------------

/// Parameters of a Beta distribution over accept propensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaSpec {
    pub fn new(alpha: f64, beta: f64) -> Self {
        BetaSpec { alpha, beta }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.alpha.is_finite() && self.beta.is_finite())
            || self.alpha <= 0.0
            || self.beta <= 0.0
        {
            return Err(SynthError::InvalidConfig(format!(
                "Beta parameters must be positive, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        Beta::new(self.alpha, self.beta)
            .expect("validated parameters")
            .sample(rng)
    }
}

/// Beta parameters for the four target-class x sender-class accept
/// propensities.
///
/// The defaults make real nodes welcoming to reals and wary of strangers
/// who turn out to be fake — the behavioral asymmetry the scorer relies
/// on — while fake nodes rubber-stamp fellow fakes (collusion) and treat
/// unknown real senders with the same wariness reals apply to fakes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    /// Real target accepting a real sender.
    pub real_accept_real: BetaSpec,
    /// Real target accepting a fake sender.
    pub real_accept_fake: BetaSpec,
    /// Fake target accepting a real sender.
    pub fake_accept_real: BetaSpec,
    /// Fake target accepting a fake sender.
    pub fake_accept_fake: BetaSpec,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            real_accept_real: BetaSpec::new(8.0, 2.0),
            real_accept_fake: BetaSpec::new(2.0, 4.0),
            fake_accept_real: BetaSpec::new(2.0, 4.0),
            fake_accept_fake: BetaSpec::new(9.0, 1.0),
        }
    }
}

impl ProfileParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.real_accept_real.validate()?;
        self.real_accept_fake.validate()?;
        self.fake_accept_real.validate()?;
        self.fake_accept_fake.validate()
    }
}

/// Sampled accept propensities: for each node, one probability per sender
/// class.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseProfile {
    pub accept_from_real: Vec<f64>,
    pub accept_from_fake: Vec<f64>,
}

/// Draws each node's two accept propensities from the Beta specs matching
/// its class. Nodes are visited in ascending id order, real-sender
/// propensity first, so the draw stream is reproducible.
pub fn assign_profiles(
    classes: &ClassAssignment,
    params: &ProfileParams,
    rng: &mut ChaCha8Rng,
) -> Result<ResponseProfile, SynthError> {
    params.validate()?;
    let n = classes.len();
    let mut accept_from_real = Vec::with_capacity(n);
    let mut accept_from_fake = Vec::with_capacity(n);
    for node in 0..n as u32 {
        let (from_real, from_fake) = if classes.is_fake_raw(node) {
            (&params.fake_accept_real, &params.fake_accept_fake)
        } else {
            (&params.real_accept_real, &params.real_accept_fake)
        };
        accept_from_real.push(from_real.sample(rng));
        accept_from_fake.push(from_fake.sample(rng));
    }
    Ok(ResponseProfile {
        accept_from_real,
        accept_from_fake,
    })
}

/// Rolls an accept/reject for every edge: the target's propensity for the
/// sender's class, evaluated in edge order.
pub fn simulate_responses(
    edges: &[(u32, u32)],
    classes: &ClassAssignment,
    profiles: &ResponseProfile,
    rng: &mut ChaCha8Rng,
) -> Vec<(u32, u32, bool)> {
    edges
        .iter()
        .map(|&(source, target)| {
            let p = if classes.is_fake_raw(source) {
                profiles.accept_from_fake[target as usize]
            } else {
                profiles.accept_from_real[target as usize]
            };
            let accepted = rng.random::<f64>() < p;
            (source, target, accepted)
        })
        .collect()
}

// --- generator configuration -------------------------------------------

/// The four generator families, for sweeps and CLI selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    ErdosRenyi,
    Configuration,
    Sbm,
    PreferentialAttachment,
}

impl GeneratorFamily {
    pub const ALL: [GeneratorFamily; 4] = [
        GeneratorFamily::ErdosRenyi,
        GeneratorFamily::Configuration,
        GeneratorFamily::Sbm,
        GeneratorFamily::PreferentialAttachment,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorFamily::ErdosRenyi => "erdos_renyi",
            GeneratorFamily::Configuration => "configuration",
            GeneratorFamily::Sbm => "sbm",
            GeneratorFamily::PreferentialAttachment => "preferential_attachment",
        }
    }

    pub fn parse(s: &str) -> Option<GeneratorFamily> {
        Self::ALL.iter().copied().find(|f| f.name() == s)
    }
}

impl std::fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-target attraction weights for the weighted out-link generator,
/// either explicit or drawn from log-normal popularity distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum AttractionWeights {
    /// All targets equally attractive to both classes.
    Uniform,
    /// Independent log-normal weight per target and per sender class;
    /// a larger sigma concentrates that class's requests on fewer targets.
    /// `collusion` multiplies fake targets' weight in the fake-sender table,
    /// modeling fake accounts that seek out cooperating fakes (1.0 disables).
    LogNormal {
        real_sigma: f64,
        fake_sigma: f64,
        collusion: f64,
    },
    /// Explicit per-target weights.
    Explicit(AttractionTable),
}

impl AttractionWeights {
    /// Resolves to concrete per-target weights. Log-normal draws visit
    /// targets in ascending order, real-sender weight first; the collusion
    /// multiplier is applied afterwards so it does not perturb the stream.
    pub fn materialize(
        &self,
        classes: &ClassAssignment,
        rng: &mut ChaCha8Rng,
    ) -> Result<AttractionTable, SynthError> {
        let n = classes.len();
        let table = match self {
            AttractionWeights::Uniform => AttractionTable {
                for_real_senders: vec![1.0; n],
                for_fake_senders: vec![1.0; n],
            },
            AttractionWeights::LogNormal {
                real_sigma,
                fake_sigma,
                collusion,
            } => {
                for (name, sigma) in [("real", real_sigma), ("fake", fake_sigma)] {
                    if !sigma.is_finite() || *sigma < 0.0 {
                        return Err(SynthError::InvalidConfig(format!(
                            "{name}-sender log-normal sigma must be non-negative, got {sigma}"
                        )));
                    }
                }
                if !collusion.is_finite() || *collusion <= 0.0 {
                    return Err(SynthError::InvalidConfig(format!(
                        "collusion multiplier must be positive, got {collusion}"
                    )));
                }
                let draw = |sigma: f64, rng: &mut ChaCha8Rng| -> f64 {
                    if sigma == 0.0 {
                        1.0
                    } else {
                        LogNormal::new(0.0, sigma)
                            .expect("validated sigma")
                            .sample(rng)
                    }
                };
                let mut for_real_senders = Vec::with_capacity(n);
                let mut for_fake_senders = Vec::with_capacity(n);
                for i in 0..n {
                    for_real_senders.push(draw(*real_sigma, rng));
                    let mut w = draw(*fake_sigma, rng);
                    if classes.is_fake_raw(i as u32) {
                        w *= collusion;
                    }
                    for_fake_senders.push(w);
                }
                AttractionTable {
                    for_real_senders,
                    for_fake_senders,
                }
            }
            AttractionWeights::Explicit(table) => table.clone(),
        };
        table.validate(n)?;
        Ok(table)
    }
}

/// A fully specified graph generator.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorConfig {
    ErdosRenyi {
        edge_prob: f64,
    },
    Configuration {
        degrees: DegreeDist,
    },
    Sbm {
        block: BlockProbs,
    },
    PreferentialAttachment {
        out_degree: u32,
        weights: AttractionWeights,
    },
}

impl GeneratorConfig {
    pub fn family(&self) -> GeneratorFamily {
        match self {
            GeneratorConfig::ErdosRenyi { .. } => GeneratorFamily::ErdosRenyi,
            GeneratorConfig::Configuration { .. } => GeneratorFamily::Configuration,
            GeneratorConfig::Sbm { .. } => GeneratorFamily::Sbm,
            GeneratorConfig::PreferentialAttachment { .. } => {
                GeneratorFamily::PreferentialAttachment
            }
        }
    }

    /// Standard parameterization of a family for a desired mean out-degree,
    /// given the population layout. The family-specific shape knobs live in
    /// [`FamilyParams`].
    pub fn for_family(
        family: GeneratorFamily,
        n: usize,
        fraction_fake: f64,
        mean_degree: f64,
        params: &FamilyParams,
    ) -> Result<GeneratorConfig, SynthError> {
        if n < 2 {
            return Err(SynthError::InvalidConfig(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        if !mean_degree.is_finite() || mean_degree <= 0.0 {
            return Err(SynthError::InvalidConfig(format!(
                "mean degree must be positive, got {mean_degree}"
            )));
        }
        Ok(match family {
            GeneratorFamily::ErdosRenyi => GeneratorConfig::ErdosRenyi {
                edge_prob: (mean_degree / (n - 1) as f64).min(1.0),
            },
            GeneratorFamily::Configuration => GeneratorConfig::Configuration {
                degrees: DegreeDist::power_law_with_mean(
                    params.cm_exponent,
                    params.cm_cap,
                    mean_degree,
                )?,
            },
            GeneratorFamily::Sbm => {
                let n_fake = (fraction_fake * n as f64).round() as usize;
                GeneratorConfig::Sbm {
                    block: BlockProbs::from_mean_degree(
                        n,
                        n_fake,
                        mean_degree,
                        params.sbm_real_affinity,
                        params.sbm_fake_affinity,
                    )?,
                }
            }
            GeneratorFamily::PreferentialAttachment => GeneratorConfig::PreferentialAttachment {
                out_degree: mean_degree.round().max(1.0) as u32,
                weights: AttractionWeights::LogNormal {
                    real_sigma: params.pa_real_sigma,
                    fake_sigma: params.pa_fake_sigma,
                    collusion: params.pa_collusion,
                },
            },
        })
    }
}

/// Shape knobs used when a generator family is parameterized only by a mean
/// degree (sweeps, CLI shortcuts). All values are stand-ins chosen to give
/// plausible structure, not measurements of any real network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    /// Power-law exponent of the fixed-degree-sequence family.
    pub cm_exponent: f64,
    /// Degree cap of the fixed-degree-sequence family.
    pub cm_cap: u32,
    /// How much more volume real senders route to real targets.
    pub sbm_real_affinity: f64,
    /// How much more volume fake senders route to real targets.
    pub sbm_fake_affinity: f64,
    /// Popularity spread of targets as seen by real senders.
    pub pa_real_sigma: f64,
    /// Popularity spread of targets as seen by fake senders.
    pub pa_fake_sigma: f64,
    /// Extra pull of fake targets on fake senders (collusion; 1.0 disables).
    pub pa_collusion: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            cm_exponent: 2.5,
            cm_cap: 50,
            sbm_real_affinity: 4.0,
            sbm_fake_affinity: 4.0,
            pa_real_sigma: 0.5,
            pa_fake_sigma: 1.25,
            pa_collusion: 16.0,
        }
    }
}

// --- scenario assembly --------------------------------------------------

/// Everything needed to build one synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub fraction_fake: f64,
    /// Fraction of nodes whose label is revealed for training.
    pub fraction_known: f64,
    /// Split the known set per class instead of uniformly.
    pub stratified_split: bool,
    pub generator: GeneratorConfig,
    pub profiles: ProfileParams,
    pub seed: u64,
}

/// A generated scenario: the observed graph plus ground truth.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: RequestGraph,
    /// Labels for every node (the ground truth).
    pub truth: LabelTable,
    /// Labels for the known subset only; the rest is what gets scored.
    pub training: LabelTable,
    pub classes: ClassAssignment,
    pub profiles: ResponseProfile,
    /// Stub pairs the fixed-degree-sequence generator discarded (0 for the
    /// other families).
    pub dropped_edges: usize,
}

impl Scenario {
    /// Fake share of the population, the natural scoring prior.
    pub fn fake_fraction(&self) -> f64 {
        self.classes.fake_count() as f64 / self.classes.len().max(1) as f64
    }
}

/// Builds a scenario from config: classes, edges, profiles, responses, and
/// the training split, each stage on its own seed stream.
pub fn build_scenario(config: &SynthConfig) -> Result<Scenario, SynthError> {
    if config.n < 2 {
        return Err(SynthError::InvalidConfig(format!(
            "need at least 2 nodes, got {}",
            config.n
        )));
    }
    if !(0.0..=1.0).contains(&config.fraction_known) || !config.fraction_known.is_finite() {
        return Err(SynthError::InvalidConfig(format!(
            "known fraction must be in [0, 1], got {}",
            config.fraction_known
        )));
    }
    config.profiles.validate()?;

    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    // One sub-seed per stage, drawn in fixed order.
    let class_seed = master.random::<u64>();
    let graph_seed = master.random::<u64>();
    let profile_seed = master.random::<u64>();
    let response_seed = master.random::<u64>();
    let split_seed = master.random::<u64>();

    let classes = ClassAssignment::by_exact_count(
        config.n,
        config.fraction_fake,
        &mut ChaCha8Rng::seed_from_u64(class_seed),
    )?;

    let mut graph_rng = ChaCha8Rng::seed_from_u64(graph_seed);
    let (edges, dropped_edges) = match &config.generator {
        GeneratorConfig::ErdosRenyi { edge_prob } => {
            (gen_uniform_random(config.n, *edge_prob, &mut graph_rng)?, 0)
        }
        GeneratorConfig::Configuration { degrees } => {
            let out = gen_fixed_degrees(config.n, degrees, &mut graph_rng)?;
            (out.edges, out.dropped)
        }
        GeneratorConfig::Sbm { block } => {
            (gen_two_block(config.n, &classes, block, &mut graph_rng)?, 0)
        }
        GeneratorConfig::PreferentialAttachment {
            out_degree,
            weights,
        } => {
            let table = weights.materialize(&classes, &mut graph_rng)?;
            (
                gen_weighted_outlinks(config.n, &classes, *out_degree, &table, &mut graph_rng)?,
                0,
            )
        }
    };

    let profiles = assign_profiles(
        &classes,
        &config.profiles,
        &mut ChaCha8Rng::seed_from_u64(profile_seed),
    )?;
    let responses = simulate_responses(
        &edges,
        &classes,
        &profiles,
        &mut ChaCha8Rng::seed_from_u64(response_seed),
    );
    let graph = RequestGraph::build(config.n, responses)?;

    let truth = classes.to_labels();
    let training = split_training(
        &classes,
        config.fraction_known,
        config.stratified_split,
        &mut ChaCha8Rng::seed_from_u64(split_seed),
    );

    Ok(Scenario {
        graph,
        truth,
        training,
        classes,
        profiles,
        dropped_edges,
    })
}

/// Reveals `round(fraction_known * n)` labels, uniformly or per class.
fn split_training(
    classes: &ClassAssignment,
    fraction_known: f64,
    stratified: bool,
    rng: &mut ChaCha8Rng,
) -> LabelTable {
    let n = classes.len();
    let mut training = LabelTable::new(n);
    let mut reveal = |ids: &mut Vec<u32>, count: usize, rng: &mut ChaCha8Rng| {
        ids.shuffle(rng);
        for &id in ids.iter().take(count) {
            let label = if classes.is_fake_raw(id) { 1.0 } else { 0.0 };
            training
                .set(crate::graph::NodeId(id), Some(label))
                .expect("0/1 labels are always valid");
        }
    };
    if stratified {
        let mut fakes: Vec<u32> = (0..n as u32).filter(|&i| classes.is_fake_raw(i)).collect();
        let mut reals: Vec<u32> = (0..n as u32).filter(|&i| !classes.is_fake_raw(i)).collect();
        let fake_known = (fraction_known * fakes.len() as f64).round() as usize;
        let real_known = (fraction_known * reals.len() as f64).round() as usize;
        reveal(&mut fakes, fake_known, rng);
        reveal(&mut reals, real_known, rng);
    } else {
        let mut ids: Vec<u32> = (0..n as u32).collect();
        let known = (fraction_known * n as f64).round() as usize;
        reveal(&mut ids, known, rng);
    }
    training
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn toy_config(seed: u64) -> SynthConfig {
        SynthConfig {
            n: 600,
            fraction_fake: 0.1,
            fraction_known: 0.8,
            stratified_split: false,
            generator: GeneratorConfig::ErdosRenyi { edge_prob: 0.02 },
            profiles: ProfileParams::default(),
            seed,
        }
    }

    #[test]
    fn class_assignment_has_exact_count() {
        let classes = ClassAssignment::by_exact_count(1000, 0.05, &mut rng(1)).unwrap();
        assert_eq!(classes.fake_count(), 50);
        assert_eq!(classes.real_count(), 950);
        let recount = (0..1000u32).filter(|&i| classes.is_fake_raw(i)).count();
        assert_eq!(recount, 50);
    }

    #[test]
    fn class_assignment_rounds_to_nearest() {
        // 0.05 * 30 = 1.5 which rounds away from zero.
        let classes = ClassAssignment::by_exact_count(30, 0.05, &mut rng(2)).unwrap();
        assert_eq!(classes.fake_count(), 2);
    }

    #[test]
    fn profiles_follow_class_specs() {
        let classes = ClassAssignment::by_exact_count(4000, 0.5, &mut rng(3)).unwrap();
        let params = ProfileParams::default();
        let profiles = assign_profiles(&classes, &params, &mut rng(4)).unwrap();
        let mean = |pick_fake: bool, from_real: bool| -> f64 {
            let values: Vec<f64> = (0..4000u32)
                .filter(|&i| classes.is_fake_raw(i) == pick_fake)
                .map(|i| {
                    if from_real {
                        profiles.accept_from_real[i as usize]
                    } else {
                        profiles.accept_from_fake[i as usize]
                    }
                })
                .collect();
            values.iter().sum::<f64>() / values.len() as f64
        };
        assert!((mean(false, true) - params.real_accept_real.mean()).abs() < 0.02);
        assert!((mean(false, false) - params.real_accept_fake.mean()).abs() < 0.02);
        assert!((mean(true, true) - params.fake_accept_real.mean()).abs() < 0.02);
        assert!((mean(true, false) - params.fake_accept_fake.mean()).abs() < 0.02);
    }

    #[test]
    fn responses_follow_target_propensity() {
        let classes = ClassAssignment::from_flags(vec![false, true, false]);
        let profiles = ResponseProfile {
            accept_from_real: vec![1.0, 0.0, 1.0],
            accept_from_fake: vec![0.0, 1.0, 0.0],
        };
        // Real 0 asks real 2 (propensity 1) and fake 1 asks real 2 (propensity 0).
        let edges = vec![(0, 2), (1, 2), (1, 0)];
        let responses = simulate_responses(&edges, &classes, &profiles, &mut rng(5));
        assert_eq!(responses[0], (0, 2, true));
        assert_eq!(responses[1], (1, 2, false));
        assert_eq!(responses[2], (1, 0, false));
    }

    #[test]
    fn scenario_is_deterministic_in_seed() {
        let a = build_scenario(&toy_config(77)).unwrap();
        let b = build_scenario(&toy_config(77)).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.training, b.training);
        let c = build_scenario(&toy_config(78)).unwrap();
        assert_ne!(a.graph.edges(), c.graph.edges());
    }

    #[test]
    fn scenario_split_sizes_are_exact() {
        let s = build_scenario(&toy_config(9)).unwrap();
        assert_eq!(s.training.known_count(), 480, "80% of 600");
        assert_eq!(s.truth.known_count(), 600);
        assert_eq!(s.classes.fake_count(), 60);
        // Training labels must agree with the truth wherever present.
        for (node, label) in s.training.known() {
            assert_eq!(s.truth.get(node), Some(label));
        }
    }

    #[test]
    fn stratified_split_covers_both_classes_proportionally() {
        let mut config = toy_config(10);
        config.stratified_split = true;
        let s = build_scenario(&config).unwrap();
        let known_fakes = s
            .training
            .known()
            .filter(|&(node, _)| s.classes.is_fake(node))
            .count();
        assert_eq!(known_fakes, 48, "80% of the 60 fakes");
        assert_eq!(s.training.known_count(), 480);
    }

    #[test]
    fn changing_generator_family_keeps_the_class_assignment() {
        let er = build_scenario(&toy_config(11)).unwrap();
        let mut config = toy_config(11);
        config.generator = GeneratorConfig::PreferentialAttachment {
            out_degree: 10,
            weights: AttractionWeights::Uniform,
        };
        let pa = build_scenario(&config).unwrap();
        assert_eq!(er.classes, pa.classes, "stage seeds are isolated");
        assert_eq!(er.profiles, pa.profiles);
    }

    #[test]
    fn family_shortcut_hits_requested_mean_degree() {
        let params = FamilyParams::default();
        for family in GeneratorFamily::ALL {
            let generator =
                GeneratorConfig::for_family(family, 2000, 0.05, 10.0, &params).unwrap();
            let config = SynthConfig {
                n: 2000,
                fraction_fake: 0.05,
                fraction_known: 0.8,
                stratified_split: false,
                generator,
                profiles: ProfileParams::default(),
                seed: 5,
            };
            let scenario = build_scenario(&config).unwrap();
            let mean = scenario.graph.edge_count() as f64 / 2000.0;
            assert!(
                (mean - 10.0).abs() < 2.5,
                "{family}: mean out-degree {mean} should be near 10"
            );
        }
    }

    #[test]
    fn truth_labels_match_classes() {
        let s = build_scenario(&toy_config(13)).unwrap();
        for node in s.graph.nodes() {
            let expected = if s.classes.is_fake(node) { 1.0 } else { 0.0 };
            assert_eq!(s.truth.get(node), Some(expected));
        }
    }

    #[test]
    fn derive_seed_scrambles_both_arguments() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }

    #[test]
    fn attraction_lognormal_is_heavier_for_larger_sigma() {
        let weights = AttractionWeights::LogNormal {
            real_sigma: 0.2,
            fake_sigma: 2.0,
            collusion: 1.0,
        };
        let classes = ClassAssignment::from_flags(vec![false; 5000]);
        let table = weights.materialize(&classes, &mut rng(14)).unwrap();
        let spread = |w: &[f64]| -> f64 {
            let max = w.iter().cloned().fold(f64::MIN, f64::max);
            let sum: f64 = w.iter().sum();
            max / sum
        };
        assert!(
            spread(&table.for_fake_senders) > 10.0 * spread(&table.for_real_senders),
            "high sigma should concentrate mass"
        );
    }

    #[test]
    fn collusion_multiplies_fake_targets_for_fake_senders_only() {
        let flags: Vec<bool> = (0..100).map(|i| i % 10 == 0).collect();
        let classes = ClassAssignment::from_flags(flags.clone());
        let base = AttractionWeights::LogNormal {
            real_sigma: 0.7,
            fake_sigma: 0.7,
            collusion: 1.0,
        };
        let boosted = AttractionWeights::LogNormal {
            real_sigma: 0.7,
            fake_sigma: 0.7,
            collusion: 5.0,
        };
        let plain = base.materialize(&classes, &mut rng(3)).unwrap();
        let colluding = boosted.materialize(&classes, &mut rng(3)).unwrap();
        assert_eq!(plain.for_real_senders, colluding.for_real_senders);
        for i in 0..100 {
            let expected = if flags[i] { 5.0 } else { 1.0 };
            assert!(
                (colluding.for_fake_senders[i] / plain.for_fake_senders[i] - expected).abs()
                    < 1e-12,
                "collusion should scale exactly the fake targets"
            );
        }
    }

    #[test]
    fn scenario_rejects_bad_fractions() {
        let mut config = toy_config(1);
        config.fraction_known = 1.5;
        assert!(build_scenario(&config).is_err());
        let mut config = toy_config(1);
        config.fraction_fake = -0.1;
        assert!(build_scenario(&config).is_err());
    }

    #[test]
    fn fake_share_helper_matches_assignment() {
        let s = build_scenario(&toy_config(21)).unwrap();
        assert!((s.fake_fraction() - 0.1).abs() < 1e-12);
    }
}
