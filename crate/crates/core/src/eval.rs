//! Detector evaluation: ranking quality, degree breakdowns, and experiment
//! sweeps over synthetic scenarios.
//!
//! The headline metric is ROC AUC computed by the rank-sum route with
//! average ranks on ties — the probability that a random fake outranks a
//! random real account, counting ties as half. Scores are compared on the
//! *unlabeled* population only, against ground truth.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::baselines::{
    local_belief, reject_rate_all, trust_propagation, trusted_seeds, AcceptedView, BaselineError,
    LocalBeliefParams,
};
use crate::graph::{NodeId, RequestGraph};
use crate::labels::{LabelError, LabelTable};
use crate::rates::{build_rate_table, ConfidencePrior, RateError};
use crate::scorer::{score_all, Prior, ScoreError, ScoringConfig, Variant};
use crate::synth::{
    build_scenario, derive_seed, FamilyParams, GeneratorConfig, GeneratorFamily, ProfileParams,
    Scenario, SynthConfig, SynthError,
};

/// Problems while computing metrics.
#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    /// AUC needs at least one positive and one negative.
    #[error("cannot rank a single class: need at least one fake and one real account")]
    SingleClass,
    /// Scores and truth must cover the same items.
    #[error("scores cover {scores} items but truth covers {truth}")]
    LengthMismatch { scores: usize, truth: usize },
    /// A score was NaN or infinite.
    #[error("score at index {index} is not finite: {value}")]
    NonFiniteScore { index: usize, value: f64 },
    /// A bucket specification must tile `[0, inf)` without gaps or overlap.
    #[error("invalid degree buckets: {0}")]
    InvalidBuckets(String),
}

/// ROC AUC of fake-likeness scores against binary truth, by the rank-sum
/// route: sort ascending, average ranks across exactly-tied groups, then
///
/// ```text
/// AUC = (rank_sum_fake - n_fake (n_fake + 1) / 2) / (n_fake * n_real)
/// ```
///
/// Equivalent to pairwise counting with ties worth one half.
pub fn roc_auc(scores: &[f64], is_fake: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != is_fake.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            truth: is_fake.len(),
        });
    }
    if let Some((index, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite())
    {
        return Err(EvalError::NonFiniteScore { index, value });
    }
    let n_fake = is_fake.iter().filter(|f| **f).count();
    let n_real = is_fake.len() - n_fake;
    if n_fake == 0 || n_real == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Walk tie groups, assigning every member the average 1-based rank.
    let mut rank_sum_fake = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end average to this.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            if is_fake[idx] {
                rank_sum_fake += avg_rank;
            }
        }
        start = end;
    }

    let n_fake_f = n_fake as f64;
    Ok((rank_sum_fake - n_fake_f * (n_fake_f + 1.0) / 2.0) / (n_fake_f * n_real as f64))
}

/// Marks nodes whose ground-truth label says fake (`> 0.5`).
pub fn fake_flags(truth: &LabelTable) -> Vec<bool> {
    (0..truth.len())
        .map(|v| truth.get(NodeId(v as u32)).is_some_and(|l| l > 0.5))
        .collect()
}

// --- degree buckets -----------------------------------------------------

/// Contiguous out-degree ranges tiling `[0, inf)`; the last range is open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketSpec {
    ranges: Vec<(u32, Option<u32>)>,
}

impl BucketSpec {
    /// Five-wide buckets: 0-5, 6-10, ..., 41-45, 46+.
    pub fn fine() -> Self {
        let mut ranges = vec![(0, Some(5))];
        let mut lo = 6;
        while lo <= 41 {
            ranges.push((lo, Some(lo + 4)));
            lo += 5;
        }
        ranges.push((46, None));
        BucketSpec { ranges }
    }

    /// Coarse buckets: 0-10, 11-20, 21-45, 46+.
    pub fn coarse() -> Self {
        BucketSpec {
            ranges: vec![(0, Some(10)), (11, Some(20)), (21, Some(45)), (46, None)],
        }
    }

    /// Validates that the ranges start at 0, are contiguous, and end open.
    pub fn new(ranges: Vec<(u32, Option<u32>)>) -> Result<Self, EvalError> {
        if ranges.is_empty() {
            return Err(EvalError::InvalidBuckets("no ranges given".into()));
        }
        if ranges[0].0 != 0 {
            return Err(EvalError::InvalidBuckets(format!(
                "first range starts at {}, must start at 0",
                ranges[0].0
            )));
        }
        for window in ranges.windows(2) {
            let (lo, hi) = window[0];
            let (next_lo, _) = window[1];
            match hi {
                None => {
                    return Err(EvalError::InvalidBuckets(
                        "only the last range may be open-ended".into(),
                    ))
                }
                Some(hi) if hi < lo => {
                    return Err(EvalError::InvalidBuckets(format!(
                        "range {lo}-{hi} is reversed"
                    )))
                }
                Some(hi) if next_lo != hi + 1 => {
                    return Err(EvalError::InvalidBuckets(format!(
                        "gap or overlap between {lo}-{hi} and the range starting at {next_lo}"
                    )))
                }
                _ => {}
            }
        }
        let (last_lo, last_hi) = *ranges.last().unwrap();
        if let Some(hi) = last_hi {
            if hi < last_lo {
                return Err(EvalError::InvalidBuckets(format!(
                    "range {last_lo}-{hi} is reversed"
                )));
            }
            return Err(EvalError::InvalidBuckets(
                "last range must be open-ended to cover all degrees".into(),
            ));
        }
        Ok(BucketSpec { ranges })
    }

    pub fn ranges(&self) -> &[(u32, Option<u32>)] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Index of the bucket containing `degree`.
    pub fn bucket_of(&self, degree: usize) -> usize {
        let d = degree.min(u32::MAX as usize) as u32;
        self.ranges
            .iter()
            .position(|&(lo, hi)| d >= lo && hi.map_or(true, |h| d <= h))
            .expect("ranges tile [0, inf)")
    }

    /// Human-readable label of bucket `idx`, like `6-10` or `46+`.
    pub fn label(&self, idx: usize) -> String {
        match self.ranges[idx] {
            (lo, Some(hi)) => format!("{lo}-{hi}"),
            (lo, None) => format!("{lo}+"),
        }
    }
}

/// Groups nodes by their out-degree bucket.
pub fn bucket_by_out_degree(
    graph: &RequestGraph,
    nodes: &[NodeId],
    spec: &BucketSpec,
) -> Vec<Vec<NodeId>> {
    let mut buckets = vec![Vec::new(); spec.len()];
    for &node in nodes {
        buckets[spec.bucket_of(graph.out_degree(node))].push(node);
    }
    buckets
}

/// AUC and class sizes within one degree bucket. `auc` is absent when the
/// bucket holds a single class (or is empty).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketAuc {
    pub bucket: String,
    pub n_fake: usize,
    pub n_real: usize,
    pub auc: Option<f64>,
}

/// Overall AUC plus the per-bucket breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketedAuc {
    pub n_fake: usize,
    pub n_real: usize,
    /// Absent when the evaluated set holds a single class.
    pub auc: Option<f64>,
    pub buckets: Vec<BucketAuc>,
}

/// Evaluates `scores` (dense, per node) on `test` nodes against dense truth
/// flags, overall and per out-degree bucket when a spec is given.
pub fn bucketed_auc(
    graph: &RequestGraph,
    test: &[NodeId],
    scores: &[f64],
    is_fake: &[bool],
    spec: Option<&BucketSpec>,
) -> Result<BucketedAuc, EvalError> {
    if scores.len() != graph.node_count() || is_fake.len() != graph.node_count() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            truth: is_fake.len(),
        });
    }
    let subset_auc = |nodes: &[NodeId]| -> Result<(usize, usize, Option<f64>), EvalError> {
        let s: Vec<f64> = nodes.iter().map(|v| scores[v.index()]).collect();
        let t: Vec<bool> = nodes.iter().map(|v| is_fake[v.index()]).collect();
        let n_fake = t.iter().filter(|f| **f).count();
        let n_real = t.len() - n_fake;
        match roc_auc(&s, &t) {
            Ok(auc) => Ok((n_fake, n_real, Some(auc))),
            Err(EvalError::SingleClass) => Ok((n_fake, n_real, None)),
            Err(other) => Err(other),
        }
    };

    let (n_fake, n_real, auc) = subset_auc(test)?;
    let mut buckets = Vec::new();
    if let Some(spec) = spec {
        for (idx, members) in bucket_by_out_degree(graph, test, spec).iter().enumerate() {
            let (b_fake, b_real, b_auc) = subset_auc(members)?;
            buckets.push(BucketAuc {
                bucket: spec.label(idx),
                n_fake: b_fake,
                n_real: b_real,
                auc: b_auc,
            });
        }
    }
    Ok(BucketedAuc {
        n_fake,
        n_real,
        auc,
        buckets,
    })
}

// --- methods ------------------------------------------------------------

/// The detectors under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Posterior scorer, selection and response evidence.
    SybilEdge,
    /// Posterior scorer, response evidence only (infinite selection
    /// shrinkage).
    SybilEdgeTr,
    /// Rejected-request fraction.
    RejectRate,
    /// Seed-based trust propagation, negated into fake-likeness.
    SybilRank,
    /// Local belief updates from labeled priors.
    SybilScarC,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SybilEdge,
        Method::SybilEdgeTr,
        Method::RejectRate,
        Method::SybilRank,
        Method::SybilScarC,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::SybilEdge => "sybil_edge",
            Method::SybilEdgeTr => "sybil_edge_tr",
            Method::RejectRate => "reject_rate",
            Method::SybilRank => "sybil_rank",
            Method::SybilScarC => "sybil_scar_c",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shared knobs for running methods in experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    /// Selection-rate confidence prior.
    pub sigma: ConfidencePrior,
    /// Accept-rate confidence prior.
    pub phi: ConfidencePrior,
    pub clamp_eps: f64,
    /// Scoring prior; `None` uses the mean training label (the labeled
    /// population's fake share).
    pub prior: Option<f64>,
    /// Trust-propagation rounds; `None` uses `ceil(log2 n)`.
    pub trust_iterations: Option<usize>,
    pub belief: LocalBeliefParams,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            sigma: ConfidencePrior::Uniform(crate::rates::DEFAULT_SIGMA),
            phi: ConfidencePrior::Uniform(crate::rates::DEFAULT_PHI),
            clamp_eps: crate::rates::DEFAULT_CLAMP_EPS,
            prior: None,
            trust_iterations: None,
            belief: LocalBeliefParams::default(),
        }
    }
}

/// Any failure inside an experiment run.
#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn training_prior(training: &LabelTable, cfg: &MethodConfig) -> f64 {
    if let Some(p) = cfg.prior {
        return p;
    }
    let known: Vec<f64> = training.known().map(|(_, l)| l).collect();
    if known.is_empty() {
        0.5
    } else {
        known.iter().sum::<f64>() / known.len() as f64
    }
}

/// Dense fake-likeness scores (one per node) for a method on a graph with
/// training labels. Unscored nodes (the labeled ones, for the posterior
/// methods) carry the prior.
pub fn method_scores(
    graph: &RequestGraph,
    training: &LabelTable,
    method: Method,
    cfg: &MethodConfig,
) -> Result<Vec<f64>, SweepError> {
    match method {
        Method::SybilEdge | Method::SybilEdgeTr => {
            let sigma = if method == Method::SybilEdgeTr {
                ConfidencePrior::Infinite
            } else {
                cfg.sigma.clone()
            };
            let rates = build_rate_table(graph, training, &sigma, &cfg.phi, cfg.clamp_eps)?;
            let prior = training_prior(training, cfg);
            let config = ScoringConfig::new(Prior::Global(prior), Variant::Full)
                .with_clamp_eps(cfg.clamp_eps);
            let table = score_all(graph, &rates, training, &config)?;
            Ok(table.to_dense(graph.node_count(), prior))
        }
        Method::RejectRate => Ok(reject_rate_all(graph)),
        Method::SybilRank => {
            let view = AcceptedView::from_graph(graph);
            let seeds = trusted_seeds(training);
            let iterations = cfg
                .trust_iterations
                .unwrap_or_else(|| crate::baselines::default_trust_iterations(graph.node_count()));
            let trust = trust_propagation(&view, &seeds, iterations)?;
            Ok(trust.into_iter().map(|t| -t).collect())
        }
        Method::SybilScarC => {
            let view = AcceptedView::from_graph(graph);
            Ok(local_belief(&view, training, &cfg.belief)?)
        }
    }
}

// --- experiment sweeps --------------------------------------------------

/// Scenario-independent experiment settings.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub n: usize,
    pub fraction_known: f64,
    pub stratified_split: bool,
    pub profiles: ProfileParams,
    pub family_params: FamilyParams,
    /// Degree breakdown to report, if any.
    pub buckets: Option<BucketSpec>,
}

impl SweepBase {
    pub fn new(n: usize, fraction_known: f64) -> Self {
        SweepBase {
            n,
            fraction_known,
            stratified_split: false,
            profiles: ProfileParams::default(),
            family_params: FamilyParams::default(),
            buckets: None,
        }
    }
}

/// The cross product explored by [`run_generator_sweep`].
#[derive(Debug, Clone)]
pub struct GeneratorGrid {
    pub families: Vec<GeneratorFamily>,
    pub mean_degrees: Vec<f64>,
    pub fake_fractions: Vec<f64>,
}

/// The noise axis explored by [`run_noise_sweep`] on one scenario shape.
#[derive(Debug, Clone)]
pub struct NoiseGrid {
    pub family: GeneratorFamily,
    pub mean_degree: f64,
    pub fraction_fake: f64,
    /// Training-label flip probabilities, 0 meaning clean labels.
    pub flip_probs: Vec<f64>,
}

/// One method evaluated on one generated scenario.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub generator: String,
    pub n: usize,
    pub mean_degree: f64,
    pub fraction_fake: f64,
    /// Training-label flip probability (0 outside noise sweeps).
    pub flip_prob: f64,
    pub seed: u64,
    pub method: Method,
    pub result: BucketedAuc,
    /// Seconds to build the scenario (shared across its methods' rows).
    pub build_seconds: f64,
    /// Seconds to train and score this method.
    pub eval_seconds: f64,
}

/// Per-point aggregate over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub generator: String,
    pub mean_degree: f64,
    pub fraction_fake: f64,
    pub flip_prob: f64,
    pub method: Method,
    /// Mean AUC over seeds with a defined AUC.
    pub mean_auc: Option<f64>,
    /// Sample standard deviation (absent with fewer than two values).
    pub std_auc: Option<f64>,
    pub n_seeds: usize,
}

/// Full results of a sweep: raw per-seed rows plus per-point summaries.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub total_seconds: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Tab-separated rows, one line per (scenario, method, bucket), with an
    /// `all` pseudo-bucket for the overall AUC. `NA` marks undefined AUCs.
    pub fn rows_tsv(&self) -> String {
        let mut out = String::from(
            "generator\tn\tmean_degree\tfraction_fake\tflip_prob\tseed\tmethod\tbucket\tn_fake\tn_real\tauc\tbuild_seconds\teval_seconds\n",
        );
        let fmt_auc = |auc: Option<f64>| match auc {
            Some(a) => a.to_string(),
            None => "NA".to_string(),
        };
        for row in &self.rows {
            let prefix = format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                row.generator,
                row.n,
                row.mean_degree,
                row.fraction_fake,
                row.flip_prob,
                row.seed,
                row.method
            );
            out.push_str(&format!(
                "{prefix}\tall\t{}\t{}\t{}\t{}\t{}\n",
                row.result.n_fake,
                row.result.n_real,
                fmt_auc(row.result.auc),
                row.build_seconds,
                row.eval_seconds
            ));
            for bucket in &row.result.buckets {
                out.push_str(&format!(
                    "{prefix}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    bucket.bucket,
                    bucket.n_fake,
                    bucket.n_real,
                    fmt_auc(bucket.auc),
                    row.build_seconds,
                    row.eval_seconds
                ));
            }
        }
        out
    }

    /// Tab-separated per-point summary (mean and stdev over seeds).
    pub fn summary_tsv(&self) -> String {
        let mut out = String::from(
            "generator\tmean_degree\tfraction_fake\tflip_prob\tmethod\tmean_auc\tstd_auc\tn_seeds\n",
        );
        for s in &self.summary {
            let fmt = |v: Option<f64>| match v {
                Some(x) => x.to_string(),
                None => "NA".to_string(),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                s.generator,
                s.mean_degree,
                s.fraction_fake,
                s.flip_prob,
                s.method,
                fmt(s.mean_auc),
                fmt(s.std_auc),
                s.n_seeds
            ));
        }
        out
    }
}

/// Key identifying one sweep point (everything but the seed).
#[derive(Debug, Clone, PartialEq)]
struct PointKey {
    generator: String,
    mean_degree: f64,
    fraction_fake: f64,
    flip_prob: f64,
}

fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut summary: Vec<SummaryRow> = Vec::new();
    let mut keys: Vec<(PointKey, Method)> = Vec::new();
    for row in rows {
        let key = (
            PointKey {
                generator: row.generator.clone(),
                mean_degree: row.mean_degree,
                fraction_fake: row.fraction_fake,
                flip_prob: row.flip_prob,
            },
            row.method,
        );
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (point, method) in keys {
        let aucs: Vec<f64> = rows
            .iter()
            .filter(|r| {
                r.method == method
                    && r.generator == point.generator
                    && r.mean_degree == point.mean_degree
                    && r.fraction_fake == point.fraction_fake
                    && r.flip_prob == point.flip_prob
            })
            .filter_map(|r| r.result.auc)
            .collect();
        let mean = if aucs.is_empty() {
            None
        } else {
            Some(aucs.iter().sum::<f64>() / aucs.len() as f64)
        };
        let std = match (mean, aucs.len()) {
            (Some(m), len) if len >= 2 => Some(
                (aucs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (len - 1) as f64).sqrt(),
            ),
            _ => None,
        };
        summary.push(SummaryRow {
            generator: point.generator,
            mean_degree: point.mean_degree,
            fraction_fake: point.fraction_fake,
            flip_prob: point.flip_prob,
            method,
            mean_auc: mean,
            std_auc: std,
            n_seeds: aucs.len(),
        });
    }
    summary
}

/// Evaluates the given methods on one scenario using `training` labels
/// (which may differ from the scenario's clean split, e.g. after noise
/// injection). Returns `(method, result, eval_seconds)` per method.
pub fn evaluate_methods(
    scenario: &Scenario,
    training: &LabelTable,
    methods: &[Method],
    cfg: &MethodConfig,
    buckets: Option<&BucketSpec>,
) -> Result<Vec<(Method, BucketedAuc, f64)>, SweepError> {
    let (_, test_nodes) = training.split_known_unknown();
    let is_fake = fake_flags(&scenario.truth);
    let mut results = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let scores = method_scores(&scenario.graph, training, method, cfg)?;
        let result = bucketed_auc(&scenario.graph, &test_nodes, &scores, &is_fake, buckets)?;
        results.push((method, result, start.elapsed().as_secs_f64()));
    }
    Ok(results)
}

/// Runs every (family, mean degree, fake fraction, seed) combination and
/// evaluates each method on it. Scenarios run in parallel; row order is the
/// deterministic grid order.
pub fn run_generator_sweep(
    base: &SweepBase,
    grid: &GeneratorGrid,
    methods: &[Method],
    seeds: &[u64],
    cfg: &MethodConfig,
) -> Result<ExperimentReport, SweepError> {
    let started = Instant::now();
    let mut jobs = Vec::new();
    for &family in &grid.families {
        for &mean_degree in &grid.mean_degrees {
            for &fraction_fake in &grid.fake_fractions {
                for &seed in seeds {
                    jobs.push((family, mean_degree, fraction_fake, seed));
                }
            }
        }
    }
    let rows: Result<Vec<Vec<SweepRow>>, SweepError> = jobs
        .par_iter()
        .map(|&(family, mean_degree, fraction_fake, seed)| {
            let build_start = Instant::now();
            let generator = GeneratorConfig::for_family(
                family,
                base.n,
                fraction_fake,
                mean_degree,
                &base.family_params,
            )?;
            let scenario = build_scenario(&SynthConfig {
                n: base.n,
                fraction_fake,
                fraction_known: base.fraction_known,
                stratified_split: base.stratified_split,
                generator,
                profiles: base.profiles,
                seed,
            })?;
            let build_seconds = build_start.elapsed().as_secs_f64();
            let evaluated =
                evaluate_methods(&scenario, &scenario.training, methods, cfg, base.buckets.as_ref())?;
            Ok(evaluated
                .into_iter()
                .map(|(method, result, eval_seconds)| SweepRow {
                    generator: family.name().to_string(),
                    n: base.n,
                    mean_degree,
                    fraction_fake,
                    flip_prob: 0.0,
                    seed,
                    method,
                    result,
                    build_seconds,
                    eval_seconds,
                })
                .collect())
        })
        .collect();
    let rows: Vec<SweepRow> = rows?.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(ExperimentReport {
        rows,
        summary,
        total_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Builds one scenario shape per seed and evaluates each method at every
/// training-label flip probability. The scenario (graph, truth, clean
/// split) is built once per seed; only the training labels change along the
/// noise axis, each flip level on its own derived seed.
pub fn run_noise_sweep(
    base: &SweepBase,
    grid: &NoiseGrid,
    methods: &[Method],
    seeds: &[u64],
    cfg: &MethodConfig,
) -> Result<ExperimentReport, SweepError> {
    let started = Instant::now();
    let rows: Result<Vec<Vec<SweepRow>>, SweepError> = seeds
        .par_iter()
        .map(|&seed| {
            let build_start = Instant::now();
            let generator = GeneratorConfig::for_family(
                grid.family,
                base.n,
                grid.fraction_fake,
                grid.mean_degree,
                &base.family_params,
            )?;
            let scenario = build_scenario(&SynthConfig {
                n: base.n,
                fraction_fake: grid.fraction_fake,
                fraction_known: base.fraction_known,
                stratified_split: base.stratified_split,
                generator,
                profiles: base.profiles,
                seed,
            })?;
            let build_seconds = build_start.elapsed().as_secs_f64();
            let mut seed_rows = Vec::new();
            for (flip_idx, &flip_prob) in grid.flip_probs.iter().enumerate() {
                let training = if flip_prob == 0.0 {
                    scenario.training.clone()
                } else {
                    scenario
                        .training
                        .inject_noise(flip_prob, derive_seed(seed, flip_idx as u64 + 1))?
                };
                let evaluated =
                    evaluate_methods(&scenario, &training, methods, cfg, base.buckets.as_ref())?;
                seed_rows.extend(evaluated.into_iter().map(|(method, result, eval_seconds)| {
                    SweepRow {
                        generator: grid.family.name().to_string(),
                        n: base.n,
                        mean_degree: grid.mean_degree,
                        fraction_fake: grid.fraction_fake,
                        flip_prob,
                        seed,
                        method,
                        result,
                        build_seconds,
                        eval_seconds,
                    }
                }));
            }
            Ok(seed_rows)
        })
        .collect();
    let rows: Vec<SweepRow> = rows?.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(ExperimentReport {
        rows,
        summary,
        total_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_separates_perfect_ranking() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let truth = [false, false, true, true];
        assert_eq!(roc_auc(&scores, &truth).unwrap(), 1.0);
        let reversed = [0.9, 0.8, 0.2, 0.1];
        assert_eq!(roc_auc(&reversed, &truth).unwrap(), 0.0);
    }

    #[test]
    fn auc_handles_ties_as_half_wins() {
        // One fake tied with one real at 0.5, plus one clear pair.
        let scores = [0.1, 0.5, 0.5, 0.9];
        let truth = [false, true, false, true];
        // Pairs: fake@0.5 vs real@0.1 -> win; fake@0.5 vs real@0.5 -> tie;
        // fake@0.9 beats both. AUC = (1 + 0.5 + 2) / 4.
        assert!((roc_auc(&scores, &truth).unwrap() - 3.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn auc_all_tied_is_one_half() {
        let scores = [0.5; 6];
        let truth = [true, false, true, false, false, true];
        assert!((roc_auc(&scores, &truth).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn auc_rejects_degenerate_inputs() {
        assert_eq!(
            roc_auc(&[0.1, 0.2], &[true, true]).unwrap_err(),
            EvalError::SingleClass
        );
        assert_eq!(
            roc_auc(&[0.1], &[true, false]).unwrap_err(),
            EvalError::LengthMismatch { scores: 1, truth: 2 }
        );
        assert!(matches!(
            roc_auc(&[f64::NAN, 0.2], &[true, false]).unwrap_err(),
            EvalError::NonFiniteScore { index: 0, .. }
        ));
    }

    #[test]
    fn bucket_specs_tile_degrees() {
        let fine = BucketSpec::fine();
        assert_eq!(fine.len(), 10);
        assert_eq!(fine.bucket_of(0), 0);
        assert_eq!(fine.bucket_of(5), 0);
        assert_eq!(fine.bucket_of(6), 1);
        assert_eq!(fine.bucket_of(45), 8);
        assert_eq!(fine.bucket_of(46), 9);
        assert_eq!(fine.bucket_of(10_000), 9);
        assert_eq!(fine.label(0), "0-5");
        assert_eq!(fine.label(9), "46+");
        let coarse = BucketSpec::coarse();
        assert_eq!(coarse.len(), 4);
        assert_eq!(coarse.bucket_of(21), 2);
    }

    #[test]
    fn bucket_spec_validation_rejects_gaps_and_overlap() {
        assert!(BucketSpec::new(vec![(0, Some(5)), (7, None)]).is_err(), "gap");
        assert!(BucketSpec::new(vec![(0, Some(5)), (5, None)]).is_err(), "overlap");
        assert!(BucketSpec::new(vec![(1, Some(5)), (6, None)]).is_err(), "must start at 0");
        assert!(BucketSpec::new(vec![(0, Some(5))]).is_err(), "must end open");
        assert!(BucketSpec::new(vec![(0, None)]).is_ok());
    }

    #[test]
    fn bucketed_auc_reports_na_for_single_class_buckets() {
        let graph = RequestGraph::build(
            4,
            vec![(0, 1, true), (0, 2, true), (0, 3, true), (1, 2, true)],
        )
        .unwrap();
        // Node 0 has out-degree 3, node 1 has 1, nodes 2-3 have 0.
        let spec = BucketSpec::new(vec![(0, Some(0)), (1, None)]).unwrap();
        let nodes: Vec<NodeId> = (0..4).map(NodeId).collect();
        let scores = vec![0.9, 0.1, 0.4, 0.6];
        let is_fake = vec![true, false, false, true];
        let result = bucketed_auc(&graph, &nodes, &scores, &is_fake, Some(&spec)).unwrap();
        assert!(result.auc.is_some());
        // Degree-0 bucket holds nodes 2 (real) and 3 (fake): defined AUC.
        assert_eq!(result.buckets[0].n_fake, 1);
        assert_eq!(result.buckets[0].auc, Some(1.0));
        // Degree>=1 bucket holds 0 (fake) and 1 (real).
        assert_eq!(result.buckets[1].auc, Some(1.0));
    }

    #[test]
    fn method_name_round_trip() {
        for method in Method::ALL {
            assert_eq!(Method::parse(method.name()), Some(method));
        }
        assert_eq!(Method::parse("nonsense"), None);
    }

    #[test]
    fn summarize_means_over_seeds_only() {
        let make_row = |seed: u64, auc: f64| SweepRow {
            generator: "erdos_renyi".into(),
            n: 10,
            mean_degree: 5.0,
            fraction_fake: 0.1,
            flip_prob: 0.0,
            seed,
            method: Method::RejectRate,
            result: BucketedAuc {
                n_fake: 1,
                n_real: 9,
                auc: Some(auc),
                buckets: Vec::new(),
            },
            build_seconds: 0.0,
            eval_seconds: 0.0,
        };
        let rows = vec![make_row(1, 0.8), make_row(2, 0.9)];
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 1);
        assert_eq!(summary[0].n_seeds, 2);
        assert!((summary[0].mean_auc.unwrap() - 0.85).abs() < 1e-12);
        let expected_std = ((0.05_f64.powi(2) * 2.0) / 1.0).sqrt();
        assert!((summary[0].std_auc.unwrap() - expected_std).abs() < 1e-12);
    }

    #[test]
    fn tsv_outputs_have_stable_headers() {
        let report = ExperimentReport {
            rows: Vec::new(),
            summary: Vec::new(),
            total_seconds: 0.0,
        };
        assert!(report.rows_tsv().starts_with("generator\tn\tmean_degree"));
        assert!(report.summary_tsv().starts_with("generator\tmean_degree"));
        assert!(report.to_json().contains("\"rows\""));
    }
}
