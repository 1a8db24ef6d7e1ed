//! The five subcommands: generate, train, score, eval, experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sybiledge::eval::{
    bucketed_auc, BucketSpec, GeneratorGrid, Method, MethodConfig, NoiseGrid, SweepBase,
    run_generator_sweep, run_noise_sweep,
};
use sybiledge::rates::{build_rate_table, ClassRates};
use sybiledge::scorer::{score_all, Prior};
use sybiledge::synth::{
    build_scenario, AttractionWeights, BetaSpec, BlockProbs, DegreeDist, FamilyParams,
    GeneratorConfig, GeneratorFamily, ProfileParams, SynthConfig, SynthError,
};
use sybiledge::{ConfidencePrior, LabelTable, NodeId, RateTable, ScoringConfig, Variant};

use crate::config::Config;
use crate::iofmt::{
    build_graph, explain_path, file_header, push_row, read_edges, read_labels, read_node_values,
    read_rates, read_scores, NodeDict,
};
use crate::AppError;

fn data_err(e: impl std::fmt::Display) -> AppError {
    AppError::Data(e.to_string())
}

/// Synthesis errors triggered by bad parameters are config mistakes (exit
/// 1); anything else that slips through is a data error.
fn synth_err(e: SynthError) -> AppError {
    match e {
        SynthError::InvalidConfig(_) => AppError::Usage(e.to_string()),
        other => AppError::Data(other.to_string()),
    }
}

fn validate_clamp(clamp_eps: f64) -> Result<(), AppError> {
    if !clamp_eps.is_finite() || !(0.0..0.5).contains(&clamp_eps) {
        return Err(AppError::Usage(format!(
            "--clamp-eps must be in [0, 0.5), got {clamp_eps}"
        )));
    }
    Ok(())
}

/// Parses a confidence strength: a non-negative number, or `inf` for the
/// exact infinite-shrinkage code path.
fn parse_confidence(flag: &str, value: &str) -> Result<ConfidencePrior, AppError> {
    match value.parse::<f64>() {
        Ok(x) if x.is_infinite() && x > 0.0 => Ok(ConfidencePrior::Infinite),
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(ConfidencePrior::Uniform(x)),
        _ => Err(AppError::Usage(format!(
            "{flag} must be a non-negative number or `inf`, got `{value}`"
        ))),
    }
}

fn parse_variant(value: &str) -> Result<Variant, AppError> {
    match value {
        "full" => Ok(Variant::Full),
        "selection_only" => Ok(Variant::SelectionOnly),
        "response_only" => Ok(Variant::ResponseOnly),
        _ => Err(AppError::Usage(format!(
            "--variant must be one of full, selection_only, response_only; got `{value}`"
        ))),
    }
}

/// Bucket spec: `fine`, `coarse`, `none`, or ranges like `0:5,6:10,46:`
/// (contiguous from 0; the last range open-ended).
fn parse_buckets(value: &str) -> Result<Option<BucketSpec>, AppError> {
    match value {
        "fine" => return Ok(Some(BucketSpec::fine())),
        "coarse" => return Ok(Some(BucketSpec::coarse())),
        "none" => return Ok(None),
        _ => {}
    }
    let mut ranges = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        let (lo, hi) = part.split_once(':').ok_or_else(|| {
            AppError::Usage(format!(
                "invalid bucket range `{part}`: expected `lo:hi` or a final `lo:`"
            ))
        })?;
        let lo: u32 = lo.trim().parse().map_err(|_| {
            AppError::Usage(format!("invalid bucket bound in `{part}`"))
        })?;
        let hi = hi.trim();
        let hi: Option<u32> = if hi.is_empty() {
            None
        } else {
            Some(hi.parse().map_err(|_| {
                AppError::Usage(format!("invalid bucket bound in `{part}`"))
            })?)
        };
        ranges.push((lo, hi));
    }
    BucketSpec::new(ranges)
        .map(Some)
        .map_err(|e| AppError::Usage(e.to_string()))
}

fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

// --- generate -----------------------------------------------------------

pub fn cmd_generate(
    config_path: &Path,
    seed_flag: Option<u64>,
    out_dir: &Path,
) -> Result<(), AppError> {
    let mut cfg = Config::load(config_path)?;

    let n = cfg.require_usize("n")?;
    let family_name = cfg.require_str("generator")?;
    let family = GeneratorFamily::parse(&family_name).ok_or_else(|| {
        AppError::Usage(format!(
            "unknown generator `{family_name}`; expected one of erdos_renyi, configuration, sbm, preferential_attachment"
        ))
    })?;
    let fraction_fake = cfg.get_f64("fraction_fake")?.unwrap_or(0.05);
    let fraction_known = cfg.get_f64("fraction_known")?.unwrap_or(0.8);
    let stratified_split = cfg.get_bool("stratified_split")?.unwrap_or(false);
    let seed = match seed_flag.or(cfg.get_u64("seed")?) {
        Some(s) => s,
        None => {
            return Err(AppError::Usage(
                "missing required key `seed` (set it in the config or pass --seed)".into(),
            ))
        }
    };

    let defaults = FamilyParams::default();
    let mean_degree = cfg.get_f64("mean_degree")?;
    let need_mean = |key: &str| -> Result<f64, AppError> {
        mean_degree.ok_or_else(|| {
            AppError::Usage(format!(
                "generator {family_name} needs `mean_degree` (or explicit {key})"
            ))
        })
    };

    let generator = match family {
        GeneratorFamily::ErdosRenyi => {
            let edge_prob = match cfg.get_f64("edge_prob")? {
                Some(p) => p,
                None => (need_mean("edge_prob")? / (n.max(2) - 1) as f64).min(1.0),
            };
            GeneratorConfig::ErdosRenyi { edge_prob }
        }
        GeneratorFamily::Configuration => {
            let exponent = cfg.get_f64("cm_exponent")?.unwrap_or(defaults.cm_exponent);
            let cap = cfg.get_u32("cm_cap")?.unwrap_or(defaults.cm_cap);
            let degrees = match cfg.get_str("degree_histogram") {
                Some(hist) => parse_degree_histogram(&hist)?,
                None => {
                    DegreeDist::power_law_with_mean(exponent, cap, need_mean("degree_histogram")?)
                        .map_err(synth_err)?
                }
            };
            GeneratorConfig::Configuration { degrees }
        }
        GeneratorFamily::Sbm => {
            let explicit = ["p_rr", "p_rf", "p_fr", "p_ff"];
            let block = if explicit.iter().any(|k| cfg.has(k)) {
                BlockProbs {
                    real_to_real: cfg.require_f64("p_rr")?,
                    real_to_fake: cfg.require_f64("p_rf")?,
                    fake_to_real: cfg.require_f64("p_fr")?,
                    fake_to_fake: cfg.require_f64("p_ff")?,
                }
            } else {
                let n_fake = (fraction_fake * n as f64).round() as usize;
                BlockProbs::from_mean_degree(
                    n,
                    n_fake,
                    need_mean("p_rr..p_ff")?,
                    cfg.get_f64("sbm_real_affinity")?
                        .unwrap_or(defaults.sbm_real_affinity),
                    cfg.get_f64("sbm_fake_affinity")?
                        .unwrap_or(defaults.sbm_fake_affinity),
                )
                .map_err(synth_err)?
            };
            GeneratorConfig::Sbm { block }
        }
        GeneratorFamily::PreferentialAttachment => {
            let out_degree = match cfg.get_u32("out_degree")? {
                Some(k) => k,
                None => need_mean("out_degree")?.round().max(1.0) as u32,
            };
            GeneratorConfig::PreferentialAttachment {
                out_degree,
                weights: AttractionWeights::LogNormal {
                    real_sigma: cfg
                        .get_f64("pa_real_sigma")?
                        .unwrap_or(defaults.pa_real_sigma),
                    fake_sigma: cfg
                        .get_f64("pa_fake_sigma")?
                        .unwrap_or(defaults.pa_fake_sigma),
                    collusion: cfg
                        .get_f64("pa_collusion")?
                        .unwrap_or(defaults.pa_collusion),
                },
            }
        }
    };

    let mut profiles = ProfileParams::default();
    for (key, slot) in [
        ("real_accept_real", &mut profiles.real_accept_real),
        ("real_accept_fake", &mut profiles.real_accept_fake),
        ("fake_accept_real", &mut profiles.fake_accept_real),
        ("fake_accept_fake", &mut profiles.fake_accept_fake),
    ] {
        if let Some((alpha, beta)) = cfg.get_beta_pair(key)? {
            *slot = BetaSpec::new(alpha, beta);
        }
    }

    let resolved = cfg.echo_consumed();
    cfg.finish()?;

    let synth = SynthConfig {
        n,
        fraction_fake,
        fraction_known,
        stratified_split,
        generator,
        profiles,
        seed,
    };
    let scenario = build_scenario(&synth).map_err(synth_err)?;

    let header = file_header(Some(seed));
    let echo = format!("# config: {resolved} | resolved_seed={seed}");

    let mut edges_out = String::new();
    let _ = writeln!(edges_out, "{header}");
    let _ = writeln!(edges_out, "{echo}");
    let _ = writeln!(
        edges_out,
        "# generator={} nodes={} edges={} dropped_stub_pairs={}",
        family.name(),
        scenario.graph.node_count(),
        scenario.graph.edge_count(),
        scenario.dropped_edges
    );
    let _ = writeln!(edges_out, "# columns: source target response");
    for e in scenario.graph.edges() {
        push_row(
            &mut edges_out,
            &[
                &e.source.0.to_string(),
                &e.target.0.to_string(),
                fmt_bool(e.accepted),
            ],
        );
    }

    let label_file = |labels: &LabelTable, what: &str| -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{echo}");
        let _ = writeln!(out, "# {what}");
        let _ = writeln!(out, "# columns: node p_fake");
        for node in scenario.graph.nodes() {
            if let Some(p) = labels.get(node) {
                push_row(&mut out, &[&node.0.to_string(), &p.to_string()]);
            }
        }
        out
    };

    let edges_path = out_dir.join("edges.tsv");
    let truth_path = out_dir.join("truth.tsv");
    let training_path = out_dir.join("training.tsv");
    crate::iofmt::write_text(&edges_path, &edges_out)?;
    crate::iofmt::write_text(
        &truth_path,
        &label_file(&scenario.truth, "ground-truth labels, all nodes"),
    )?;
    crate::iofmt::write_text(
        &training_path,
        &label_file(
            &scenario.training,
            "training labels, known subset only (absent node = unknown)",
        ),
    )?;

    println!(
        "wrote {} ({} edges), {} ({} labels), {} ({} labels)",
        edges_path.display(),
        scenario.graph.edge_count(),
        truth_path.display(),
        scenario.truth.known_count(),
        training_path.display(),
        scenario.training.known_count()
    );
    Ok(())
}

fn parse_degree_histogram(value: &str) -> Result<DegreeDist, AppError> {
    let mut entries = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        let err = || {
            AppError::Usage(format!(
                "invalid degree_histogram entry `{part}`: expected `degree:weight`"
            ))
        };
        let (d, w) = part.split_once(':').ok_or_else(err)?;
        let d: u32 = d.trim().parse().map_err(|_| err())?;
        let w: f64 = w.trim().parse().map_err(|_| err())?;
        entries.push((d, w));
    }
    let dist = DegreeDist::Histogram(entries);
    dist.validate().map_err(synth_err)?;
    Ok(dist)
}

// --- train --------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_train(
    edges_path: &Path,
    labels_path: &Path,
    sigma: &str,
    phi: &str,
    sigma_file: Option<&Path>,
    phi_file: Option<&Path>,
    clamp_eps: f64,
    out: &Path,
) -> Result<(), AppError> {
    validate_clamp(clamp_eps)?;
    let sigma_scalar = parse_confidence("--sigma", sigma)?;
    let phi_scalar = parse_confidence("--phi", phi)?;

    let mut dict = NodeDict::new();
    let edges = read_edges(edges_path, &mut dict)?;
    let labels = read_labels(labels_path, &mut dict)?;
    let sigma_rows = match sigma_file {
        Some(p) => Some(read_node_values(p, &mut dict, "sigma", false)?),
        None => None,
    };
    let phi_rows = match phi_file {
        Some(p) => Some(read_node_values(p, &mut dict, "phi", false)?),
        None => None,
    };

    let n = dict.len();
    let graph = build_graph(&dict, edges, edges_path)?;

    let mut label_vec = vec![None; n];
    for (id, p) in &labels {
        label_vec[*id as usize] = Some(*p);
    }
    let label_table = LabelTable::from_labels(label_vec).map_err(data_err)?;

    let per_target = |scalar: &ConfidencePrior,
                      rows: Option<Vec<(u32, f64)>>,
                      flag: &str|
     -> Result<ConfidencePrior, AppError> {
        match rows {
            None => Ok(scalar.clone()),
            Some(rows) => {
                let fill = match scalar {
                    ConfidencePrior::Uniform(x) => *x,
                    _ => {
                        return Err(AppError::Usage(format!(
                            "cannot combine {flag} inf with {flag}-file; per-target strengths must be finite"
                        )))
                    }
                };
                let mut values = vec![fill; n];
                for (id, v) in rows {
                    values[id as usize] = v;
                }
                Ok(ConfidencePrior::PerTarget(values))
            }
        }
    };
    let sigma_prior = per_target(&sigma_scalar, sigma_rows, "--sigma")?;
    let phi_prior = per_target(&phi_scalar, phi_rows, "--phi")?;

    let rates =
        build_rate_table(&graph, &label_table, &sigma_prior, &phi_prior, clamp_eps).map_err(data_err)?;
    let counts =
        sybiledge::TargetCounts::accumulate(&graph, &label_table).map_err(data_err)?;

    let mut out_buf = String::new();
    let _ = writeln!(out_buf, "{}", file_header(None));
    let _ = writeln!(
        out_buf,
        "# config: edges={} labels={} sigma={} phi={} sigma_file={} phi_file={} clamp_eps={}",
        edges_path.display(),
        labels_path.display(),
        sigma,
        phi,
        sigma_file.map_or("-".to_string(), |p| p.display().to_string()),
        phi_file.map_or("-".to_string(), |p| p.display().to_string()),
        clamp_eps
    );
    let _ = writeln!(
        out_buf,
        "# totals: requests_from_fake={} requests_from_real={} requests_labeled={} targets={} informative={}",
        counts.sent_fake(),
        counts.sent_real(),
        counts.sent_total(),
        n,
        rates.informative_count()
    );
    let _ = writeln!(out_buf, "# columns: target_id r_s r_b a_s a_b informative");
    let sel = rates.selection();
    let acc = rates.accept();
    for id in 0..n {
        let node = NodeId(id as u32);
        push_row(
            &mut out_buf,
            &[
                dict.name(id as u32),
                &sel.fake[id].to_string(),
                &sel.real[id].to_string(),
                &acc.fake[id].to_string(),
                &acc.real[id].to_string(),
                fmt_bool(rates.is_informative(node)),
            ],
        );
    }
    crate::iofmt::write_text(out, &out_buf)?;
    println!(
        "wrote {} ({} targets, {} informative)",
        out.display(),
        n,
        rates.informative_count()
    );
    Ok(())
}

// --- score --------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_score(
    edges_path: &Path,
    rates_path: &Path,
    prior: Option<f64>,
    prior_file: Option<&Path>,
    variant: &str,
    clamp_eps: f64,
    explain: bool,
    out: &Path,
) -> Result<(), AppError> {
    validate_clamp(clamp_eps)?;
    let variant = parse_variant(variant)?;
    if prior.is_none() && prior_file.is_none() {
        return Err(AppError::Usage(
            "a prior is required: pass --prior and/or --prior-file".into(),
        ));
    }
    if let Some(p) = prior {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(AppError::Usage(format!(
                "--prior must be in [0, 1], got {p}"
            )));
        }
    }

    let mut dict = NodeDict::new();
    let edges = read_edges(edges_path, &mut dict)?;
    let rate_rows = read_rates(rates_path, &mut dict)?;
    let prior_rows = match prior_file {
        Some(p) => Some(read_node_values(p, &mut dict, "prior", true)?),
        None => None,
    };

    let n = dict.len();
    let graph = build_graph(&dict, edges, edges_path)?;

    // Targets without a rate row contribute nothing, mirroring how a table
    // trained on a smaller graph behaves on a larger one.
    let mut sel = ClassRates {
        fake: vec![0.0; n],
        real: vec![0.0; n],
    };
    let mut acc = ClassRates {
        fake: vec![0.5; n],
        real: vec![0.5; n],
    };
    let mut informative = vec![false; n];
    for row in &rate_rows {
        let i = row.target as usize;
        sel.fake[i] = row.sel_fake;
        sel.real[i] = row.sel_real;
        acc.fake[i] = row.acc_fake;
        acc.real[i] = row.acc_real;
        informative[i] = row.informative;
    }
    let rates = RateTable::from_parts(sel, acc, informative).map_err(data_err)?;

    let prior_cfg = match prior_rows {
        None => Prior::Global(prior.expect("checked above")),
        Some(rows) => {
            let mut values: Vec<Option<f64>> = vec![prior; n];
            for (id, p) in rows {
                values[id as usize] = Some(p);
            }
            let dense: Result<Vec<f64>, AppError> = values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| {
                        AppError::Data(format!(
                            "{}: no prior for node `{}` and no --prior fallback given",
                            prior_file.expect("rows imply file").display(),
                            dict.name(i as u32)
                        ))
                    })
                })
                .collect();
            Prior::PerNode(dense?)
        }
    };

    let config = ScoringConfig::new(prior_cfg, variant)
        .with_clamp_eps(clamp_eps)
        .with_contributions(explain);
    let unknown = LabelTable::new(n);
    let table = score_all(&graph, &rates, &unknown, &config).map_err(data_err)?;

    let header = file_header(None);
    let echo = format!(
        "# config: edges={} rates={} prior={} prior_file={} variant={} clamp_eps={} explain={}",
        edges_path.display(),
        rates_path.display(),
        prior.map_or("-".to_string(), |p| p.to_string()),
        prior_file.map_or("-".to_string(), |p| p.display().to_string()),
        match variant {
            Variant::Full => "full",
            Variant::SelectionOnly => "selection_only",
            Variant::ResponseOnly => "response_only",
        },
        clamp_eps,
        explain
    );

    let mut out_buf = String::new();
    let _ = writeln!(out_buf, "{header}");
    let _ = writeln!(out_buf, "{echo}");
    let _ = writeln!(out_buf, "# columns: node_id p_fake log_odds n_edges_used");
    for entry in table.entries() {
        push_row(
            &mut out_buf,
            &[
                dict.name(entry.node.0),
                &entry.p_fake.to_string(),
                &entry.log_odds.to_string(),
                &entry.edges_used.to_string(),
            ],
        );
    }
    crate::iofmt::write_text(out, &out_buf)?;

    if explain {
        let companion = explain_path(out);
        let mut exp_buf = String::new();
        let _ = writeln!(exp_buf, "{header}");
        let _ = writeln!(exp_buf, "{echo}");
        let _ = writeln!(
            exp_buf,
            "# per-request log-odds contributions; deltas sum to log_odds minus the prior's logit"
        );
        let _ = writeln!(
            exp_buf,
            "# columns: node_id target_id response selection_delta response_delta"
        );
        for entry in table.entries() {
            if let Some(contribs) = &entry.contributions {
                for c in contribs {
                    push_row(
                        &mut exp_buf,
                        &[
                            dict.name(entry.node.0),
                            dict.name(c.target.0),
                            fmt_bool(c.accepted),
                            &c.selection.to_string(),
                            &c.response.to_string(),
                        ],
                    );
                }
            }
        }
        crate::iofmt::write_text(&companion, &exp_buf)?;
        println!(
            "wrote {} ({} nodes), {}",
            out.display(),
            table.len(),
            companion.display()
        );
    } else {
        println!("wrote {} ({} nodes)", out.display(), table.len());
    }
    Ok(())
}

// --- eval ---------------------------------------------------------------

pub fn cmd_eval(
    score_paths: &[PathBuf],
    truth_path: &Path,
    edges_path: Option<&Path>,
    buckets: Option<&str>,
    out: &Path,
) -> Result<(), AppError> {
    let spec = match buckets {
        Some(value) => {
            let parsed = parse_buckets(value)?;
            if parsed.is_some() && edges_path.is_none() {
                return Err(AppError::Usage(
                    "--buckets needs --edges to compute out-degrees (or use --buckets none)".into(),
                ));
            }
            parsed
        }
        // Degree buckets by default whenever the graph is available.
        None => edges_path.map(|_| BucketSpec::fine()),
    };

    let mut dict = NodeDict::new();
    let mut file_rows = Vec::new();
    for path in score_paths {
        file_rows.push(read_scores(path, &mut dict)?);
    }
    let truth_rows = read_labels(truth_path, &mut dict)?;
    let edges = match edges_path {
        Some(p) => read_edges(p, &mut dict)?,
        None => Vec::new(),
    };

    let n = dict.len();
    let graph = build_graph(&dict, edges, edges_path.unwrap_or(truth_path))?;

    let mut is_fake = vec![false; n];
    let mut known = vec![false; n];
    for (id, p) in &truth_rows {
        is_fake[*id as usize] = *p > 0.5;
        known[*id as usize] = true;
    }

    let mut out_buf = String::new();
    let _ = writeln!(out_buf, "{}", file_header(None));
    let _ = writeln!(
        out_buf,
        "# config: truth={} edges={} buckets={}",
        truth_path.display(),
        edges_path.map_or("-".to_string(), |p| p.display().to_string()),
        buckets.unwrap_or(if spec.is_some() { "fine" } else { "none" })
    );
    let _ = writeln!(out_buf, "# columns: score_file bucket n_fake n_real auc");

    let fmt_auc = |auc: Option<f64>| auc.map_or("NA".to_string(), |a| a.to_string());
    let mut stdout_lines = Vec::new();
    for (path, rows) in score_paths.iter().zip(&file_rows) {
        let mut scores = vec![0.0; n];
        let mut test = Vec::new();
        let mut skipped = 0usize;
        for (id, s) in rows {
            scores[*id as usize] = *s;
            if known[*id as usize] {
                test.push(NodeId(*id));
            } else {
                skipped += 1;
            }
        }
        if skipped > 0 {
            let _ = writeln!(
                out_buf,
                "# note: {}: {skipped} scored node(s) have no truth label and were skipped",
                path.display()
            );
        }
        let result = bucketed_auc(&graph, &test, &scores, &is_fake, spec.as_ref())
            .map_err(data_err)?;
        let name = path.display().to_string();
        push_row(
            &mut out_buf,
            &[
                &name,
                "all",
                &result.n_fake.to_string(),
                &result.n_real.to_string(),
                &fmt_auc(result.auc),
            ],
        );
        stdout_lines.push(format!("{name}\tall\t{}", fmt_auc(result.auc)));
        for bucket in &result.buckets {
            push_row(
                &mut out_buf,
                &[
                    &name,
                    &bucket.bucket,
                    &bucket.n_fake.to_string(),
                    &bucket.n_real.to_string(),
                    &fmt_auc(bucket.auc),
                ],
            );
        }
    }

    crate::iofmt::write_text(out, &out_buf)?;
    println!("wrote {}", out.display());
    for line in stdout_lines {
        println!("{line}");
    }
    Ok(())
}

// --- experiment ---------------------------------------------------------

pub fn cmd_experiment(config_path: &Path, out_dir: &Path) -> Result<(), AppError> {
    let mut cfg = Config::load(config_path)?;

    let mode = cfg.require_str("mode")?;
    let n = cfg.require_usize("n")?;
    let fraction_known = cfg.get_f64("fraction_known")?.unwrap_or(0.8);
    let stratified_split = cfg.get_bool("stratified_split")?.unwrap_or(false);
    let seeds = cfg.require_seeds("seeds")?;

    let methods: Vec<Method> = match cfg.get_list("methods")? {
        None => Method::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|name| {
                Method::parse(name).ok_or_else(|| {
                    AppError::Usage(format!(
                        "unknown method `{name}`; expected one of {}",
                        Method::ALL.map(|m| m.name()).join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?,
    };

    let mut method_cfg = MethodConfig::default();
    if let Some(sigma) = cfg.get_str("sigma") {
        method_cfg.sigma = parse_confidence("sigma", &sigma)?;
    }
    if let Some(phi) = cfg.get_str("phi") {
        method_cfg.phi = parse_confidence("phi", &phi)?;
    }
    if let Some(eps) = cfg.get_f64("clamp_eps")? {
        validate_clamp(eps)?;
        method_cfg.clamp_eps = eps;
    }
    if let Some(p) = cfg.get_f64("prior")? {
        if !(0.0..=1.0).contains(&p) {
            return Err(AppError::Usage(format!("prior must be in [0, 1], got {p}")));
        }
        method_cfg.prior = Some(p);
    }
    if let Some(iters) = cfg.get_u64("trust_iterations")? {
        method_cfg.trust_iterations = Some(iters as usize);
    }

    let mut base = SweepBase::new(n, fraction_known);
    base.stratified_split = stratified_split;
    if let Some(value) = cfg.get_str("buckets") {
        base.buckets = parse_buckets(&value)?;
    }
    let fp = &mut base.family_params;
    if let Some(x) = cfg.get_f64("cm_exponent")? {
        fp.cm_exponent = x;
    }
    if let Some(x) = cfg.get_u32("cm_cap")? {
        fp.cm_cap = x;
    }
    if let Some(x) = cfg.get_f64("sbm_real_affinity")? {
        fp.sbm_real_affinity = x;
    }
    if let Some(x) = cfg.get_f64("sbm_fake_affinity")? {
        fp.sbm_fake_affinity = x;
    }
    if let Some(x) = cfg.get_f64("pa_real_sigma")? {
        fp.pa_real_sigma = x;
    }
    if let Some(x) = cfg.get_f64("pa_fake_sigma")? {
        fp.pa_fake_sigma = x;
    }
    if let Some(x) = cfg.get_f64("pa_collusion")? {
        fp.pa_collusion = x;
    }
    for (key, slot) in [
        ("real_accept_real", 0usize),
        ("real_accept_fake", 1),
        ("fake_accept_real", 2),
        ("fake_accept_fake", 3),
    ] {
        if let Some((alpha, beta)) = cfg.get_beta_pair(key)? {
            let spec = BetaSpec::new(alpha, beta);
            match slot {
                0 => base.profiles.real_accept_real = spec,
                1 => base.profiles.real_accept_fake = spec,
                2 => base.profiles.fake_accept_real = spec,
                _ => base.profiles.fake_accept_fake = spec,
            }
        }
    }

    let parse_family = |name: &str| {
        GeneratorFamily::parse(name).ok_or_else(|| {
            AppError::Usage(format!(
                "unknown generator `{name}`; expected one of erdos_renyi, configuration, sbm, preferential_attachment"
            ))
        })
    };

    let report = match mode.as_str() {
        "grid" => {
            let families: Vec<GeneratorFamily> = cfg
                .require_list("families")?
                .iter()
                .map(|name| parse_family(name))
                .collect::<Result<_, _>>()?;
            let grid = GeneratorGrid {
                families,
                mean_degrees: cfg.require_f64_list("mean_degrees")?,
                fake_fractions: cfg.require_f64_list("fake_fractions")?,
            };
            let resolved = cfg.echo_consumed();
            cfg.finish()?;
            println!(
                "running grid sweep: {} point(s) x {} seed(s) x {} method(s)",
                grid.families.len() * grid.mean_degrees.len() * grid.fake_fractions.len(),
                seeds.len(),
                methods.len()
            );
            let report = run_generator_sweep(&base, &grid, &methods, &seeds, &method_cfg)
                .map_err(data_err)?;
            (report, resolved)
        }
        "noise" => {
            let family = parse_family(&cfg.require_str("family")?)?;
            let grid = NoiseGrid {
                family,
                mean_degree: cfg.require_f64("mean_degree")?,
                fraction_fake: cfg.require_f64("fraction_fake")?,
                flip_probs: cfg.require_f64_list("flip_probs")?,
            };
            let resolved = cfg.echo_consumed();
            cfg.finish()?;
            println!(
                "running noise sweep: {} flip level(s) x {} seed(s) x {} method(s)",
                grid.flip_probs.len(),
                seeds.len(),
                methods.len()
            );
            let report =
                run_noise_sweep(&base, &grid, &methods, &seeds, &method_cfg).map_err(data_err)?;
            (report, resolved)
        }
        other => {
            return Err(AppError::Usage(format!(
                "mode must be `grid` or `noise`, got `{other}`"
            )))
        }
    };
    let (report, resolved) = report;

    // JSON cannot carry a `#` comment line, so the header fields are
    // embedded as top-level keys instead.
    let report_value: serde_json::Value = serde_json::from_str(&report.to_json())
        .map_err(|e| AppError::Data(format!("report serialization failed: {e}")))?;
    let argv: Vec<String> = std::env::args().collect();
    let wrapped = serde_json::json!({
        "tool": "sybiledge",
        "version": env!("CARGO_PKG_VERSION"),
        "command": argv.join(" "),
        "config": resolved,
        "report": report_value,
    });
    let json_text = serde_json::to_string_pretty(&wrapped)
        .map_err(|e| AppError::Data(format!("report serialization failed: {e}")))?;

    let header = file_header(None);
    let echo = format!("# config: {resolved}");
    let tsv_with_header = |body: String| format!("{header}\n{echo}\n{body}");

    let json_path = out_dir.join("report.json");
    let rows_path = out_dir.join("rows.tsv");
    let summary_path = out_dir.join("summary.tsv");
    crate::iofmt::write_text(&json_path, &json_text)?;
    crate::iofmt::write_text(&rows_path, &tsv_with_header(report.rows_tsv()))?;
    let summary_body = report.summary_tsv();
    crate::iofmt::write_text(&summary_path, &tsv_with_header(summary_body.clone()))?;

    println!(
        "wrote {}, {}, {} ({} rows, {:.1}s)",
        json_path.display(),
        rows_path.display(),
        summary_path.display(),
        report.rows.len(),
        report.total_seconds
    );
    print!("{summary_body}");
    Ok(())
}
