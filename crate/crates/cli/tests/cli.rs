//! End-to-end tests of the `sybiledge` binary: every command is exercised
//! through real files in a temp directory, checking outputs, exit codes,
//! and error messages.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sybiledge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("write fixture");
    path
}

fn read_file(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Non-comment rows as tab-split fields.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

const GEN_CFG: &str = "n = 400\n\
                       generator = erdos_renyi\n\
                       mean_degree = 8\n\
                       fraction_fake = 0.1\n\
                       fraction_known = 0.75\n\
                       seed = 42\n";

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let help = run_in(dir.path(), &["--help"]);
    assert_eq!(exit_code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for cmd in ["generate", "train", "score", "eval", "experiment"] {
        assert!(text.contains(cmd), "--help does not mention {cmd}");
    }
    let version = run_in(dir.path(), &["--version"]);
    assert_eq!(exit_code(&version), 0);
    assert!(String::from_utf8_lossy(&version.stdout).contains("0.1.0"));

    let bad_flag = run_in(dir.path(), &["train", "--no-such-flag"]);
    assert_eq!(exit_code(&bad_flag), 1);
}

#[test]
fn generate_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "gen.cfg", GEN_CFG);
    let args = ["generate", "--config", "gen.cfg", "--out", "scen"];

    assert_ok(&run_in(dir.path(), &args));
    let first: Vec<String> = ["edges.tsv", "truth.tsv", "training.tsv"]
        .iter()
        .map(|f| read_file(&dir.path().join("scen").join(f)))
        .collect();

    assert_ok(&run_in(dir.path(), &args));
    for (i, f) in ["edges.tsv", "truth.tsv", "training.tsv"].iter().enumerate() {
        let second = read_file(&dir.path().join("scen").join(f));
        assert_eq!(first[i], second, "{f} changed between identical runs");
    }

    // A different seed must actually change the scenario.
    assert_ok(&run_in(
        dir.path(),
        &["generate", "--config", "gen.cfg", "--seed", "43", "--out", "scen43"],
    ));
    let other = read_file(&dir.path().join("scen43/edges.tsv"));
    assert_ne!(
        data_rows(&first[0]),
        data_rows(&other),
        "seed override did not change the edge list"
    );
}

#[test]
fn pipeline_round_trip_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "gen.cfg", GEN_CFG);

    let pipeline = [
        vec!["generate", "--config", "gen.cfg", "--out", "scen"],
        vec![
            "train",
            "--edges",
            "scen/edges.tsv",
            "--labels",
            "scen/training.tsv",
            "--out",
            "rates.tsv",
        ],
        vec![
            "score",
            "--edges",
            "scen/edges.tsv",
            "--rates",
            "rates.tsv",
            "--prior",
            "0.1",
            "--out",
            "scores.tsv",
        ],
        vec![
            "eval",
            "--scores",
            "scores.tsv",
            "--truth",
            "scen/truth.tsv",
            "--edges",
            "scen/edges.tsv",
            "--out",
            "report.tsv",
        ],
    ];
    let outputs = ["scen/edges.tsv", "rates.tsv", "scores.tsv", "report.tsv"];

    for step in &pipeline {
        assert_ok(&run_in(dir.path(), step));
    }
    let first: Vec<String> = outputs
        .iter()
        .map(|f| read_file(&dir.path().join(f)))
        .collect();

    for step in &pipeline {
        assert_ok(&run_in(dir.path(), step));
    }
    for (i, f) in outputs.iter().enumerate() {
        assert_eq!(
            first[i],
            read_file(&dir.path().join(f)),
            "{f} is not byte-reproducible"
        );
    }

    // The report must contain a real overall AUC for the score file.
    let report = read_file(&dir.path().join("report.tsv"));
    let all_row = data_rows(&report)
        .into_iter()
        .find(|r| r[1] == "all")
        .expect("overall row present");
    let auc: f64 = all_row[4].parse().expect("numeric AUC");
    assert!((0.0..=1.0).contains(&auc));
    // Every output begins with the tool header.
    for f in outputs {
        let text = read_file(&dir.path().join(f));
        assert!(
            text.starts_with("# sybiledge 0.1.0 | "),
            "{f} lacks the tool header"
        );
    }
}

#[test]
fn train_sigma_inf_equalizes_selection_rates() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "gen.cfg", GEN_CFG);
    assert_ok(&run_in(
        dir.path(),
        &["generate", "--config", "gen.cfg", "--out", "scen"],
    ));
    let train = |sigma: &str, out: &str| {
        assert_ok(&run_in(
            dir.path(),
            &[
                "train",
                "--edges",
                "scen/edges.tsv",
                "--labels",
                "scen/training.tsv",
                "--sigma",
                sigma,
                "--out",
                out,
            ],
        ));
    };
    train("inf", "rates_inf.tsv");
    train("5", "rates_finite.tsv");

    let inf_rows = data_rows(&read_file(&dir.path().join("rates_inf.tsv")));
    assert!(!inf_rows.is_empty());
    for row in &inf_rows {
        assert_eq!(row[1], row[2], "sigma=inf row has r_s != r_b: {row:?}");
    }
    let finite_rows = data_rows(&read_file(&dir.path().join("rates_finite.tsv")));
    assert!(
        finite_rows.iter().any(|r| r[1] != r[2]),
        "finite sigma produced no class-separated selection rates"
    );
}

#[test]
fn train_sigma_file_overrides_only_listed_targets() {
    let dir = tempfile::tempdir().unwrap();
    // Two labeled senders, two contested targets.
    write_file(
        dir.path(),
        "edges.tsv",
        "u\tt1\t1\nu\tt2\t0\nv\tt1\t0\nv\tt2\t1\nu\tv\t1\n",
    );
    write_file(dir.path(), "labels.tsv", "u\t1\nv\t0\n");
    let base = [
        "train",
        "--edges",
        "edges.tsv",
        "--labels",
        "labels.tsv",
        "--sigma",
        "2",
        "--out",
    ];
    let mut plain = base.to_vec();
    plain.push("rates_plain.tsv");
    assert_ok(&run_in(dir.path(), &plain));

    write_file(dir.path(), "sigma.tsv", "t1\t0\n");
    let mut with_file = base.to_vec();
    with_file.push("rates_override.tsv");
    with_file.extend_from_slice(&["--sigma-file", "sigma.tsv"]);
    assert_ok(&run_in(dir.path(), &with_file));

    let by_target = |text: &str| -> std::collections::HashMap<String, Vec<String>> {
        data_rows(text)
            .into_iter()
            .map(|r| (r[0].clone(), r))
            .collect()
    };
    let plain_rows = by_target(&read_file(&dir.path().join("rates_plain.tsv")));
    let over_rows = by_target(&read_file(&dir.path().join("rates_override.tsv")));
    assert_ne!(
        plain_rows["t1"], over_rows["t1"],
        "per-target sigma did not change the listed target"
    );
    assert_eq!(
        plain_rows["t2"], over_rows["t2"],
        "per-target sigma leaked onto an unlisted target"
    );

    // Mixing an infinite scalar with a per-target file is contradictory.
    let mut bad = base.to_vec();
    bad[6] = "inf";
    bad.push("rates_bad.tsv");
    bad.extend_from_slice(&["--sigma-file", "sigma.tsv"]);
    let out = run_in(dir.path(), &bad);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("cannot combine"));
}

#[test]
fn missing_config_key_exits_one_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "gen.cfg",
        "generator = erdos_renyi\nmean_degree = 5\nseed = 1\n",
    );
    let out = run_in(
        dir.path(),
        &["generate", "--config", "gen.cfg", "--out", "scen"],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(
        stderr_of(&out).contains("missing required key `n`"),
        "stderr was: {}",
        stderr_of(&out)
    );
}

#[test]
fn unknown_config_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "gen.cfg",
        "n = 100\ngenerator = erdos_renyi\nmean_degree = 5\nbogus_knob = 3\nseed = 1\n",
    );
    let out = run_in(
        dir.path(),
        &["generate", "--config", "gen.cfg", "--out", "scen"],
    );
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(
        err.contains("gen.cfg:4: unknown key `bogus_knob`"),
        "stderr was: {err}"
    );
}

#[test]
fn empty_labels_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "edges.tsv", "a\tb\t1\nb\tc\t0\n");
    write_file(dir.path(), "labels.tsv", "# no rows yet\n");
    let out = run_in(
        dir.path(),
        &[
            "train",
            "--edges",
            "edges.tsv",
            "--labels",
            "labels.tsv",
            "--out",
            "rates.tsv",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr_of(&out).contains("empty training set"),
        "stderr was: {}",
        stderr_of(&out)
    );
}

#[test]
fn malformed_data_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "edges.tsv", "a\tb\t1\nb\tc\t7\n");
    write_file(dir.path(), "labels.tsv", "a\t1\n");
    let out = run_in(
        dir.path(),
        &[
            "train",
            "--edges",
            "edges.tsv",
            "--labels",
            "labels.tsv",
            "--out",
            "rates.tsv",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    assert!(
        err.contains("edges.tsv:2") && err.contains("response"),
        "stderr was: {err}"
    );

    // A duplicate request is reported with the original tokens.
    write_file(dir.path(), "dup.tsv", "alice\tbob\t1\nalice\tbob\t0\n");
    let out = run_in(
        dir.path(),
        &[
            "train",
            "--edges",
            "dup.tsv",
            "--labels",
            "labels.tsv",
            "--out",
            "rates.tsv",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    assert!(
        err.contains("duplicate request edge `alice` -> `bob`"),
        "stderr was: {err}"
    );
}

#[test]
fn explain_contributions_reconstruct_the_posterior() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "edges.tsv", "u\tt1\t1\nu\tt2\t0\nv\tt1\t1\n");
    // Handmade rates with clean ratios.
    write_file(
        dir.path(),
        "rates.tsv",
        "t1\t0.3\t0.1\t0.8\t0.4\t1\n\
         t2\t0.05\t0.2\t0.5\t0.9\t1\n\
         u\t0\t0\t0.5\t0.5\t0\n\
         v\t0\t0\t0.5\t0.5\t0\n",
    );
    let prior: f64 = 0.1;
    assert_ok(&run_in(
        dir.path(),
        &[
            "score",
            "--edges",
            "edges.tsv",
            "--rates",
            "rates.tsv",
            "--prior",
            "0.1",
            "--explain",
            "--out",
            "scores.tsv",
        ],
    ));

    let scores: std::collections::HashMap<String, (f64, f64, u32)> =
        data_rows(&read_file(&dir.path().join("scores.tsv")))
            .into_iter()
            .map(|r| {
                (
                    r[0].clone(),
                    (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap()),
                )
            })
            .collect();
    let explain = data_rows(&read_file(&dir.path().join("scores.explain.tsv")));

    // u: accepted by t1, rejected by t2 -> four exact log-ratio deltas.
    let u_rows: Vec<&Vec<String>> = explain.iter().filter(|r| r[0] == "u").collect();
    assert_eq!(u_rows.len(), 2);
    let delta = |target: &str, col: usize| -> f64 {
        u_rows
            .iter()
            .find(|r| r[1] == target)
            .unwrap_or_else(|| panic!("no explain row for u -> {target}"))[col]
            .parse()
            .unwrap()
    };
    let expect = [
        ("t1", 3, (0.3f64 / 0.1).ln()),
        ("t1", 4, (0.8f64 / 0.4).ln()),
        ("t2", 3, (0.05f64 / 0.2).ln()),
        ("t2", 4, (0.5f64 / 0.1).ln()),
    ];
    for (target, col, want) in expect {
        let got = delta(target, col);
        assert!(
            (got - want).abs() < 1e-9,
            "delta for u -> {target} col {col}: got {got}, want {want}"
        );
    }

    // Deltas plus the prior's log-odds reproduce the reported posterior.
    let logit = |p: f64| (p / (1.0 - p)).ln();
    for (node, (p_fake, log_odds, edges_used)) in &scores {
        let sum: f64 = explain
            .iter()
            .filter(|r| &r[0] == node)
            .map(|r| r[3].parse::<f64>().unwrap() + r[4].parse::<f64>().unwrap())
            .sum();
        let reconstructed = logit(prior) + sum;
        assert!(
            (reconstructed - log_odds).abs() < 1e-9,
            "node {node}: contributions sum to {reconstructed}, file says {log_odds}"
        );
        let sigmoid = 1.0 / (1.0 + (-log_odds).exp());
        assert!((sigmoid - p_fake).abs() < 1e-12);
        // Unscored senders (pure targets) keep the prior and no edges.
        if *edges_used == 0 {
            assert!((p_fake - prior).abs() < 1e-12, "silent node {node} moved off the prior");
        }
    }
    // t1 and t2 sent nothing, so they must sit exactly on the prior.
    assert_eq!(scores["t1"].2, 0);
    assert_eq!(scores["t2"].2, 0);
}

#[test]
fn named_nodes_round_trip_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "edges.tsv",
        "alice\tbob\t1\nalice\tcarol\t0\ndave\tbob\t1\ndave\tcarol\t1\n",
    );
    write_file(dir.path(), "labels.tsv", "alice\t0\ndave\t1\n");
    assert_ok(&run_in(
        dir.path(),
        &[
            "train",
            "--edges",
            "edges.tsv",
            "--labels",
            "labels.tsv",
            "--out",
            "rates.tsv",
        ],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "score",
            "--edges",
            "edges.tsv",
            "--rates",
            "rates.tsv",
            "--prior",
            "0.2",
            "--out",
            "scores.tsv",
        ],
    ));
    let tokens: Vec<String> = data_rows(&read_file(&dir.path().join("scores.tsv")))
        .into_iter()
        .map(|r| r[0].clone())
        .collect();
    for name in ["alice", "bob", "carol", "dave"] {
        assert!(tokens.contains(&name.to_string()), "missing node {name}");
    }

    write_file(
        dir.path(),
        "truth.tsv",
        "alice\t0\nbob\t0\ncarol\t1\ndave\t1\n",
    );
    let out = run_in(
        dir.path(),
        &[
            "eval",
            "--scores",
            "scores.tsv",
            "--truth",
            "truth.tsv",
            "--out",
            "report.tsv",
        ],
    );
    assert_ok(&out);
    let report = read_file(&dir.path().join("report.tsv"));
    let all_row = data_rows(&report)
        .into_iter()
        .find(|r| r[1] == "all")
        .expect("overall row");
    assert_eq!(all_row[2], "2");
    assert_eq!(all_row[3], "2");
}

#[test]
fn eval_reports_files_side_by_side_with_na_buckets() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "edges.tsv", "b\ta\t1\nc\ta\t0\nc\tb\t1\n");
    write_file(dir.path(), "truth.tsv", "a\t1\nb\t0\nc\t0\nd\t1\n");
    write_file(dir.path(), "good.tsv", "a\t0.9\nb\t0.1\nc\t0.2\nd\t0.8\n");
    write_file(dir.path(), "bad.tsv", "a\t0.1\nb\t0.9\nc\t0.8\nd\t0.2\n");
    let out = run_in(
        dir.path(),
        &[
            "eval",
            "--scores",
            "good.tsv",
            "bad.tsv",
            "--truth",
            "truth.tsv",
            "--edges",
            "edges.tsv",
            "--buckets",
            "0:2,3:",
            "--out",
            "report.tsv",
        ],
    );
    assert_ok(&out);
    let rows = data_rows(&read_file(&dir.path().join("report.tsv")));

    let find = |file: &str, bucket: &str| -> Vec<String> {
        rows.iter()
            .find(|r| r[0] == file && r[1] == bucket)
            .unwrap_or_else(|| panic!("no row for {file}/{bucket}"))
            .clone()
    };
    assert_eq!(find("good.tsv", "all")[4], "1");
    assert_eq!(find("bad.tsv", "all")[4], "0");
    // All nodes have out-degree <= 2, so the open bucket is empty -> NA.
    assert_eq!(find("good.tsv", "3+")[4], "NA");
    assert_eq!(find("bad.tsv", "3+")[4], "NA");

    // Degree buckets without an edge file cannot work.
    let out = run_in(
        dir.path(),
        &[
            "eval",
            "--scores",
            "good.tsv",
            "--truth",
            "truth.tsv",
            "--buckets",
            "fine",
            "--out",
            "r2.tsv",
        ],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("--edges"));
}

#[test]
fn score_prior_file_must_cover_every_node_without_fallback() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "edges.tsv", "u\tt1\t1\nv\tt1\t0\n");
    write_file(
        dir.path(),
        "rates.tsv",
        "t1\t0.3\t0.1\t0.8\t0.4\t1\nu\t0\t0\t0.5\t0.5\t0\nv\t0\t0\t0.5\t0.5\t0\n",
    );
    write_file(dir.path(), "priors.tsv", "u\t0.3\n");
    let args = [
        "score",
        "--edges",
        "edges.tsv",
        "--rates",
        "rates.tsv",
        "--prior-file",
        "priors.tsv",
        "--out",
        "scores.tsv",
    ];
    let out = run_in(dir.path(), &args);
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    assert!(
        err.contains("no prior for node `v`") || err.contains("no prior for node `t1`"),
        "stderr was: {err}"
    );

    // With a scalar fallback the same call succeeds and the listed node
    // keeps its own prior.
    let mut with_fallback = args.to_vec();
    with_fallback.extend_from_slice(&["--prior", "0.05"]);
    assert_ok(&run_in(dir.path(), &with_fallback));
    let scores = data_rows(&read_file(&dir.path().join("scores.tsv")));
    let row = |name: &str| {
        scores
            .iter()
            .find(|r| r[0] == name)
            .unwrap_or_else(|| panic!("no score row for {name}"))
            .clone()
    };
    // t1 sent nothing: its posterior equals its prior, the 0.05 fallback.
    let t1_posterior: f64 = row("t1")[1].parse().unwrap();
    assert!((t1_posterior - 0.05).abs() < 1e-12);

    // No prior at all is a usage error.
    let out = run_in(
        dir.path(),
        &[
            "score",
            "--edges",
            "edges.tsv",
            "--rates",
            "rates.tsv",
            "--out",
            "s2.tsv",
        ],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("--prior"));
}

#[test]
fn experiment_grid_writes_json_and_tsv_reports() {
    let dir = tempfile::tempdir().unwrap();
    write_file(
        dir.path(),
        "exp.cfg",
        "mode = grid\n\
         n = 300\n\
         families = erdos_renyi\n\
         mean_degrees = 6\n\
         fake_fractions = 0.1\n\
         seeds = 1,2\n\
         methods = sybil_edge, reject_rate\n\
         buckets = none\n",
    );
    let out = run_in(
        dir.path(),
        &["experiment", "--config", "exp.cfg", "--out", "exp"],
    );
    assert_ok(&out);

    let json_text = read_file(&dir.path().join("exp/report.json"));
    let json: serde_json::Value = serde_json::from_str(&json_text).expect("valid JSON");
    assert_eq!(json["tool"], "sybiledge");
    let rows = json["report"]["rows"].as_array().expect("rows array");
    // 1 family x 1 degree x 1 fraction x 2 seeds x 2 methods.
    assert_eq!(rows.len(), 4);

    let rows_tsv = read_file(&dir.path().join("exp/rows.tsv"));
    assert!(rows_tsv.starts_with("# sybiledge"));
    assert_eq!(data_rows(&rows_tsv).len(), 1 + 4, "header row plus one per sweep row");

    let summary = read_file(&dir.path().join("exp/summary.tsv"));
    let summary_rows = data_rows(&summary);
    // Column header plus one row per (point, method).
    assert_eq!(summary_rows.len(), 1 + 2);
    for method in ["sybil_edge", "reject_rate"] {
        assert!(
            summary_rows.iter().any(|r| r[4] == method),
            "summary lacks {method}"
        );
        // Two seeds aggregated.
        assert!(summary_rows
            .iter()
            .filter(|r| r[4] == method)
            .all(|r| r[7] == "2"));
    }

    // Unknown mode is a usage error.
    write_file(dir.path(), "bad.cfg", "mode = banana\nn = 100\nseeds = 1\n");
    let out = run_in(
        dir.path(),
        &["experiment", "--config", "bad.cfg", "--out", "exp2"],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("mode"));
}

#[test]
fn threads_flag_caps_workers_without_changing_results() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "gen.cfg", GEN_CFG);
    assert_ok(&run_in(
        dir.path(),
        &["generate", "--config", "gen.cfg", "--out", "scen"],
    ));
    let train = |extra: &[&str], out: &str| {
        let mut args = vec![
            "train",
            "--edges",
            "scen/edges.tsv",
            "--labels",
            "scen/training.tsv",
            "--out",
            out,
        ];
        args.extend_from_slice(extra);
        assert_ok(&run_in(dir.path(), &args));
    };
    train(&[], "rates_default.tsv");
    train(&["--threads", "1"], "rates_t1.tsv");

    // Identical rows regardless of worker count (headers differ by argv).
    assert_eq!(
        data_rows(&read_file(&dir.path().join("rates_default.tsv"))),
        data_rows(&read_file(&dir.path().join("rates_t1.tsv")))
    );

    let out = run_in(dir.path(), &["--threads", "0", "train"]);
    assert_eq!(exit_code(&out), 1);
}
