//! Readers and writers for the TSV file formats.
//!
//! Node tokens in input files are arbitrary non-empty strings (no tabs).
//! They are interned in first-appearance order into dense ids `0..n`, and
//! every output echoes the original tokens, so numeric and named graphs
//! round-trip identically. Lines starting with `#` and blank lines are
//! ignored in all readers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sybiledge::{GraphError, RequestGraph};

use crate::AppError;

/// Interning table from node tokens to dense ids.
#[derive(Default)]
pub struct NodeDict {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl NodeDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

/// Non-comment lines of a TSV file as `(line_number, fields)`.
///
/// Fields are tab-separated; a trailing `\r` (CRLF input) is stripped.
pub fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>, AppError> {
    let display = path.display();
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("cannot read {display}: {e}")))?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_string()).collect();
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

fn field_count_err(path: &Path, line: usize, want: &str, got: usize) -> AppError {
    AppError::Data(format!(
        "{}:{line}: expected {want}, got {got} field(s)",
        path.display()
    ))
}

fn parse_node(
    path: &Path,
    line: usize,
    token: &str,
    dict: &mut NodeDict,
) -> Result<u32, AppError> {
    if token.is_empty() {
        return Err(AppError::Data(format!(
            "{}:{line}: empty node token",
            path.display()
        )));
    }
    Ok(dict.intern(token))
}

fn parse_binary(path: &Path, line: usize, what: &str, token: &str) -> Result<bool, AppError> {
    match token {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(AppError::Data(format!(
            "{}:{line}: {what} must be 0 or 1, got `{token}`",
            path.display()
        ))),
    }
}

fn parse_float(path: &Path, line: usize, what: &str, token: &str) -> Result<f64, AppError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| {
            AppError::Data(format!(
                "{}:{line}: {what} must be a finite number, got `{token}`",
                path.display()
            ))
        })
}

fn parse_probability(path: &Path, line: usize, what: &str, token: &str) -> Result<f64, AppError> {
    let x = parse_float(path, line, what, token)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(AppError::Data(format!(
            "{}:{line}: {what} must be in [0, 1], got `{token}`",
            path.display()
        )));
    }
    Ok(x)
}

/// Edge file: `source <TAB> target <TAB> response` with response in {0, 1}.
pub fn read_edges(path: &Path, dict: &mut NodeDict) -> Result<Vec<(u32, u32, bool)>, AppError> {
    let mut edges = Vec::new();
    for (line, fields) in read_rows(path)? {
        if fields.len() != 3 {
            return Err(field_count_err(
                path,
                line,
                "3 tab-separated fields (source, target, response)",
                fields.len(),
            ));
        }
        let source = parse_node(path, line, &fields[0], dict)?;
        let target = parse_node(path, line, &fields[1], dict)?;
        let response = parse_binary(path, line, "response", &fields[2])?;
        edges.push((source, target, response));
    }
    Ok(edges)
}

/// Label file: `node <TAB> p_fake` with p_fake in [0, 1]. Nodes absent from
/// the file are unlabeled. Returns `(id, p_fake)` pairs.
pub fn read_labels(path: &Path, dict: &mut NodeDict) -> Result<Vec<(u32, f64)>, AppError> {
    let mut rows = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    for (line, fields) in read_rows(path)? {
        if fields.len() != 2 {
            return Err(field_count_err(
                path,
                line,
                "2 tab-separated fields (node, p_fake)",
                fields.len(),
            ));
        }
        let node = parse_node(path, line, &fields[0], dict)?;
        let p = parse_probability(path, line, "p_fake", &fields[1])?;
        if let Some(first) = seen.insert(node, line) {
            return Err(AppError::Data(format!(
                "{}:{line}: duplicate label for node `{}` (first on line {first})",
                path.display(),
                fields[0]
            )));
        }
        rows.push((node, p));
    }
    Ok(rows)
}

/// Per-node numeric file: `node <TAB> value` (confidence strengths,
/// priors). `unit_interval` restricts values to [0, 1]; otherwise any
/// non-negative finite value is accepted.
pub fn read_node_values(
    path: &Path,
    dict: &mut NodeDict,
    what: &str,
    unit_interval: bool,
) -> Result<Vec<(u32, f64)>, AppError> {
    let mut rows = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    for (line, fields) in read_rows(path)? {
        if fields.len() != 2 {
            return Err(field_count_err(
                path,
                line,
                "2 tab-separated fields (node, value)",
                fields.len(),
            ));
        }
        let node = parse_node(path, line, &fields[0], dict)?;
        let value = if unit_interval {
            parse_probability(path, line, what, &fields[1])?
        } else {
            let x = parse_float(path, line, what, &fields[1])?;
            if x < 0.0 {
                return Err(AppError::Data(format!(
                    "{}:{line}: {what} must be non-negative, got `{}`",
                    path.display(),
                    fields[1]
                )));
            }
            x
        };
        if let Some(first) = seen.insert(node, line) {
            return Err(AppError::Data(format!(
                "{}:{line}: duplicate entry for node `{}` (first on line {first})",
                path.display(),
                fields[0]
            )));
        }
        rows.push((node, value));
    }
    Ok(rows)
}

/// One row of a rate file.
pub struct RateRow {
    pub target: u32,
    pub sel_fake: f64,
    pub sel_real: f64,
    pub acc_fake: f64,
    pub acc_real: f64,
    pub informative: bool,
}

/// Rate file: `target_id r_s r_b a_s a_b informative`, all tab-separated;
/// the four rates are in [0, 1] and `informative` is 0/1.
pub fn read_rates(path: &Path, dict: &mut NodeDict) -> Result<Vec<RateRow>, AppError> {
    let mut rows = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    for (line, fields) in read_rows(path)? {
        if fields.len() != 6 {
            return Err(field_count_err(
                path,
                line,
                "6 tab-separated fields (target_id, r_s, r_b, a_s, a_b, informative)",
                fields.len(),
            ));
        }
        let target = parse_node(path, line, &fields[0], dict)?;
        if let Some(first) = seen.insert(target, line) {
            return Err(AppError::Data(format!(
                "{}:{line}: duplicate rate row for target `{}` (first on line {first})",
                path.display(),
                fields[0]
            )));
        }
        rows.push(RateRow {
            target,
            sel_fake: parse_probability(path, line, "r_s", &fields[1])?,
            sel_real: parse_probability(path, line, "r_b", &fields[2])?,
            acc_fake: parse_probability(path, line, "a_s", &fields[3])?,
            acc_real: parse_probability(path, line, "a_b", &fields[4])?,
            informative: parse_binary(path, line, "informative", &fields[5])?,
        });
    }
    Ok(rows)
}

/// Score file: first two columns are `node` and a finite score; extra
/// columns (log-odds, edge counts, method tags) are ignored so that score,
/// baseline, and external files all evaluate the same way.
pub fn read_scores(path: &Path, dict: &mut NodeDict) -> Result<Vec<(u32, f64)>, AppError> {
    let mut rows = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    for (line, fields) in read_rows(path)? {
        if fields.len() < 2 {
            return Err(field_count_err(
                path,
                line,
                "at least 2 tab-separated fields (node, score)",
                fields.len(),
            ));
        }
        let node = parse_node(path, line, &fields[0], dict)?;
        let score = parse_float(path, line, "score", &fields[1])?;
        if let Some(first) = seen.insert(node, line) {
            return Err(AppError::Data(format!(
                "{}:{line}: duplicate score for node `{}` (first on line {first})",
                path.display(),
                fields[0]
            )));
        }
        rows.push((node, score));
    }
    Ok(rows)
}

/// Builds the request graph over the dict's full node range, translating
/// validation failures back into the original tokens.
pub fn build_graph(
    dict: &NodeDict,
    edges: Vec<(u32, u32, bool)>,
    edges_path: &Path,
) -> Result<RequestGraph, AppError> {
    RequestGraph::build(dict.len(), edges).map_err(|e| {
        let display = edges_path.display();
        match e {
            GraphError::DuplicateEdge(s, t) => AppError::Data(format!(
                "{display}: duplicate request edge `{}` -> `{}`",
                dict.name(s.0),
                dict.name(t.0)
            )),
            GraphError::SelfLoop(s) => AppError::Data(format!(
                "{display}: node `{}` sends a request to itself",
                dict.name(s.0)
            )),
            other => AppError::Data(format!("{display}: {other}")),
        }
    })
}

/// First header line of every output file: tool version, command line, seed.
pub fn file_header(seed: Option<u64>) -> String {
    let argv: Vec<String> = std::env::args().collect();
    let seed = match seed {
        Some(s) => s.to_string(),
        None => "-".to_string(),
    };
    format!(
        "# sybiledge {} | {} | seed={}",
        env!("CARGO_PKG_VERSION"),
        argv.join(" "),
        seed
    )
}

/// Writes a file, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| AppError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display())))
}

/// `scores.tsv` -> `scores.explain.tsv` (inserted before the extension).
pub fn explain_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scores".to_string());
    let ext = out
        .extension()
        .map(|s| format!(".{}", s.to_string_lossy()))
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.explain{ext}"))
}

/// Appends a TSV row of already-formatted fields.
pub fn push_row(buf: &mut String, fields: &[&str]) {
    let _ = writeln!(buf, "{}", fields.join("\t"));
}
