//! Flat `key=value` config files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every parse problem is reported as `path:line: message`. Keys a command
//! does not recognize are rejected (see [`Config::finish`]) so typos fail
//! loudly instead of silently falling back to defaults.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::AppError;

/// One parsed config file plus bookkeeping of which keys were consumed.
pub struct Config {
    path: String,
    /// key -> (line number, raw value)
    entries: HashMap<String, (usize, String)>,
    /// Keys the command has read, in any order.
    consumed: Vec<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, AppError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("cannot read config {display}: {e}")))?;
        let mut entries: HashMap<String, (usize, String)> = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.split_once('#') {
                Some((before, _)) => before,
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AppError::Usage(format!("{display}:{line_no}: expected `key = value`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(AppError::Usage(format!(
                    "{display}:{line_no}: empty key before `=`"
                )));
            }
            if let Some((first_line, _)) = entries.get(key) {
                return Err(AppError::Usage(format!(
                    "{display}:{line_no}: duplicate key `{key}` (first set on line {first_line})"
                )));
            }
            entries.insert(key.to_string(), (line_no, value.to_string()));
        }
        Ok(Config {
            path: display,
            entries,
            consumed: Vec::new(),
        })
    }

    /// Raw value of `key`, marking it consumed.
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let hit = self.entries.get(key).cloned();
        if hit.is_some() {
            self.consumed.push(key.to_string());
        }
        hit
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn value_err(&self, key: &str, line: usize, expected: &str, got: &str) -> AppError {
        AppError::Usage(format!(
            "{}:{line}: invalid value for `{key}`: expected {expected}, got `{got}`",
            self.path
        ))
    }

    fn missing(&self, key: &str) -> AppError {
        AppError::Usage(format!(
            "{}: missing required key `{key}`",
            self.path
        ))
    }

    pub fn get_str(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(_, v)| v)
    }

    pub fn require_str(&mut self, key: &str) -> Result<String, AppError> {
        self.get_str(key).ok_or_else(|| self.missing(key))
    }

    pub fn get_f64(&mut self, key: &str) -> Result<Option<f64>, AppError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.value_err(key, line, "a finite number", &v)),
            },
        }
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64, AppError> {
        self.get_f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn get_u64(&mut self, key: &str) -> Result<Option<u64>, AppError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| self.value_err(key, line, "a non-negative integer", &v)),
        }
    }

    pub fn get_u32(&mut self, key: &str) -> Result<Option<u32>, AppError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| self.value_err(key, line, "a non-negative integer", &v)),
        }
    }

    pub fn require_usize(&mut self, key: &str) -> Result<usize, AppError> {
        match self.raw(key) {
            None => Err(self.missing(key)),
            Some((line, v)) => v
                .parse::<usize>()
                .map_err(|_| self.value_err(key, line, "a non-negative integer", &v)),
        }
    }

    pub fn get_bool(&mut self, key: &str) -> Result<Option<bool>, AppError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(Some(true)),
                "false" | "no" | "0" => Ok(Some(false)),
                _ => Err(self.value_err(key, line, "true or false", &v)),
            },
        }
    }

    /// Comma-separated list of strings (whitespace around items ignored).
    pub fn get_list(&mut self, key: &str) -> Result<Option<Vec<String>>, AppError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => {
                let items: Vec<String> = v
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if items.is_empty() {
                    return Err(self.value_err(key, line, "a comma-separated list", &v));
                }
                Ok(Some(items))
            }
        }
    }

    pub fn require_list(&mut self, key: &str) -> Result<Vec<String>, AppError> {
        self.get_list(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn require_f64_list(&mut self, key: &str) -> Result<Vec<f64>, AppError> {
        let (line, raw) = self.entries.get(key).cloned().ok_or_else(|| self.missing(key))?;
        let items = self.require_list(key)?;
        items
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.value_err(key, line, "a list of finite numbers", &raw))
            })
            .collect()
    }

    /// Seed list: either explicit `1,2,3` or an inclusive range `1..5`.
    pub fn require_seeds(&mut self, key: &str) -> Result<Vec<u64>, AppError> {
        let (line, raw) = match self.raw(key) {
            Some(hit) => hit,
            None => return Err(self.missing(key)),
        };
        let err = || self.value_err(key, line, "seeds like `1,2,3` or `1..5`", &raw);
        if let Some((lo, hi)) = raw.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| err())?;
            let hi: u64 = hi.trim().parse().map_err(|_| err())?;
            if hi < lo {
                return Err(err());
            }
            return Ok((lo..=hi).collect());
        }
        let seeds: Result<Vec<u64>, AppError> = raw
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| err()))
            .collect();
        let seeds = seeds?;
        if seeds.is_empty() {
            return Err(err());
        }
        Ok(seeds)
    }

    /// `alpha,beta` pair for a Beta response profile.
    pub fn get_beta_pair(&mut self, key: &str) -> Result<Option<(f64, f64)>, AppError> {
        let (line, raw) = match self.raw(key) {
            Some(hit) => hit,
            None => return Ok(None),
        };
        let err = || self.value_err(key, line, "`alpha,beta` with both positive", &raw);
        let (a, b) = raw.split_once(',').ok_or_else(err)?;
        let alpha: f64 = a.trim().parse().map_err(|_| err())?;
        let beta: f64 = b.trim().parse().map_err(|_| err())?;
        if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta <= 0.0 {
            return Err(err());
        }
        Ok(Some((alpha, beta)))
    }

    /// Rejects any key that was never consumed, pointing at its line.
    pub fn finish(self) -> Result<(), AppError> {
        let mut unknown: Vec<(usize, String)> = self
            .entries
            .iter()
            .filter(|(k, _)| !self.consumed.contains(k))
            .map(|(k, (line, _))| (*line, k.clone()))
            .collect();
        unknown.sort();
        if let Some((line, key)) = unknown.first() {
            return Err(AppError::Usage(format!(
                "{}:{line}: unknown key `{key}`",
                self.path
            )));
        }
        Ok(())
    }

    /// `key=value` echo of every consumed key, in consumption order, for
    /// embedding the resolved config in output headers.
    pub fn echo_consumed(&self) -> String {
        let mut out = String::new();
        for key in &self.consumed {
            if let Some((_, v)) = self.entries.get(key) {
                if !out.is_empty() {
                    out.push(' ');
                }
                let _ = write!(out, "{key}={v}");
            }
        }
        out
    }
}
