//! Experiment configuration.
//!
//! Configs are flat `key=value` text: one pair per line, `#` starts a
//! comment, blank lines are ignored. Keys other than `seed`, `reps` and
//! `output_dir` are experiment-specific overrides and are checked against
//! the experiment's known keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Eigen,
    Angles,
    Rates,
    SpoetErrors,
    Fdp,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Eigen,
        ExperimentKind::Angles,
        ExperimentKind::Rates,
        ExperimentKind::SpoetErrors,
        ExperimentKind::Fdp,
    ];

    /// Tag used for file names and summaries.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Eigen => "eigen",
            ExperimentKind::Angles => "angles",
            ExperimentKind::Rates => "rates",
            ExperimentKind::SpoetErrors => "spoet_errors",
            ExperimentKind::Fdp => "fdp",
        }
    }

    /// Name accepted on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            ExperimentKind::SpoetErrors => "spoet-errors",
            other => other.name(),
        }
    }

    pub fn default_reps(self) -> usize {
        match self {
            ExperimentKind::Eigen | ExperimentKind::Angles => 1000,
            ExperimentKind::Rates => 500,
            ExperimentKind::SpoetErrors => 200,
            ExperimentKind::Fdp => 100,
        }
    }

    pub fn known_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Eigen => &["n", "p", "spikes", "nonspike"],
            ExperimentKind::Angles => &["n", "p", "spikes", "nonspike", "max_pairs"],
            ExperimentKind::Rates => &["levels", "n_grid", "n_base", "n_growth"],
            ExperimentKind::SpoetErrors => &[
                "t_grid",
                "p_exponent",
                "c",
                "gamma_shape",
                "gamma_rate",
                "C",
                "shrinkage",
            ],
            ExperimentKind::Fdp => &[
                "n",
                "p",
                "t",
                "spike_scale",
                "signal_fraction",
                "mu",
                "gamma_shape",
                "gamma_rate",
                "C",
                "shrinkage",
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.cli_name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.cli_name()).collect();
                HarnessError::config("experiment", format!("unknown experiment `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub reps: usize,
    pub overrides: BTreeMap<String, String>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Paper defaults, seed 1.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 1,
            reps: experiment.default_reps(),
            overrides: BTreeMap::new(),
            output_dir: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    /// Sets one key. `seed`, `reps` and `output_dir` go to their fields.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| HarnessError::config("seed", format!("`{value}` is not a 64-bit unsigned integer")))?
            }
            "reps" => self.reps = parse_usize("reps", value)?,
            "output_dir" | "out" => self.output_dir = Some(PathBuf::from(value)),
            "experiment" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.experiment {
                    return Err(HarnessError::config(
                        "experiment",
                        format!("config is for `{kind}` but `{}` was requested", self.experiment),
                    ));
                }
            }
            _ if self.experiment.known_keys().contains(&key) => {
                self.overrides.insert(key.to_string(), value.to_string());
            }
            _ => {
                return Err(HarnessError::config(
                    key,
                    format!(
                        "unknown key for experiment `{}` (known: seed, reps, output_dir, {})",
                        self.experiment,
                        self.experiment.known_keys().join(", ")
                    ),
                ))
            }
        }
        Ok(())
    }

    /// Applies every pair of a `key=value` text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_kv(text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(HarnessError::config("reps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.overrides.get(key).map(String::as_str)
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        self.get_str(key).map_or(Ok(default), |v| parse_usize(key, v))
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        self.get_str(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get_str(key) {
            None => Ok(default.to_vec()),
            Some(v) => split_list(v).map(|s| parse_f64(key, s)).collect(),
        }
    }

    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.get_str(key) {
            None => Ok(default.to_vec()),
            Some(v) => split_list(v).map(|s| parse_usize(key, s)).collect(),
        }
    }

    /// Seed, reps and overrides as ordered pairs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("seed".to_string(), self.seed.to_string()),
            ("reps".to_string(), self.reps.to_string()),
        ];
        out.extend(self.overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }
}

/// Parses `key=value` lines. Errors carry the 1-based line number.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            HarnessError::config(format!("line {}", i + 1), format!("expected key=value, got `{line}`"))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(HarnessError::config(format!("line {}", i + 1), "empty key"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| HarnessError::config(key, format!("`{v}` is not a non-negative integer")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(HarnessError::config(key, format!("`{v}` is not a finite number"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names_both_ways() {
        assert_eq!("spoet-errors".parse::<ExperimentKind>().unwrap(), ExperimentKind::SpoetErrors);
        assert_eq!("spoet_errors".parse::<ExperimentKind>().unwrap(), ExperimentKind::SpoetErrors);
        assert!("bogus".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn text_config_with_comments() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Eigen);
        cfg.apply_text("# model\nn = 20\nspikes=5, 3 # two spikes\n\nseed=7\nreps=3\n")
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.reps, 3);
        assert_eq!(cfg.get_usize("n", 50).unwrap(), 20);
        assert_eq!(cfg.get_usize("p", 500).unwrap(), 500);
        assert_eq!(cfg.get_f64_list("spikes", &[]).unwrap(), vec![5.0, 3.0]);
    }

    #[test]
    fn unknown_key_names_the_field() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Rates);
        match cfg.set("spikes", "1").unwrap_err() {
            HarnessError::Config { field, .. } => assert_eq!(field, "spikes"),
            other => panic!("unexpected {other}"),
        }
        let err = parse_kv("n 5").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn bad_values_name_the_field() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Fdp);
        cfg.set("t", "abc").unwrap();
        match cfg.get_f64("t", 0.01).unwrap_err() {
            HarnessError::Config { field, .. } => assert_eq!(field, "t"),
            other => panic!("unexpected {other}"),
        }
        assert!(cfg.clone().with_reps(0).validate().is_err());
    }
}
