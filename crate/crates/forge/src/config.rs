//! Plain-text experiment configuration: one `key = value` per line, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config names experiment `{found}` but `{requested}` was requested")]
    ExperimentMismatch { requested: String, found: String },
    #[error("key `{key}` is not used by {experiment}")]
    UnknownKey { key: String, experiment: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot use `{value}`: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    MikadoVerify,
    OscVerify,
    CiStep,
    CiRun,
    Solve,
    MaxPrinc,
    Moser,
    Commutator,
    Counterexample,
    Uniqueness,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::MikadoVerify,
        Experiment::OscVerify,
        Experiment::CiStep,
        Experiment::CiRun,
        Experiment::Solve,
        Experiment::MaxPrinc,
        Experiment::Moser,
        Experiment::Commutator,
        Experiment::Counterexample,
        Experiment::Uniqueness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::MikadoVerify => "mikado-verify",
            Experiment::OscVerify => "osc-verify",
            Experiment::CiStep => "ci-step",
            Experiment::CiRun => "ci-run",
            Experiment::Solve => "solve",
            Experiment::MaxPrinc => "maxprinc",
            Experiment::Moser => "moser",
            Experiment::Commutator => "commutator",
            Experiment::Counterexample => "counterexample",
            Experiment::Uniqueness => "uniqueness",
        }
    }

    /// Keys the experiment reads, besides `experiment` and `out_dir`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::MikadoVerify => &["d", "N", "p", "mu", "min_cells", "fields", "mus", "r", "k", "scaling_N"],
            Experiment::OscVerify => &["d", "N", "p", "seed", "cases"],
            Experiment::CiStep => &[
                "d", "N", "p", "r", "q", "mode", "seed", "eps", "delta", "lambda", "mu", "min_cells", "refine_N",
            ],
            Experiment::CiRun => &["d", "N", "p", "r", "q", "mode", "seed", "eps", "K", "min_cells"],
            Experiment::Solve => &["d", "N", "seed", "cases", "amplitude"],
            Experiment::MaxPrinc => &["d", "N", "seed", "count"],
            Experiment::Moser => &["d", "N", "seed", "amplitude", "k_max"],
            Experiment::Commutator => &["d", "N", "seed"],
            Experiment::Counterexample => &["n_r", "n_sph"],
            Experiment::Uniqueness => &["d", "N", "seed", "amplitude"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: k.to_string(),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Validates the key set against the experiment.
    pub fn new(experiment: Experiment, mut params: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(named) = params.remove("experiment") {
            if named != experiment.name() {
                return Err(ConfigError::ExperimentMismatch {
                    requested: experiment.name().into(),
                    found: named,
                });
            }
        }
        for key in params.keys() {
            if key != "out_dir" && !experiment.keys().contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey {
                    key: key.clone(),
                    experiment: experiment.name().into(),
                });
            }
        }
        Ok(ExperimentConfig { experiment, params })
    }

    pub fn from_text(experiment: Experiment, text: &str) -> Result<Self, ConfigError> {
        Self::new(experiment, parse_pairs(text)?)
    }

    /// Builds a config from literal pairs, mostly for tests and library callers.
    pub fn from_pairs(experiment: Experiment, pairs: &[(&str, &str)]) -> Result<Self, ConfigError> {
        Self::new(
            experiment,
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        )
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Invalid {
                key: key.into(),
                value: v.clone(),
                reason: e.to_string(),
            }),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parsed(key)
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(v) = self.params.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim().parse().map_err(|e: T::Err| ConfigError::Invalid {
                    key: key.into(),
                    value: v.clone(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    pub fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            key: key.into(),
            value: self.params.get(key).cloned().unwrap_or_default(),
            reason: reason.into(),
        }
    }
}
