//! JSON experiment configuration: parsing, defaults and validation.

use std::path::Path;

use qlink_core::link::{sector_dimension, Bond, LinkModel, Schedule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CodeBuild,
    Protocol,
    Mixing,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::CodeBuild => "code-build",
            Self::Protocol => "protocol",
            Self::Mixing => "mixing",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Exchange couplings: one strength for every nearest-neighbour bond, or
/// per-chain lists of the `N − 1` bond strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Couplings {
    Uniform(f64),
    PerBond(Vec<Vec<f64>>),
}

impl Default for Couplings {
    fn default() -> Self {
        Self::Uniform(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default = "two")]
    pub chains: i64,
    pub sites: i64,
    #[serde(default)]
    pub couplings: Couplings,
    pub tau: f64,
}

fn two() -> i64 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub n: Option<i64>,
    /// One budget per use, or a single value repeated `n` times.
    pub m_k: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
    /// Uniform per-use budgets to scan.
    #[serde(default)]
    pub m_k: Option<Vec<i64>>,
    #[serde(default)]
    pub sites: Option<Vec<i64>>,
}

/// Synthetic finite-memory channel for `code-build`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    #[serde(default = "two")]
    pub carrier_dim: i64,
    #[serde(default = "two")]
    pub memory_dim: i64,
    pub uses: i64,
    #[serde(default = "two")]
    pub logical_dim: i64,
    /// Random code states decoded per run.
    #[serde(default = "hundred")]
    pub trials: i64,
}

fn hundred() -> i64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingConfig {
    #[serde(default = "forty")]
    pub steps: i64,
    #[serde(default = "ten")]
    pub window: i64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        Self { steps: 40, window: 10 }
    }
}

fn forty() -> i64 {
    40
}

fn ten() -> i64 {
    10
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// A parsed configuration. Numeric fields stay signed so that validation
/// can name the offending field instead of failing inside the parser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub link: Option<LinkConfig>,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub code: Option<CodeConfig>,
    #[serde(default)]
    pub mixing: MixingConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Parity-check samples per protocol run.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_shots() -> u64 {
    10_000
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("parse error: {e}")]))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text)
}

impl ExperimentConfig {
    /// Hex SHA-256 of the canonical JSON form. The output section is left
    /// out so that the same run emitted as JSON and CSV shares one hash.
    pub fn hash(&self) -> String {
        let physics = Self { output: OutputConfig::default(), ..self.clone() };
        let canonical = serde_json::to_vec(&physics).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    /// Applies the CLI's choice of experiment and validates everything it
    /// needs, reporting every violation at once.
    pub fn resolve(mut self, kind: ExperimentKind) -> Result<Self, CliError> {
        let mut errors = Vec::new();
        match self.experiment {
            Some(k) if k != kind => {
                errors.push(format!("experiment: config says {} but {} was requested", k.name(), kind.name()))
            }
            _ => self.experiment = Some(kind),
        }
        if self.mixing.steps < 1 {
            errors.push("mixing.steps must be at least 1".into());
        }
        if self.mixing.window < 1 {
            errors.push("mixing.window must be at least 1".into());
        }
        match kind {
            ExperimentKind::CodeBuild => validate_code(self.code.as_ref(), &mut errors),
            ExperimentKind::Mixing => {
                validate_link(self.link.as_ref(), &mut errors);
            }
            ExperimentKind::Protocol => {
                validate_link(self.link.as_ref(), &mut errors);
                validate_schedule(self.schedule.as_ref(), &mut errors);
            }
            ExperimentKind::Sweep => {
                validate_link(self.link.as_ref(), &mut errors);
                validate_schedule(self.schedule.as_ref(), &mut errors);
                validate_sweep(self.sweep.as_ref(), self.link.as_ref(), &mut errors);
            }
        }
        if errors.is_empty() && matches!(kind, ExperimentKind::Protocol | ExperimentKind::Sweep) {
            self.check_budget(&mut errors);
        }
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(CliError::Config(errors))
        }
    }

    /// Link model for a given chain length and time step (defaults to the
    /// configured ones).
    pub fn model(&self, sites: Option<usize>, tau: Option<f64>) -> Result<LinkModel, CliError> {
        let link = self.link.as_ref().ok_or_else(|| CliError::Config(vec!["link: missing".into()]))?;
        let sites = sites.unwrap_or(link.sites as usize);
        let tau = tau.unwrap_or(link.tau);
        let chains = link.chains as usize;
        let couplings = match &link.couplings {
            Couplings::Uniform(j) => vec![(1..sites).map(|s| Bond { a: s - 1, b: s, strength: *j }).collect(); chains],
            Couplings::PerBond(table) => table
                .iter()
                .map(|row| row.iter().enumerate().map(|(s, &j)| Bond { a: s, b: s + 1, strength: j }).collect())
                .collect(),
        };
        Ok(LinkModel::new(chains, sites, couplings, tau)?)
    }

    /// Per-use budgets, with an optional uniform override.
    pub fn budgets(&self, uniform: Option<usize>) -> Vec<usize> {
        let schedule = self.schedule.as_ref().expect("validated");
        let n = schedule.n.map_or(schedule.m_k.len(), |n| n as usize);
        match uniform {
            Some(m) => vec![m; n],
            None if schedule.m_k.len() == 1 => vec![schedule.m_k[0] as usize; n],
            None => schedule.m_k.iter().map(|&m| m as usize).collect(),
        }
    }

    pub fn schedule(&self, uniform: Option<usize>) -> Result<Schedule, CliError> {
        Ok(Schedule::new(self.budgets(uniform))?)
    }

    /// Largest sector any run of this config builds.
    pub fn max_sector_dimension(&self) -> u128 {
        let link = self.link.as_ref().expect("validated");
        let sweep = self.sweep.clone().unwrap_or_default();
        let sites: Vec<usize> =
            sweep.sites.map_or(vec![link.sites as usize], |v| v.iter().map(|&s| s as usize).collect());
        let budgets: Vec<Option<usize>> =
            sweep.m_k.map_or(vec![None], |v| v.iter().map(|&m| Some(m as usize)).collect());
        let mut worst = 0;
        for &n_sites in &sites {
            for &m in &budgets {
                let b = self.budgets(m);
                let n = b.len();
                let dim = sector_dimension(n, b.iter().sum(), link.chains as usize * n_sites, n);
                worst = worst.max(dim);
            }
        }
        worst
    }

    fn check_budget(&self, errors: &mut Vec<String>) {
        let dim = self.max_sector_dimension();
        if dim > self.budget as u128 {
            errors.push(format!("budget: sector dimension {dim} exceeds the budget {}", self.budget));
        }
    }
}

fn validate_link(link: Option<&LinkConfig>, errors: &mut Vec<String>) {
    let Some(link) = link else {
        errors.push("link: missing".into());
        return;
    };
    if link.chains != 2 {
        errors.push(format!("link.chains must be 2 for the dual-rail protocol, got {}", link.chains));
    }
    if link.sites < 1 {
        errors.push(format!("link.sites must be at least 1, got {}", link.sites));
    }
    if !link.tau.is_finite() {
        errors.push("link.tau must be finite".into());
    }
    match &link.couplings {
        Couplings::Uniform(j) if !j.is_finite() => errors.push("link.couplings must be finite".into()),
        Couplings::PerBond(table) => {
            if table.len() as i64 != link.chains {
                errors.push(format!("link.couplings needs one list per chain, got {}", table.len()));
            }
            for (c, row) in table.iter().enumerate() {
                if row.len() as i64 != link.sites - 1 {
                    errors.push(format!(
                        "link.couplings[{c}] needs {} bond strengths, got {}",
                        link.sites - 1,
                        row.len()
                    ));
                }
                if row.iter().any(|j| !j.is_finite()) {
                    errors.push(format!("link.couplings[{c}] must be finite"));
                }
            }
        }
        _ => {}
    }
}

fn validate_schedule(schedule: Option<&ScheduleConfig>, errors: &mut Vec<String>) {
    let Some(s) = schedule else {
        errors.push("schedule: missing".into());
        return;
    };
    if s.m_k.is_empty() {
        errors.push("schedule.m_k must not be empty".into());
    }
    for (k, &m) in s.m_k.iter().enumerate() {
        if m < 1 {
            errors.push(format!("schedule.m_k[{k}] must be at least 1, got {m}"));
        }
    }
    if let Some(n) = s.n {
        if n < 1 {
            errors.push(format!("schedule.n must be at least 1, got {n}"));
        } else if s.m_k.len() != 1 && s.m_k.len() as i64 != n {
            errors.push(format!("schedule.m_k has {} entries but schedule.n is {n}", s.m_k.len()));
        }
    }
}

fn validate_sweep(sweep: Option<&SweepConfig>, link: Option<&LinkConfig>, errors: &mut Vec<String>) {
    let Some(s) = sweep else {
        errors.push("sweep: missing".into());
        return;
    };
    let grids = [s.tau.as_ref().map(Vec::len), s.m_k.as_ref().map(Vec::len), s.sites.as_ref().map(Vec::len)];
    if grids.iter().all(Option::is_none) {
        errors.push("sweep: no grid given (tau, m_k or sites)".into());
    }
    for (name, len) in ["sweep.tau", "sweep.m_k", "sweep.sites"].iter().zip(grids) {
        if len == Some(0) {
            errors.push(format!("{name} is empty"));
        }
    }
    if s.tau.iter().flatten().any(|t| !t.is_finite()) {
        errors.push("sweep.tau must be finite".into());
    }
    for &m in s.m_k.iter().flatten() {
        if m < 1 {
            errors.push(format!("sweep.m_k entries must be at least 1, got {m}"));
        }
    }
    for &n in s.sites.iter().flatten() {
        if n < 1 {
            errors.push(format!("sweep.sites entries must be at least 1, got {n}"));
        }
    }
    if s.sites.is_some() && matches!(link.map(|l| &l.couplings), Some(Couplings::PerBond(_))) {
        errors.push("sweep.sites requires a uniform link.couplings".into());
    }
}

fn validate_code(code: Option<&CodeConfig>, errors: &mut Vec<String>) {
    let Some(c) = code else {
        errors.push("code: missing".into());
        return;
    };
    for (name, value, min) in [
        ("code.carrier_dim", c.carrier_dim, 2),
        ("code.memory_dim", c.memory_dim, 1),
        ("code.uses", c.uses, 1),
        ("code.logical_dim", c.logical_dim, 2),
        ("code.trials", c.trials, 1),
    ] {
        if value < min {
            errors.push(format!("{name} must be at least {min}, got {value}"));
        }
    }
    if c.carrier_dim >= 2 && c.uses >= 1 {
        let dim = (c.carrier_dim as f64).powi(c.uses as i32);
        if dim > 4096.0 {
            errors.push(format!("code.uses: input dimension {dim} exceeds 4096"));
        }
    }
}
