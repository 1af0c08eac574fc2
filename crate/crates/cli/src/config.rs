//! Run configuration: a TOML file with nested tables, validated as a whole.

use std::fmt;
use std::path::Path;

use debtrun_core::{BeliefSpec, DiscreteTenor, Error as CoreError, Grid, IntensitySpec, ModelParams, SolverOptions, SurvivalVariant};
use serde::{Deserialize, Serialize};

/// Smallest path count accepted by the default-probability estimators.
pub const MIN_PATHS: usize = 1000;

/// Everything a command needs. Missing tables take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "ModelParams::reference")]
    pub model: ModelParams,
    #[serde(default = "default_beliefs")]
    pub beliefs: Vec<BeliefSpec>,
    #[serde(default)]
    pub tenors: Vec<TenorConfig>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

fn default_beliefs() -> Vec<BeliefSpec> {
    vec![BeliefSpec::Uniform]
}

/// Rollover structure. A discrete tenor gives either explicit `dates` or a
/// `count` of equally spaced ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TenorConfig {
    Discrete {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dates: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
    Staggered { intensity: IntensitySpec },
}

/// Resolved tenor.
#[derive(Debug, Clone, PartialEq)]
pub enum Tenor {
    Discrete(DiscreteTenor),
    Staggered(IntensitySpec),
}

impl Tenor {
    pub fn label(&self) -> String {
        match self {
            Tenor::Discrete(d) => format!("discrete_N{}", d.len()),
            Tenor::Staggered(IntensitySpec::Constant { g }) => format!("staggered_g{g}"),
            Tenor::Staggered(IntensitySpec::Tabulated { .. }) => "staggered_table".into(),
        }
    }
}

impl TenorConfig {
    pub fn resolve(&self, horizon: f64) -> Result<Tenor, CoreError> {
        match self {
            TenorConfig::Discrete { dates: Some(d), count: None } => Ok(Tenor::Discrete(DiscreteTenor::new(d.clone(), horizon)?)),
            TenorConfig::Discrete { dates: None, count: Some(n) } => Ok(Tenor::Discrete(DiscreteTenor::equally_spaced(*n, horizon))),
            TenorConfig::Discrete { .. } => Err(CoreError::InvalidParameter {
                field: "dates".into(),
                reason: "give exactly one of `dates` and `count`".into(),
            }),
            TenorConfig::Staggered { intensity } => {
                intensity.validate()?;
                Ok(Tenor::Staggered(intensity.clone()))
            }
        }
    }
}

/// Monte Carlo settings shared by all simulating commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Simulation mesh step.
    pub dt: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 20_000,
            seed: 1,
            dt: 0.01,
        }
    }
}

/// Default-probability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Initial asset values.
    pub v0: Vec<f64>,
    /// Firesale rates; empty means the model's own.
    pub psi: Vec<f64>,
    /// Survival equation used for the PDE column of staggered tenors.
    pub variant: SurvivalVariant,
    /// Also solve the survival equation for staggered tenors.
    pub pde: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            v0: (1..=10).map(f64::from).collect(),
            psi: Vec::new(),
            variant: SurvivalVariant::Corrected,
            pde: false,
        }
    }
}

/// Scenario simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n_scenarios: usize,
    pub v0: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { n_scenarios: 3, v0: 6.0 }
    }
}

/// One discrete-versus-staggered comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenorPair {
    /// Number of equally spaced rollover dates.
    pub n: usize,
    /// Constant Cox intensity.
    pub g: f64,
}

/// Tenor comparison: pairs and the ratio range of the value curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub pairs: Vec<TenorPair>,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            x_min: 1.0,
            x_max: 6.0,
            n_x: 51,
        }
    }
}

impl CompareConfig {
    pub fn ratios(&self) -> Vec<f64> {
        if self.n_x == 1 {
            return vec![self.x_min];
        }
        (0..self.n_x)
            .map(|k| self.x_min + (self.x_max - self.x_min) * k as f64 / (self.n_x - 1) as f64)
            .collect()
    }
}

/// Commands with command-specific validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Barriers,
    DefaultProb,
    Simulate,
    CompareTenor,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Barriers => "barriers",
            Command::DefaultProb => "default-prob",
            Command::Simulate => "simulate",
            Command::CompareTenor => "compare-tenor",
        }
    }
}

/// One failed check, located by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl ConfigErrors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    /// Records a core error under `prefix`, extending the field path when
    /// the error names one.
    fn core(&mut self, prefix: &str, e: CoreError) {
        match e {
            CoreError::InvalidParameter { field, reason } => self.push(format!("{prefix}.{field}"), reason),
            other => self.push(prefix, other.to_string()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {}: {}", e.path, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        toml::from_str(text).map_err(|e| {
            let mut errs = ConfigErrors::default();
            let path = e
                .span()
                .map(|s| format!("line {}", text[..s.start].lines().count().max(1)))
                .unwrap_or_else(|| "config".into());
            errs.push(path, e.message().to_string());
            errs
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            let mut errs = ConfigErrors::default();
            errs.push(path.display().to_string(), e.to_string());
            errs
        })?;
        Self::from_toml(&text)
    }

    /// Resolved tenors in config order.
    pub fn resolved_tenors(&self) -> Vec<Tenor> {
        self.tenors
            .iter()
            .map(|t| t.resolve(self.model.horizon).expect("validated config"))
            .collect()
    }

    /// Checks the whole configuration for `command`, reporting every problem.
    pub fn validate(&self, command: Command) -> Result<(), ConfigErrors> {
        let mut errs = ConfigErrors::default();
        for e in self.model.violations() {
            errs.core("model", e);
        }
        for e in self.grid.violations() {
            errs.core("grid", e);
        }
        if !(self.solver.newton_tol > 0.0) {
            errs.push("solver.newton_tol", "must be > 0");
        }
        if self.solver.max_iter == 0 {
            errs.push("solver.max_iter", "must be >= 1");
        }
        if let Some(g) = self.solver.grading {
            if !positive(g) {
                errs.push("solver.grading", "must be finite and > 0");
            }
        }
        if self.beliefs.is_empty() {
            errs.push("beliefs", "at least one belief is required");
        }
        for (i, b) in self.beliefs.iter().enumerate() {
            if let Err(e) = b.validate() {
                errs.core(&format!("beliefs[{i}]"), e);
            }
        }
        for (i, t) in self.tenors.iter().enumerate() {
            if let Err(e) = t.resolve(self.model.horizon) {
                errs.core(&format!("tenors[{i}]"), e);
            }
        }
        if !positive(self.mc.dt) {
            errs.push("mc.dt", "must be finite and > 0");
        }
        match command {
            Command::Barriers => self.need_tenors(&mut errs),
            Command::DefaultProb => {
                self.need_tenors(&mut errs);
                if self.mc.n_paths < MIN_PATHS {
                    errs.push("mc.n_paths", format!("must be >= {MIN_PATHS}"));
                }
                if self.sweep.v0.is_empty() {
                    errs.push("sweep.v0", "at least one initial value is required");
                }
                for (i, v) in self.sweep.v0.iter().enumerate() {
                    if !positive(*v) {
                        errs.push(format!("sweep.v0[{i}]"), "must be finite and > 0");
                    }
                }
                for (i, &psi) in self.sweep.psi.iter().enumerate() {
                    for e in (ModelParams { psi, ..self.model }).violations() {
                        if let CoreError::InvalidParameter { field, reason } = e {
                            if field == "psi" {
                                errs.push(format!("sweep.psi[{i}]"), reason);
                            }
                        }
                    }
                }
            }
            Command::Simulate => {
                self.need_tenors(&mut errs);
                if !positive(self.simulate.v0) {
                    errs.push("simulate.v0", "must be finite and > 0");
                }
            }
            Command::CompareTenor => {
                let c = &self.compare;
                if c.pairs.is_empty() {
                    errs.push("compare.pairs", "at least one pair is required");
                }
                for (i, p) in c.pairs.iter().enumerate() {
                    if !(p.g >= 0.0 && p.g.is_finite()) {
                        errs.push(format!("compare.pairs[{i}].g"), "must be finite and >= 0");
                    }
                }
                if !(positive(c.x_min) && c.x_max.is_finite() && c.x_max >= c.x_min) {
                    errs.push("compare.x_min", "need 0 < x_min <= x_max");
                }
                if c.n_x == 0 {
                    errs.push("compare.n_x", "must be >= 1");
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    fn need_tenors(&self, errs: &mut ConfigErrors) {
        if self.tenors.is_empty() {
            errs.push("tenors", "at least one tenor is required");
        }
    }
}
