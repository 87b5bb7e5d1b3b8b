//! JSON experiment configs, one shape per subcommand.

use std::path::{Path, PathBuf};

use momentchain::{GbmParams64, Grid64, HeatParams64, MomentSpec64, NormalLaw64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Uniform { h: f64 },
    TwoSided { slope_neg: f64, slope_pos: f64 },
    Explicit { points: Vec<f64>, h_left: f64, h_right: f64 },
}

impl GridSpec {
    pub fn build(&self) -> momentchain::Result<Grid64> {
        match self {
            GridSpec::Uniform { h } => Grid64::uniform(*h),
            GridSpec::TwoSided { slope_neg, slope_pos } => Grid64::two_sided(*slope_neg, *slope_pos),
            GridSpec::Explicit { points, h_left, h_right } => Grid64::explicit(points.clone(), *h_left, *h_right),
        }
    }

    fn validate(&self, path: &str, errors: &mut Vec<String>) {
        if let Err(e) = self.build() {
            errors.push(format!("{path}: {e}"));
        }
    }
}

/// The process whose per-step mean and variance the chain matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Moments {
        mean: f64,
        variance: f64,
    },
    Gbm {
        mu: f64,
        sigma2: f64,
        #[serde(default = "one")]
        s0: f64,
        tau: f64,
    },
    Heat {
        alpha: f64,
        tau: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ProcessSpec {
    pub fn spec(&self) -> MomentSpec64 {
        match self {
            ProcessSpec::Moments { mean, variance } => MomentSpec64::new(*mean, *variance),
            ProcessSpec::Gbm { mu, sigma2, tau, .. } => MomentSpec64::new((mu - sigma2 / 2.0) * tau, sigma2 * tau),
            ProcessSpec::Heat { alpha, tau } => MomentSpec64::new(0.0, 2.0 * alpha * tau),
        }
    }

    /// Law of the continuous process at step `k`.
    pub fn law_at(&self, k: u64) -> NormalLaw64 {
        match self {
            ProcessSpec::Gbm { mu, sigma2, s0, tau } => {
                GbmParams64 { mu: *mu, sigma2: *sigma2, s0: *s0, tau: *tau }.log_return_law(k)
            }
            ProcessSpec::Heat { alpha, tau } => {
                HeatParams64 { alpha: *alpha, tau: *tau, points_of_interest: vec![] }.law_at(k)
            }
            ProcessSpec::Moments { .. } => {
                let s = self.spec();
                NormalLaw64 { mean: s.mean * k as f64, variance: s.variance * k as f64 }
            }
        }
    }

    fn validate(&self, path: &str, errors: &mut Vec<String>) {
        match self {
            ProcessSpec::Moments { mean, variance } => {
                finite(mean, &format!("{path}.mean"), errors);
                nonnegative(variance, &format!("{path}.variance"), errors);
            }
            ProcessSpec::Gbm { mu, sigma2, s0, tau } => {
                finite(mu, &format!("{path}.mu"), errors);
                positive(sigma2, &format!("{path}.sigma2"), errors);
                positive(s0, &format!("{path}.s0"), errors);
                positive(tau, &format!("{path}.tau"), errors);
            }
            ProcessSpec::Heat { alpha, tau } => {
                positive(alpha, &format!("{path}.alpha"), errors);
                positive(tau, &format!("{path}.tau"), errors);
            }
        }
    }
}

fn finite(v: &f64, path: &str, errors: &mut Vec<String>) {
    if !v.is_finite() {
        errors.push(format!("{path}: must be finite, got {v}"));
    }
}

fn positive(v: &f64, path: &str, errors: &mut Vec<String>) {
    if !(v.is_finite() && *v > 0.0) {
        errors.push(format!("{path}: must be positive, got {v}"));
    }
}

fn nonnegative(v: &f64, path: &str, errors: &mut Vec<String>) {
    if !(v.is_finite() && *v >= 0.0) {
        errors.push(format!("{path}: must be nonnegative, got {v}"));
    }
}

fn nonempty_steps(steps: &[u64], path: &str, errors: &mut Vec<String>) {
    if steps.is_empty() {
        errors.push(format!("{path}: need at least one step"));
    }
}

/// How a snapshot is written: one row per path, or binned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "format", rename_all = "snake_case", deny_unknown_fields)]
pub enum SnapshotFormat {
    #[default]
    Samples,
    Histogram {
        lo: f64,
        hi: f64,
        bins: usize,
    },
}

impl SnapshotFormat {
    fn validate(&self, path: &str, errors: &mut Vec<String>) {
        if let SnapshotFormat::Histogram { lo, hi, bins } = self {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                errors.push(format!("{path}: need finite lo < hi, got [{lo}, {hi}]"));
            }
            if *bins == 0 {
                errors.push(format!("{path}.bins: must be positive"));
            }
        }
    }
}

fn default_range() -> [i64; 2] {
    [-10_000, 10_000]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    pub grid: GridSpec,
    pub process: ProcessSpec,
    /// Inclusive index window to check.
    #[serde(default = "default_range")]
    pub range: [i64; 2],
    #[serde(default)]
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub grid: GridSpec,
    pub process: ProcessSpec,
    /// Truncation half-width.
    pub n: u64,
    /// Last step reported; defaults to `n`.
    #[serde(default)]
    pub k_max: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid: GridSpec,
    pub process: ProcessSpec,
    pub paths: usize,
    /// Steps at which snapshots are written; the run lasts until the largest.
    pub steps: Vec<u64>,
    #[serde(default)]
    pub snapshot: SnapshotFormat,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

fn default_base_gap() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    pub alpha: f64,
    pub tau: f64,
    /// Points of interest, embedded in the grid.
    #[serde(default)]
    pub points: Vec<f64>,
    /// Largest gap allowed between embedded points.
    #[serde(default = "default_base_gap")]
    pub base_gap: f64,
    pub n: u64,
    pub k: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSegment {
    pub start: u64,
    pub mu: f64,
    pub sigma2: f64,
}

fn default_trajectory_paths() -> usize {
    20
}

fn default_stride() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default = "default_trajectory_paths")]
    pub paths: usize,
    #[serde(default = "default_stride")]
    pub stride: u64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec { paths: default_trajectory_paths(), stride: default_stride() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmConfig {
    pub mu: f64,
    pub sigma2: f64,
    #[serde(default = "one")]
    pub s0: f64,
    pub tau: f64,
    pub grid: GridSpec,
    pub paths: usize,
    /// Snapshot steps; the run lasts until the largest.
    pub k: Vec<u64>,
    /// Later coefficient segments; `mu` and `sigma2` above apply from step 0.
    #[serde(default)]
    pub schedule: Vec<ScheduleSegment>,
    #[serde(default)]
    pub trajectories: TrajectorySpec,
    #[serde(default)]
    pub snapshot: SnapshotFormat,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRange {
    pub start: u64,
    pub stop: u64,
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotInput {
    pub k: u64,
    pub path: PathBuf,
}

fn default_nodes() -> usize {
    momentchain::stats::DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinConfig {
    /// Grid for an inline simulation; unused with `snapshots`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub process: ProcessSpec,
    /// Paths for an inline simulation; unused with `snapshots`.
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub steps: Option<Vec<u64>>,
    /// `start..=stop` every `stride` steps.
    #[serde(default)]
    pub step_range: Option<StepRange>,
    /// Sample CSVs written by `simulate` or `gbm`, instead of simulating.
    #[serde(default)]
    pub snapshots: Option<Vec<SnapshotInput>>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

/// Settings given on the command line, which take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub trait Validate {
    /// Every problem found, each prefixed with its field path.
    fn validate(&self) -> Vec<String>;
}

impl Validate for FeasibilityConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        self.grid.validate("grid", &mut errors);
        self.process.validate("process", &mut errors);
        if self.range[0] > self.range[1] {
            errors.push(format!("range: lower end {} exceeds upper end {}", self.range[0], self.range[1]));
        }
        nonnegative(&self.slack, "slack", &mut errors);
        errors
    }
}

impl Validate for PropagateConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        self.grid.validate("grid", &mut errors);
        self.process.validate("process", &mut errors);
        if self.n == 0 {
            errors.push("n: must be positive".into());
        }
        if let Some(k) = self.k_max {
            if k > self.n {
                errors.push(format!("k_max: {k} exceeds the truncation half-width n = {}", self.n));
            }
        }
        errors
    }
}

fn validate_run(paths: usize, seed: Option<u64>, threads: Option<usize>, errors: &mut Vec<String>) {
    if paths == 0 {
        errors.push("paths: must be positive".into());
    }
    if seed.is_none() {
        errors.push("seed: required (set it in the config or pass --seed)".into());
    }
    if threads == Some(0) {
        errors.push("threads: must be positive".into());
    }
}

impl Validate for SimulateConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        self.grid.validate("grid", &mut errors);
        self.process.validate("process", &mut errors);
        validate_run(self.paths, self.seed, self.threads, &mut errors);
        nonempty_steps(&self.steps, "steps", &mut errors);
        self.snapshot.validate("snapshot", &mut errors);
        errors
    }
}

impl Validate for HeatConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        positive(&self.alpha, "alpha", &mut errors);
        positive(&self.tau, "tau", &mut errors);
        positive(&self.base_gap, "base_gap", &mut errors);
        for (j, p) in self.points.iter().enumerate() {
            finite(p, &format!("points[{j}]"), &mut errors);
        }
        if self.n == 0 {
            errors.push("n: must be positive".into());
        }
        nonempty_steps(&self.k, "k", &mut errors);
        for (j, k) in self.k.iter().enumerate() {
            if *k > self.n {
                errors.push(format!("k[{j}]: {k} exceeds the truncation half-width n = {}", self.n));
            }
        }
        errors
    }
}

impl Validate for GbmConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        finite(&self.mu, "mu", &mut errors);
        positive(&self.sigma2, "sigma2", &mut errors);
        positive(&self.s0, "s0", &mut errors);
        positive(&self.tau, "tau", &mut errors);
        self.grid.validate("grid", &mut errors);
        validate_run(self.paths, self.seed, self.threads, &mut errors);
        nonempty_steps(&self.k, "k", &mut errors);
        let mut previous = 0;
        for (j, seg) in self.schedule.iter().enumerate() {
            if seg.start <= previous {
                errors.push(format!("schedule[{j}].start: must exceed {previous}"));
            }
            previous = previous.max(seg.start);
            finite(&seg.mu, &format!("schedule[{j}].mu"), &mut errors);
            positive(&seg.sigma2, &format!("schedule[{j}].sigma2"), &mut errors);
        }
        if self.trajectories.stride == 0 {
            errors.push("trajectories.stride: must be positive".into());
        }
        self.snapshot.validate("snapshot", &mut errors);
        errors
    }
}

impl Validate for WassersteinConfig {
    fn validate(&self) -> Vec<String> {
        let mut errors = vec![];
        if let Some(grid) = &self.grid {
            grid.validate("grid", &mut errors);
        }
        self.process.validate("process", &mut errors);
        if self.nodes < 2 {
            errors.push(format!("nodes: need at least 2, got {}", self.nodes));
        }
        if self.threads == Some(0) {
            errors.push("threads: must be positive".into());
        }
        match &self.snapshots {
            Some(inputs) => {
                if inputs.is_empty() {
                    errors.push("snapshots: need at least one file".into());
                }
                for key in [
                    ("grid", self.grid.is_some()),
                    ("paths", self.paths.is_some()),
                    ("steps", self.steps.is_some()),
                    ("step_range", self.step_range.is_some()),
                ] {
                    if key.1 {
                        errors.push(format!("{}: not used together with snapshots", key.0));
                    }
                }
            }
            None => {
                if self.grid.is_none() {
                    errors.push("grid: required for an inline simulation".into());
                }
                match self.paths {
                    Some(p) => validate_run(p, self.seed, None, &mut errors),
                    None => errors.push("paths: required for an inline simulation".into()),
                }
                match (&self.steps, &self.step_range) {
                    (Some(s), None) => nonempty_steps(s, "steps", &mut errors),
                    (None, Some(r)) => {
                        if r.stride == 0 {
                            errors.push("step_range.stride: must be positive".into());
                        }
                        if r.start > r.stop {
                            errors.push(format!("step_range: start {} exceeds stop {}", r.start, r.stop));
                        }
                    }
                    _ => errors.push("steps: give exactly one of steps and step_range".into()),
                }
            }
        }
        errors
    }
}

impl WassersteinConfig {
    pub fn step_list(&self) -> Vec<u64> {
        if let Some(s) = &self.steps {
            return s.clone();
        }
        match &self.step_range {
            Some(r) => (r.start..=r.stop).step_by(r.stride as usize).collect(),
            None => self.snapshots.iter().flatten().map(|s| s.k).collect(),
        }
    }
}

/// Seed and threads settable from the command line.
pub trait RunSettings {
    fn apply(&mut self, overrides: Overrides);
}

macro_rules! run_settings {
    ($($t:ty),*) => {$(
        impl RunSettings for $t {
            fn apply(&mut self, o: Overrides) {
                if o.seed.is_some() {
                    self.seed = o.seed;
                }
                if o.threads.is_some() {
                    self.threads = o.threads;
                }
            }
        }
    )*};
}

run_settings!(SimulateConfig, GbmConfig, WassersteinConfig);

macro_rules! no_run_settings {
    ($($t:ty),*) => {$(
        impl RunSettings for $t {
            fn apply(&mut self, _: Overrides) {}
        }
    )*};
}

no_run_settings!(FeasibilityConfig, PropagateConfig, HeatConfig);

/// Reads, applies command-line settings, and validates.
pub fn load<C>(path: &Path, overrides: Overrides) -> Result<C, CliError>
where
    C: DeserializeOwned + Validate + RunSettings,
{
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("{}: cannot read config: {e}", path.display())]))?;
    parse(&text, overrides)
}

pub fn parse<C>(text: &str, overrides: Overrides) -> Result<C, CliError>
where
    C: DeserializeOwned + Validate + RunSettings,
{
    let mut config: C = serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("parse error: {e}")]))?;
    config.apply(overrides);
    let errors = config.validate();
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Config(errors))
    }
}
