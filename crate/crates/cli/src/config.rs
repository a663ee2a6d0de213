//! Run configuration, read from a TOML file.
//!
//! ```toml
//! seed = 0
//!
//! [system]
//! id = "dubins"            # dubins | toy1d | custom
//! bits = [7, 7, 7]
//!
//! [abstraction]
//! plan = "random_rects"    # exhaustive | random_rects | shifted_grids
//! count = 32000
//!
//! [objective]
//! kind = "reach"           # reach | safe
//! mode = "inner"           # inner | outer
//! box = { px = [-0.4, 0.4], py = [-0.4, 0.4] }
//!
//! [solver]
//! max_iters = 10000
//! coarsen_threshold = 3000
//! ```
//!
//! The full schema is described in the repository README.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub system: SystemConfig,
    #[serde(default)]
    pub abstraction: AbstractionConfig,
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// Precision of `(px, py, theta)`.
    Dubins {
        #[serde(default = "dubins_bits")]
        bits: [u32; 3],
        /// Component name to per-input precision, e.g.
        /// `{ F_x = { px = 5, theta = 4 } }`.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        input_bits: BTreeMap<String, BTreeMap<String, u32>>,
    },
    /// `x⁺ = x + u` on `[lo, hi]`; without controls `x⁺ = x`.
    Toy1d {
        lo: f64,
        hi: f64,
        bits: u32,
        #[serde(default)]
        controls: Vec<f64>,
    },
    /// Affine components over declared dimensions.
    Custom {
        states: Vec<StateDecl>,
        #[serde(default)]
        controls: Vec<ControlDecl>,
        components: Vec<ComponentDecl>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        input_bits: BTreeMap<String, BTreeMap<String, u32>>,
    },
}

fn dubins_bits() -> [u32; 3] {
    [7, 7, 7]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDecl {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub periodic: bool,
    pub bits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDecl {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDecl {
    pub name: String,
    pub output: String,
    /// `[dimension, coefficient]` pairs, in input order.
    pub terms: Vec<(String, f64)>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case", deny_unknown_fields)]
pub enum AbstractionConfig {
    #[default]
    Exhaustive,
    RandomRects {
        count: usize,
        /// Defaults to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    ShiftedGrids {
        passes: Vec<PassDecl>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassDecl {
    pub width: u64,
    #[serde(default)]
    pub offset: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Reach,
    Safe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    Inner,
    Outer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub kind: ObjectiveKind,
    #[serde(default)]
    pub mode: ModeConfig,
    /// State dimension to `[lo, hi]`; unlisted dimensions are unconstrained.
    #[serde(rename = "box")]
    pub bounds: BTreeMap<String, [f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarsen_threshold: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_cap: Option<usize>,
    /// Components composed into one relation before solving, e.g.
    /// `[["F_x", "F_y"], ["F_theta"]]`. Defaults to one group per component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<String>>>,
    /// Elimination order over the groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    /// Coarse-to-fine per-dimension precisions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downsample: Option<Vec<Vec<u32>>>,
}

fn default_max_iters() -> usize {
    10_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: default_max_iters(),
            coarsen_threshold: None,
            node_cap: None,
            groups: None,
            order: None,
            downsample: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Sample counts for `basin_vs_samples`.
    #[serde(default = "default_counts")]
    pub counts: Vec<usize>,
    /// Timed repetitions per variant in `decomp_vs_mono`; the median is
    /// reported.
    #[serde(default = "one")]
    pub repeats: usize,
    /// Node threshold for `greedy_cap` when the solver section sets none.
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    /// Append an exhaustive-traversal row to `basin_vs_samples`.
    #[serde(default)]
    pub include_exhaustive: bool,
}

fn default_counts() -> Vec<usize> {
    vec![500, 1000, 2000, 4000, 8000, 16000, 32000]
}

fn one() -> usize {
    1
}

fn default_threshold() -> usize {
    3000
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            counts: default_counts(),
            repeats: 1,
            threshold: default_threshold(),
            include_exhaustive: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write PGM slices of the winning region.
    #[serde(default = "yes")]
    pub slices: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { slices: true }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks that do not need the system built.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match &self.abstraction {
            AbstractionConfig::ShiftedGrids { passes } if passes.is_empty() => {
                return bad("shifted_grids needs at least one pass".into())
            }
            AbstractionConfig::ShiftedGrids { passes } if passes.iter().any(|p| p.width == 0) => {
                return bad("grid pass width must be positive".into())
            }
            _ => {}
        }
        for (name, [lo, hi]) in &self.objective.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("objective box for `{name}` is empty"));
            }
        }
        if self.experiment.repeats == 0 {
            return bad("experiment.repeats must be positive".into());
        }
        Ok(())
    }

    /// Seed used by random traversals.
    pub fn sampling_seed(&self) -> u64 {
        match self.abstraction {
            AbstractionConfig::RandomRects { seed: Some(s), .. } => s,
            _ => self.seed,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
