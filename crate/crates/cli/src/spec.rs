//! Experiment specifications: what to place, with which pipelines, under which seeds.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use macroplace::clustering::ClusterParams;
use macroplace::metrics::CostKind;
use macroplace::netlist::SyntheticSpec;
use macroplace::placers::{ActionProbs, AnnealConfig, GridDims, GridMode, InitHeuristic, OrderPolicy, Temperature};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_FD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    Bookshelf { aux: PathBuf },
    Synthetic(SyntheticSpec),
}

/// Annealing settings minus the seed, which comes from the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealStage {
    pub actions: ActionProbs,
    pub moves_per_temperature: Option<usize>,
    pub cooling: f64,
    /// `None` derives the temperature automatically, lowered when the stage starts from
    /// a constructive solution or a warm-start file.
    pub initial_temperature: Option<Temperature>,
    pub max_moves: u64,
    pub grid_mode: GridMode,
}

impl Default for AnnealStage {
    fn default() -> Self {
        let c = AnnealConfig::default();
        AnnealStage {
            actions: c.actions,
            moves_per_temperature: c.moves_per_temperature,
            cooling: c.cooling,
            initial_temperature: None,
            max_moves: c.max_moves,
            grid_mode: c.grid_mode,
        }
    }
}

impl AnnealStage {
    pub fn config(&self, seed: u64, warm: bool) -> AnnealConfig {
        AnnealConfig {
            actions: self.actions,
            moves_per_temperature: self.moves_per_temperature,
            cooling: self.cooling,
            initial_temperature: self.initial_temperature.unwrap_or(Temperature::Auto { warm }),
            max_moves: self.max_moves,
            grid_mode: self.grid_mode,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    /// Groups standard cells; a later `fd` stage then moves clusters instead of cells.
    Cluster(ClusterParams),
    Init {
        #[serde(default)]
        heuristic: InitHeuristic,
    },
    Constructive {
        /// `None` grows a square grid until every macro fits.
        #[serde(default)]
        grid: Option<GridDims>,
        #[serde(default)]
        order: OrderPolicy,
    },
    Anneal(AnnealStage),
    Fd {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

fn default_tolerance() -> f64 {
    DEFAULT_FD_TOLERANCE
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Cluster(_) => "cluster",
            Stage::Init { .. } => "init",
            Stage::Constructive { .. } => "constructive",
            Stage::Anneal(_) => "anneal",
            Stage::Fd { .. } => "fd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub name: String,
    #[serde(default)]
    pub cost: CostKind,
    /// Placement file the pipeline starts from instead of the input's own placement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<PathBuf>,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub input: InputSpec,
    pub configs: Vec<PipelineConfig>,
    pub seeds: Vec<u64>,
    /// Where results go; not part of the spec hash.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    /// The spec as JSON with object keys sorted.
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        if self.configs.is_empty() {
            return Err(CliError::Config("at least one pipeline config is required".into()));
        }
        let mut names = BTreeSet::new();
        for c in &self.configs {
            if !names.insert(c.name.as_str()) {
                return Err(CliError::Config(format!("duplicate config name `{}`", c.name)));
            }
            c.validate()?;
        }
        Ok(())
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(format!("config `{}`: {msg}", self.name)));
        let name_ok = !self.name.is_empty()
            && self.name != "."
            && self.name != ".."
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !name_ok {
            return bad("name must be non-empty and use only letters, digits, `-`, `_` and `.`".into());
        }
        if self.stages.is_empty() {
            return bad("no stages".into());
        }
        self.cost.validate()?;
        let mut macros_placed = self.warm_start.is_some();
        let mut clustered = false;
        for (i, stage) in self.stages.iter().enumerate() {
            match stage {
                Stage::Cluster(p) => {
                    p.validate()?;
                    if clustered {
                        return bad("more than one cluster stage".into());
                    }
                    if !self.stages[i + 1..].iter().any(|s| matches!(s, Stage::Fd { .. })) {
                        return bad("cluster must come before an fd stage".into());
                    }
                    clustered = true;
                }
                Stage::Init { .. } | Stage::Constructive { .. } => macros_placed = true,
                Stage::Anneal(a) => {
                    a.config(0, false).validate()?;
                    if !macros_placed {
                        return bad("anneal needs a preceding init or constructive stage, or a warm start".into());
                    }
                }
                Stage::Fd { tolerance } => {
                    if !(*tolerance > 0.0 && tolerance.is_finite()) {
                        return bad(format!("fd tolerance must be positive, got {tolerance}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(stages: Vec<Stage>) -> ExperimentSpec {
        ExperimentSpec {
            input: InputSpec::Synthetic(SyntheticSpec::default()),
            configs: vec![PipelineConfig {
                name: "a".into(),
                cost: CostKind::default(),
                warm_start: None,
                stages,
            }],
            seeds: vec![1],
            output: None,
        }
    }

    #[test]
    fn stage_order() {
        let init = Stage::Init { heuristic: InitHeuristic::default() };
        let anneal = Stage::Anneal(AnnealStage::default());
        let fd = Stage::Fd { tolerance: 1e-6 };
        let cluster = Stage::Cluster(ClusterParams::default());
        assert!(spec(vec![init.clone(), anneal.clone()]).validate().is_ok());
        assert!(spec(vec![anneal.clone()]).validate().is_err());
        assert!(spec(vec![cluster.clone(), fd.clone()]).validate().is_ok());
        assert!(spec(vec![fd, cluster]).validate().is_err());
        let mut s = spec(vec![init]);
        s.seeds.clear();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_survives_reserialization() {
        let s = spec(vec![Stage::Init { heuristic: InitHeuristic::RandomLegal }]);
        let text = serde_json::to_string_pretty(&s).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(s.hash(), back.hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn minimal_json() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"input": {"synthetic": {"n_macros": 4}},
                "configs": [{"name": "sa", "stages": [{"stage": "init"}, {"stage": "anneal", "max_moves": 500}]}],
                "seeds": [1, 2]}"#,
        )
        .unwrap();
        s.validate().unwrap();
        assert!(matches!(&s.configs[0].stages[1], Stage::Anneal(a) if a.max_moves == 500));
    }
}
