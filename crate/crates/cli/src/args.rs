use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macroplace::clustering::ClusterParams;
use macroplace::metrics::{CostKind, GridSpec, ProxyWeights};
use macroplace::netlist::SyntheticSpec;
use macroplace::placers::{GridDims, GridMode, InitHeuristic, OrderPolicy};
use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};
use crate::spec::{AnnealStage, ExperimentSpec, InputSpec, PipelineConfig, Stage};

#[derive(Debug, Parser)]
#[command(name = "macroplace", version, about = "Macro placement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one pipeline on one instance.
    Place(PlaceArgs),
    /// Run every (config, seed) cell of a JSON experiment spec.
    Experiment(ExperimentArgs),
    /// Draw a placement as SVG.
    Render(RenderArgs),
    /// Rank-correlation and noise table for a metrics CSV.
    Stats(StatsArgs),
    /// Write a synthetic instance as Bookshelf files.
    Gen(GenArgs),
    /// Check a netlist for broken invariants.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Bookshelf `.aux` file.
    #[arg(long)]
    pub aux: Option<PathBuf>,
    /// Synthetic instance spec, inline JSON or a path to a JSON file.
    #[arg(long)]
    pub synthetic: Option<String>,
}

impl InputArgs {
    pub fn to_spec(&self) -> Result<InputSpec> {
        match (&self.aux, &self.synthetic) {
            (Some(aux), None) => Ok(InputSpec::Bookshelf { aux: aux.clone() }),
            (None, Some(s)) => Ok(InputSpec::Synthetic(json_arg::<SyntheticSpec>(s)?)),
            _ => Err(CliError::Config("exactly one of --aux and --synthetic is required".into())),
        }
    }
}

/// Inline JSON when the text starts with `{`, otherwise a file holding it.
pub fn json_arg<T: DeserializeOwned>(text: &str) -> Result<T> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad JSON argument: {e}")))
    } else {
        let path = PathBuf::from(text);
        let body = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&body).map_err(|source| CliError::Json { path, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Constructive,
    Sa,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostChoice {
    Proxy,
    Hpwl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitChoice {
    Centroid,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct PlaceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "sa")]
    pub engine: Engine,
    /// Macro grid as `RxC`, or `auto` to grow a square grid until every macro fits.
    #[arg(long, conflicts_with = "no_grid")]
    pub grid: Option<String>,
    /// Anneal in continuous coordinates (the default for `sa`).
    #[arg(long)]
    pub no_grid: bool,
    /// Proxy weights `wl,d,c`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Bins per side for the density and congestion terms.
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long, value_enum, default_value = "proxy")]
    pub cost: CostChoice,
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Seed range `a..b` (exclusive) or `a..=b` (inclusive).
    #[arg(long)]
    pub seeds: Option<String>,
    /// Annealing move budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub moves_per_temp: Option<usize>,
    /// Macro initialization before cold-started annealing.
    #[arg(long, value_enum, default_value = "centroid")]
    pub init: InitChoice,
    /// Start from this `.pl` instead of initializing macros.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Cluster standard cells before force-directed placement; inline JSON or file.
    #[arg(long)]
    pub cluster: Option<String>,
    #[arg(long, default_value_t = crate::spec::DEFAULT_FD_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    pub spec: PathBuf,
    /// Overrides the spec's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Placement to draw; defaults to the input's own placement.
    #[arg(long)]
    pub placement: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    pub csv: PathBuf,
    /// JSON report path; defaults to `<csv stem>.stats.json` next to the CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Synthetic instance spec, inline JSON or a path to a JSON file.
    #[arg(long)]
    pub synthetic: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "synthetic")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

pub fn parse_grid(text: &str) -> Result<Option<GridDims>> {
    if text == "auto" {
        return Ok(None);
    }
    let bad = || CliError::Config(format!("--grid expects RxC or auto, got `{text}`"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let rows: usize = r.trim().parse().map_err(|_| bad())?;
    let cols: usize = c.trim().parse().map_err(|_| bad())?;
    if rows == 0 || cols == 0 {
        return Err(bad());
    }
    Ok(Some(GridDims::new(rows, cols)))
}

pub fn parse_weights(text: &str) -> Result<ProxyWeights> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("--weights expects wl,d,c, got `{text}`")))?;
    match parts[..] {
        [wl, d, c] => Ok(ProxyWeights::new(wl, d, c)),
        _ => Err(CliError::Config(format!("--weights expects three numbers, got `{text}`"))),
    }
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || CliError::Config(format!("--seeds expects a..b or a..=b, got `{text}`"));
    let (a, b, inclusive) = match text.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = text.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
    if seeds.is_empty() {
        return Err(CliError::Config(format!("seed range `{text}` is empty")));
    }
    Ok(seeds)
}

impl PlaceArgs {
    /// The single-config experiment equivalent to these flags.
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let cost = match self.cost {
            CostChoice::Hpwl => CostKind::Hpwl,
            CostChoice::Proxy => CostKind::Proxy {
                weights: self.weights.as_deref().map(parse_weights).transpose()?.unwrap_or_default(),
                grid: GridSpec::new(self.bins, self.bins),
            },
        };
        if self.cost == CostChoice::Hpwl && self.weights.is_some() {
            return Err(CliError::Config("--weights only applies to the proxy cost".into()));
        }
        let grid = self.grid.as_deref().map(parse_grid).transpose()?;
        let only = |flag: &str, engines: &str| {
            Err(CliError::Config(format!("{flag} only applies to --engine {engines}")))
        };
        if self.engine != Engine::Sa && (self.budget.is_some() || self.moves_per_temp.is_some()) {
            return only("--budget/--moves-per-temp", "sa");
        }
        if self.engine != Engine::Fd && self.cluster.is_some() {
            return only("--cluster", "fd");
        }
        let stages = match self.engine {
            Engine::Constructive => {
                if self.no_grid {
                    return Err(CliError::Config("the constructive placer is always gridded".into()));
                }
                vec![Stage::Constructive { grid: grid.flatten(), order: OrderPolicy::default() }]
            }
            Engine::Sa => {
                let mut a = AnnealStage::default();
                if let Some(b) = self.budget {
                    a.max_moves = b;
                }
                a.moves_per_temperature = self.moves_per_temp;
                a.grid_mode = match grid {
                    Some(dims) => GridMode::Gridded { dims },
                    None => GridMode::Continuous,
                };
                let mut stages = Vec::new();
                if self.warm_start.is_none() {
                    let heuristic = match self.init {
                        InitChoice::Centroid => InitHeuristic::CentroidOfConnectivity,
                        InitChoice::Random => InitHeuristic::RandomLegal,
                    };
                    stages.push(Stage::Init { heuristic });
                }
                stages.push(Stage::Anneal(a));
                stages
            }
            Engine::Fd => {
                if grid.is_some() {
                    return only("--grid", "constructive or sa");
                }
                let mut stages = Vec::new();
                if let Some(c) = &self.cluster {
                    stages.push(Stage::Cluster(json_arg::<ClusterParams>(c)?));
                }
                stages.push(Stage::Fd { tolerance: self.tolerance });
                stages
            }
        };
        let seeds = match (&self.seeds, self.seed) {
            (Some(s), _) => parse_seeds(s)?,
            (None, Some(s)) => vec![s],
            (None, None) => vec![0],
        };
        let name = match self.engine {
            Engine::Constructive => "constructive",
            Engine::Sa => "sa",
            Engine::Fd => "fd",
        };
        Ok(ExperimentSpec {
            input: self.input.to_spec()?,
            configs: vec![PipelineConfig { name: name.into(), cost, warm_start: self.warm_start.clone(), stages }],
            seeds,
            output: Some(self.out.clone()),
        })
    }
}
