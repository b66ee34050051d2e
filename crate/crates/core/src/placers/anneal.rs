use std::io::Write;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::CostKind;
use crate::netlist::{Netlist, Placement};

use super::moves::{Action, MoveSpace};
use super::{check_legal, snap_to_grid, GridDims};

const PROBE_SAMPLES: usize = 100;
const PROBE_ATTEMPTS: usize = 1000;
const WARM_FACTOR: f64 = 0.1;
const PROBE_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

/// Probability of each perturbation. Must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionProbs {
    pub swap: f64,
    pub shift: f64,
    pub mirror: f64,
    #[serde(rename = "move")]
    pub move_: f64,
    pub shuffle: f64,
}

impl ActionProbs {
    pub fn full() -> Self {
        ActionProbs {
            swap: 0.25,
            shift: 0.25,
            mirror: 0.1,
            move_: 0.2,
            shuffle: 0.2,
        }
    }

    /// Swap, shift and mirror only.
    pub fn reduced() -> Self {
        ActionProbs {
            swap: 0.45,
            shift: 0.45,
            mirror: 0.1,
            move_: 0.0,
            shuffle: 0.0,
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.swap, self.shift, self.mirror, self.move_, self.shuffle]
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.as_array();
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(format!("action probabilities must be non-negative, got {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("action probabilities sum to {sum}, expected 1")));
        }
        Ok(())
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.as_array()).expect("validated probabilities")
    }
}

impl Default for ActionProbs {
    fn default() -> Self {
        ActionProbs::full()
    }
}

const ACTIONS: [Action; 5] = [Action::Swap, Action::Shift, Action::Mirror, Action::Move, Action::Shuffle];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    /// Derived from sampled cost deltas; `warm` lowers it for a good starting point.
    Auto { warm: bool },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    Continuous,
    /// `None` picks the grid with [`GridDims::refine`].
    Gridded { dims: Option<GridDims> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub actions: ActionProbs,
    /// Defaults to 100 per movable macro.
    pub moves_per_temperature: Option<usize>,
    pub cooling: f64,
    pub initial_temperature: Temperature,
    pub max_moves: u64,
    pub grid_mode: GridMode,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            actions: ActionProbs::full(),
            moves_per_temperature: None,
            cooling: 0.98,
            initial_temperature: Temperature::Auto { warm: false },
            max_moves: 100_000,
            grid_mode: GridMode::Continuous,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        self.actions.validate()?;
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Config(format!("cooling factor must be in (0, 1), got {}", self.cooling)));
        }
        if self.max_moves == 0 {
            return Err(Error::Config("move budget must be positive".into()));
        }
        if self.moves_per_temperature == Some(0) {
            return Err(Error::Config("moves per temperature must be positive".into()));
        }
        if let Temperature::Fixed(t) = self.initial_temperature {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("initial temperature must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub moves: u64,
    pub temperature: f64,
    pub cost: f64,
    pub best_cost: f64,
    /// Accepted moves over attempted moves since the previous checkpoint.
    pub acceptance_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnealTrace {
    pub initial_temperature: f64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub accepted_moves: u64,
    /// Grid actually used in gridded mode.
    pub grid_dims: Option<GridDims>,
    pub checkpoints: Vec<Checkpoint>,
}

impl AnnealTrace {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| Error::Validation(format!("writing trace: {e}"));
        w.write_record(["move_count", "temperature", "cost", "best_cost", "acceptance_ratio"])
            .map_err(csv_err)?;
        for c in &self.checkpoints {
            w.write_record([
                c.moves.to_string(),
                c.temperature.to_string(),
                c.cost.to_string(),
                c.best_cost.to_string(),
                c.acceptance_ratio.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Validation(format!("writing trace: {e}")))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Starting temperature from the median absolute cost change of up to 100 random
/// legal moves (continuous mode, full action set): `median / ln 2`, so a median
/// uphill move is initially accepted half the time. `warm` scales it by 0.1.
pub fn auto_temperature(netlist: &Netlist, placement: &Placement, cost: &CostKind, warm: bool, seed: u64) -> f64 {
    let mut space = MoveSpace::continuous(netlist);
    probe_temperature(netlist, placement, cost, &mut space, warm, seed)
}

fn probe_temperature(
    netlist: &Netlist,
    placement: &Placement,
    cost: &CostKind,
    space: &mut MoveSpace,
    warm: bool,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PROBE_STREAM);
    let sampler = ActionProbs::full().sampler();
    let mut pl = placement.clone();
    let mut ev = cost.evaluator(netlist, &pl);
    let base = ev.cost();
    let mut deltas = Vec::with_capacity(PROBE_SAMPLES);
    for _ in 0..PROBE_ATTEMPTS {
        if deltas.len() == PROBE_SAMPLES {
            break;
        }
        let action = ACTIONS[sampler.sample(&mut rng)];
        let Some(p) = space.propose(action, &pl, &mut rng) else {
            continue;
        };
        space.apply(&mut pl, &p);
        let d = (ev.update(&pl, &p.moved()) - base).abs();
        ev.revert();
        space.undo(&mut pl, &p);
        if d > 0.0 {
            deltas.push(d);
        }
    }
    if deltas.is_empty() {
        return 0.0;
    }
    deltas.sort_by(f64::total_cmp);
    let n = deltas.len();
    let median = if n % 2 == 1 { deltas[n / 2] } else { (deltas[n / 2 - 1] + deltas[n / 2]) / 2.0 };
    let t = median / std::f64::consts::LN_2;
    if warm {
        WARM_FACTOR * t
    } else {
        t
    }
}

/// Simulated annealing over the movable macros of `initial`.
///
/// Continuous mode requires a legal starting placement; gridded mode first snaps it to
/// the grid. Proposals that would overlap or leave the canvas are rejected without
/// being evaluated. Returns the best placement seen.
pub fn anneal(
    netlist: &Netlist,
    initial: &Placement,
    config: &AnnealConfig,
    cost: &CostKind,
) -> Result<(Placement, AnnealTrace)> {
    config.validate()?;
    cost.validate()?;
    initial.check_covers(netlist)?;
    let mut grid_dims = None;
    let (mut pl, mut space) = match config.grid_mode {
        GridMode::Continuous => {
            let violations = check_legal(netlist, initial, None);
            if let Some(v) = violations.first() {
                return Err(Error::Precondition(format!(
                    "continuous annealing needs a legal start ({} violations, first: {v:?})",
                    violations.len()
                )));
            }
            (initial.clone(), MoveSpace::continuous(netlist))
        }
        GridMode::Gridded { dims } => {
            let (dims, (snapped, _)) = match dims {
                Some(d) => (d, snap_to_grid(netlist, initial, d)?),
                None => GridDims::refine(netlist, |d| snap_to_grid(netlist, initial, d))?,
            };
            let space = MoveSpace::gridded(netlist, &snapped, dims)?;
            grid_dims = Some(dims);
            (snapped, space)
        }
    };
    let mut temperature = match config.initial_temperature {
        Temperature::Fixed(t) => t,
        Temperature::Auto { warm } => probe_temperature(netlist, &pl, cost, &mut space, warm, config.seed),
    };
    let mpt = config
        .moves_per_temperature
        .unwrap_or(100 * space.movable().len())
        .max(1) as u64;
    let sampler = config.actions.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ev = cost.evaluator(netlist, &pl);
    let mut current = ev.cost();
    let start = pl.clone();
    let mut best = pl.clone();
    let mut best_cost = current;
    let mut trace = AnnealTrace {
        initial_temperature: temperature,
        initial_cost: current,
        grid_dims,
        ..Default::default()
    };
    log::debug!("anneal: T0={temperature:.6e} cost={current:.6} moves/T={mpt}");

    let mut window_accepted = 0u64;
    let mut window_start = 0u64;
    for k in 1..=config.max_moves {
        let action = ACTIONS[sampler.sample(&mut rng)];
        if let Some(p) = space.propose(action, &pl, &mut rng) {
            space.apply(&mut pl, &p);
            let next = ev.update(&pl, &p.moved());
            let delta = next - current;
            let accept = delta <= 0.0 || (temperature > 0.0 && rng.gen::<f64>() < (-delta / temperature).exp());
            if accept {
                current = next;
                window_accepted += 1;
                if current < best_cost {
                    best_cost = current;
                    best.clone_from(&pl);
                }
            } else {
                ev.revert();
                space.undo(&mut pl, &p);
            }
        }
        if k % mpt == 0 || k == config.max_moves {
            trace.accepted_moves += window_accepted;
            trace.checkpoints.push(Checkpoint {
                moves: k,
                temperature,
                cost: current,
                best_cost,
                acceptance_ratio: window_accepted as f64 / (k - window_start) as f64,
            });
            window_accepted = 0;
            window_start = k;
            temperature *= config.cooling;
            ev.resync(&pl);
            current = ev.cost();
        }
    }
    trace.final_cost = cost.evaluate(netlist, &best);
    // Tracking uses incremental costs; never return something worse than the start.
    let start_cost = cost.evaluate(netlist, &start);
    if start_cost < trace.final_cost {
        best = start;
        trace.final_cost = start_cost;
    }
    log::debug!("anneal: final cost {:.6} after {} accepted moves", trace.final_cost, trace.accepted_moves);
    Ok((best, trace))
}
