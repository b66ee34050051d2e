//! Runs every (config, seed) cell of an experiment and assembles the report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use macroplace::clustering::{build_clustered_netlist, cluster_cells, expand_placement, Clustering};
use macroplace::metrics::{hpwl_total, proxy_cost, CostKind, GridSpec, ProxyCost, ProxyWeights};
use macroplace::netlist::bookshelf::{parse_bookshelf, read_placement, write_placement};
use macroplace::netlist::gen_synthetic;
use macroplace::placers::{
    anneal, check_legal, init_macros, place_constructive, place_force_directed, GridDims, InitHeuristic,
};
use macroplace::stats::{
    ab_compare, correlation_report, noise_stats, AbComparison, CorrelationReport, MetricSample, MetricTable,
    NoiseStats,
};
use macroplace::{Canvas, Netlist, Placement};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::spec::{ExperimentSpec, InputSpec, PipelineConfig, Stage};

pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";
pub const METRICS_FILE: &str = "metrics.csv";

pub struct Instance {
    pub name: String,
    pub netlist: Netlist,
    pub placement: Placement,
}

/// Bookshelf designs without a `.pl` start with every node at the canvas center.
pub fn load_input(input: &InputSpec) -> Result<Instance> {
    match input {
        InputSpec::Bookshelf { aux } => {
            let (netlist, pl) = parse_bookshelf(aux)?;
            let placement = pl.unwrap_or_else(|| Placement::centered(&netlist));
            let name = aux.file_stem().map_or("design".into(), |s| s.to_string_lossy().into_owned());
            Ok(Instance { name, netlist, placement })
        }
        InputSpec::Synthetic(s) => {
            let (netlist, placement) = gen_synthetic(s)?;
            Ok(Instance { name: "synthetic".into(), netlist, placement })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    pub nodes: usize,
    pub nets: usize,
    pub macros: usize,
    pub movable_macros: usize,
    pub std_cells: usize,
    pub canvas: Canvas,
    pub utilization: f64,
}

impl InstanceSummary {
    fn of(inst: &Instance) -> Self {
        let nl = &inst.netlist;
        InstanceSummary {
            name: inst.name.clone(),
            nodes: nl.num_nodes(),
            nets: nl.num_nets(),
            macros: nl.macros().count(),
            movable_macros: nl.movable_macros().len(),
            std_cells: nl.std_cells().count(),
            canvas: nl.canvas(),
            utilization: nl.utilization(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageOutcome {
    Cluster {
        clusters: usize,
        clustered_cells: usize,
    },
    Init {
        heuristic: InitHeuristic,
    },
    Constructive {
        grid: GridDims,
    },
    Anneal {
        initial_temperature: f64,
        initial_cost: f64,
        final_cost: f64,
        accepted_moves: u64,
        checkpoints: usize,
        grid: Option<GridDims>,
        trace: String,
    },
    Fd {
        movable: usize,
        on_clusters: bool,
        iterations: usize,
        residual: f64,
        converged: bool,
        unanchored: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub proxy: ProxyCost,
    pub hpwl: f64,
    pub legal: bool,
    pub violations: usize,
    /// Paths are relative to the output directory.
    pub placement: String,
    pub trace: Option<String>,
    pub stages: Vec<StageOutcome>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum RunEntry {
    Ok(RunRecord),
    Failed { seed: u64, error: String },
}

impl RunEntry {
    pub fn ok(&self) -> Option<&RunRecord> {
        match self {
            RunEntry::Ok(r) => Some(r),
            RunEntry::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub name: String,
    pub runs: Vec<RunEntry>,
    /// Over the successful runs; `None` below two.
    pub proxy_total: Option<NoiseStats>,
    pub hpwl: Option<NoiseStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    pub result: Option<AbComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub config: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
}

/// Everything in here is a deterministic function of the spec. Wall-clock timings
/// live in a separate file.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub spec_hash: String,
    pub spec: serde_json::Value,
    pub instance: InstanceSummary,
    pub timing_file: &'static str,
    pub configs: Vec<ConfigSummary>,
    pub comparisons: Vec<Comparison>,
    pub correlation: Option<CorrelationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation_error: Option<String>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellTiming {
    pub config: String,
    pub seed: u64,
    pub seconds: f64,
    pub stages: Vec<StageTime>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub spec_hash: String,
    pub jobs: usize,
    pub load_seconds: f64,
    pub seconds: f64,
    pub cells: Vec<CellTiming>,
}

pub struct Outcome {
    pub report: RunReport,
    pub timing: TimingReport,
    /// The failed cells' errors in canonical order.
    pub errors: Vec<CliError>,
}

/// The proxy cost reported for a run: the config's own weights and grid when it
/// optimizes the proxy, defaults otherwise.
pub fn report_proxy(netlist: &Netlist, placement: &Placement, cost: &CostKind) -> ProxyCost {
    match cost {
        CostKind::Proxy { weights, grid } => proxy_cost(netlist, placement, *weights, grid),
        CostKind::Hpwl => proxy_cost(netlist, placement, ProxyWeights::default(), &GridSpec::default()),
    }
}

fn cell_dir(config: &str, seed: u64) -> String {
    format!("{config}/seed-{seed}")
}

fn timed<T>(times: &mut Vec<StageTime>, stage: &'static str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    times.push(StageTime { stage, seconds: start.elapsed().as_secs_f64() });
    out
}

fn run_cell(
    inst: &Instance,
    config: &PipelineConfig,
    warm: Option<&Placement>,
    seed: u64,
    out: &Path,
    times: &mut Vec<StageTime>,
) -> Result<RunRecord> {
    let nl = &inst.netlist;
    let rel = cell_dir(&config.name, seed);
    let dir = out.join(&rel);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let mut pl = warm.cloned().unwrap_or_else(|| inst.placement.clone());
    let mut warm_state = warm.is_some();
    let mut clustering: Option<Clustering> = None;
    let mut trace = None;
    let anneals = config.stages.iter().filter(|s| matches!(s, Stage::Anneal(_))).count();
    let mut stages = Vec::new();
    for (k, stage) in config.stages.iter().enumerate() {
        let outcome = timed(times, stage.name(), || -> Result<StageOutcome> {
            Ok(match stage {
                Stage::Cluster(params) => {
                    let c = cluster_cells(nl, &pl, params)?;
                    let o = StageOutcome::Cluster {
                        clusters: c.clusters.len(),
                        clustered_cells: c.assignment.iter().flatten().count(),
                    };
                    clustering = Some(c);
                    o
                }
                Stage::Init { heuristic } => {
                    pl = init_macros(nl, &pl, *heuristic, seed)?;
                    warm_state = false;
                    StageOutcome::Init { heuristic: *heuristic }
                }
                Stage::Constructive { grid, order } => {
                    let place = |d| place_constructive(nl, &pl, d, *order, &config.cost);
                    let (dims, placed) = match grid {
                        Some(d) => (*d, place(*d)?),
                        None => GridDims::refine(nl, place)?,
                    };
                    pl = placed;
                    warm_state = true;
                    StageOutcome::Constructive { grid: dims }
                }
                Stage::Anneal(a) => {
                    let (placed, t) = anneal(nl, &pl, &a.config(seed, warm_state), &config.cost)?;
                    let name = if anneals == 1 { "trace.csv".to_string() } else { format!("trace-{k}.csv") };
                    t.save_csv(&dir.join(&name))?;
                    let path = format!("{rel}/{name}");
                    trace = Some(path.clone());
                    pl = placed;
                    warm_state = true;
                    StageOutcome::Anneal {
                        initial_temperature: t.initial_temperature,
                        initial_cost: t.initial_cost,
                        final_cost: t.final_cost,
                        accepted_moves: t.accepted_moves,
                        checkpoints: t.checkpoints.len(),
                        grid: t.grid_dims,
                        trace: path,
                    }
                }
                Stage::Fd { tolerance } => match &clustering {
                    Some(c) => {
                        let cn = build_clustered_netlist(nl, c)?;
                        let seed_pl = cn.seed_placement(c, &pl);
                        let movable: Vec<usize> = (cn.kept..cn.netlist.num_nodes()).collect();
                        let (placed, rep) = place_force_directed(&cn.netlist, &seed_pl, &movable, *tolerance)?;
                        let expanded = expand_placement(&cn, &placed);
                        for (i, a) in c.assignment.iter().enumerate() {
                            if a.is_some() {
                                pl.positions[i] = expanded.positions[i];
                                pl.orients[i] = expanded.orients[i];
                            }
                        }
                        fd_outcome(movable.len(), true, rep)
                    }
                    None => {
                        let movable: Vec<usize> = nl.std_cells().filter(|&i| nl.node(i).movable).collect();
                        let (placed, rep) = place_force_directed(nl, &pl, &movable, *tolerance)?;
                        pl = placed;
                        fd_outcome(movable.len(), false, rep)
                    }
                },
            })
        })?;
        stages.push(outcome);
    }

    let pl_path = dir.join("placement.pl");
    write_placement(nl, &pl, &pl_path)?;
    let violations = check_legal(nl, &pl, None).len();
    Ok(RunRecord {
        seed,
        proxy: report_proxy(nl, &pl, &config.cost),
        hpwl: hpwl_total(nl, &pl),
        legal: violations == 0,
        violations,
        placement: format!("{rel}/placement.pl"),
        trace,
        stages,
    })
}

fn fd_outcome(movable: usize, on_clusters: bool, rep: macroplace::placers::FdReport) -> StageOutcome {
    StageOutcome::Fd {
        movable,
        on_clusters,
        iterations: rep.iterations,
        residual: rep.residual,
        converged: rep.converged,
        unanchored: rep.unanchored,
    }
}

/// Runs the experiment with `jobs` workers and writes `report.json`, `timing.json`,
/// `metrics.csv` and one directory per cell under `out`. Failed cells are recorded in
/// the report rather than aborting the others.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, jobs: usize) -> Result<Outcome> {
    spec.validate()?;
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let start = Instant::now();
    let inst = load_input(&spec.input)?;
    let warm: Vec<Option<Placement>> = spec
        .configs
        .iter()
        .map(|c| c.warm_start.as_deref().map(|p| read_placement(&inst.netlist, p)).transpose())
        .collect::<macroplace::Result<_>>()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let load_seconds = start.elapsed().as_secs_f64();

    let cells: Vec<(usize, u64)> =
        (0..spec.configs.len()).flat_map(|c| spec.seeds.iter().map(move |&s| (c, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<(Result<RunRecord>, CellTiming)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(c, seed)| {
                let config = &spec.configs[c];
                let cell_start = Instant::now();
                let mut stages = Vec::new();
                let r = run_cell(&inst, config, warm[c].as_ref(), seed, out, &mut stages);
                if let Err(e) = &r {
                    log::warn!("{}: {e}", cell_dir(&config.name, seed));
                }
                let timing = CellTiming {
                    config: config.name.clone(),
                    seed,
                    seconds: cell_start.elapsed().as_secs_f64(),
                    stages,
                };
                (r, timing)
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut errors = Vec::new();
    let mut summaries: Vec<ConfigSummary> = spec
        .configs
        .iter()
        .map(|c| ConfigSummary { name: c.name.clone(), runs: Vec::new(), proxy_total: None, hpwl: None })
        .collect();
    let mut timings = Vec::new();
    for (&(c, seed), (r, t)) in cells.iter().zip(results) {
        let entry = match r {
            Ok(rec) => RunEntry::Ok(rec),
            Err(e) => {
                failures.push(Failure { config: spec.configs[c].name.clone(), seed, error: e.to_string() });
                let entry = RunEntry::Failed { seed, error: e.to_string() };
                errors.push(e);
                entry
            }
        };
        summaries[c].runs.push(entry);
        timings.push(t);
    }
    for s in &mut summaries {
        let ok: Vec<&RunRecord> = s.runs.iter().filter_map(RunEntry::ok).collect();
        let totals: Vec<f64> = ok.iter().map(|r| r.proxy.total).collect();
        let hpwl: Vec<f64> = ok.iter().map(|r| r.hpwl).collect();
        s.proxy_total = noise_stats(&totals).ok();
        s.hpwl = noise_stats(&hpwl).ok();
    }

    let comparisons = compare_configs(&summaries);
    let (correlation, correlation_error) = match correlation_report(&metric_table(&summaries)) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    write_metrics_csv(&summaries, &out.join(METRICS_FILE))?;

    let spec_hash = spec.hash();
    let report = RunReport {
        tool: ToolInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: macroplace::VERSION,
        },
        spec_hash: spec_hash.clone(),
        spec: spec.canonical(),
        instance: InstanceSummary::of(&inst),
        timing_file: TIMING_FILE,
        configs: summaries,
        comparisons,
        correlation,
        correlation_error,
        failures,
    };
    write_json(&out.join(REPORT_FILE), &report)?;
    let timing = TimingReport { spec_hash, jobs, load_seconds, seconds: start.elapsed().as_secs_f64(), cells: timings };
    write_json(&out.join(TIMING_FILE), &timing)?;
    Ok(Outcome { report, timing, errors })
}

/// Each config against the first, paired by seed when both ran every seed.
fn compare_configs(summaries: &[ConfigSummary]) -> Vec<Comparison> {
    let Some(base) = summaries.first() else { return Vec::new() };
    let totals = |s: &ConfigSummary| -> Vec<f64> { s.runs.iter().filter_map(RunEntry::ok).map(|r| r.proxy.total).collect() };
    let b = totals(base);
    summaries[1..]
        .iter()
        .map(|s| {
            let (result, error) = match ab_compare(&totals(s), &b) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Comparison { baseline: base.name.clone(), candidate: s.name.clone(), result, error }
        })
        .collect()
}

fn metric_table(summaries: &[ConfigSummary]) -> MetricTable {
    let samples = summaries
        .iter()
        .flat_map(|s| {
            s.runs.iter().filter_map(RunEntry::ok).map(move |r| MetricSample {
                run_id: cell_dir(&s.name, r.seed),
                seed: r.seed,
                proxy_total: r.proxy.total,
                proxy: Some(r.proxy),
                metrics: BTreeMap::from([
                    ("hpwl".to_string(), r.hpwl),
                    ("density".to_string(), r.proxy.density_term),
                    ("congestion".to_string(), r.proxy.congestion_term),
                ]),
            })
        })
        .collect();
    MetricTable { columns: vec!["hpwl".into(), "density".into(), "congestion".into()], samples }
}

fn write_metrics_csv(summaries: &[ConfigSummary], path: &Path) -> Result<()> {
    let mut text = String::from("run_id,seed,proxy_total,hpwl,density,congestion\n");
    for s in summaries {
        for r in s.runs.iter().filter_map(RunEntry::ok) {
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                cell_dir(&s.name, r.seed),
                r.seed,
                r.proxy.total,
                r.hpwl,
                r.proxy.density_term,
                r.proxy.congestion_term
            ));
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn default_out() -> PathBuf {
    PathBuf::from("out")
}
