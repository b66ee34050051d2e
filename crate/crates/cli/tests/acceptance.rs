//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any criterion fails or exceeds its time limit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use macroplace::metrics::{hpwl_total, CostKind};
use macroplace::netlist::bookshelf::{parse_bookshelf, write_bookshelf};
use macroplace::netlist::{gen_synthetic, SyntheticSpec};
use macroplace::placers::{
    anneal, init_macros, place_constructive, place_force_directed, ActionProbs, AnnealConfig, GridDims, GridMode,
    InitHeuristic, OrderPolicy, Temperature,
};
use macroplace::stats::{ab_compare, correlation_report, kendall_tau, median, MetricSample, MetricTable, StatsError};
use macroplace::{Canvas, Net, Netlist, Node, NodeKind, Orientation, Pin, Placement, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

type Criterion = (u32, &'static str, u64, fn() -> Verdict);

const CRITERIA: [Criterion; 11] = [
    (1, "HPWL shift and scale invariance", 10, hpwl_invariance),
    (2, "incremental HPWL drift", 30, incremental_drift),
    (3, "exhaustive optimum on 3 macros", 120, exhaustive_optimum),
    (4, "continuous beats gridded", 300, gridding_penalty),
    (5, "full action set beats reduced", 300, action_dominance),
    (6, "warm SA beats constructive", 300, sa_beats_constructive),
    (7, "warm start beats cold start", 300, warm_vs_cold),
    (8, "Kendall tau-b oracle", 5, kendall_oracle),
    (9, "noise ratio at mean -65, sigma 36.9", 1, noise_ratio),
    (10, "force-directed closed form", 1, fd_closed_form),
    (11, "round trip and CLI determinism", 60, round_trip_and_determinism),
];

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for &(id, name, limit, check) in &CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let late = if in_time { String::new() } else { format!(", over the {limit}s limit") };
        println!(
            "criterion {id:>2} {}: {name}: {} ({:.2}s{late})",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Random nodes of every kind with random pin offsets, sizes and orientations.
fn random_instance(rng: &mut ChaCha8Rng) -> (Netlist, Placement) {
    let n = rng.gen_range(2..30);
    let kinds = [NodeKind::Macro, NodeKind::StdCell, NodeKind::FixedPad];
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let kind = kinds[rng.gen_range(0..3)];
            let (w, h) = match kind {
                NodeKind::FixedPad => (0.0, 0.0),
                _ => (rng.gen_range(0.1..8.0), rng.gen_range(0.1..8.0)),
            };
            Node::new(format!("n{i}"), w, h, kind)
        })
        .collect();
    let nets: Vec<Net> = (0..rng.gen_range(1..40))
        .map(|k| {
            let pins = (0..rng.gen_range(2..7))
                .map(|_| {
                    let v = rng.gen_range(0..n);
                    let (w, h) = (nodes[v].width, nodes[v].height);
                    Pin::new(v, rng.gen_range(-0.5..=0.5) * w, rng.gen_range(-0.5..=0.5) * h)
                })
                .collect();
            Net::new(format!("e{k}"), pins).with_weight(rng.gen_range(0.5..2.0))
        })
        .collect();
    let nl = Netlist::new(Canvas::new(200.0, 200.0).unwrap(), nodes, nets).unwrap();
    let mut pl = Placement::centered(&nl);
    for i in 0..n {
        pl.set(i, Point::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0)));
        pl.orients[i] = Orientation::ALL[rng.gen_range(0..4)];
    }
    (nl, pl)
}

fn scaled(nl: &Netlist, pl: &Placement, g: f64) -> (Netlist, Placement) {
    let nodes = nl.nodes().iter().map(|n| Node::new(n.name.clone(), n.width * g, n.height * g, n.kind)).collect();
    let nets = nl
        .nets()
        .iter()
        .map(|e| {
            let pins = e.pins.iter().map(|p| Pin::new(p.node, p.dx * g, p.dy * g)).collect();
            Net::new(e.name.clone(), pins).with_weight(e.weight)
        })
        .collect();
    let c = nl.canvas();
    let out = Netlist::new(Canvas::new(c.width * g, c.height * g).unwrap(), nodes, nets).unwrap();
    let mut p = pl.clone();
    for q in &mut p.positions {
        *q = Point::new(q.x * g, q.y * g);
    }
    (out, p)
}

fn hpwl_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_shift, mut worst_scale) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (nl, pl) = random_instance(&mut rng);
        let h = hpwl_total(&nl, &pl);
        let (dx, dy) = (rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
        let mut shifted = pl.clone();
        for q in &mut shifted.positions {
            *q = Point::new(q.x + dx, q.y + dy);
        }
        worst_shift = worst_shift.max(rel_err(hpwl_total(&nl, &shifted), h));
        let g = rng.gen_range(0.1..10.0);
        let (snl, spl) = scaled(&nl, &pl, g);
        worst_scale = worst_scale.max(rel_err(hpwl_total(&snl, &spl), g * h));
    }
    verdict(
        worst_shift <= 1e-9 && worst_scale <= 1e-9,
        format!("1000 instances, worst relative error shift {worst_shift:.1e}, scale {worst_scale:.1e}"),
    )
}

fn incremental_drift() -> Verdict {
    let spec = SyntheticSpec { n_macros: 40, n_cells: 950, n_nets: 1200, n_pads: 10, seed: 2, ..Default::default() };
    let (nl, mut pl) = gen_synthetic(&spec).unwrap();
    assert_eq!(nl.num_nodes(), 1000);
    let movable: Vec<usize> = (0..nl.num_nodes()).filter(|&i| nl.node(i).movable).collect();
    let c = nl.canvas();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ev = CostKind::Hpwl.evaluator(&nl, &pl);
    let (mut accepted, mut rejected, mut worst) = (0, 0, 0.0f64);
    while accepted < 10_000 {
        let k = rng.gen_range(1..=3);
        let mut moved = Vec::with_capacity(k);
        for _ in 0..k {
            let i = movable[rng.gen_range(0..movable.len())];
            if moved.iter().any(|&(j, _, _)| j == i) {
                continue;
            }
            moved.push((i, pl.pos(i), pl.orient(i)));
            pl.set(i, Point::new(rng.gen_range(0.0..c.width), rng.gen_range(0.0..c.height)));
            pl.orients[i] = Orientation::ALL[rng.gen_range(0..4)];
        }
        ev.update(&pl, &moved);
        if rng.gen_bool(0.2) {
            ev.revert();
            for &(i, p, o) in moved.iter().rev() {
                pl.set(i, p);
                pl.orients[i] = o;
            }
            rejected += 1;
        } else {
            accepted += 1;
        }
        if accepted % 1000 == 0 {
            worst = worst.max(rel_err(ev.cost(), hpwl_total(&nl, &pl)));
        }
    }
    worst = worst.max(rel_err(ev.cost(), hpwl_total(&nl, &pl)));
    verdict(worst < 1e-6, format!("{accepted} accepted and {rejected} reverted moves, worst drift {worst:.1e}"))
}

/// Three macros on a 3x3 canvas, pads on the boundary, random 2-3 pin nets.
fn tiny3(seed: u64) -> (Netlist, Placement) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for i in 0..3 {
        nodes.push(Node::new(format!("m{i}"), rng.gen_range(0.5..1.0), rng.gen_range(0.5..1.0), NodeKind::Macro));
    }
    for i in 0..4 {
        nodes.push(Node::new(format!("p{i}"), 0.0, 0.0, NodeKind::FixedPad));
    }
    let mut nets = Vec::new();
    for k in 0..6 {
        let deg = rng.gen_range(2..=3);
        let mut members = vec![rng.gen_range(0..3)];
        while members.len() < deg {
            let n = rng.gen_range(0..7);
            if !members.contains(&n) {
                members.push(n);
            }
        }
        let pins = members
            .iter()
            .map(|&n| {
                let (w, h) = (nodes[n].width, nodes[n].height);
                Pin::new(n, rng.gen_range(-0.5..0.5) * w, rng.gen_range(-0.5..0.5) * h)
            })
            .collect();
        nets.push(Net::new(format!("n{k}"), pins));
    }
    let nl = Netlist::new(Canvas::new(3.0, 3.0).unwrap(), nodes, nets).unwrap();
    let mut pl = Placement::centered(&nl);
    for i in 0..3 {
        pl.set(i, Point::new(0.5 + i as f64, 0.5));
    }
    for i in 3..7 {
        let t = rng.gen_range(0.0..3.0);
        let p = match rng.gen_range(0..4) {
            0 => Point::new(t, 0.0),
            1 => Point::new(t, 3.0),
            2 => Point::new(0.0, t),
            _ => Point::new(3.0, t),
        };
        pl.set(i, p);
    }
    (nl, pl)
}

/// Every assignment of the three macros to distinct cells, in every orientation.
fn brute_force(nl: &Netlist, pl: &Placement) -> f64 {
    let mut best = f64::INFINITY;
    let mut p = pl.clone();
    for a in 0..9 {
        for b in 0..9 {
            for c in 0..9 {
                if a == b || b == c || a == c {
                    continue;
                }
                for (i, cell) in [a, b, c].into_iter().enumerate() {
                    p.set(i, Point::new(0.5 + (cell % 3) as f64, 0.5 + (cell / 3) as f64));
                }
                for o in 0..64 {
                    for i in 0..3 {
                        p.orients[i] = Orientation::ALL[(o >> (2 * i)) & 3];
                    }
                    best = best.min(hpwl_total(nl, &p));
                }
            }
        }
    }
    best
}

fn exhaustive_optimum() -> Verdict {
    let mut hits = 0;
    for seed in 0..20 {
        let (nl, pl) = tiny3(seed);
        let opt = brute_force(&nl, &pl);
        let cfg = AnnealConfig {
            max_moves: 100_000,
            seed,
            grid_mode: GridMode::Gridded { dims: Some(GridDims::new(3, 3)) },
            ..Default::default()
        };
        let (out, _) = anneal(&nl, &pl, &cfg, &CostKind::Hpwl).unwrap();
        if hpwl_total(&nl, &out) <= 1.05 * opt {
            hits += 1;
        }
    }
    verdict(hits >= 18, format!("{hits}/20 seeds within 5% of the enumerated optimum"))
}

fn gridding_penalty() -> Verdict {
    let (mut cont, mut grid) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let spec = SyntheticSpec {
            n_macros: 30,
            n_cells: 60,
            n_nets: 120,
            n_pads: 8,
            utilization: 0.65,
            macro_size_range: (1.2, 2.5),
            seed,
        };
        let (nl, pl) = gen_synthetic(&spec).unwrap();
        let cfg = AnnealConfig { max_moves: 30_000, seed, ..Default::default() };
        let (a, _) = anneal(&nl, &pl, &cfg, &CostKind::Hpwl).unwrap();
        let gridded = AnnealConfig { grid_mode: GridMode::Gridded { dims: None }, ..cfg };
        let (b, _) = anneal(&nl, &pl, &gridded, &CostKind::Hpwl).unwrap();
        cont.push(hpwl_total(&nl, &a));
        grid.push(hpwl_total(&nl, &b));
    }
    let (mc, mg) = (median(&cont), median(&grid));
    verdict(mc < mg, format!("median HPWL continuous {mc:.1} vs gridded {mg:.1} over 10 instances"))
}

const AB_BUDGET: u64 = 20_000;

fn default_instance(seed: u64) -> (Netlist, Placement) {
    gen_synthetic(&SyntheticSpec { n_pads: 8, seed, ..Default::default() }).unwrap()
}

fn action_dominance() -> Verdict {
    let cost = CostKind::default();
    let (mut full, mut reduced) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let (nl, pl) = default_instance(seed);
        let start = init_macros(&nl, &pl, InitHeuristic::RandomLegal, seed).unwrap();
        let cfg = AnnealConfig {
            max_moves: AB_BUDGET,
            moves_per_temperature: Some((AB_BUDGET / 250) as usize),
            seed,
            ..Default::default()
        };
        let red = AnnealConfig { actions: ActionProbs::reduced(), ..cfg.clone() };
        full.push(anneal(&nl, &start, &cfg, &cost).unwrap().1.final_cost);
        reduced.push(anneal(&nl, &start, &red, &cost).unwrap().1.final_cost);
    }
    let c = ab_compare(&full, &reduced).unwrap();
    let p = c.p_value.unwrap();
    verdict(
        c.median_a <= c.median_b && p < 0.1,
        format!("median {:.4} vs {:.4}, win rate {:.2}, sign test p = {p:.4}", c.median_a, c.median_b, c.win_rate),
    )
}

/// Constructive cost, warm-started SA from it and cold-started SA from a random legal
/// placement, all at the default schedule.
fn warm_cold_runs(seed: u64, with_cold: bool) -> (f64, f64, Option<f64>) {
    let cost = CostKind::default();
    let (nl, pl) = default_instance(seed);
    let (_, cons) =
        GridDims::refine(&nl, |d| place_constructive(&nl, &pl, d, OrderPolicy::AreaDescending, &cost)).unwrap();
    let cfg = AnnealConfig { max_moves: AB_BUDGET, seed, ..Default::default() };
    let warm = AnnealConfig { initial_temperature: Temperature::Auto { warm: true }, ..cfg.clone() };
    let w = anneal(&nl, &cons, &warm, &cost).unwrap().1.final_cost;
    let cold = with_cold.then(|| {
        let start = init_macros(&nl, &pl, InitHeuristic::RandomLegal, seed).unwrap();
        anneal(&nl, &start, &cfg, &cost).unwrap().1.final_cost
    });
    (cost.evaluate(&nl, &cons), w, cold)
}

fn sa_beats_constructive() -> Verdict {
    let wins = (0..20)
        .filter(|&seed| {
            let (cons, warm, _) = warm_cold_runs(seed, false);
            warm <= cons
        })
        .count();
    verdict(wins >= 18, format!("warm SA <= constructive on {wins}/20 seeds"))
}

fn warm_vs_cold() -> Verdict {
    let (mut warm, mut cold) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let (_, w, c) = warm_cold_runs(seed, true);
        warm.push(w);
        cold.push(c.unwrap());
    }
    let c = ab_compare(&warm, &cold).unwrap();
    verdict(
        c.median_a <= c.median_b,
        format!("median warm {:.4} vs cold {:.4}, warm wins {:.2}", c.median_a, c.median_b, c.win_rate),
    )
}

/// tau-b from sign products and tie-group sizes.
fn kendall_by_groups(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let sign = |x: f64| (x > 0.0) as i64 - (x < 0.0) as i64;
    let mut s = 0i64;
    for i in 0..n {
        for j in 0..i {
            s += sign(a[i] - a[j]) * sign(b[i] - b[j]);
        }
    }
    let tied_pairs = |v: &[f64]| -> u64 {
        let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
        for x in v {
            *groups.entry(x.to_bits()).or_default() += 1;
        }
        groups.values().map(|t| t * (t - 1) / 2).sum()
    };
    let n0 = (n * (n - 1) / 2) as u64;
    let (ua, ub) = (n0 - tied_pairs(a), n0 - tied_pairs(b));
    if ua == 0 || ub == 0 {
        return None;
    }
    Some(s as f64 / ((ua as f64) * (ub as f64)).sqrt())
}

fn kendall_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut agree, mut undefined) = (0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(0..=10);
        let levels = rng.gen_range(1..=6);
        let mut draw = || (0..n).map(|_| rng.gen_range(0..levels) as f64).collect::<Vec<f64>>();
        let (a, b) = (draw(), draw());
        let got = match kendall_tau(&a, &b) {
            Ok(t) => Some(t),
            Err(StatsError::UndefinedCorrelation | StatsError::TooFewSamples { .. }) => None,
            Err(e) => panic!("unexpected error {e}"),
        };
        let want = kendall_by_groups(&a, &b);
        if got.map(f64::to_bits) == want.map(f64::to_bits) {
            agree += 1;
        }
        undefined += want.is_none() as usize;
    }
    verdict(agree == 1000, format!("{agree}/1000 exact agreements ({undefined} undefined cases)"))
}

fn noise_ratio() -> Verdict {
    // Standardize random draws to mean 0 and sample deviation 1, then rescale.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let z: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = z.iter().sum::<f64>() / z.len() as f64;
    let sd = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
    let samples = z
        .iter()
        .enumerate()
        .map(|(i, v)| MetricSample {
            run_id: format!("r{i}"),
            seed: i as u64,
            proxy_total: i as f64,
            proxy: None,
            metrics: BTreeMap::from([("tns".to_string(), -65.0 + 36.9 * (v - m) / sd)]),
        })
        .collect();
    let report = correlation_report(&MetricTable::from_samples(samples)).unwrap();
    let ratio = report.rows[0].noise.ratio.unwrap();
    verdict((ratio - 0.57).abs() <= 0.005, format!("sigma/|mean| = {ratio:.4}"))
}

fn fd_closed_form() -> Verdict {
    let nodes = vec![
        Node::new("left", 0.0, 0.0, NodeKind::FixedPad),
        Node::new("a", 0.0, 0.0, NodeKind::StdCell),
        Node::new("b", 0.0, 0.0, NodeKind::StdCell),
        Node::new("right", 0.0, 0.0, NodeKind::FixedPad),
    ];
    let nets = (0..3).map(|i| Net::new(format!("e{i}"), vec![Pin::centered(i), Pin::centered(i + 1)])).collect();
    let nl = Netlist::new(Canvas::new(10.0, 1.0).unwrap(), nodes, nets).unwrap();
    let mut pl = Placement::centered(&nl);
    pl.set(0, Point::new(0.0, 0.5));
    pl.set(3, Point::new(10.0, 0.5));
    let (out, rep) = place_force_directed(&nl, &pl, &[1, 2], 1e-6).unwrap();
    let (ea, eb) = ((out.pos(1).x - 10.0 / 3.0).abs(), (out.pos(2).x - 20.0 / 3.0).abs());
    verdict(
        rep.converged && ea <= 1e-6 && eb <= 1e-6,
        format!("a = {:.9}, b = {:.9}, {} iterations", out.pos(1).x, out.pos(2).x, rep.iterations),
    )
}

fn bin(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_macroplace"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn files_under(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.json" {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn round_trip(tmp: &Path) -> Result<usize, String> {
    let mut ok = 0;
    for k in 0..50u64 {
        let spec = SyntheticSpec {
            n_macros: 2 + (k % 7) as usize,
            n_cells: 10 + 7 * k as usize,
            n_nets: 10 + 5 * k as usize,
            n_pads: (k % 5) as usize,
            seed: k,
            ..Default::default()
        };
        let (nl, pl) = gen_synthetic(&spec).map_err(|e| e.to_string())?;
        let (d1, d2) = (tmp.join(format!("rt{k}a")), tmp.join(format!("rt{k}b")));
        let aux = write_bookshelf(&nl, Some(&pl), &d1, "d").map_err(|e| e.to_string())?;
        let (back, back_pl) = parse_bookshelf(&aux).map_err(|e| e.to_string())?;
        let same = back.canvas() == nl.canvas()
            && back.nodes() == nl.nodes()
            && back.nets() == nl.nets()
            && back_pl.as_ref() == Some(&pl);
        write_bookshelf(&back, back_pl.as_ref(), &d2, "d").map_err(|e| e.to_string())?;
        if same && files_under(&d1) == files_under(&d2) {
            ok += 1;
        }
    }
    Ok(ok)
}

/// Runs `commands` (each writing below its own output root) into two roots and
/// compares every output file except timing sidecars.
fn cli_determinism(tmp: &Path) -> Result<usize, String> {
    let synth = r#"{"n_macros":8,"n_cells":60,"n_nets":60,"n_pads":4,"seed":11}"#;
    let spec = format!(
        r#"{{"input": {{"synthetic": {synth}}},
            "configs": [{{"name": "sa", "stages": [{{"stage": "init"}}, {{"stage": "anneal", "max_moves": 3000}}]}},
                        {{"name": "cons", "stages": [{{"stage": "constructive"}}, {{"stage": "anneal", "max_moves": 3000}}]}},
                        {{"name": "fd", "stages": [{{"stage": "cluster", "regions_x": 3, "regions_y": 3}}, {{"stage": "fd"}}]}}],
            "seeds": [1, 2, 3, 4, 5, 6, 7, 8]}}"#
    );
    fs::write(tmp.join("spec.json"), spec).map_err(|e| e.to_string())?;
    for root in ["r1", "r2"] {
        let dir = tmp.join(root);
        fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let r = |s: &str| format!("{root}/{s}");
        let jobs = if root == "r1" { "1" } else { "8" };
        bin(&["experiment", "spec.json", "--out", &r("exp"), "--jobs", jobs], tmp)?;
        for engine in ["sa", "constructive", "fd"] {
            bin(&["place", "--synthetic", synth, "--engine", engine, "--seeds", "0..4", "--out", &r(engine), "--jobs", "8"], tmp)?;
        }
        bin(&["place", "--synthetic", synth, "--engine", "sa", "--grid", "auto", "--seed", "3", "--out", &r("grid"), "--jobs", "8"], tmp)?;
        bin(&["render", "--synthetic", synth, "--placement", &r("sa/sa/seed-1/placement.pl"), "--out", &r("sa.svg")], tmp)?;
        bin(&["stats", &r("exp/metrics.csv"), "--out", &r("stats.json")], tmp)?;
        bin(&["gen", "--synthetic", synth, "--out", &r("gen"), "--name", "g"], tmp)?;
        bin(&["validate", "--aux", &r("gen/g.aux")], tmp)?;
    }
    let (a, b) = (files_under(&tmp.join("r1")), files_under(&tmp.join("r2")));
    if a != b {
        let diff: Vec<_> = a.keys().filter(|k| b.get(*k) != a.get(*k)).collect();
        return Err(format!("outputs differ: {diff:?}"));
    }
    Ok(a.len())
}

fn round_trip_and_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    match (round_trip(tmp.path()), cli_determinism(tmp.path())) {
        (Ok(rt), Ok(files)) => verdict(
            rt == 50,
            format!("{rt}/50 Bookshelf round trips exact, {files} CLI output files identical across runs and --jobs 1/8"),
        ),
        (Err(e), _) | (_, Err(e)) => verdict(false, e),
    }
}
