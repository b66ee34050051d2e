use macroplace::clustering::{cluster_cells, region_of, ClusterParams};
use macroplace::metrics::{hpwl_total, proxy_cost, CostKind, GridSpec, ProxyWeights};
use macroplace::netlist::bookshelf::{parse_bookshelf, write_bookshelf};
use macroplace::netlist::{gen_synthetic, SyntheticSpec};
use macroplace::placers::{
    anneal, check_legal, init_macros, place_constructive, AnnealConfig, GridDims, InitHeuristic, MacroGrid,
    OrderPolicy,
};
use macroplace::stats::{ab_compare, kendall_tau, noise_stats, sign_test_p};
use macroplace::{Orientation, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_spec(seed: u64, n_macros: usize, n_cells: usize) -> SyntheticSpec {
    SyntheticSpec { n_macros, n_cells, n_nets: n_cells + n_macros, n_pads: 4, seed, ..Default::default() }
}

fn orientation() -> impl Strategy<Value = Orientation> {
    prop::sample::select(Orientation::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hpwl_shift_invariant(seed in 0u64..1000, dx in -1e4f64..1e4, dy in -1e4f64..1e4) {
        let (nl, pl) = gen_synthetic(&small_spec(seed, 4, 30)).unwrap();
        let mut moved = pl.clone();
        for p in &mut moved.positions {
            *p = Point::new(p.x + dx, p.y + dy);
        }
        let (a, b) = (hpwl_total(&nl, &pl), hpwl_total(&nl, &moved));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn orientation_flips_are_involutions(o in orientation(), dx in -5f64..5.0, dy in -5f64..5.0) {
        prop_assert_eq!(o.flip_x().flip_x(), o);
        prop_assert_eq!(o.flip_y().flip_y(), o);
        prop_assert_eq!(o.flip_x().flip_y(), o.flip_y().flip_x());
        let (x, y) = o.apply(dx, dy);
        prop_assert_eq!((x.abs(), y.abs()), (dx.abs(), dy.abs()));
    }

    #[test]
    fn incremental_proxy_matches_full(seed in 0u64..1000, moves in 1usize..40) {
        let (nl, mut pl) = gen_synthetic(&small_spec(seed, 5, 40)).unwrap();
        let cost = CostKind::default();
        let mut ev = cost.evaluator(&nl, &pl);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = nl.canvas();
        for _ in 0..moves {
            let i = rng.gen_range(0..nl.num_nodes());
            if !nl.node(i).movable {
                continue;
            }
            let old = (i, pl.pos(i), pl.orient(i));
            pl.set(i, Point::new(rng.gen_range(0.0..c.width), rng.gen_range(0.0..c.height)));
            pl.orients[i] = Orientation::ALL[rng.gen_range(0..4)];
            ev.update(&pl, &[old]);
            if rng.gen_bool(0.3) {
                ev.revert();
                pl.set(i, old.1);
                pl.orients[i] = old.2;
            }
        }
        let full = cost.evaluate(&nl, &pl);
        prop_assert!((ev.cost() - full).abs() <= 1e-9 * full.abs().max(1.0));
    }

    #[test]
    fn proxy_total_is_weighted_sum(seed in 0u64..1000, w in (0f64..2.0, 0f64..2.0, 0f64..2.0), bins in 4usize..40) {
        let (nl, pl) = gen_synthetic(&small_spec(seed, 4, 30)).unwrap();
        let weights = ProxyWeights::new(w.0, w.1, w.2);
        let p = proxy_cost(&nl, &pl, weights, &GridSpec::new(bins, bins));
        let sum = w.0 * p.wirelength_term + w.1 * p.density_term + w.2 * p.congestion_term;
        prop_assert!((p.total - sum).abs() <= 1e-12 * sum.abs().max(1.0));
        prop_assert!(p.density_term >= 0.0 && p.congestion_term >= 0.0);
    }

    #[test]
    fn kendall_symmetric_and_rank_based(v in prop::collection::vec((0u8..5, -50f64..50.0), 2..15)) {
        let a: Vec<f64> = v.iter().map(|x| x.0 as f64).collect();
        let b: Vec<f64> = v.iter().map(|x| x.1).collect();
        let t = kendall_tau(&a, &b);
        prop_assert_eq!(t.clone(), kendall_tau(&b, &a));
        // A strictly increasing transform keeps every pair's order.
        let a2: Vec<f64> = a.iter().map(|x| (x * 0.7).exp() + 3.0).collect();
        prop_assert_eq!(t.clone(), kendall_tau(&a2, &b));
        let neg: Vec<f64> = b.iter().map(|x| -x).collect();
        if let Ok(t) = t {
            prop_assert!((-1.0..=1.0).contains(&t));
            let tn = kendall_tau(&a, &neg).unwrap();
            prop_assert!((tn + t).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_scales_linearly(xs in prop::collection::vec(-100f64..100.0, 2..30), c in 0.01f64..100.0) {
        let base = noise_stats(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
        let s = noise_stats(&scaled).unwrap();
        prop_assert!((s.std_dev - c * base.std_dev).abs() <= 1e-9 * (c * base.std_dev).max(1e-9));
        prop_assert!((s.mean - c * base.mean).abs() <= 1e-9 * (c * base.mean.abs()).max(1e-9));
        if let (Some(r0), Some(r1)) = (base.ratio, s.ratio) {
            prop_assert!((r0 - r1).abs() <= 1e-9 * r0.max(1e-9));
        }
    }

    #[test]
    fn comparison_bounds(a in prop::collection::vec(0f64..10.0, 5..20), b in prop::collection::vec(0f64..10.0, 5..20)) {
        let c = ab_compare(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.win_rate));
        prop_assert_eq!(c.paired, a.len() == b.len());
        prop_assert_eq!(c.p_value.is_some(), c.paired);
        if let Some(p) = c.p_value {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn sign_test_is_symmetric(w in 0usize..60, l in 0usize..60) {
        let p = sign_test_p(w, l);
        prop_assert!((p - sign_test_p(l, w)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn clustering_partitions_cells(seed in 0u64..1000, rx in 1usize..6, ry in 1usize..6, cap in prop::option::of(1f64..8.0)) {
        let (nl, pl) = gen_synthetic(&small_spec(seed, 3, 50)).unwrap();
        let params = ClusterParams { regions_x: rx, regions_y: ry, max_cluster_area: cap };
        let c = cluster_cells(&nl, &pl, &params).unwrap();
        let mut seen = vec![0usize; nl.num_nodes()];
        for (k, cl) in c.clusters.iter().enumerate() {
            let area: f64 = cl.members.iter().map(|&m| nl.node(m).area()).sum();
            prop_assert!((area - cl.area).abs() <= 1e-9 * area.max(1.0));
            if let Some(cap) = cap {
                prop_assert!(cl.members.len() == 1 || cl.area <= cap + 1e-9);
            }
            for &m in &cl.members {
                seen[m] += 1;
                prop_assert_eq!(c.assignment[m], Some(k));
                prop_assert_eq!(region_of(&nl, &params, pl.pos(m)), cl.region);
            }
        }
        for (i, &count) in seen.iter().enumerate() {
            prop_assert_eq!(count, usize::from(nl.node(i).is_std_cell() && nl.node(i).movable));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bookshelf_round_trip(seed in 0u64..10_000, m in 1usize..8, n in 0usize..60) {
        let generated = gen_synthetic(&small_spec(seed, m, n));
        prop_assume!(generated.is_ok());
        let (nl, pl) = generated.unwrap();
        let dir = tempfile::tempdir().unwrap();
        let aux = write_bookshelf(&nl, Some(&pl), dir.path(), "d").unwrap();
        let (back, back_pl) = parse_bookshelf(&aux).unwrap();
        prop_assert_eq!(back.nodes(), nl.nodes());
        prop_assert_eq!(back.nets(), nl.nets());
        prop_assert_eq!(back_pl, Some(pl));
    }

    #[test]
    fn macro_placers_are_legal(seed in 0u64..10_000, m in 1usize..10) {
        let (nl, pl) = gen_synthetic(&small_spec(seed, m, 12 * m)).unwrap();
        for h in [InitHeuristic::RandomLegal, InitHeuristic::CentroidOfConnectivity] {
            let out = init_macros(&nl, &pl, h, seed).unwrap();
            prop_assert!(check_legal(&nl, &out, None).is_empty());
            for i in nl.std_cells() {
                prop_assert_eq!(out.pos(i), pl.pos(i));
            }
        }
        let (dims, out) = GridDims::refine(&nl, |d| {
            place_constructive(&nl, &pl, d, OrderPolicy::AreaDescending, &CostKind::Hpwl)
        }).unwrap();
        let grid = MacroGrid::new(nl.canvas(), dims).unwrap();
        prop_assert!(check_legal(&nl, &out, Some(&grid)).is_empty());
    }

    #[test]
    fn annealing_best_cost_never_rises(seed in 0u64..10_000) {
        let (nl, pl) = gen_synthetic(&small_spec(seed, 5, 30)).unwrap();
        let cfg = AnnealConfig { max_moves: 3000, moves_per_temperature: Some(100), seed, ..Default::default() };
        let cost = CostKind::default();
        let (out, trace) = anneal(&nl, &pl, &cfg, &cost).unwrap();
        prop_assert!(check_legal(&nl, &out, None).is_empty());
        for w in trace.checkpoints.windows(2) {
            prop_assert!(w[1].best_cost <= w[0].best_cost);
        }
        prop_assert!(trace.final_cost <= trace.initial_cost + 1e-12);
        prop_assert!((cost.evaluate(&nl, &out) - trace.final_cost).abs() <= 1e-9);
    }
}
