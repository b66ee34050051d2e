//! Seeded synthetic mixed-size benchmarks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};

use super::{Canvas, Net, Netlist, Node, NodeKind, Pin, Placement};

/// Standard cells are one row tall; macros must be strictly taller.
pub const CELL_HEIGHT: f64 = 1.0;
const CELL_WIDTH_RANGE: (f64, f64) = (0.5, 1.5);
const MAX_NET_DEGREE: usize = 8;
const PLACE_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_macros: usize,
    pub n_cells: usize,
    pub n_nets: usize,
    /// Zero-area fixed terminals on the canvas boundary.
    pub n_pads: usize,
    /// Total node area over canvas area, in (0, 1].
    pub utilization: f64,
    /// Inclusive range for macro widths and heights, drawn independently.
    pub macro_size_range: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_macros: 8,
            n_cells: 100,
            n_nets: 80,
            n_pads: 0,
            utilization: 0.6,
            macro_size_range: (2.0, 6.0),
            seed: 0,
        }
    }
}

/// Generates a reproducible netlist with a random legal macro placement. The canvas
/// is square and sized so that total node area over canvas area equals the requested
/// utilization.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(Netlist, Placement)> {
    if !(spec.utilization > 0.0 && spec.utilization <= 1.0) {
        return Err(Error::InfeasibleSpec(format!(
            "utilization must lie in (0, 1], got {}",
            spec.utilization
        )));
    }
    let (lo, hi) = spec.macro_size_range;
    if spec.n_macros > 0 && !(lo > CELL_HEIGHT && lo <= hi && hi.is_finite()) {
        return Err(Error::InfeasibleSpec(format!(
            "macro size range ({lo}, {hi}) must be ordered and exceed the cell height {CELL_HEIGHT}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut nodes = Vec::with_capacity(spec.n_macros + spec.n_cells + spec.n_pads);
    for i in 0..spec.n_macros {
        let w = rng.gen_range(lo..=hi);
        let h = rng.gen_range(lo..=hi);
        nodes.push(Node::new(format!("m{i}"), w, h, NodeKind::Macro));
    }
    for i in 0..spec.n_cells {
        let w = rng.gen_range(CELL_WIDTH_RANGE.0..=CELL_WIDTH_RANGE.1);
        nodes.push(Node::new(format!("c{i}"), w, CELL_HEIGHT, NodeKind::StdCell));
    }
    for i in 0..spec.n_pads {
        nodes.push(Node::new(format!("p{i}"), 0.0, 0.0, NodeKind::FixedPad));
    }

    let area: f64 = nodes.iter().map(Node::area).sum();
    if area <= 0.0 {
        return Err(Error::InfeasibleSpec("instance has no area".into()));
    }
    let side = (area / spec.utilization).sqrt();
    let canvas = Canvas::new(side, side)?;
    if let Some(m) = nodes[..spec.n_macros].iter().find(|m| m.width > side || m.height > side) {
        return Err(Error::InfeasibleSpec(format!(
            "macro `{}` ({} x {}) does not fit the {side:.3} canvas",
            m.name, m.width, m.height
        )));
    }

    let mut placement = Placement::filled(nodes.len(), canvas.center());
    place_macros(&nodes[..spec.n_macros], canvas, &mut rng, &mut placement)?;
    for (i, n) in nodes.iter().enumerate().skip(spec.n_macros).take(spec.n_cells) {
        placement.positions[i] = Point::new(
            rng.gen_range(n.width / 2.0..=side - n.width / 2.0),
            rng.gen_range(n.height / 2.0..=side - n.height / 2.0),
        );
    }
    for i in spec.n_macros + spec.n_cells..nodes.len() {
        let t = rng.gen_range(0.0..=side);
        placement.positions[i] = match rng.gen_range(0..4) {
            0 => Point::new(t, 0.0),
            1 => Point::new(side, t),
            2 => Point::new(t, side),
            _ => Point::new(0.0, t),
        };
    }

    let nets = gen_nets(spec, &nodes, &mut rng)?;
    let netlist = Netlist::new(canvas, nodes, nets)?;
    Ok((netlist, placement))
}

/// Largest-first rejection sampling; falls back to shelf packing when the canvas is
/// too crowded for random sampling to succeed.
fn place_macros(macros: &[Node], canvas: Canvas, rng: &mut ChaCha8Rng, placement: &mut Placement) -> Result<()> {
    let mut order: Vec<usize> = (0..macros.len()).collect();
    order.sort_by(|&a, &b| macros[b].area().total_cmp(&macros[a].area()).then(a.cmp(&b)));

    let mut placed: Vec<Rect> = Vec::with_capacity(macros.len());
    for &i in &order {
        let m = &macros[i];
        let mut found = None;
        for _ in 0..PLACE_ATTEMPTS {
            let c = Point::new(
                rng.gen_range(m.width / 2.0..=canvas.width - m.width / 2.0),
                rng.gen_range(m.height / 2.0..=canvas.height - m.height / 2.0),
            );
            let r = Rect::centered(c, m.width, m.height);
            if placed.iter().all(|p| !p.overlaps(&r, 0.0)) {
                found = Some((c, r));
                break;
            }
        }
        match found {
            Some((c, r)) => {
                placement.positions[i] = c;
                placed.push(r);
            }
            None => return shelf_pack(macros, &order, canvas, placement),
        }
    }
    Ok(())
}

fn shelf_pack(macros: &[Node], order: &[usize], canvas: Canvas, placement: &mut Placement) -> Result<()> {
    let mut by_height = order.to_vec();
    by_height.sort_by(|&a, &b| macros[b].height.total_cmp(&macros[a].height).then(a.cmp(&b)));
    let (mut x, mut y, mut shelf_h) = (0.0, 0.0, 0.0_f64);
    for i in by_height {
        let m = &macros[i];
        if x + m.width > canvas.width {
            x = 0.0;
            y += shelf_h;
            shelf_h = 0.0;
        }
        if y + m.height > canvas.height {
            return Err(Error::InfeasibleSpec(
                "macros cannot be packed legally at the requested utilization".into(),
            ));
        }
        placement.positions[i] = Point::new(x + m.width / 2.0, y + m.height / 2.0);
        x += m.width;
        shelf_h = shelf_h.max(m.height);
    }
    Ok(())
}

fn gen_nets(spec: &SyntheticSpec, nodes: &[Node], rng: &mut ChaCha8Rng) -> Result<Vec<Net>> {
    if spec.n_nets > 0 && nodes.len() < 2 {
        return Err(Error::InfeasibleSpec("nets need at least two nodes".into()));
    }
    let max_degree = MAX_NET_DEGREE.min(nodes.len());
    let mut nets = Vec::with_capacity(spec.n_nets);
    for i in 0..spec.n_nets {
        let mut degree = 2;
        while degree < max_degree && rng.gen_bool(0.45) {
            degree += 1;
        }
        let mut members = sample(rng, nodes.len(), degree).into_vec();
        // Half of the nets are anchored on a macro so that macro placement matters.
        if spec.n_macros > 0 && rng.gen_bool(0.5) && !members.iter().any(|&m| m < spec.n_macros) {
            members[0] = rng.gen_range(0..spec.n_macros);
        }
        let pins = members
            .into_iter()
            .map(|m| {
                let n = &nodes[m];
                if n.kind == NodeKind::Macro {
                    Pin::new(
                        m,
                        rng.gen_range(-0.5..=0.5) * n.width,
                        rng.gen_range(-0.5..=0.5) * n.height,
                    )
                } else {
                    Pin::centered(m)
                }
            })
            .collect();
        nets.push(Net::new(format!("n{i}"), pins));
    }
    Ok(nets)
}
