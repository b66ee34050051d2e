use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::netlist::{Netlist, Placement};

const EPS: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 10_000;
const MAX_LOOKAHEAD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitHeuristic {
    /// Uniform rejection sampling of non-overlapping positions.
    RandomLegal,
    /// Each macro goes as close as possible to the weighted centroid of the nodes it is
    /// already connected to.
    #[default]
    CentroidOfConnectivity,
}

/// Places every movable macro legally, largest first. Other nodes keep their
/// positions from `base`. A position is only taken if the macros still to come can be
/// packed bottom-left around it, so an early macro cannot wall off the rest.
pub fn init_macros(netlist: &Netlist, base: &Placement, heuristic: InitHeuristic, seed: u64) -> Result<Placement> {
    base.check_covers(netlist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pl = base.clone();
    let mut order = netlist.movable_macros();
    order.sort_by(|&a, &b| netlist.node(b).area().total_cmp(&netlist.node(a).area()).then(a.cmp(&b)));

    let mut placed = vec![false; netlist.num_nodes()];
    let mut obstacles: Vec<Rect> = Vec::new();
    for m in netlist.macros().filter(|&m| !netlist.node(m).movable) {
        placed[m] = true;
        obstacles.push(pl.rect(netlist, m));
    }
    for n in netlist.nodes().iter().enumerate().filter(|(_, n)| !n.is_macro()).map(|(i, _)| i) {
        placed[n] = !netlist.node(n).movable;
    }

    for (k, &m) in order.iter().enumerate() {
        let rest = &order[k + 1..];
        let at = match heuristic {
            InitHeuristic::RandomLegal => None,
            InitHeuristic::CentroidOfConnectivity => {
                let target = centroid(netlist, &pl, &placed, m).unwrap_or_else(|| netlist.canvas().center());
                let mut checks = 0;
                legal_candidates(netlist, m, target, &obstacles)
                    .into_iter()
                    .find(|&p| leaves_room(netlist, m, p, rest, &obstacles, &mut checks))
            }
        };
        let at = match at {
            Some(p) => p,
            None => random_legal(netlist, m, rest, &obstacles, &mut rng)?,
        };
        pl.set(m, at);
        placed[m] = true;
        obstacles.push(pl.rect(netlist, m));
    }
    Ok(pl)
}

/// Weight-averaged position of already-placed nodes sharing a net with `m`.
fn centroid(netlist: &Netlist, pl: &Placement, placed: &[bool], m: usize) -> Option<Point> {
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for &ni in netlist.nets_of(m) {
        let net = netlist.net(ni);
        for pin in net.pins.iter().filter(|p| p.node != m && placed[p.node]) {
            let p = pl.pin_position(pin);
            sx += net.weight * p.x;
            sy += net.weight * p.y;
            sw += net.weight;
        }
    }
    (sw > 0.0).then(|| Point::new(sx / sw, sy / sw))
}

fn is_legal(netlist: &Netlist, m: usize, p: Point, obstacles: &[Rect]) -> bool {
    let node = netlist.node(m);
    let canvas = netlist.canvas();
    let r = Rect::centered(p, node.width, node.height);
    r.inside(canvas.width, canvas.height, EPS) && obstacles.iter().all(|o| !r.overlaps(o, EPS))
}

/// Legal centers for `m`, closest to `target` first. Candidates are aligned with the
/// target, the edges of obstacles and the canvas bounds.
fn legal_candidates(netlist: &Netlist, m: usize, target: Point, obstacles: &[Rect]) -> Vec<Point> {
    let node = netlist.node(m);
    let canvas = netlist.canvas();
    let (hw, hh) = (node.width / 2.0, node.height / 2.0);
    let clamp = |v: f64, half: f64, limit: f64| v.clamp(half, (limit - half).max(half));
    let mut xs = vec![clamp(target.x, hw, canvas.width), hw, canvas.width - hw];
    let mut ys = vec![clamp(target.y, hh, canvas.height), hh, canvas.height - hh];
    for r in obstacles {
        xs.extend([r.x_lo - hw, r.x_hi + hw]);
        ys.extend([r.y_lo - hh, r.y_hi + hh]);
    }
    let mut out: Vec<(f64, Point)> = Vec::new();
    for &x in &xs {
        for &y in &ys {
            let p = Point::new(x, y);
            if is_legal(netlist, m, p, obstacles) {
                out.push((p.dist2(target), p));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.into_iter().map(|(_, p)| p).collect()
}

/// Whether `rest` can still be packed bottom-left after `m` goes to `p`. Gives up on
/// the lookahead (answers true) once `checks` reaches [`MAX_LOOKAHEAD`].
fn leaves_room(netlist: &Netlist, m: usize, p: Point, rest: &[usize], obstacles: &[Rect], checks: &mut usize) -> bool {
    if rest.is_empty() || *checks >= MAX_LOOKAHEAD {
        return true;
    }
    *checks += 1;
    let node = netlist.node(m);
    let mut obs = obstacles.to_vec();
    obs.push(Rect::centered(p, node.width, node.height));
    for &r in rest {
        let node = netlist.node(r);
        let Some(q) = legal_candidates(netlist, r, Point::new(0.0, 0.0), &obs).first().copied() else {
            return false;
        };
        obs.push(Rect::centered(q, node.width, node.height));
    }
    true
}

fn random_legal(
    netlist: &Netlist,
    m: usize,
    rest: &[usize],
    obstacles: &[Rect],
    rng: &mut impl Rng,
) -> Result<Point> {
    let node = netlist.node(m);
    let canvas = netlist.canvas();
    let span = |size: f64, limit: f64, rng: &mut dyn rand::RngCore| {
        let (lo, hi) = (size / 2.0, limit - size / 2.0);
        if hi > lo {
            rng.gen_range(lo..=hi)
        } else {
            limit / 2.0
        }
    };
    let mut checks = 0;
    for _ in 0..MAX_ATTEMPTS {
        let p = Point::new(span(node.width, canvas.width, rng), span(node.height, canvas.height, rng));
        if is_legal(netlist, m, p, obstacles) && leaves_room(netlist, m, p, rest, obstacles, &mut checks) {
            return Ok(p);
        }
    }
    Err(Error::InitFailure {
        node: node.name.clone(),
        attempts: MAX_ATTEMPTS,
    })
}
