use crate::error::{Error, Result};
use crate::geom::{Orientation, Point};
use crate::netlist::{Net, Netlist, Placement};

/// Half-perimeter of the bounding box of `points`; 0 for zero or one point.
pub fn hpwl_net(points: &[Point]) -> f64 {
    NetBBox::from_points(points.iter().copied()).hpwl()
}

/// Weighted HPWL summed over every net with at least two pins.
pub fn hpwl_total(netlist: &Netlist, placement: &Placement) -> f64 {
    hpwl_subset(netlist, placement, None)
}

/// HPWL restricted to the pins of `active` nodes; nets with fewer than two active
/// pins contribute nothing.
pub(crate) fn hpwl_subset(netlist: &Netlist, placement: &Placement, active: Option<&[bool]>) -> f64 {
    netlist
        .nets()
        .iter()
        .map(|net| {
            let pins = net
                .pins
                .iter()
                .filter(|p| active.is_none_or(|a| a[p.node]))
                .map(|p| placement.pin_position(p));
            net.weight * NetBBox::from_points(pins).hpwl()
        })
        .sum()
}

/// Bounding box of a net's pin locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetBBox {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
    pub pins: usize,
}

impl NetBBox {
    pub const EMPTY: NetBBox = NetBBox {
        min_x: f64::INFINITY,
        max_x: f64::NEG_INFINITY,
        min_y: f64::INFINITY,
        max_y: f64::NEG_INFINITY,
        pins: 0,
    };

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        let mut b = NetBBox::EMPTY;
        for p in points {
            b.min_x = b.min_x.min(p.x);
            b.max_x = b.max_x.max(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_y = b.max_y.max(p.y);
            b.pins += 1;
        }
        b
    }

    pub fn of_net(net: &Net, placement: &Placement) -> Self {
        NetBBox::from_points(net.pins.iter().map(|p| placement.pin_position(p)))
    }

    fn of_net_with(net: &Net, lookup: impl Fn(usize) -> (Point, Orientation)) -> Self {
        NetBBox::from_points(net.pins.iter().map(|p| {
            let (c, o) = lookup(p.node);
            let (dx, dy) = o.apply(p.dx, p.dy);
            Point::new(c.x + dx, c.y + dy)
        }))
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn hpwl(&self) -> f64 {
        if self.pins < 2 {
            0.0
        } else {
            self.width() + self.height()
        }
    }
}

/// Relocation of one node, described by its state before and after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMove {
    pub node: usize,
    pub from: (Point, Orientation),
    pub to: (Point, Orientation),
}

/// Per-net bounding boxes plus their weighted total, updated incrementally.
///
/// The cache is owned by a single optimization worker. Each update records what it
/// overwrote so the most recent update can be reverted exactly.
#[derive(Debug, Clone)]
pub struct HpwlCache {
    boxes: Vec<NetBBox>,
    total: f64,
    undo: Vec<(usize, NetBBox)>,
    undo_total: f64,
    stamp: Vec<u32>,
    generation: u32,
}

impl HpwlCache {
    pub fn new(netlist: &Netlist, placement: &Placement) -> Self {
        let boxes: Vec<NetBBox> = netlist
            .nets()
            .iter()
            .map(|n| NetBBox::of_net(n, placement))
            .collect();
        let total = netlist
            .nets()
            .iter()
            .zip(&boxes)
            .map(|(n, b)| n.weight * b.hpwl())
            .sum();
        HpwlCache {
            stamp: vec![0; boxes.len()],
            boxes,
            total,
            undo: Vec::new(),
            undo_total: total,
            generation: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn bbox(&self, net: usize) -> &NetBBox {
        &self.boxes[net]
    }

    /// Boxes overwritten by the most recent update, as `(net, old box)`.
    pub fn last_changes(&self) -> &[(usize, NetBBox)] {
        &self.undo
    }

    /// Incremental HPWL change for `moves` applied to a placement the cache is
    /// consistent with. Only nets incident to moved nodes are recomputed; the cache is
    /// left describing the post-move placement (the caller applies the move itself).
    ///
    /// In debug builds the cache and the move origins are checked against `before`,
    /// returning [`Error::StaleCache`] on mismatch.
    pub fn hpwl_delta(&mut self, netlist: &Netlist, before: &Placement, moves: &[NodeMove]) -> Result<f64> {
        if cfg!(debug_assertions) {
            self.audit(netlist, before, moves)?;
        }
        let lookup = |node: usize| {
            moves
                .iter()
                .rev()
                .find(|m| m.node == node)
                .map(|m| m.to)
                .unwrap_or((before.pos(node), before.orient(node)))
        };
        let nodes: Vec<usize> = moves.iter().map(|m| m.node).collect();
        Ok(self.recompute(netlist, &nodes, |net| NetBBox::of_net_with(net, lookup)))
    }

    /// Recomputes the nets incident to `moved` from an already-updated placement and
    /// returns the change in total HPWL.
    pub fn update(&mut self, netlist: &Netlist, after: &Placement, moved: &[usize]) -> f64 {
        self.recompute(netlist, moved, |net| NetBBox::of_net(net, after))
    }

    fn recompute(&mut self, netlist: &Netlist, moved: &[usize], bbox: impl Fn(&Net) -> NetBBox) -> f64 {
        self.undo.clear();
        self.undo_total = self.total;
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let mut delta = 0.0;
        for &node in moved {
            for &ni in netlist.nets_of(node) {
                if self.stamp[ni] == self.generation {
                    continue;
                }
                self.stamp[ni] = self.generation;
                let net = netlist.net(ni);
                let new = bbox(net);
                let old = std::mem::replace(&mut self.boxes[ni], new);
                delta += net.weight * (new.hpwl() - old.hpwl());
                self.undo.push((ni, old));
            }
        }
        self.total += delta;
        delta
    }

    /// Restores the state before the most recent update. Idempotent.
    pub fn revert(&mut self) {
        for (ni, old) in self.undo.drain(..) {
            self.boxes[ni] = old;
        }
        self.total = self.undo_total;
    }

    fn audit(&self, netlist: &Netlist, before: &Placement, moves: &[NodeMove]) -> Result<()> {
        for m in moves {
            if (before.pos(m.node), before.orient(m.node)) != m.from {
                return Err(Error::StaleCache(format!(
                    "move origin of node {} does not match the placement",
                    m.node
                )));
            }
            for &ni in netlist.nets_of(m.node) {
                let fresh = NetBBox::of_net(netlist.net(ni), before);
                if fresh != self.boxes[ni] {
                    return Err(Error::StaleCache(format!("bounding box of net {ni} is out of date")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{gen_synthetic, test_util, SyntheticSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points() {
        assert_eq!(hpwl_net(&[Point::new(0.0, 0.0), Point::new(3.0, 4.0)]), 7.0);
    }

    #[test]
    fn three_points() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 5.0), Point::new(4.0, 2.0)];
        assert_eq!(hpwl_net(&pts), 9.0);
        let shifted: Vec<Point> = pts.iter().map(|p| Point::new(p.x + 10.0, p.y + 10.0)).collect();
        assert_eq!(hpwl_net(&shifted), 9.0);
    }

    #[test]
    fn single_point_and_empty() {
        assert_eq!(hpwl_net(&[Point::new(3.0, 3.0)]), 0.0);
        assert_eq!(hpwl_net(&[]), 0.0);
    }

    #[test]
    fn no_nets_is_zero() {
        let (nl, pl) = test_util::tiny();
        let empty = crate::Netlist::new(nl.canvas(), nl.nodes().to_vec(), vec![]).unwrap();
        assert_eq!(hpwl_total(&empty, &pl), 0.0);
    }

    #[test]
    fn isolated_node_move_is_free() {
        let nodes = vec![
            crate::Node::new("a", 1.0, 1.0, crate::NodeKind::StdCell),
            crate::Node::new("b", 1.0, 1.0, crate::NodeKind::StdCell),
            crate::Node::new("lonely", 1.0, 1.0, crate::NodeKind::StdCell),
        ];
        let nets = vec![crate::Net::new("n", vec![crate::Pin::centered(0), crate::Pin::centered(1)])];
        let nl = crate::Netlist::new(crate::Canvas::new(10.0, 10.0).unwrap(), nodes, nets).unwrap();
        let pl = crate::Placement::centered(&nl);
        let mut cache = HpwlCache::new(&nl, &pl);
        let before = cache.bbox(0).to_owned();
        let mv = NodeMove {
            node: 2,
            from: (pl.pos(2), pl.orient(2)),
            to: (Point::new(1.0, 1.0), Orientation::N),
        };
        assert_eq!(cache.hpwl_delta(&nl, &pl, &[mv]).unwrap(), 0.0);
        assert_eq!(*cache.bbox(0), before);
    }

    #[test]
    fn delta_matches_full_recompute() {
        let (nl, mut pl) = gen_synthetic(&SyntheticSpec { n_pads: 4, seed: 5, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cache = HpwlCache::new(&nl, &pl);
        for _ in 0..200 {
            let node = rng.gen_range(0..nl.num_nodes());
            let to = (
                Point::new(rng.gen_range(0.0..nl.canvas().width), rng.gen_range(0.0..nl.canvas().height)),
                Orientation::ALL[rng.gen_range(0..4)],
            );
            let mv = NodeMove { node, from: (pl.pos(node), pl.orient(node)), to };
            let before = hpwl_total(&nl, &pl);
            let delta = cache.hpwl_delta(&nl, &pl, &[mv]).unwrap();
            pl.positions[node] = to.0;
            pl.orients[node] = to.1;
            let after = hpwl_total(&nl, &pl);
            assert!((before + delta - after).abs() < 1e-9 * after.max(1.0));
        }
    }

    #[test]
    fn revert_restores_exactly() {
        let (nl, mut pl) = test_util::tiny();
        let mut cache = HpwlCache::new(&nl, &pl);
        let total = cache.total();
        let old = pl.pos(0);
        pl.set(0, Point::new(8.0, 8.0));
        let d = cache.update(&nl, &pl, &[0]);
        assert!(d != 0.0);
        cache.revert();
        pl.set(0, old);
        assert_eq!(cache.total(), total);
        assert_eq!(*cache.bbox(0), NetBBox::of_net(nl.net(0), &pl));
    }

    #[test]
    #[cfg(debug_assertions)]
    fn stale_cache_is_detected() {
        let (nl, mut pl) = test_util::tiny();
        let mut cache = HpwlCache::new(&nl, &pl);
        pl.set(1, Point::new(5.0, 5.0)); // moved behind the cache's back
        let mv = NodeMove {
            node: 1,
            from: (pl.pos(1), pl.orient(1)),
            to: (Point::new(6.0, 6.0), Orientation::N),
        };
        assert!(matches!(cache.hpwl_delta(&nl, &pl, &[mv]), Err(Error::StaleCache(_))));
    }
}
