use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Orientation, Point, Rect};
use crate::netlist::{Netlist, Placement};

use super::{hpwl_subset, CongestionGrid, DensityGrid, GridSpec, HpwlCache, NetBBox};

/// Blend weights of the proxy cost. There is no canonical choice; these are always
/// explicit configuration and recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyWeights {
    pub wirelength: f64,
    pub density: f64,
    pub congestion: f64,
}

impl Default for ProxyWeights {
    fn default() -> Self {
        ProxyWeights {
            wirelength: 1.0,
            density: 0.5,
            congestion: 0.5,
        }
    }
}

impl ProxyWeights {
    pub fn new(wirelength: f64, density: f64, congestion: f64) -> Self {
        ProxyWeights {
            wirelength,
            density,
            congestion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if ok(self.wirelength) && ok(self.density) && ok(self.congestion) {
            Ok(())
        } else {
            Err(Error::Config(format!("proxy weights must be non-negative, got {self:?}")))
        }
    }
}

/// Decomposed proxy cost. `total` is the weighted sum of the three terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyCost {
    pub wirelength_term: f64,
    pub density_term: f64,
    pub congestion_term: f64,
    pub weights: ProxyWeights,
    pub grid: GridSpec,
    pub total: f64,
}

impl ProxyCost {
    pub fn from_terms(wirelength: f64, density: f64, congestion: f64, weights: ProxyWeights, grid: GridSpec) -> Self {
        ProxyCost {
            wirelength_term: wirelength,
            density_term: density,
            congestion_term: congestion,
            weights,
            grid,
            total: weights.wirelength * wirelength + weights.density * density + weights.congestion * congestion,
        }
    }
}

/// HPWL divided by `live nets x canvas half-perimeter`, so the term is roughly in [0, 1].
fn normalized_wirelength(netlist: &Netlist, hpwl: f64) -> f64 {
    let nets = netlist.live_net_count();
    if nets == 0 {
        0.0
    } else {
        hpwl / (nets as f64 * netlist.canvas().half_perimeter())
    }
}

pub fn proxy_cost(netlist: &Netlist, placement: &Placement, weights: ProxyWeights, grid: &GridSpec) -> ProxyCost {
    let wl = normalized_wirelength(netlist, hpwl_subset(netlist, placement, None));
    let density = DensityGrid::build(netlist, placement, grid).cost();
    let congestion = CongestionGrid::build(netlist, placement, grid).cost();
    ProxyCost::from_terms(wl, density, congestion, weights, *grid)
}

/// The objective an optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    /// Weighted HPWL in length units.
    Hpwl,
    /// Blended proxy cost.
    Proxy { weights: ProxyWeights, grid: GridSpec },
}

impl Default for CostKind {
    fn default() -> Self {
        CostKind::Proxy {
            weights: ProxyWeights::default(),
            grid: GridSpec::default(),
        }
    }
}

impl CostKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            CostKind::Hpwl => Ok(()),
            CostKind::Proxy { weights, grid } => {
                weights.validate()?;
                grid.validate()
            }
        }
    }

    pub fn evaluate(&self, netlist: &Netlist, placement: &Placement) -> f64 {
        self.evaluate_subset(netlist, placement, None)
    }

    /// Cost of a partial placement: only `active` nodes exist. Used by the
    /// constructive placer, which commits macros one at a time.
    pub fn evaluate_subset(&self, netlist: &Netlist, placement: &Placement, active: Option<&[bool]>) -> f64 {
        let hpwl = hpwl_subset(netlist, placement, active);
        match self {
            CostKind::Hpwl => hpwl,
            CostKind::Proxy { weights, grid } => {
                let wl = normalized_wirelength(netlist, hpwl);
                let density = DensityGrid::build_subset(netlist, placement, grid, active).cost();
                let mut congestion = CongestionGrid::empty(netlist.canvas(), grid);
                for net in netlist.nets() {
                    let pins = net
                        .pins
                        .iter()
                        .filter(|p| active.is_none_or(|a| a[p.node]))
                        .map(|p| placement.pin_position(p));
                    congestion.add(&NetBBox::from_points(pins), net.weight, 1.0);
                }
                ProxyCost::from_terms(wl, density, congestion.cost(), *weights, *grid).total
            }
        }
    }

    pub fn evaluator<'a>(&self, netlist: &'a Netlist, placement: &Placement) -> Evaluator<'a> {
        Evaluator::new(netlist, *self, placement)
    }
}

/// Incrementally maintained cost for one optimization worker.
///
/// Callers modify the placement first, then report the moved nodes (with their
/// previous state) through [`Evaluator::update`]. The latest update can be undone with
/// [`Evaluator::revert`].
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    netlist: &'a Netlist,
    kind: CostKind,
    hpwl: HpwlCache,
    density: Option<DensityGrid>,
    congestion: Option<CongestionGrid>,
    cost: f64,
    prev_cost: f64,
    undo_rects: Vec<(Rect, Rect)>,
    undo_nets: Vec<(NetBBox, NetBBox, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(netlist: &'a Netlist, kind: CostKind, placement: &Placement) -> Self {
        let (density, congestion) = match &kind {
            CostKind::Hpwl => (None, None),
            CostKind::Proxy { grid, .. } => (
                Some(DensityGrid::build(netlist, placement, grid)),
                Some(CongestionGrid::build(netlist, placement, grid)),
            ),
        };
        let mut ev = Evaluator {
            netlist,
            kind,
            hpwl: HpwlCache::new(netlist, placement),
            density,
            congestion,
            cost: 0.0,
            prev_cost: 0.0,
            undo_rects: Vec::new(),
            undo_nets: Vec::new(),
        };
        ev.cost = ev.current();
        ev.prev_cost = ev.cost;
        ev
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    fn current(&mut self) -> f64 {
        match self.kind {
            CostKind::Hpwl => self.hpwl.total(),
            CostKind::Proxy { weights, grid } => {
                let wl = normalized_wirelength(self.netlist, self.hpwl.total());
                let d = self.density.as_ref().map_or(0.0, DensityGrid::cost);
                let c = self.congestion.as_mut().map_or(0.0, CongestionGrid::cost);
                ProxyCost::from_terms(wl, d, c, weights, grid).total
            }
        }
    }

    /// Applies a change already made to `after`. `moved` lists each moved node with its
    /// previous center and orientation. Returns the new cost.
    pub fn update(&mut self, after: &Placement, moved: &[(usize, Point, Orientation)]) -> f64 {
        self.prev_cost = self.cost;
        self.undo_rects.clear();
        self.undo_nets.clear();
        let nodes: Vec<usize> = moved.iter().map(|m| m.0).collect();
        self.hpwl.update(self.netlist, after, &nodes);
        if let Some(density) = self.density.as_mut() {
            for &(node, old_pos, _) in moved {
                let n = self.netlist.node(node);
                let old = Rect::centered(old_pos, n.width, n.height);
                let new = after.rect(self.netlist, node);
                if old != new {
                    density.add(&old, -1.0);
                    density.add(&new, 1.0);
                    self.undo_rects.push((old, new));
                }
            }
        }
        if let Some(congestion) = self.congestion.as_mut() {
            for &(ni, old) in self.hpwl.last_changes() {
                let new = *self.hpwl.bbox(ni);
                let w = self.netlist.net(ni).weight;
                congestion.add(&old, w, -1.0);
                congestion.add(&new, w, 1.0);
                self.undo_nets.push((old, new, w));
            }
        }
        self.cost = self.current();
        self.cost
    }

    /// Undoes the most recent [`Evaluator::update`]; the caller restores the placement.
    pub fn revert(&mut self) {
        self.hpwl.revert();
        if let Some(density) = self.density.as_mut() {
            for (old, new) in self.undo_rects.drain(..).rev() {
                density.add(&new, -1.0);
                density.add(&old, 1.0);
            }
        }
        if let Some(congestion) = self.congestion.as_mut() {
            for (old, new, w) in self.undo_nets.drain(..).rev() {
                congestion.add(&new, w, -1.0);
                congestion.add(&old, w, 1.0);
            }
        }
        self.cost = self.prev_cost;
    }

    /// Discards accumulated floating-point drift by rebuilding from `placement`.
    pub fn resync(&mut self, placement: &Placement) {
        *self = Evaluator::new(self.netlist, self.kind, placement);
    }
}
