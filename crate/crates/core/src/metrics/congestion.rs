use crate::geom::Rect;
use crate::netlist::{Canvas, Netlist, Placement};

use super::{Bins, GridSpec, NetBBox};

/// Fraction of bins averaged by the congestion term (the most congested ones).
const TOP_FRACTION: f64 = 0.1;

/// Routing-demand estimate per bin.
///
/// Every net spreads its weight uniformly over its pin bounding box (clipped to the
/// canvas, and widened to at least one bin in each direction), so the demand summed
/// over all bins equals the summed weight of the nets.
#[derive(Debug, Clone)]
pub struct CongestionGrid {
    pub(crate) bins: Bins,
    canvas: Canvas,
    demand: Vec<f64>,
    total_weight: f64,
    scratch: Vec<f64>,
}

impl CongestionGrid {
    pub fn empty(canvas: Canvas, spec: &GridSpec) -> Self {
        let bins = Bins::new(canvas, spec);
        CongestionGrid {
            demand: vec![0.0; bins.count()],
            scratch: Vec::with_capacity(bins.count()),
            bins,
            canvas,
            total_weight: 0.0,
        }
    }

    pub fn build(netlist: &Netlist, placement: &Placement, spec: &GridSpec) -> Self {
        let mut grid = CongestionGrid::empty(netlist.canvas(), spec);
        for net in netlist.nets() {
            grid.add(&NetBBox::of_net(net, placement), net.weight, 1.0);
        }
        grid
    }

    /// Adds (`sign` = 1) or removes (`sign` = -1) the demand of one net. Boxes with
    /// fewer than two pins are ignored.
    pub fn add(&mut self, bbox: &NetBBox, weight: f64, sign: f64) {
        if bbox.pins < 2 || weight == 0.0 {
            return;
        }
        let region = self.spread_region(bbox);
        let area = region.area();
        let demand = &mut self.demand;
        self.bins
            .for_each_overlap(&region, |b, a| demand[b] += sign * weight * a / area);
        self.total_weight += sign * weight;
    }

    fn spread_region(&self, bbox: &NetBBox) -> Rect {
        let (lo_x, hi_x) = widen(bbox.min_x, bbox.max_x, self.bins.bin_w, self.canvas.width);
        let (lo_y, hi_y) = widen(bbox.min_y, bbox.max_y, self.bins.bin_h, self.canvas.height);
        Rect {
            x_lo: lo_x,
            y_lo: lo_y,
            x_hi: hi_x,
            y_hi: hi_y,
        }
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    /// Mean demand of the top 10% bins, relative to the canvas-average demand per bin.
    pub fn cost(&mut self) -> f64 {
        if self.total_weight <= 0.0 {
            return 0.0;
        }
        let n = self.demand.len();
        let k = ((n as f64 * TOP_FRACTION).ceil() as usize).clamp(1, n);
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.demand);
        self.scratch.select_nth_unstable_by(n - k, |a, b| a.total_cmp(b));
        let top: f64 = self.scratch[n - k..].iter().sum();
        let average = self.total_weight / n as f64;
        (top / k as f64) / average
    }
}

/// Clips `[lo, hi]` to `[0, limit]`, then widens it to at least `min_len`, shifting
/// back inside the canvas when the widened interval crosses an edge.
fn widen(lo: f64, hi: f64, min_len: f64, limit: f64) -> (f64, f64) {
    let lo = lo.clamp(0.0, limit);
    let hi = hi.clamp(0.0, limit);
    if hi - lo >= min_len {
        return (lo, hi);
    }
    let mid = (lo + hi) / 2.0;
    let mut a = mid - min_len / 2.0;
    let mut b = mid + min_len / 2.0;
    if a < 0.0 {
        b -= a;
        a = 0.0;
    }
    if b > limit {
        a -= b - limit;
        b = limit;
    }
    (a.max(0.0), b)
}

/// Congestion term of the proxy cost.
pub fn congestion_cost(netlist: &Netlist, placement: &Placement, grid: &GridSpec) -> f64 {
    CongestionGrid::build(netlist, placement, grid).cost()
}
