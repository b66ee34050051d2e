use crate::geom::Rect;
use crate::netlist::{Canvas, Netlist, Placement};

use super::{clip, Bins, GridSpec};

/// Area occupied per bin by node rectangles clipped to the canvas.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub(crate) bins: Bins,
    canvas: Canvas,
    target: f64,
    occupancy: Vec<f64>,
}

impl DensityGrid {
    pub fn empty(canvas: Canvas, spec: &GridSpec) -> Self {
        let bins = Bins::new(canvas, spec);
        DensityGrid {
            occupancy: vec![0.0; bins.count()],
            bins,
            canvas,
            target: spec.target_density,
        }
    }

    pub fn build(netlist: &Netlist, placement: &Placement, spec: &GridSpec) -> Self {
        Self::build_subset(netlist, placement, spec, None)
    }

    pub(crate) fn build_subset(
        netlist: &Netlist,
        placement: &Placement,
        spec: &GridSpec,
        active: Option<&[bool]>,
    ) -> Self {
        let mut grid = DensityGrid::empty(netlist.canvas(), spec);
        for i in 0..netlist.num_nodes() {
            if active.is_none_or(|a| a[i]) {
                grid.add(&placement.rect(netlist, i), 1.0);
            }
        }
        grid
    }

    /// Adds (`sign` = 1) or removes (`sign` = -1) a node rectangle.
    pub fn add(&mut self, rect: &Rect, sign: f64) {
        let r = clip(rect, self.canvas);
        let occ = &mut self.occupancy;
        self.bins.for_each_overlap(&r, |b, a| occ[b] += sign * a);
    }

    pub fn occupancy(&self) -> &[f64] {
        &self.occupancy
    }

    /// Mean over bins of overflow above the target, in units of bin area.
    pub fn cost(&self) -> f64 {
        let bin_area = self.bins.bin_area();
        let cap = self.target * bin_area;
        let overflow: f64 = self.occupancy.iter().map(|&o| (o - cap).max(0.0)).sum();
        overflow / bin_area / self.bins.count() as f64
    }
}

/// Density overflow term of the proxy cost.
pub fn density_cost(netlist: &Netlist, placement: &Placement, grid: &GridSpec) -> f64 {
    DensityGrid::build(netlist, placement, grid).cost()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::netlist::{gen_synthetic, Node, NodeKind, SyntheticSpec};

    fn netlist(nodes: Vec<Node>, side: f64) -> Netlist {
        Netlist::new(Canvas::new(side, side).unwrap(), nodes, vec![]).unwrap()
    }

    #[test]
    fn no_nodes_no_cost() {
        let nl = netlist(vec![], 4.0);
        assert_eq!(density_cost(&nl, &Placement::centered(&nl), &GridSpec::new(4, 4)), 0.0);
    }

    #[test]
    fn node_filling_one_bin_at_full_target_is_free() {
        let nl = netlist(vec![Node::new("a", 1.0, 1.0, NodeKind::Macro)], 4.0);
        let pl = Placement::filled(1, Point::new(0.5, 0.5));
        let spec = GridSpec { nx: 4, ny: 4, target_density: 1.0 };
        assert_eq!(density_cost(&nl, &pl, &spec), 0.0);
    }

    #[test]
    fn stacked_unit_nodes_overflow() {
        // Two unit squares on the same unit bin with target 0.5: occupancy 2, cap 0.5.
        let nodes = vec![
            Node::new("a", 1.0, 1.0, NodeKind::StdCell),
            Node::new("b", 1.0, 1.0, NodeKind::StdCell),
        ];
        let nl = netlist(nodes, 4.0);
        let pl = Placement::filled(2, Point::new(0.5, 0.5));
        let spec = GridSpec { nx: 4, ny: 4, target_density: 0.5 };
        let grid = DensityGrid::build(&nl, &pl, &spec);
        assert_eq!(grid.occupancy()[0], 2.0);
        assert!((grid.cost() - 1.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn occupancy_conserves_clipped_area() {
        let (nl, mut pl) = gen_synthetic(&SyntheticSpec { seed: 2, ..Default::default() }).unwrap();
        // Push one node half outside the canvas.
        pl.set(0, Point::new(0.0, 0.0));
        let grid = DensityGrid::build(&nl, &pl, &GridSpec::default());
        let total: f64 = grid.occupancy().iter().sum();
        let expected: f64 = (0..nl.num_nodes())
            .map(|i| clip(&pl.rect(&nl, i), nl.canvas()).area())
            .sum();
        assert!((total - expected).abs() <= 1e-6 * expected);
    }
}
