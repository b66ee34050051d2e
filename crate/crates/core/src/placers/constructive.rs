use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::CostKind;
use crate::netlist::{Netlist, Placement};

use super::{GridDims, MacroGrid};

const MAX_LOOKAHEAD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// Largest area first, ties by node id.
    #[default]
    AreaDescending,
    Index,
}

/// Greedy gridded placement: macros are committed one at a time, each to the free
/// cell that minimizes the cost of the partial placement (nodes not yet committed are
/// ignored). Ties go to the first cell in row-major order. A cell is skipped when the
/// remaining macros would no longer fit first-fit; only the cheapest cells are checked.
pub fn place_constructive(
    netlist: &Netlist,
    base: &Placement,
    dims: GridDims,
    order: OrderPolicy,
    cost: &CostKind,
) -> Result<Placement> {
    base.check_covers(netlist)?;
    cost.validate()?;
    let mut grid = MacroGrid::new(netlist.canvas(), dims)?;
    grid.block_fixed(netlist, base);
    let mut macros = netlist.movable_macros();
    if macros.len() > grid.free_cells() {
        return Err(Error::GridTooSmall {
            macros: macros.len(),
            free: grid.free_cells(),
        });
    }
    if order == OrderPolicy::AreaDescending {
        macros.sort_by(|&a, &b| netlist.node(b).area().total_cmp(&netlist.node(a).area()).then(a.cmp(&b)));
    }

    let mut active: Vec<bool> = netlist.nodes().iter().map(|n| !n.is_macro() || !n.movable).collect();
    let mut pl = base.clone();
    for (k, &m) in macros.iter().enumerate() {
        let node = netlist.node(m);
        active[m] = true;
        let mut candidates: Vec<(f64, usize, Vec<usize>)> = Vec::new();
        for cell in 0..grid.num_cells() {
            let Some(fp) = grid.footprint(node.width, node.height, cell).filter(|fp| grid.is_free(fp)) else {
                continue;
            };
            pl.set(m, grid.cell_center(cell));
            candidates.push((cost.evaluate_subset(netlist, &pl, Some(&active)), cell, fp));
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let rest = &macros[k + 1..];
        let pick = candidates
            .iter()
            .take(MAX_LOOKAHEAD)
            .position(|(_, _, fp)| leaves_room(netlist, &grid, fp, rest))
            .unwrap_or(0);
        let Some((_, cell, fp)) = candidates.into_iter().nth(pick) else {
            return Err(Error::GridTooSmall {
                macros: macros.len(),
                free: grid.free_cells(),
            });
        };
        grid.occupy(&fp, m);
        pl.set(m, grid.cell_center(cell));
        log::trace!("constructive: {} -> cell {cell}", node.name);
    }
    Ok(pl)
}

/// Whether `rest` still fits, first-fit in row-major order, once `fp` is taken.
fn leaves_room(netlist: &Netlist, grid: &MacroGrid, fp: &[usize], rest: &[usize]) -> bool {
    if rest.is_empty() {
        return true;
    }
    let mut g = grid.clone();
    g.occupy(fp, usize::MAX);
    rest.iter().all(|&r| {
        let node = netlist.node(r);
        let found = (0..g.num_cells()).find_map(|c| g.footprint(node.width, node.height, c).filter(|f| g.is_free(f)));
        found.map(|f| g.occupy(&f, r)).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::netlist::{gen_synthetic, Canvas, Net, Node, NodeKind, Pin, SyntheticSpec};
    use crate::placers::check_legal;

    #[test]
    fn legal_and_on_grid() {
        let (nl, pl) = gen_synthetic(&SyntheticSpec { n_pads: 4, seed: 2, ..Default::default() }).unwrap();
        let (dims, out) = GridDims::refine(&nl, |d| {
            place_constructive(&nl, &pl, d, OrderPolicy::AreaDescending, &CostKind::default())
        })
        .unwrap();
        let grid = MacroGrid::new(nl.canvas(), dims).unwrap();
        assert!(check_legal(&nl, &out, Some(&grid)).is_empty());
    }

    #[test]
    fn macro_goes_next_to_its_pad() {
        let nodes = vec![
            Node::new("m", 1.0, 1.0, NodeKind::Macro),
            Node::new("p", 0.0, 0.0, NodeKind::FixedPad),
        ];
        let nets = vec![Net::new("n", vec![Pin::centered(0), Pin::centered(1)])];
        let nl = Netlist::new(Canvas::new(3.0, 3.0).unwrap(), nodes, nets).unwrap();
        let mut pl = Placement::centered(&nl);
        pl.set(1, Point::new(3.0, 3.0));
        let out = place_constructive(&nl, &pl, GridDims::new(3, 3), OrderPolicy::Index, &CostKind::Hpwl).unwrap();
        assert_eq!(out.pos(0), Point::new(2.5, 2.5));
    }

    #[test]
    fn first_macro_leaves_room() {
        let spec = SyntheticSpec { n_macros: 2, n_cells: 24, n_nets: 26, n_pads: 4, seed: 3402, ..Default::default() };
        let (nl, pl) = gen_synthetic(&spec).unwrap();
        let (dims, out) =
            GridDims::refine(&nl, |d| place_constructive(&nl, &pl, d, OrderPolicy::AreaDescending, &CostKind::Hpwl))
                .unwrap();
        let grid = MacroGrid::new(nl.canvas(), dims).unwrap();
        assert!(check_legal(&nl, &out, Some(&grid)).is_empty());
    }

    #[test]
    fn too_few_cells() {
        let (nl, pl) = gen_synthetic(&SyntheticSpec::default()).unwrap();
        assert!(matches!(
            place_constructive(&nl, &pl, GridDims::new(2, 2), OrderPolicy::Index, &CostKind::Hpwl),
            Err(Error::GridTooSmall { .. })
        ));
    }
}
