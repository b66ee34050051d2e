use serde::Serialize;

use crate::geom::Rect;
use crate::netlist::{Netlist, Placement};

use super::MacroGrid;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LegalityViolation {
    /// Two macro rectangles intersect (touching edges are legal). `a < b`.
    Overlap { a: usize, b: usize },
    OutOfCanvas { node: usize },
    /// A movable macro is not centered on a grid cell (gridded mode only).
    OffGrid { node: usize },
    Unplaced { node: usize },
}

/// Lists macro overlaps and out-of-canvas macros; with a grid, also movable macros
/// that are not at a cell center. Standard cells and pads are exempt.
pub fn check_legal(netlist: &Netlist, placement: &Placement, grid: Option<&MacroGrid>) -> Vec<LegalityViolation> {
    let canvas = netlist.canvas();
    let mut out = Vec::new();
    let mut rects: Vec<(usize, Rect)> = Vec::new();
    for m in netlist.macros() {
        if placement.get(m).is_none() {
            out.push(LegalityViolation::Unplaced { node: m });
            continue;
        }
        let r = placement.rect(netlist, m);
        if !r.inside(canvas.width, canvas.height, EPS) {
            out.push(LegalityViolation::OutOfCanvas { node: m });
        }
        if let Some(g) = grid {
            if netlist.node(m).movable && !g.is_cell_center(placement.pos(m)) {
                out.push(LegalityViolation::OffGrid { node: m });
            }
        }
        rects.push((m, r));
    }

    // Sweep over left edges; `active` holds rectangles whose right edge is still ahead.
    rects.sort_by(|a, b| a.1.x_lo.total_cmp(&b.1.x_lo).then(a.0.cmp(&b.0)));
    let mut overlaps = Vec::new();
    let mut active: Vec<(usize, Rect)> = Vec::new();
    for &(id, r) in &rects {
        active.retain(|(_, o)| o.x_hi - EPS > r.x_lo);
        for &(other, o) in &active {
            if r.overlaps(&o, EPS) {
                overlaps.push((id.min(other), id.max(other)));
            }
        }
        active.push((id, r));
    }
    overlaps.sort_unstable();
    out.extend(overlaps.into_iter().map(|(a, b)| LegalityViolation::Overlap { a, b }));
    out
}
