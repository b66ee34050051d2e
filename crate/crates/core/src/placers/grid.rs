use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::netlist::{Canvas, Netlist, Placement};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub rows: usize,
    pub cols: usize,
}

impl GridDims {
    pub fn new(rows: usize, cols: usize) -> Self {
        GridDims { rows, cols }
    }

    /// `ceil(sqrt(2 * movable macros))` per side, so there are at least twice as many
    /// cells as macros.
    pub fn default_for(netlist: &Netlist) -> Self {
        let m = netlist.movable_macros().len().max(1);
        let side = ((2 * m) as f64).sqrt().ceil() as usize;
        GridDims::new(side, side)
    }

    /// Runs `attempt` on square grids starting at [`GridDims::default_for`] and growing one
    /// cell per side while it fails with [`Error::GridTooSmall`]. Large macros cover
    /// several cells, so the default can be too coarse to hold them all.
    pub fn refine<T>(netlist: &Netlist, mut attempt: impl FnMut(GridDims) -> Result<T>) -> Result<(GridDims, T)> {
        let start = GridDims::default_for(netlist).rows;
        let limit = 4 * start + 16;
        let mut side = start;
        loop {
            let dims = GridDims::new(side, side);
            match attempt(dims) {
                Err(Error::GridTooSmall { .. }) if side < limit => side += 1,
                other => return other.map(|t| (dims, t)),
            }
        }
    }
}

/// Candidate macro locations: the centers of a `rows x cols` grid over the canvas.
///
/// A macro centered on a cell covers a *footprint*, the set of cells its rectangle
/// overlaps (open intervals). Footprints of different macros never share a cell,
/// which makes any assignment legal by construction.
#[derive(Debug, Clone)]
pub struct MacroGrid {
    dims: GridDims,
    canvas: Canvas,
    cell_w: f64,
    cell_h: f64,
    occupancy: Vec<Option<usize>>,
}

impl MacroGrid {
    pub fn new(canvas: Canvas, dims: GridDims) -> Result<Self> {
        if dims.rows == 0 || dims.cols == 0 {
            return Err(Error::Config(format!("grid must be at least 1x1, got {}x{}", dims.rows, dims.cols)));
        }
        Ok(MacroGrid {
            dims,
            canvas,
            cell_w: canvas.width / dims.cols as f64,
            cell_h: canvas.height / dims.rows as f64,
            occupancy: vec![None; dims.rows * dims.cols],
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.occupancy.len()
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.dims.cols, cell % self.dims.cols)
    }

    pub fn cell_at(&self, row: usize, col: usize) -> usize {
        row * self.dims.cols + col
    }

    pub fn cell_center(&self, cell: usize) -> Point {
        let (r, c) = self.row_col(cell);
        Point::new((c as f64 + 0.5) * self.cell_w, (r as f64 + 0.5) * self.cell_h)
    }

    pub fn nearest_cell(&self, p: Point) -> usize {
        let c = ((p.x / self.cell_w).floor().max(0.0) as usize).min(self.dims.cols - 1);
        let r = ((p.y / self.cell_h).floor().max(0.0) as usize).min(self.dims.rows - 1);
        self.cell_at(r, c)
    }

    /// True when `p` is (numerically) the center of some cell.
    pub fn is_cell_center(&self, p: Point) -> bool {
        let c = self.cell_center(self.nearest_cell(p));
        (c.x - p.x).abs() <= EPS * self.canvas.width.max(1.0) && (c.y - p.y).abs() <= EPS * self.canvas.height.max(1.0)
    }

    /// Cells overlapped by `rect` (open intervals).
    pub fn cells_overlapping(&self, rect: &Rect) -> Vec<usize> {
        let span = |lo: f64, hi: f64, size: f64, n: usize| {
            let a = ((lo / size + EPS).floor().max(0.0) as usize).min(n);
            let b = ((hi / size - EPS).ceil().max(0.0) as usize).min(n);
            a..b.max(a)
        };
        let cols = span(rect.x_lo, rect.x_hi, self.cell_w, self.dims.cols);
        let rows = span(rect.y_lo, rect.y_hi, self.cell_h, self.dims.rows);
        let mut out = Vec::with_capacity(cols.len() * rows.len());
        for r in rows {
            for c in cols.clone() {
                out.push(self.cell_at(r, c));
            }
        }
        // Zero-area macros still claim the cell they sit on.
        if out.is_empty() {
            out.push(self.nearest_cell(Point::new((rect.x_lo + rect.x_hi) / 2.0, (rect.y_lo + rect.y_hi) / 2.0)));
        }
        out
    }

    /// Footprint of a `width x height` macro centered on `cell`, or `None` when the
    /// rectangle would leave the canvas.
    pub fn footprint(&self, width: f64, height: f64, cell: usize) -> Option<Vec<usize>> {
        let rect = Rect::centered(self.cell_center(cell), width, height);
        if !rect.inside(self.canvas.width, self.canvas.height, EPS) {
            return None;
        }
        Some(self.cells_overlapping(&rect))
    }

    pub fn occupant(&self, cell: usize) -> Option<usize> {
        self.occupancy[cell]
    }

    pub fn is_free(&self, cells: &[usize]) -> bool {
        cells.iter().all(|&c| self.occupancy[c].is_none())
    }

    /// Free apart from cells held by nodes for which `ignore` returns true.
    pub fn is_free_ignoring(&self, cells: &[usize], ignore: impl Fn(usize) -> bool) -> bool {
        cells.iter().all(|&c| self.occupancy[c].is_none_or(&ignore))
    }

    pub fn occupy(&mut self, cells: &[usize], node: usize) {
        for &c in cells {
            self.occupancy[c] = Some(node);
        }
    }

    pub fn release(&mut self, cells: &[usize]) {
        for &c in cells {
            self.occupancy[c] = None;
        }
    }

    pub fn free_cells(&self) -> usize {
        self.occupancy.iter().filter(|o| o.is_none()).count()
    }

    /// Marks the cells covered by non-movable macros.
    pub(crate) fn block_fixed(&mut self, netlist: &Netlist, placement: &Placement) {
        for i in netlist.macros().filter(|&i| !netlist.node(i).movable) {
            let cells = self.cells_overlapping(&placement.rect(netlist, i));
            self.occupy(&cells, i);
        }
    }
}

/// Moves every movable macro to the nearest grid-cell center. Macros are processed in
/// id order; a macro whose nearest cell is taken goes to the closest free cell found
/// by breadth-first search over grid neighbors.
pub fn snap_to_grid(netlist: &Netlist, placement: &Placement, dims: GridDims) -> Result<(Placement, MacroGrid)> {
    let mut grid = MacroGrid::new(netlist.canvas(), dims)?;
    grid.block_fixed(netlist, placement);
    let macros = netlist.movable_macros();
    let free = grid.free_cells();
    if macros.len() > free {
        return Err(Error::GridTooSmall { macros: macros.len(), free });
    }
    let mut out = placement.clone();
    for &m in &macros {
        let node = netlist.node(m);
        let start = grid.nearest_cell(placement.pos(m));
        let (cell, cells) = bfs_free(&grid, start, |cell| {
            grid.footprint(node.width, node.height, cell).filter(|fp| grid.is_free(fp))
        })
        .ok_or(Error::GridTooSmall { macros: macros.len(), free })?;
        grid.occupy(&cells, m);
        out.set(m, grid.cell_center(cell));
    }
    Ok((out, grid))
}

/// Breadth-first search from `start` for the first cell accepted by `accept`.
pub(crate) fn bfs_free(
    grid: &MacroGrid,
    start: usize,
    accept: impl Fn(usize) -> Option<Vec<usize>>,
) -> Option<(usize, Vec<usize>)> {
    let GridDims { rows, cols } = grid.dims();
    let mut seen = vec![false; grid.num_cells()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(cell) = queue.pop_front() {
        if let Some(fp) = accept(cell) {
            return Some((cell, fp));
        }
        let (r, c) = grid.row_col(cell);
        let neighbors = [
            (r > 0).then(|| (r - 1, c)),
            (r + 1 < rows).then(|| (r + 1, c)),
            (c > 0).then(|| (r, c - 1)),
            (c + 1 < cols).then(|| (r, c + 1)),
        ];
        for (nr, nc) in neighbors.into_iter().flatten() {
            let n = grid.cell_at(nr, nc);
            if !seen[n] {
                seen[n] = true;
                queue.push_back(n);
            }
        }
    }
    None
}
