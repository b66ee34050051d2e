//! Macro perturbations shared by the annealer and its temperature probe.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::geom::{Orientation, Point, Rect};
use crate::netlist::{Netlist, Placement};

use super::{GridDims, MacroGrid};

const EPS: f64 = 1e-9;
/// Continuous shift length as a fraction of the canvas dimension.
const SHIFT_FRACTION: f64 = 0.02;
const MAX_SHUFFLE: usize = 4;
const RELOCATE_TRIES: usize = 8;
const NO_CELL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Action {
    Swap,
    Shift,
    Mirror,
    Move,
    Shuffle,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Change {
    pub node: usize,
    pub old: (Point, Orientation),
    pub new: (Point, Orientation),
    old_cell: usize,
    new_cell: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Proposal {
    pub changes: Vec<Change>,
}

impl Proposal {
    /// Previous state of each moved node, in the form the evaluator expects.
    pub fn moved(&self) -> Vec<(usize, Point, Orientation)> {
        self.changes.iter().map(|c| (c.node, c.old.0, c.old.1)).collect()
    }
}

struct GridState {
    grid: MacroGrid,
    cell_of: Vec<usize>,
    footprint: Vec<Vec<usize>>,
}

/// Legal macro positions, either continuous or restricted to grid-cell centers.
pub(crate) struct MoveSpace<'a> {
    netlist: &'a Netlist,
    movable: Vec<usize>,
    macros: Vec<usize>,
    is_moving: Vec<bool>,
    grid: Option<GridState>,
}

impl<'a> MoveSpace<'a> {
    pub fn continuous(netlist: &'a Netlist) -> Self {
        MoveSpace {
            netlist,
            movable: netlist.movable_macros(),
            macros: netlist.macros().collect(),
            is_moving: vec![false; netlist.num_nodes()],
            grid: None,
        }
    }

    /// `placement` must already be snapped to `dims`.
    pub fn gridded(netlist: &'a Netlist, placement: &Placement, dims: GridDims) -> Result<Self> {
        let mut grid = MacroGrid::new(netlist.canvas(), dims)?;
        grid.block_fixed(netlist, placement);
        let mut cell_of = vec![NO_CELL; netlist.num_nodes()];
        let mut footprint = vec![Vec::new(); netlist.num_nodes()];
        let movable = netlist.movable_macros();
        for &m in &movable {
            let n = netlist.node(m);
            let cell = grid.nearest_cell(placement.pos(m));
            let fp = grid.footprint(n.width, n.height, cell).unwrap_or_default();
            grid.occupy(&fp, m);
            cell_of[m] = cell;
            footprint[m] = fp;
        }
        let mut space = MoveSpace::continuous(netlist);
        space.grid = Some(GridState {
            grid,
            cell_of,
            footprint,
        });
        Ok(space)
    }

    pub fn movable(&self) -> &[usize] {
        &self.movable
    }

    pub fn propose(&mut self, action: Action, placement: &Placement, rng: &mut impl Rng) -> Option<Proposal> {
        let m = self.movable.len();
        if m == 0 {
            return None;
        }
        let mut changes: Vec<Change> = match action {
            Action::Swap => {
                if m < 2 {
                    return None;
                }
                let pick = sample(rng, m, 2);
                let (a, b) = (self.movable[pick.index(0)], self.movable[pick.index(1)]);
                vec![
                    self.relocate(placement, a, placement.pos(b), self.cell(b)),
                    self.relocate(placement, b, placement.pos(a), self.cell(a)),
                ]
            }
            Action::Shift => {
                let a = self.movable[rng.gen_range(0..m)];
                vec![self.shift(placement, a, rng)?]
            }
            Action::Mirror => {
                let a = self.movable[rng.gen_range(0..m)];
                let o = placement.orient(a);
                let flipped = if rng.gen_bool(0.5) { o.flip_x() } else { o.flip_y() };
                let mut c = self.relocate(placement, a, placement.pos(a), self.cell(a));
                c.new.1 = flipped;
                return Some(Proposal { changes: vec![c] });
            }
            Action::Move => {
                let a = self.movable[rng.gen_range(0..m)];
                for _ in 0..RELOCATE_TRIES {
                    let c = self.random_location(placement, a, rng);
                    let p = Proposal { changes: vec![c] };
                    if self.is_legal(&p, placement) {
                        return Some(p);
                    }
                }
                return None;
            }
            Action::Shuffle => {
                if m < 2 {
                    return None;
                }
                let k = m.min(MAX_SHUFFLE);
                let nodes: Vec<usize> = sample(rng, m, k).into_iter().map(|i| self.movable[i]).collect();
                let mut targets = nodes.clone();
                targets.shuffle(rng);
                nodes
                    .iter()
                    .zip(&targets)
                    .map(|(&n, &t)| self.relocate(placement, n, placement.pos(t), self.cell(t)))
                    .collect()
            }
        };
        changes.retain(|c| c.old != c.new);
        if changes.is_empty() {
            return None;
        }
        let p = Proposal { changes };
        self.is_legal(&p, placement).then_some(p)
    }

    fn cell(&self, node: usize) -> usize {
        self.grid.as_ref().map_or(NO_CELL, |g| g.cell_of[node])
    }

    fn relocate(&self, placement: &Placement, node: usize, to: Point, to_cell: usize) -> Change {
        Change {
            node,
            old: (placement.pos(node), placement.orient(node)),
            new: (to, placement.orient(node)),
            old_cell: self.cell(node),
            new_cell: to_cell,
        }
    }

    fn shift(&self, placement: &Placement, node: usize, rng: &mut impl Rng) -> Option<Change> {
        match &self.grid {
            Some(g) => {
                let (r, c) = g.grid.row_col(g.cell_of[node]);
                let GridDims { rows, cols } = g.grid.dims();
                let (nr, nc) = match rng.gen_range(0..4) {
                    0 if r > 0 => (r - 1, c),
                    1 if r + 1 < rows => (r + 1, c),
                    2 if c > 0 => (r, c - 1),
                    3 if c + 1 < cols => (r, c + 1),
                    _ => return None,
                };
                let cell = g.grid.cell_at(nr, nc);
                Some(self.relocate(placement, node, g.grid.cell_center(cell), cell))
            }
            None => {
                let canvas = self.netlist.canvas();
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let p = placement.pos(node);
                let to = Point::new(
                    p.x + SHIFT_FRACTION * canvas.width * theta.cos(),
                    p.y + SHIFT_FRACTION * canvas.height * theta.sin(),
                );
                Some(self.relocate(placement, node, to, NO_CELL))
            }
        }
    }

    fn random_location(&self, placement: &Placement, node: usize, rng: &mut impl Rng) -> Change {
        match &self.grid {
            Some(g) => {
                let cell = rng.gen_range(0..g.grid.num_cells());
                self.relocate(placement, node, g.grid.cell_center(cell), cell)
            }
            None => {
                let canvas = self.netlist.canvas();
                let n = self.netlist.node(node);
                let x = uniform(rng, n.width / 2.0, canvas.width - n.width / 2.0);
                let y = uniform(rng, n.height / 2.0, canvas.height - n.height / 2.0);
                self.relocate(placement, node, Point::new(x, y), NO_CELL)
            }
        }
    }

    fn is_legal(&mut self, p: &Proposal, placement: &Placement) -> bool {
        for c in &p.changes {
            self.is_moving[c.node] = true;
        }
        let ok = match &self.grid {
            Some(g) => self.grid_legal(g, p),
            None => self.continuous_legal(p, placement),
        };
        for c in &p.changes {
            self.is_moving[c.node] = false;
        }
        ok
    }

    fn continuous_legal(&self, p: &Proposal, placement: &Placement) -> bool {
        let canvas = self.netlist.canvas();
        let rects: Vec<Rect> = p
            .changes
            .iter()
            .map(|c| {
                let n = self.netlist.node(c.node);
                Rect::centered(c.new.0, n.width, n.height)
            })
            .collect();
        if rects.iter().any(|r| !r.inside(canvas.width, canvas.height, EPS)) {
            return false;
        }
        for (k, r) in rects.iter().enumerate() {
            if rects[k + 1..].iter().any(|o| r.overlaps(o, EPS)) {
                return false;
            }
        }
        // Only moved macros can create new overlaps.
        let moved_only: Vec<(usize, &Rect)> = p
            .changes
            .iter()
            .zip(&rects)
            .filter(|(c, _)| c.new.0 != c.old.0)
            .map(|(c, r)| (c.node, r))
            .collect();
        if moved_only.is_empty() {
            return true;
        }
        self.macros.iter().all(|&m| {
            self.is_moving[m] || {
                let other = placement.rect(self.netlist, m);
                moved_only.iter().all(|(_, r)| !r.overlaps(&other, EPS))
            }
        })
    }

    fn grid_legal(&self, g: &GridState, p: &Proposal) -> bool {
        let mut claimed: Vec<usize> = Vec::new();
        for c in &p.changes {
            if c.new_cell == c.old_cell {
                continue;
            }
            let n = self.netlist.node(c.node);
            let Some(fp) = g.grid.footprint(n.width, n.height, c.new_cell) else {
                return false;
            };
            if !g.grid.is_free_ignoring(&fp, |o| self.is_moving[o]) {
                return false;
            }
            if fp.iter().any(|cell| claimed.contains(cell)) {
                return false;
            }
            claimed.extend(fp);
        }
        // Unmoved members of the proposal keep their footprints.
        for c in p.changes.iter().filter(|c| c.new_cell == c.old_cell) {
            if g.footprint[c.node].iter().any(|cell| claimed.contains(cell)) {
                return false;
            }
        }
        true
    }

    pub fn apply(&mut self, placement: &mut Placement, p: &Proposal) {
        self.set(placement, p, |c| (c.new, c.old_cell, c.new_cell));
    }

    pub fn undo(&mut self, placement: &mut Placement, p: &Proposal) {
        self.set(placement, p, |c| (c.old, c.new_cell, c.old_cell));
    }

    fn set(
        &mut self,
        placement: &mut Placement,
        p: &Proposal,
        pick: impl Fn(&Change) -> ((Point, Orientation), usize, usize),
    ) {
        for c in &p.changes {
            let ((pos, orient), _, _) = pick(c);
            placement.positions[c.node] = pos;
            placement.orients[c.node] = orient;
        }
        if let Some(g) = self.grid.as_mut() {
            for c in &p.changes {
                let (_, from, to) = pick(c);
                if from != to {
                    let fp = std::mem::take(&mut g.footprint[c.node]);
                    g.grid.release(&fp);
                }
            }
            for c in &p.changes {
                let (_, from, to) = pick(c);
                if from != to {
                    let n = self.netlist.node(c.node);
                    let fp = g.grid.footprint(n.width, n.height, to).unwrap_or_default();
                    g.grid.occupy(&fp, c.node);
                    g.footprint[c.node] = fp;
                    g.cell_of[c.node] = to;
                }
            }
        }
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        (lo + hi) / 2.0
    }
}
