use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::netlist::{Netlist, Placement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    /// Conjugate-gradient iterations, summed over both axes.
    pub iterations: usize,
    /// Largest final residual component over both axes.
    pub residual: f64,
    pub converged: bool,
    /// Movable nodes with no spring path to a fixed node; left where they were.
    pub unanchored: usize,
}

/// Spring between two terminals, each a variable or a fixed coordinate.
#[derive(Clone, Copy)]
enum End {
    Var(usize, Point),
    Fixed(Point),
}

struct Spring {
    k: f64,
    a: End,
    b: End,
}

/// Quadratic wirelength: every net with `p >= 2` pins contributes
/// `w / (p - 1) * sum |pin - mean|^2`, the energy of a star model whose center sits at
/// the pin mean.
pub fn quadratic_wirelength(netlist: &Netlist, placement: &Placement) -> f64 {
    netlist
        .nets()
        .iter()
        .filter(|n| n.pins.len() >= 2)
        .map(|net| {
            let pts: Vec<Point> = net.pins.iter().map(|p| placement.pin_position(p)).collect();
            let p = pts.len() as f64;
            let mx = pts.iter().map(|q| q.x).sum::<f64>() / p;
            let my = pts.iter().map(|q| q.y).sum::<f64>() / p;
            let spread: f64 = pts.iter().map(|q| (q.x - mx).powi(2) + (q.y - my).powi(2)).sum();
            net.weight / (p - 1.0) * spread
        })
        .sum()
}

/// Moves the `movable` nodes to the minimum of the star-model quadratic wirelength
/// while every other node stays fixed, then clamps them into the canvas.
///
/// Nets with three or more pins get a star variable; two-pin nets become a direct
/// spring of stiffness `w / 2`, which is the same energy with the star eliminated.
/// The x and y systems are solved independently by Jacobi-preconditioned conjugate
/// gradients until the largest residual component is at most `tolerance`.
pub fn place_force_directed(
    netlist: &Netlist,
    placement: &Placement,
    movable: &[usize],
    tolerance: f64,
) -> Result<(Placement, FdReport)> {
    placement.check_covers(netlist)?;
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be positive, got {tolerance}")));
    }
    let n = netlist.num_nodes();
    let mut var_of = vec![usize::MAX; n];
    for (k, &m) in movable.iter().enumerate() {
        if m >= n {
            return Err(Error::Precondition(format!("movable node {m} out of range")));
        }
        if var_of[m] != usize::MAX {
            return Err(Error::Precondition(format!("movable node {m} listed twice")));
        }
        var_of[m] = k;
    }
    let mut report = FdReport {
        iterations: 0,
        residual: 0.0,
        converged: true,
        unanchored: 0,
    };
    if movable.is_empty() {
        return Ok((placement.clone(), report));
    }
    if movable.len() == n {
        return Err(Error::DegenerateSystem);
    }

    let mut vars = movable.len();
    let mut springs = Vec::new();
    for net in netlist.nets() {
        let p = net.pins.len();
        if p < 2 || net.weight == 0.0 || net.pins.iter().all(|pin| var_of[pin.node] == usize::MAX) {
            continue;
        }
        let end = |pin: &crate::netlist::Pin| {
            let v = var_of[pin.node];
            if v == usize::MAX {
                End::Fixed(placement.pin_position(pin))
            } else {
                let (dx, dy) = placement.orient(pin.node).apply(pin.dx, pin.dy);
                End::Var(v, Point::new(dx, dy))
            }
        };
        if p == 2 {
            springs.push(Spring { k: net.weight / 2.0, a: end(&net.pins[0]), b: end(&net.pins[1]) });
        } else {
            let star = vars;
            vars += 1;
            let k = net.weight / (p - 1) as f64;
            for pin in &net.pins {
                springs.push(Spring { k, a: end(pin), b: End::Var(star, Point::new(0.0, 0.0)) });
            }
        }
    }

    let anchored = anchored_vars(vars, &springs);
    report.unanchored = (0..movable.len()).filter(|&v| !anchored[v]).count();
    let mut index = vec![usize::MAX; vars];
    let mut dim = 0;
    for v in 0..vars {
        if anchored[v] {
            index[v] = dim;
            dim += 1;
        }
    }
    if dim == 0 {
        if springs.is_empty() {
            return Ok((placement.clone(), report));
        }
        return Err(Error::DegenerateSystem);
    }

    let mut out = placement.clone();
    let mut start = vec![Point::new(0.0, 0.0); dim];
    for (k, &m) in movable.iter().enumerate() {
        if anchored[k] {
            start[index[k]] = placement.pos(m);
        }
    }
    let system = System::assemble(dim, &index, &springs);
    let xs = system.solve(|p| p.x, start.iter().map(|p| p.x).collect(), tolerance);
    let ys = system.solve(|p| p.y, start.iter().map(|p| p.y).collect(), tolerance);
    report.iterations = xs.iterations + ys.iterations;
    report.residual = xs.residual.max(ys.residual);
    report.converged = xs.converged && ys.converged;
    if !report.converged {
        log::warn!("force-directed solve stopped at residual {:.3e}", report.residual);
    }

    let canvas = netlist.canvas();
    let clamp = |v: f64, size: f64, limit: f64| {
        let (lo, hi) = (size / 2.0, limit - size / 2.0);
        if lo <= hi {
            v.clamp(lo, hi)
        } else {
            limit / 2.0
        }
    };
    for (k, &m) in movable.iter().enumerate() {
        if anchored[k] {
            let node = netlist.node(m);
            let i = index[k];
            out.set(
                m,
                Point::new(clamp(xs.values[i], node.width, canvas.width), clamp(ys.values[i], node.height, canvas.height)),
            );
        }
    }
    Ok((out, report))
}

/// Variables connected through springs to at least one fixed terminal.
fn anchored_vars(vars: usize, springs: &[Spring]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); vars];
    let mut anchored = vec![false; vars];
    let mut stack = Vec::new();
    for s in springs {
        match (s.a, s.b) {
            (End::Var(a, _), End::Var(b, _)) => {
                adj[a].push(b);
                adj[b].push(a);
            }
            (End::Var(v, _), End::Fixed(_)) | (End::Fixed(_), End::Var(v, _)) => {
                if !anchored[v] {
                    anchored[v] = true;
                    stack.push(v);
                }
            }
            (End::Fixed(_), End::Fixed(_)) => {}
        }
    }
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !anchored[u] {
                anchored[u] = true;
                stack.push(u);
            }
        }
    }
    anchored
}

/// Symmetric positive definite system in CSR form, shared by both axes.
struct System<'a> {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    index: &'a [usize],
    springs: &'a [Spring],
}

struct Solution {
    values: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

impl<'a> System<'a> {
    fn assemble(dim: usize, index: &'a [usize], springs: &'a [Spring]) -> Self {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for s in springs {
            match (s.a, s.b) {
                (End::Var(a, _), End::Var(b, _)) if index[a] != usize::MAX => {
                    let (i, j) = (index[a], index[b]);
                    triplets.extend([(i, i, s.k), (j, j, s.k), (i, j, -s.k), (j, i, -s.k)]);
                }
                (End::Var(v, _), End::Fixed(_)) | (End::Fixed(_), End::Var(v, _)) if index[v] != usize::MAX => {
                    triplets.push((index[v], index[v], s.k));
                }
                _ => {}
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for t in triplets {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (t.0, t.1) => last.2 += t.2,
                _ => merged.push(t),
            }
        }
        let mut row_start = vec![0; dim + 1];
        let mut diag = vec![0.0; dim];
        for &(r, c, v) in &merged {
            row_start[r + 1] += 1;
            if r == c {
                diag[r] = v;
            }
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        let cols = merged.iter().map(|t| t.1).collect();
        let vals = merged.iter().map(|t| t.2).collect();
        System { row_start, cols, vals, diag, index, springs }
    }

    fn rhs(&self, axis: impl Fn(Point) -> f64) -> Vec<f64> {
        let mut b = vec![0.0; self.diag.len()];
        for s in self.springs {
            match (s.a, s.b) {
                (End::Var(a, ca), End::Var(c, cb)) if self.index[a] != usize::MAX => {
                    let d = axis(cb) - axis(ca);
                    b[self.index[a]] += s.k * d;
                    b[self.index[c]] -= s.k * d;
                }
                (End::Var(v, off), End::Fixed(p)) | (End::Fixed(p), End::Var(v, off)) if self.index[v] != usize::MAX => {
                    b[self.index[v]] += s.k * (axis(p) - axis(off));
                }
                _ => {}
            }
        }
        b
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = (self.row_start[r]..self.row_start[r + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum();
        }
    }

    fn solve(&self, axis: impl Fn(Point) -> f64, mut x: Vec<f64>, tol: f64) -> Solution {
        let dim = x.len();
        let b = self.rhs(axis);
        let mut r = vec![0.0; dim];
        self.mul(&x, &mut r);
        for i in 0..dim {
            r[i] = b[i] - r[i];
        }
        let max_iter = 100 + 20 * dim;
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; dim];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut it = 0;
        while norm(&r) > tol && it < max_iter {
            self.mul(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..dim {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..dim {
                z[i] = r[i] / self.diag[i];
            }
            let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..dim {
                p[i] = z[i] + beta * p[i];
            }
            it += 1;
        }
        let residual = norm(&r);
        Solution {
            values: x,
            iterations: it,
            residual,
            converged: residual <= tol,
        }
    }
}
