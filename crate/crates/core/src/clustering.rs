//! Location-aware standard-cell clustering.
//!
//! The seed placement partitions the canvas into regions; cells are only ever merged
//! with cells from the same region, however strongly they connect elsewhere.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Orientation, Point};
use crate::netlist::{Net, Netlist, Node, NodeKind, Pin, Placement};

/// Nets larger than this add no merge affinity (their pairwise terms are negligible
/// and quadratic to enumerate).
const MAX_AFFINITY_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub regions_x: usize,
    pub regions_y: usize,
    /// `None` means unbounded.
    pub max_cluster_area: Option<f64>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            regions_x: 8,
            regions_y: 8,
            max_cluster_area: None,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.regions_x == 0 || self.regions_y == 0 {
            return Err(Error::Config(format!(
                "region grid must be at least 1x1, got {}x{}",
                self.regions_x, self.regions_y
            )));
        }
        if let Some(a) = self.max_cluster_area {
            if a.is_nan() || a <= 0.0 {
                return Err(Error::Config(format!("max cluster area must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Member cells, ascending.
    pub members: Vec<usize>,
    pub area: f64,
    /// Area-weighted mean of the members' seed positions.
    pub centroid: Point,
    pub region: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub params: ClusterParams,
    /// Cluster of every node; `None` for macros, pads and fixed cells.
    pub assignment: Vec<Option<usize>>,
    /// Ordered by smallest member.
    pub clusters: Vec<Cluster>,
}

/// Region containing `p` on a `regions_x x regions_y` partition of the canvas.
pub fn region_of(netlist: &Netlist, params: &ClusterParams, p: Point) -> (usize, usize) {
    let canvas = netlist.canvas();
    let idx = |v: f64, size: f64, n: usize| ((v / size * n as f64).floor().max(0.0) as usize).min(n - 1);
    (idx(p.x, canvas.width, params.regions_x), idx(p.y, canvas.height, params.regions_y))
}

#[derive(Debug, PartialEq)]
struct Candidate {
    score: f64,
    pair: Reverse<(usize, usize)>,
    versions: (u32, u32),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then(self.pair.cmp(&other.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Groups standard cells into clusters.
///
/// Every cell starts alone. Within each seed region the pair of clusters with the
/// largest shared-net affinity (sum of `w / (p - 1)` over nets joining them) is merged
/// while the union stays within `max_cluster_area`; ties go to the smallest ids.
/// Cells without shared nets stay singletons.
pub fn cluster_cells(netlist: &Netlist, seed: &Placement, params: &ClusterParams) -> Result<Clustering> {
    params.validate()?;
    let cells: Vec<usize> = netlist.std_cells().filter(|&c| netlist.node(c).movable).collect();
    let mut region = vec![(0, 0); netlist.num_nodes()];
    for &c in &cells {
        let p = (c < seed.len()).then(|| seed.get(c)).flatten();
        let p = p.ok_or_else(|| Error::MissingSeedLocation(netlist.node(c).name.clone()))?;
        region[c] = region_of(netlist, params, p);
    }

    // Union-find style representatives: the smallest member id of each cluster.
    let mut rep: Vec<usize> = (0..netlist.num_nodes()).collect();
    let mut area: Vec<f64> = netlist.nodes().iter().map(Node::area).collect();
    let mut version = vec![0u32; netlist.num_nodes()];
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); netlist.num_nodes()];
    let mut is_cell = vec![false; netlist.num_nodes()];
    for &c in &cells {
        is_cell[c] = true;
    }

    for net in netlist.nets() {
        let mut ends: Vec<usize> = net.pins.iter().map(|p| p.node).filter(|&n| is_cell[n]).collect();
        ends.sort_unstable();
        ends.dedup();
        if ends.len() < 2 || net.pins.len() > MAX_AFFINITY_DEGREE || net.weight <= 0.0 {
            continue;
        }
        let w = net.weight / (net.pins.len() - 1) as f64;
        for (i, &a) in ends.iter().enumerate() {
            for &b in &ends[i + 1..] {
                if region[a] == region[b] {
                    *adj[a].entry(b).or_insert(0.0) += w;
                    *adj[b].entry(a).or_insert(0.0) += w;
                }
            }
        }
    }

    let cap = params.max_cluster_area.unwrap_or(f64::INFINITY);
    let mut heap = BinaryHeap::new();
    for &a in &cells {
        for (&b, &s) in adj[a].range(a + 1..) {
            heap.push(Candidate { score: s, pair: Reverse((a, b)), versions: (0, 0) });
        }
    }
    while let Some(Candidate { pair: Reverse((a, b)), versions, .. }) = heap.pop() {
        if rep[a] != a || rep[b] != b || versions != (version[a], version[b]) {
            continue;
        }
        if area[a] + area[b] > cap {
            continue;
        }
        // Merge b into a (a < b keeps representatives minimal).
        rep[b] = a;
        area[a] += area[b];
        version[a] += 1;
        let b_adj = std::mem::take(&mut adj[b]);
        adj[a].remove(&b);
        for (n, s) in b_adj {
            if n == a {
                continue;
            }
            *adj[a].entry(n).or_insert(0.0) += s;
            let nb = adj[n].remove(&b).unwrap_or(0.0);
            *adj[n].entry(a).or_insert(0.0) += nb;
        }
        for (&n, &s) in &adj[a] {
            let (x, y) = (a.min(n), a.max(n));
            heap.push(Candidate { score: s, pair: Reverse((x, y)), versions: (version[x], version[y]) });
        }
    }

    let find = |mut x: usize, rep: &[usize]| {
        while rep[x] != x {
            x = rep[x];
        }
        x
    };
    let mut assignment = vec![None; netlist.num_nodes()];
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut index_of_root = BTreeMap::new();
    for &c in &cells {
        let root = find(c, &rep);
        let k = *index_of_root.entry(root).or_insert_with(|| {
            clusters.push(Cluster { members: Vec::new(), area: 0.0, centroid: Point::new(0.0, 0.0), region: region[c] });
            clusters.len() - 1
        });
        assignment[c] = Some(k);
        clusters[k].members.push(c);
    }
    for cl in &mut clusters {
        let (mut sx, mut sy, mut sa) = (0.0, 0.0, 0.0);
        for &m in &cl.members {
            let a = netlist.node(m).area();
            let p = seed.pos(m);
            sx += a * p.x;
            sy += a * p.y;
            sa += a;
        }
        cl.area = sa;
        cl.centroid = if sa > 0.0 {
            Point::new(sx / sa, sy / sa)
        } else {
            let n = cl.members.len() as f64;
            let (x, y) = cl.members.iter().fold((0.0, 0.0), |(x, y), &m| (x + seed.pos(m).x, y + seed.pos(m).y));
            Point::new(x / n, y / n)
        };
    }
    Ok(Clustering { params: *params, assignment, clusters })
}

/// A netlist whose standard cells are replaced by one node per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredNetlist {
    pub netlist: Netlist,
    /// Node id in `netlist` of every flat node (its cluster, for cells).
    pub node_map: Vec<usize>,
    /// Number of leading nodes that are copies of flat macros and pads.
    pub kept: usize,
}

/// Macros and pads keep their order; clusters follow as square nodes named
/// `cluster<k>` with the members' total area. Pins on clusters are centered, duplicate
/// pins are merged, and nets left with fewer than two distinct nodes are dropped.
pub fn build_clustered_netlist(netlist: &Netlist, clustering: &Clustering) -> Result<ClusteredNetlist> {
    if clustering.assignment.len() != netlist.num_nodes() {
        return Err(Error::Precondition(format!(
            "clustering covers {} nodes, netlist has {}",
            clustering.assignment.len(),
            netlist.num_nodes()
        )));
    }
    let mut nodes = Vec::new();
    let mut node_map = vec![usize::MAX; netlist.num_nodes()];
    for (i, n) in netlist.nodes().iter().enumerate() {
        if clustering.assignment[i].is_none() {
            node_map[i] = nodes.len();
            nodes.push(n.clone());
        }
    }
    let kept = nodes.len();
    for (k, cl) in clustering.clusters.iter().enumerate() {
        let mut name = format!("cluster{k}");
        while netlist.find(&name).is_some() {
            name.insert(0, '_');
        }
        let side = cl.area.sqrt();
        nodes.push(Node::new(name, side, side, NodeKind::StdCell));
    }
    for (i, a) in clustering.assignment.iter().enumerate() {
        if let Some(k) = a {
            node_map[i] = kept + k;
        }
    }

    let mut nets = Vec::new();
    for net in netlist.nets() {
        let mut pins: Vec<Pin> = Vec::with_capacity(net.pins.len());
        for p in &net.pins {
            let pin = match clustering.assignment[p.node] {
                Some(_) => Pin::centered(node_map[p.node]),
                None => Pin::new(node_map[p.node], p.dx, p.dy),
            };
            if !pins.contains(&pin) {
                pins.push(pin);
            }
        }
        let mut distinct: Vec<usize> = pins.iter().map(|p| p.node).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() >= 2 {
            nets.push(Net::new(net.name.clone(), pins).with_weight(net.weight));
        }
    }
    let clustered = Netlist::new(netlist.canvas(), nodes, nets)?;
    Ok(ClusteredNetlist { netlist: clustered, node_map, kept })
}

impl ClusteredNetlist {
    /// Starting placement: macros and pads from `flat`, clusters at their centroids.
    pub fn seed_placement(&self, clustering: &Clustering, flat: &Placement) -> Placement {
        let mut pl = Placement::centered(&self.netlist);
        for (i, &j) in self.node_map.iter().enumerate() {
            if j < self.kept {
                pl.positions[j] = flat.pos(i);
                pl.orients[j] = flat.orient(i);
            }
        }
        for (k, cl) in clustering.clusters.iter().enumerate() {
            pl.positions[self.kept + k] = cl.centroid;
        }
        pl
    }
}

/// Flat placement with every cell at its cluster's center; other nodes copied.
pub fn expand_placement(clustered: &ClusteredNetlist, placement: &Placement) -> Placement {
    let n = clustered.node_map.len();
    let mut out = Placement::filled(n, Point::new(0.0, 0.0));
    for (i, &j) in clustered.node_map.iter().enumerate() {
        out.positions[i] = placement.pos(j);
        out.orients[i] = if j < clustered.kept { placement.orient(j) } else { Orientation::N };
    }
    out
}
