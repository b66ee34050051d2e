//! Circuit data model.
//!
//! Coordinates are node *centers*; the Bookshelf lower-left convention is only used
//! at the file boundary (see [`bookshelf`]).

pub mod bookshelf;
pub mod synthetic;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Orientation, Point, Rect};

pub use synthetic::{gen_synthetic, SyntheticSpec};
pub use validate::{validate, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Canvas {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::Validation(format!(
                "canvas must have positive finite size, got {width} x {height}"
            )));
        }
        Ok(Canvas { width, height })
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn half_perimeter(&self) -> f64 {
        self.width + self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Macro,
    StdCell,
    FixedPad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub kind: NodeKind,
    pub movable: bool,
}

impl Node {
    pub fn new(name: impl Into<String>, width: f64, height: f64, kind: NodeKind) -> Self {
        Node {
            name: name.into(),
            width,
            height,
            kind,
            movable: kind != NodeKind::FixedPad,
        }
    }

    pub fn fixed(mut self) -> Self {
        self.movable = false;
        self
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_macro(&self) -> bool {
        self.kind == NodeKind::Macro
    }

    pub fn is_std_cell(&self) -> bool {
        self.kind == NodeKind::StdCell
    }
}

/// A pin, offset from its node's center in the node's native orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub node: usize,
    #[serde(default)]
    pub dx: f64,
    #[serde(default)]
    pub dy: f64,
}

impl Pin {
    pub fn new(node: usize, dx: f64, dy: f64) -> Self {
        Pin { node, dx, dy }
    }

    pub fn centered(node: usize) -> Self {
        Pin::new(node, 0.0, 0.0)
    }
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub pins: Vec<Pin>,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

impl Net {
    pub fn new(name: impl Into<String>, pins: Vec<Pin>) -> Self {
        Net {
            name: name.into(),
            pins,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Nets with fewer than two pins have a degenerate bounding box and are
    /// ignored by every cost function.
    pub fn is_degenerate(&self) -> bool {
        self.pins.len() < 2
    }
}

#[derive(Deserialize)]
struct NetlistData {
    canvas: Canvas,
    nodes: Vec<Node>,
    nets: Vec<Net>,
}

impl TryFrom<NetlistData> for Netlist {
    type Error = Error;

    fn try_from(data: NetlistData) -> Result<Self> {
        Netlist::new(data.canvas, data.nodes, data.nets)
    }
}

/// Immutable circuit: canvas, nodes, nets and the derived node-to-nets index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NetlistData")]
pub struct Netlist {
    canvas: Canvas,
    nodes: Vec<Node>,
    nets: Vec<Net>,
    #[serde(skip)]
    node_nets: Vec<Vec<usize>>,
    #[serde(skip)]
    by_name: HashMap<String, usize>,
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.canvas == other.canvas && self.nodes == other.nodes && self.nets == other.nets
    }
}

impl Netlist {
    /// Builds a netlist and its adjacency index. Fails if a pin references a node
    /// that does not exist, if node names collide, or if the canvas is degenerate.
    /// Softer rule breaks are reported by [`validate`].
    pub fn new(canvas: Canvas, nodes: Vec<Node>, nets: Vec<Net>) -> Result<Self> {
        Canvas::new(canvas.width, canvas.height)?;
        let mut by_name = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if by_name.insert(node.name.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate node name `{}`", node.name)));
            }
        }
        let mut node_nets = vec![Vec::new(); nodes.len()];
        for (ni, net) in nets.iter().enumerate() {
            for pin in &net.pins {
                let list = node_nets.get_mut(pin.node).ok_or_else(|| {
                    Error::Validation(format!(
                        "net `{}` references node index {} but only {} nodes exist",
                        net.name,
                        pin.node,
                        nodes.len()
                    ))
                })?;
                if list.last() != Some(&ni) {
                    list.push(ni);
                }
            }
        }
        Ok(Netlist {
            canvas,
            nodes,
            nets,
            node_nets,
            by_name,
        })
    }

    pub fn canvas(&self) -> Canvas {
        self.canvas
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn net(&self, id: usize) -> &Net {
        &self.nets[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_nets(&self) -> usize {
        self.nets.len()
    }

    /// Ids of the nets incident to `node`, ascending and without duplicates.
    pub fn nets_of(&self, node: usize) -> &[usize] {
        &self.node_nets[node]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn macros(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_macro())
    }

    pub fn movable_macros(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_macro() && self.nodes[i].movable)
            .collect()
    }

    pub fn std_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_std_cell())
    }

    /// Number of nets that contribute to cost functions (at least two pins).
    pub fn live_net_count(&self) -> usize {
        self.nets.iter().filter(|n| !n.is_degenerate()).count()
    }

    pub fn total_area(&self) -> f64 {
        self.nodes.iter().map(Node::area).sum()
    }

    pub fn movable_area(&self) -> f64 {
        self.nodes.iter().filter(|n| n.movable).map(Node::area).sum()
    }

    pub fn utilization(&self) -> f64 {
        self.total_area() / self.canvas.area()
    }

    /// Returns a copy where the canvas is replaced. Used by tests and scaling experiments.
    pub fn with_canvas(&self, canvas: Canvas) -> Result<Self> {
        Netlist::new(canvas, self.nodes.clone(), self.nets.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Center location and orientation for every node, indexed by node id.
///
/// A node whose coordinates are not finite is treated as unplaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub positions: Vec<Point>,
    pub orients: Vec<Orientation>,
}

impl Placement {
    /// Every node at `at`, orientation N.
    pub fn filled(num_nodes: usize, at: Point) -> Self {
        Placement {
            positions: vec![at; num_nodes],
            orients: vec![Orientation::N; num_nodes],
        }
    }

    /// Every node at the canvas center.
    pub fn centered(netlist: &Netlist) -> Self {
        Placement::filled(netlist.num_nodes(), netlist.canvas().center())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<Point> {
        self.positions.get(node).copied().filter(Point::is_finite)
    }

    pub fn pos(&self, node: usize) -> Point {
        self.positions[node]
    }

    pub fn orient(&self, node: usize) -> Orientation {
        self.orients[node]
    }

    pub fn set(&mut self, node: usize, at: Point) {
        self.positions[node] = at;
    }

    pub fn rect(&self, netlist: &Netlist, node: usize) -> Rect {
        let n = netlist.node(node);
        Rect::centered(self.positions[node], n.width, n.height)
    }

    pub fn pin_position(&self, pin: &Pin) -> Point {
        let c = self.positions[pin.node];
        let (dx, dy) = self.orients[pin.node].apply(pin.dx, pin.dy);
        Point::new(c.x + dx, c.y + dy)
    }

    /// Checks that the placement covers every node of `netlist` with finite coordinates.
    pub fn check_covers(&self, netlist: &Netlist) -> Result<()> {
        if self.positions.len() != netlist.num_nodes() || self.orients.len() != netlist.num_nodes() {
            return Err(Error::Precondition(format!(
                "placement has {} entries but netlist has {} nodes",
                self.positions.len(),
                netlist.num_nodes()
            )));
        }
        if let Some(i) = (0..netlist.num_nodes()).find(|&i| self.get(i).is_none()) {
            return Err(Error::Precondition(format!(
                "node `{}` has no location",
                netlist.node(i).name
            )));
        }
        Ok(())
    }
}
