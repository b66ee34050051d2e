use std::fmt;

use serde::Serialize;

use super::{NodeKind, Netlist};

const OFFSET_EPS: f64 = 1e-9;

/// A broken netlist invariant. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NegativeSize { node: String },
    MovablePad { node: String },
    DegenerateNet { net: usize, name: String },
    PinOffsetOutOfBounds { net: String, node: String, dx: f64, dy: f64 },
    NegativeWeight { net: String, weight: f64 },
    OverUtilized { utilization: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeSize { node } => write!(f, "node `{node}`: negative width or height"),
            Violation::MovablePad { node } => write!(f, "node `{node}`: fixed pad marked movable"),
            Violation::DegenerateNet { name, .. } => write!(f, "net `{name}`: fewer than two pins"),
            Violation::PinOffsetOutOfBounds { net, node, dx, dy } => {
                write!(f, "net `{net}`: pin offset ({dx}, {dy}) lies outside node `{node}`")
            }
            Violation::NegativeWeight { net, weight } => write!(f, "net `{net}`: negative weight {weight}"),
            Violation::OverUtilized { utilization } => {
                write!(f, "movable area exceeds canvas area (utilization {utilization:.4})")
            }
        }
    }
}

/// Checks every soft netlist invariant; an empty list means the netlist is well formed.
pub fn validate(netlist: &Netlist) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in netlist.nodes() {
        if node.width < 0.0 || node.height < 0.0 || !node.width.is_finite() || !node.height.is_finite() {
            out.push(Violation::NegativeSize { node: node.name.clone() });
        }
        if node.kind == NodeKind::FixedPad && node.movable {
            out.push(Violation::MovablePad { node: node.name.clone() });
        }
    }
    for (ni, net) in netlist.nets().iter().enumerate() {
        if net.is_degenerate() {
            out.push(Violation::DegenerateNet { net: ni, name: net.name.clone() });
        }
        if net.weight.is_nan() || net.weight < 0.0 {
            out.push(Violation::NegativeWeight { net: net.name.clone(), weight: net.weight });
        }
        for pin in &net.pins {
            let node = netlist.node(pin.node);
            // Flips preserve |dx| and |dy|, so the native frame check covers every orientation.
            if pin.dx.abs() > node.width / 2.0 + OFFSET_EPS || pin.dy.abs() > node.height / 2.0 + OFFSET_EPS {
                out.push(Violation::PinOffsetOutOfBounds {
                    net: net.name.clone(),
                    node: node.name.clone(),
                    dx: pin.dx,
                    dy: pin.dy,
                });
            }
        }
    }
    let util = netlist.movable_area() / netlist.canvas().area();
    if util > 1.0 + 1e-12 {
        out.push(Violation::OverUtilized { utilization: util });
    }
    out
}
