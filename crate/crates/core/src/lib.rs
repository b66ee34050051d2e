//! Mixed-size macro placement toolkit.
//!
//! The crate is organized around an immutable [`Netlist`](netlist::Netlist) and a
//! mutable [`Placement`](netlist::Placement) value:
//!
//! - [`netlist`]: circuit model, Bookshelf I/O, synthetic benchmark generation.
//! - [`metrics`]: HPWL (full and incremental), density, congestion and the blended proxy cost.
//! - [`clustering`]: location-aware standard-cell clustering into soft macros.
//! - [`placers`]: constructive gridded placement, simulated annealing, force-directed placement.
//! - [`stats`]: Kendall rank correlation, noise statistics, A/B comparison of multi-seed runs.

pub mod clustering;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod netlist;
pub mod placers;
pub mod stats;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use geom::{Orientation, Point, Rect};
pub use netlist::{Canvas, Net, Netlist, Node, NodeKind, Pin, Placement};
