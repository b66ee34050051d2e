//! Placement engines and the grid/legality machinery they share.
//!
//! Every engine is a pure function of its inputs and seed. Macro placers only move
//! movable macros; standard cells keep their input positions until the
//! force-directed placer runs.

mod anneal;
mod constructive;
mod force_directed;
mod grid;
mod init;
mod legality;
mod moves;

pub use anneal::{
    anneal, auto_temperature, ActionProbs, AnnealConfig, AnnealTrace, Checkpoint, GridMode, Temperature,
};
pub use constructive::{place_constructive, OrderPolicy};
pub use force_directed::{place_force_directed, quadratic_wirelength, FdReport};
pub use grid::{snap_to_grid, GridDims, MacroGrid};
pub use init::{init_macros, InitHeuristic};
pub use legality::{check_legal, LegalityViolation};
