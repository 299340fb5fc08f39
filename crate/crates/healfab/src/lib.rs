//! Cycle-accurate simulator for a self-healing cellular logic fabric.
//!
//! The machine under simulation is a two-layer architecture: a critical
//! functions layer of IEC 61131-style function-block cells (active B
//! cells, passive redundant T cells, embryonic stem execution units) and
//! a healing layer that monitors execution and repairs permanent faults
//! by cell death, rerouting, and restoration. Transient register upsets
//! are masked in-place by triple-register hybrid redundancy units;
//! permanent block faults are caught by duplication-with-comparison and
//! healed first by same-side T cells, then by differentiating stem units.
//!
//! The crate ships the simulator core, a netlist DSL with placement, a
//! fault-injection harness with campaign aggregation, resilience metrics,
//! and a finite-trace temporal property checker.

pub mod analysis;
pub mod blocks;
pub mod campaign;
pub mod cell;
pub mod checker;
pub mod config;
pub mod fabric;
pub mod faults;
pub mod healing;
pub mod hru;
pub mod netlist;
pub mod place;
pub mod routing;
pub mod sim;
pub mod trace;
pub mod word;

pub use blocks::{eval_block, BlockOp, BlockState, PiGains};
pub use cell::{CellMode, FunctionCell, StuckMask};
pub use fabric::{CellAddr, CellKind, Fabric, GeneticCode, Side, SignalSource};
pub use healing::{HealingLayerState, Syndrome};
pub use hru::{hru_step, HruOutcome, HruState};
pub use netlist::{parse_netlist, Netlist};
pub use place::{place, Mapping};
pub use sim::{parse_stimulus, SimConfig, Simulation, Stimulus};
pub use trace::{RowKind, Trace};
pub use word::Word;
pub mod cli;
