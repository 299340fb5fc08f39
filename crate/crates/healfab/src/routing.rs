//! Input routing: which producer feeds each consumer input and each
//! external output port.
//!
//! Routing is a total function; after a reroute every consumer of the dead
//! cell reads the substitute, and the substitute inherits the dead cell's
//! own input sources. Nothing may ever read a dead cell.

use std::collections::BTreeMap;

use crate::fabric::{CellAddr, SignalSource};

#[derive(Clone, Debug, Default)]
pub struct RoutingState {
    /// Per consuming cell, the source of each of its four inputs.
    pub inputs: BTreeMap<CellAddr, [SignalSource; 4]>,
    /// External output port name -> producer.
    pub outputs: BTreeMap<String, SignalSource>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("spare {0} is already in use")]
    SpareExhausted(CellAddr),
    #[error("cell {0} has no routing entry")]
    UnknownCell(CellAddr),
}

impl RoutingState {
    /// Point every consumer of `dead` at `substitute` and hand the dead
    /// cell's input sources to the substitute.
    pub fn reroute(&mut self, dead: CellAddr, substitute: CellAddr) -> Result<(), RouteError> {
        if self.inputs.contains_key(&substitute) {
            return Err(RouteError::SpareExhausted(substitute));
        }
        let dead_sources = self
            .inputs
            .remove(&dead)
            .ok_or(RouteError::UnknownCell(dead))?;
        self.inputs.insert(substitute, dead_sources);
        let from = SignalSource::Cell(dead);
        let to = SignalSource::Cell(substitute);
        for sources in self.inputs.values_mut() {
            for s in sources.iter_mut() {
                if *s == from {
                    *s = to.clone();
                }
            }
        }
        for s in self.outputs.values_mut() {
            if *s == from {
                *s = to.clone();
            }
        }
        Ok(())
    }

    /// Every address some consumer or output currently reads.
    pub fn referenced_cells(&self) -> Vec<CellAddr> {
        let mut cells = Vec::new();
        for sources in self.inputs.values() {
            for s in sources {
                if let SignalSource::Cell(a) = s {
                    cells.push(*a);
                }
            }
        }
        for s in self.outputs.values() {
            if let SignalSource::Cell(a) = s {
                cells.push(*a);
            }
        }
        cells.sort();
        cells.dedup();
        cells
    }

    /// Totality: no referenced producer is in `dead`, and every referenced
    /// producer has its own routing entry (it is being fed).
    pub fn is_total(&self, dead: &[CellAddr]) -> bool {
        self.referenced_cells()
            .iter()
            .all(|a| !dead.contains(a) && self.inputs.contains_key(a))
    }
}
