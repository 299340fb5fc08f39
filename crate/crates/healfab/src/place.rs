//! Placement: netlist blocks onto B cells as genetic codes.
//!
//! Blocks are placed in declaration order, alternating LEFT/RIGHT within
//! their tagged level's layer to balance the sides. A level holding more
//! than eight blocks spills its excess, in order, into the next layer's
//! first free cells; placement fails only when the last layer overflows.
//! Every used B cell's code is then written into all same-side T cells at
//! that cell's slot index, so any same-side spare can assume the role.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::fabric::{CellAddr, Fabric, GeneticCode, Side, SignalSource};
use crate::netlist::{Netlist, Ref};
use crate::routing::RoutingState;

#[derive(Clone, Debug)]
pub struct Mapping {
    pub layer_count: u8,
    /// Block index -> placed cell, in declaration order.
    pub cells: Vec<CellAddr>,
    /// Genetic code per placed B cell.
    pub codes: BTreeMap<CellAddr, GeneticCode>,
    /// Initial routing derived from the codes and output bindings.
    pub routing: RoutingState,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlaceError {
    #[error("level {level} overflows the fabric: {blocks} blocks but no free cell remains")]
    LevelOverflow { level: u8, blocks: usize },
    #[error("netlist declares level {level} beyond the {layers}-layer fabric")]
    UnknownLevel { level: u8, layers: u8 },
}

pub fn place(netlist: &Netlist, layers: u8) -> Result<Mapping, PlaceError> {
    let mut used: Vec<u8> = vec![0; layers as usize]; // cells consumed per layer
    let mut cells: Vec<Option<CellAddr>> = vec![None; netlist.blocks.len()];

    // Group block indices by level, preserving declaration order.
    let mut by_level: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, b) in netlist.blocks.iter().enumerate() {
        by_level.entry(b.level).or_default().push(i);
    }

    for (&level, members) in &by_level {
        if level == 0 || level > layers {
            return Err(PlaceError::UnknownLevel { level, layers });
        }
        let mut layer = level - 1;
        for &block_idx in members {
            while used[layer as usize] >= 8 {
                layer += 1;
                if layer >= layers {
                    return Err(PlaceError::LevelOverflow { level, blocks: members.len() });
                }
            }
            let seq = used[layer as usize];
            let side = if seq % 2 == 0 { Side::Left } else { Side::Right };
            let index = seq / 2;
            cells[block_idx] = Some(CellAddr::b(layer, side, index));
            used[layer as usize] += 1;
        }
    }

    let cells: Vec<CellAddr> = cells.into_iter().map(|c| c.unwrap()).collect();

    let source_of = |r: Ref| -> SignalSource {
        match r {
            Ref::Input(i) => SignalSource::External(netlist.inputs[i].0.clone()),
            Ref::Block(b) => SignalSource::Cell(cells[b]),
            Ref::Const(w) => SignalSource::Const(w),
        }
    };

    let mut codes = BTreeMap::new();
    let mut routing = RoutingState::default();
    for (i, block) in netlist.blocks.iter().enumerate() {
        let sources: Vec<SignalSource> = block.args.iter().map(|&r| source_of(r)).collect();
        let code = GeneticCode::new(block.op, &sources);
        routing.inputs.insert(cells[i], code.inputs.clone());
        codes.insert(cells[i], code);
    }
    for (name, block_idx) in &netlist.outputs {
        routing.outputs.insert(name.clone(), SignalSource::Cell(cells[*block_idx]));
    }

    Ok(Mapping { layer_count: layers, cells, codes, routing })
}

impl Mapping {
    /// Install the mapping into a fresh fabric: activate B cells, fill
    /// same-side T-cell slots, and anchor execution to the per-layer
    /// trigger times (in half-ticks).
    pub fn configure(&self, fabric: &mut Fabric, triggers: &[u64]) {
        for (addr, code) in &self.codes {
            fabric.load_code(*addr, 0, code.clone()).unwrap();
            let trigger = triggers.get(addr.layer as usize).copied().unwrap_or(0);
            let cell = fabric.cell_mut(*addr);
            cell.active_slot = Some(0);
            cell.mode = crate::cell::CellMode::Active;
            cell.anchor = Some(trigger);
        }
        // Spare preparation: each T cell stores its side's B-cell codes,
        // slot j holding B_j's code.
        for (addr, code) in &self.codes {
            for t_index in 0..4 {
                let t = CellAddr::t(addr.layer, addr.side, t_index);
                fabric.load_code(t, addr.index as usize, code.clone()).unwrap();
            }
        }
    }

    /// Deterministic text rendering, also the `place` subcommand output.
    pub fn to_text(&self, netlist: &Netlist) -> String {
        let mut out = String::new();
        writeln!(out, "layers: {}", self.layer_count).unwrap();
        for (i, block) in netlist.blocks.iter().enumerate() {
            let code = &self.codes[&self.cells[i]];
            let inputs: Vec<String> = code.inputs.iter().map(|s| s.to_string()).collect();
            writeln!(
                out,
                "{} -> {} op={} inputs=[{}]",
                block.name,
                self.cells[i],
                code.op.name(),
                inputs.join(" ")
            )
            .unwrap();
        }
        for (name, src) in &self.routing.outputs {
            writeln!(out, "out {name} <- {src}").unwrap();
        }
        out
    }

    /// Count of placed cells per layer, for structural assertions.
    pub fn per_layer_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.layer_count as usize];
        for c in &self.cells {
            counts[c.layer as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    #[test]
    fn one_block_netlist_places_on_first_left_cell() {
        let netlist = parse_netlist("in a : bool\nblk g = NOT(a)\nout y = g\n").unwrap();
        let mapping = place(&netlist, 1).unwrap();
        assert_eq!(mapping.cells, vec![CellAddr::b(0, Side::Left, 0)]);

        let mut fabric = Fabric::new(1);
        mapping.configure(&mut fabric, &[0]);
        // All four same-side T cells hold the code in slot 0.
        for t_index in 0..4 {
            let t = fabric.cell(CellAddr::t(0, Side::Left, t_index));
            assert!(t.codes[0].is_some(), "T{t_index} missing the spare code");
        }
        // Exactly one B cell is active, seven idle.
        use crate::cell::CellMode;
        use crate::fabric::CellKind;
        let active = fabric
            .cells()
            .filter(|c| c.addr.kind == CellKind::B && c.mode == CellMode::Active)
            .count();
        assert_eq!(active, 1);
    }

    #[test]
    fn placement_alternates_sides_in_declaration_order() {
        let text = "in a : word\n\
                    blk b0 = ADD(a, 0)\nblk b1 = ADD(a, 1)\nblk b2 = ADD(a, 2)\n\
                    out y = b2\n";
        let netlist = parse_netlist(text).unwrap();
        let mapping = place(&netlist, 1).unwrap();
        assert_eq!(
            mapping.cells,
            vec![
                CellAddr::b(0, Side::Left, 0),
                CellAddr::b(0, Side::Right, 0),
                CellAddr::b(0, Side::Left, 1),
            ]
        );
    }

    #[test]
    fn nine_block_level_spills_into_next_layer() {
        let mut text = String::from("in a : word\nlevel 1:\n");
        for i in 0..9 {
            text.push_str(&format!("blk b{i} = ADD(a, {i})\n"));
        }
        text.push_str("out y = b8\n");
        let netlist = parse_netlist(&text).unwrap();
        let mapping = place(&netlist, 2).unwrap();
        assert_eq!(mapping.per_layer_counts(), vec![8, 1]);
        assert_eq!(mapping.cells[8], CellAddr::b(1, Side::Left, 0));

        // With a single layer the same netlist overflows.
        let err = place(&netlist, 1).unwrap_err();
        assert_eq!(err, PlaceError::LevelOverflow { level: 1, blocks: 9 });
    }

    #[test]
    fn placement_is_deterministic() {
        let text = "in a : word\nlevel 1:\nblk p = ADD(a, 1)\nlevel 2:\nblk q = ADD(p, 2)\nout y = q\n";
        let netlist = parse_netlist(text).unwrap();
        let m1 = place(&netlist, 2).unwrap();
        let m2 = place(&netlist, 2).unwrap();
        assert_eq!(m1.to_text(&netlist), m2.to_text(&netlist));
    }
}
