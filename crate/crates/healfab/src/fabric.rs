//! Cell addressing, genetic codes, and the fabric container.
//!
//! One critical-functions layer holds 8 active B cells, 8 passive
//! redundant T cells, and 4 embryonic stem cells of 2 execution units
//! each, split into LEFT and RIGHT sublayers of 4/4/4-units apiece.
//! Applications may chain several layers.

use std::fmt;

use crate::blocks::BlockOp;
use crate::cell::FunctionCell;
use crate::word::Word;

pub const CELLS_PER_LAYER: usize = 24; // 8 B + 8 T + 8 stem units
pub const SUBLAYER_WIDTH: u8 = 4;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn letter(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }
}

/// Cell kinds, in healing-escalation order: B cells execute, T cells are
/// the first-tier spares, stem execution units the second tier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CellKind {
    B,
    T,
    StemUnit,
}

/// Unique address of a cell or stem execution unit.
///
/// Ordering is (layer, kind, side, index), which is also the simulator's
/// deterministic iteration and arbitration order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CellAddr {
    pub layer: u8,
    pub kind: CellKind,
    pub side: Side,
    pub index: u8,
}

impl CellAddr {
    pub fn new(layer: u8, kind: CellKind, side: Side, index: u8) -> CellAddr {
        assert!(index < SUBLAYER_WIDTH, "cell index out of range: {index}");
        CellAddr { layer, kind, side, index }
    }

    pub fn b(layer: u8, side: Side, index: u8) -> CellAddr {
        CellAddr::new(layer, CellKind::B, side, index)
    }

    pub fn t(layer: u8, side: Side, index: u8) -> CellAddr {
        CellAddr::new(layer, CellKind::T, side, index)
    }

    pub fn stem(layer: u8, side: Side, index: u8) -> CellAddr {
        CellAddr::new(layer, CellKind::StemUnit, side, index)
    }

    /// Physical stem cell number and unit within it. LEFT hosts S0 and S2,
    /// RIGHT hosts S1 and S3, two execution units each.
    pub fn stem_cell_and_unit(&self) -> (u8, u8) {
        debug_assert_eq!(self.kind, CellKind::StemUnit);
        let base = match self.side {
            Side::Left => 0,
            Side::Right => 1,
        };
        (base + 2 * (self.index / 2), self.index % 2)
    }

    pub fn flat_index(&self) -> usize {
        let kind_base = match self.kind {
            CellKind::B => 0,
            CellKind::T => 8,
            CellKind::StemUnit => 16,
        };
        let side_base = match self.side {
            Side::Left => 0,
            Side::Right => 4,
        };
        self.layer as usize * CELLS_PER_LAYER + kind_base + side_base + self.index as usize
    }

    /// Parse the textual form used in schedules and traces, e.g. `L.B0`,
    /// `R.T2@1`, `L.S0.u1`.
    pub fn parse(s: &str) -> Result<CellAddr, String> {
        let (body, layer) = match s.split_once('@') {
            Some((b, l)) => {
                let layer: u8 =
                    l.parse().map_err(|_| format!("bad layer in address `{s}`"))?;
                (b, layer)
            }
            None => (s, 0),
        };
        let mut parts = body.split('.');
        let side = match parts.next() {
            Some("L") => Side::Left,
            Some("R") => Side::Right,
            _ => return Err(format!("bad side in address `{s}`")),
        };
        let cell = parts.next().ok_or_else(|| format!("missing cell in address `{s}`"))?;
        let rest = parts.next();
        if parts.next().is_some() {
            return Err(format!("trailing junk in address `{s}`"));
        }
        let (kind_ch, idx_str) = cell.split_at(1);
        let idx: u8 = idx_str.parse().map_err(|_| format!("bad index in address `{s}`"))?;
        match (kind_ch, rest) {
            ("B", None) => Ok(CellAddr::b(layer, side, check_idx(idx, s)?)),
            ("T", None) => Ok(CellAddr::t(layer, side, check_idx(idx, s)?)),
            ("S", Some(unit)) => {
                let u: u8 = unit
                    .strip_prefix('u')
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| format!("bad stem unit in address `{s}`"))?;
                if u > 1 {
                    return Err(format!("stem unit out of range in `{s}`"));
                }
                let expected_base = match side {
                    Side::Left => 0,
                    Side::Right => 1,
                };
                if idx % 2 != expected_base || idx > 3 {
                    return Err(format!("stem cell S{idx} is not on side {} in `{s}`", side.letter()));
                }
                let index = (idx / 2) * 2 + u;
                Ok(CellAddr::stem(layer, side, index))
            }
            _ => Err(format!("bad cell kind in address `{s}`")),
        }
    }
}

fn check_idx(idx: u8, s: &str) -> Result<u8, String> {
    if idx < SUBLAYER_WIDTH {
        Ok(idx)
    } else {
        Err(format!("cell index out of range in `{s}`"))
    }
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CellKind::B => write!(f, "{}.B{}", self.side.letter(), self.index)?,
            CellKind::T => write!(f, "{}.T{}", self.side.letter(), self.index)?,
            CellKind::StemUnit => {
                let (cell, unit) = self.stem_cell_and_unit();
                write!(f, "{}.S{}.u{}", self.side.letter(), cell, unit)?;
            }
        }
        if self.layer != 0 {
            write!(f, "@{}", self.layer)?;
        }
        Ok(())
    }
}

/// Where a cell input or an external output takes its value from.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum SignalSource {
    External(String),
    Cell(CellAddr),
    Const(Word),
    Unused,
}

impl fmt::Display for SignalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSource::External(p) => write!(f, "port:{p}"),
            SignalSource::Cell(a) => write!(f, "cell:{a}"),
            SignalSource::Const(w) => write!(f, "const:{w}"),
            SignalSource::Unused => write!(f, "-"),
        }
    }
}

/// One configuration word: the operation a cell expresses plus its four
/// input selectors. Selectors beyond the op's arity are normalized to
/// `Unused` so codes compare equal structurally.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneticCode {
    pub op: BlockOp,
    pub inputs: [SignalSource; 4],
    pub output_enable: bool,
}

impl GeneticCode {
    pub fn new(op: BlockOp, selected: &[SignalSource]) -> GeneticCode {
        assert_eq!(selected.len(), op.arity(), "selector count must match op arity");
        let mut inputs =
            [SignalSource::Unused, SignalSource::Unused, SignalSource::Unused, SignalSource::Unused];
        for (slot, src) in inputs.iter_mut().zip(selected.iter()) {
            *slot = src.clone();
        }
        GeneticCode { op, inputs, output_enable: true }
    }
}

/// The whole cell array: every layer's B cells, T cells, and stem units.
#[derive(Clone, Debug)]
pub struct Fabric {
    pub layer_count: u8,
    cells: Vec<FunctionCell>,
}

impl Fabric {
    pub fn new(layer_count: u8) -> Fabric {
        assert!(layer_count >= 1, "fabric needs at least one layer");
        let mut cells = Vec::with_capacity(layer_count as usize * CELLS_PER_LAYER);
        for layer in 0..layer_count {
            for kind in [CellKind::B, CellKind::T, CellKind::StemUnit] {
                for side in [Side::Left, Side::Right] {
                    for index in 0..SUBLAYER_WIDTH {
                        cells.push(FunctionCell::new(CellAddr::new(layer, kind, side, index)));
                    }
                }
            }
        }
        Fabric { layer_count, cells }
    }

    pub fn contains(&self, addr: CellAddr) -> bool {
        addr.layer < self.layer_count
    }

    pub fn cell(&self, addr: CellAddr) -> &FunctionCell {
        &self.cells[addr.flat_index()]
    }

    pub fn cell_mut(&mut self, addr: CellAddr) -> &mut FunctionCell {
        &mut self.cells[addr.flat_index()]
    }

    /// Cells in deterministic (layer, kind, side, index) order.
    pub fn cells(&self) -> impl Iterator<Item = &FunctionCell> {
        self.cells.iter()
    }

    pub fn cells_mut(&mut self) -> impl Iterator<Item = &mut FunctionCell> {
        self.cells.iter_mut()
    }

    pub fn addrs(&self) -> Vec<CellAddr> {
        self.cells.iter().map(|c| c.addr).collect()
    }

    pub fn cell_by_flat(&self, flat: usize) -> &FunctionCell {
        &self.cells[flat]
    }

    pub fn cell_by_flat_mut(&mut self, flat: usize) -> &mut FunctionCell {
        &mut self.cells[flat]
    }

    /// Store a genetic code in a cell's configuration memory. For T cells
    /// the slot must name a same-side B-cell index; B cells hold one code.
    pub fn load_code(
        &mut self,
        addr: CellAddr,
        slot: usize,
        code: GeneticCode,
    ) -> Result<(), String> {
        if !self.contains(addr) {
            return Err(format!("unknown cell address {addr}"));
        }
        let max_slot = match addr.kind {
            CellKind::B => 1,
            CellKind::T => SUBLAYER_WIDTH as usize,
            CellKind::StemUnit => SUBLAYER_WIDTH as usize,
        };
        if slot >= max_slot {
            return Err(format!("slot {slot} out of range for {addr}"));
        }
        self.cell_mut(addr).codes[slot] = Some(code);
        Ok(())
    }

    /// Line-oriented snapshot for golden-file tests: address, mode, active
    /// opcode, consecutive-mismatch counter, active slot.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            let op = cell
                .active_code()
                .map(|c| c.op.name())
                .unwrap_or("-");
            let slot = cell
                .active_slot
                .map(|s| s.to_string())
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{},{:?},{},{},{}\n",
                cell.addr, cell.mode, op, cell.mismatch_run, slot
            ));
        }
        out
    }
}
