//! One functional cell: four HRU input stages, a duplicated generic
//! function block with output comparison, configuration memory, and the
//! firing pipeline.
//!
//! A firing spans 7 half-ticks (3.5 clock cycles at 10 ns per cycle); the
//! done edge latches the output and the next firing begins one half-tick
//! later, so an executing cell completes a firing every 8 half-ticks.

use crate::blocks::{eval_block, BlockState, PiGains};
use crate::fabric::{CellAddr, GeneticCode};
use crate::hru::HruState;
use crate::word::Word;

/// Half-ticks from firing begin to the done edge.
pub const EXEC_HALF_TICKS: u64 = 7;
/// Full firing round, begin to next begin.
pub const ROUND_HALF_TICKS: u64 = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellMode {
    /// Executing its own application function (B cells).
    Active,
    /// Waiting spare (T cells, undifferentiated stem units).
    Passive,
    /// Deactivated after a permanent fault; drives no output.
    Dead,
    /// Spare that has assumed a dead cell's role.
    Healing,
}

/// Output-stage stuck-at fault: bits in `force_zero` read 0, bits in
/// `force_one` read 1.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct StuckMask {
    pub force_zero: u16,
    pub force_one: u16,
}

impl StuckMask {
    pub fn apply(&self, v: Word) -> Word {
        Word((v.0 & !self.force_zero) | self.force_one)
    }

    pub fn is_noop(&self) -> bool {
        self.force_zero == 0 && self.force_one == 0
    }
}

/// One copy of the duplicated generic function block.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct GfbUnit {
    pub state: BlockState,
    /// Installed permanent fault, if any.
    pub stuck: Option<StuckMask>,
    /// Raw (pre-mask) value of the last completed firing.
    pub last_raw: Word,
}

impl GfbUnit {
    pub fn masked_out(&self) -> Word {
        match self.stuck {
            Some(m) => m.apply(self.last_raw),
            None => self.last_raw,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionCell {
    pub addr: CellAddr,
    pub mode: CellMode,
    /// Input register stages, one per input: North, West, East, South.
    pub hrus: [HruState; 4],
    pub gfb_primary: GfbUnit,
    pub gfb_shadow: GfbUnit,
    /// Consecutive firings on which the two copies disagreed.
    pub mismatch_run: u32,
    /// Latched permanent-error flag, raised when the run reaches K.
    pub flagged: bool,
    /// Configuration memory. B cells use slot 0; T cells hold one slot per
    /// same-side B-cell index; stem units receive their code at
    /// differentiation.
    pub codes: Vec<Option<GeneticCode>>,
    pub active_slot: Option<usize>,
    /// Half-tick at which this cell started executing (its trigger), used
    /// to phase its firing rounds. None while passive or dead.
    pub anchor: Option<u64>,
    /// Inputs sampled at the current firing's begin.
    pub sampled: [Word; 4],
    /// Output latched at the most recent done edge. Dead cells hold zero.
    pub latched_out: Word,
    /// When healing, the dead cell whose first completed firing this cell
    /// still owes a completion event for.
    pub heal_completion_due: Option<CellAddr>,
}

impl FunctionCell {
    pub fn new(addr: CellAddr) -> FunctionCell {
        use crate::fabric::CellKind;
        let (mode, slots) = match addr.kind {
            CellKind::B => (CellMode::Passive, 1),
            CellKind::T => (CellMode::Passive, 4),
            CellKind::StemUnit => (CellMode::Passive, 4),
        };
        FunctionCell {
            addr,
            mode,
            hrus: Default::default(),
            gfb_primary: GfbUnit::default(),
            gfb_shadow: GfbUnit::default(),
            mismatch_run: 0,
            flagged: false,
            codes: vec![None; slots],
            active_slot: None,
            anchor: None,
            sampled: [Word::ZERO; 4],
            latched_out: Word::ZERO,
            heal_completion_due: None,
        }
    }

    /// Mode transition with the legality rules enforced. Legal moves:
    /// Active -> Dead, Passive -> Healing, Healing -> Dead.
    pub fn transition(&mut self, to: CellMode) {
        let legal = matches!(
            (self.mode, to),
            (CellMode::Active, CellMode::Dead)
                | (CellMode::Passive, CellMode::Healing)
                | (CellMode::Healing, CellMode::Dead)
        );
        assert!(legal, "illegal mode transition {:?} -> {:?} on {}", self.mode, to, self.addr);
        self.mode = to;
    }

    pub fn is_executing(&self) -> bool {
        matches!(self.mode, CellMode::Active | CellMode::Healing) && self.anchor.is_some()
    }

    pub fn active_code(&self) -> Option<&GeneticCode> {
        self.active_slot.and_then(|s| self.codes[s].as_ref())
    }

    /// True when a firing begins at this half-tick.
    pub fn begins_at(&self, half_tick: u64) -> bool {
        match self.anchor {
            Some(a) if self.is_executing() && half_tick >= a => {
                (half_tick - a) % ROUND_HALF_TICKS == 0
            }
            _ => false,
        }
    }

    /// True when a firing's done edge lands on this half-tick.
    pub fn completes_at(&self, half_tick: u64) -> bool {
        match self.anchor {
            Some(a) if self.is_executing() && half_tick >= a + EXEC_HALF_TICKS => {
                (half_tick - a) % ROUND_HALF_TICKS == EXEC_HALF_TICKS
            }
            _ => false,
        }
    }

    /// Run both GFB copies on the sampled inputs and latch the comparison.
    /// Returns (output, mismatch, permanent_error_flag_rose).
    pub fn complete_firing(&mut self, gains: &PiGains, k_threshold: u32) -> (Word, bool, bool) {
        let code = self
            .active_code()
            .unwrap_or_else(|| panic!("{} fired without an active code", self.addr))
            .clone();
        let n = code.op.arity();
        let inputs = &self.sampled[..n];

        let (raw_p, next_p) = eval_block(code.op, inputs, self.gfb_primary.state, gains);
        self.gfb_primary.state = next_p;
        self.gfb_primary.last_raw = raw_p;
        let (raw_s, next_s) = eval_block(code.op, inputs, self.gfb_shadow.state, gains);
        self.gfb_shadow.state = next_s;
        self.gfb_shadow.last_raw = raw_s;

        let out_p = self.gfb_primary.masked_out();
        let out_s = self.gfb_shadow.masked_out();
        let mismatch = out_p != out_s;
        let mut flag_rose = false;
        if mismatch {
            self.mismatch_run += 1;
            if self.mismatch_run >= k_threshold && !self.flagged {
                self.flagged = true;
                flag_rose = true;
            }
        } else {
            self.mismatch_run = 0;
        }
        // The cell drives the primary copy's (possibly corrupted) value.
        self.latched_out = out_p;
        (out_p, mismatch, flag_rose)
    }

    /// Reset execution state for a spare assuming a new role. HRUs start
    /// fresh; nothing is inherited from the dead cell.
    pub fn start_role(&mut self, slot: usize, anchor: u64) {
        assert!(self.codes[slot].is_some(), "{} has no code in slot {slot}", self.addr);
        self.transition(CellMode::Healing);
        self.active_slot = Some(slot);
        self.anchor = Some(anchor);
        self.hrus = Default::default();
        self.gfb_primary.state = BlockState::default();
        self.gfb_shadow.state = BlockState::default();
        self.gfb_primary.last_raw = Word::ZERO;
        self.gfb_shadow.last_raw = Word::ZERO;
        self.mismatch_run = 0;
        self.flagged = false;
        self.latched_out = Word::ZERO;
        self.sampled = [Word::ZERO; 4];
    }

    pub fn deactivate(&mut self) {
        self.transition(CellMode::Dead);
        self.anchor = None;
        self.latched_out = Word::ZERO;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::BlockOp;
    use crate::fabric::{Side, SignalSource};

    fn and_cell() -> FunctionCell {
        let mut cell = FunctionCell::new(CellAddr::b(0, Side::Left, 0));
        cell.codes[0] = Some(GeneticCode::new(
            BlockOp::And,
            &[
                SignalSource::External("a".into()),
                SignalSource::External("b".into()),
            ],
        ));
        cell.active_slot = Some(0);
        cell.mode = CellMode::Active;
        cell.anchor = Some(0);
        cell
    }

    #[test]
    fn firing_round_phasing() {
        let cell = and_cell();
        assert!(cell.begins_at(0));
        assert!(!cell.completes_at(0));
        assert!(cell.completes_at(7)); // 35 ns after begin
        assert!(cell.begins_at(8));
        assert!(cell.completes_at(15));
    }

    #[test]
    fn fault_free_and_cell_fires_clean() {
        let mut cell = and_cell();
        cell.sampled = [Word(1), Word(1), Word::ZERO, Word::ZERO];
        let (out, mismatch, flag) = cell.complete_firing(&PiGains::default(), 2);
        assert_eq!(out, Word(1));
        assert!(!mismatch);
        assert!(!flag);
        assert_eq!(cell.mismatch_run, 0);
    }

    #[test]
    fn stuck_primary_flags_after_k_firings() {
        let mut cell = and_cell();
        cell.gfb_primary.stuck = Some(StuckMask { force_zero: 0x0001, force_one: 0 });
        cell.sampled = [Word(1), Word(1), Word::ZERO, Word::ZERO];
        let (out, mismatch, flag) = cell.complete_firing(&PiGains::default(), 2);
        assert_eq!(out, Word(0)); // corrupted primary drives the output
        assert!(mismatch);
        assert!(!flag, "first mismatching firing must not flag at K=2");
        let (_, mismatch, flag) = cell.complete_firing(&PiGains::default(), 2);
        assert!(mismatch);
        assert!(flag, "second consecutive mismatch reaches K");
    }

    #[test]
    fn mismatch_run_resets_on_match() {
        let mut cell = and_cell();
        cell.gfb_primary.stuck = Some(StuckMask { force_zero: 0x0001, force_one: 0 });
        cell.sampled = [Word(1), Word(1), Word::ZERO, Word::ZERO];
        cell.complete_firing(&PiGains::default(), 3);
        assert_eq!(cell.mismatch_run, 1);
        // Mask is a no-op when the output is already 0: copies agree.
        cell.sampled = [Word(0), Word(1), Word::ZERO, Word::ZERO];
        cell.complete_firing(&PiGains::default(), 3);
        assert_eq!(cell.mismatch_run, 0);
    }

    // Identical permanent fault in both copies: comparison is blind to it.
    // This documents the known common-cause detection boundary.
    #[test]
    fn identical_ccf_in_both_copies_is_undetected() {
        let mut cell = and_cell();
        let mask = StuckMask { force_zero: 0x0001, force_one: 0 };
        cell.gfb_primary.stuck = Some(mask);
        cell.gfb_shadow.stuck = Some(mask);
        cell.sampled = [Word(1), Word(1), Word::ZERO, Word::ZERO];
        let (out, mismatch, flag) = cell.complete_firing(&PiGains::default(), 2);
        assert_eq!(out, Word(0)); // wrong value escapes
        assert!(!mismatch);
        assert!(!flag);
        let (_, mismatch, _) = cell.complete_firing(&PiGains::default(), 2);
        assert!(!mismatch);
    }

    // Enumerate all 2-input boolean cells x all single stuck-at masks on
    // bit 0: the flag must rise iff the mask changes the output for the
    // applied input pattern.
    #[test]
    fn dwc_soundness_over_boolean_cells_and_masks() {
        for op in [BlockOp::And, BlockOp::Or] {
            for a in 0..=1u16 {
                for b in 0..=1u16 {
                    for (fz, fo) in [(0x0001, 0), (0, 0x0001)] {
                        for target_primary in [true, false] {
                            let mut cell = and_cell();
                            cell.codes[0] = Some(GeneticCode::new(
                                op,
                                &[
                                    SignalSource::External("a".into()),
                                    SignalSource::External("b".into()),
                                ],
                            ));
                            let mask = StuckMask { force_zero: fz, force_one: fo };
                            if target_primary {
                                cell.gfb_primary.stuck = Some(mask);
                            } else {
                                cell.gfb_shadow.stuck = Some(mask);
                            }
                            cell.sampled = [Word(a), Word(b), Word::ZERO, Word::ZERO];
                            let clean = crate::blocks::eval_block(
                                op,
                                &[Word(a), Word(b)],
                                BlockState::default(),
                                &PiGains::default(),
                            )
                            .0;
                            let changes = mask.apply(clean) != clean;
                            let mut flagged = false;
                            for _ in 0..2 {
                                let (_, _, flag) = cell.complete_firing(&PiGains::default(), 2);
                                flagged |= flag;
                            }
                            assert_eq!(
                                flagged, changes,
                                "op={op:?} a={a} b={b} fz={fz:#x} fo={fo:#x}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "illegal mode transition")]
    fn dead_cell_cannot_go_active() {
        let mut cell = and_cell();
        cell.transition(CellMode::Dead);
        cell.transition(CellMode::Healing);
    }

    #[test]
    fn legal_transitions() {
        let mut b = and_cell();
        b.transition(CellMode::Dead);
        assert_eq!(b.mode, CellMode::Dead);

        let mut t = FunctionCell::new(CellAddr::t(0, Side::Left, 0));
        t.codes[0] = Some(GeneticCode::new(BlockOp::Not, &[SignalSource::Const(Word(0))]));
        t.start_role(0, 10);
        assert_eq!(t.mode, CellMode::Healing);
        assert!(t.begins_at(10));
        assert!(t.completes_at(17));
        t.transition(CellMode::Dead);
    }
}
