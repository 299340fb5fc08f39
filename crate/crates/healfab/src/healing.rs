//! The healing layer: failure monitoring, health-syndrome formation,
//! syndrome switching, and stem-unit differentiation.
//!
//! A flagged B cell is healed by the lowest-index free T cell on its own
//! side (cell death, reorganisation, restoration). A flagged T-role
//! holder escalates to the stem tier: the forming-health-syndrome unit
//! picks the lowest free same-side stem execution unit, the switching
//! circuit consumes that syndrome, and the unit differentiates into the
//! failed role. Side locality is strict; each layer carries its own
//! eight-syndrome space.

use std::collections::BTreeSet;

use crate::cell::CellMode;
use crate::fabric::{CellAddr, CellKind, Fabric, GeneticCode, Side};

/// 3-bit health syndrome selecting one of the eight stem execution units
/// of a layer. LEFT owns {0, 1, 4, 5} (S0.u0, S0.u1, S2.u0, S2.u1); RIGHT
/// owns {2, 3, 6, 7} (S1.u0, S1.u1, S3.u0, S3.u1).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Syndrome(pub u8);

impl Syndrome {
    pub fn unit(self, layer: u8) -> CellAddr {
        assert!(self.0 < 8, "syndrome out of range");
        let (cell, unit) = (self.0 / 2, self.0 % 2);
        let side = if cell % 2 == 0 { Side::Left } else { Side::Right };
        // Unit index within the sublayer: S0/S1 hold units 0-1, S2/S3 2-3.
        let index = (cell / 2) * 2 + unit;
        CellAddr::stem(layer, side, index)
    }

    pub fn of_unit(addr: CellAddr) -> Syndrome {
        assert_eq!(addr.kind, CellKind::StemUnit);
        let (cell, unit) = addr.stem_cell_and_unit();
        Syndrome(cell * 2 + unit)
    }

    pub fn side(self) -> Side {
        if (self.0 / 2) % 2 == 0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ActionKind {
    Deactivate,
    Reroute,
    Restore,
    Differentiate,
}

impl ActionKind {
    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Deactivate => "DEACTIVATE",
            ActionKind::Reroute => "REROUTE",
            ActionKind::Restore => "RESTORE",
            ActionKind::Differentiate => "DIFFERENTIATE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct HealingAction {
    pub kind: ActionKind,
    pub subject: CellAddr,
    pub object: Option<CellAddr>,
    pub code_slot: Option<usize>,
    pub time_ns: u64,
}

/// Command produced by the syndrome switching circuit: which unit
/// differentiates, the code it expresses, and whose role it assumes.
#[derive(Clone, Debug)]
pub struct DifferentiationCommand {
    pub syndrome: Syndrome,
    pub unit: CellAddr,
    pub role_of: CellAddr,
    pub code: GeneticCode,
}

/// A resolved heal: the substitute chosen for a failed cell.
#[derive(Clone, Debug)]
pub enum HealPlan {
    /// First tier: a same-side T cell takes over via its stored code slot.
    ToSpare { failed: CellAddr, spare: CellAddr, slot: usize },
    /// Second/third tier: a stem execution unit differentiates.
    ToStem { failed: CellAddr, cmd: DifferentiationCommand },
}

impl HealPlan {
    pub fn failed(&self) -> CellAddr {
        match self {
            HealPlan::ToSpare { failed, .. } | HealPlan::ToStem { failed, .. } => *failed,
        }
    }

    pub fn substitute(&self) -> CellAddr {
        match self {
            HealPlan::ToSpare { spare, .. } => *spare,
            HealPlan::ToStem { cmd, .. } => cmd.unit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HealError {
    #[error("no spare capacity left for {0}")]
    CapacityExhausted(CellAddr),
    #[error("stale error flag from already-dead cell {0}")]
    StaleFlag(CellAddr),
    #[error("syndrome {0} not available")]
    SyndromeUnavailable(u8),
}

/// Healing-layer bookkeeping for one simulation.
#[derive(Clone, Debug, Default)]
pub struct HealingLayerState {
    /// Cells whose permanent-error flag has been latched.
    pub latched: BTreeSet<CellAddr>,
    /// Syndromes already consumed (differentiated units), per whole run.
    pub used_syndromes: BTreeSet<(u8, Syndrome)>,
    /// Spares currently claimed by an in-flight or applied heal.
    pub claimed: BTreeSet<CellAddr>,
    /// Failures that could not be healed.
    pub unhealed: Vec<CellAddr>,
    /// Append-only, time-ordered action log.
    pub action_log: Vec<HealingAction>,
}

impl HealingLayerState {
    /// Available syndromes on a side of a layer, lowest first.
    pub fn free_syndromes(&self, fabric: &Fabric, layer: u8, side: Side) -> Vec<Syndrome> {
        (0..8)
            .map(Syndrome)
            .filter(|s| s.side() == side)
            .filter(|s| !self.used_syndromes.contains(&(layer, *s)))
            .filter(|s| {
                let unit = s.unit(layer);
                fabric.cell(unit).mode == CellMode::Passive && !self.claimed.contains(&unit)
            })
            .collect()
    }

    /// The forming-health-syndrome unit: lowest free same-side syndrome
    /// for a failed T-role cell.
    pub fn form_syndrome(
        &self,
        fabric: &Fabric,
        failed: CellAddr,
    ) -> Result<Syndrome, HealError> {
        self.free_syndromes(fabric, failed.layer, failed.side)
            .first()
            .copied()
            .ok_or(HealError::CapacityExhausted(failed))
    }

    /// The syndrome switching circuit: consume `selector` and emit the
    /// differentiation command. The selector must still be available.
    pub fn switch_syndrome(
        &mut self,
        fabric: &Fabric,
        selector: Syndrome,
        role_of: CellAddr,
        code: GeneticCode,
    ) -> Result<DifferentiationCommand, HealError> {
        let layer = role_of.layer;
        let available = self.free_syndromes(fabric, layer, selector.side());
        if !available.contains(&selector) {
            return Err(HealError::SyndromeUnavailable(selector.0));
        }
        assert_eq!(
            selector.side(),
            role_of.side,
            "differentiation must stay on the failed cell's side"
        );
        self.used_syndromes.insert((layer, selector));
        Ok(DifferentiationCommand { syndrome: selector, unit: selector.unit(layer), role_of, code })
    }

    /// Resolve the substitute for one newly flagged cell, claiming it.
    ///
    /// B cells go to the lowest-index free same-side T cell; if none is
    /// free (or the failed cell already holds a spare role) the failure
    /// escalates to the stem tier.
    pub fn plan_heal(&mut self, fabric: &Fabric, failed: CellAddr) -> Result<HealPlan, HealError> {
        let cell = fabric.cell(failed);
        if cell.mode == CellMode::Dead {
            return Err(HealError::StaleFlag(failed));
        }
        let code = cell
            .active_code()
            .expect("flagged cell must be executing a code")
            .clone();

        let first_tier = failed.kind == CellKind::B && cell.mode == CellMode::Active;
        if first_tier {
            for index in 0..4 {
                let spare = CellAddr::t(failed.layer, failed.side, index);
                let candidate = fabric.cell(spare);
                if candidate.mode == CellMode::Passive && !self.claimed.contains(&spare) {
                    let slot = failed.index as usize;
                    self.claimed.insert(spare);
                    return Ok(HealPlan::ToSpare { failed, spare, slot });
                }
            }
            // No T cell free at the moment of a B failure: fall through to
            // the stem tier.
        }
        let syndrome = self.form_syndrome(fabric, failed)?;
        let cmd = self.switch_syndrome(fabric, syndrome, failed, code)?;
        self.claimed.insert(cmd.unit);
        Ok(HealPlan::ToStem { failed, cmd })
    }
}
