//! Fault models and schedule parsing.
//!
//! Schedule files are line-oriented `time_ns,kind,target,payload` with
//! `#` comments. Transients name one replica register of one HRU and
//! carry an XOR flip mask; permanents name one GFB copy and carry a
//! stuck-at mask; a CCF applies several permanent members atomically at
//! one instant (`+`-joined targets).

use std::fmt;

use crate::cell::StuckMask;
use crate::fabric::{CellAddr, CellKind};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GfbCopy {
    Primary,
    Shadow,
}

impl GfbCopy {
    pub fn name(self) -> &'static str {
        match self {
            GfbCopy::Primary => "gfb_primary",
            GfbCopy::Shadow => "gfb_shadow",
        }
    }
}

/// A permanent stuck-at on one GFB copy of one cell.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GfbTarget {
    pub cell: CellAddr,
    pub copy: GfbCopy,
}

impl fmt::Display for GfbTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.cell, self.copy.name())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FaultKind {
    /// One-cycle upset of a single replica register of one HRU.
    TransientReg { cell: CellAddr, hru: usize, replica: usize, flip: u16 },
    /// Stuck-at mask installed forever on one GFB copy.
    PermanentGfb { target: GfbTarget, mask: StuckMask },
    /// Common-cause failure: several permanent members at one instant.
    Ccf { members: Vec<(GfbTarget, StuckMask)> },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fault {
    pub id: usize,
    pub time_ns: u64,
    pub kind: FaultKind,
}

impl Fault {
    /// Individually countable injections (CCF members count one each).
    pub fn member_count(&self) -> usize {
        match &self.kind {
            FaultKind::Ccf { members } => members.len(),
            _ => 1,
        }
    }

    pub fn describe(&self) -> (String, String) {
        match &self.kind {
            FaultKind::TransientReg { cell, hru, replica, flip } => (
                "transient".to_string(),
                format!("{cell}.hru{hru}.rep{replica}|flip:{flip:#x}"),
            ),
            FaultKind::PermanentGfb { target, mask } => {
                ("permanent".to_string(), format!("{target}|{}", mask_text(mask)))
            }
            FaultKind::Ccf { members } => {
                let parts: Vec<String> =
                    members.iter().map(|(t, m)| format!("{t}|{}", mask_text(m))).collect();
                ("ccf".to_string(), parts.join("+"))
            }
        }
    }
}

fn mask_text(m: &StuckMask) -> String {
    if m.force_one != 0 {
        format!("stuck1:{:#x}", m.force_one)
    } else {
        format!("stuck0:{:#x}", m.force_zero)
    }
}

#[derive(Clone, Debug, Default)]
pub struct FaultSchedule {
    pub faults: Vec<Fault>,
}

impl FaultSchedule {
    pub fn total_members(&self) -> usize {
        self.faults.iter().map(|f| f.member_count()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schedule line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ScheduleError {}

pub fn parse_schedule(text: &str) -> Result<FaultSchedule, ScheduleError> {
    let mut faults = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(4, ',').map(|f| f.trim()).collect();
        if fields.len() != 4 {
            return Err(fail(lineno, "expected `time_ns,kind,target,payload`"));
        }
        let time_ns: u64 =
            fields[0].parse().map_err(|_| fail(lineno, "malformed time"))?;
        if time_ns % 5 != 0 {
            return Err(fail(lineno, "time not multiple of 5"));
        }
        let kind = match fields[1] {
            "transient" => {
                let (cell, hru, replica) = parse_replica_target(fields[2], lineno)?;
                let flip = parse_payload(fields[3], "flip", lineno)?;
                if flip == 0 {
                    return Err(fail(lineno, "transient flip mask must be nonzero"));
                }
                FaultKind::TransientReg { cell, hru, replica, flip }
            }
            "permanent" => {
                let target = parse_gfb_target(fields[2], lineno)?;
                let mask = parse_stuck(fields[3], lineno)?;
                FaultKind::PermanentGfb { target, mask }
            }
            "ccf" => {
                let members: Vec<&str> = fields[2].split('+').map(|t| t.trim()).collect();
                if members.len() < 2 {
                    return Err(fail(lineno, "ccf needs at least two `+`-joined targets"));
                }
                let mask = parse_stuck(fields[3], lineno)?;
                let members = members
                    .iter()
                    .map(|t| parse_gfb_target(t, lineno).map(|tg| (tg, mask)))
                    .collect::<Result<Vec<_>, _>>()?;
                FaultKind::Ccf { members }
            }
            other => return Err(fail(lineno, &format!("malformed kind `{other}`"))),
        };
        faults.push(Fault { id: faults.len(), time_ns, kind });
    }
    faults.sort_by_key(|f| (f.time_ns, f.id));
    Ok(FaultSchedule { faults })
}

fn parse_replica_target(
    s: &str,
    lineno: usize,
) -> Result<(CellAddr, usize, usize), ScheduleError> {
    // e.g. L.B0.hru1.rep2 or L.S0.u1.hru0.rep0, with optional @layer
    let Some(hru_pos) = s.find(".hru") else {
        return Err(fail(lineno, "transient target needs `.hruN.repM`"));
    };
    let (addr_part, rest) = s.split_at(hru_pos);
    let cell = parse_cell(addr_part, lineno)?;
    let rest = &rest[1..]; // strip leading '.'
    let Some((hru_part, rep_part)) = rest.split_once('.') else {
        return Err(fail(lineno, "transient target needs `.hruN.repM`"));
    };
    let hru: usize = hru_part
        .strip_prefix("hru")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| fail(lineno, "bad hru index"))?;
    let replica: usize = rep_part
        .strip_prefix("rep")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| fail(lineno, "bad replica index"))?;
    if hru > 3 || replica > 2 {
        return Err(fail(lineno, "hru/replica index out of range"));
    }
    Ok((cell, hru, replica))
}

fn parse_gfb_target(s: &str, lineno: usize) -> Result<GfbTarget, ScheduleError> {
    let (addr_part, copy) = if let Some(p) = s.strip_suffix(".gfb_primary") {
        (p, GfbCopy::Primary)
    } else if let Some(p) = s.strip_suffix(".gfb_shadow") {
        (p, GfbCopy::Shadow)
    } else {
        return Err(fail(lineno, "permanent target needs `.gfb_primary` or `.gfb_shadow`"));
    };
    let cell = parse_cell(addr_part, lineno)?;
    Ok(GfbTarget { cell, copy })
}

fn parse_cell(s: &str, lineno: usize) -> Result<CellAddr, ScheduleError> {
    let cell = CellAddr::parse(s).map_err(|e| fail(lineno, &format!("unknown address: {e}")))?;
    // Healing-layer internals are not injectable; the address space itself
    // only covers critical-layer cells and stem units, which is the whole
    // injectable surface.
    let _ = CellKind::B;
    Ok(cell)
}

fn parse_payload(s: &str, key: &str, lineno: usize) -> Result<u16, ScheduleError> {
    let Some(value) = s.strip_prefix(key).and_then(|v| v.strip_prefix(':')) else {
        return Err(fail(lineno, &format!("payload must be `{key}:0xMASK`")));
    };
    parse_u16(value).ok_or_else(|| fail(lineno, "bad mask value"))
}

fn parse_stuck(s: &str, lineno: usize) -> Result<StuckMask, ScheduleError> {
    if let Some(v) = s.strip_prefix("stuck0:") {
        let mask = parse_u16(v).ok_or_else(|| fail(lineno, "bad mask value"))?;
        Ok(StuckMask { force_zero: mask, force_one: 0 })
    } else if let Some(v) = s.strip_prefix("stuck1:") {
        let mask = parse_u16(v).ok_or_else(|| fail(lineno, "bad mask value"))?;
        Ok(StuckMask { force_zero: 0, force_one: mask })
    } else {
        Err(fail(lineno, "payload must be `stuck0:0xMASK` or `stuck1:0xMASK`"))
    }
}

fn parse_u16(s: &str) -> Option<u16> {
    if let Some(hex) = s.strip_prefix("0x") {
        u16::from_str_radix(hex, 16).ok()
    } else {
        s.parse().ok()
    }
}

fn fail(line: usize, message: &str) -> ScheduleError {
    ScheduleError { line, message: message.to_string() }
}
