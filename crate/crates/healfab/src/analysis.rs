//! Resilience metrics and the four-architecture parametric comparator.
//!
//! Coverage is spares-available over the assumed maximum number of
//! permanent faults, capped at 1; area overhead is (spare + routing)
//! cells over functional cells. Both are computed as exact rationals and
//! rendered by truncation (4/12 prints 0.333, never 0.334).

use num_rational::Ratio;

use crate::trace::{RowKind, Trace};

pub type Exact = Ratio<u64>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("spf must be positive")]
    ZeroSpf,
    #[error("functional cell count must be positive")]
    ZeroFunctional,
    #[error("array width must be even and at least 2, got {0}")]
    OddWidth(u64),
}

/// Self-healing capacity coverage: min(scs / spf, 1).
pub fn coverage(scs: Exact, spf: u64) -> Result<Exact, MetricError> {
    if spf == 0 {
        return Err(MetricError::ZeroSpf);
    }
    let c = scs / Exact::from_integer(spf);
    Ok(c.min(Exact::from_integer(1)))
}

/// Area overhead in percent: (spares + routing) / functional * 100.
pub fn area_overhead(spares: Exact, routing: Exact, functional: Exact) -> Result<Exact, MetricError> {
    if functional == Exact::from_integer(0) {
        return Err(MetricError::ZeroFunctional);
    }
    Ok((spares + routing) / functional * Exact::from_integer(100))
}

/// Truncate an exact rational to three decimals; integers print bare.
pub fn render_exact(v: Exact) -> String {
    if v.is_integer() {
        return v.to_integer().to_string();
    }
    let scaled = (v * Exact::from_integer(1000)).to_integer(); // floor for non-negatives
    let whole = scaled / 1000;
    let frac = scaled % 1000;
    format!("{whole}.{frac:03}")
}

/// The compared self-repair strategies. All place N^2/2 functional cells
/// on an N x N array; they differ in spare and routing budgets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Architecture {
    /// This fabric: per-cell T spares plus stem execution units.
    Proposed,
    /// Spare-row elimination with dedicated re-routing cells.
    Rerouting,
    /// Gene-control style replacement, one spare per functional cell.
    GeneControl,
    /// Voting-by-majority TMR with a reduced spare pool.
    VotingTmr,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Proposed,
        Architecture::Rerouting,
        Architecture::GeneControl,
        Architecture::VotingTmr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Proposed => "proposed",
            Architecture::Rerouting => "re-routing",
            Architecture::GeneControl => "gene-control",
            Architecture::VotingTmr => "voting-tmr",
        }
    }

    pub fn functional_cells(self, n: u64) -> Exact {
        Ratio::new(n * n, 2)
    }

    pub fn spare_cells(self, n: u64) -> Exact {
        let n2 = n * n;
        match self {
            Architecture::Proposed => Ratio::new(n2, 2) + Ratio::new(n2, 4),
            Architecture::Rerouting => Ratio::new(n2, 4),
            Architecture::GeneControl => Ratio::new(n2, 2),
            Architecture::VotingTmr => Ratio::new(n2, 2) + Ratio::new(n2, 8),
        }
    }

    pub fn routing_cells(self, n: u64) -> Exact {
        match self {
            Architecture::Rerouting => Ratio::new(n * n, 2),
            _ => Exact::from_integer(0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ArchRow {
    pub name: &'static str,
    pub functional: Exact,
    pub spares: Exact,
    pub routing: Exact,
    pub coverage: Exact,
    pub overhead_percent: Exact,
}

/// Evaluate all four architectures on an N x N array under `spf` assumed
/// permanent faults.
pub fn architecture_table(n: u64, spf: u64) -> Result<Vec<ArchRow>, MetricError> {
    if n < 2 || n % 2 != 0 {
        return Err(MetricError::OddWidth(n));
    }
    Architecture::ALL
        .iter()
        .map(|&arch| {
            let functional = arch.functional_cells(n);
            let spares = arch.spare_cells(n);
            let routing = arch.routing_cells(n);
            Ok(ArchRow {
                name: arch.name(),
                functional,
                spares,
                routing,
                coverage: coverage(spares, spf)?,
                overhead_percent: area_overhead(spares, routing, functional)?,
            })
        })
        .collect()
}

/// Comma-separated coverage and overhead series over a range of even N,
/// one row per architecture per N.
pub fn comparison_series(n_values: &[u64], spf: u64) -> Result<String, MetricError> {
    let mut out = String::from("n,architecture,coverage,overhead_percent\n");
    for &n in n_values {
        for row in architecture_table(n, spf)? {
            out.push_str(&format!(
                "{n},{},{},{}\n",
                row.name,
                render_exact(row.coverage),
                render_exact(row.overhead_percent)
            ));
        }
    }
    Ok(out)
}

/// One permanent fault's recovery measurement extracted from a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovery {
    pub target: String,
    pub injected_ns: u64,
    /// Restore completion time; None when the fault was never healed.
    pub healed_ns: Option<u64>,
}

impl Recovery {
    pub fn latency_ns(&self) -> Option<u64> {
        self.healed_ns.map(|h| h - self.injected_ns)
    }
}

/// Pair permanent FAULT rows with heal-completion events by target
/// address, earliest first.
pub fn recovery_latency(trace: &Trace) -> Vec<Recovery> {
    let mut recoveries: Vec<Recovery> = Vec::new();
    for row in &trace.rows {
        match row.kind {
            RowKind::Fault if row.name == "permanent" || row.name == "ccf" => {
                for member in row.value.split('+') {
                    let target = member.split('|').next().unwrap_or(member);
                    let cell = target
                        .trim_end_matches(".gfb_primary")
                        .trim_end_matches(".gfb_shadow");
                    recoveries.push(Recovery {
                        target: cell.to_string(),
                        injected_ns: row.time_ns,
                        healed_ns: None,
                    });
                }
            }
            RowKind::Event if row.name == "heal_complete" => {
                if let Some(rec) = recoveries
                    .iter_mut()
                    .find(|r| r.target == row.value && r.healed_ns.is_none())
                {
                    rec.healed_ns = Some(row.time_ns);
                }
            }
            _ => {}
        }
    }
    recoveries
}
