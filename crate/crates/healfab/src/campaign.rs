//! Multi-scenario fault-injection campaign runner.
//!
//! Each scenario runs against its golden twin; the report aggregates
//! injection counts, heal latencies, and a golden-equivalence verdict.
//! Scenarios are independent, and the report rows merge in scenario-id
//! order, so the output is deterministic regardless of execution order.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::recovery_latency;
use crate::config::{Scenario, ScenarioError};
use crate::sim::signals_equal_filtered;
use crate::trace::RowKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioReport {
    pub id: String,
    pub injected: usize,
    pub masked: usize,
    pub healed: usize,
    pub unhealed: usize,
    pub heal_latencies_ns: Vec<u64>,
    pub golden_equivalent: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CampaignReport {
    pub scenarios: Vec<ScenarioReport>,
    /// Scenario-level load or config errors, reported without aborting the
    /// rest of the campaign.
    pub errors: Vec<(String, String)>,
}

impl CampaignReport {
    /// Fixed-header CSV suitable for diff-based tests.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("scenario,injected,masked,healed,unhealed,heal_latencies_ns,golden_equivalent\n");
        for s in &self.scenarios {
            let latencies: Vec<String> =
                s.heal_latencies_ns.iter().map(|l| l.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.id,
                s.injected,
                s.masked,
                s.healed,
                s.unhealed,
                latencies.join(";"),
                if s.golden_equivalent { "yes" } else { "no" }
            )
            .unwrap();
        }
        for (id, err) in &self.errors {
            writeln!(out, "{id},error,{err},,,,").unwrap();
        }
        out
    }
}

/// Run one loaded scenario against its golden twin and reduce to a row.
pub fn run_scenario_report(scenario: &Scenario) -> Result<ScenarioReport, ScenarioError> {
    let faulted = scenario.run()?;
    let golden = scenario.golden()?;
    let tally = faulted.tally();

    // Equivalence of the application's output ports, judged after the last
    // heal's effect has flushed through the block pipeline; from t=0 when
    // nothing was healed.
    let last_heal = faulted
        .trace
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Event && r.name == "heal_complete")
        .map(|r| r.time_ns)
        .max();
    let from_ns = match last_heal {
        Some(t) => t + scenario.netlist.flush_rounds() * 40,
        None => 0,
    };
    let ports: Vec<String> = faulted.output_names();
    let golden_equivalent =
        signals_equal_filtered(&faulted.trace, &golden.trace, from_ns, Some(&ports));

    let recoveries = recovery_latency(&faulted.trace);
    let heal_latencies_ns: Vec<u64> =
        recoveries.iter().filter_map(|r| r.latency_ns()).collect();

    Ok(ScenarioReport {
        id: scenario.id.clone(),
        injected: tally.injected,
        masked: tally.masked,
        healed: tally.healed,
        unhealed: tally.unhealed,
        heal_latencies_ns,
        golden_equivalent,
    })
}

/// Load and run every scenario path; per-scenario failures become report
/// errors instead of aborting the campaign.
pub fn run_campaign(paths: &[&Path]) -> CampaignReport {
    let mut report = CampaignReport::default();
    for path in paths {
        match Scenario::load(path) {
            Ok(scenario) => match run_scenario_report(&scenario) {
                Ok(row) => report.scenarios.push(row),
                Err(e) => report.errors.push((path.display().to_string(), e.to_string())),
            },
            Err(e) => report.errors.push((path.display().to_string(), e.to_string())),
        }
    }
    report.scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    report.errors.sort();
    report
}
