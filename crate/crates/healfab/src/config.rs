//! Scenario configuration files (TOML) and the reproducibility digest.
//!
//! A scenario names its netlist, stimulus, and optional fault schedule by
//! path (relative to the scenario file), pins the PI gains, the DWC
//! persistence threshold K, the property horizon, the per-layer trigger
//! times, and the run length. The digest covers the scenario file and
//! every referenced asset, and is embedded in trace metadata so stale
//! golden files are refused rather than silently diffed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::blocks::PiGains;
use crate::fabric::CellAddr;
use crate::faults::{parse_schedule, FaultSchedule};
use crate::netlist::{parse_netlist, Netlist};
use crate::place::{place, Mapping};
use crate::sim::{parse_stimulus, SimConfig, Simulation, Stimulus};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: String,
    netlist: String,
    stimulus: String,
    schedule: Option<String>,
    until_ns: u64,
    layers: u8,
    #[serde(default)]
    layer_triggers_ns: Vec<u64>,
    #[serde(default = "default_k")]
    k_threshold: u32,
    #[serde(default = "default_horizon")]
    horizon: u64,
    #[serde(default)]
    monitor: Vec<String>,
    gains: PiGains,
}

fn default_k() -> u32 {
    2
}

fn default_horizon() -> u64 {
    8
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// A fully loaded, validated scenario ready to simulate.
pub struct Scenario {
    pub id: String,
    pub netlist: Netlist,
    pub mapping: Mapping,
    pub stimulus: Stimulus,
    pub schedule: FaultSchedule,
    pub until_ns: u64,
    pub horizon: u64,
    pub sim_config: SimConfig,
    pub digest: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = read(path)?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| ScenarioError::Parse { path: path.into(), message: e.to_string() })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));

        let netlist_path = dir.join(&file.netlist);
        let netlist_text = read(&netlist_path)?;
        let netlist = parse_netlist(&netlist_text).map_err(|errors| ScenarioError::Parse {
            path: netlist_path.clone(),
            message: errors
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        })?;

        let stim_path = dir.join(&file.stimulus);
        let stim_text = read(&stim_path)?;
        let stimulus = parse_stimulus(&stim_text)
            .map_err(|e| ScenarioError::Parse { path: stim_path.clone(), message: e.to_string() })?;

        let (schedule, sched_text) = match &file.schedule {
            Some(rel) => {
                let sched_path = dir.join(rel);
                let sched_text = read(&sched_path)?;
                let schedule = parse_schedule(&sched_text).map_err(|e| ScenarioError::Parse {
                    path: sched_path.clone(),
                    message: e.to_string(),
                })?;
                (schedule, sched_text)
            }
            None => (FaultSchedule::default(), String::new()),
        };

        let mapping = place(&netlist, file.layers)
            .map_err(|e| ScenarioError::Parse { path: path.into(), message: e.to_string() })?;

        let monitor = file
            .monitor
            .iter()
            .map(|s| CellAddr::parse(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ScenarioError::Parse { path: path.into(), message: e })?;

        file.gains
            .validate()
            .map_err(|e| ScenarioError::Parse { path: path.into(), message: e })?;

        let digest = digest_parts(&[&text, &netlist_text, &stim_text, &sched_text]);

        Ok(Scenario {
            id: file.id,
            netlist,
            mapping,
            stimulus,
            schedule,
            until_ns: file.until_ns,
            horizon: file.horizon,
            sim_config: SimConfig {
                gains: file.gains,
                k_threshold: file.k_threshold,
                layer_triggers_ns: file.layer_triggers_ns,
                monitor,
            },
            digest,
        })
    }

    fn input_names(&self) -> Vec<String> {
        self.netlist.inputs.iter().map(|(n, _)| n.clone()).collect()
    }

    fn build(&self, schedule: FaultSchedule, mode: &str) -> Result<Simulation, ScenarioError> {
        let mut sim = Simulation::new(
            &self.input_names(),
            &self.mapping,
            &self.stimulus,
            schedule,
            self.sim_config.clone(),
        )
        .map_err(|m| ScenarioError::Parse { path: PathBuf::from(&self.id), message: m })?;
        sim.trace.meta.push(("scenario".into(), self.id.clone()));
        sim.trace.meta.push(("mode".into(), mode.into()));
        sim.trace.meta.push(("seed".into(), "-".into()));
        sim.trace.meta.push(("config_digest".into(), self.digest.clone()));
        Ok(sim)
    }

    /// Run the scenario with its fault schedule.
    pub fn run(&self) -> Result<Simulation, ScenarioError> {
        let mut sim = self.build(self.schedule.clone(), "run")?;
        sim.run(self.until_ns);
        Ok(sim)
    }

    /// Run the fault-free reference.
    pub fn golden(&self) -> Result<Simulation, ScenarioError> {
        let mut sim = self.build(FaultSchedule::default(), "golden")?;
        sim.run(self.until_ns);
        Ok(sim)
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.into(), message: e.to_string() })
}

/// FNV-1a over the concatenated asset bytes; enough to catch any drift
/// between a committed trace and the scenario that produced it.
pub fn digest_parts(parts: &[&str]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for part in parts {
        for b in part.bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash ^= 0x1f;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
