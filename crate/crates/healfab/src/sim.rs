//! Discrete-time engine: half-tick clock, lockstep stepping of the
//! critical and healing layers, stimulus application, fault injection,
//! and trace recording.
//!
//! One half-tick is 5 ns (the clock cycle is 10 ns). Within a half-tick
//! the phase order is fixed, and determinism depends on it:
//!
//!   1. apply stimulus edges due now
//!   2. apply scheduled fault injections due now
//!   3. HRU stage for every executing cell; firing begins sample inputs
//!   4. GFB firings complete on their done edge and latch outputs
//!   5. DWC comparison evaluated at each done edge (folded into 4)
//!   6. healing monitor latches new permanent-error flags
//!   7. healing actions due this half-tick are applied
//!   8. output ports latched
//!   9. trace rows appended
//!
//! Newly raised flags fire their action triple HEAL_PIPELINE_HALF_TICKS
//! later; the substitute cell begins executing the moment the actions
//! apply, so a heal completes one full execution after the actions.

use std::collections::BTreeMap;
use std::fmt;

use crate::blocks::PiGains;
use crate::cell::CellMode;
use crate::fabric::{CellAddr, Fabric, SignalSource};
use crate::faults::{Fault, FaultKind, FaultSchedule, GfbCopy};
use crate::healing::{ActionKind, HealError, HealPlan, HealingAction, HealingLayerState};
use crate::hru::{hru_step, HruOutcome};
use crate::place::Mapping;
use crate::routing::RoutingState;
use crate::trace::{RowKind, Trace};
use crate::word::Word;

pub const NS_PER_HALF_TICK: u64 = 5;
/// Half-ticks from a permanent-error flag to its action triple: the
/// failure monitor, syndrome former, and switching circuit respond within
/// one cell-execution time.
pub const HEAL_PIPELINE_HALF_TICKS: u64 = 7;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub gains: PiGains,
    pub k_threshold: u32,
    /// Per-layer trigger times in nanoseconds (multiples of 5); layers
    /// beyond the list trigger at 0.
    pub layer_triggers_ns: Vec<u64>,
    /// Cells whose input-latch, done, and output signals are traced.
    pub monitor: Vec<CellAddr>,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig {
            gains: PiGains::default(),
            k_threshold: 2,
            layer_triggers_ns: Vec::new(),
            monitor: Vec::new(),
        }
    }
}

/// Piecewise-constant external input series.
#[derive(Clone, Debug, Default)]
pub struct Stimulus {
    /// (time_ns, port, value), sorted by time then input order.
    pub entries: Vec<(u64, String, Word)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StimulusError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for StimulusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stimulus line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for StimulusError {}

pub fn parse_stimulus(text: &str) -> Result<Stimulus, StimulusError> {
    let mut entries = Vec::new();
    let mut last_per_port: BTreeMap<String, u64> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, ',').map(|f| f.trim()).collect();
        if fields.len() != 3 {
            return Err(StimulusError { line: lineno, message: "expected `time_ns,port,value`".into() });
        }
        let time: u64 = fields[0]
            .parse()
            .map_err(|_| StimulusError { line: lineno, message: "malformed time".into() })?;
        if time % NS_PER_HALF_TICK != 0 {
            return Err(StimulusError { line: lineno, message: "time not multiple of 5".into() });
        }
        let value: u16 = fields[2]
            .parse()
            .map_err(|_| StimulusError { line: lineno, message: "malformed value".into() })?;
        let port = fields[1].to_string();
        match last_per_port.get(&port) {
            None => {
                if time != 0 {
                    return Err(StimulusError {
                        line: lineno,
                        message: format!("first entry for `{port}` must be at t=0"),
                    });
                }
            }
            Some(&prev) if time <= prev => {
                return Err(StimulusError {
                    line: lineno,
                    message: format!("times for `{port}` must be strictly increasing"),
                });
            }
            _ => {}
        }
        last_per_port.insert(port.clone(), time);
        entries.push((time, port, Word(value)));
    }
    entries.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(Stimulus { entries })
}

#[derive(Clone, Debug)]
enum Compiled {
    Ext(usize),
    Cell(usize),
    Const(Word),
    Unused,
}

#[derive(Clone, Debug)]
enum PendingHeal {
    Heal(HealPlan),
    DeactivateOnly(CellAddr),
}

#[derive(Clone, Debug)]
struct PermanentRecord {
    cell: CellAddr,
    time_ns: u64,
    healed_at_ns: Option<u64>,
}

/// Per-run fault accounting, aggregated by the campaign runner.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultTally {
    pub injected: usize,
    pub masked: usize,
    pub healed: usize,
    pub unhealed: usize,
    pub heal_latencies_ns: Vec<u64>,
}

pub struct Simulation {
    half_tick: u64,
    fabric: Fabric,
    routing: RoutingState,
    healing: HealingLayerState,
    config: SimConfig,
    port_names: Vec<String>,
    port_values: Vec<Word>,
    stim: Vec<(u64, usize, Word)>,
    stim_cursor: usize,
    schedule: Vec<Fault>,
    sched_cursor: usize,
    compiled: Vec<[Compiled; 4]>,
    pending_heals: Vec<(u64, PendingHeal)>,
    out_last: BTreeMap<String, Word>,
    monitored_last: BTreeMap<String, Word>,
    transient_watch: Vec<(usize, usize)>,
    permanents: Vec<PermanentRecord>,
    transients_masked: usize,
    transients_unmasked: usize,
    no_effect: usize,
    pub trace: Trace,
}

impl Simulation {
    pub fn new(
        netlist_inputs: &[String],
        mapping: &Mapping,
        stimulus: &Stimulus,
        schedule: FaultSchedule,
        config: SimConfig,
    ) -> Result<Simulation, String> {
        let mut fabric = Fabric::new(mapping.layer_count);
        let triggers_ht: Vec<u64> = (0..mapping.layer_count as usize)
            .map(|layer| {
                let ns = config.layer_triggers_ns.get(layer).copied().unwrap_or(0);
                assert!(ns % NS_PER_HALF_TICK == 0, "trigger times must be multiples of 5 ns");
                ns / NS_PER_HALF_TICK
            })
            .collect();
        mapping.configure(&mut fabric, &triggers_ht);

        let port_names: Vec<String> = netlist_inputs.to_vec();
        // Every input port needs a t=0 stimulus entry.
        for name in &port_names {
            if !stimulus.entries.iter().any(|(t, p, _)| *t == 0 && p == name) {
                return Err(format!("stimulus does not initialize input `{name}` at t=0"));
            }
        }
        for (_, p, _) in &stimulus.entries {
            if !port_names.contains(p) {
                return Err(format!("stimulus drives unknown input `{p}`"));
            }
        }
        let port_index: BTreeMap<&str, usize> =
            port_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let stim: Vec<(u64, usize, Word)> = stimulus
            .entries
            .iter()
            .map(|(t, p, v)| (*t, port_index[p.as_str()], *v))
            .collect();

        for cell in config.monitor.iter() {
            if !fabric.contains(*cell) {
                return Err(format!("monitored cell {cell} is outside the fabric"));
            }
        }

        let mut sim = Simulation {
            half_tick: 0,
            fabric,
            routing: mapping.routing.clone(),
            healing: HealingLayerState::default(),
            config,
            port_values: vec![Word::ZERO; port_names.len()],
            port_names,
            stim,
            stim_cursor: 0,
            schedule: schedule.faults,
            sched_cursor: 0,
            compiled: Vec::new(),
            pending_heals: Vec::new(),
            out_last: BTreeMap::new(),
            monitored_last: BTreeMap::new(),
            transient_watch: Vec::new(),
            permanents: Vec::new(),
            transients_masked: 0,
            transients_unmasked: 0,
            no_effect: 0,
            trace: Trace::default(),
        };
        sim.recompile();
        sim.emit_initial_rows();
        Ok(sim)
    }

    pub fn time_ns(&self) -> u64 {
        self.half_tick * NS_PER_HALF_TICK
    }

    pub fn fabric(&self) -> &Fabric {
        &self.fabric
    }

    pub fn routing(&self) -> &RoutingState {
        &self.routing
    }

    pub fn healing(&self) -> &HealingLayerState {
        &self.healing
    }

    /// Current value of an external output port.
    pub fn output(&self, name: &str) -> Option<Word> {
        self.routing.outputs.get(name).map(|src| self.resolve_source(src))
    }

    pub fn output_names(&self) -> Vec<String> {
        self.routing.outputs.keys().cloned().collect()
    }

    fn resolve_source(&self, src: &SignalSource) -> Word {
        match src {
            SignalSource::External(p) => {
                match self.port_names.iter().position(|n| n == p) {
                    Some(i) => self.port_values[i],
                    None => Word::ZERO,
                }
            }
            SignalSource::Cell(a) => self.fabric.cell(*a).latched_out,
            SignalSource::Const(w) => *w,
            SignalSource::Unused => Word::ZERO,
        }
    }

    fn recompile(&mut self) {
        let mut compiled = vec![
            [Compiled::Unused, Compiled::Unused, Compiled::Unused, Compiled::Unused];
            self.fabric.cells().count()
        ];
        for (addr, sources) in &self.routing.inputs {
            let mut slots =
                [Compiled::Unused, Compiled::Unused, Compiled::Unused, Compiled::Unused];
            for (i, src) in sources.iter().enumerate() {
                slots[i] = match src {
                    SignalSource::External(p) => {
                        let idx = self
                            .port_names
                            .iter()
                            .position(|n| n == p)
                            .unwrap_or_else(|| panic!("unknown port `{p}` in routing"));
                        Compiled::Ext(idx)
                    }
                    SignalSource::Cell(a) => Compiled::Cell(a.flat_index()),
                    SignalSource::Const(w) => Compiled::Const(*w),
                    SignalSource::Unused => Compiled::Unused,
                };
            }
            compiled[addr.flat_index()] = slots;
        }
        self.compiled = compiled;
    }

    fn emit_initial_rows(&mut self) {
        let outs: Vec<(String, Word)> = self
            .routing
            .outputs
            .iter()
            .map(|(name, src)| (name.clone(), self.resolve_source(src)))
            .collect();
        for (name, v) in outs {
            self.trace.push(0, RowKind::Signal, name.clone(), v.to_string());
            self.out_last.insert(name, v);
        }
        for cell in self.config.monitor.clone() {
            for sig in ["lat0", "lat1", "lat2", "lat3", "done", "out"] {
                let name = format!("{cell}.{sig}");
                self.trace.push(0, RowKind::Signal, name.clone(), "0");
                self.monitored_last.insert(name, Word::ZERO);
            }
        }
    }

    fn record_monitored(&mut self, t: u64, name: String, value: Word) {
        if self.monitored_last.get(&name) != Some(&value) {
            self.trace.push(t, RowKind::Signal, name.clone(), value.to_string());
            self.monitored_last.insert(name, value);
        }
    }

    /// Advance one half-tick.
    pub fn step(&mut self) {
        let t = self.time_ns();

        // Phase 1: stimulus edges.
        while self.stim_cursor < self.stim.len() && self.stim[self.stim_cursor].0 == t {
            let (_, port, value) = self.stim[self.stim_cursor];
            self.port_values[port] = value;
            self.stim_cursor += 1;
        }

        // Phase 2: fault injections due now.
        self.transient_watch.clear();
        while self.sched_cursor < self.schedule.len()
            && self.schedule[self.sched_cursor].time_ns == t
        {
            let fault = self.schedule[self.sched_cursor].clone();
            self.sched_cursor += 1;
            self.inject(&fault, t);
        }

        // Phase 3: HRU stage; firing begins sample their inputs.
        let flat_count = self.compiled.len();
        for flat in 0..flat_count {
            let addr = self.fabric.cell_by_flat(flat).addr;
            if !self.fabric.cell(addr).is_executing() {
                continue;
            }
            let incoming: [Word; 4] = {
                let slots = &self.compiled[flat];
                [
                    self.resolve_compiled(&slots[0]),
                    self.resolve_compiled(&slots[1]),
                    self.resolve_compiled(&slots[2]),
                    self.resolve_compiled(&slots[3]),
                ]
            };
            let watch: Vec<usize> = if self.transient_watch.is_empty() {
                Vec::new()
            } else {
                self.transient_watch
                    .iter()
                    .filter(|(f, _)| *f == flat)
                    .map(|(_, h)| *h)
                    .collect()
            };
            let cell = self.fabric.cell_mut(addr);
            let mut outcomes = [HruOutcome::Clean; 4];
            for i in 0..4 {
                let (_, outcome) = hru_step(&mut cell.hrus[i], incoming[i]);
                outcomes[i] = outcome;
            }
            let begins = cell.begins_at(self.half_tick);
            if begins {
                cell.sampled = [
                    cell.hrus[0].comparator_out,
                    cell.hrus[1].comparator_out,
                    cell.hrus[2].comparator_out,
                    cell.hrus[3].comparator_out,
                ];
            }
            for hru_idx in watch {
                match outcomes[hru_idx] {
                    HruOutcome::Masked { .. } => {
                        self.transients_masked += 1;
                        self.trace.push(
                            t,
                            RowKind::Event,
                            "transient_masked",
                            format!("{addr}.hru{hru_idx}"),
                        );
                    }
                    HruOutcome::Unmaskable => {
                        self.transients_unmasked += 1;
                        self.trace.push(
                            t,
                            RowKind::Event,
                            "unmaskable_transient",
                            format!("{addr}.hru{hru_idx}"),
                        );
                    }
                    HruOutcome::Clean => {
                        // Upset landed on an input whose latch it could not
                        // disturb this cycle; count it as masked.
                        self.transients_masked += 1;
                        self.trace.push(
                            t,
                            RowKind::Event,
                            "transient_masked",
                            format!("{addr}.hru{hru_idx}"),
                        );
                    }
                }
            }
            if begins && self.config.monitor.contains(&addr) {
                let sampled = self.fabric.cell(addr).sampled;
                for (i, v) in sampled.iter().enumerate() {
                    self.record_monitored(t, format!("{addr}.in{i}"), *v);
                }
            }
        }

        // Phases 4-5: firings complete; DWC evaluated on the done edge.
        let mut flag_rose: Vec<CellAddr> = Vec::new();
        let mut completions: Vec<CellAddr> = Vec::new();
        for flat in 0..flat_count {
            let addr = self.fabric.cell_by_flat(flat).addr;
            let cell = self.fabric.cell(addr);
            if !cell.is_executing() || !cell.completes_at(self.half_tick) {
                continue;
            }
            let gains = self.config.gains;
            let k = self.config.k_threshold;
            let cell = self.fabric.cell_mut(addr);
            let (_, _, rose) = cell.complete_firing(&gains, k);
            completions.push(addr);
            if rose {
                flag_rose.push(addr);
            }
            if let Some(dead) = self.fabric.cell_mut(addr).heal_completion_due.take() {
                self.trace.push(t, RowKind::Event, "heal_complete", dead.to_string());
                if let Some(rec) = self
                    .permanents
                    .iter_mut()
                    .find(|r| r.cell == dead && r.healed_at_ns.is_none())
                {
                    rec.healed_at_ns = Some(t);
                }
            }
        }
        for addr in &flag_rose {
            self.trace.push(t, RowKind::Event, "dwc_flag", addr.to_string());
        }

        // Monitored done pulses and outputs.
        for addr in self.config.monitor.clone() {
            let cell = self.fabric.cell(addr);
            let done = Word::from_bool(completions.contains(&addr));
            let lat = Word::from_bool(cell.begins_at(self.half_tick) && cell.is_executing());
            let out = cell.latched_out;
            self.record_monitored(t, format!("{addr}.done"), done);
            for i in 0..4 {
                self.record_monitored(t, format!("{addr}.lat{i}"), lat);
            }
            self.record_monitored(t, format!("{addr}.out"), out);
        }

        // Phase 6: the failure monitor latches new flags and resolves
        // substitutes, in ascending address order.
        for failed in flag_rose {
            if self.healing.latched.contains(&failed) {
                continue;
            }
            self.healing.latched.insert(failed);
            match self.healing.plan_heal(&self.fabric, failed) {
                Ok(plan) => {
                    self.pending_heals
                        .push((self.half_tick + HEAL_PIPELINE_HALF_TICKS, PendingHeal::Heal(plan)));
                }
                Err(HealError::CapacityExhausted(_)) => {
                    self.trace.push(t, RowKind::Event, "capacity_exhausted", failed.to_string());
                    self.healing.unhealed.push(failed);
                    self.pending_heals.push((
                        self.half_tick + HEAL_PIPELINE_HALF_TICKS,
                        PendingHeal::DeactivateOnly(failed),
                    ));
                }
                Err(HealError::StaleFlag(_)) => {
                    self.trace.push(t, RowKind::Event, "stale_flag", failed.to_string());
                }
                Err(e) => panic!("unexpected healing failure: {e}"),
            }
        }

        // Phase 7: apply action triples due this half-tick.
        let due: Vec<PendingHeal> = {
            let mut due = Vec::new();
            self.pending_heals.retain(|(when, plan)| {
                if *when == self.half_tick {
                    due.push(plan.clone());
                    false
                } else {
                    true
                }
            });
            due
        };
        for pending in due {
            match pending {
                PendingHeal::Heal(plan) => self.apply_heal(plan, t),
                PendingHeal::DeactivateOnly(failed) => {
                    self.log_action(ActionKind::Deactivate, failed, None, None, t);
                    self.fabric.cell_mut(failed).deactivate();
                }
            }
        }

        // Phase 8: latch external output ports.
        let outs: Vec<(String, Word)> = self
            .routing
            .outputs
            .iter()
            .map(|(name, src)| (name.clone(), self.resolve_source(src)))
            .collect();
        for (name, v) in outs {
            if self.out_last.get(&name) != Some(&v) {
                self.trace.push(t, RowKind::Signal, name.clone(), v.to_string());
                self.out_last.insert(name, v);
            }
        }

        self.half_tick += 1;
    }

    fn resolve_compiled(&self, c: &Compiled) -> Word {
        match c {
            Compiled::Ext(i) => self.port_values[*i],
            Compiled::Cell(flat) => self.fabric.cell_by_flat(*flat).latched_out,
            Compiled::Const(w) => *w,
            Compiled::Unused => Word::ZERO,
        }
    }

    fn inject(&mut self, fault: &Fault, t: u64) {
        let (kind_name, value) = fault.describe();
        self.trace.push(t, RowKind::Fault, kind_name, value);
        match &fault.kind {
            FaultKind::TransientReg { cell, hru, replica, flip } => {
                let target = *cell;
                if !self.fabric.contains(target)
                    || !self.fabric.cell(target).is_executing()
                {
                    self.trace.push(t, RowKind::Event, "no_effect_injection", target.to_string());
                    self.no_effect += 1;
                    return;
                }
                let flat = target.flat_index();
                self.fabric.cell_mut(target).hrus[*hru].pending_upsets[*replica] = Some(*flip);
                self.transient_watch.push((flat, *hru));
            }
            FaultKind::PermanentGfb { target, mask } => {
                self.install_permanent(target.cell, target.copy, *mask, t);
            }
            FaultKind::Ccf { members } => {
                for (target, mask) in members {
                    self.install_permanent(target.cell, target.copy, *mask, t);
                }
            }
        }
    }

    fn install_permanent(
        &mut self,
        cell: CellAddr,
        copy: GfbCopy,
        mask: crate::cell::StuckMask,
        t: u64,
    ) {
        if !self.fabric.contains(cell) || self.fabric.cell(cell).mode == CellMode::Dead {
            self.trace.push(t, RowKind::Event, "no_effect_injection", cell.to_string());
            self.no_effect += 1;
            return;
        }
        let target = self.fabric.cell_mut(cell);
        match copy {
            GfbCopy::Primary => target.gfb_primary.stuck = Some(mask),
            GfbCopy::Shadow => target.gfb_shadow.stuck = Some(mask),
        }
        self.permanents.push(PermanentRecord { cell, time_ns: t, healed_at_ns: None });
    }

    fn log_action(
        &mut self,
        kind: ActionKind,
        subject: CellAddr,
        object: Option<CellAddr>,
        slot: Option<usize>,
        t: u64,
    ) {
        self.healing.action_log.push(HealingAction {
            kind,
            subject,
            object,
            code_slot: slot,
            time_ns: t,
        });
        let obj = object.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
        let slot = slot.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        self.trace.push(t, RowKind::Heal, kind.name(), format!("{subject}>{obj}#{slot}"));
    }

    fn apply_heal(&mut self, plan: HealPlan, t: u64) {
        let substitute = plan.substitute();
        match plan {
            HealPlan::ToSpare { failed, spare, slot } => {
                self.log_action(ActionKind::Deactivate, failed, None, None, t);
                self.log_action(ActionKind::Reroute, failed, Some(spare), None, t);
                self.log_action(ActionKind::Restore, spare, Some(failed), Some(slot), t);
                self.fabric.cell_mut(failed).deactivate();
                self.routing.reroute(failed, spare).expect("reroute to claimed spare");
                let cell = self.fabric.cell_mut(spare);
                cell.start_role(slot, self.half_tick);
                cell.heal_completion_due = Some(failed);
            }
            HealPlan::ToStem { failed, cmd } => {
                self.log_action(ActionKind::Deactivate, failed, None, None, t);
                self.log_action(ActionKind::Reroute, failed, Some(cmd.unit), None, t);
                self.log_action(
                    ActionKind::Differentiate,
                    cmd.unit,
                    Some(failed),
                    Some(cmd.syndrome.0 as usize),
                    t,
                );
                self.fabric.cell_mut(failed).deactivate();
                self.routing.reroute(failed, cmd.unit).expect("reroute to claimed stem unit");
                let cell = self.fabric.cell_mut(cmd.unit);
                cell.codes[0] = Some(cmd.code.clone());
                cell.start_role(0, self.half_tick);
                cell.heal_completion_due = Some(failed);
            }
        }
        // The substitute starts its first firing immediately: latch its
        // HRUs from the rerouted inputs and sample.
        self.recompile();
        let flat = substitute.flat_index();
        let incoming: [Word; 4] = {
            let slots = &self.compiled[flat];
            [
                self.resolve_compiled(&slots[0]),
                self.resolve_compiled(&slots[1]),
                self.resolve_compiled(&slots[2]),
                self.resolve_compiled(&slots[3]),
            ]
        };
        let cell = self.fabric.cell_mut(substitute);
        for i in 0..4 {
            let (_, _) = hru_step(&mut cell.hrus[i], incoming[i]);
        }
        cell.sampled = [
            cell.hrus[0].comparator_out,
            cell.hrus[1].comparator_out,
            cell.hrus[2].comparator_out,
            cell.hrus[3].comparator_out,
        ];
    }

    /// Step until the clock reaches `until_ns`, without finalizing the
    /// trace order; callers that interleave stepping with output queries
    /// use this and sort once at the end.
    pub fn step_until(&mut self, until_ns: u64) {
        assert!(until_ns % NS_PER_HALF_TICK == 0, "until_ns must be a multiple of 5");
        while self.time_ns() < until_ns {
            self.step();
        }
    }

    /// Step until the clock reaches `until_ns`.
    pub fn run(&mut self, until_ns: u64) {
        self.step_until(until_ns);
        self.trace.sort();
    }

    pub fn tally(&self) -> FaultTally {
        let injected = self.transients_masked
            + self.transients_unmasked
            + self.permanents.len()
            + self.no_effect;
        let healed = self.permanents.iter().filter(|p| p.healed_at_ns.is_some()).count();
        let unhealed = self.transients_unmasked
            + self.no_effect
            + self.permanents.iter().filter(|p| p.healed_at_ns.is_none()).count();
        let heal_latencies_ns = self
            .permanents
            .iter()
            .filter_map(|p| p.healed_at_ns.map(|h| h - p.time_ns))
            .collect();
        FaultTally {
            injected,
            masked: self.transients_masked,
            healed,
            unhealed,
            heal_latencies_ns,
        }
    }
}

/// Reconstruct every signal's value over half-ticks in [from_ns, end] and
/// compare. Signals default to 0 before their first row; the end time is
/// the later of the two traces' last rows.
pub fn signals_equal_from(a: &Trace, b: &Trace, from_ns: u64) -> bool {
    signals_equal_filtered(a, b, from_ns, None)
}

/// Same comparison restricted to the named signals (the application's
/// output ports, for heal verdicts: a healed function's physical monitor
/// taps legitimately diverge once the role moves to a spare cell).
pub fn signals_equal_filtered(
    a: &Trace,
    b: &Trace,
    from_ns: u64,
    only: Option<&[String]>,
) -> bool {
    let ha = a.signal_histories();
    let hb = b.signal_histories();
    let names: std::collections::BTreeSet<&str> = ha
        .keys()
        .chain(hb.keys())
        .copied()
        .filter(|n| only.map(|set| set.iter().any(|s| s == n)).unwrap_or(true))
        .collect();
    let end = a.end_time_ns().max(b.end_time_ns());
    fn value_at<'h>(hist: Option<&'h Vec<(u64, &'h str)>>, t: u64) -> &'h str {
        match hist {
            None => "0",
            Some(rows) => {
                let mut v = "0";
                for (rt, rv) in rows {
                    if *rt > t {
                        break;
                    }
                    v = rv;
                }
                v
            }
        }
    }
    for name in names {
        let ra = ha.get(name);
        let rb = hb.get(name);
        let mut t = from_ns;
        while t <= end {
            if value_at(ra, t) != value_at(rb, t) {
                return false;
            }
            t += NS_PER_HALF_TICK;
        }
    }
    true
}
