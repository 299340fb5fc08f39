//! Cross-module invariants exercised through whole simulations: oracle
//! equivalence for the cruise controller, operational-semantics checks,
//! trace well-formedness, and the detection boundaries of the redundancy
//! mechanisms.

mod common;

use std::collections::BTreeMap;

use healfab::config::Scenario;
use healfab::faults::{parse_schedule, Fault, FaultKind, FaultSchedule, GfbCopy, GfbTarget};
use healfab::netlist::{cruise_target_rule, parse_netlist, CruiseCondition};
use healfab::place::place;
use healfab::sim::{SimConfig, Simulation, Stimulus};
use healfab::trace::RowKind;
use healfab::{CellAddr, PiGains, StuckMask, Word};

use common::{asset, read_asset, RoundEval};

fn ccs_netlist() -> healfab::Netlist {
    parse_netlist(&read_asset("ccs.fbd")).unwrap()
}

fn load_scenario(name: &str) -> Scenario {
    Scenario::load(&asset(&format!("scenarios/{name}.toml"))).unwrap()
}

const CCS_INPUTS: [&str; 6] = ["set", "inc", "dec", "cancel", "brake", "speed"];

fn ccs_sim(stimulus: Stimulus, schedule: FaultSchedule) -> Simulation {
    let netlist = ccs_netlist();
    let mapping = place(&netlist, 3).unwrap();
    let names: Vec<String> = CCS_INPUTS.iter().map(|s| s.to_string()).collect();
    // Uniform firing grid: the reference evaluator models one register
    // stage per block, which is the zero-trigger configuration.
    let config = SimConfig {
        gains: PiGains::default(),
        k_threshold: 2,
        layer_triggers_ns: vec![0, 0, 0],
        monitor: vec![],
    };
    Simulation::new(&names, &mapping, &stimulus, schedule, config).unwrap()
}

// Structural shape of the shipped cruise netlist: six inputs, two
// outputs, seventeen blocks tagged over three levels, the published
// opcode multiset, and the 8+8+1 layer split.
#[test]
fn ccs_netlist_structure() {
    let netlist = ccs_netlist();
    assert_eq!(netlist.inputs.len(), 6);
    assert_eq!(netlist.outputs.len(), 2);
    assert_eq!(netlist.blocks.len(), 17);
    assert_eq!(netlist.levels, vec![1, 2, 3]);
    let counts = netlist.opcode_counts();
    let expect: BTreeMap<&str, usize> = [
        ("NOT", 1),
        ("ADD", 4),
        ("DELAY1", 2),
        ("OR", 1),
        ("MUX2", 3),
        ("SUB", 2),
        ("MUL", 2),
        ("CMP_GE", 1),
        ("PI", 1),
    ]
    .into_iter()
    .collect();
    assert_eq!(counts, expect);
    let mapping = place(&netlist, 3).unwrap();
    assert_eq!(mapping.per_layer_counts(), vec![8, 8, 1]);
}

#[test]
fn edg_netlist_structure() {
    let netlist = parse_netlist(&read_asset("edg.fbd")).unwrap();
    assert_eq!(netlist.inputs.len(), 14);
    assert_eq!(netlist.outputs.len(), 2);
    assert_eq!(netlist.blocks.len(), 16);
    for b in &netlist.blocks {
        assert!(
            matches!(b.op, healfab::BlockOp::And | healfab::BlockOp::Or | healfab::BlockOp::Not),
            "EDG uses only AND/OR/NOT, found {:?}",
            b.op
        );
    }
}

// Fabric-vs-direct equivalence: 100 random stimulus sequences of 100
// rounds each (10^4 randomized condition steps) agree with the
// independent round-level evaluator on both outputs at every round.
#[test]
fn ccs_fabric_matches_round_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xcc5e9);
    let netlist = ccs_netlist();
    const ROUNDS: usize = 100;
    for sequence in 0..100 {
        // Per-round input words, changing on the 40 ns round grid.
        let mut per_round: Vec<BTreeMap<&str, u16>> = Vec::new();
        let mut entries = Vec::new();
        for r in 0..ROUNDS {
            let mut inputs = BTreeMap::new();
            for name in CCS_INPUTS {
                let value = if name == "speed" {
                    rng.random_range(0..200u16)
                } else {
                    rng.random_range(0..=1u16)
                };
                inputs.insert(name, value);
                entries.push((r as u64 * 40, name.to_string(), Word(value)));
            }
            per_round.push(inputs);
        }
        let mut sim = ccs_sim(Stimulus { entries }, FaultSchedule::default());
        let mut oracle = RoundEval::new(netlist.clone(), (2, 1), (1, 4));
        for (r, inputs) in per_round.iter().enumerate() {
            oracle.step(inputs);
            sim.step_until((r as u64 + 1) * 40);
            for port in ["Target", "Throttle"] {
                assert_eq!(
                    sim.output(port).unwrap().0,
                    oracle.output(port),
                    "sequence {sequence} round {r} port {port}"
                );
            }
        }
    }
}

// The netlist realizes the published operational semantics: settled
// target values after condition presses match the reference rule for
// set / increment / decrement / cancel. The hold loop is a five-round
// ring, so a press is held one ring period to reach every interleaved
// thread; presses are spaced eight rounds apart.
#[test]
fn ccs_target_follows_operational_semantics() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7ab1e2);
    const SLOT_ROUNDS: u64 = 8;
    for _case in 0..20 {
        let speed: u16 = rng.random_range(20..120);
        let mut conditions: Vec<CruiseCondition> = vec![CruiseCondition::Set];
        for _ in 0..10 {
            conditions.push(match rng.random_range(0..4) {
                0 => CruiseCondition::Set,
                1 => CruiseCondition::Increment,
                2 => CruiseCondition::Decrement,
                _ => CruiseCondition::Cancel,
            });
        }
        let mut entries = Vec::new();
        for name in CCS_INPUTS {
            let v = if name == "speed" { speed } else { 0 };
            entries.push((0, name.to_string(), Word(v)));
        }
        // The capture pulse must outlast the hold-loop ring; later presses
        // are one round wide.
        for (slot, condition) in conditions.iter().enumerate() {
            let at = slot as u64 * SLOT_ROUNDS * 40;
            let line = match condition {
                CruiseCondition::Set => "set",
                CruiseCondition::Increment => "inc",
                CruiseCondition::Decrement => "dec",
                CruiseCondition::Cancel => "cancel",
            };
            let hold_rounds = 5; // one full ring period
            if at > 0 {
                entries.push((at, line.to_string(), Word(1)));
            } else {
                entries.retain(|(t, n, _)| !(*t == 0 && n == line));
                entries.push((0, line.to_string(), Word(1)));
            }
            entries.push((at + hold_rounds * 40, line.to_string(), Word(0)));
        }
        entries.sort_by(|a, b| (a.0, a.1.clone()).cmp(&(b.0, b.1.clone())));
        let total_ns = conditions.len() as u64 * SLOT_ROUNDS * 40 + 400;
        let mut sim = ccs_sim(Stimulus { entries }, FaultSchedule::default());

        let mut expected = Word::ZERO;
        for (slot, condition) in conditions.iter().enumerate() {
            // Both the rule and the netlist wrap on decrement through
            // zero, so no special casing is needed.
            expected = cruise_target_rule(*condition, Word(speed), expected);
            let settle = (slot as u64 + 1) * SLOT_ROUNDS * 40;
            sim.step_until(settle);
            assert_eq!(
                sim.output("Target").unwrap(),
                expected,
                "condition {condition:?} at slot {slot}"
            );
        }
        sim.step_until(total_ns);
    }
}

// Byte-identical traces for identical runs.
#[test]
fn identical_runs_are_byte_identical() {
    let scenario = load_scenario("ccs_transients");
    let a = scenario.run().unwrap().trace.to_csv();
    let b = scenario.run().unwrap().trace.to_csv();
    assert_eq!(a, b);
}

// Trace well-formedness on every shipped scenario: 5 ns alignment,
// monotone times, and no heal row before the fault that caused it.
#[test]
fn shipped_traces_are_well_formed() {
    for name in
        ["ccs_transients", "ccs_permanents", "edg_permanents", "edg_chain3", "edg_exhaust"]
    {
        let run = load_scenario(name).run().unwrap();
        let mut last = 0;
        for row in &run.trace.rows {
            assert_eq!(row.time_ns % 5, 0, "{name}: row off the 5 ns grid");
            assert!(row.time_ns >= last, "{name}: times not monotone");
            last = row.time_ns;
        }
        for heal in run.trace.rows.iter().filter(|r| r.kind == RowKind::Heal) {
            let subject = heal.value.split('>').next().unwrap();
            let caused_by = run.trace.rows.iter().any(|r| {
                r.kind == RowKind::Fault && r.time_ns <= heal.time_ns && r.value.contains(subject)
            });
            // REROUTE/RESTORE rows name the substitute as subject; the
            // causality requirement binds the DEACTIVATE row.
            if heal.name == "DEACTIVATE" {
                assert!(caused_by, "{name}: heal of {subject} precedes its fault");
            }
        }
    }
}

// Heal action triples stay contiguous with equal timestamps.
#[test]
fn heal_triples_are_atomic() {
    let run = load_scenario("edg_permanents").run().unwrap();
    let heals: Vec<(u64, String)> = run
        .trace
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Heal)
        .map(|r| (r.time_ns, r.name.clone()))
        .collect();
    assert_eq!(heals.len(), 6);
    assert_eq!(heals[0].0, heals[1].0);
    assert_eq!(heals[1].0, heals[2].0);
    assert_eq!(heals[3].0, heals[4].0);
    assert_eq!(heals[4].0, heals[5].0);
    assert_eq!(
        vec![heals[0].1.as_str(), heals[1].1.as_str(), heals[2].1.as_str()],
        vec!["DEACTIVATE", "REROUTE", "RESTORE"]
    );
}

// Exhaustive single-transient sweep on a fixed scenario: every
// (hru, replica) position on the first cell leaves the SIGNAL projection
// untouched.
#[test]
fn single_transient_never_changes_signals_exhaustive() {
    let scenario = load_scenario("ccs_transients");
    let golden_sim = scenario.golden().unwrap();
    let golden = golden_sim.trace.signal_projection();
    let names: Vec<String> = scenario.netlist.inputs.iter().map(|(n, _)| n.clone()).collect();
    for hru in 0..4 {
        for replica in 0..3 {
            let faults = vec![Fault {
                id: 0,
                time_ns: 240,
                kind: FaultKind::TransientReg {
                    cell: CellAddr::parse("L.B0").unwrap(),
                    hru,
                    replica,
                    flip: 0x0001,
                },
            }];
            let mut sim = Simulation::new(
                &names,
                &scenario.mapping,
                &scenario.stimulus,
                FaultSchedule { faults },
                scenario.sim_config.clone(),
            )
            .unwrap();
            sim.run(scenario.until_ns);
            assert_eq!(sim.trace.signal_projection(), golden, "hru {hru} replica {replica}");
        }
    }
}

// Two upsets in one HRU on the same half-tick defeat the 2-of-3 vote:
// the event is recorded as unmaskable and counted as unhealed.
#[test]
fn double_upset_same_cycle_is_unmaskable() {
    let scenario = load_scenario("ccs_transients");
    let names: Vec<String> = scenario.netlist.inputs.iter().map(|(n, _)| n.clone()).collect();
    let mk = |replica: usize, flip: u16| Fault {
        id: replica,
        time_ns: 240,
        kind: FaultKind::TransientReg {
            cell: CellAddr::parse("L.B0").unwrap(),
            hru: 0,
            replica,
            flip,
        },
    };
    let mut sim = Simulation::new(
        &names,
        &scenario.mapping,
        &scenario.stimulus,
        FaultSchedule { faults: vec![mk(0, 0x1), mk(1, 0x2)] },
        scenario.sim_config.clone(),
    )
    .unwrap();
    sim.run(scenario.until_ns);
    assert!(sim
        .trace
        .rows
        .iter()
        .any(|r| r.kind == RowKind::Event && r.name == "unmaskable_transient"));
    let tally = sim.tally();
    assert_eq!(tally.masked + tally.unhealed, tally.injected);
    assert!(tally.unhealed >= 1);
}

// An identical common-cause mask in both block copies never trips the
// comparison unit; the failure escapes to the golden-diff oracle.
#[test]
fn identical_ccf_is_blind_to_comparison() {
    let scenario = load_scenario("edg_permanents");
    let names: Vec<String> = scenario.netlist.inputs.iter().map(|(n, _)| n.clone()).collect();
    let mask = StuckMask { force_zero: 0x0001, force_one: 0 };
    let faults = vec![Fault {
        id: 0,
        time_ns: 200,
        kind: FaultKind::Ccf {
            members: vec![
                (GfbTarget { cell: CellAddr::parse("L.B0").unwrap(), copy: GfbCopy::Primary }, mask),
                (GfbTarget { cell: CellAddr::parse("L.B0").unwrap(), copy: GfbCopy::Shadow }, mask),
            ],
        },
    }];
    let mut sim = Simulation::new(
        &names,
        &scenario.mapping,
        &scenario.stimulus,
        FaultSchedule { faults },
        scenario.sim_config.clone(),
    )
    .unwrap();
    sim.run(600);
    assert!(!sim.trace.rows.iter().any(|r| r.name == "dwc_flag"), "comparison stayed blind");
    let tally = sim.tally();
    assert_eq!((tally.injected, tally.healed, tally.unhealed), (2, 0, 2));
    // The corruption escapes to the outputs: the golden-diff oracle is
    // what catches it.
    let golden = scenario.golden().unwrap();
    let ports = sim.output_names();
    assert!(!healfab::sim::signals_equal_filtered(
        &sim.trace,
        &golden.trace,
        0,
        Some(&ports)
    ));
}

// Placement determinism and T-cell spare sufficiency.
#[test]
fn placement_deterministic_and_spares_sufficient() {
    let netlist = ccs_netlist();
    let a = place(&netlist, 3).unwrap();
    let b = place(&netlist, 3).unwrap();
    assert_eq!(a.to_text(&netlist), b.to_text(&netlist));

    let mut fabric = healfab::Fabric::new(3);
    a.configure(&mut fabric, &[0, 0, 0]);
    for (addr, code) in &a.codes {
        for t_index in 0..4 {
            let t = fabric.cell(CellAddr::t(addr.layer, addr.side, t_index));
            assert_eq!(
                t.codes[addr.index as usize].as_ref(),
                Some(code),
                "T{t_index} on {:?} side of layer {} misses the code for {addr}",
                addr.side,
                addr.layer
            );
            let elsewhere = t
                .codes
                .iter()
                .enumerate()
                .filter(|(slot, c)| *slot != addr.index as usize && c.as_ref() == Some(code))
                .count();
            assert_eq!(elsewhere, 0, "{addr} code duplicated into another slot");
        }
    }
}

// Fabric snapshot golden file: the configured cruise fabric dumps to the
// committed text.
#[test]
fn fabric_dump_matches_committed_snapshot() {
    let netlist = ccs_netlist();
    let mapping = place(&netlist, 3).unwrap();
    let mut fabric = healfab::Fabric::new(3);
    mapping.configure(&mut fabric, &[0, 0, 7]);
    let committed = read_asset("golden/ccs_fabric_dump.txt");
    assert_eq!(fabric.dump(), committed);
}

// Schedule parsing round-trips through the shipped schedule files.
#[test]
fn shipped_schedules_parse() {
    for name in
        ["ccs_transients", "ccs_permanents", "edg_permanents", "edg_chain3", "edg_exhaust"]
    {
        let text = read_asset(&format!("sched/{name}.sched"));
        let sched = parse_schedule(&text).unwrap();
        assert!(!sched.faults.is_empty());
        for f in &sched.faults {
            assert_eq!(f.time_ns % 5, 0);
        }
    }
}

// Any single manifest permanent on a B cell with a free same-side T cell
// heals (healed = 1) and the outputs return to golden.
#[test]
fn single_permanent_always_heals_with_free_spare() {
    let mut text = String::from("in a : word\nlevel 1:\n");
    for k in 0..8 {
        text.push_str(&format!("blk b{k} = ADD(a, {})\n", 2 * k));
    }
    text.push_str("out y = b7\n");
    let netlist = parse_netlist(&text).unwrap();
    let mapping = place(&netlist, 1).unwrap();
    let names = vec!["a".to_string()];
    let stimulus = Stimulus { entries: vec![(0, "a".into(), Word(1))] };
    let flush_ns = netlist.flush_rounds() * 40;

    let golden = {
        let mut sim = Simulation::new(
            &names,
            &mapping,
            &stimulus,
            FaultSchedule::default(),
            SimConfig::default(),
        )
        .unwrap();
        sim.run(1000);
        sim.trace
    };

    for cell in ["L.B0", "R.B0", "L.B1", "R.B1", "L.B2", "R.B2", "L.B3", "R.B3"] {
        let faults = vec![Fault {
            id: 0,
            time_ns: 100,
            kind: FaultKind::PermanentGfb {
                target: GfbTarget {
                    cell: CellAddr::parse(cell).unwrap(),
                    copy: GfbCopy::Primary,
                },
                mask: StuckMask { force_zero: 0x0001, force_one: 0 },
            },
        }];
        let mut sim = Simulation::new(
            &names,
            &mapping,
            &stimulus,
            FaultSchedule { faults },
            SimConfig::default(),
        )
        .unwrap();
        sim.run(1000);
        let tally = sim.tally();
        assert_eq!((tally.injected, tally.healed, tally.unhealed), (1, 1, 0), "{cell}");
        let heal_at = sim
            .trace
            .rows
            .iter()
            .find(|r| r.name == "heal_complete")
            .map(|r| r.time_ns)
            .unwrap();
        let ports = sim.output_names();
        assert!(
            healfab::sim::signals_equal_filtered(
                &sim.trace,
                &golden,
                heal_at + flush_ns,
                Some(&ports)
            ),
            "{cell}: post-heal outputs match golden"
        );
    }
}

// The two published case studies aggregate to three masked transients,
// two healed permanents, and nothing unhealed.
#[test]
fn case_study_campaign_aggregate() {
    let paths = [
        asset("scenarios/ccs_transients.toml"),
        asset("scenarios/ccs_permanents.toml"),
    ];
    let refs: Vec<&std::path::Path> = paths.iter().map(|p| p.as_path()).collect();
    let report = healfab::campaign::run_campaign(&refs);
    assert!(report.errors.is_empty());
    let masked: usize = report.scenarios.iter().map(|s| s.masked).sum();
    let healed: usize = report.scenarios.iter().map(|s| s.healed).sum();
    let unhealed: usize = report.scenarios.iter().map(|s| s.unhealed).sum();
    assert_eq!((masked, healed, unhealed), (3, 2, 0));
    assert!(report.scenarios.iter().all(|s| s.golden_equivalent));

    // An empty campaign is an empty report.
    let empty = healfab::campaign::run_campaign(&[]);
    assert!(empty.scenarios.is_empty() && empty.errors.is_empty());
    assert_eq!(empty.to_csv().lines().count(), 1);
}
