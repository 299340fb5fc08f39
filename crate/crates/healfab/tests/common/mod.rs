//! Shared test fixtures: asset paths and independent reference
//! evaluators. Both evaluators work straight off the parsed netlist with
//! raw u16 arithmetic, deliberately not through the block library or the
//! fabric, so they can serve as oracles for the simulator.
#![allow(dead_code)] // each test target uses a subset

use std::collections::BTreeMap;
use std::path::PathBuf;

use healfab::netlist::{Block, Netlist, Ref};
use healfab::BlockOp;

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(rel)
}

pub fn read_asset(rel: &str) -> String {
    std::fs::read_to_string(asset(rel))
        .unwrap_or_else(|e| panic!("cannot read asset {rel}: {e}"))
}

fn arg_value(
    netlist: &Netlist,
    r: Ref,
    inputs: &BTreeMap<&str, u16>,
    block_values: &dyn Fn(usize) -> u16,
) -> u16 {
    match r {
        Ref::Input(i) => *inputs
            .get(netlist.inputs[i].0.as_str())
            .unwrap_or_else(|| panic!("missing input {}", netlist.inputs[i].0)),
        Ref::Block(b) => block_values(b),
        Ref::Const(w) => w.0,
    }
}

fn apply_op(op: BlockOp, a: &[u16]) -> u16 {
    match op {
        BlockOp::Not => (a[0] == 0) as u16,
        BlockOp::And => (a[0] != 0 && a[1] != 0) as u16,
        BlockOp::Or => (a[0] != 0 || a[1] != 0) as u16,
        BlockOp::Add => a[0].wrapping_add(a[1]),
        BlockOp::Sub => a[0].wrapping_sub(a[1]),
        BlockOp::Mul => a[0].wrapping_mul(a[1]),
        BlockOp::CmpGe => (a[0] >= a[1]) as u16,
        BlockOp::Mux2 => {
            if a[2] == 0 {
                a[0]
            } else {
                a[1]
            }
        }
        BlockOp::Delay1 | BlockOp::Pi => unreachable!("stateful op in combinational eval"),
    }
}

/// Evaluate a purely combinational netlist as a plain expression tree.
pub fn eval_combinational(netlist: &Netlist, inputs: &BTreeMap<&str, u16>) -> BTreeMap<String, u16> {
    fn value(
        netlist: &Netlist,
        i: usize,
        inputs: &BTreeMap<&str, u16>,
        memo: &mut Vec<Option<u16>>,
    ) -> u16 {
        if let Some(v) = memo[i] {
            return v;
        }
        let block: &Block = &netlist.blocks[i];
        let args: Vec<u16> = block
            .args
            .iter()
            .map(|&r| match r {
                Ref::Block(j) => value(netlist, j, inputs, memo),
                other => arg_value(netlist, other, inputs, &|_| unreachable!()),
            })
            .collect();
        let v = apply_op(block.op, &args);
        memo[i] = Some(v);
        v
    }
    let mut memo = vec![None; netlist.blocks.len()];
    netlist
        .outputs
        .iter()
        .map(|(name, b)| (name.clone(), value(netlist, *b, inputs, &mut memo)))
        .collect()
}

/// Round-level reference for sequential netlists: every block carries a
/// one-round output register, delays add their own register, and the PI
/// stage mirrors the published discretization (error sum saturating in
/// i32, output floor(kp*e + ki*sum) clamped to a word).
pub struct RoundEval {
    netlist: Netlist,
    pub values: Vec<u16>,
    delay_regs: Vec<u16>,
    pi_accums: Vec<i32>,
    kp: (i64, i64),
    ki: (i64, i64),
}

impl RoundEval {
    pub fn new(netlist: Netlist, kp: (i64, i64), ki: (i64, i64)) -> RoundEval {
        let n = netlist.blocks.len();
        RoundEval {
            netlist,
            values: vec![0; n],
            delay_regs: vec![0; n],
            pi_accums: vec![0; n],
            kp,
            ki,
        }
    }

    /// Advance one firing round with the given external inputs.
    pub fn step(&mut self, inputs: &BTreeMap<&str, u16>) {
        let prev = self.values.clone();
        let mut next = vec![0u16; prev.len()];
        for (i, block) in self.netlist.blocks.iter().enumerate() {
            let args: Vec<u16> = block
                .args
                .iter()
                .map(|&r| arg_value(&self.netlist, r, inputs, &|b| prev[b]))
                .collect();
            next[i] = match block.op {
                BlockOp::Delay1 => {
                    let out = self.delay_regs[i];
                    self.delay_regs[i] = args[0];
                    out
                }
                BlockOp::Pi => {
                    let e = args[0] as i16 as i64;
                    let accum = (self.pi_accums[i] as i64 + e)
                        .clamp(i32::MIN as i64, i32::MAX as i64)
                        as i32;
                    self.pi_accums[i] = accum;
                    let (kp_n, kp_d) = self.kp;
                    let (ki_n, ki_d) = self.ki;
                    let numer =
                        kp_n as i128 * e as i128 * ki_d as i128
                            + ki_n as i128 * accum as i128 * kp_d as i128;
                    let denom = kp_d as i128 * ki_d as i128;
                    numer.div_euclid(denom).clamp(0, 65535) as u16
                }
                op => apply_op(op, &args),
            };
        }
        self.values = next;
    }

    pub fn output(&self, name: &str) -> u16 {
        let (_, b) = self
            .netlist
            .outputs
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("no output {name}"));
        self.values[*b]
    }
}
