//! The generic function block (GFB) operation library.
//!
//! These are the operations a cell's duplicated function blocks can be
//! configured to execute: basic combinational logic, wrapping 16-bit
//! arithmetic, a 2:1 multiplexer, a unit delay, and a discrete PI
//! controller with rational gains.
//!
//! Everything here is a pure function over explicit state values; the
//! fabric owns the state and threads it through.

use crate::word::Word;

/// Operation executed by a generic function block.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum BlockOp {
    Not,
    And,
    Or,
    Add,
    Sub,
    Mul,
    /// Unsigned compare, returns 1 iff lhs >= rhs.
    CmpGe,
    /// 2:1 multiplexer: inputs are (a, b, select); select 0 picks a.
    Mux2,
    /// Unit delay: returns the previous firing's input.
    Delay1,
    /// Discrete PI controller over a signed error input.
    Pi,
}

impl BlockOp {
    /// Total input count, select lines included.
    pub fn arity(self) -> usize {
        match self {
            BlockOp::Not | BlockOp::Delay1 | BlockOp::Pi => 1,
            BlockOp::And
            | BlockOp::Or
            | BlockOp::Add
            | BlockOp::Sub
            | BlockOp::Mul
            | BlockOp::CmpGe => 2,
            BlockOp::Mux2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockOp::Not => "NOT",
            BlockOp::And => "AND",
            BlockOp::Or => "OR",
            BlockOp::Add => "ADD",
            BlockOp::Sub => "SUB",
            BlockOp::Mul => "MUL",
            BlockOp::CmpGe => "CMP_GE",
            BlockOp::Mux2 => "MUX2",
            BlockOp::Delay1 => "DELAY1",
            BlockOp::Pi => "PI",
        }
    }

    pub fn parse(s: &str) -> Option<BlockOp> {
        Some(match s {
            "NOT" => BlockOp::Not,
            "AND" => BlockOp::And,
            "OR" => BlockOp::Or,
            "ADD" => BlockOp::Add,
            "SUB" => BlockOp::Sub,
            "MUL" => BlockOp::Mul,
            "CMP_GE" => BlockOp::CmpGe,
            "MUX2" => BlockOp::Mux2,
            "DELAY1" => BlockOp::Delay1,
            "PI" => BlockOp::Pi,
            _ => return None,
        })
    }

    /// Ops whose operands must be boolean, and whose result is boolean.
    pub fn is_boolean(self) -> bool {
        matches!(self, BlockOp::Not | BlockOp::And | BlockOp::Or)
    }
}

/// Per-block sequential state. Combinational ops never touch it.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct BlockState {
    /// Previous-firing input, returned by DELAY1.
    pub delay_reg: Word,
    /// Running error sum for the PI integral term. Saturates, never wraps.
    pub pi_accum: i32,
}

/// Rational PI gains: kp = kp_num/kp_den, ki = ki_num/ki_den.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct PiGains {
    pub kp_num: u32,
    pub kp_den: u32,
    pub ki_num: u32,
    pub ki_den: u32,
}

impl PiGains {
    pub fn new(kp_num: u32, kp_den: u32, ki_num: u32, ki_den: u32) -> PiGains {
        assert!(kp_den != 0 && ki_den != 0, "PI gain denominators must be nonzero");
        PiGains { kp_num, kp_den, ki_num, ki_den }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.kp_den == 0 || self.ki_den == 0 {
            return Err("PI gain denominators must be nonzero".into());
        }
        Ok(())
    }
}

impl Default for PiGains {
    fn default() -> PiGains {
        PiGains { kp_num: 2, kp_den: 1, ki_num: 1, ki_den: 4 }
    }
}

/// Evaluate one block firing.
///
/// Combinational ops return the state unchanged. DELAY1 returns the prior
/// register and stores the input. PI treats its input as a two's-complement
/// error, accumulates it, and returns floor(kp*e + ki*sum) clamped to the
/// word range (a throttle-style command cannot go negative).
///
/// Panics on arity mismatch; netlist validation makes that unreachable.
pub fn eval_block(
    op: BlockOp,
    inputs: &[Word],
    state: BlockState,
    gains: &PiGains,
) -> (Word, BlockState) {
    assert_eq!(
        inputs.len(),
        op.arity(),
        "arity mismatch for {}: got {} inputs",
        op.name(),
        inputs.len()
    );
    if op.is_boolean() {
        debug_assert!(inputs.iter().all(|w| w.is_bool()), "boolean op fed non-boolean operand");
    }
    match op {
        BlockOp::Not => (Word::from_bool(inputs[0].0 == 0), state),
        BlockOp::And => (Word::from_bool(inputs[0].0 != 0 && inputs[1].0 != 0), state),
        BlockOp::Or => (Word::from_bool(inputs[0].0 != 0 || inputs[1].0 != 0), state),
        BlockOp::Add => (inputs[0].wrapping_add(inputs[1]), state),
        BlockOp::Sub => (inputs[0].wrapping_sub(inputs[1]), state),
        BlockOp::Mul => (inputs[0].wrapping_mul(inputs[1]), state),
        BlockOp::CmpGe => (Word::from_bool(inputs[0].0 >= inputs[1].0), state),
        BlockOp::Mux2 => {
            let out = if inputs[2].0 == 0 { inputs[0] } else { inputs[1] };
            (out, state)
        }
        BlockOp::Delay1 => {
            let out = state.delay_reg;
            (out, BlockState { delay_reg: inputs[0], ..state })
        }
        BlockOp::Pi => {
            let e = inputs[0].as_signed() as i64;
            let accum = (state.pi_accum as i64 + e)
                .clamp(i32::MIN as i64, i32::MAX as i64) as i32;
            // Exact rational sum kp*e + ki*accum over the common denominator,
            // floored, then clamped to the word range.
            let kp_num = gains.kp_num as i128;
            let kp_den = gains.kp_den as i128;
            let ki_num = gains.ki_num as i128;
            let ki_den = gains.ki_den as i128;
            let numer = kp_num * (e as i128) * ki_den + ki_num * (accum as i128) * kp_den;
            let denom = kp_den * ki_den;
            let raw = numer.div_euclid(denom);
            let out = raw.clamp(0, u16::MAX as i128) as u16;
            (Word(out), BlockState { pi_accum: accum, ..state })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gains(kp_num: u32, kp_den: u32, ki_num: u32, ki_den: u32) -> PiGains {
        PiGains::new(kp_num, kp_den, ki_num, ki_den)
    }

    fn eval(op: BlockOp, inputs: &[u16]) -> u16 {
        let words: Vec<Word> = inputs.iter().map(|&v| Word(v)).collect();
        let (out, _) = eval_block(op, &words, BlockState::default(), &PiGains::default());
        out.0
    }

    #[test]
    fn boolean_identities() {
        assert_eq!(eval(BlockOp::And, &[1, 1]), 1);
        assert_eq!(eval(BlockOp::And, &[1, 0]), 0);
        assert_eq!(eval(BlockOp::Or, &[0, 0]), 0);
        assert_eq!(eval(BlockOp::Or, &[0, 1]), 1);
        assert_eq!(eval(BlockOp::Not, &[0]), 1);
        assert_eq!(eval(BlockOp::Not, &[1]), 0);
    }

    #[test]
    fn small_integer_arithmetic() {
        assert_eq!(eval(BlockOp::Sub, &[50, 45]), 5);
        assert_eq!(eval(BlockOp::Add, &[49, 1]), 50);
        assert_eq!(eval(BlockOp::Mul, &[7, 6]), 42);
        assert_eq!(eval(BlockOp::CmpGe, &[5, 5]), 1);
        assert_eq!(eval(BlockOp::CmpGe, &[4, 5]), 0);
    }

    #[test]
    fn delay1_returns_prior_and_stores_input() {
        let state = BlockState { delay_reg: Word(3), pi_accum: 0 };
        let (out, next) =
            eval_block(BlockOp::Delay1, &[Word(7)], state, &PiGains::default());
        assert_eq!(out, Word(3));
        assert_eq!(next.delay_reg, Word(7));
    }

    #[test]
    fn pi_pure_proportional_unity_gain() {
        let (out, next) = eval_block(
            BlockOp::Pi,
            &[Word(5)],
            BlockState::default(),
            &gains(1, 1, 0, 1),
        );
        assert_eq!(out, Word(5));
        assert_eq!(next.pi_accum, 5);
    }

    #[test]
    fn pi_clamps_negative_command_to_zero() {
        // e = -50 in two's complement
        let e = Word(50u16.wrapping_neg());
        let (out, next) =
            eval_block(BlockOp::Pi, &[e], BlockState::default(), &PiGains::default());
        assert_eq!(out, Word(0));
        assert_eq!(next.pi_accum, -50);
    }

    #[test]
    fn pi_accumulator_saturates() {
        let state = BlockState { delay_reg: Word::ZERO, pi_accum: i32::MAX - 1 };
        let (_, next) =
            eval_block(BlockOp::Pi, &[Word(10)], state, &gains(1, 1, 0, 1));
        assert_eq!(next.pi_accum, i32::MAX);

        let state = BlockState { delay_reg: Word::ZERO, pi_accum: i32::MIN + 1 };
        let e = Word(10u16.wrapping_neg());
        let (_, next) = eval_block(BlockOp::Pi, &[e], state, &gains(1, 1, 0, 1));
        assert_eq!(next.pi_accum, i32::MIN);
    }

    // Brute-force oracle re-implementing the mux truth table independently.
    #[test]
    fn mux2_matches_truth_table_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xc0ffee);
        for _ in 0..1000 {
            let a: u16 = rng.random();
            let b: u16 = rng.random();
            let sel: u16 = rng.random_range(0..=1);
            let oracle = if sel == 1 { b } else { a };
            assert_eq!(eval(BlockOp::Mux2, &[a, b, sel]), oracle);
        }
    }

    proptest! {
        // Combinational ops never modify state.
        #[test]
        fn combinational_ops_leave_state_alone(a: u16, b: u16, reg: u16, accum: i32) {
            let state = BlockState { delay_reg: Word(reg), pi_accum: accum };
            for op in [BlockOp::Add, BlockOp::Sub, BlockOp::Mul, BlockOp::CmpGe] {
                let (_, next) = eval_block(op, &[Word(a), Word(b)], state, &PiGains::default());
                prop_assert_eq!(next, state);
            }
        }

        // ADD/SUB wrap, against a wide-integer oracle.
        #[test]
        fn add_sub_wrap_oracle(a: u16, b: u16) {
            let sum = eval(BlockOp::Add, &[a, b]);
            prop_assert_eq!(sum as u32, (a as u32 + b as u32) % 65536);
            let diff = eval(BlockOp::Sub, &[a, b]);
            prop_assert_eq!(diff as i64, (a as i64 - b as i64).rem_euclid(65536));
        }

        // With ki = 0 the PI output is kp*e clamped: pure proportional path.
        #[test]
        fn pi_proportional_linearity(e_raw: u16, kp in 1u32..8) {
            let (out, _) = eval_block(
                BlockOp::Pi,
                &[Word(e_raw)],
                BlockState::default(),
                &gains(kp, 1, 0, 1),
            );
            let e = Word(e_raw).as_signed() as i64;
            let expect = (kp as i64 * e).clamp(0, 65535) as u16;
            prop_assert_eq!(out.0, expect);
        }

        // Determinism: same (op, inputs, state) always yields the same result.
        #[test]
        fn eval_is_deterministic(a: u16, b: u16, sel in 0u16..2, reg: u16, accum: i32) {
            let state = BlockState { delay_reg: Word(reg), pi_accum: accum };
            let g = PiGains::default();
            for op in [
                BlockOp::Add, BlockOp::Sub, BlockOp::Mul, BlockOp::CmpGe,
                BlockOp::Delay1, BlockOp::Pi,
            ] {
                let inputs: Vec<Word> = match op.arity() {
                    1 => vec![Word(a)],
                    2 => vec![Word(a), Word(b)],
                    _ => vec![Word(a), Word(b), Word(sel)],
                };
                prop_assert_eq!(
                    eval_block(op, &inputs, state, &g),
                    eval_block(op, &inputs, state, &g)
                );
            }
        }
    }
}
