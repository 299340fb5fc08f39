//! Netlist DSL: parsing and validation of `.fbd` application files.
//!
//! The format is line-oriented with three statement kinds plus level
//! section headers and `#` comments:
//!
//! ```text
//! in  speed : word
//! in  set   : bool
//! level 1:
//! blk target = MUX2(held, speed, set)
//! out Target = target
//! ```
//!
//! Block arguments are block names, input names, or decimal/hex literals.
//! Types: `bool` is a subtype of `word` (0/1 travels anywhere a word
//! does), but boolean operands (NOT/AND/OR inputs, the MUX2 select) must
//! be statically boolean. Feedback must pass through a DELAY1 block.

use std::collections::BTreeMap;
use std::fmt;

use crate::blocks::BlockOp;
use crate::word::Word;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SigType {
    Bool,
    Word,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ref {
    Input(usize),
    Block(usize),
    Const(Word),
}

#[derive(Clone, Debug)]
pub struct Block {
    pub name: String,
    pub op: BlockOp,
    pub args: Vec<Ref>,
    /// 1-based level tag from the enclosing `level k:` section.
    pub level: u8,
}

#[derive(Clone, Debug)]
pub struct Netlist {
    pub inputs: Vec<(String, SigType)>,
    pub blocks: Vec<Block>,
    pub outputs: Vec<(String, usize)>,
    pub levels: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetlistError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for NetlistError {}

impl Netlist {
    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn block_by_name(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    /// Result type of a reference under the bool-subtype rule.
    fn ref_type(&self, r: Ref) -> SigType {
        match r {
            Ref::Input(i) => self.inputs[i].1,
            Ref::Const(w) => {
                if w.is_bool() {
                    SigType::Bool
                } else {
                    SigType::Word
                }
            }
            Ref::Block(b) => {
                let blk = &self.blocks[b];
                match blk.op {
                    BlockOp::Not | BlockOp::And | BlockOp::Or | BlockOp::CmpGe => SigType::Bool,
                    BlockOp::Delay1 => self.ref_type(blk.args[0]),
                    BlockOp::Mux2 => {
                        let a = self.ref_type(blk.args[0]);
                        let b2 = self.ref_type(blk.args[1]);
                        if a == SigType::Bool && b2 == SigType::Bool {
                            SigType::Bool
                        } else {
                            SigType::Word
                        }
                    }
                    _ => SigType::Word,
                }
            }
        }
    }

    /// Opcode multiset as (name, count), for structural assertions.
    pub fn opcode_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for b in &self.blocks {
            *counts.entry(b.op.name()).or_insert(0) += 1;
        }
        counts
    }

    /// Firing rounds for a value to flush through the whole network:
    /// longest combinational chain, plus one round per delay register,
    /// plus margin for round-grid alignment.
    pub fn flush_rounds(&self) -> u64 {
        fn depth(netlist: &Netlist, i: usize, memo: &mut Vec<Option<u64>>) -> u64 {
            if let Some(d) = memo[i] {
                return d;
            }
            memo[i] = Some(1); // cycle guard; real cycles pass through DELAY1
            let d = if netlist.blocks[i].op == BlockOp::Delay1 {
                1
            } else {
                1 + netlist.blocks[i]
                    .args
                    .iter()
                    .map(|&a| match a {
                        Ref::Block(j) => depth(netlist, j, memo),
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(0)
            };
            memo[i] = Some(d);
            d
        }
        let mut memo = vec![None; self.blocks.len()];
        let comb = (0..self.blocks.len())
            .map(|i| depth(self, i, &mut memo))
            .max()
            .unwrap_or(0);
        let delays =
            self.blocks.iter().filter(|b| b.op == BlockOp::Delay1).count() as u64;
        comb + delays + 2
    }
}

pub fn parse_netlist(text: &str) -> Result<Netlist, Vec<NetlistError>> {
    let mut errors = Vec::new();
    let mut inputs: Vec<(String, SigType)> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut raw_outputs: Vec<(usize, String, String)> = Vec::new();
    let mut current_level: u8 = 1;
    let mut seen_levels: Vec<u8> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("level ") {
            match rest.trim().strip_suffix(':').and_then(|v| v.trim().parse::<u8>().ok()) {
                Some(level) if level >= 1 => {
                    current_level = level;
                    if !seen_levels.contains(&level) {
                        seen_levels.push(level);
                    }
                }
                _ => errors.push(err(lineno, "malformed level header")),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("in ") {
            match rest.split_once(':') {
                Some((name, ty)) => {
                    let name = name.trim().to_string();
                    let ty = match ty.trim() {
                        "bool" => SigType::Bool,
                        "word" => SigType::Word,
                        other => {
                            errors.push(err(lineno, &format!("unknown type `{other}`")));
                            continue;
                        }
                    };
                    if !is_ident(&name) {
                        errors.push(err(lineno, "bad input name"));
                        continue;
                    }
                    if inputs.iter().any(|(n, _)| *n == name) {
                        errors.push(err(lineno, &format!("duplicate input `{name}`")));
                        continue;
                    }
                    inputs.push((name, ty));
                }
                None => errors.push(err(lineno, "input needs `: bool` or `: word`")),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("blk ") {
            let Some((name, expr)) = rest.split_once('=') else {
                errors.push(err(lineno, "block needs `name = OP(args)`"));
                continue;
            };
            let name = name.trim().to_string();
            if !is_ident(&name) {
                errors.push(err(lineno, "bad block name"));
                continue;
            }
            if blocks.iter().any(|b| b.name == name) || inputs.iter().any(|(n, _)| *n == name) {
                errors.push(err(lineno, &format!("duplicate name `{name}`")));
                continue;
            }
            let expr = expr.trim();
            let Some((op_name, args_str)) = expr.split_once('(') else {
                errors.push(err(lineno, "block needs `OP(args)`"));
                continue;
            };
            let Some(args_str) = args_str.trim().strip_suffix(')') else {
                errors.push(err(lineno, "missing closing parenthesis"));
                continue;
            };
            let Some(op) = BlockOp::parse(op_name.trim()) else {
                errors.push(err(lineno, &format!("unknown opcode `{}`", op_name.trim())));
                continue;
            };
            let arg_names: Vec<&str> = if args_str.trim().is_empty() {
                Vec::new()
            } else {
                args_str.split(',').map(|a| a.trim()).collect()
            };
            if arg_names.len() != op.arity() {
                errors.push(err(
                    lineno,
                    &format!("{} takes {} inputs, got {}", op.name(), op.arity(), arg_names.len()),
                ));
                continue;
            }
            // Arguments resolve after all declarations; store placeholders.
            blocks.push(Block {
                name,
                op,
                args: arg_names.iter().map(|_| Ref::Const(Word(0))).collect(), // patched below
                level: current_level,
            });
            raw_outputs.push((lineno, blocks.last().unwrap().name.clone(), args_str.to_string()));
            continue;
        }
        if let Some(rest) = line.strip_prefix("out ") {
            match rest.split_once('=') {
                Some((name, target)) => {
                    let name = name.trim().to_string();
                    raw_outputs.push((lineno, format!("out!{name}"), target.trim().to_string()));
                }
                None => errors.push(err(lineno, "output needs `name = block`")),
            }
            continue;
        }
        errors.push(err(lineno, &format!("unrecognized statement `{line}`")));
    }

    // Second pass: resolve references now that every name is known.
    let mut outputs: Vec<(String, usize)> = Vec::new();
    let name_of_input: BTreeMap<&str, usize> =
        inputs.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let name_of_block: BTreeMap<String, usize> =
        blocks.iter().enumerate().map(|(i, b)| (b.name.clone(), i)).collect();

    let resolve = |token: &str| -> Option<Ref> {
        if let Some(&i) = name_of_input.get(token) {
            return Some(Ref::Input(i));
        }
        if let Some(&b) = name_of_block.get(token) {
            return Some(Ref::Block(b));
        }
        if let Some(hex) = token.strip_prefix("0x") {
            return u16::from_str_radix(hex, 16).ok().map(|v| Ref::Const(Word(v)));
        }
        token.parse::<u16>().ok().map(|v| Ref::Const(Word(v)))
    };

    for (lineno, owner, args_str) in &raw_outputs {
        if let Some(out_name) = owner.strip_prefix("out!") {
            match resolve(args_str) {
                Some(Ref::Block(b)) => {
                    if outputs.iter().any(|(n, _)| n == out_name) {
                        errors.push(err(*lineno, &format!("duplicate output `{out_name}`")));
                    } else {
                        outputs.push((out_name.to_string(), b));
                    }
                }
                _ => errors.push(err(
                    *lineno,
                    &format!("output `{out_name}` must reference a block"),
                )),
            }
            continue;
        }
        let idx = name_of_block[owner];
        let mut resolved = Vec::new();
        for token in args_str.split(',').map(|a| a.trim()) {
            match resolve(token) {
                Some(r) => resolved.push(r),
                None => {
                    errors.push(err(*lineno, &format!("unresolved reference `{token}`")));
                    resolved.push(Ref::Const(Word(0)));
                }
            }
        }
        blocks[idx].args = resolved;
    }

    let mut netlist = Netlist { inputs, blocks, outputs, levels: seen_levels };
    netlist.levels.sort();

    if errors.is_empty() {
        validate(&netlist, &mut errors);
    }
    if errors.is_empty() {
        Ok(netlist)
    } else {
        Err(errors)
    }
}

fn validate(netlist: &Netlist, errors: &mut Vec<NetlistError>) {
    // Type discipline: boolean operand slots need boolean values.
    for (i, b) in netlist.blocks.iter().enumerate() {
        let bool_slots: &[usize] = match b.op {
            BlockOp::Not => &[0],
            BlockOp::And | BlockOp::Or => &[0, 1],
            BlockOp::Mux2 => &[2],
            _ => &[],
        };
        for &slot in bool_slots {
            if netlist.ref_type(b.args[slot]) != SigType::Bool {
                errors.push(err(
                    0,
                    &format!("block `{}` input {slot} must be boolean", netlist.blocks[i].name),
                ));
            }
        }
    }
    // Combinational cycles: DFS over block edges, DELAY1 breaks loops.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks = vec![Mark::White; netlist.blocks.len()];
    fn visit(
        netlist: &Netlist,
        marks: &mut Vec<Mark>,
        i: usize,
        errors: &mut Vec<NetlistError>,
    ) {
        if netlist.blocks[i].op == BlockOp::Delay1 {
            // The register output does not depend combinationally on the
            // input, so the cycle check does not traverse it.
            marks[i] = Mark::Black;
            return;
        }
        marks[i] = Mark::Grey;
        for &arg in &netlist.blocks[i].args {
            if let Ref::Block(j) = arg {
                match marks[j] {
                    Mark::White => visit(netlist, marks, j, errors),
                    Mark::Grey => errors.push(err(
                        0,
                        &format!("combinational cycle through `{}`", netlist.blocks[j].name),
                    )),
                    Mark::Black => {}
                }
            }
        }
        marks[i] = Mark::Black;
    }
    for i in 0..netlist.blocks.len() {
        if marks[i] == Mark::White {
            visit(netlist, &mut marks, i, errors);
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_ascii_alphabetic()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn err(line: usize, message: &str) -> NetlistError {
    NetlistError { line, message: message.to_string() }
}

/// Cruise-control operational semantics: the reference rule for what the
/// target speed becomes under each condition. The netlist must realize
/// this; tests use it to generate stimuli and expectations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CruiseCondition {
    Set,
    Decrement,
    Increment,
    Cancel,
}

pub fn cruise_target_rule(condition: CruiseCondition, actual: Word, target: Word) -> Word {
    match condition {
        CruiseCondition::Set => actual,
        CruiseCondition::Decrement => target.wrapping_sub(Word::ONE),
        CruiseCondition::Increment => target.wrapping_add(Word::ONE),
        CruiseCondition::Cancel => Word::ZERO,
    }
}
