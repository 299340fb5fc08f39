//! Finite-trace temporal property checker.
//!
//! The property mini-language covers what the verification flow needs:
//!
//! ```text
//! G( L.B0.lat0 == 1 && L.B0.lat1 == 1 => F[8]( rising(L.B0.done) && L.B0.out == golden(L.B0.out) ) )
//! ```
//!
//! `G` quantifies over every 5 ns grid point of the trace; `F[H]` looks at
//! most H half-ticks ahead. Evaluation is three-valued: an `F` obligation
//! still open when the trace ends makes the verdict INCONCLUSIVE rather
//! than HOLDS. Signals hold their last recorded value between rows and
//! are 0 before their first row.

use std::collections::BTreeMap;
use std::fmt;

use crate::sim::NS_PER_HALF_TICK;
use crate::trace::Trace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated { time_ns: u64 },
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "HOLDS"),
            Verdict::Violated { time_ns } => write!(f, "VIOLATED({time_ns})"),
            Verdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PropertyError {
    #[error("property syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown signal `{0}` in trace")]
    UnknownSignal(String),
    #[error("property references golden({0}) but no golden trace was provided")]
    MissingGolden(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Literal(u64),
    Golden(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop {
    Globally(Box<Prop>),
    /// Bounded eventually, horizon in half-ticks.
    Finally(u64, Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Not(Box<Prop>),
    Rising(String),
    Eq(String, Rhs),
    Ne(String, Rhs),
}

impl Prop {
    fn signals(&self, own: &mut Vec<String>, golden: &mut Vec<String>) {
        match self {
            Prop::Globally(p) | Prop::Finally(_, p) | Prop::Not(p) => p.signals(own, golden),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.signals(own, golden);
                b.signals(own, golden);
            }
            Prop::Rising(s) => own.push(s.clone()),
            Prop::Eq(s, rhs) | Prop::Ne(s, rhs) => {
                own.push(s.clone());
                if let Rhs::Golden(g) = rhs {
                    golden.push(g.clone());
                }
            }
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser { text, pos: 0 }
    }

    fn error(&self, message: &str) -> PropertyError {
        PropertyError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), PropertyError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn ident(&mut self) -> Result<String, PropertyError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '@' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.error("expected identifier"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<u64, PropertyError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.error("expected number"));
        }
        self.text[start..self.pos].parse().map_err(|_| self.error("bad number"))
    }

    fn parse_expr(&mut self) -> Result<Prop, PropertyError> {
        self.skip_ws();
        if self.eat("G(") || self.eat("G (") {
            let inner = self.parse_expr()?;
            self.expect(")")?;
            return Ok(Prop::Globally(Box::new(inner)));
        }
        if self.eat("F[") {
            let horizon = self.number()?;
            self.expect("]")?;
            self.expect("(")?;
            let inner = self.parse_expr()?;
            self.expect(")")?;
            return Ok(Prop::Finally(horizon, Box::new(inner)));
        }
        let lhs = self.parse_or()?;
        self.skip_ws();
        if self.eat("=>") {
            let rhs = self.parse_expr()?;
            return Ok(Prop::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Prop, PropertyError> {
        let mut lhs = self.parse_and()?;
        loop {
            self.skip_ws();
            if self.eat("||") {
                let rhs = self.parse_and()?;
                lhs = Prop::Or(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_and(&mut self) -> Result<Prop, PropertyError> {
        let mut lhs = self.parse_unary()?;
        loop {
            self.skip_ws();
            if self.eat("&&") {
                let rhs = self.parse_unary()?;
                lhs = Prop::And(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Prop, PropertyError> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(Prop::Not(Box::new(self.parse_unary()?)));
        }
        if self.eat("(") {
            let inner = self.parse_expr()?;
            self.expect(")")?;
            return Ok(inner);
        }
        if self.text[self.pos..].starts_with("G(") || self.text[self.pos..].starts_with("F[") {
            return self.parse_expr();
        }
        if self.eat("rising(") {
            let sig = self.ident()?;
            self.expect(")")?;
            return Ok(Prop::Rising(sig));
        }
        let sig = self.ident()?;
        self.skip_ws();
        let negated = if self.eat("==") {
            false
        } else if self.eat("!=") {
            true
        } else {
            return Err(self.error("expected `==` or `!=`"));
        };
        self.skip_ws();
        let rhs = if self.eat("golden(") {
            let g = self.ident()?;
            self.expect(")")?;
            Rhs::Golden(g)
        } else {
            Rhs::Literal(self.number()?)
        };
        Ok(if negated { Prop::Ne(sig, rhs) } else { Prop::Eq(sig, rhs) })
    }
}

pub fn parse_property(text: &str) -> Result<Prop, PropertyError> {
    // Strip comment lines; the property itself may span several lines.
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ");
    let mut parser = Parser::new(&body);
    let prop = parser.parse_expr()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(parser.error("trailing input after property"));
    }
    Ok(prop)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tri {
    True,
    False,
    Unknown,
}

struct SignalView {
    values: BTreeMap<String, Vec<(u64, u64)>>,
}

impl SignalView {
    fn from_trace(trace: &Trace) -> SignalView {
        let mut values: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
        for row in trace.signal_rows() {
            if let Ok(v) = row.value.parse::<u64>() {
                values.entry(row.name.clone()).or_default().push((row.time_ns, v));
            }
        }
        SignalView { values }
    }

    fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    /// Last value at or before t; 0 before the first row.
    fn at(&self, name: &str, t: u64) -> u64 {
        let rows = &self.values[name];
        match rows.binary_search_by_key(&t, |(rt, _)| *rt) {
            Ok(i) => rows[i].1,
            Err(0) => 0,
            Err(i) => rows[i - 1].1,
        }
    }
}

pub struct Checker<'a> {
    own: SignalView,
    golden: Option<SignalView>,
    end_ns: u64,
    _trace: &'a Trace,
}

impl<'a> Checker<'a> {
    pub fn new(
        trace: &'a Trace,
        golden: Option<&Trace>,
        prop: &Prop,
    ) -> Result<Checker<'a>, PropertyError> {
        let own = SignalView::from_trace(trace);
        let golden_view = golden.map(SignalView::from_trace);
        let mut own_sigs = Vec::new();
        let mut golden_sigs = Vec::new();
        prop.signals(&mut own_sigs, &mut golden_sigs);
        for s in &own_sigs {
            if !own.has(s) {
                return Err(PropertyError::UnknownSignal(s.clone()));
            }
        }
        for g in &golden_sigs {
            match &golden_view {
                None => return Err(PropertyError::MissingGolden(g.clone())),
                Some(view) if !view.has(g) => {
                    return Err(PropertyError::UnknownSignal(format!("golden {g}")))
                }
                _ => {}
            }
        }
        Ok(Checker { own, golden: golden_view, end_ns: trace.end_time_ns(), _trace: trace })
    }

    fn rhs_at(&self, rhs: &Rhs, t: u64) -> u64 {
        match rhs {
            Rhs::Literal(v) => *v,
            Rhs::Golden(sig) => self.golden.as_ref().expect("prechecked").at(sig, t),
        }
    }

    fn eval(&self, prop: &Prop, t: u64) -> Tri {
        match prop {
            Prop::Globally(p) => {
                let mut unknown = false;
                let mut u = t;
                while u <= self.end_ns {
                    match self.eval(p, u) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => unknown = true,
                        Tri::True => {}
                    }
                    u += NS_PER_HALF_TICK;
                }
                if unknown {
                    Tri::Unknown
                } else {
                    Tri::True
                }
            }
            Prop::Finally(horizon, p) => {
                let deadline = t + horizon * NS_PER_HALF_TICK;
                let mut u = t;
                while u <= deadline.min(self.end_ns) {
                    if self.eval(p, u) == Tri::True {
                        return Tri::True;
                    }
                    u += NS_PER_HALF_TICK;
                }
                if deadline > self.end_ns {
                    Tri::Unknown // obligation truncated by the trace end
                } else {
                    Tri::False
                }
            }
            Prop::And(a, b) => match (self.eval(a, t), self.eval(b, t)) {
                (Tri::False, _) | (_, Tri::False) => Tri::False,
                (Tri::True, Tri::True) => Tri::True,
                _ => Tri::Unknown,
            },
            Prop::Or(a, b) => match (self.eval(a, t), self.eval(b, t)) {
                (Tri::True, _) | (_, Tri::True) => Tri::True,
                (Tri::False, Tri::False) => Tri::False,
                _ => Tri::Unknown,
            },
            Prop::Implies(a, b) => match (self.eval(a, t), self.eval(b, t)) {
                (Tri::False, _) => Tri::True,
                (Tri::True, v) => v,
                (Tri::Unknown, Tri::True) => Tri::True,
                (Tri::Unknown, _) => Tri::Unknown,
            },
            Prop::Not(p) => match self.eval(p, t) {
                Tri::True => Tri::False,
                Tri::False => Tri::True,
                Tri::Unknown => Tri::Unknown,
            },
            Prop::Rising(sig) => {
                let now = self.own.at(sig, t);
                let before = if t == 0 { 0 } else { self.own.at(sig, t - NS_PER_HALF_TICK) };
                if before == 0 && now != 0 {
                    Tri::True
                } else {
                    Tri::False
                }
            }
            Prop::Eq(sig, rhs) => {
                if self.own.at(sig, t) == self.rhs_at(rhs, t) {
                    Tri::True
                } else {
                    Tri::False
                }
            }
            Prop::Ne(sig, rhs) => {
                if self.own.at(sig, t) != self.rhs_at(rhs, t) {
                    Tri::True
                } else {
                    Tri::False
                }
            }
        }
    }

    pub fn verdict(&self, prop: &Prop) -> Verdict {
        match prop {
            Prop::Globally(inner) => {
                let mut unknown = false;
                let mut t = 0;
                while t <= self.end_ns {
                    match self.eval(inner, t) {
                        Tri::False => return Verdict::Violated { time_ns: t },
                        Tri::Unknown => unknown = true,
                        Tri::True => {}
                    }
                    t += NS_PER_HALF_TICK;
                }
                if unknown {
                    Verdict::Inconclusive
                } else {
                    Verdict::Holds
                }
            }
            other => match self.eval(other, 0) {
                Tri::True => Verdict::Holds,
                Tri::False => Verdict::Violated { time_ns: 0 },
                Tri::Unknown => Verdict::Inconclusive,
            },
        }
    }
}

/// Parse and evaluate a property file against a trace (and optional
/// golden trace for `golden(sig)` comparisons).
pub fn check_property(
    trace: &Trace,
    golden: Option<&Trace>,
    prop_text: &str,
) -> Result<Verdict, PropertyError> {
    let prop = parse_property(prop_text)?;
    let checker = Checker::new(trace, golden, &prop)?;
    Ok(checker.verdict(&prop))
}
