//! Flat, append-only simulation trace.
//!
//! Rows are `time_ns,kind,name,value` with LF endings, values in decimal,
//! sorted by time, then SIGNAL < FAULT < HEAL < EVENT, then name. Signal
//! rows are change-only: a signal holds its value until its next row, and
//! is 0 before its first row. Metadata travels in `#` comment lines ahead
//! of the header so committed golden files are bit-exact reproducible.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum RowKind {
    Signal,
    Fault,
    Heal,
    Event,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::Signal => "SIGNAL",
            RowKind::Fault => "FAULT",
            RowKind::Heal => "HEAL",
            RowKind::Event => "EVENT",
        }
    }

    pub fn parse(s: &str) -> Option<RowKind> {
        Some(match s {
            "SIGNAL" => RowKind::Signal,
            "FAULT" => RowKind::Fault,
            "HEAL" => RowKind::Heal,
            "EVENT" => RowKind::Event,
            _ => return None,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceRow {
    pub time_ns: u64,
    pub kind: RowKind,
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// (key, value) metadata pairs, serialized as `# key: value`.
    pub meta: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn push(&mut self, time_ns: u64, kind: RowKind, name: impl Into<String>, value: impl Into<String>) {
        self.rows.push(TraceRow { time_ns, kind, name: name.into(), value: value.into() });
    }

    /// Stable within-tick ordering; insertion order breaks remaining ties.
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| (a.time_ns, a.kind, &a.name).cmp(&(b.time_ns, b.kind, &b.name)));
    }

    pub fn signal_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Signal)
    }

    /// The SIGNAL projection as comparable (time, name, value) tuples.
    pub fn signal_projection(&self) -> Vec<(u64, &str, &str)> {
        self.signal_rows()
            .map(|r| (r.time_ns, r.name.as_str(), r.value.as_str()))
            .collect()
    }

    /// First row at which `name` holds `value`, if any.
    pub fn first_signal_at(&self, name: &str, value: &str) -> Option<u64> {
        self.signal_rows()
            .find(|r| r.name == name && r.value == value)
            .map(|r| r.time_ns)
    }

    /// First row at which `name` changes to something other than `value`.
    pub fn first_signal_not(&self, name: &str, value: &str) -> Option<u64> {
        self.signal_rows()
            .find(|r| r.name == name && r.value != value)
            .map(|r| r.time_ns)
    }

    pub fn end_time_ns(&self) -> u64 {
        self.rows.last().map(|r| r.time_ns).unwrap_or(0)
    }

    /// Per-signal change lists for value reconstruction.
    pub fn signal_histories(&self) -> BTreeMap<&str, Vec<(u64, &str)>> {
        let mut map: BTreeMap<&str, Vec<(u64, &str)>> = BTreeMap::new();
        for r in self.signal_rows() {
            map.entry(r.name.as_str()).or_default().push((r.time_ns, r.value.as_str()));
        }
        map
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("time_ns,kind,name,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.time_ns, r.kind.name(), r.name, r.value));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Trace, TraceParseError> {
        let mut trace = Trace::default();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once(':') {
                    trace.meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !header_seen {
                if line != "time_ns,kind,name,value" {
                    return Err(TraceParseError { line: lineno, message: "bad header".into() });
                }
                header_seen = true;
                continue;
            }
            let mut fields = line.splitn(4, ',');
            let time = fields
                .next()
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| TraceParseError { line: lineno, message: "bad time".into() })?;
            let kind = fields
                .next()
                .and_then(RowKind::parse)
                .ok_or_else(|| TraceParseError { line: lineno, message: "bad row kind".into() })?;
            let name = fields
                .next()
                .ok_or_else(|| TraceParseError { line: lineno, message: "missing name".into() })?;
            let value = fields
                .next()
                .ok_or_else(|| TraceParseError { line: lineno, message: "missing value".into() })?;
            trace.push(time, kind, name, value);
        }
        if !header_seen {
            return Err(TraceParseError { line: 0, message: "missing header".into() });
        }
        Ok(trace)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TraceParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for TraceParseError {}
