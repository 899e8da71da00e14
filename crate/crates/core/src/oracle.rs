//! The environment answering external calls, and the traces those calls
//! leave behind.
//!
//! External calls are the only source of nondeterminism. An [`Oracle`] fixes
//! one resolution of it: the value it returns is a deterministic function of
//! its mode, the function name, the argument and the call index.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Value;
use crate::syntax::Ident;

/// Range of values produced by seeded oracles. Kept small so that programs
/// branching on call results take both sides.
pub const SEEDED_RANGE: std::ops::RangeInclusive<Value> = -8..=8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum OracleMode {
    Scripted(Vec<Value>),
    Seeded(u64),
    Constant(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("scripted oracle exhausted at call #{index}")]
    Exhausted { index: usize },
    #[error("bad oracle spec `{0}` (expected const:N, seed:N or script:FILE)")]
    BadSpec(String),
    #[error("cannot read oracle script {path}: {reason}")]
    Script { path: String, reason: String },
}

impl OracleMode {
    /// Parses `const:7`, `seed:42`, `script:path.json`, or an inline
    /// `script:[1,2,3]`.
    pub fn parse_spec(spec: &str) -> Result<OracleMode, OracleError> {
        let bad = || OracleError::BadSpec(spec.to_string());
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" => rest.trim().parse().map(OracleMode::Constant).map_err(|_| bad()),
            "seed" => rest.trim().parse().map(OracleMode::Seeded).map_err(|_| bad()),
            "script" => {
                let rest = rest.trim();
                let json = if rest.starts_with('[') {
                    rest.to_string()
                } else {
                    std::fs::read_to_string(Path::new(rest)).map_err(|e| OracleError::Script {
                        path: rest.to_string(),
                        reason: e.to_string(),
                    })?
                };
                serde_json::from_str::<Vec<Value>>(&json)
                    .map(OracleMode::Scripted)
                    .map_err(|e| OracleError::Script {
                        path: rest.to_string(),
                        reason: e.to_string(),
                    })
            }
            _ => Err(bad()),
        }
    }

    pub fn spec(&self) -> String {
        match self {
            OracleMode::Constant(v) => format!("const:{v}"),
            OracleMode::Seeded(s) => format!("seed:{s}"),
            OracleMode::Scripted(vs) => format!(
                "script:{}",
                serde_json::to_string(vs).expect("integer lists serialize")
            ),
        }
    }

    pub fn oracle(&self) -> Oracle {
        Oracle::new(self.clone())
    }
}

impl FromStr for OracleMode {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OracleMode::parse_spec(s)
    }
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oracle {
    mode: OracleMode,
    cursor: usize,
    overrides: BTreeMap<usize, Value>,
}

impl Oracle {
    pub fn new(mode: OracleMode) -> Oracle {
        Oracle {
            mode,
            cursor: 0,
            overrides: BTreeMap::new(),
        }
    }

    pub fn constant(v: Value) -> Oracle {
        Oracle::new(OracleMode::Constant(v))
    }

    pub fn seeded(seed: u64) -> Oracle {
        Oracle::new(OracleMode::Seeded(seed))
    }

    pub fn scripted(values: impl Into<Vec<Value>>) -> Oracle {
        Oracle::new(OracleMode::Scripted(values.into()))
    }

    /// Same oracle, except that call number `index` returns `value`.
    pub fn with_override(mut self, index: usize, value: Value) -> Oracle {
        self.overrides.insert(index, value);
        self
    }

    pub fn mode(&self) -> &OracleMode {
        &self.mode
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// A fresh copy with the cursor rewound (overrides kept).
    pub fn rewound(&self) -> Oracle {
        Oracle {
            cursor: 0,
            ..self.clone()
        }
    }

    /// Answers one external call and advances the cursor.
    pub fn call(&mut self, func: &str, arg: Value) -> Result<Value, OracleError> {
        let index = self.cursor;
        let ret = match self.overrides.get(&index) {
            Some(v) => *v,
            None => match &self.mode {
                OracleMode::Constant(v) => *v,
                OracleMode::Scripted(vs) => {
                    *vs.get(index).ok_or(OracleError::Exhausted { index })?
                }
                OracleMode::Seeded(seed) => seeded_value(*seed, func, arg, index),
            },
        };
        self.cursor += 1;
        Ok(ret)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn seeded_value(seed: u64, func: &str, arg: Value, index: usize) -> Value {
    let mixed = seed
        ^ fnv1a(func.as_bytes()).rotate_left(17)
        ^ (arg as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (index as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    ChaCha8Rng::seed_from_u64(mixed).gen_range(SEEDED_RANGE)
}

/// One external call: function, argument, and the value the environment
/// returned.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "fn")]
    pub func: Ident,
    pub arg: Value,
    pub ret: Value,
}

impl Event {
    pub fn new(func: &str, arg: Value, ret: Value) -> Event {
        Event {
            func: Ident::from(func),
            arg,
            ret,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})={}", self.func, self.arg, self.ret)
    }
}

/// Two events match when they call the same function with the same argument;
/// the returned values may differ.
pub fn match_events(a: &Event, b: &Event) -> bool {
    a.func == b.func && a.arg == b.arg
}

pub fn match_traces(a: &Trace, b: &Trace) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| match_events(x, y))
}

/// A finite sequence of events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace(Vec<Event>);

impl Trace {
    pub fn new() -> Trace {
        Trace(Vec::new())
    }

    pub fn push(&mut self, e: Event) {
        self.0.push(e);
    }

    pub fn extend(&mut self, other: &Trace) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn concat(&self, other: &Trace) -> Trace {
        let mut t = self.clone();
        t.extend(other);
        t
    }

    pub fn is_prefix_of(&self, other: &Trace) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }

    /// One trace is a prefix of the other.
    pub fn comparable(&self, other: &Trace) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn prefix(&self, len: usize) -> Trace {
        Trace(self.0[..len.min(self.len())].to_vec())
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }
}

impl Deref for Trace {
    type Target = [Event];

    fn deref(&self) -> &[Event] {
        &self.0
    }
}

impl From<Vec<Event>> for Trace {
    fn from(v: Vec<Event>) -> Trace {
        Trace(v)
    }
}

impl FromIterator<Event> for Trace {
    fn from_iter<T: IntoIterator<Item = Event>>(iter: T) -> Trace {
        Trace(iter.into_iter().collect())
    }
}

/// `{:.N}` shows at most N events.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        let shown = f.precision().unwrap_or(usize::MAX).min(self.len());
        let parts: Vec<String> = self[..shown].iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(" · "))?;
        if shown < self.len() {
            write!(f, " · … ({} events)", self.len())?;
        }
        Ok(())
    }
}
