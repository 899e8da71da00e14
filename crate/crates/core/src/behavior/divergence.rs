//! Divergence with a general trace, at finite scale.
//!
//! A divergence derivation `s ⇑(t·τ, n)` chains steps `s →t s'` with
//! `s' ⇑(τ, m)` under `guard τ n t m := τ = ε ∨ (t = ε ⇒ m < n)`: whenever a
//! step is silent and trace remains to be produced, the index must strictly
//! decrease, so the claimed trace really is produced.

use serde::Serialize;

use super::classify;
use crate::oracle::OracleMode;
use crate::smallstep::{BoundedRun, RunStatus};
use crate::syntax::Program;

/// Length of the trace a derivation still has to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceLen {
    Finite(usize),
    Infinite,
}

pub fn guard(tau_remaining: TraceLen, n: u64, t_len: usize, m: u64) -> bool {
    tau_remaining == TraceLen::Finite(0) || t_len != 0 || m < n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClaimedTrace {
    /// Exactly this many events, then silence forever.
    Finite(usize),
    Infinite,
}

/// A window of a claimed divergence derivation: per step, how many events it
/// emitted (0 or 1) and the index `n` claimed at that step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceSchedule {
    pub claimed: ClaimedTrace,
    pub steps: Vec<(u8, u64)>,
}

/// Checks the guard at every rule application in the window. The index
/// claimed by the last step has no successor in the window and is not
/// checked.
pub fn validate_divergence_schedule(schedule: &DivergenceSchedule) -> bool {
    let mut remaining = match schedule.claimed {
        ClaimedTrace::Finite(k) => TraceLen::Finite(k),
        ClaimedTrace::Infinite => TraceLen::Infinite,
    };
    for (j, &(emitted, n)) in schedule.steps.iter().enumerate() {
        if emitted > 1 {
            return false;
        }
        if emitted == 1 {
            remaining = match remaining {
                TraceLen::Finite(0) => return false,
                TraceLen::Finite(k) => TraceLen::Finite(k - 1),
                TraceLen::Infinite => TraceLen::Infinite,
            };
        }
        if let Some(&(_, m)) = schedule.steps.get(j + 1) {
            if !guard(remaining, n, emitted as usize, m) {
                return false;
            }
        }
    }
    true
}

/// Builds the derivation indices witnessed by a bounded run: each step claims
/// the number of steps left until the next event. A silent cycle claims its
/// trace is finite; any other run is read as a productive prefix and the
/// window stops at its last event.
pub fn schedule_from_run(run: &BoundedRun) -> DivergenceSchedule {
    let silent = run.status == RunStatus::SilentCycle;
    let last = if silent {
        run.steps_used
    } else {
        run.event_steps.last().copied().unwrap_or(0)
    };
    let mut steps = Vec::with_capacity(last as usize);
    let mut next_event = run.event_steps.iter().peekable();
    for step in 1..=last {
        while next_event.peek().is_some_and(|&&e| e < step) {
            next_event.next();
        }
        let (emitted, n) = match next_event.peek() {
            Some(&&e) => ((e == step) as u8, e - step),
            None => (0, 0),
        };
        steps.push((emitted, n));
    }
    DivergenceSchedule {
        claimed: if silent {
            ClaimedTrace::Finite(run.trace.len())
        } else {
            ClaimedTrace::Infinite
        },
        steps,
    }
}

/// Fuel ladder used when probing for productive divergence: 2^10 … 2^20.
pub const DEFAULT_LADDER: [u64; 11] = [
    1 << 10,
    1 << 11,
    1 << 12,
    1 << 13,
    1 << 14,
    1 << 15,
    1 << 16,
    1 << 17,
    1 << 18,
    1 << 19,
    1 << 20,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Productivity {
    /// Resolved at some rung of the ladder.
    Resolved,
    /// Unresolved at every rung with strictly growing traces.
    ProductivelyDivergentUnconfirmed,
    /// Unresolved, but the trace stopped growing somewhere on the ladder.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductiveReport {
    pub fuels: Vec<u64>,
    pub trace_lengths: Vec<usize>,
    pub verdict: Productivity,
}

/// Reports whether `p` looks productively divergent under `mode`. This is a
/// report, not a certificate: no finite run proves an infinite trace.
pub fn probe_productive(p: &Program, mode: &OracleMode, ladder: &[u64]) -> ProductiveReport {
    let mut fuels = Vec::new();
    let mut trace_lengths = Vec::new();
    let mut verdict = Productivity::ProductivelyDivergentUnconfirmed;
    for &fuel in ladder {
        let b = classify(p, &mut mode.oracle(), fuel);
        fuels.push(fuel);
        trace_lengths.push(b.trace().len());
        if b.is_resolved() {
            verdict = Productivity::Resolved;
            break;
        }
        if let [.., a, b] = trace_lengths[..] {
            if b <= a {
                verdict = Productivity::Stalled;
            }
        }
    }
    if trace_lengths.is_empty() {
        verdict = Productivity::Stalled;
    }
    ProductiveReport {
        fuels,
        trace_lengths,
        verdict,
    }
}
