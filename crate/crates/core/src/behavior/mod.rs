//! Program behaviors, refinement, and preservation checking.
//!
//! A behavior pairs a trace with one of terminates / diverges / goes wrong.
//! Infinite traces cannot be observed at finite fuel, so a run that neither
//! finishes nor certifies silent divergence is reported as `Unresolved` with
//! the finite prefix it produced.

mod divergence;
mod probes;

use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::bigstep::behavior_big;
use crate::oracle::{Oracle, OracleMode, Trace};
use crate::smallstep::{self, RunStatus};
use crate::state::Env;
use crate::syntax::Program;

pub use divergence::{
    guard, probe_productive, schedule_from_run, validate_divergence_schedule, ClaimedTrace,
    DivergenceSchedule, Productivity, ProductiveReport, TraceLen, DEFAULT_LADDER,
};
pub use probes::{
    alternative_returns, probe_determinacy, probe_determinacy_with, probe_receptiveness,
    probe_receptiveness_with, Runner, SmallStepRunner,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedBehavior {
    Terminates(Trace, Env),
    GoesWrong(Trace),
    DivergesSilently(Trace),
    Unresolved(Trace),
}

impl BoundedBehavior {
    pub fn trace(&self) -> &Trace {
        match self {
            BoundedBehavior::Terminates(t, _)
            | BoundedBehavior::GoesWrong(t)
            | BoundedBehavior::DivergesSilently(t)
            | BoundedBehavior::Unresolved(t) => t,
        }
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self, BoundedBehavior::Unresolved(_))
    }

    pub fn is_wrong(&self) -> bool {
        matches!(self, BoundedBehavior::GoesWrong(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            BoundedBehavior::Terminates(..) => "terminates",
            BoundedBehavior::GoesWrong(_) => "goes_wrong",
            BoundedBehavior::DivergesSilently(_) => "diverges_silently",
            BoundedBehavior::Unresolved(_) => "unresolved",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({"status": self.label(), "trace": self.trace()});
        if let BoundedBehavior::Terminates(_, env) = self {
            v["final"] = env.to_json();
        }
        v
    }
}

impl Serialize for BoundedBehavior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl fmt::Display for BoundedBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundedBehavior::Terminates(t, env) => write!(f, "terminates [{t:.8}] with {env:?}"),
            other => write!(f, "{} [{:.8}]", other.label(), other.trace()),
        }
    }
}

/// Classifies the small-step run of `p`. A scripted oracle running dry leaves
/// the behavior unresolved.
pub fn classify(p: &Program, oracle: &mut Oracle, fuel: u64) -> BoundedBehavior {
    match smallstep::run(p, oracle, fuel) {
        Ok(r) => match r.status {
            RunStatus::Terminated(env) => BoundedBehavior::Terminates(r.trace, env),
            RunStatus::WentWrong(_) => BoundedBehavior::GoesWrong(r.trace),
            RunStatus::SilentCycle => BoundedBehavior::DivergesSilently(r.trace),
            RunStatus::FuelExhausted => BoundedBehavior::Unresolved(r.trace),
        },
        Err(aborted) => BoundedBehavior::Unresolved(aborted.trace),
    }
}

pub fn classify_with(p: &Program, mode: &OracleMode, fuel: u64) -> BoundedBehavior {
    classify(p, &mut mode.oracle(), fuel)
}

/// Classifies `p` at every fuel in `fuels` from a single run at the largest
/// one: a run at lower fuel is a prefix of a run at higher fuel.
pub fn classify_ladder(p: &Program, mode: &OracleMode, fuels: &[u64]) -> Vec<BoundedBehavior> {
    let Some(&top) = fuels.iter().max() else {
        return Vec::new();
    };
    let r = match smallstep::run(p, &mut mode.oracle(), top) {
        Ok(r) => r,
        Err(_) => return fuels.iter().map(|&f| classify_with(p, mode, f)).collect(),
    };
    fuels
        .iter()
        .map(|&f| {
            let s = r.steps_used;
            match &r.status {
                RunStatus::Terminated(env) if s <= f => {
                    BoundedBehavior::Terminates(r.trace.clone(), env.clone())
                }
                RunStatus::WentWrong(_) if s < f => BoundedBehavior::GoesWrong(r.trace.clone()),
                RunStatus::SilentCycle if s <= f => BoundedBehavior::DivergesSilently(r.trace.clone()),
                _ => {
                    let n = r.event_steps.iter().take_while(|&&e| e <= f).count();
                    BoundedBehavior::Unresolved(r.trace.prefix(n))
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub program: String,
    pub transformed: String,
    pub oracle: String,
    pub fuel: u64,
    pub traces: CounterexampleTraces,
    pub behaviors: [&'static str; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleTraces {
    pub source: Trace,
    pub target: Trace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub reason: String,
    pub counterexample: Option<Counterexample>,
}

pub type RefinementVerdict = Verdict;

impl Verdict {
    pub fn pass(reason: impl Into<String>) -> Verdict {
        Verdict {
            holds: true,
            reason: reason.into(),
            counterexample: None,
        }
    }

    pub fn fail(reason: impl Into<String>) -> Verdict {
        let reason = reason.into();
        debug_assert!(!reason.is_empty());
        Verdict {
            holds: false,
            reason,
            counterexample: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("verdicts serialize")
    }
}

/// `b1 ≼ b2`: identical behaviors, or `b2` goes wrong after a prefix of
/// `b1`'s trace. Both behaviors must be resolved.
pub fn refines(b1: &BoundedBehavior, b2: &BoundedBehavior) -> RefinementVerdict {
    use BoundedBehavior::*;
    if !b1.is_resolved() || !b2.is_resolved() {
        return Verdict::fail("refinement needs resolved behaviors on both sides");
    }
    if let GoesWrong(t2) = b2 {
        if t2.is_prefix_of(b1.trace()) {
            return Verdict::pass("refined behavior goes wrong after a prefix of the trace");
        }
    }
    if b1.label() != b2.label() {
        return Verdict::fail(format!("behavior {} does not refine {}", b1.label(), b2.label()));
    }
    if b1.trace() != b2.trace() {
        return Verdict::fail(format!("traces differ: [{:.8}] vs [{:.8}]", b1.trace(), b2.trace()));
    }
    if let (Terminates(_, e1), Terminates(_, e2)) = (b1, b2) {
        if e1 != e2 {
            return Verdict::fail(format!("final registers differ: {e1:?} vs {e2:?}"));
        }
    }
    Verdict::pass("identical behaviors")
}

/// Refinement check that tolerates unresolved behaviors by requiring only
/// what every completion of the unresolved side would need: an unresolved
/// trace must be a prefix of a resolved one (or merely comparable with it
/// when the refined behavior goes wrong), and two unresolved traces must be
/// comparable.
pub fn refines_bounded(target: &BoundedBehavior, source: &BoundedBehavior) -> RefinementVerdict {
    let (tt, ts) = (target.trace(), source.trace());
    match (target.is_resolved(), source.is_resolved()) {
        (true, true) => refines(target, source),
        (true, false) => {
            if ts.is_prefix_of(tt) {
                Verdict::pass("unresolved source trace is a prefix of the target's")
            } else {
                Verdict::fail(format!(
                    "source already produced [{ts:.8}], beyond target's complete trace [{tt:.8}] ({})",
                    target.label()
                ))
            }
        }
        (false, true) => {
            let ok = if source.is_wrong() {
                tt.comparable(ts)
            } else {
                tt.is_prefix_of(ts)
            };
            if ok {
                Verdict::pass("unresolved target trace is consistent with the source")
            } else {
                Verdict::fail(format!(
                    "target produced [{tt:.8}], inconsistent with source's complete trace [{ts:.8}] ({})",
                    source.label()
                ))
            }
        }
        (false, false) => {
            if tt.comparable(ts) {
                Verdict::pass("unresolved traces agree up to the shorter frontier")
            } else {
                Verdict::fail(format!("unresolved traces diverge: [{tt:.8}] vs [{ts:.8}]"))
            }
        }
    }
}

fn counterexample(
    p: &Program,
    q: &Program,
    mode: &OracleMode,
    fuel: u64,
    source: &BoundedBehavior,
    target: &BoundedBehavior,
) -> Counterexample {
    Counterexample {
        program: p.to_string(),
        transformed: q.to_string(),
        oracle: mode.spec(),
        fuel,
        traces: CounterexampleTraces {
            source: source.trace().clone(),
            target: target.trace().clone(),
        },
        behaviors: [source.label(), target.label()],
    }
}

/// Forward preservation `p ⇉ q`: under each oracle, the behavior of `q`
/// refines the behavior of `p`.
pub fn check_forward(
    p: &Program,
    q: &Program,
    oracles: &[OracleMode],
    fuel: u64,
) -> RefinementVerdict {
    for mode in oracles {
        let source = classify_with(p, mode, fuel);
        let target = classify_with(q, mode, fuel);
        let v = refines_bounded(&target, &source);
        if !v.holds {
            return Verdict {
                holds: false,
                reason: format!("oracle {mode}: {}", v.reason),
                counterexample: Some(counterexample(p, q, mode, fuel, &source, &target)),
            };
        }
    }
    Verdict::pass(format!("{} oracle(s), fuel {fuel}", oracles.len()))
}

/// [`check_forward`] at each fuel of a ladder, smallest fuel reported first.
pub fn check_forward_ladder(
    p: &Program,
    q: &Program,
    oracles: &[OracleMode],
    fuels: &[u64],
) -> RefinementVerdict {
    let mut order: Vec<usize> = (0..fuels.len()).collect();
    order.sort_by_key(|&i| fuels[i]);
    for mode in oracles {
        let sources = classify_ladder(p, mode, fuels);
        let targets = classify_ladder(q, mode, fuels);
        for &i in &order {
            let v = refines_bounded(&targets[i], &sources[i]);
            if !v.holds {
                return Verdict {
                    holds: false,
                    reason: format!("oracle {mode}, fuel {}: {}", fuels[i], v.reason),
                    counterexample: Some(counterexample(p, q, mode, fuels[i], &sources[i], &targets[i])),
                };
            }
        }
    }
    Verdict::pass(format!("{} oracle(s), fuels {fuels:?}", oracles.len()))
}

/// Backward preservation `p ⇇ q`: every observed behavior of `q` refines
/// some observed behavior of `p` (the same oracle is tried first).
pub fn check_backward(
    p: &Program,
    q: &Program,
    oracles: &[OracleMode],
    fuel: u64,
) -> RefinementVerdict {
    let sources: Vec<BoundedBehavior> = oracles.iter().map(|m| classify_with(p, m, fuel)).collect();
    for (i, mode) in oracles.iter().enumerate() {
        let target = classify_with(q, mode, fuel);
        let matched = std::iter::once(i)
            .chain((0..oracles.len()).filter(|&j| j != i))
            .any(|j| refines_bounded(&target, &sources[j]).holds);
        if !matched {
            let v = refines_bounded(&target, &sources[i]);
            return Verdict {
                holds: false,
                reason: format!(
                    "oracle {mode}: target behavior {target} refines no source behavior ({})",
                    v.reason
                ),
                counterexample: Some(counterexample(p, q, mode, fuel, &sources[i], &target)),
            };
        }
    }
    Verdict::pass(format!("{} oracle(s), fuel {fuel}", oracles.len()))
}

/// Forward preservation in both directions.
pub fn check_equiv(
    p: &Program,
    q: &Program,
    oracles: &[OracleMode],
    fuel: u64,
) -> RefinementVerdict {
    let fw = check_forward(p, q, oracles, fuel);
    if !fw.holds {
        return fw;
    }
    let bw = check_forward(q, p, oracles, fuel);
    if !bw.holds {
        return Verdict {
            reason: format!("reverse direction: {}", bw.reason),
            ..bw
        };
    }
    Verdict::pass(format!("equivalent under {} oracle(s), fuel {fuel}", oracles.len()))
}

/// Small-step and big-step classifications of `p` agree under `mode`.
///
/// Resolved behaviors must coincide. When only one side resolves at `fuel`,
/// the other side is re-run with more fuel before comparing; behaviors that
/// stay unresolved must have comparable traces.
pub fn check_agreement(p: &Program, mode: &OracleMode, fuel: u64) -> Verdict {
    let small = classify_with(p, mode, fuel);
    let mut big = behavior_big(p, &mut mode.oracle(), fuel);

    if small.is_resolved() && !big.is_resolved() {
        if let BoundedBehavior::DivergesSilently(t) = &small {
            return if big.trace().is_prefix_of(t) {
                Verdict::pass("silent divergence; big-step trace is a prefix")
            } else {
                Verdict::fail(format!("big-step produced [{:.8}] beyond silent divergence after [{t:.8}]", big.trace()))
            };
        }
        // Every unit of big-step fuel matches at least one small step.
        let steps = smallstep::run(p, &mut mode.oracle(), fuel)
            .map(|r| r.steps_used)
            .unwrap_or(fuel);
        big = behavior_big(p, &mut mode.oracle(), steps + 1);
    }
    let mut small = small;
    let mut extra = fuel.max(1);
    while big.is_resolved() && !small.is_resolved() && extra <= fuel.max(1) * 64 {
        extra *= 2;
        small = classify_with(p, mode, extra);
    }

    match (small.is_resolved(), big.is_resolved()) {
        (true, true) => {
            if small == big {
                Verdict::pass(format!("both semantics: {small}"))
            } else {
                Verdict::fail(format!("small-step {small} vs big-step {big}"))
            }
        }
        _ => {
            if small.trace().comparable(big.trace()) {
                Verdict::pass("unresolved with prefix-consistent traces")
            } else {
                Verdict::fail(format!("small-step {small} vs big-step {big}"))
            }
        }
    }
}
