//! Empirical determinacy and receptiveness checks.
//!
//! Both probes re-run a program under oracles that differ from a base oracle
//! in exactly one call's return value.

use super::{classify, BoundedBehavior, Verdict};
use crate::oracle::{match_events, Oracle, OracleMode};
use crate::state::Value;
use crate::syntax::Program;

/// Positions probed per run; longer traces are only probed up to here.
const MAX_PROBED_EVENTS: usize = 32;

/// Something that executes a program under an oracle.
pub trait Runner {
    fn behavior(&self, p: &Program, oracle: Oracle, fuel: u64) -> BoundedBehavior;
}

/// The small-step machine.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmallStepRunner;

impl Runner for SmallStepRunner {
    fn behavior(&self, p: &Program, mut oracle: Oracle, fuel: u64) -> BoundedBehavior {
        classify(p, &mut oracle, fuel)
    }
}

/// `count` values different from `ret`, in a fixed order.
pub fn alternative_returns(ret: Value, count: usize) -> Vec<Value> {
    let candidates = [
        ret.wrapping_add(1),
        0,
        ret.wrapping_sub(1),
        1,
        -1,
        ret.wrapping_mul(2).wrapping_add(3),
        i64::MAX,
        i64::MIN,
    ];
    let mut out = Vec::with_capacity(count);
    for v in candidates.into_iter().chain(100..) {
        if out.len() == count {
            break;
        }
        if v != ret && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Determinacy: identical oracles give identical behaviors, and runs that
/// share a trace prefix continue with matching events.
pub fn probe_determinacy_with(
    runner: &impl Runner,
    p: &Program,
    base: &OracleMode,
    variants: usize,
    fuel: u64,
) -> Verdict {
    let b0 = runner.behavior(p, base.oracle(), fuel);
    let again = runner.behavior(p, base.oracle(), fuel);
    if b0 != again {
        return Verdict::fail(format!("re-run with the same oracle differs: {b0} vs {again}"));
    }
    let t0 = b0.trace();
    for i in 0..t0.len().min(MAX_PROBED_EVENTS) {
        for alt in alternative_returns(t0[i].ret, variants) {
            let b = runner.behavior(p, base.oracle().with_override(i, alt), fuel);
            let t = b.trace();
            if t.len() < i || t[..i] != t0[..i] {
                return Verdict::fail(format!(
                    "changing return #{i} to {alt} altered earlier events: [{t}] vs [{t0}]"
                ));
            }
            if let Some(e) = t.get(i) {
                if !match_events(e, &t0[i]) {
                    return Verdict::fail(format!(
                        "after the same prefix, event #{i} is {e} in one run and {} in another",
                        t0[i]
                    ));
                }
            }
        }
    }
    Verdict::pass(format!("{} event position(s) probed", t0.len().min(MAX_PROBED_EVENTS)))
}

pub fn probe_determinacy(p: &Program, base: &OracleMode, variants: usize, fuel: u64) -> Verdict {
    probe_determinacy_with(&SmallStepRunner, p, base, variants, fuel)
}

/// Receptiveness: whatever value the environment returns at an event
/// position, the run still performs a matching event there, carrying that
/// value.
pub fn probe_receptiveness_with(
    runner: &impl Runner,
    p: &Program,
    base: &OracleMode,
    fuel: u64,
) -> Verdict {
    let b0 = runner.behavior(p, base.oracle(), fuel);
    let t0 = b0.trace();
    for i in 0..t0.len().min(MAX_PROBED_EVENTS) {
        for alt in alternative_returns(t0[i].ret, 3) {
            let b = runner.behavior(p, base.oracle().with_override(i, alt), fuel);
            match b.trace().get(i) {
                Some(e) if match_events(e, &t0[i]) && e.ret == alt => {}
                Some(e) => {
                    return Verdict::fail(format!(
                        "return {alt} at event #{i} was not accepted: got {e}, expected a match for {}",
                        t0[i]
                    ))
                }
                None => {
                    return Verdict::fail(format!(
                        "return {alt} at event #{i} was not accepted: run stopped as {b}"
                    ))
                }
            }
        }
    }
    Verdict::pass(format!("{} event position(s) probed", t0.len().min(MAX_PROBED_EVENTS)))
}

pub fn probe_receptiveness(p: &Program, base: &OracleMode, fuel: u64) -> Verdict {
    probe_receptiveness_with(&SmallStepRunner, p, base, fuel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Event, Trace};
    use crate::syntax::parse_program;
    use std::sync::atomic::{AtomicI64, Ordering};

    #[test]
    fn alternatives_avoid_the_original() {
        for ret in [-1, 0, 1, 5, i64::MAX] {
            let alts = alternative_returns(ret, 5);
            assert_eq!(alts.len(), 5);
            assert!(!alts.contains(&ret));
        }
    }

    #[test]
    fn arithmetic_program_is_determinate() {
        let p = parse_program("x := 3; y := x * x").unwrap();
        assert!(probe_determinacy(&p, &OracleMode::Constant(0), 3, 100).holds);
        assert!(probe_receptiveness(&p, &OracleMode::Constant(0), 100).holds);
    }

    #[test]
    fn branching_on_a_return_is_still_determinate() {
        let p = parse_program(
            "r := extcall read(0); if r { y := extcall write(r) } else { y := extcall write(100) }; z := extcall read(y)",
        )
        .unwrap();
        for base in [OracleMode::Constant(0), OracleMode::Seeded(3)] {
            assert!(probe_determinacy(&p, &base, 4, 1000).holds);
            assert!(probe_receptiveness(&p, &base, 1000).holds);
        }
        // the runs really do diverge after the first event
        let a = crate::behavior::classify_with(&p, &OracleMode::Constant(0), 1000);
        let b = crate::behavior::classify_with(&p, &OracleMode::Constant(1), 1000);
        assert_ne!(a.trace()[1], b.trace()[1]);
        assert!(match_events(&a.trace()[0], &b.trace()[0]));
    }

    /// Emits an event whose argument changes on every invocation.
    struct Nondeterministic(AtomicI64);

    impl Runner for Nondeterministic {
        fn behavior(&self, _p: &Program, _oracle: Oracle, _fuel: u64) -> BoundedBehavior {
            let n = self.0.fetch_add(1, Ordering::SeqCst);
            BoundedBehavior::Unresolved(Trace::from(vec![Event::new("f", n, 0)]))
        }
    }

    #[test]
    fn nondeterministic_runner_is_caught() {
        let p = parse_program("skip").unwrap();
        let r = Nondeterministic(AtomicI64::new(0));
        assert!(!probe_determinacy_with(&r, &p, &OracleMode::Constant(0), 2, 10).holds);
        assert!(!probe_receptiveness_with(&r, &p, &OracleMode::Constant(0), 10).holds);
    }

    /// Ignores the oracle after the first call.
    struct Deaf;

    impl Runner for Deaf {
        fn behavior(&self, _p: &Program, mut oracle: Oracle, _fuel: u64) -> BoundedBehavior {
            oracle.call("f", 0).unwrap();
            BoundedBehavior::Unresolved(Trace::from(vec![Event::new("f", 0, 7)]))
        }
    }

    #[test]
    fn runner_ignoring_returns_is_not_receptive() {
        let p = parse_program("skip").unwrap();
        assert!(!probe_receptiveness_with(&Deaf, &p, &OracleMode::Constant(7), 10).holds);
    }
}
