//! Refinement, fuel and guard properties of the behavior layer.

mod common;

use common::arb_program;
use common::behaviors::{small_behaviors, small_traces};
use minicminor::behavior::{classify_with, guard, refines, BoundedBehavior, TraceLen};
use minicminor::bigstep::{behavior_big, exec};
use minicminor::oracle::{Event, Oracle, OracleMode, Trace};
use minicminor::smallstep;
use minicminor::state::Env;
use proptest::prelude::*;

#[test]
fn refinement_is_reflexive_and_transitive() {
    let bs = small_behaviors();
    for a in &bs {
        assert!(refines(a, a).holds, "{a}");
        for b in &bs {
            if !refines(a, b).holds {
                continue;
            }
            for c in &bs {
                if refines(b, c).holds {
                    assert!(refines(a, c).holds, "{a} ≼ {b} ≼ {c}");
                }
            }
        }
    }
}

#[test]
fn refinement_into_wrong_needs_a_prefix() {
    let bs = small_behaviors();
    for a in &bs {
        for t in small_traces() {
            let holds = refines(a, &BoundedBehavior::GoesWrong(t.clone())).holds;
            let same = *a == BoundedBehavior::GoesWrong(t.clone());
            assert_eq!(holds, same || t.is_prefix_of(a.trace()), "{a} vs wrong after [{t}]");
        }
    }
}

#[test]
fn refinement_err_clause_examples() {
    let e = Event::new("f", 0, 7);
    let t = Trace::from(vec![Event::new("g", 1, 2)]);
    let te = t.concat(&Trace::from(vec![e]));
    let env = Env::new();
    assert!(refines(&BoundedBehavior::Terminates(te.clone(), env.clone()), &BoundedBehavior::GoesWrong(t.clone())).holds);
    assert!(refines(&BoundedBehavior::DivergesSilently(te.clone()), &BoundedBehavior::GoesWrong(Trace::new())).holds);
    assert!(!refines(&BoundedBehavior::GoesWrong(t.clone()), &BoundedBehavior::GoesWrong(te.clone())).holds);
    assert!(!refines(&BoundedBehavior::GoesWrong(t.clone()), &BoundedBehavior::Terminates(t.clone(), env.clone())).holds);
    assert!(!refines(&BoundedBehavior::DivergesSilently(t.clone()), &BoundedBehavior::Terminates(t, env)).holds);
}

#[test]
fn guard_truth_table() {
    assert!(guard(TraceLen::Finite(0), 0, 0, 5));
    assert!(guard(TraceLen::Infinite, 3, 0, 2));
    assert!(!guard(TraceLen::Infinite, 2, 0, 5));
    assert!(guard(TraceLen::Infinite, 0, 1, 99));
}

fn arb_mode() -> impl Strategy<Value = OracleMode> {
    prop_oneof![
        (-2i64..4).prop_map(OracleMode::Constant),
        any::<u64>().prop_map(OracleMode::Seeded),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn small_step_traces_grow_with_fuel(p in arb_program(), mode in arb_mode(), f in 0u64..300, extra in 0u64..300) {
        let a = smallstep::run(&p, &mut mode.oracle(), f).unwrap();
        let b = smallstep::run(&p, &mut mode.oracle(), f + extra).unwrap();
        prop_assert!(a.trace.is_prefix_of(&b.trace));
        let a = classify_with(&p, &mode, f);
        let b = classify_with(&p, &mode, f + extra);
        prop_assert!(a.trace().is_prefix_of(b.trace()));
        if a.is_resolved() {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn big_step_traces_grow_with_fuel(p in arb_program(), mode in arb_mode(), f in 0u64..300, extra in 0u64..300) {
        let a = behavior_big(&p, &mut mode.oracle(), f);
        let b = behavior_big(&p, &mut mode.oracle(), f + extra);
        prop_assert!(a.trace().is_prefix_of(b.trace()));
        if a.is_resolved() {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn fuel_zero_is_the_empty_partial(p in arb_program()) {
        let r = exec(&p.body, &p.initial_regs, &mut Oracle::constant(0), 0).unwrap();
        prop_assert!(!r.outcome.is_full());
        prop_assert!(r.trace.is_empty());
        prop_assert_eq!(behavior_big(&p, &mut Oracle::constant(0), 0), BoundedBehavior::Unresolved(Trace::new()));
    }

    #[test]
    fn resolved_behaviors_refine_themselves(p in arb_program(), mode in arb_mode()) {
        let b = classify_with(&p, &mode, 2_000);
        if b.is_resolved() {
            prop_assert!(refines(&b, &b).holds);
        }
    }
}
