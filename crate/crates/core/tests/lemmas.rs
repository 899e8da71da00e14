//! Register, exit and loop lemmas over generated statements.

mod common;

use common::lemmas::*;
use common::{arb_fragment, arb_program, substatements};
use minicminor::analysis::{contains_exit, escaping_exit, indep, silent};
use minicminor::behavior::classify_with;
use minicminor::bigstep::behavior_big;
use minicminor::oracle::OracleMode;
use minicminor::syntax::{BinOp, Expr, Stmt};
use minicminor::transform::{rep, unswitch};
use proptest::prelude::*;

fn arb_mode() -> impl Strategy<Value = OracleMode> {
    prop_oneof![
        (-2i64..4).prop_map(OracleMode::Constant),
        any::<u64>().prop_map(OracleMode::Seeded),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..12).prop_map(Expr::Const),
        prop::sample::select(vec!["a", "b", "c", "x", "y", "i"]).prop_map(Expr::reg),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (prop::sample::select(BinOp::ALL.to_vec()), inner.clone(), inner)
            .prop_map(|(op, a, b)| Expr::bin(op, a, b))
    })
}

fn ok(c: Check) -> Result<(), TestCaseError> {
    c.map(|_| ()).map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn indep_preserves_expression_value((p, s) in arb_fragment(), e in arb_expr(), mode in arb_mode()) {
        ok(indep_spec(&e, &s, &p.initial_regs, &mode, 2_000))?;
    }

    #[test]
    fn silent_statements_emit_nothing((p, s) in arb_fragment(), mode in arb_mode()) {
        ok(silent_spec(&s, &p.initial_regs, &mode, 2_000))?;
    }

    #[test]
    fn exit_free_loops_never_finish((p, s) in arb_fragment(), mode in arb_mode()) {
        ok(noexit_spec(&s, &p.initial_regs, &mode, 2_000))?;
    }

    #[test]
    fn loops_never_end_normally((p, s) in arb_fragment(), mode in arb_mode()) {
        ok(loop_never_normal(&s, &p.initial_regs, &mode, 2_000))?;
    }

    #[test]
    fn counted_loops_run_m_times((p, s) in arb_fragment(), m in 0i64..12, mode in arb_mode(), fuel in 0u64..400) {
        ok(iteration_count(&s, m, &p.initial_regs, &mode, fuel))?;
    }

    #[test]
    fn fuel_zero_is_partial((p, s) in arb_fragment()) {
        ok(fuel0_partial(&s, &p.initial_regs))?;
    }

    /// `rep` adds one copy of the body per count.
    #[test]
    fn rep_grows_by_one_body((_p, s) in arb_fragment(), n in 0u32..6) {
        let a = rep(n, &s).size();
        let b = rep(n + 1, &s).size();
        prop_assert_eq!(b - a, s.size() + 1);
    }

    /// An unswitched condition still reads only registers the branches leave alone.
    #[test]
    fn unswitch_keeps_conditions_independent(p in arb_program()) {
        let q = unswitch(&p.body);
        for s in substatements(&q) {
            if let Stmt::If(c, a, b) = &s {
                if let (Stmt::Loop(la), Stmt::Loop(lb)) = (&**a, &**b) {
                    if !substatements(&p.body).contains(&s) {
                        prop_assert!(indep(c, la) && indep(c, lb), "{}", s);
                    }
                }
            }
        }
    }

    #[test]
    fn predicates_are_compositional((p, s) in arb_fragment()) {
        if let Stmt::Seq(a, b) = &s {
            prop_assert_eq!(silent(&s), silent(a) && silent(b));
            prop_assert_eq!(contains_exit(&s), contains_exit(a) || contains_exit(b));
        }
        if let Stmt::Block(b) = &s {
            prop_assert_eq!(escaping_exit(&s, 0), escaping_exit(b, 1));
        }
        prop_assert!(!escaping_exit(&s, 0) || contains_exit(&s));
        let _ = p;
    }

    /// Whole-program runs agree with their big-step reading.
    #[test]
    fn small_and_big_agree_on_terminating_runs(p in arb_program(), mode in arb_mode()) {
        let small = classify_with(&p, &mode, 5_000);
        let big = behavior_big(&p, &mut mode.oracle(), 5_000);
        if small.is_resolved() && big.is_resolved() {
            prop_assert_eq!(small, big);
        }
    }
}

#[test]
fn lemma_premises_are_exercised() {
    use minicminor::difftest::{case_program, GenConfig};
    let cfg = GenConfig::default();
    let mode = OracleMode::Seeded(1);
    let (mut silent_hits, mut noexit_hits, mut count_hits) = (0, 0, 0);
    for i in 0..200 {
        let p = case_program(&cfg, i);
        for s in substatements(&p.body) {
            silent_hits += silent_spec(&s, &p.initial_regs, &mode, 500).unwrap() as usize;
            noexit_hits += noexit_spec(&s, &p.initial_regs, &mode, 500).unwrap() as usize;
            count_hits += iteration_count(&s, 4, &p.initial_regs, &mode, 500).unwrap() as usize;
        }
    }
    assert!(silent_hits > 500 && noexit_hits > 500 && count_hits > 500, "{silent_hits} {noexit_hits} {count_hits}");
}
