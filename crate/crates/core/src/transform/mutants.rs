//! Deliberately broken variants of the passes. The differential tester must
//! catch each of them.

use super::unroll::unroll_by;
use super::{eliminate_gated, unswitch_gated, Pass};
use crate::analysis::contains_exit;

/// Unswitching without the independence check.
pub fn unswitch_without_indep() -> Pass {
    Pass::new("unswitch-mutant", |s| unswitch_gated(s, &|_, _, _| true))
}

/// Unrolling that emits one copy too few.
pub fn unroll_off_by_one(max_unroll: u32) -> Pass {
    Pass::new("unroll-mutant", move |s| {
        unroll_by(s, max_unroll, &|m| m.saturating_sub(1))
    })
}

/// Silent-loop elimination that forgets to check for extcalls.
pub fn silentloop_ignoring_events() -> Pass {
    Pass::new("silentloop-mutant", |s| eliminate_gated(s, &|b| !contains_exit(b)))
}

pub fn mutant_for(pass: &str, max_unroll: u32) -> Option<Pass> {
    match pass {
        "unswitch" => Some(unswitch_without_indep()),
        "unroll" => Some(unroll_off_by_one(max_unroll)),
        "silentloop" => Some(silentloop_ignoring_events()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::check_forward;
    use crate::oracle::OracleMode;
    use crate::syntax::parse_program;

    fn caught(pass: &Pass, text: &str) -> bool {
        let p = parse_program(text).unwrap();
        let q = pass.apply_program(&p);
        !check_forward(&p, &q, &[OracleMode::Constant(1)], 10_000).holds
    }

    #[test]
    fn each_mutant_is_observable() {
        assert!(caught(
            &unswitch_without_indep(),
            "init i = 0; block { loop { if i < 3 { i := i + 1; r := extcall f(i) } else { exit 0 } } }",
        ));
        assert!(caught(
            &unroll_off_by_one(64),
            "x := 0; i := 0; block { loop { if i < 4 { skip } else { exit 0 }; x := x + 2; i := i + 1 } }",
        ));
        assert!(caught(&silentloop_ignoring_events(), "loop { r := extcall tick(0) }"));
    }
}
