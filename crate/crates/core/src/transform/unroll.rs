//! Full unrolling of constant-bound counted loops.
//!
//! A candidate site has the shape
//!
//! ```text
//! i := 0; block { loop { if i < m { skip } else { exit 0 }; inner; i := i + 1 } }
//! ```
//!
//! and is rewritten to `i := 0; rep_m (inner; i := i + 1)`.

use crate::analysis::{escaping_exit, indep};
use crate::syntax::{BinOp, Expr, Ident, Stmt};

pub const DEFAULT_MAX_UNROLL: u32 = 64;

/// `n` copies of `s`, right-nested and terminated by `skip`.
pub fn rep(n: u32, s: &Stmt) -> Stmt {
    let mut acc = Stmt::Skip;
    for _ in 0..n {
        acc = Stmt::seq(s.clone(), acc);
    }
    acc
}

/// The canonical counted-loop body over counter `i` with bound `m`.
pub fn body_m(i: &str, m: i64, inner: Stmt) -> Stmt {
    Stmt::seq(
        Stmt::if_(guard_expr(i, m), Stmt::Skip, Stmt::Exit(0)),
        Stmt::seq(inner, increment(i)),
    )
}

fn guard_expr(i: &str, m: i64) -> Expr {
    Expr::lt(Expr::reg(i), Expr::Const(m))
}

fn increment(i: &str) -> Stmt {
    Stmt::store(i, Expr::add(Expr::reg(i), Expr::Const(1)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnrollCandidate {
    pub counter: Ident,
    pub bound: u32,
    pub inner: Stmt,
    /// Child indices from the root to the `i := 0; block {..}` sequence node.
    pub site: Vec<usize>,
}

fn is_const(e: &Expr, v: i64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn is_reg(e: &Expr, r: &Ident) -> bool {
    matches!(e, Expr::Reg(x) if x == r)
}

/// Matches `block (loop body_m)` for counter `i`, returning `(m, inner)`.
fn match_block_loop<'a>(s: &'a Stmt, i: &Ident) -> Option<(i64, &'a Stmt)> {
    let Stmt::Block(l) = s else { return None };
    let Stmt::Loop(body) = &**l else { return None };
    let Stmt::Seq(guard, rest) = &**body else { return None };
    let Stmt::If(Expr::BinOp(BinOp::Lt, lhs, rhs), then_s, else_s) = &**guard else {
        return None;
    };
    let Expr::Const(m) = **rhs else { return None };
    if !is_reg(lhs, i) || **then_s != Stmt::Skip || **else_s != Stmt::Exit(0) {
        return None;
    }
    let Stmt::Seq(inner, incr) = &**rest else { return None };
    let Stmt::Store(j, Expr::BinOp(BinOp::Add, a, b)) = &**incr else {
        return None;
    };
    if j != i || !is_reg(a, i) || !is_const(b, 1) {
        return None;
    }
    Some((m, inner))
}

enum Site<'a> {
    /// `i := 0; block {..}`
    Whole(Ident, u32, &'a Stmt),
    /// `i := 0; (block {..}; rest)`
    WithRest(Ident, u32, &'a Stmt, &'a Stmt),
}

fn match_site(s: &Stmt, max_unroll: u32) -> Option<Site<'_>> {
    let Stmt::Seq(init, after) = s else { return None };
    let Stmt::Store(i, zero) = &**init else { return None };
    if !is_const(zero, 0) {
        return None;
    }
    let (lp, rest) = match &**after {
        Stmt::Seq(a, rest) if matches!(**a, Stmt::Block(_)) => (&**a, Some(&**rest)),
        other => (other, None),
    };
    let (m, inner) = match_block_loop(lp, i)?;
    let m = u32::try_from(m).ok().filter(|&m| m <= max_unroll)?;
    if !indep(&guard_expr(i, 0), inner) || escaping_exit(inner, 0) {
        return None;
    }
    Some(match rest {
        None => Site::Whole(i.clone(), m, inner),
        Some(rest) => Site::WithRest(i.clone(), m, inner, rest),
    })
}

/// All unrollable sites, in pre-order. Candidate bodies are not searched.
pub fn find_unroll_candidates(s: &Stmt, max_unroll: u32) -> Vec<UnrollCandidate> {
    let mut out = Vec::new();
    find(s, max_unroll, &mut Vec::new(), &mut out);
    out
}

fn find(s: &Stmt, max_unroll: u32, path: &mut Vec<usize>, out: &mut Vec<UnrollCandidate>) {
    if let Some(site) = match_site(s, max_unroll) {
        let (counter, bound, inner, rest) = match site {
            Site::Whole(i, m, inner) => (i, m, inner, None),
            Site::WithRest(i, m, inner, rest) => (i, m, inner, Some(rest)),
        };
        out.push(UnrollCandidate {
            counter,
            bound,
            inner: inner.clone(),
            site: path.clone(),
        });
        if let Some(rest) = rest {
            path.extend([1, 1]);
            find(rest, max_unroll, path, out);
            path.truncate(path.len() - 2);
        }
        return;
    }
    let children: Vec<&Stmt> = match s {
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => vec![a, b],
        Stmt::Loop(b) | Stmt::Block(b) => vec![b],
        _ => vec![],
    };
    for (k, c) in children.into_iter().enumerate() {
        path.push(k);
        find(c, max_unroll, path, out);
        path.pop();
    }
}

/// Unrolls every candidate with bound at most [`DEFAULT_MAX_UNROLL`].
pub fn unroll(s: &Stmt) -> Stmt {
    unroll_with(s, DEFAULT_MAX_UNROLL)
}

pub fn unroll_with(s: &Stmt, max_unroll: u32) -> Stmt {
    unroll_by(s, max_unroll, &|m| m)
}

/// Unrolling with the number of copies computed from the bound; the real
/// pass uses the identity.
pub(crate) fn unroll_by(s: &Stmt, max_unroll: u32, copies: &dyn Fn(u32) -> u32) -> Stmt {
    if let Some(site) = match_site(s, max_unroll) {
        let unrolled = |i: &Ident, m: u32, inner: &Stmt| {
            rep(copies(m), &Stmt::seq(inner.clone(), increment(i)))
        };
        return match site {
            Site::Whole(i, m, inner) => {
                Stmt::seq(Stmt::Store(i.clone(), Expr::Const(0)), unrolled(&i, m, inner))
            }
            Site::WithRest(i, m, inner, rest) => Stmt::seq(
                Stmt::Store(i.clone(), Expr::Const(0)),
                Stmt::seq(unrolled(&i, m, inner), unroll_by(rest, max_unroll, copies)),
            ),
        };
    }
    match s {
        Stmt::If(c, a, b) => Stmt::if_(
            c.clone(),
            unroll_by(a, max_unroll, copies),
            unroll_by(b, max_unroll, copies),
        ),
        Stmt::Seq(a, b) => Stmt::seq(unroll_by(a, max_unroll, copies), unroll_by(b, max_unroll, copies)),
        Stmt::Loop(b) => Stmt::loop_(unroll_by(b, max_unroll, copies)),
        Stmt::Block(b) => Stmt::block(unroll_by(b, max_unroll, copies)),
        leaf => leaf.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::classify_with;
    use crate::oracle::OracleMode;
    use crate::syntax::{parse_program, parse_stmt};

    const FACTORIAL: &str = "x := 1; i := 0; block { loop { if i < 10 { skip } else { exit 0 }; x := x * (i + 1); i := i + 1 } }";

    fn st(text: &str) -> Stmt {
        parse_stmt(text).unwrap()
    }

    #[test]
    fn rep_shapes() {
        let s = Stmt::store("x", Expr::Const(1));
        assert_eq!(rep(0, &s), Stmt::Skip);
        assert_eq!(rep(1, &s), Stmt::seq(s.clone(), Stmt::Skip));
        assert_eq!(rep(2, &s), Stmt::seq(s.clone(), Stmt::seq(s.clone(), Stmt::Skip)));
    }

    #[test]
    fn body_m_matches_parsed_text() {
        let inner = st("x := x * (i + 1)");
        let parsed = st("if i < 10 { skip } else { exit 0 }; x := x * (i + 1); i := i + 1");
        assert_eq!(body_m("i", 10, inner), parsed);
    }

    #[test]
    fn factorial_candidate() {
        let p = parse_program(FACTORIAL).unwrap();
        let c = find_unroll_candidates(&p.body, DEFAULT_MAX_UNROLL);
        assert_eq!(c.len(), 1);
        assert_eq!(&*c[0].counter, "i");
        assert_eq!(c[0].bound, 10);
        assert_eq!(c[0].site, vec![1]);
        assert_eq!(c[0].inner, st("x := x * (i + 1)"));
    }

    #[test]
    fn rejected_candidates() {
        // counter reset inside the body
        let s = st("i := 0; block { loop { if i < 10 { skip } else { exit 0 }; i := 0; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        // no initializing store
        let s = st("block { loop { if i < 10 { skip } else { exit 0 }; x := 1; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        // inner leaves the loop
        let s = st("i := 0; block { loop { if i < 3 { skip } else { exit 0 }; exit 0; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        // reversed polarity is not the canonical shape
        let s = st("i := 0; block { loop { if i < 3 { exit 0 } else { skip }; x := 1; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        // bound above the limit, and negative bounds
        let s = st("i := 0; block { loop { if i < 65 { skip } else { exit 0 }; x := 1; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        assert_eq!(find_unroll_candidates(&s, 65).len(), 1);
        let s = st("i := 0; block { loop { if i < -1 { skip } else { exit 0 }; x := 1; i := i + 1 } }");
        assert!(find_unroll_candidates(&s, 64).is_empty());
        // absorbed exit inside the payload is fine
        let s = st("i := 0; block { loop { if i < 3 { skip } else { exit 0 }; block { exit 0 }; i := i + 1 } }");
        assert_eq!(find_unroll_candidates(&s, 64).len(), 1);
    }

    #[test]
    fn zero_bound() {
        let s = st("i := 0; block { loop { if i < 0 { skip } else { exit 0 }; x := 1; i := i + 1 } }");
        assert_eq!(unroll(&s), Stmt::seq(Stmt::store("i", Expr::Const(0)), Stmt::Skip));
    }

    #[test]
    fn factorial_unrolled() {
        let p = parse_program(FACTORIAL).unwrap();
        let q = p.with_body(unroll(&p.body));
        let Stmt::Seq(_, site) = &*q.body else { panic!() };
        assert!(!site.contains_loop());
        let b = classify_with(&q, &OracleMode::Constant(0), 10_000);
        let crate::behavior::BoundedBehavior::Terminates(t, env) = b else { panic!("{b}") };
        assert!(t.is_empty());
        assert_eq!(env.get("x"), Some(3_628_800));
        assert_eq!(env.get("i"), Some(10));
    }

    #[test]
    fn nested_loops_are_kept_verbatim() {
        let inner = st("block { loop { if y < 2 { y := y + 1 } else { exit 0 } } }");
        let s = Stmt::seq(Stmt::store("i", Expr::Const(0)), Stmt::block(Stmt::loop_(body_m("i", 2, inner.clone()))));
        let step = Stmt::seq(inner, st("i := i + 1"));
        assert_eq!(unroll(&s), Stmt::seq(Stmt::store("i", Expr::Const(0)), rep(2, &step)));
    }

    #[test]
    fn candidate_followed_by_more_code() {
        let s = st("i := 0; block { loop { if i < 2 { skip } else { exit 0 }; x := 1; i := i + 1 } }; j := 0; block { loop { if j < 1 { skip } else { exit 0 }; y := 2; j := j + 1 } }; z := 3");
        let c = find_unroll_candidates(&s, 64);
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].site, vec![1, 1]);
        let u = unroll(&s);
        assert!(!u.contains_loop());
        assert_eq!(
            u,
            st("i := 0; { { x := 1; i := i + 1 }; { x := 1; i := i + 1 }; skip }; j := 0; { { y := 2; j := j + 1 }; skip }; z := 3")
        );
    }

    #[test]
    fn candidate_bodies_are_not_rescanned() {
        let nested = "i := 0; block { loop { if i < 2 { skip } else { exit 0 }; j := 0; block { loop { if j < 2 { skip } else { exit 0 }; x := 1; j := j + 1 } }; i := i + 1 } }";
        let s = st(nested);
        assert_eq!(find_unroll_candidates(&s, 64).len(), 1);
        assert!(unroll(&s).contains_loop());
    }
}
