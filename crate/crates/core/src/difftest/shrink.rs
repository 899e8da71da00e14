//! Greedy test-case reduction.

use crate::syntax::{validate, Expr, Program, Stmt};

/// Default number of predicate evaluations a shrink may spend.
pub const DEFAULT_SHRINK_BUDGET: usize = 2_000;

/// Shrinks `p` while `failing` keeps holding. The result is locally minimal
/// under the reduction rules unless the budget ran out first.
pub fn shrink(p: &Program, failing: impl Fn(&Program) -> bool) -> Program {
    shrink_with_budget(p, failing, DEFAULT_SHRINK_BUDGET)
}

pub fn shrink_with_budget(p: &Program, failing: impl Fn(&Program) -> bool, budget: usize) -> Program {
    let mut cur = p.clone();
    let mut left = budget;
    'outer: loop {
        for cand in program_reductions(&cur) {
            if left == 0 {
                break 'outer;
            }
            if validate(&cand).is_err() {
                continue;
            }
            left -= 1;
            if failing(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        break;
    }
    cur
}

fn program_reductions(p: &Program) -> Vec<Program> {
    let mut out: Vec<Program> = stmt_reductions(&p.body).into_iter().map(|s| p.with_body(s)).collect();
    for (r, _) in p.initial_regs.iter() {
        let regs = p.initial_regs.iter().filter(|(x, _)| *x != r).map(|(x, v)| (x.clone(), v)).collect();
        out.push(Program {
            body: p.body.clone(),
            initial_regs: regs,
        });
    }
    for (r, v) in p.initial_regs.iter() {
        for smaller in const_reductions(v) {
            let mut q = p.clone();
            q.initial_regs.set(r.clone(), smaller);
            out.push(q);
        }
    }
    out
}

fn const_reductions(c: i64) -> Vec<i64> {
    let mut out = Vec::new();
    if c != 0 {
        out.push(0);
    }
    if c.unsigned_abs() > 2 {
        out.push(c / 2);
    }
    if c < 0 {
        out.push(c.wrapping_neg());
    }
    out
}

fn expr_reductions(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Const(c) => const_reductions(*c).into_iter().map(Expr::Const).collect(),
        Expr::Reg(_) => vec![Expr::Const(0)],
        Expr::BinOp(op, a, b) => {
            let mut out = vec![(**a).clone(), (**b).clone()];
            out.extend(expr_reductions(a).into_iter().map(|a| Expr::bin(*op, a, (**b).clone())));
            out.extend(expr_reductions(b).into_iter().map(|b| Expr::bin(*op, (**a).clone(), b)));
            out
        }
    }
}

/// One-step reductions of `s`, largest first.
fn stmt_reductions(s: &Stmt) -> Vec<Stmt> {
    let mut out = Vec::new();
    if *s != Stmt::Skip {
        out.push(Stmt::Skip);
    }
    match s {
        Stmt::Skip => {}
        Stmt::Exit(n) => {
            if *n > 0 {
                out.push(Stmt::Exit(n - 1));
            }
        }
        Stmt::Store(r, e) => {
            out.extend(expr_reductions(e).into_iter().map(|e| Stmt::Store(r.clone(), e)));
        }
        Stmt::ExtCall { func, arg, ret } => {
            out.extend(expr_reductions(arg).into_iter().map(|arg| Stmt::ExtCall {
                func: func.clone(),
                arg,
                ret: ret.clone(),
            }));
        }
        Stmt::Seq(a, b) => {
            out.push((**a).clone());
            out.push((**b).clone());
            out.extend(stmt_reductions(a).into_iter().map(|a| Stmt::seq(a, (**b).clone())));
            out.extend(stmt_reductions(b).into_iter().map(|b| Stmt::seq((**a).clone(), b)));
        }
        Stmt::If(c, a, b) => {
            out.push((**a).clone());
            out.push((**b).clone());
            out.extend(
                expr_reductions(c)
                    .into_iter()
                    .map(|c| Stmt::if_(c, (**a).clone(), (**b).clone())),
            );
            out.extend(stmt_reductions(a).into_iter().map(|a| Stmt::if_(c.clone(), a, (**b).clone())));
            out.extend(stmt_reductions(b).into_iter().map(|b| Stmt::if_(c.clone(), (**a).clone(), b)));
        }
        Stmt::Loop(b) => {
            out.push((**b).clone());
            out.extend(stmt_reductions(b).into_iter().map(Stmt::loop_));
        }
        Stmt::Block(b) => {
            out.push((**b).clone());
            out.extend(stmt_reductions(b).into_iter().map(Stmt::block));
        }
    }
    out
}
