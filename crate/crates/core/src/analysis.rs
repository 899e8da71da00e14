//! Syntactic predicates used as transformation side conditions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::syntax::{Expr, Ident, Stmt};

pub type RegSet = BTreeSet<Ident>;

pub fn used_regs(e: &Expr) -> RegSet {
    let mut out = RegSet::new();
    collect_used(e, &mut out);
    out
}

fn collect_used(e: &Expr, out: &mut RegSet) {
    match e {
        Expr::Const(_) => {}
        Expr::Reg(r) => {
            out.insert(r.clone());
        }
        Expr::BinOp(_, a, b) => {
            collect_used(a, out);
            collect_used(b, out);
        }
    }
}

/// Registers `s` may write: store targets and extcall return registers.
pub fn written_regs(s: &Stmt) -> RegSet {
    let mut out = RegSet::new();
    collect_written(s, &mut out);
    out
}

fn collect_written(s: &Stmt, out: &mut RegSet) {
    match s {
        Stmt::Skip | Stmt::Exit(_) => {}
        Stmt::Store(r, _) | Stmt::ExtCall { ret: r, .. } => {
            out.insert(r.clone());
        }
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => {
            collect_written(a, out);
            collect_written(b, out);
        }
        Stmt::Loop(b) | Stmt::Block(b) => collect_written(b, out),
    }
}

/// `s` writes no register read by `e`.
pub fn indep(e: &Expr, s: &Stmt) -> bool {
    let used = used_regs(e);
    used.is_empty() || written_regs(s).is_disjoint(&used)
}

/// Any `Exit` anywhere in `s`, absorbed or not.
pub fn contains_exit(s: &Stmt) -> bool {
    match s {
        Stmt::Exit(_) => true,
        Stmt::Skip | Stmt::Store(..) | Stmt::ExtCall { .. } => false,
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => contains_exit(a) || contains_exit(b),
        Stmt::Loop(b) | Stmt::Block(b) => contains_exit(b),
    }
}

/// Some `Exit(n)` in `s` leaves `s` and then at least `depth` more blocks:
/// `n >= blocks enclosing it inside s + depth`.
pub fn escaping_exit(s: &Stmt, depth: u32) -> bool {
    escapes(s, 0, depth)
}

fn escapes(s: &Stmt, inner: u32, depth: u32) -> bool {
    match s {
        Stmt::Exit(n) => u64::from(*n) >= u64::from(inner) + u64::from(depth),
        Stmt::Skip | Stmt::Store(..) | Stmt::ExtCall { .. } => false,
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => escapes(a, inner, depth) || escapes(b, inner, depth),
        Stmt::Loop(b) => escapes(b, inner, depth),
        Stmt::Block(b) => escapes(b, inner + 1, depth),
    }
}

/// No extcall anywhere in `s`.
pub fn silent(s: &Stmt) -> bool {
    match s {
        Stmt::ExtCall { .. } => false,
        Stmt::Skip | Stmt::Store(..) | Stmt::Exit(_) => true,
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => silent(a) && silent(b),
        Stmt::Loop(b) | Stmt::Block(b) => silent(b),
    }
}

/// One row of the `analyze` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StmtFacts {
    /// Child indices from the root, e.g. `[1, 0]` is the first child of the
    /// second child.
    pub path: Vec<usize>,
    pub kind: &'static str,
    pub used: RegSet,
    pub written: RegSet,
    pub silent: bool,
    pub contains_exit: bool,
}

/// Facts for every statement node, in pre-order.
pub fn analyze(s: &Stmt) -> Vec<StmtFacts> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(s, &mut path, &mut out);
    out
}

fn walk(s: &Stmt, path: &mut Vec<usize>, out: &mut Vec<StmtFacts>) {
    let used = match s {
        Stmt::Store(_, e) | Stmt::If(e, ..) | Stmt::ExtCall { arg: e, .. } => used_regs(e),
        _ => RegSet::new(),
    };
    out.push(StmtFacts {
        path: path.clone(),
        kind: s.kind(),
        used,
        written: written_regs(s),
        silent: silent(s),
        contains_exit: contains_exit(s),
    });
    let children: Vec<&Stmt> = match s {
        Stmt::If(_, a, b) | Stmt::Seq(a, b) => vec![a, b],
        Stmt::Loop(b) | Stmt::Block(b) => vec![b],
        _ => vec![],
    };
    for (i, c) in children.into_iter().enumerate() {
        path.push(i);
        walk(c, path, out);
        path.pop();
    }
}
