//! Conservative definite-assignment check: every register read must be
//! initialised or written on every path reaching the read.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Expr, Ident, Program, Stmt};
use super::SyntaxError;
use crate::analysis::used_regs;

type Defs = BTreeSet<Ident>;

/// Definitions reaching the end of a statement. `normal` is `None` when the
/// statement cannot complete normally; `exits[n]` is what reaches an
/// `exit n` leaving the statement.
struct Flow {
    normal: Option<Defs>,
    exits: BTreeMap<u32, Defs>,
}

fn meet(a: Option<Defs>, b: Option<Defs>) -> Option<Defs> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a.intersection(&b).cloned().collect()),
    }
}

fn merge_exits(into: &mut BTreeMap<u32, Defs>, from: BTreeMap<u32, Defs>) {
    for (n, defs) in from {
        let merged = meet(into.remove(&n), Some(defs)).expect("meet of two sets");
        into.insert(n, merged);
    }
}

fn check_expr(e: &Expr, defs: &Defs) -> Result<(), SyntaxError> {
    match used_regs(e).into_iter().find(|r| !defs.contains(r)) {
        Some(reg) => Err(SyntaxError::UnboundRegister {
            reg: reg.to_string(),
        }),
        None => Ok(()),
    }
}

fn flow(s: &Stmt, defs: &Defs) -> Result<Flow, SyntaxError> {
    let normal_with = |extra: Option<&Ident>| {
        let mut d = defs.clone();
        if let Some(r) = extra {
            d.insert(r.clone());
        }
        Flow {
            normal: Some(d),
            exits: BTreeMap::new(),
        }
    };
    match s {
        Stmt::Skip => Ok(normal_with(None)),
        Stmt::Store(r, e) => {
            check_expr(e, defs)?;
            Ok(normal_with(Some(r)))
        }
        Stmt::ExtCall { arg, ret, .. } => {
            check_expr(arg, defs)?;
            Ok(normal_with(Some(ret)))
        }
        Stmt::Exit(n) => Ok(Flow {
            normal: None,
            exits: BTreeMap::from([(*n, defs.clone())]),
        }),
        Stmt::If(c, a, b) => {
            check_expr(c, defs)?;
            let fa = flow(a, defs)?;
            let fb = flow(b, defs)?;
            let mut exits = fa.exits;
            merge_exits(&mut exits, fb.exits);
            Ok(Flow {
                normal: meet(fa.normal, fb.normal),
                exits,
            })
        }
        Stmt::Seq(a, b) => {
            let fa = flow(a, defs)?;
            // Unreachable second halves are still checked, against the
            // definitions at the start of the sequence.
            let mid = fa.normal.clone().unwrap_or_else(|| defs.clone());
            let fb = flow(b, &mid)?;
            let mut exits = fa.exits;
            merge_exits(&mut exits, fb.exits);
            Ok(Flow {
                normal: fa.normal.and(fb.normal),
                exits,
            })
        }
        // Later iterations see at least the first iteration's definitions.
        Stmt::Loop(body) => {
            let fb = flow(body, defs)?;
            Ok(Flow {
                normal: None,
                exits: fb.exits,
            })
        }
        Stmt::Block(body) => {
            let fb = flow(body, defs)?;
            let mut exits = BTreeMap::new();
            let mut normal = fb.normal;
            for (n, d) in fb.exits {
                if n == 0 {
                    normal = meet(normal, Some(d));
                } else {
                    exits.insert(n - 1, d);
                }
            }
            Ok(Flow { normal, exits })
        }
    }
}

pub fn validate(p: &Program) -> Result<(), SyntaxError> {
    let defs: Defs = p.initial_regs.iter().map(|(r, _)| r.clone()).collect();
    flow(&p.body, &defs).map(|_| ())
}
