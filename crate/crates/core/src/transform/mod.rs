//! Loop transformations and a small pass manager.

mod mutants;
mod unroll;

use std::fmt;
use std::sync::Arc;

use crate::analysis::{contains_exit, indep, silent};
use crate::syntax::{Program, Stmt};

pub use mutants::{mutant_for, silentloop_ignoring_events, unroll_off_by_one, unswitch_without_indep};
pub use unroll::{
    body_m, find_unroll_candidates, rep, unroll, unroll_with, UnrollCandidate, DEFAULT_MAX_UNROLL,
};

/// Hoists an independent branch out of a loop whose body is exactly that
/// branch: `loop (if c s1 s2)` becomes `if c (loop s1) (loop s2)`.
pub fn unswitch(s: &Stmt) -> Stmt {
    unswitch_gated(s, &|c, s1, s2| indep(c, s1) && indep(c, s2))
}

pub(crate) fn unswitch_gated(
    s: &Stmt,
    gate: &dyn Fn(&crate::syntax::Expr, &Stmt, &Stmt) -> bool,
) -> Stmt {
    match s {
        Stmt::Loop(body) => match &**body {
            Stmt::If(c, s1, s2) if gate(c, s1, s2) => Stmt::if_(
                c.clone(),
                Stmt::loop_(unswitch_gated(s1, gate)),
                Stmt::loop_(unswitch_gated(s2, gate)),
            ),
            other => Stmt::loop_(unswitch_gated(other, gate)),
        },
        Stmt::If(c, a, b) => Stmt::if_(c.clone(), unswitch_gated(a, gate), unswitch_gated(b, gate)),
        Stmt::Seq(a, b) => Stmt::seq(unswitch_gated(a, gate), unswitch_gated(b, gate)),
        Stmt::Block(b) => Stmt::block(unswitch_gated(b, gate)),
        leaf => leaf.clone(),
    }
}

/// Replaces the body of every exit-free, silent loop by `skip`. Inner loops
/// are simplified first.
pub fn eliminate_silent_loops(s: &Stmt) -> Stmt {
    eliminate_gated(s, &|body| silent(body) && !contains_exit(body))
}

pub(crate) fn eliminate_gated(s: &Stmt, gate: &dyn Fn(&Stmt) -> bool) -> Stmt {
    match s {
        Stmt::Loop(body) => {
            let body = eliminate_gated(body, gate);
            if gate(&body) {
                Stmt::loop_(Stmt::Skip)
            } else {
                Stmt::loop_(body)
            }
        }
        Stmt::If(c, a, b) => Stmt::if_(c.clone(), eliminate_gated(a, gate), eliminate_gated(b, gate)),
        Stmt::Seq(a, b) => Stmt::seq(eliminate_gated(a, gate), eliminate_gated(b, gate)),
        Stmt::Block(b) => Stmt::block(eliminate_gated(b, gate)),
        leaf => leaf.clone(),
    }
}

type ApplyFn = dyn Fn(&Stmt) -> Stmt + Send + Sync;

/// A named, total statement rewrite.
#[derive(Clone)]
pub struct Pass {
    pub name: String,
    apply: Arc<ApplyFn>,
}

impl Pass {
    pub fn new(name: impl Into<String>, apply: impl Fn(&Stmt) -> Stmt + Send + Sync + 'static) -> Pass {
        Pass {
            name: name.into(),
            apply: Arc::new(apply),
        }
    }

    pub fn apply(&self, s: &Stmt) -> Stmt {
        (self.apply)(s)
    }

    pub fn apply_program(&self, p: &Program) -> Program {
        p.with_body(self.apply(&p.body))
    }

    pub fn identity() -> Pass {
        Pass::new("identity", Stmt::clone)
    }

    pub fn unswitch() -> Pass {
        Pass::new("unswitch", unswitch)
    }

    pub fn unroll(max_unroll: u32) -> Pass {
        Pass::new("unroll", move |s| unroll_with(s, max_unroll))
    }

    pub fn silentloop() -> Pass {
        Pass::new("silentloop", eliminate_silent_loops)
    }

    /// Looks a pass up by name. Mutants are available under
    /// `<pass>-mutant`.
    pub fn by_name(name: &str, max_unroll: u32) -> Option<Pass> {
        match name {
            "identity" => Some(Pass::identity()),
            "unswitch" => Some(Pass::unswitch()),
            "unroll" => Some(Pass::unroll(max_unroll)),
            "silentloop" => Some(Pass::silentloop()),
            _ => name.strip_suffix("-mutant").and_then(|base| mutant_for(base, max_unroll)),
        }
    }

    /// Parses a comma-separated list of pass names.
    pub fn parse_list(list: &str, max_unroll: u32) -> Result<Vec<Pass>, String> {
        list.split(',')
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(|n| Pass::by_name(n, max_unroll).ok_or_else(|| format!("unknown pass `{n}`")))
            .collect()
    }
}

impl fmt::Debug for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pass({})", self.name)
    }
}

/// Names accepted by [`Pass::by_name`], mutants excluded.
pub const PASS_NAMES: [&str; 4] = ["identity", "unswitch", "unroll", "silentloop"];

#[derive(Debug, Clone)]
pub struct Stage {
    pub pass: String,
    pub before: Program,
    pub after: Program,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub program: Program,
    pub stages: Vec<Stage>,
}

/// Applies `passes` left to right, keeping every intermediate program.
pub fn run_pipeline(passes: &[Pass], p: &Program) -> PipelineRun {
    let mut cur = p.clone();
    let mut stages = Vec::with_capacity(passes.len());
    for pass in passes {
        let next = pass.apply_program(&cur);
        stages.push(Stage {
            pass: pass.name.clone(),
            before: cur,
            after: next.clone(),
        });
        cur = next;
    }
    PipelineRun { program: cur, stages }
}
