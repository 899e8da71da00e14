#![allow(dead_code)]

use std::path::PathBuf;

use minicminor::difftest::{case_program, GenConfig};
use minicminor::syntax::{parse_program, Program, Stmt};
use proptest::prelude::*;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus() -> Vec<(String, Program)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cmin"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let text = std::fs::read_to_string(&f).unwrap();
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            let p = parse_program(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, p)
        })
        .collect()
}

/// Every substatement of `s`, `s` included, in pre-order.
pub fn substatements(s: &Stmt) -> Vec<Stmt> {
    let mut out = vec![s.clone()];
    match s {
        Stmt::Seq(a, b) | Stmt::If(_, a, b) => {
            out.extend(substatements(a));
            out.extend(substatements(b));
        }
        Stmt::Loop(b) | Stmt::Block(b) => out.extend(substatements(b)),
        _ => {}
    }
    out
}

/// Generated programs, addressed by seed so proptest can replay them.
pub fn arb_program() -> impl Strategy<Value = Program> {
    any::<u64>().prop_map(|seed| case_program(&GenConfig::default().with_seed(seed), 0))
}

/// A substatement of a generated program, run from that program's registers.
pub fn arb_fragment() -> impl Strategy<Value = (Program, Stmt)> {
    (arb_program(), any::<prop::sample::Index>()).prop_map(|(p, ix)| {
        let subs = substatements(&p.body);
        let s = ix.get(&subs).clone();
        (p, s)
    })
}

pub mod lemmas {
    //! Checks shared by the property tests and the acceptance run. Each
    //! returns `Ok(true)` when it applied, `Ok(false)` when its premise did
    //! not hold, and `Err` on a violation.

    use minicminor::analysis::{contains_exit, escaping_exit, indep, silent};
    use minicminor::bigstep::{exec, exec_loop_counted, Outcome};
    use minicminor::oracle::{Oracle, OracleMode};
    use minicminor::state::{eval_expr, Env};
    use minicminor::syntax::{Expr, Stmt};
    use minicminor::transform::body_m;

    pub type Check = Result<bool, String>;

    fn final_env(o: &Outcome) -> Option<&Env> {
        match o {
            Outcome::Normal(env) | Outcome::Exit(_, env) => Some(env),
            Outcome::Partial => None,
        }
    }

    /// `indep e s` and a full run of `s` leave the value of `e` unchanged.
    pub fn indep_spec(e: &Expr, s: &Stmt, env: &Env, mode: &OracleMode, fuel: u64) -> Check {
        if !indep(e, s) {
            return Ok(false);
        }
        let r = exec(s, env, &mut mode.oracle(), fuel).map_err(|e| e.to_string())?;
        let Some(after) = final_env(&r.outcome).filter(|_| !r.is_wrong()) else {
            return Ok(false);
        };
        let (v0, v1) = (eval_expr(e, env), eval_expr(e, after));
        if v0 != v1 {
            return Err(format!("{e:?} was {v0:?} before and {v1:?} after {s}"));
        }
        Ok(true)
    }

    /// Silent statements never emit.
    pub fn silent_spec(s: &Stmt, env: &Env, mode: &OracleMode, fuel: u64) -> Check {
        if !silent(s) {
            return Ok(false);
        }
        let r = exec(s, env, &mut mode.oracle(), fuel).map_err(|e| e.to_string())?;
        if !r.trace.is_empty() {
            return Err(format!("silent statement emitted [{}]: {s}", r.trace));
        }
        Ok(true)
    }

    /// A loop whose body has no exit ends only partially.
    pub fn noexit_spec(body: &Stmt, env: &Env, mode: &OracleMode, fuel: u64) -> Check {
        if contains_exit(body) {
            return Ok(false);
        }
        let l = Stmt::loop_(body.clone());
        let r = exec(&l, env, &mut mode.oracle(), fuel).map_err(|e| e.to_string())?;
        if r.outcome.is_full() {
            return Err(format!("exit-free loop finished with {:?}: {l}", r.outcome));
        }
        Ok(true)
    }

    pub fn loop_never_normal(body: &Stmt, env: &Env, mode: &OracleMode, fuel: u64) -> Check {
        let l = Stmt::loop_(body.clone());
        let r = exec(&l, env, &mut mode.oracle(), fuel).map_err(|e| e.to_string())?;
        if r.outcome.is_normal() {
            return Err(format!("loop terminated normally: {l}"));
        }
        Ok(true)
    }

    /// Counted loop `body_m(i, m, inner)` from `i = 0`: exactly `m`
    /// iterations when it exits, at most `m` when cut short.
    pub fn iteration_count(inner: &Stmt, m: i64, env: &Env, mode: &OracleMode, fuel: u64) -> Check {
        let guard = Expr::lt(Expr::reg("i"), Expr::Const(m));
        if !indep(&guard, inner) || escaping_exit(inner, 0) {
            return Ok(false);
        }
        let body = body_m("i", m, inner.clone());
        let env = env.update(&"i".into(), 0);
        let r = exec_loop_counted(&body, &env, &mut mode.oracle(), fuel).map_err(|e| e.to_string())?;
        if r.wrong.is_some() {
            return Ok(false);
        }
        let n = r.iterations as i64;
        match r.outcome {
            Outcome::Exit(0, _) if n != m => Err(format!("exited after {n} iterations, expected {m}: {body}")),
            Outcome::Partial if n > m => Err(format!("{n} iterations exceed bound {m}: {body}")),
            Outcome::Normal(_) | Outcome::Exit(..) if !matches!(r.outcome, Outcome::Exit(0, _)) => {
                Err(format!("counted loop ended with {:?}: {body}", r.outcome))
            }
            _ => Ok(true),
        }
    }

    pub fn fuel0_partial(s: &Stmt, env: &Env) -> Check {
        let r = exec(s, env, &mut Oracle::constant(0), 0).map_err(|e| e.to_string())?;
        if r.outcome != Outcome::Partial || !r.trace.is_empty() {
            return Err(format!("fuel 0 gave {:?} [{}]: {s}", r.outcome, r.trace));
        }
        Ok(true)
    }
}

pub mod behaviors {
    use minicminor::behavior::BoundedBehavior;
    use minicminor::oracle::{Event, Trace};
    use minicminor::state::Env;

    /// All traces of length at most 2 over two events.
    pub fn small_traces() -> Vec<Trace> {
        let evs = [Event::new("f", 0, 0), Event::new("f", 1, 0)];
        let mut out = vec![Trace::new()];
        for a in &evs {
            out.push(Trace::from(vec![a.clone()]));
            for b in &evs {
                out.push(Trace::from(vec![a.clone(), b.clone()]));
            }
        }
        out
    }

    /// Every resolved behavior over `small_traces` and two final states.
    pub fn small_behaviors() -> Vec<BoundedBehavior> {
        let envs: Vec<Env> = vec![[("x", 0)].into_iter().collect(), [("x", 1)].into_iter().collect()];
        let mut out = Vec::new();
        for t in small_traces() {
            for env in &envs {
                out.push(BoundedBehavior::Terminates(t.clone(), env.clone()));
            }
            out.push(BoundedBehavior::GoesWrong(t.clone()));
            out.push(BoundedBehavior::DivergesSilently(t));
        }
        out
    }
}
