//! Fuel-indexed big-step evaluator with partial outcomes.
//!
//! `exec` realises the inductive judgment `⟨s, σ⟩ ⇓ t o` where `o` is a normal
//! outcome, an exit through `n + 1` blocks, or `Partial` (a truncated
//! evaluation). Fuel is a single budget shared by the whole evaluation: one
//! unit per `Seq`, `If` and `Block` node entered, per loop iteration, and per
//! external call. When the budget is empty on entry to any node, that node
//! evaluates to `ε Partial`, so a partial outcome always carries the complete
//! trace produced before the truncation point.
//!
//! Big-step semantics have no going-wrong judgment of their own. Evaluation
//! errors stop the derivation with a `Partial` outcome and set the `wrong`
//! flag.

use serde_json::json;

use crate::behavior::BoundedBehavior;
use crate::oracle::{Event, Oracle, OracleError, Trace};
use crate::state::{eval_expr, istrue, Env};
use crate::syntax::{Program, Stmt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Normal(Env),
    Exit(u32, Env),
    Partial,
}

impl Outcome {
    pub fn is_normal(&self) -> bool {
        matches!(self, Outcome::Normal(_))
    }

    /// Full outcomes are everything except `Partial`.
    pub fn is_full(&self) -> bool {
        !matches!(self, Outcome::Partial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigResult {
    pub trace: Trace,
    pub outcome: Outcome,
    /// Why evaluation went wrong, if it did. Implies `outcome == Partial`.
    pub wrong: Option<String>,
    pub fuel_used: u64,
}

impl BigResult {
    pub fn is_wrong(&self) -> bool {
        self.wrong.is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (status, fin) = match &self.outcome {
            Outcome::Normal(env) => ("terminated", env.to_json()),
            Outcome::Exit(_, env) => ("exit", env.to_json()),
            Outcome::Partial => ("partial", serde_json::Value::Null),
        };
        let mut v = json!({
            "status": status,
            "trace": self.trace,
            "steps": self.fuel_used,
            "final": fin,
            "wrong": self.is_wrong(),
        });
        if let Outcome::Exit(n, _) = &self.outcome {
            v["exit"] = json!(n);
        }
        if let Some(reason) = &self.wrong {
            v["reason"] = json!(reason);
        }
        v
    }
}

/// Result of the iteration-counting loop judgment `⟨s, σ⟩ ⤳ⁿ t o`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopCount {
    /// Completed (normal) body evaluations before `outcome`.
    pub iterations: u64,
    pub trace: Trace,
    pub outcome: Outcome,
    pub wrong: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{error}")]
pub struct ExecAborted {
    pub error: OracleError,
    pub trace: Trace,
}

struct Evaluator<'o> {
    oracle: &'o mut Oracle,
    fuel: u64,
    budget: u64,
    trace: Trace,
    wrong: Option<String>,
}

impl<'o> Evaluator<'o> {
    fn new(oracle: &'o mut Oracle, fuel: u64) -> Self {
        Evaluator {
            oracle,
            fuel,
            budget: fuel,
            trace: Trace::new(),
            wrong: None,
        }
    }

    fn go_wrong(&mut self, reason: String) -> Outcome {
        self.wrong = Some(reason);
        Outcome::Partial
    }

    /// One loop iteration's worth of fuel; false when the budget is empty.
    fn tick(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn exec(&mut self, s: &Stmt, mut env: Env) -> Result<Outcome, OracleError> {
        let mut cur = s;
        loop {
            if self.budget == 0 {
                return Ok(Outcome::Partial);
            }
            match cur {
                Stmt::Skip => return Ok(Outcome::Normal(env)),
                Stmt::Exit(n) => return Ok(Outcome::Exit(*n, env)),
                Stmt::Store(r, e) => {
                    return Ok(match eval_expr(e, &env) {
                        Ok(v) => {
                            env.set(r.clone(), v);
                            Outcome::Normal(env)
                        }
                        Err(err) => self.go_wrong(format!("store to {r}: {err}")),
                    });
                }
                Stmt::ExtCall { func, arg, ret } => {
                    let a = match eval_expr(arg, &env) {
                        Ok(a) => a,
                        Err(err) => return Ok(self.go_wrong(format!("argument of {func}: {err}"))),
                    };
                    let v = self.oracle.call(func, a)?;
                    self.trace.push(Event {
                        func: func.clone(),
                        arg: a,
                        ret: v,
                    });
                    self.budget -= 1;
                    // The call's event is already in the trace; truncating
                    // right after it is the partial variant of the rule.
                    if self.budget == 0 {
                        return Ok(Outcome::Partial);
                    }
                    env.set(ret.clone(), v);
                    return Ok(Outcome::Normal(env));
                }
                Stmt::If(c, a, b) => {
                    self.budget -= 1;
                    match eval_expr(c, &env) {
                        Ok(v) if istrue(v) => cur = a,
                        Ok(_) => cur = b,
                        Err(err) => return Ok(self.go_wrong(format!("if condition: {err}"))),
                    }
                }
                Stmt::Seq(a, b) => {
                    self.budget -= 1;
                    match self.exec(a, env)? {
                        Outcome::Normal(next) => {
                            env = next;
                            cur = b;
                        }
                        other => return Ok(other),
                    }
                }
                Stmt::Block(body) => {
                    self.budget -= 1;
                    return Ok(match self.exec(body, env)? {
                        Outcome::Normal(e) | Outcome::Exit(0, e) => Outcome::Normal(e),
                        Outcome::Exit(n, e) => Outcome::Exit(n - 1, e),
                        Outcome::Partial => Outcome::Partial,
                    });
                }
                Stmt::Loop(body) => {
                    let (_, outcome) = self.iterate(body, env)?;
                    return Ok(outcome);
                }
            }
        }
    }

    /// Evaluates `body` until it produces a non-normal outcome; returns the
    /// number of completed iterations alongside that outcome.
    fn iterate(&mut self, body: &Stmt, mut env: Env) -> Result<(u64, Outcome), OracleError> {
        let mut iterations = 0;
        loop {
            if !self.tick() {
                return Ok((iterations, Outcome::Partial));
            }
            match self.exec(body, env)? {
                Outcome::Normal(next) => {
                    iterations += 1;
                    env = next;
                }
                other => return Ok((iterations, other)),
            }
        }
    }
}

/// Evaluates `s` from `env` within `fuel`.
pub fn exec(s: &Stmt, env: &Env, oracle: &mut Oracle, fuel: u64) -> Result<BigResult, ExecAborted> {
    let mut ev = Evaluator::new(oracle, fuel);
    match ev.exec(s, env.clone()) {
        Ok(outcome) => Ok(BigResult {
            trace: ev.trace,
            outcome,
            wrong: ev.wrong,
            fuel_used: ev.fuel - ev.budget,
        }),
        Err(error) => Err(ExecAborted {
            error,
            trace: ev.trace,
        }),
    }
}

pub fn exec_program(p: &Program, oracle: &mut Oracle, fuel: u64) -> Result<BigResult, ExecAborted> {
    exec(&p.body, &p.initial_regs, oracle, fuel)
}

/// Runs `body` as a loop body and counts completed iterations. Fuel is
/// charged exactly as for `Loop(body)`, so the outcome and trace agree with
/// `exec` on the loop.
pub fn exec_loop_counted(
    body: &Stmt,
    env: &Env,
    oracle: &mut Oracle,
    fuel: u64,
) -> Result<LoopCount, ExecAborted> {
    let mut ev = Evaluator::new(oracle, fuel);
    match ev.iterate(body, env.clone()) {
        Ok((iterations, outcome)) => Ok(LoopCount {
            iterations,
            trace: ev.trace,
            outcome,
            wrong: ev.wrong,
        }),
        Err(error) => Err(ExecAborted {
            error,
            trace: ev.trace,
        }),
    }
}

/// Behavior read off the big-step judgment. Divergence is never certified
/// here; a truncated evaluation is `Unresolved`.
pub fn behavior_big(p: &Program, oracle: &mut Oracle, fuel: u64) -> BoundedBehavior {
    match exec_program(p, oracle, fuel) {
        Ok(r) => match r.outcome {
            _ if r.is_wrong() => BoundedBehavior::GoesWrong(r.trace),
            Outcome::Normal(env) => BoundedBehavior::Terminates(r.trace, env),
            Outcome::Exit(..) => BoundedBehavior::GoesWrong(r.trace),
            Outcome::Partial => BoundedBehavior::Unresolved(r.trace),
        },
        Err(aborted) => BoundedBehavior::Unresolved(aborted.trace),
    }
}
