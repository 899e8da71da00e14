//! Continuation-based small-step machine.
//!
//! A configuration is `⟨stmt, cont, σ⟩`. Every step applies exactly one rule
//! and emits at most one event; only `extcall` emits. A state is final when it
//! is `⟨skip, stop, σ⟩` and stuck when no rule applies.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::json;

use crate::oracle::{Event, Oracle, OracleError, Trace};
use crate::state::{eval_expr, istrue, Env};
use crate::syntax::{Program, Stmt, StmtRef};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cont {
    Stop,
    Seq(StmtRef, Arc<Cont>),
    Block(Arc<Cont>),
}

impl Cont {
    pub fn depth(&self) -> usize {
        let mut n = 0;
        let mut k = self;
        loop {
            match k {
                Cont::Stop => return n,
                Cont::Seq(_, next) | Cont::Block(next) => {
                    n += 1;
                    k = next;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SmallState {
    pub stmt: StmtRef,
    pub cont: Arc<Cont>,
    pub env: Env,
}

impl SmallState {
    pub fn new(stmt: StmtRef, cont: Cont, env: Env) -> SmallState {
        SmallState {
            stmt,
            cont: Arc::new(cont),
            env,
        }
    }

    pub fn initial(p: &Program) -> SmallState {
        SmallState::new(p.body.clone(), Cont::Stop, p.initial_regs.clone())
    }

    pub fn is_final(&self) -> bool {
        matches!(*self.stmt, Stmt::Skip) && matches!(*self.cont, Cont::Stop)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next {
        state: SmallState,
        emitted: Option<Event>,
    },
    Final(Env),
    Stuck(String),
}

impl StepResult {
    fn silent(stmt: StmtRef, cont: Arc<Cont>, env: Env) -> StepResult {
        StepResult::Next {
            state: SmallState { stmt, cont, env },
            emitted: None,
        }
    }

    /// The step's trace (length ≤ 1).
    pub fn emitted_trace(&self) -> Trace {
        match self {
            StepResult::Next {
                emitted: Some(e), ..
            } => Trace::from(vec![e.clone()]),
            _ => Trace::new(),
        }
    }
}

fn skip() -> StmtRef {
    Arc::new(Stmt::Skip)
}

/// Performs one step. Oracle exhaustion is a harness failure and surfaces as
/// `Err`, never as `Stuck`.
pub fn step(st: &SmallState, oracle: &mut Oracle) -> Result<StepResult, OracleError> {
    let k = &st.cont;
    let env = &st.env;
    Ok(match &*st.stmt {
        Stmt::If(c, a, b) => match eval_expr(c, env) {
            Ok(v) if istrue(v) => StepResult::silent(a.clone(), k.clone(), env.clone()),
            Ok(_) => StepResult::silent(b.clone(), k.clone(), env.clone()),
            Err(e) => StepResult::Stuck(format!("if condition: {e}")),
        },
        Stmt::Store(r, e) => match eval_expr(e, env) {
            Ok(v) => StepResult::silent(skip(), k.clone(), env.update(r, v)),
            Err(e) => StepResult::Stuck(format!("store to {r}: {e}")),
        },
        Stmt::ExtCall { func, arg, ret } => match eval_expr(arg, env) {
            Ok(a) => {
                let v = oracle.call(func, a)?;
                StepResult::Next {
                    state: SmallState {
                        stmt: skip(),
                        cont: k.clone(),
                        env: env.update(ret, v),
                    },
                    emitted: Some(Event {
                        func: func.clone(),
                        arg: a,
                        ret: v,
                    }),
                }
            }
            Err(e) => StepResult::Stuck(format!("argument of {func}: {e}")),
        },
        Stmt::Loop(body) => StepResult::silent(
            body.clone(),
            Arc::new(Cont::Seq(st.stmt.clone(), k.clone())),
            env.clone(),
        ),
        Stmt::Seq(a, b) => StepResult::silent(
            a.clone(),
            Arc::new(Cont::Seq(b.clone(), k.clone())),
            env.clone(),
        ),
        Stmt::Block(body) => {
            StepResult::silent(body.clone(), Arc::new(Cont::Block(k.clone())), env.clone())
        }
        Stmt::Skip => match &**k {
            Cont::Stop => StepResult::Final(env.clone()),
            Cont::Seq(s, next) => StepResult::silent(s.clone(), next.clone(), env.clone()),
            Cont::Block(next) => StepResult::silent(st.stmt.clone(), next.clone(), env.clone()),
        },
        Stmt::Exit(n) => match (&**k, *n) {
            (Cont::Seq(_, next), _) => {
                StepResult::silent(st.stmt.clone(), next.clone(), env.clone())
            }
            (Cont::Block(next), 0) => StepResult::silent(skip(), next.clone(), env.clone()),
            (Cont::Block(next), n) => {
                StepResult::silent(Arc::new(Stmt::Exit(n - 1)), next.clone(), env.clone())
            }
            (Cont::Stop, n) => StepResult::Stuck(format!("exit {n} outside of any block")),
        },
    })
}

/// Largest number of silent states remembered between two events.
pub const CYCLE_HISTORY_LIMIT: usize = 1 << 16;

fn stmt_fingerprint(s: &StmtRef, h: &mut DefaultHasher) {
    // Leaves are rebuilt by the step rules; interior nodes always come from
    // the program and are identified by address.
    match &**s {
        Stmt::Skip => 0u8.hash(h),
        Stmt::Exit(n) => (1u8, *n).hash(h),
        _ => (2u8, Arc::as_ptr(s) as usize).hash(h),
    }
}

fn fingerprint(st: &SmallState) -> u64 {
    let mut h = DefaultHasher::new();
    stmt_fingerprint(&st.stmt, &mut h);
    let mut k = &*st.cont;
    loop {
        match k {
            Cont::Stop => {
                3u8.hash(&mut h);
                break;
            }
            Cont::Seq(s, next) => {
                4u8.hash(&mut h);
                stmt_fingerprint(s, &mut h);
                k = next;
            }
            Cont::Block(next) => {
                5u8.hash(&mut h);
                k = next;
            }
        }
    }
    st.env.hash(&mut h);
    h.finish()
}

/// Remembers the silent states seen since the last event and reports exact
/// recurrences. Because the machine is deterministic between events, a
/// recurrence proves the run diverges without emitting anything further.
#[derive(Debug, Default)]
pub struct CycleDetector {
    seen: HashMap<u64, Vec<SmallState>>,
    order: VecDeque<u64>,
}

impl CycleDetector {
    pub fn new() -> CycleDetector {
        CycleDetector::default()
    }

    /// Records `st`; returns true if an identical state was already recorded.
    pub fn observe(&mut self, st: &SmallState) -> bool {
        let fp = fingerprint(st);
        if let Some(bucket) = self.seen.get(&fp) {
            if bucket.iter().any(|old| old == st) {
                return true;
            }
        }
        if self.order.len() == CYCLE_HISTORY_LIMIT {
            if let Some(old) = self.order.pop_front() {
                if let Some(bucket) = self.seen.get_mut(&old) {
                    bucket.remove(0);
                    if bucket.is_empty() {
                        self.seen.remove(&old);
                    }
                }
            }
        }
        self.seen.entry(fp).or_default().push(st.clone());
        self.order.push_back(fp);
        false
    }

    /// Forgets everything; called whenever an event is emitted.
    pub fn reset(&mut self) {
        self.seen.clear();
        self.order.clear();
    }
}

/// True iff some state occurs twice in `history` (structural equality).
/// `history` must be consecutive states linked by silent steps.
pub fn detect_silent_cycle(history: &[SmallState]) -> bool {
    let mut seen = HashSet::with_capacity(history.len());
    history.iter().any(|st| !seen.insert(st))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Terminated(Env),
    WentWrong(String),
    FuelExhausted,
    SilentCycle,
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Terminated(_) => "terminated",
            RunStatus::WentWrong(_) => "went_wrong",
            RunStatus::FuelExhausted => "fuel_exhausted",
            RunStatus::SilentCycle => "silent_cycle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedRun {
    pub status: RunStatus,
    pub trace: Trace,
    pub steps_used: u64,
    pub final_state: Option<SmallState>,
    /// For each event, the number of steps taken when it was emitted (1-based).
    pub event_steps: Vec<u64>,
}

impl BoundedRun {
    pub fn final_env(&self) -> Option<&Env> {
        self.final_state.as_ref().map(|s| &s.env)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "status": self.status.label(),
            "trace": self.trace,
            "steps": self.steps_used,
            "final": self.final_env().map(Env::to_json).unwrap_or(serde_json::Value::Null),
        });
        if let RunStatus::WentWrong(reason) = &self.status {
            v["reason"] = json!(reason);
        }
        v
    }
}

/// A run cut short because the oracle ran out of scripted answers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{error} after {steps_used} steps")]
pub struct RunAborted {
    pub error: OracleError,
    pub trace: Trace,
    pub steps_used: u64,
}

/// Runs `p` for at most `fuel` steps, stopping early at a final state, a stuck
/// state, or a certified silent cycle.
pub fn run(p: &Program, oracle: &mut Oracle, fuel: u64) -> Result<BoundedRun, RunAborted> {
    run_from(SmallState::initial(p), oracle, fuel)
}

pub fn run_from(
    start: SmallState,
    oracle: &mut Oracle,
    fuel: u64,
) -> Result<BoundedRun, RunAborted> {
    let mut st = start;
    let mut trace = Trace::new();
    let mut event_steps = Vec::new();
    let mut steps = 0u64;
    let mut detector = CycleDetector::new();
    detector.observe(&st);
    let finish = |status, trace, steps_used, st, event_steps| {
        Ok(BoundedRun {
            status,
            trace,
            steps_used,
            final_state: Some(st),
            event_steps,
        })
    };
    loop {
        if st.is_final() {
            let env = st.env.clone();
            return finish(RunStatus::Terminated(env), trace, steps, st, event_steps);
        }
        if steps >= fuel {
            return finish(RunStatus::FuelExhausted, trace, steps, st, event_steps);
        }
        let result = match step(&st, oracle) {
            Ok(r) => r,
            Err(error) => {
                return Err(RunAborted {
                    error,
                    trace,
                    steps_used: steps,
                })
            }
        };
        match result {
            StepResult::Next { state, emitted } => {
                steps += 1;
                st = state;
                if let Some(e) = emitted {
                    trace.push(e);
                    event_steps.push(steps);
                    detector.reset();
                }
                if detector.observe(&st) {
                    return finish(RunStatus::SilentCycle, trace, steps, st, event_steps);
                }
            }
            StepResult::Final(_) => unreachable!("final states are handled before stepping"),
            StepResult::Stuck(reason) => {
                return finish(RunStatus::WentWrong(reason), trace, steps, st, event_steps)
            }
        }
    }
}

/// Runs without cycle detection and returns every state visited, the initial
/// one included. Test and diagnostics helper.
pub fn history(p: &Program, oracle: &mut Oracle, fuel: u64) -> Vec<(SmallState, Trace)> {
    let mut st = SmallState::initial(p);
    let mut out = vec![(st.clone(), Trace::new())];
    for _ in 0..fuel {
        match step(&st, oracle) {
            Ok(r @ StepResult::Next { .. }) => {
                let t = r.emitted_trace();
                let StepResult::Next { state, .. } = r else {
                    unreachable!()
                };
                out.push((state.clone(), t));
                st = state;
            }
            _ => break,
        }
    }
    out
}
