//! Register environments and expression evaluation, shared by both semantics.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{BinOp, Expr, Ident};

pub type Value = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("read of unbound register `{0}`")]
    UnboundRegister(Ident),
}

/// Persistent register map. Cloning is O(1); `update` copies the map only
/// when it is shared.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Env {
    regs: Arc<BTreeMap<Ident, Value>>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, reg: &str) -> Option<Value> {
        self.regs.get(reg).copied()
    }

    pub fn contains(&self, reg: &str) -> bool {
        self.regs.contains_key(reg)
    }

    /// Functional update: `self` is left untouched.
    pub fn update(&self, reg: &Ident, v: Value) -> Env {
        let mut next = self.clone();
        next.set(reg.clone(), v);
        next
    }

    /// In-place update, used by the interpreters on environments they own.
    pub fn set(&mut self, reg: Ident, v: Value) {
        Arc::make_mut(&mut self.regs).insert(reg, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, Value)> {
        self.regs.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("register maps always serialize")
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.regs.iter()).finish()
    }
}

impl<'a> FromIterator<(&'a str, Value)> for Env {
    fn from_iter<T: IntoIterator<Item = (&'a str, Value)>>(iter: T) -> Env {
        Env {
            regs: Arc::new(iter.into_iter().map(|(k, v)| (Ident::from(k), v)).collect()),
        }
    }
}

impl FromIterator<(Ident, Value)> for Env {
    fn from_iter<T: IntoIterator<Item = (Ident, Value)>>(iter: T) -> Env {
        Env {
            regs: Arc::new(iter.into_iter().collect()),
        }
    }
}

pub fn istrue(v: Value) -> bool {
    v != 0
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Reg(r) => env
            .get(r)
            .ok_or_else(|| EvalError::UnboundRegister(r.clone())),
        Expr::BinOp(op, lhs, rhs) => {
            let a = eval_expr(lhs, env)?;
            let b = eval_expr(rhs, env)?;
            Ok(match op {
                BinOp::Add => a.wrapping_add(b),
                BinOp::Sub => a.wrapping_sub(b),
                BinOp::Mul => a.wrapping_mul(b),
                BinOp::Div => {
                    if b == 0 {
                        return Err(EvalError::DivByZero);
                    }
                    a.wrapping_div(b)
                }
                BinOp::Lt => (a < b) as Value,
                BinOp::Eq => (a == b) as Value,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Expr;

    fn env(pairs: &[(&str, Value)]) -> Env {
        pairs.iter().copied().collect()
    }

    #[test]
    fn constants_evaluate_to_themselves() {
        assert_eq!(eval_expr(&Expr::Const(5), &Env::new()), Ok(5));
    }

    #[test]
    fn factorial_guard_holds_at_one() {
        let e = Expr::lt(Expr::reg("i"), Expr::Const(11));
        assert_eq!(eval_expr(&e, &env(&[("i", 1)])), Ok(1));
        assert_eq!(eval_expr(&e, &env(&[("i", 11)])), Ok(0));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expr::bin(BinOp::Div, Expr::Const(1), Expr::Const(0));
        assert_eq!(eval_expr(&e, &Env::new()), Err(EvalError::DivByZero));
    }

    #[test]
    fn unbound_reads_are_errors() {
        assert_eq!(
            eval_expr(&Expr::reg("q"), &Env::new()),
            Err(EvalError::UnboundRegister(Ident::from("q")))
        );
    }

    #[test]
    fn arithmetic_wraps() {
        let e = Expr::add(Expr::Const(i64::MAX), Expr::Const(1));
        assert_eq!(eval_expr(&e, &Env::new()), Ok(i64::MIN));
        let e = Expr::bin(BinOp::Div, Expr::Const(i64::MIN), Expr::Const(-1));
        assert_eq!(eval_expr(&e, &Env::new()), Ok(i64::MIN));
    }

    #[test]
    fn update_is_functional() {
        let x = Ident::from("x");
        let base = Env::new();
        let one = base.update(&x, 3);
        assert_eq!(one.get("x"), Some(3));
        assert!(base.is_empty());
        let two = env(&[("x", 1), ("y", 7)]).update(&x, 2);
        assert_eq!(two.get("x"), Some(2));
        assert_eq!(two.get("y"), Some(7));
    }

    #[test]
    fn env_serializes_as_flat_object() {
        let e = env(&[("x", 1), ("y", -2)]);
        assert_eq!(e.to_json(), serde_json::json!({"x": 1, "y": -2}));
    }
}
