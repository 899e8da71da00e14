use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::state::Env;

/// Register name.
pub type Ident = Arc<str>;

/// Shared statement node. Both semantics hand out clones of these instead of
/// copying subtrees, and the small-step cycle detector relies on node identity
/// staying stable across steps.
pub type StmtRef = Arc<Stmt>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Eq,
}

impl BinOp {
    pub const ALL: [BinOp; 6] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Lt,
        BinOp::Eq,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
        }
    }

    /// Binding strength; higher binds tighter. All operators are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Eq => 1,
            BinOp::Lt => 2,
            BinOp::Add | BinOp::Sub => 3,
            BinOp::Mul | BinOp::Div => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Const(i64),
    Reg(Ident),
    BinOp(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn reg(name: &str) -> Expr {
        Expr::Reg(Ident::from(name))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Mul, lhs, rhs)
    }

    pub fn lt(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Lt, lhs, rhs)
    }
}

/// The eight statement forms of the language.
///
/// `Exit(n)` leaves `n + 1` enclosing blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stmt {
    Skip,
    Store(Ident, Expr),
    If(Expr, StmtRef, StmtRef),
    Seq(StmtRef, StmtRef),
    Loop(StmtRef),
    Block(StmtRef),
    Exit(u32),
    ExtCall {
        func: Ident,
        arg: Expr,
        ret: Ident,
    },
}

impl Stmt {
    pub fn store(reg: &str, e: Expr) -> Stmt {
        Stmt::Store(Ident::from(reg), e)
    }

    pub fn if_(cond: Expr, then_s: Stmt, else_s: Stmt) -> Stmt {
        Stmt::If(cond, Arc::new(then_s), Arc::new(else_s))
    }

    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Arc::new(first), Arc::new(second))
    }

    /// Right-nested sequence of `stmts`; `Skip` when empty.
    pub fn seq_all(stmts: impl IntoIterator<Item = Stmt>) -> Stmt {
        let mut items: Vec<Stmt> = stmts.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Stmt::Skip;
        };
        while let Some(s) = items.pop() {
            acc = Stmt::seq(s, acc);
        }
        acc
    }

    pub fn loop_(body: Stmt) -> Stmt {
        Stmt::Loop(Arc::new(body))
    }

    pub fn block(body: Stmt) -> Stmt {
        Stmt::Block(Arc::new(body))
    }

    pub fn extcall(func: &str, arg: Expr, ret: &str) -> Stmt {
        Stmt::ExtCall {
            func: Ident::from(func),
            arg,
            ret: Ident::from(ret),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Stmt::Skip => "skip",
            Stmt::Store(..) => "store",
            Stmt::If(..) => "if",
            Stmt::Seq(..) => "seq",
            Stmt::Loop(..) => "loop",
            Stmt::Block(..) => "block",
            Stmt::Exit(_) => "exit",
            Stmt::ExtCall { .. } => "extcall",
        }
    }

    /// Number of statement nodes.
    pub fn size(&self) -> usize {
        match self {
            Stmt::If(_, a, b) | Stmt::Seq(a, b) => 1 + a.size() + b.size(),
            Stmt::Loop(s) | Stmt::Block(s) => 1 + s.size(),
            _ => 1,
        }
    }

    /// Whether any `Loop` node occurs in the statement.
    pub fn contains_loop(&self) -> bool {
        match self {
            Stmt::Loop(_) => true,
            Stmt::If(_, a, b) | Stmt::Seq(a, b) => a.contains_loop() || b.contains_loop(),
            Stmt::Block(s) => s.contains_loop(),
            _ => false,
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::pretty(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::pretty_expr(self))
    }
}

/// A statement together with the registers it starts with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub body: StmtRef,
    pub initial_regs: Env,
}

impl Program {
    pub fn new(body: Stmt) -> Program {
        Program {
            body: Arc::new(body),
            initial_regs: Env::new(),
        }
    }

    pub fn with_regs(body: Stmt, initial_regs: Env) -> Program {
        Program {
            body: Arc::new(body),
            initial_regs,
        }
    }

    /// Same initial registers, different body.
    pub fn with_body(&self, body: Stmt) -> Program {
        Program {
            body: Arc::new(body),
            initial_regs: self.initial_regs.clone(),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::printer::pretty_program(self))
    }
}
