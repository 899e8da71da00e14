//! Abstract syntax, concrete text grammar and printer.

mod ast;
mod parser;
mod printer;
mod validate;

use thiserror::Error;

pub use ast::{BinOp, Expr, Ident, Program, Stmt, StmtRef};
pub use parser::{parse_expr, parse_program, parse_stmt, parse_unchecked};
pub use printer::{pretty, pretty_expr, pretty_program};
pub use validate::validate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("register `{reg}` may be read before it is written")]
    UnboundRegister { reg: String },
}
