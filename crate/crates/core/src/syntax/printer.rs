use std::fmt::Write;

use super::ast::{Expr, Program, Stmt};

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Reg(r) => out.push_str(r),
        Expr::BinOp(op, lhs, rhs) => {
            let prec = op.precedence();
            write_operand(out, lhs, |p| p < prec);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, rhs, |p| p <= prec);
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, needs_parens: impl Fn(u8) -> bool) {
    match e {
        Expr::BinOp(op, ..) if needs_parens(op.precedence()) => {
            out.push('(');
            write_expr(out, e);
            out.push(')');
        }
        _ => write_expr(out, e),
    }
}

/// Canonical text for a statement; reparses to an identical tree.
pub fn pretty(s: &Stmt) -> String {
    let mut out = String::new();
    write_seq(&mut out, s, 0);
    out
}

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    if !p.initial_regs.is_empty() {
        out.push_str("init ");
        let bindings: Vec<String> = p
            .initial_regs
            .iter()
            .map(|(r, v)| format!("{r} = {v}"))
            .collect();
        out.push_str(&bindings.join(", "));
        out.push_str(";\n");
    }
    write_seq(&mut out, &p.body, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Writes a right-nested sequence as `a;\nb;\nc`. A left operand that is itself
/// a sequence goes in grouping braces so the nesting survives a reparse.
fn write_seq(out: &mut String, s: &Stmt, level: usize) {
    let mut cur = s;
    loop {
        indent(out, level);
        match cur {
            Stmt::Seq(first, rest) => {
                if matches!(**first, Stmt::Seq(..)) {
                    out.push_str("{\n");
                    write_seq(out, first, level + 1);
                    out.push('\n');
                    indent(out, level);
                    out.push('}');
                } else {
                    write_single(out, first, level);
                }
                out.push_str(";\n");
                cur = rest;
            }
            _ => {
                write_single(out, cur, level);
                return;
            }
        }
    }
}

fn write_braced(out: &mut String, s: &Stmt, level: usize) {
    out.push_str("{\n");
    write_seq(out, s, level + 1);
    out.push('\n');
    indent(out, level);
    out.push('}');
}

fn write_single(out: &mut String, s: &Stmt, level: usize) {
    match s {
        Stmt::Skip => out.push_str("skip"),
        Stmt::Store(r, e) => {
            let _ = write!(out, "{r} := {}", pretty_expr(e));
        }
        Stmt::ExtCall { func, arg, ret } => {
            let _ = write!(out, "{ret} := extcall {func}({})", pretty_expr(arg));
        }
        Stmt::Exit(n) => {
            let _ = write!(out, "exit {n}");
        }
        Stmt::If(c, a, b) => {
            let _ = write!(out, "if {} ", pretty_expr(c));
            write_braced(out, a, level);
            out.push_str(" else ");
            write_braced(out, b, level);
        }
        Stmt::Loop(body) => {
            out.push_str("loop ");
            write_braced(out, body, level);
        }
        Stmt::Block(body) => {
            out.push_str("block ");
            write_braced(out, body, level);
        }
        Stmt::Seq(..) => write_braced(out, s, level),
    }
}
