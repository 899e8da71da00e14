//! Recursive-descent parser for the textual statement language.
//!
//! ```text
//! program := [ "init" reg "=" int { "," reg "=" int } [";"] ] stmts
//! stmts   := [ stmt { ";" stmt } [";"] ]          (right-nested, empty = skip)
//! stmt    := "skip" | reg ":=" expr | reg ":=" "extcall" ident "(" expr ")"
//!          | "if" expr "{" stmts "}" [ "else" "{" stmts "}" ]
//!          | "loop" "{" stmts "}" | "block" "{" stmts "}" | "exit" nat
//!          | "{" stmts "}"                         (grouping only)
//! expr    := int | reg | expr op expr | "(" expr ")"
//! ```

use std::sync::Arc;

use super::ast::{BinOp, Expr, Ident, Program, Stmt};
use super::validate::validate;
use super::SyntaxError;
use crate::state::Env;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Assign,
    Semi,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Op(BinOp),
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Assign => "`:=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const KEYWORDS: &[&str] = &[
    "skip", "if", "else", "loop", "block", "exit", "extcall", "init",
];

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let err = |msg: String| SyntaxError::Parse {
            line: start_line,
            col: start_col,
            message: msg,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // line comments
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let n = digits
                .parse::<u64>()
                .map_err(|_| err(format!("integer literal `{digits}` out of range")))?;
            (Tok::Int(n), j - i)
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('=', Some('=')) => (Tok::Op(BinOp::Eq), 2),
                ('=', _) => (Tok::Equals, 1),
                (';', _) => (Tok::Semi, 1),
                (',', _) => (Tok::Comma, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('+', _) => (Tok::Op(BinOp::Add), 1),
                ('-', _) => (Tok::Op(BinOp::Sub), 1),
                ('*', _) => (Tok::Op(BinOp::Mul), 1),
                ('/', _) => (Tok::Op(BinOp::Div), 1),
                ('<', _) => (Tok::Op(BinOp::Lt), 1),
                _ => return Err(err(format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token {
            tok,
            line: start_line,
            col: start_col,
        });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let t = &self.toks[self.pos];
        Err(SyntaxError::Parse {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            ))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<Ident, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Ident::from(s.as_str()))
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn signed_int(&mut self) -> Result<i64, SyntaxError> {
        let negative = if *self.peek() == Tok::Op(BinOp::Sub) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = if negative {
                    if n > i64::MIN.unsigned_abs() {
                        return self.error("integer literal out of range");
                    }
                    (n as i64).wrapping_neg()
                } else {
                    i64::try_from(n).or_else(|_| self.error("integer literal out of range"))?
                };
                self.bump();
                Ok(v)
            }
            other => self.error(format!("expected integer, found {}", other.describe())),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut regs = Env::new();
        if self.is_keyword("init") {
            self.bump();
            loop {
                let r = self.ident("register name")?;
                self.expect(Tok::Equals)?;
                let v = self.signed_int()?;
                regs.set(r, v);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            if *self.peek() == Tok::Semi {
                self.bump();
            }
        }
        let body = self.stmts()?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", self.peek().describe()));
        }
        Ok(Program {
            body: Arc::new(body),
            initial_regs: regs,
        })
    }

    fn stmts(&mut self) -> Result<Stmt, SyntaxError> {
        let mut items = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            items.push(self.stmt()?);
            if *self.peek() == Tok::Semi {
                self.bump();
            } else {
                break;
            }
        }
        Ok(Stmt::seq_all(items))
    }

    fn braced(&mut self) -> Result<Stmt, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let s = self.stmts()?;
        self.expect(Tok::RBrace)?;
        Ok(s)
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        match self.peek().clone() {
            Tok::LBrace => self.braced(),
            Tok::Ident(kw) => match kw.as_str() {
                "skip" => {
                    self.bump();
                    Ok(Stmt::Skip)
                }
                "if" => {
                    self.bump();
                    let cond = self.expr()?;
                    let then_s = self.braced()?;
                    let else_s = if self.is_keyword("else") {
                        self.bump();
                        self.braced()?
                    } else {
                        Stmt::Skip
                    };
                    Ok(Stmt::if_(cond, then_s, else_s))
                }
                "loop" => {
                    self.bump();
                    Ok(Stmt::loop_(self.braced()?))
                }
                "block" => {
                    self.bump();
                    Ok(Stmt::block(self.braced()?))
                }
                "exit" => {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Int(n) => {
                            let n = u32::try_from(n)
                                .or_else(|_| self.error("exit depth out of range"))?;
                            self.bump();
                            Ok(Stmt::Exit(n))
                        }
                        other => self.error(format!(
                            "expected exit depth, found {}",
                            other.describe()
                        )),
                    }
                }
                _ => {
                    let reg = self.ident("statement")?;
                    self.expect(Tok::Assign)?;
                    if self.is_keyword("extcall") {
                        self.bump();
                        let func = self.ident("function name")?;
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Stmt::ExtCall {
                            func,
                            arg,
                            ret: reg,
                        })
                    } else {
                        Ok(Stmt::Store(reg, self.expr()?))
                    }
                }
            },
            other => self.error(format!("expected statement, found {}", other.describe())),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.expr_prec(1)
    }

    fn expr_prec(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.primary()?;
        while let Tok::Op(op) = *self.peek() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr_prec(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Const(self.signed_int()?)),
            Tok::Op(BinOp::Sub) if matches!(self.peek_at(1), Tok::Int(_)) => {
                Ok(Expr::Const(self.signed_int()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Reg(self.ident("expression")?)),
            other => self.error(format!("expected expression, found {}", other.describe())),
        }
    }
}

/// Parses without the unbound-register check.
pub fn parse_unchecked(text: &str) -> Result<Program, SyntaxError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

/// Parses a program and rejects reads of registers that are neither
/// initialised nor definitely written beforehand.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let p = parse_unchecked(text)?;
    validate(&p)?;
    Ok(p)
}

/// Parses a bare statement (no `init` header, no validation).
pub fn parse_stmt(text: &str) -> Result<Stmt, SyntaxError> {
    let p = parse_unchecked(text)?;
    Ok(Arc::unwrap_or_clone(p.body))
}

pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek().describe()));
    }
    Ok(e)
}
