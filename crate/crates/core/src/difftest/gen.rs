//! Random program generation.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::state::Env;
use crate::syntax::{BinOp, Expr, Ident, Program, Stmt};
use crate::transform::body_m;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Skip,
    Store,
    If,
    Seq,
    Loop,
    Block,
    Exit,
    ExtCall,
}

impl Form {
    pub const ALL: [Form; 8] = [
        Form::Skip,
        Form::Store,
        Form::If,
        Form::Seq,
        Form::Loop,
        Form::Block,
        Form::Exit,
        Form::ExtCall,
    ];

    fn is_leaf(self) -> bool {
        matches!(self, Form::Skip | Form::Store | Form::Exit | Form::ExtCall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: u32,
    /// Inclusive range of literal constants.
    pub const_range: (i64, i64),
    pub reg_pool: Vec<String>,
    /// Relative weights of the statement forms in free generation. Forms
    /// missing from the map get weight 0.
    pub weights: BTreeMap<Form, u32>,
    /// Chance that a loop payload in an embedded site performs an extcall.
    pub extcall_prob: f64,
    /// Chance that a program embeds transformation sites at all.
    pub site_prob: f64,
    pub max_sites: u32,
    /// Largest bound of generated counted loops.
    pub max_bound: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        let weights = [
            (Form::Skip, 1),
            (Form::Store, 6),
            (Form::If, 3),
            (Form::Seq, 4),
            (Form::Loop, 1),
            (Form::Block, 2),
            (Form::Exit, 1),
            (Form::ExtCall, 2),
        ];
        GenConfig {
            seed: 0,
            max_depth: 3,
            const_range: (-3, 12),
            reg_pool: ["a", "b", "c", "x", "y"].map(String::from).to_vec(),
            weights: weights.into_iter().collect(),
            extcall_prob: 0.5,
            site_prob: 0.7,
            max_sites: 2,
            max_bound: 8,
        }
    }
}

impl GenConfig {
    pub fn with_seed(&self, seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..self.clone()
        }
    }

    /// Everything on `form`; free generation then only produces that form
    /// (leaves fall back to `skip`).
    pub fn only(form: Form) -> GenConfig {
        GenConfig {
            weights: [(form, 1)].into_iter().collect(),
            site_prob: 0.0,
            ..GenConfig::default()
        }
    }
}

const FUNCS: [&str; 3] = ["f", "g", "h"];
const COUNTERS: [&str; 6] = ["i", "j", "k", "n", "p", "q"];

struct Gen<'c> {
    rng: ChaCha8Rng,
    cfg: &'c GenConfig,
    counters: usize,
}

/// Statement-level context: how many enclosing blocks an exit may target and
/// which registers may be written.
#[derive(Clone)]
struct Ctx {
    blocks: u32,
    /// Whether exits may leave all `blocks` and go further.
    escape: bool,
    writable: Vec<Ident>,
    events: bool,
    exits: bool,
}

impl<'c> Gen<'c> {
    fn constant(&mut self) -> i64 {
        let (lo, hi) = self.cfg.const_range;
        if lo >= hi {
            lo
        } else {
            self.rng.gen_range(lo..=hi)
        }
    }

    fn pool(&self) -> Vec<Ident> {
        self.cfg.reg_pool.iter().map(|r| Ident::from(r.as_str())).collect()
    }

    fn reg(&mut self) -> Expr {
        let pool = &self.cfg.reg_pool;
        if pool.is_empty() {
            return Expr::Const(self.constant());
        }
        Expr::reg(&pool[self.rng.gen_range(0..pool.len())])
    }

    fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.5) {
            return if self.rng.gen_bool(0.6) {
                self.reg()
            } else {
                Expr::Const(self.constant())
            };
        }
        let ops = [
            (BinOp::Add, 3),
            (BinOp::Sub, 2),
            (BinOp::Mul, 2),
            (BinOp::Div, 1),
            (BinOp::Lt, 2),
            (BinOp::Eq, 1),
        ];
        let op = ops.choose_weighted(&mut self.rng, |o| o.1).unwrap().0;
        Expr::bin(op, self.expr(depth - 1), self.expr(depth - 1))
    }

    fn cond(&mut self) -> Expr {
        match self.rng.gen_range(0..4) {
            0 => self.reg(),
            1 => Expr::bin(BinOp::Eq, self.reg(), Expr::Const(self.constant())),
            _ => Expr::lt(self.reg(), self.expr(1)),
        }
    }

    /// A condition reading only registers outside `writable`, if any.
    fn cond_avoiding(&mut self, writable: &[Ident]) -> Expr {
        let readable: Vec<Ident> = self
            .pool()
            .into_iter()
            .filter(|r| !writable.contains(r))
            .collect();
        let Some(r) = readable.choose(&mut self.rng).cloned() else {
            return Expr::Const(self.rng.gen_range(0..2));
        };
        let r = Expr::Reg(r);
        match self.rng.gen_range(0..3) {
            0 => r,
            1 => Expr::bin(BinOp::Eq, r, Expr::Const(self.constant())),
            _ => Expr::lt(r, Expr::Const(self.constant())),
        }
    }

    fn pick_form(&mut self, leaf_only: bool, ctx: &Ctx) -> Option<Form> {
        let forms: Vec<(Form, u32)> = Form::ALL
            .into_iter()
            .filter(|f| !leaf_only || f.is_leaf())
            .filter(|f| ctx.events || *f != Form::ExtCall)
            .filter(|f| ctx.exits || *f != Form::Exit)
            .filter(|f| !matches!(f, Form::Store | Form::ExtCall) || !ctx.writable.is_empty())
            .map(|f| (f, self.cfg.weights.get(&f).copied().unwrap_or(0)))
            .filter(|(_, w)| *w > 0)
            .collect();
        let dist = WeightedIndex::new(forms.iter().map(|f| f.1)).ok()?;
        Some(forms[dist.sample(&mut self.rng)].0)
    }

    fn target(&mut self, ctx: &Ctx) -> Ident {
        ctx.writable[self.rng.gen_range(0..ctx.writable.len())].clone()
    }

    fn extcall(&mut self, ctx: &Ctx) -> Stmt {
        let func = FUNCS[self.rng.gen_range(0..FUNCS.len())];
        let ret = self.target(ctx);
        Stmt::ExtCall {
            func: func.into(),
            arg: self.expr(1),
            ret,
        }
    }

    fn stmt(&mut self, depth: u32, ctx: &Ctx) -> Stmt {
        let Some(form) = self.pick_form(depth == 0, ctx) else {
            return Stmt::Skip;
        };
        let sub = depth.saturating_sub(1);
        match form {
            Form::Skip => Stmt::Skip,
            Form::Store => {
                let r = self.target(ctx);
                Stmt::Store(r, self.expr(2))
            }
            Form::ExtCall => self.extcall(ctx),
            Form::Exit => {
                let top = if ctx.escape { ctx.blocks } else { ctx.blocks.saturating_sub(1) };
                if !ctx.escape && ctx.blocks == 0 {
                    Stmt::Skip
                } else {
                    Stmt::Exit(self.rng.gen_range(0..=top))
                }
            }
            Form::If => {
                let c = self.cond();
                Stmt::if_(c, self.stmt(sub, ctx), self.stmt(sub, ctx))
            }
            Form::Seq => Stmt::seq(self.stmt(sub, ctx), self.stmt(sub, ctx)),
            Form::Loop => Stmt::loop_(self.stmt(sub, ctx)),
            Form::Block => {
                let inner = Ctx {
                    blocks: ctx.blocks + 1,
                    ..ctx.clone()
                };
                Stmt::block(self.stmt(sub, &inner))
            }
        }
    }

    fn counter(&mut self) -> Option<&'static str> {
        let c = COUNTERS.get(self.counters).copied();
        self.counters += 1;
        c
    }

    fn payload(&mut self, ctx: &Ctx) -> Stmt {
        let depth = self.cfg.max_depth.saturating_sub(1).max(1);
        let body = self.stmt(depth, ctx);
        if ctx.events && self.rng.gen_bool(self.cfg.extcall_prob) {
            let call = self.extcall(ctx);
            Stmt::seq(body, call)
        } else {
            body
        }
    }

    fn site(&mut self, free: &Ctx) -> Stmt {
        let local = Ctx {
            blocks: 0,
            escape: false,
            ..free.clone()
        };
        match self.rng.gen_range(0..6) {
            // counted loop in unrolling shape
            0 | 1 => {
                let Some(i) = self.counter() else { return Stmt::Skip };
                let m = self.rng.gen_range(0..=self.cfg.max_bound);
                let mut inner = self.payload(&local);
                if self.rng.gen_bool(0.2) {
                    inner = Stmt::seq(inner, self.site(free));
                }
                Stmt::seq(
                    Stmt::store(i, Expr::Const(0)),
                    Stmt::block(Stmt::loop_(body_m(i, m.into(), inner))),
                )
            }
            // loop whose body is a branch on an independent condition
            2 | 3 => {
                let Some(k) = self.counter() else { return Stmt::Skip };
                let mut writable = free.writable.clone();
                writable.shuffle(&mut self.rng);
                writable.truncate(writable.len().div_ceil(2));
                let c = if self.rng.gen_bool(0.8) {
                    self.cond_avoiding(&writable)
                } else {
                    self.cond()
                };
                let inner = Ctx {
                    blocks: 1,
                    escape: false,
                    writable,
                    ..free.clone()
                };
                let bound = self.rng.gen_range(0..=self.cfg.max_bound).into();
                let count = Stmt::seq(
                    Stmt::store(k, Expr::add(Expr::reg(k), Expr::Const(1))),
                    Stmt::if_(Expr::lt(Expr::reg(k), Expr::Const(bound)), Stmt::Skip, Stmt::Exit(0)),
                );
                let s1 = Stmt::seq(self.payload(&inner), count.clone());
                let s2 = if self.rng.gen_bool(0.5) {
                    Stmt::Exit(0)
                } else {
                    Stmt::seq(self.payload(&inner), count)
                };
                Stmt::seq(
                    Stmt::store(k, Expr::Const(0)),
                    Stmt::block(Stmt::loop_(Stmt::if_(c, s1, s2))),
                )
            }
            // loop branching on its own counter
            4 => {
                let Some(k) = self.counter() else { return Stmt::Skip };
                let bound = self.rng.gen_range(1..=self.cfg.max_bound.max(1)).into();
                let mut body = Stmt::seq(
                    self.payload(&local),
                    Stmt::store(k, Expr::add(Expr::reg(k), Expr::Const(1))),
                );
                if free.events && self.rng.gen_bool(self.cfg.extcall_prob) {
                    let func = FUNCS[self.rng.gen_range(0..FUNCS.len())];
                    let ret = self.target(free);
                    body = Stmt::seq(
                        body,
                        Stmt::ExtCall {
                            func: func.into(),
                            arg: Expr::reg(k),
                            ret,
                        },
                    );
                }
                Stmt::seq(
                    Stmt::store(k, Expr::Const(0)),
                    Stmt::block(Stmt::loop_(Stmt::if_(
                        Expr::lt(Expr::reg(k), Expr::Const(bound)),
                        body,
                        Stmt::Exit(0),
                    ))),
                )
            }
            // exit-free loop, silent or not, possibly guarded
            _ => {
                let ctx = Ctx {
                    exits: false,
                    events: free.events && self.rng.gen_bool(0.5),
                    ..local
                };
                let body = self.stmt(self.cfg.max_depth.saturating_sub(1), &ctx);
                let body = if ctx.events && self.rng.gen_bool(self.cfg.extcall_prob) {
                    Stmt::seq(body, self.extcall(&ctx))
                } else {
                    body
                };
                let l = Stmt::loop_(body);
                if self.rng.gen_bool(0.5) {
                    Stmt::if_(self.cond(), l, Stmt::Skip)
                } else {
                    l
                }
            }
        }
    }

    fn program(&mut self) -> Program {
        let free = Ctx {
            blocks: 0,
            escape: true,
            writable: self.pool(),
            events: true,
            exits: true,
        };
        let body = if self.rng.gen_bool(self.cfg.site_prob.clamp(0.0, 1.0)) {
            let sites = self.rng.gen_range(1..=self.cfg.max_sites.max(1));
            let mut parts = Vec::new();
            for _ in 0..sites {
                if self.rng.gen_bool(0.5) {
                    parts.push(self.stmt(1, &free));
                }
                parts.push(self.site(&free));
            }
            if self.rng.gen_bool(0.5) {
                let ctx = Ctx {
                    exits: false,
                    ..free.clone()
                };
                parts.push(self.extcall(&ctx));
            }
            Stmt::seq_all(parts)
        } else {
            self.stmt(self.cfg.max_depth, &free)
        };
        let mut regs = Env::new();
        let names: Vec<&str> = self
            .cfg
            .reg_pool
            .iter()
            .map(String::as_str)
            .chain(COUNTERS[..self.counters.min(COUNTERS.len())].iter().copied())
            .collect();
        for r in names {
            let v = self.constant();
            regs.set(r.into(), v);
        }
        Program::with_regs(body, regs)
    }
}

/// A random well-formed program; a pure function of `cfg`.
pub fn gen_program(cfg: &GenConfig) -> Program {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg,
        counters: 0,
    };
    g.program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, validate};

    #[test]
    fn skip_only() {
        let cfg = GenConfig::only(Form::Skip);
        for seed in 0..20 {
            assert_eq!(*gen_program(&cfg.with_seed(seed)).body, Stmt::Skip);
        }
    }

    #[test]
    fn reproducible() {
        let cfg = GenConfig::default().with_seed(42);
        assert_eq!(gen_program(&cfg), gen_program(&cfg));
        assert_ne!(gen_program(&cfg), gen_program(&cfg.with_seed(43)));
    }

    #[test]
    fn well_formed_and_printable() {
        let cfg = GenConfig::default();
        for seed in 0..300 {
            let p = gen_program(&cfg.with_seed(seed));
            validate(&p).unwrap();
            assert_eq!(parse_program(&p.to_string()).unwrap(), p, "seed {seed}");
        }
    }
}
