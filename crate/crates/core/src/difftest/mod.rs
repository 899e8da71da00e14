//! Differential testing of passes over random programs.

mod gen;
mod shrink;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{check_forward_ladder, Verdict};
use crate::oracle::{OracleMode, SEEDED_RANGE};
use crate::syntax::{parse_program, Program};
use crate::transform::{find_unroll_candidates, Pass, DEFAULT_MAX_UNROLL};

pub use gen::{gen_program, Form, GenConfig};
pub use shrink::{shrink, shrink_with_budget, DEFAULT_SHRINK_BUDGET};

/// Length of the scripts handed to scripted oracles.
pub const SCRIPT_LEN: usize = 256;

fn mix(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Program for case `index` of a run configured by `cfg`.
pub fn case_program(cfg: &GenConfig, index: usize) -> Program {
    gen_program(&cfg.with_seed(mix(cfg.seed, index as u64)))
}

/// `k` oracles cycling through constant, seeded and scripted modes.
pub fn oracle_set(seed: u64, k: usize) -> Vec<OracleMode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|i| match i % 3 {
            0 => OracleMode::Constant(rng.gen_range(-1..=3)),
            1 => OracleMode::Seeded(rng.gen()),
            _ => OracleMode::Scripted((0..SCRIPT_LEN).map(|_| rng.gen_range(SEEDED_RANGE)).collect()),
        })
        .collect()
}

/// Oracles for case `index`.
pub fn case_oracles(cfg: &GenConfig, index: usize, k: usize) -> Vec<OracleMode> {
    oracle_set(mix(cfg.seed ^ 0x6f72_6163_6c65, index as u64), k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub case: usize,
    pub program: String,
    pub oracle: String,
    pub fuel: u64,
    pub pass: String,
    pub reason: String,
    /// Shrunk program, when shrinking was attempted.
    pub minimized: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub pass: String,
    pub seed: u64,
    pub cases_run: usize,
    /// Cases the pass actually changed.
    pub cases_transformed: usize,
    pub cases_failed: usize,
    pub failures: Vec<Failure>,
}

impl DiffReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzOptions {
    pub oracles_per_case: usize,
    /// Fuels tried per case, smallest first.
    pub fuel_ladder: Vec<u64>,
    /// Only the first this many failures (by case index) are shrunk.
    pub shrink_limit: usize,
    pub shrink_budget: usize,
    pub max_unroll: u32,
}

impl FuzzOptions {
    /// Ladder `{fuel/10, fuel}`.
    pub fn new(oracles_per_case: usize, fuel: u64) -> FuzzOptions {
        let mut fuel_ladder = vec![fuel / 10, fuel];
        fuel_ladder.dedup();
        FuzzOptions {
            oracles_per_case,
            fuel_ladder,
            shrink_limit: 8,
            shrink_budget: 400,
            max_unroll: DEFAULT_MAX_UNROLL,
        }
    }
}

/// Whether forward preservation fails for `p` under one oracle and fuel.
fn fails(pass: &Pass, p: &Program, mode: &OracleMode, fuel: u64) -> bool {
    let q = pass.apply_program(p);
    q != *p && !check_forward_ladder(p, &q, std::slice::from_ref(mode), &[fuel]).holds
}

fn run_case(pass: &Pass, cfg: &GenConfig, index: usize, opts: &FuzzOptions) -> (bool, Option<Failure>) {
    let p = case_program(cfg, index);
    let q = pass.apply_program(&p);
    if q == p {
        // deterministic semantics: identical programs have identical behaviors
        return (false, None);
    }
    let oracles = case_oracles(cfg, index, opts.oracles_per_case);
    let v = check_forward_ladder(&p, &q, &oracles, &opts.fuel_ladder);
    let failure = (!v.holds).then(|| {
        let cx = v.counterexample.expect("failed verdicts carry a counterexample");
        Failure {
            case: index,
            program: p.to_string(),
            oracle: cx.oracle,
            fuel: cx.fuel,
            pass: pass.name.clone(),
            reason: v.reason,
            minimized: None,
        }
    });
    (true, failure)
}

/// Generates `n_cases` programs, applies `pass` and checks forward
/// preservation. Deterministic in `cfg` whatever the thread count.
pub fn fuzz_pass(pass: &Pass, cfg: &GenConfig, n_cases: usize, oracles_per_case: usize, fuel: u64) -> DiffReport {
    fuzz_pass_with(pass, cfg, n_cases, &FuzzOptions::new(oracles_per_case, fuel))
}

pub fn fuzz_pass_with(pass: &Pass, cfg: &GenConfig, n_cases: usize, opts: &FuzzOptions) -> DiffReport {
    let results: Vec<(bool, Option<Failure>)> = (0..n_cases)
        .into_par_iter()
        .map(|i| run_case(pass, cfg, i, opts))
        .collect();
    let cases_transformed = results.iter().filter(|r| r.0).count();
    let mut failures: Vec<Failure> = results.into_iter().filter_map(|r| r.1).collect();
    failures
        .par_iter_mut()
        .take(opts.shrink_limit)
        .for_each(|f| f.minimized = Some(minimize(pass, f, opts.shrink_budget)));
    DiffReport {
        pass: pass.name.clone(),
        seed: cfg.seed,
        cases_run: n_cases,
        cases_transformed,
        cases_failed: failures.len(),
        failures,
    }
}

fn minimize(pass: &Pass, f: &Failure, budget: usize) -> String {
    let p = parse_program(&f.program).expect("generated programs reparse");
    let mode = OracleMode::parse_spec(&f.oracle).expect("recorded oracle specs parse");
    shrink_with_budget(&p, |q| fails(pass, q, &mode, f.fuel), budget).to_string()
}

/// Re-runs a recorded failure; a faithful record yields a failing verdict.
pub fn replay(f: &Failure, max_unroll: u32) -> Result<Verdict, String> {
    let pass = Pass::by_name(&f.pass, max_unroll).ok_or_else(|| format!("unknown pass `{}`", f.pass))?;
    let p = parse_program(&f.program).map_err(|e| e.to_string())?;
    let mode = OracleMode::parse_spec(&f.oracle).map_err(|e| e.to_string())?;
    let q = pass.apply_program(&p);
    Ok(check_forward_ladder(&p, &q, &[mode], &[f.fuel]))
}

/// Whether `p` has a site any of the three passes rewrites.
pub fn has_transformable_site(p: &Program) -> bool {
    !find_unroll_candidates(&p.body, DEFAULT_MAX_UNROLL).is_empty()
        || Pass::unswitch().apply_program(p) != *p
        || Pass::silentloop().apply_program(p) != *p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_never_fails() {
        let r = fuzz_pass(&Pass::identity(), &GenConfig::default(), 50, 3, 1000);
        assert_eq!(r.cases_failed, 0);
        assert_eq!(r.cases_transformed, 0);
    }

    #[test]
    fn oracle_sets_cover_each_mode() {
        let os = oracle_set(1, 3);
        assert!(matches!(os[0], OracleMode::Constant(_)));
        assert!(matches!(os[1], OracleMode::Seeded(_)));
        assert!(matches!(&os[2], OracleMode::Scripted(v) if v.len() == SCRIPT_LEN));
        assert_eq!(oracle_set(1, 3), os);
    }

    #[test]
    fn transformable_fraction() {
        let cfg = GenConfig::default();
        let hits = (0..1000).filter(|&i| has_transformable_site(&case_program(&cfg, i))).count();
        assert!(hits >= 200, "{hits} of 1000");
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = GenConfig::default().with_seed(9);
        let pass = crate::transform::unswitch_without_indep();
        let a = fuzz_pass(&pass, &cfg, 60, 2, 2000);
        let b = fuzz_pass(&pass, &cfg, 60, 2, 2000);
        assert_eq!(a, b);
        assert_eq!(a.cases_failed, a.failures.len());
    }

    #[test]
    fn mutant_failures_shrink_and_replay() {
        let cfg = GenConfig::default().with_seed(3);
        let pass = crate::transform::silentloop_ignoring_events();
        let r = fuzz_pass(&pass, &cfg, 200, 3, 2000);
        assert!(r.cases_failed > 0);
        let f = &r.failures[0];
        assert!(!replay(f, DEFAULT_MAX_UNROLL).unwrap().holds);
        let min = f.minimized.as_ref().unwrap();
        assert!(min.len() <= f.program.len());
        let shrunk = Failure {
            program: min.clone(),
            ..f.clone()
        };
        assert!(!replay(&shrunk, DEFAULT_MAX_UNROLL).unwrap().holds);
    }
}
