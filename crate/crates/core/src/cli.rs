//! Command-line front end.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage error, 3 harness
//! error (unreadable input, parse error, oracle exhausted).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::analyze;
use crate::behavior::{check_agreement, check_backward, check_equiv, check_forward, classify_with};
use crate::bigstep::{behavior_big, exec_program, Outcome};
use crate::difftest::{fuzz_pass_with, oracle_set, FuzzOptions, GenConfig};
use crate::oracle::{OracleError, OracleMode, Trace};
use crate::smallstep;
use crate::syntax::{parse_program, Program};
use crate::transform::{find_unroll_candidates, run_pipeline, Pass, DEFAULT_MAX_UNROLL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HARNESS: i32 = 3;

pub const DEFAULT_FUEL: u64 = 10_000;
pub const FUEL_ENV: &str = "MINICMINOR_FUEL";

#[derive(Debug, Parser)]
#[command(name = "minicminor", version, about = "Interpreters, loop passes and a differential tester for a small structured IR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Semantics {
    Small,
    Big,
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Small => "small",
            Semantics::Big => "big",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a program and print its trace and status.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "small")]
        semantics: Semantics,
        #[arg(long)]
        fuel: Option<u64>,
        /// const:N, seed:N, script:FILE or script:[..]
        #[arg(long, default_value = "const:0")]
        oracle: String,
        #[arg(long)]
        json: bool,
        /// Also run the other semantics and fail unless both agree.
        #[arg(long)]
        check_agreement: bool,
    },
    /// Apply a pass pipeline and print the resulting program.
    Transform {
        file: PathBuf,
        /// Comma-separated: unswitch, unroll, silentloop, identity.
        #[arg(long)]
        pass: String,
        #[arg(long, default_value_t = DEFAULT_MAX_UNROLL)]
        max_unroll: u32,
        /// Write every intermediate program (text and JSON) here.
        #[arg(long)]
        emit_stages: Option<PathBuf>,
    },
    /// Check preservation between a program and its transformed version.
    Diff {
        file: PathBuf,
        #[arg(long)]
        pass: String,
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long, default_value_t = 3)]
        oracles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_UNROLL)]
        max_unroll: u32,
        #[arg(long)]
        json: bool,
    },
    /// Differential-test a pass on random programs.
    Fuzz {
        #[arg(long)]
        pass: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        fuel: Option<u64>,
        #[arg(long, default_value_t = 3)]
        oracles: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_UNROLL)]
        max_unroll: u32,
    },
    /// Print per-statement register and exit facts as JSON.
    Analyze { file: PathBuf },
}

struct Failed(i32, String);

type CmdResult = Result<i32, Failed>;

fn harness(msg: impl Into<String>) -> Failed {
    Failed(EXIT_HARNESS, msg.into())
}

fn usage(msg: impl Into<String>) -> Failed {
    Failed(EXIT_USAGE, msg.into())
}

fn default_fuel() -> Result<u64, Failed> {
    match std::env::var(FUEL_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{FUEL_ENV}={v} is not a natural number"))),
        Err(_) => Ok(DEFAULT_FUEL),
    }
}

fn fuel_or_default(fuel: Option<u64>) -> Result<u64, Failed> {
    fuel.map_or_else(default_fuel, Ok)
}

fn read_program(file: &Path) -> Result<Program, Failed> {
    let text = if file.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| harness(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(file).map_err(|e| harness(format!("{}: {e}", file.display())))?
    };
    parse_program(&text).map_err(|e| harness(format!("{}: {e}", file.display())))
}

fn passes(list: &str, max_unroll: u32) -> Result<Vec<Pass>, Failed> {
    let ps = Pass::parse_list(list, max_unroll).map_err(usage)?;
    if ps.is_empty() {
        return Err(usage("--pass needs at least one pass name"));
    }
    Ok(ps)
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), Failed> {
    let s = serde_json::to_string_pretty(v).expect("values serialize");
    writeln!(out, "{s}").map_err(|e| harness(e.to_string()))
}

/// The JSON record `run --json` prints, without the agreement check.
pub fn run_report(p: &Program, semantics: Semantics, mode: &OracleMode, fuel: u64) -> Result<serde_json::Value, OracleError> {
    let mut v = match semantics {
        Semantics::Small => smallstep::run(p, &mut mode.oracle(), fuel).map_err(|e| e.error)?.to_json(),
        Semantics::Big => {
            let r = exec_program(p, &mut mode.oracle(), fuel).map_err(|e| e.error)?;
            let mut v = r.to_json();
            if let Outcome::Exit(n, _) = r.outcome {
                // an exit escaping the whole program is stuck
                v["status"] = json!("went_wrong");
                v["reason"] = json!(format!("exit {n} escapes the program"));
            } else if r.is_wrong() {
                v["status"] = json!("went_wrong");
            } else if !r.outcome.is_full() {
                v["status"] = json!("fuel_exhausted");
            }
            v
        }
    };
    v["semantics"] = json!(semantics.name());
    v["oracle"] = json!(mode.spec());
    v["fuel"] = json!(fuel);
    v["behavior"] = json!(match semantics {
        Semantics::Small => classify_with(p, mode, fuel).label(),
        Semantics::Big => behavior_big(p, &mut mode.oracle(), fuel).label(),
    });
    Ok(v)
}

/// Preservation verdicts between `p` and its image under `passes`, plus a
/// forward check per stage. The flag is whether forward and backward hold.
pub fn diff_report(p: &Program, passes: &[Pass], oracles: &[OracleMode], fuel: u64) -> (serde_json::Value, bool) {
    let run = run_pipeline(passes, p);
    let q = &run.program;
    let fw = check_forward(p, q, oracles, fuel);
    let bw = check_backward(p, q, oracles, fuel);
    let eq = check_equiv(p, q, oracles, fuel);
    let stages: Vec<serde_json::Value> = run
        .stages
        .iter()
        .map(|s| json!({"pass": s.pass, "forward": check_forward(&s.before, &s.after, oracles, fuel).to_json()}))
        .collect();
    let names: Vec<&str> = passes.iter().map(|p| p.name.as_str()).collect();
    let ok = fw.holds && bw.holds;
    let v = json!({
        "pass": names.join(","),
        "fuel": fuel,
        "oracles": oracles.iter().map(OracleMode::spec).collect::<Vec<_>>(),
        "forward": fw.to_json(),
        "backward": bw.to_json(),
        "equivalence": eq.to_json(),
        "stages": stages,
    });
    (v, ok)
}

fn cmd_run(
    out: &mut dyn Write,
    file: &Path,
    semantics: Semantics,
    fuel: u64,
    oracle: &str,
    as_json: bool,
    agreement: bool,
) -> CmdResult {
    let p = read_program(file)?;
    let mode = OracleMode::parse_spec(oracle).map_err(|e| usage(e.to_string()))?;
    let mut v = run_report(&p, semantics, &mode, fuel).map_err(|e| harness(e.to_string()))?;
    let mut code = EXIT_OK;
    if agreement {
        let a = check_agreement(&p, &mode, fuel);
        if !a.holds {
            code = EXIT_VIOLATION;
        }
        v["agreement"] = a.to_json();
    }
    if as_json {
        print_json(out, &v)?;
    } else {
        let trace: Trace = serde_json::from_value(v["trace"].clone()).expect("traces round-trip");
        let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| harness(e.to_string()));
        w(out, format!("status: {}", v["status"].as_str().unwrap_or("?")))?;
        w(out, format!("behavior: {}", v["behavior"].as_str().unwrap_or("?")))?;
        w(out, format!("trace: {trace}"))?;
        if let Some(regs) = v["final"].as_object() {
            let parts: Vec<String> = regs.iter().map(|(k, x)| format!("{k}={x}")).collect();
            w(out, format!("final: {}", parts.join(", ")))?;
        }
        if let Some(reason) = v.get("reason").and_then(|r| r.as_str()) {
            w(out, format!("reason: {reason}"))?;
        }
        if let Some(a) = v.get("agreement") {
            w(out, format!(
                "agreement: {} ({})",
                if a["holds"].as_bool() == Some(true) { "holds" } else { "FAILS" },
                a["reason"].as_str().unwrap_or("")
            ))?;
        }
    }
    Ok(code)
}

fn cmd_transform(
    out: &mut dyn Write,
    file: &Path,
    list: &str,
    max_unroll: u32,
    emit: Option<&Path>,
) -> CmdResult {
    let p = read_program(file)?;
    let run = run_pipeline(&passes(list, max_unroll)?, &p);
    if let Some(dir) = emit {
        fs::create_dir_all(dir).map_err(|e| harness(format!("{}: {e}", dir.display())))?;
        let write = |name: String, prog: &Program| -> Result<(), Failed> {
            let ast = serde_json::to_string_pretty(prog).expect("programs serialize");
            for (ext, body) in [("cmin", prog.to_string()), ("json", ast + "\n")] {
                let path = dir.join(format!("{name}.{ext}"));
                fs::write(&path, body).map_err(|e| harness(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        };
        write("00-input".into(), &p)?;
        for (i, stage) in run.stages.iter().enumerate() {
            write(format!("{:02}-{}", i + 1, stage.pass), &stage.after)?;
        }
    }
    write!(out, "{}", run.program).map_err(|e| harness(e.to_string()))?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_diff(
    out: &mut dyn Write,
    file: &Path,
    list: &str,
    fuel: u64,
    k: usize,
    seed: u64,
    max_unroll: u32,
    as_json: bool,
) -> CmdResult {
    if k == 0 {
        return Err(usage("--oracles must be at least 1"));
    }
    let p = read_program(file)?;
    let (v, ok) = diff_report(&p, &passes(list, max_unroll)?, &oracle_set(seed, k), fuel);
    let code = if ok { EXIT_OK } else { EXIT_VIOLATION };
    if as_json {
        print_json(out, &v)?;
    } else {
        for name in ["forward", "backward", "equivalence"] {
            let status = if v[name]["holds"] == true { "holds" } else { "FAILS" };
            let reason = v[name]["reason"].as_str().unwrap_or("");
            writeln!(out, "{name}: {status} ({reason})").map_err(|e| harness(e.to_string()))?;
        }
    }
    Ok(code)
}

fn cmd_fuzz(
    out: &mut dyn Write,
    name: &str,
    count: usize,
    seed: u64,
    fuel: u64,
    k: usize,
    max_unroll: u32,
) -> CmdResult {
    let pass = Pass::by_name(name, max_unroll).ok_or_else(|| usage(format!("unknown pass `{name}`")))?;
    if k == 0 {
        return Err(usage("--oracles must be at least 1"));
    }
    let opts = FuzzOptions {
        max_unroll,
        ..FuzzOptions::new(k, fuel)
    };
    let cfg = GenConfig {
        seed,
        ..GenConfig::default()
    };
    let report = fuzz_pass_with(&pass, &cfg, count, &opts);
    print_json(out, &report.to_json())?;
    Ok(if report.cases_failed == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_analyze(out: &mut dyn Write, file: &Path) -> CmdResult {
    let p = read_program(file)?;
    let candidates: Vec<serde_json::Value> = find_unroll_candidates(&p.body, DEFAULT_MAX_UNROLL)
        .iter()
        .map(|c| json!({"counter": &*c.counter, "bound": c.bound, "site": c.site}))
        .collect();
    let v = json!({
        "statements": analyze(&p.body),
        "unroll_candidates": candidates,
    });
    print_json(out, &v)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Run {
            file,
            semantics,
            fuel,
            oracle,
            json,
            check_agreement,
        } => cmd_run(out, &file, semantics, fuel_or_default(fuel)?, &oracle, json, check_agreement),
        Command::Transform {
            file,
            pass,
            max_unroll,
            emit_stages,
        } => cmd_transform(out, &file, &pass, max_unroll, emit_stages.as_deref()),
        Command::Diff {
            file,
            pass,
            fuel,
            oracles,
            seed,
            max_unroll,
            json,
        } => cmd_diff(out, &file, &pass, fuel_or_default(fuel)?, oracles, seed, max_unroll, json),
        Command::Fuzz {
            pass,
            count,
            seed,
            fuel,
            oracles,
            max_unroll,
        } => cmd_fuzz(out, &pass, count, seed, fuel_or_default(fuel)?, oracles, max_unroll),
        Command::Analyze { file } => cmd_analyze(out, &file),
    }
}

/// Runs the CLI on `args` (program name first), writing to the given streams.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Failed(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
