//! The `abslog` command line: parse, run, beh, refine, sim, erase, example.

use std::collections::VecDeque;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::abspec::erase_listing;
use crate::behavior::{
    check_refine, enumerate, run_path, with_deep_stack, BehError, ChoiceKind, EnumConfig, ObsRecord, Provider,
    RunError, Terminal, Trace,
};
use crate::examples::{self, build, check_all, io_module, sim_setup, ExampleBundle, ExampleError, SimSetup};
use crate::imp::{embed, mem_impl, parse, render, ImpError};
use crate::kernel::{close, Closed, ModStack, Step};
use crate::simulation::{sim_check, SimError};
use crate::values::AnyValue;

pub const ENUM_CONFIG_ENV: &str = "ABSLOG_ENUM_CONFIG";

pub const EXIT_OK: i32 = 0;
/// A check found a violation.
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR_TERMINAL: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Imp { path: PathBuf, source: ImpError },
    #[error(transparent)]
    Example(#[from] ExampleError),
    #[error(transparent)]
    Beh(#[from] BehError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("bad JSON value: {0}")]
    Json(String),
    #[error("output: {0}")]
    Out(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "abslog", version, about = "Bounded refinement checking for abstraction logic")]
pub struct Cli {
    /// Enumeration config (JSON); falls back to $ABSLOG_ENUM_CONFIG.
    #[arg(long, global = true)]
    pub enum_config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Parse IMP files and print them back.
    Parse {
        files: Vec<PathBuf>,
        /// Print the rendered source instead of JSON.
        #[arg(long)]
        render: bool,
    },
    /// Execute one path.
    Run(RunArgs),
    /// Enumerate the bounded behavior.
    Beh(StackArgs),
    /// Check trace inclusion.
    Refine(RefineArgs),
    /// Play the simulation game for an example.
    Sim {
        #[arg(long)]
        example: String,
        /// Also check trace inclusion on the closing run.
        #[arg(long)]
        probe: bool,
    },
    /// Show the spec-erased abstraction of an example.
    Erase {
        #[arg(long)]
        example: String,
    },
    /// Run every check of an example bundle.
    Example {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct StackArgs {
    /// IMP files; Mem and IO are added unless defined.
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub example: Option<String>,
    /// Use the example's final abstraction.
    #[arg(long)]
    pub abs: bool,
    #[arg(long)]
    pub main: Option<String>,
    /// Argument as JSON (defaults to the empty argument list).
    #[arg(long)]
    pub arg: Option<String>,
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub stack: StackArgs,
    /// Choice script: a JSON array of candidate indices.
    #[arg(long, conflicts_with_all = ["seed", "prompt"])]
    pub script: Option<PathBuf>,
    /// Pick choices at random.
    #[arg(long, conflicts_with = "prompt")]
    pub seed: Option<u64>,
    /// Ask for each choice on stdin.
    #[arg(long)]
    pub prompt: bool,
    /// Answers for observable events that have responders, in order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub io: Option<Vec<i64>>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct RefineArgs {
    #[arg(long)]
    pub example: Option<String>,
    /// Run only this check of the example.
    #[arg(long)]
    pub check: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub imp: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub abs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub ctx: Vec<PathBuf>,
    #[arg(long)]
    pub main: Option<String>,
    #[arg(long)]
    pub arg: Option<String>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub abs_budget: Option<usize>,
}

/// Runs the CLI on `args` (including the program name).
pub fn main_with(args: Vec<String>, out: &mut dyn Write, input: &mut dyn BufRead) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli, out, input) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, input: &mut dyn BufRead) -> Result<i32, CliError> {
    let extra = enum_overlay(cli.enum_config.as_deref())?;
    match &cli.cmd {
        Cmd::Parse { files, render: r } => cmd_parse(files, *r, cli.out.as_deref(), out),
        Cmd::Run(a) => cmd_run(a, &extra, out, input),
        Cmd::Beh(a) => cmd_beh(a, &extra, cli.out.as_deref(), out),
        Cmd::Refine(a) => cmd_refine(a, &extra, cli.out.as_deref(), out),
        Cmd::Sim { example, probe } => cmd_sim(example, *probe, &extra, cli.out.as_deref(), out),
        Cmd::Erase { example } => cmd_erase(example, out),
        Cmd::Example { name, list } => cmd_example(name.as_deref(), *list, &extra, cli.out.as_deref(), out),
    }
}

fn enum_overlay(flag: Option<&Path>) -> Result<EnumConfig, CliError> {
    let path = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(ENUM_CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => Ok(EnumConfig::load(&p)?),
        None => Ok(EnumConfig::default()),
    }
}

fn emit(j: &Json, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(j).map_err(|e| CliError::Json(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => Ok(writeln!(out, "{text}")?),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_arg(a: Option<&str>) -> Result<AnyValue, CliError> {
    match a {
        None => Ok(AnyValue::List(vec![])),
        Some(s) => {
            let j: Json = serde_json::from_str(s).map_err(|e| CliError::Json(e.to_string()))?;
            value_of_json(&j)
        }
    }
}

/// Plain JSON integers and arrays, or the tagged value encoding.
fn value_of_json(j: &Json) -> Result<AnyValue, CliError> {
    match j {
        Json::Number(n) => n.as_i64().map(AnyValue::Int).ok_or_else(|| CliError::Json(j.to_string())),
        Json::Bool(b) => Ok(AnyValue::Bool(*b)),
        Json::Array(xs) => Ok(AnyValue::List(xs.iter().map(value_of_json).collect::<Result<_, _>>()?)),
        _ => AnyValue::from_json(j).map_err(|e| CliError::Json(e.to_string())),
    }
}

fn load_modules(files: &[PathBuf]) -> Result<Vec<crate::kernel::ModuleSem>, CliError> {
    files
        .iter()
        .map(|p| {
            let src = read(p)?;
            let m = parse(&src).map_err(|source| CliError::Imp { path: p.clone(), source })?;
            Ok(embed(&m))
        })
        .collect()
}

/// The files plus `Mem` and `IO` where the files do not define them.
fn file_stack(files: &[PathBuf]) -> Result<ModStack, CliError> {
    let mut mods = load_modules(files)?;
    for extra in [mem_impl(), io_module(None)] {
        if !mods.iter().any(|m| m.name == extra.name) {
            mods.push(extra);
        }
    }
    Ok(ModStack::of(mods))
}

struct Target {
    stack: ModStack,
    main: String,
    arg: AnyValue,
    budget: usize,
    cfg: EnumConfig,
}

fn target(a: &StackArgs, extra: &EnumConfig, default_budget: usize) -> Result<Target, CliError> {
    if let Some(name) = &a.example {
        let b = build(name)?;
        let stack = if a.abs { b.abs_stack.clone() } else { b.impl_stack.clone() };
        let arg = match &a.arg {
            Some(s) => parse_arg(Some(s))?,
            None => b.args.first().cloned().unwrap_or(AnyValue::List(vec![])),
        };
        return Ok(Target {
            stack,
            main: a.main.clone().unwrap_or(b.main.clone()),
            arg,
            budget: a.budget.unwrap_or(b.budget),
            cfg: b.enum_cfg.clone().overlay(extra),
        });
    }
    if a.files.is_empty() {
        return Err(CliError::Usage("give IMP files or --example".into()));
    }
    let main = a.main.clone().ok_or_else(|| CliError::Usage("--main is required with files".into()))?;
    Ok(Target {
        stack: file_stack(&a.files)?,
        main,
        arg: parse_arg(a.arg.as_deref())?,
        budget: a.budget.unwrap_or(default_budget),
        cfg: examples::mem_enum_cfg().overlay(extra),
    })
}

fn cmd_parse(files: &[PathBuf], r: bool, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut mods = vec![];
    for p in files {
        let m = parse(&read(p)?).map_err(|source| CliError::Imp { path: p.clone(), source })?;
        if r {
            write!(out, "{}", render(&m))?;
        }
        mods.push(json!({
            "file": p.display().to_string(),
            "module": m.name,
            "globals": m.globals.iter().map(|(g, v)| json!([g, v])).collect::<Vec<_>>(),
            "functions": m.funs.iter().map(|f| json!({"name": f.name, "params": f.params})).collect::<Vec<_>>(),
        }));
    }
    if !r {
        emit(&json!({ "modules": mods }), path, out)?;
    }
    Ok(EXIT_OK)
}

pub fn exit_code(t: &Terminal) -> i32 {
    match t {
        Terminal::Term(_) | Terminal::Diverge => EXIT_OK,
        Terminal::Error | Terminal::Undef => EXIT_ERROR_TERMINAL,
        Terminal::Partial => EXIT_PARTIAL,
    }
}

/// Answers for observable events with configured responders, in order.
#[derive(Clone)]
struct IoScript {
    answers: Option<VecDeque<i64>>,
}

impl IoScript {
    fn respond(&mut self, f: &str, cfg: &EnumConfig) -> Result<AnyValue, RunError> {
        let scripted = cfg.responders.contains_key(f);
        match (&mut self.answers, scripted) {
            (Some(q), true) => q.pop_front().map(AnyValue::Int).ok_or(RunError::ScriptExhausted),
            _ => Ok(cfg.responses(f).first().cloned().unwrap_or(AnyValue::Int(0))),
        }
    }
}

struct SeedProvider {
    rng: ChaCha8Rng,
    io: IoScript,
    cfg: EnumConfig,
}

impl Provider for SeedProvider {
    fn pick(&mut self, _: ChoiceKind, c: &[AnyValue]) -> Result<AnyValue, RunError> {
        Ok(c[self.rng.gen_range(0..c.len())].clone())
    }

    fn respond(&mut self, f: &str, _: &AnyValue, _: &[AnyValue]) -> Result<AnyValue, RunError> {
        self.io.respond(f, &self.cfg)
    }
}

struct ScriptProvider {
    picks: VecDeque<usize>,
    io: IoScript,
    cfg: EnumConfig,
}

impl Provider for ScriptProvider {
    fn pick(&mut self, _: ChoiceKind, c: &[AnyValue]) -> Result<AnyValue, RunError> {
        let i = self.picks.pop_front().ok_or(RunError::ScriptExhausted)?;
        c.get(i).cloned().ok_or_else(|| RunError::BadAnswer(format!("index {i} of {} candidates", c.len())))
    }

    fn respond(&mut self, f: &str, _: &AnyValue, _: &[AnyValue]) -> Result<AnyValue, RunError> {
        self.io.respond(f, &self.cfg)
    }
}

struct PromptProvider<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    io: IoScript,
    cfg: EnumConfig,
}

impl PromptProvider<'_> {
    fn ask(&mut self, prompt: &str) -> Result<String, RunError> {
        write!(self.out, "{prompt}")?;
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(RunError::ScriptExhausted);
        }
        Ok(line.trim().to_string())
    }
}

impl Provider for PromptProvider<'_> {
    fn pick(&mut self, kind: ChoiceKind, c: &[AnyValue]) -> Result<AnyValue, RunError> {
        let menu: Vec<String> = c.iter().enumerate().map(|(i, v)| format!("[{i}] {v}")).collect();
        let word = if kind == ChoiceKind::Choose { "choose" } else { "take" };
        let ans = self.ask(&format!("{word} {}: ", menu.join(" ")))?;
        let i: usize = ans.parse().map_err(|_| RunError::BadAnswer(ans.clone()))?;
        c.get(i).cloned().ok_or(RunError::BadAnswer(ans))
    }

    fn respond(&mut self, f: &str, args: &AnyValue, _: &[AnyValue]) -> Result<AnyValue, RunError> {
        if !self.cfg.responders.contains_key(f) || self.io.answers.is_some() {
            return self.io.respond(f, &self.cfg);
        }
        let ans = self.ask(&format!("{f}{args}? "))?;
        match ans.as_str() {
            "true" => Ok(AnyValue::Bool(true)),
            "false" => Ok(AnyValue::Bool(false)),
            s => s.parse::<i64>().map(AnyValue::Int).map_err(|_| RunError::BadAnswer(ans.clone())),
        }
    }
}

enum Found {
    Trace(Trace),
    NoBehavior,
}

/// Depth-first search for the first path that does not end in NB.
fn first_path(c: Closed, fuel: usize, cfg: &EnumConfig, io: IoScript, events: Vec<ObsRecord>) -> Result<Found, RunError> {
    let (mut c, mut fuel, mut io, mut events) = (c, fuel, io, events);
    loop {
        match c.step() {
            Step::Done(v) => return Ok(Found::Trace(Trace::new(events, Terminal::Term(v)))),
            Step::Fault(_) => return Ok(Found::Trace(Trace::new(events, Terminal::Error))),
            Step::Silent(n) => {
                if fuel == 0 {
                    return Ok(Found::Trace(Trace::new(events, Terminal::Partial)));
                }
                fuel -= 1;
                c = n;
            }
            Step::Choose(d, k) => {
                for v in cfg.resolve(&d)? {
                    if let Found::Trace(t) = first_path(k.resume(v), fuel, cfg, io.clone(), events.clone())? {
                        return Ok(Found::Trace(t));
                    }
                }
                return Ok(Found::NoBehavior);
            }
            Step::Take(d, k) => match cfg.resolve(&d)?.into_iter().next() {
                None => return Ok(Found::Trace(Trace::new(events, Terminal::Undef))),
                Some(v) => c = k.resume(v),
            },
            Step::Obs(f, a, k) => {
                let r = io.respond(&f, cfg)?;
                events.push(ObsRecord::new(f, a, r.clone()));
                c = k.resume(r);
            }
        }
    }
}

fn cmd_run(a: &RunArgs, extra: &EnumConfig, out: &mut dyn Write, input: &mut dyn BufRead) -> Result<i32, CliError> {
    let t = target(&a.stack, extra, 10_000)?;
    let c = close(&t.stack, &t.main, t.arg.clone());
    let io = IoScript { answers: a.io.as_ref().map(|v| v.iter().copied().collect()) };
    let result = if let Some(path) = &a.script {
        let picks: Vec<usize> = serde_json::from_str(&read(path)?).map_err(|e| CliError::Json(e.to_string()))?;
        let mut p = ScriptProvider { picks: picks.into(), io, cfg: t.cfg.clone() };
        run_path(&c, t.budget, &t.cfg, &mut p, &mut |_| {})
    } else if let Some(seed) = a.seed {
        let mut p = SeedProvider { rng: ChaCha8Rng::seed_from_u64(seed), io, cfg: t.cfg.clone() };
        run_path(&c, t.budget, &t.cfg, &mut p, &mut |_| {})
    } else if a.prompt {
        let mut p = PromptProvider { input, out: &mut *out, io, cfg: t.cfg.clone() };
        run_path(&c, t.budget, &t.cfg, &mut p, &mut |_| {})
    } else {
        with_deep_stack(|| first_path(c, t.budget, &t.cfg, io, vec![])).map(|f| match f {
            Found::Trace(tr) => tr,
            Found::NoBehavior => Trace::new(vec![], Terminal::Partial),
        })
    };
    let trace = match result {
        Ok(tr) => tr,
        Err(RunError::ScriptExhausted) => {
            writeln!(out, "script exhausted")?;
            return Ok(EXIT_PARTIAL);
        }
        Err(e) => return Err(e.into()),
    };
    if a.json {
        writeln!(out, "{}", trace.to_json())?;
    } else {
        for e in &trace.events {
            writeln!(out, "{e}")?;
        }
        let term = match &trace.terminal {
            Terminal::Term(v) => format!("term {v}"),
            Terminal::Error => "error".into(),
            Terminal::Undef => "undefined behavior".into(),
            Terminal::Partial => "partial".into(),
            Terminal::Diverge => "diverge".into(),
        };
        writeln!(out, "{term}")?;
    }
    Ok(exit_code(&trace.terminal))
}

fn cmd_beh(a: &StackArgs, extra: &EnumConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = target(a, extra, 200)?;
    let c = close(&t.stack, &t.main, t.arg.clone());
    let b = with_deep_stack(|| enumerate(&c, t.budget, &t.cfg))?;
    emit(&json!({ "main": t.main, "arg": t.arg.to_json(), "budget": t.budget, "behavior": b.to_json() }), path, out)?;
    Ok(EXIT_OK)
}

fn with_budgets(mut b: ExampleBundle, budget: Option<usize>, abs_budget: Option<usize>) -> ExampleBundle {
    for c in &mut b.checks {
        if let Some(n) = budget {
            c.budget = n;
            c.abs_budget = abs_budget.unwrap_or(c.abs_budget.max(n));
        } else if let Some(m) = abs_budget {
            c.abs_budget = m;
        }
    }
    b
}

fn cmd_refine(a: &RefineArgs, extra: &EnumConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(name) = &a.example {
        let mut b = with_budgets(build(name)?, a.budget, a.abs_budget);
        b.enum_cfg = b.enum_cfg.overlay(extra);
        if let Some(cn) = &a.check {
            b.checks.retain(|c| &c.name == cn);
            if b.checks.is_empty() {
                return Err(CliError::Usage(format!("example {name} has no check {cn}")));
            }
        }
        b.sims.clear();
        let r = check_all(&b)?;
        emit(&r.to_json(), path, out)?;
        return Ok(if r.holds() { EXIT_OK } else { EXIT_VIOLATION });
    }
    if a.imp.is_empty() || a.abs.is_empty() {
        return Err(CliError::Usage("give --example, or --imp and --abs files".into()));
    }
    let main = a.main.clone().ok_or_else(|| CliError::Usage("--main is required with files".into()))?;
    let imp = ModStack::of(load_modules(&a.imp)?);
    let abs = ModStack::of(load_modules(&a.abs)?);
    let ctx = file_stack(&a.ctx)?;
    let budget = a.budget.unwrap_or(200);
    let abs_budget = a.abs_budget.unwrap_or(2 * budget);
    let cfg = examples::mem_enum_cfg().overlay(extra);
    let arg = parse_arg(a.arg.as_deref())?;
    let r = with_deep_stack(|| check_refine(&imp, &abs, &ctx, &main, &[arg], budget, abs_budget, &cfg))?;
    emit(&r.to_json(), path, out)?;
    Ok(if r.holds() { EXIT_OK } else { EXIT_VIOLATION })
}

fn setups_for(name: &str) -> Result<Vec<SimSetup>, CliError> {
    match sim_setup(name) {
        Ok(s) => Ok(vec![s]),
        Err(ExampleError::Unknown(_)) => Ok(build(name)?.sims),
        Err(e) => Err(e.into()),
    }
}

fn cmd_sim(name: &str, probe: bool, extra: &EnumConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let setups = setups_for(name)?;
    if setups.is_empty() {
        return Err(CliError::Usage(format!("example {name} ships no simulation")));
    }
    let mut all_hold = true;
    let mut items = vec![];
    let mut goals = 0;
    for mut s in setups {
        s.cfg.enum_cfg = s.cfg.enum_cfg.clone().overlay(extra);
        let j = if probe {
            let r = s.run()?;
            all_hold &= r.sim_verdict() == crate::simulation::SimVerdict::Holds;
            goals += r.sim.iter().map(|x| x.goals).sum::<usize>();
            r.to_json()
        } else {
            let reports = s
                .imp
                .funs
                .keys()
                .map(|f| sim_check(&s.cfg, &s.imp, &s.abs, f, &s.argpairs))
                .collect::<Result<Vec<_>, _>>()?;
            all_hold &= reports.iter().all(|r| r.verdict() == crate::simulation::SimVerdict::Holds);
            goals += reports.iter().map(|r| r.goals).sum::<usize>();
            json!(reports.iter().map(|r| r.to_json()).collect::<Vec<_>>())
        };
        items.push(json!({ "name": s.name, "result": j }));
    }
    emit(&json!({ "sims": items, "goals": goals, "verdict": if all_hold { "holds" } else { "fails" } }), path, out)?;
    Ok(if all_hold { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_erase(name: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let b = build(name)?;
    let fr: Vec<&str> = b.friends.iter().map(String::as_str).collect();
    for p in &b.preabs {
        write!(out, "{}", erase_listing(&fr, p))?;
    }
    Ok(EXIT_OK)
}

fn cmd_example(
    name: Option<&str>,
    list: bool,
    extra: &EnumConfig,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    if list || name.is_none() {
        for n in examples::NAMES {
            let b = build(n)?;
            writeln!(out, "{n:8} {}", b.summary)?;
        }
        return Ok(EXIT_OK);
    }
    let mut b = build(name.unwrap_or_default())?;
    b.enum_cfg = b.enum_cfg.overlay(extra);
    let r = check_all(&b)?;
    emit(&r.to_json(), path, out)?;
    Ok(if r.holds() { EXIT_OK } else { EXIT_VIOLATION })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let mut out = vec![];
        let mut input: &[u8] = b"";
        let code = main_with(args.iter().map(|s| s.to_string()).collect(), &mut out, &mut input);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn hoare_run_prints_both() {
        let (code, out) = run(&["abslog", "run", "--example", "hoare"]);
        assert_eq!(code, 0, "{out}");
        let l441 = out.find("441").unwrap();
        assert!(out[l441..].contains("42"));
    }

    #[test]
    fn cannon_twice_is_an_error_exit() {
        let (code, _) = run(&["abslog", "run", "--example", "cannon2"]);
        assert_eq!(code, EXIT_ERROR_TERMINAL);
    }

    #[test]
    fn exhausted_io_script_is_partial() {
        let (code, out) = run(&["abslog", "run", "--example", "echo", "--io", "1"]);
        assert_eq!(code, EXIT_PARTIAL, "{out}");
    }

    #[test]
    fn bad_flag_is_usage() {
        assert_eq!(run(&["abslog", "beh", "--nope"]).0, EXIT_USAGE);
    }
}
