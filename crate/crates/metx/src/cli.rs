//! The `metx` command line: check, run, translate, trace and diff single
//! programs, or replay a whole corpus manifest.
//!
//! Exit codes: 0 success, 1 type error, 2 parse or usage error,
//! 3 stuck or out of fuel, 4 differential mismatch.

use crate::effect::{Row, Theory};
use crate::feps::{self, FOutcome};
use crate::harness::preserve::{self, Translated};
use crate::harness::{
    check_type_preservation, load_corpus, lockstep_simulate, Calculus, CorpusProgram, Expected, Source, DEFAULT_WINDOW,
};
use crate::met::{self, eval::Outcome, Context, Decl, Entry, RuntimeLabels};
use crate::syntax::{ParseError, Parser as RowParser};
use crate::systemc::{self, CLabels, COutcome, CProgram, CTerm};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_STUCK: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "metx", version, about = "Modal effect types: check, run and cross-validate programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Effect theory for `.mex` files: sets, simple or scoped.
    #[arg(long, global = true)]
    pub theory: Option<String>,
    /// Ambient effects (`.mex`) or checked row (`.fe`), overriding the pragma.
    #[arg(long, global = true)]
    pub effects: Option<String>,
    /// Maximum number of reduction steps.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub fuel: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    /// A complete `.mex` program; only meaningful for `translate`.
    Mex,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Typecheck a program and print its judgement.
    Check { file: PathBuf },
    /// Typecheck and evaluate a closed program.
    Run { file: PathBuf },
    /// Print the core translation of a program.
    Translate { file: PathBuf },
    /// Print every state of a run.
    Trace { file: PathBuf },
    /// Simulate a source run against its translation step by step.
    Diff {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Check, run and cross-validate every program of a manifest.
    Corpus {
        #[arg(default_value = "examples/corpus.manifest")]
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
}

/// Parse `args` (including the program name) and execute.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            code
        }
    }
}

/// Run a command, capturing stdout and stderr, for tests and examples.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(args, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

/// A failure that ends a command with an exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    /// Error kind, such as `LockedVar` or `ParseError`.
    pub kind: String,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: impl Into<String>, message: impl Into<String>) -> Failure {
        Failure { code, kind: kind.into(), message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure::new(EXIT_PARSE, "UsageError", message)
    }

    fn render(&self) -> String {
        format!("error[{}]: {}", self.kind, self.message)
    }
}

fn parse_failure(path: &Path, e: ParseError) -> Failure {
    Failure::new(EXIT_PARSE, "ParseError", format!("{}:{e}", path.display()))
}

/// Overrides from the command line applied to every loaded program.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub theory: Option<Theory>,
    pub effects: Option<Row>,
}

impl Overrides {
    fn from_cli(cli: &Cli) -> Result<Overrides, Failure> {
        let theory = match &cli.theory {
            None => None,
            Some(n) => Some(
                Theory::from_name(n)
                    .ok_or_else(|| Failure::usage(format!("unknown theory `{n}`; expected sets, simple or scoped")))?,
            ),
        };
        let effects = match &cli.effects {
            None => None,
            Some(r) => Some(RowParser::pragma_row(r).map_err(|e| Failure::usage(format!("--effects: {e}")))?),
        };
        Ok(Overrides { theory, effects })
    }

    /// Apply the overrides. The row-based calculus is fixed to scoped
    /// rows and the capability calculus to sets.
    pub fn apply(&self, src: &mut Source) -> Result<(), Failure> {
        match src {
            Source::Met(p) => {
                if let Some(t) = self.theory {
                    p.theory = t;
                }
                if let Some(e) = &self.effects {
                    p.ambient = e.clone();
                }
            }
            Source::Feps(p) => {
                if self.theory.is_some_and(|t| t != Theory::ScopedRows) {
                    return Err(Failure::usage("`.fe` programs are always checked with scoped rows"));
                }
                if let Some(e) = &self.effects {
                    p.effects = e.clone();
                }
            }
            Source::SystemC(_) => {
                if self.theory.is_some_and(|t| t != Theory::Sets) {
                    return Err(Failure::usage("`.sc` programs are always checked with sets"));
                }
                if self.effects.is_some() {
                    return Err(Failure::usage("`.sc` programs infer their capability set; --effects does not apply"));
                }
            }
        }
        Ok(())
    }
}

/// Read and parse a program, picking the calculus from the extension.
pub fn load(path: &Path, ov: &Overrides) -> Result<Source, Failure> {
    let calculus = Calculus::from_path(path)
        .ok_or_else(|| Failure::usage(format!("{}: unknown extension; expected .mex, .fe or .sc", path.display())))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, "IoError", format!("{}: {e}", path.display())))?;
    let mut src = Source::parse(calculus, &text).map_err(|e| parse_failure(path, e))?;
    ov.apply(&mut src)?;
    Ok(src)
}

/// Typecheck a program and render its judgement: `A @ E` for the core
/// and row-based calculi, `T | C` for the capability calculus.
pub fn judgement(src: &Source) -> Result<String, Failure> {
    let type_err = |kind: &str, msg: String| Failure::new(EXIT_TYPE, kind, msg);
    match src {
        Source::Met(p) => {
            let (ctx, ambient) = p.context();
            met::typecheck(p.theory, &p.sigs, &RuntimeLabels::default(), &ctx, &p.term, &ambient)
                .map(|ty| format!("{} @ {}", met::print::ty(&ty), met::print::ambient(&ambient)))
                .map_err(|e| type_err(e.kind_name(), e.to_string()))
        }
        Source::Feps(p) => feps::check_program(p, &p.effects)
            .map(|t| format!("{} @ {}", t.source_type(), met::print::ambient(&p.effects)))
            .map_err(|e| type_err(e.kind_name(), e.to_string())),
        Source::SystemC(p) => systemc::check_program(p, &CLabels::default())
            .map(|t| t.judgement())
            .map_err(|e| type_err(e.kind_name(), e.to_string())),
    }
}

/// How evaluating a program ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Value(String),
    Suspended {
        label: String,
        payload: String,
    },
    Stuck(String),
    OutOfFuel,
    /// Open programs and blocks have nothing to run.
    NotRunnable(String),
}

/// The states of a run, rendered, with how it ended.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub states: Vec<String>,
    pub outcome: RunOutcome,
    /// Runtime labels allocated by the end of the run.
    pub labels: Vec<String>,
}

impl RunReport {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// The manifest outcome this run corresponds to.
    pub fn expected(&self) -> Option<Expected> {
        match &self.outcome {
            RunOutcome::Value(v) => Some(Expected::Value(v.clone())),
            RunOutcome::Suspended { label, .. } => Some(Expected::Suspended(label.clone())),
            RunOutcome::NotRunnable(_) => Some(Expected::NotRun),
            RunOutcome::Stuck(_) | RunOutcome::OutOfFuel => None,
        }
    }
}

fn not_runnable(why: &str) -> RunReport {
    RunReport { states: Vec::new(), outcome: RunOutcome::NotRunnable(why.into()), labels: Vec::new() }
}

/// Typecheck, then evaluate a closed program in its own calculus.
pub fn evaluate(src: &Source, fuel: usize) -> Result<RunReport, Failure> {
    judgement(src)?;
    Ok(match src {
        Source::Met(p) if !p.decls.is_empty() => not_runnable("open program"),
        Source::Feps(p) if !p.decls.is_empty() => not_runnable("open program"),
        Source::SystemC(p) if !p.decls.is_empty() => not_runnable("open program"),
        Source::SystemC(CProgram { term: CTerm::Block(_), .. }) => not_runnable("a block, not a computation"),
        Source::Met(p) => {
            let tr = met::run(&p.term, &RuntimeLabels::default(), &p.sigs, fuel);
            let labels = tr.states.last().map(|(_, om)| om.names()).unwrap_or_default();
            let states = tr.states.iter().map(|(t, _)| met::print::term(t)).collect();
            let outcome = match tr.outcome {
                Outcome::Finished(v) => RunOutcome::Value(met::print::term(&v)),
                Outcome::Suspended { label, payload, .. } => {
                    RunOutcome::Suspended { label, payload: met::print::term(&payload) }
                }
                Outcome::Stuck(why) => RunOutcome::Stuck(why),
                Outcome::FuelExhausted => RunOutcome::OutOfFuel,
            };
            RunReport { states, outcome, labels }
        }
        Source::Feps(p) => {
            let (states, out) = feps::f_run(&p.term, &p.sigs, fuel);
            let outcome = match out {
                FOutcome::Finished(v) => RunOutcome::Value(feps::print::value(&v)),
                FOutcome::Suspended { label, payload } => {
                    RunOutcome::Suspended { label, payload: feps::print::value(&payload) }
                }
                FOutcome::Stuck(why) => RunOutcome::Stuck(why),
                FOutcome::FuelExhausted => RunOutcome::OutOfFuel,
            };
            RunReport { states: states.iter().map(feps::print::comp).collect(), outcome, labels: Vec::new() }
        }
        Source::SystemC(p) => {
            // Elaboration fills in the capability annotations evaluation reads.
            let typed = systemc::check_program(p, &CLabels::default())
                .map_err(|e| Failure::new(EXIT_TYPE, e.kind_name(), e.to_string()))?;
            let CTerm::Comp(m) = typed.elab else { return Ok(not_runnable("a block, not a computation")) };
            let (states, out) = systemc::c_run(&m, &CLabels::default(), fuel);
            let labels =
                states.last().map(|(_, om)| om.entries.iter().map(|(n, _)| n.clone()).collect()).unwrap_or_default();
            let outcome = match out {
                COutcome::Finished(v) => RunOutcome::Value(systemc::print::value(&v)),
                COutcome::Suspended { label, payload } => {
                    RunOutcome::Suspended { label, payload: systemc::print::value(&payload) }
                }
                COutcome::Stuck(why) => RunOutcome::Stuck(why),
                COutcome::FuelExhausted => RunOutcome::OutOfFuel,
            };
            RunReport { states: states.iter().map(|(m, _)| systemc::print::comp(m)).collect(), outcome, labels }
        }
    })
}

/// Check and translate a program into the core calculus.
pub fn translate(src: &Source) -> Result<Translated, Failure> {
    judgement(src)?;
    preserve::translate(src).map_err(|e| Failure::new(EXIT_TYPE, "TypeError", e))
}

/// A translated judgement as a complete `.mex` program that checks at
/// the translated type.
pub fn render_mex(t: &Translated) -> Result<String, Failure> {
    let mut s = format!("#theory {}\n", t.theory.name());
    if !t.ambient.is_empty() {
        s.push_str(&format!("#ambient {}\n", met::print::row(&t.ambient)));
    }
    for (l, sig) in &t.sigs {
        s.push_str(&format!("effect {l} : {} =>> {}\n", met::print::ty(&sig.arg), met::print::ty(&sig.res)));
    }
    for d in context_decls(&t.ctx, &t.ambient)? {
        s.push_str(&render_decl(&d));
        s.push('\n');
    }
    s.push_str(&met::print::term(&t.term));
    s.push('\n');
    Ok(s)
}

/// Header declarations rebuilding a translated context. Every entry
/// must be indexed by the ambient context, as the translations produce.
fn context_decls(ctx: &Context, ambient: &Row) -> Result<Vec<Decl>, Failure> {
    let unsupported = |what: &str| Failure::new(EXIT_TYPE, "Unsupported", format!("cannot render {what} as a header"));
    ctx.entries()
        .iter()
        .map(|e| match e {
            Entry::Var { name, modality, index, ty } if index == ambient => {
                Ok(Decl::Var { name: name.clone(), modality: modality.clone(), ty: ty.clone() })
            }
            Entry::TyVar { name, kind } => Ok(Decl::TyVar(name.clone(), *kind)),
            Entry::Var { .. } => Err(unsupported("a variable indexed by another context")),
            Entry::Lock { .. } => Err(unsupported("a lock")),
            Entry::Label { .. } => Err(unsupported("a local label")),
        })
        .collect()
}

fn render_decl(d: &Decl) -> String {
    match d {
        Decl::Var { name, modality, ty } if *modality == met::Modality::identity() => {
            format!("var {name} : {}", met::print::ty(ty))
        }
        Decl::Var { name, modality, ty } => {
            format!("var<{}> {name} : {}", met::print::modality(modality), met::print::ty(ty))
        }
        Decl::Lock(m) => format!("lock <{}>", met::print::modality(m)),
        Decl::TyVar(a, k) if *k == met::print::default_kind(a) => format!("tyvar {a}"),
        Decl::TyVar(a, k) => format!("tyvar {a} :: {}", k.name()),
    }
}

/// Execute a parsed command line, writing to `out` and `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = Overrides::from_cli(cli).and_then(|ov| match &cli.command {
        Command::Check { file } => cmd_check(cli, &ov, file, out),
        Command::Run { file } => cmd_run(cli, &ov, file, out),
        Command::Translate { file } => cmd_translate(cli, &ov, file, out),
        Command::Trace { file } => cmd_trace(cli, &ov, file, out),
        Command::Diff { file, window } => cmd_diff(cli, &ov, file, *window, out),
        Command::Corpus { manifest, window } => cmd_corpus(cli, &ov, manifest, *window, out),
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            if cli.format == Format::Json {
                let _ = writeln!(out, "{}", json!({ "error": f.kind, "message": f.message }));
            }
            let _ = writeln!(err, "{}", f.render());
            f.code
        }
    }
}

type CmdResult = Result<i32, Failure>;

fn cmd_check(cli: &Cli, ov: &Overrides, file: &Path, out: &mut dyn Write) -> CmdResult {
    let src = load(file, ov)?;
    let j = judgement(&src)?;
    if cli.format == Format::Json {
        let _ = writeln!(out, "{}", json!({ "calculus": src.calculus().name(), "judgement": j }));
    } else {
        let _ = writeln!(out, "{j}");
    }
    Ok(EXIT_OK)
}

fn cmd_run(cli: &Cli, ov: &Overrides, file: &Path, out: &mut dyn Write) -> CmdResult {
    let src = load(file, ov)?;
    let r = evaluate(&src, cli.fuel)?;
    if cli.format == Format::Json {
        let v = match &r.outcome {
            RunOutcome::Value(v) => json!({ "outcome": "value", "value": v, "steps": r.steps(), "labels": r.labels }),
            RunOutcome::Suspended { label, payload } => {
                json!({ "outcome": "suspended", "label": label, "payload": payload, "steps": r.steps(), "labels": r.labels })
            }
            RunOutcome::Stuck(why) => json!({ "outcome": "stuck", "reason": why, "steps": r.steps() }),
            RunOutcome::OutOfFuel => json!({ "outcome": "fuel", "steps": r.steps() }),
            RunOutcome::NotRunnable(why) => json!({ "outcome": "not-runnable", "reason": why }),
        };
        let _ = writeln!(out, "{v}");
    }
    finish_run(&r, cli.format == Format::Text, out)
}

/// Print the end of a run in text form and map it to an exit code.
fn finish_run(r: &RunReport, text: bool, out: &mut dyn Write) -> CmdResult {
    let code = finish_outcome(r, text, out)?;
    if text && !r.labels.is_empty() {
        let _ = writeln!(out, "omega: {}", r.labels.join(", "));
    }
    Ok(code)
}

fn finish_outcome(r: &RunReport, text: bool, out: &mut dyn Write) -> CmdResult {
    match &r.outcome {
        RunOutcome::Value(v) => {
            if text {
                let _ = writeln!(out, "{v}");
            }
            Ok(EXIT_OK)
        }
        RunOutcome::Suspended { label, payload } => {
            if text {
                let _ = writeln!(out, "suspended: do {label} {payload}");
            }
            Ok(EXIT_OK)
        }
        RunOutcome::Stuck(why) => Err(Failure::new(EXIT_STUCK, "Stuck", format!("after {} steps: {why}", r.steps()))),
        RunOutcome::OutOfFuel => {
            Err(Failure::new(EXIT_STUCK, "OutOfFuel", format!("no result after {} steps", r.steps())))
        }
        RunOutcome::NotRunnable(why) => Err(Failure::new(EXIT_STUCK, "NotRunnable", why.clone())),
    }
}

fn cmd_translate(cli: &Cli, ov: &Overrides, file: &Path, out: &mut dyn Write) -> CmdResult {
    let src = load(file, ov)?;
    let t = translate(&src)?;
    match cli.format {
        Format::Text => {
            let _ = writeln!(out, "{}", met::print::term(&t.term));
        }
        Format::Mex => {
            let _ = write!(out, "{}", render_mex(&t)?);
        }
        Format::Json => {
            let v = json!({
                "source": t.source,
                "term": met::print::term(&t.term),
                "type": met::print::ty(&t.ty),
                "ambient": met::print::ambient(&t.ambient),
                "theory": t.theory.name(),
            });
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_trace(cli: &Cli, ov: &Overrides, file: &Path, out: &mut dyn Write) -> CmdResult {
    let src = load(file, ov)?;
    let r = evaluate(&src, cli.fuel)?;
    if cli.format == Format::Json {
        let v = json!({ "states": r.states, "outcome": format!("{:?}", r.outcome) });
        let _ = writeln!(out, "{v}");
    } else {
        for (i, s) in r.states.iter().enumerate() {
            let _ = writeln!(out, "{i}: {s}");
        }
    }
    finish_run(&r, cli.format == Format::Text, out)
}

fn cmd_diff(cli: &Cli, ov: &Overrides, file: &Path, window: usize, out: &mut dyn Write) -> CmdResult {
    let src = load(file, ov)?;
    judgement(&src)?;
    let id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = lockstep_simulate(&id, &src, cli.fuel, window);
    if cli.format == Format::Json {
        let _ = writeln!(out, "{}", report.json());
    } else {
        let _ = write!(out, "{}", report.render());
    }
    Ok(if report.verdict.is_mismatch() { EXIT_MISMATCH } else { EXIT_OK })
}

/// The verdict on one corpus program.
#[derive(Clone, Debug)]
pub struct CorpusResult {
    pub id: String,
    pub calculus: Calculus,
    /// Problems found; empty when the program agrees with the manifest.
    pub problems: Vec<String>,
    pub judgement: String,
    pub outcome: String,
    pub preservation: String,
    pub lockstep: String,
}

impl CorpusResult {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn line(&self) -> String {
        let status = if self.passed() { "ok  " } else { "FAIL" };
        let mut s = format!(
            "{status} {} ({}): {} | {} | {} | {}",
            self.id, self.calculus, self.judgement, self.outcome, self.preservation, self.lockstep
        );
        for p in &self.problems {
            s.push_str(&format!("\n     {p}"));
        }
        s
    }
}

/// Check, run, translate and simulate one corpus program, comparing
/// against what its manifest entry expects.
pub fn check_corpus_program(p: &CorpusProgram, ov: &Overrides, fuel: usize, window: usize) -> CorpusResult {
    let mut r = CorpusResult {
        id: p.id.clone(),
        calculus: p.calculus,
        problems: Vec::new(),
        judgement: "-".into(),
        outcome: "-".into(),
        preservation: "-".into(),
        lockstep: "-".into(),
    };
    let mut src = match p.parse() {
        Ok(s) => s,
        Err(e) => {
            r.problems.push(parse_failure(&p.path, e).render());
            return r;
        }
    };
    if let Err(f) = ov.apply(&mut src) {
        r.problems.push(f.render());
        return r;
    }
    match (judgement(&src), &p.expected) {
        (Err(f), Expected::Rejected(kind)) => {
            r.judgement = format!("rejected {}", f.kind);
            if f.kind != *kind {
                r.problems.push(format!("expected rejection {kind}, got {}", f.render()));
            }
            return r;
        }
        (Err(f), _) => {
            r.problems.push(format!("unexpected {}", f.render()));
            return r;
        }
        (Ok(j), Expected::Rejected(kind)) => {
            r.problems.push(format!("expected rejection {kind}, but it checks: {j}"));
            r.judgement = j;
            return r;
        }
        (Ok(j), _) => {
            if j != p.expected_type {
                r.problems.push(format!("judgement `{j}`, expected `{}`", p.expected_type));
            }
            r.judgement = j;
        }
    }
    match evaluate(&src, fuel) {
        Ok(run) => {
            r.outcome = match run.expected() {
                Some(e) => e.to_string(),
                None => format!("{:?}", run.outcome),
            };
            if run.expected().as_ref() != Some(&p.expected) {
                r.problems.push(format!("outcome `{}`, expected `{}`", r.outcome, p.expected));
            }
        }
        Err(f) => r.problems.push(f.render()),
    }
    let pres = check_type_preservation(&src);
    r.preservation = if pres.passed() { "preserved".into() } else { pres.to_string() };
    if !pres.passed() {
        r.problems.push(format!("type preservation: {pres}"));
    }
    let d = lockstep_simulate(&p.id, &src, fuel, window);
    r.lockstep = format!("lockstep {} {}/{}", d.verdict.name(), d.matched, d.source_steps);
    if d.verdict.is_mismatch() {
        r.problems.push(d.summary_line());
    }
    r
}

fn cmd_corpus(cli: &Cli, ov: &Overrides, manifest: &Path, window: usize, out: &mut dyn Write) -> CmdResult {
    let programs = load_corpus(manifest).map_err(|e| Failure::new(EXIT_PARSE, "ManifestError", e.to_string()))?;
    let results: Vec<CorpusResult> =
        programs.par_iter().map(|p| check_corpus_program(p, ov, cli.fuel, window)).collect();
    let failed = results.iter().filter(|r| !r.passed()).count();
    if cli.format == Format::Json {
        for r in &results {
            let v = json!({
                "id": r.id,
                "calculus": r.calculus.name(),
                "passed": r.passed(),
                "judgement": r.judgement,
                "outcome": r.outcome,
                "preservation": r.preservation,
                "lockstep": r.lockstep,
                "problems": r.problems,
            });
            let _ = writeln!(out, "{v}");
        }
    } else {
        for r in &results {
            let _ = writeln!(out, "{}", r.line());
        }
        let _ = writeln!(out, "{} programs, {} passed, {failed} failed", results.len(), results.len() - failed);
    }
    Ok(if failed > 0 { EXIT_MISMATCH } else { EXIT_OK })
}
