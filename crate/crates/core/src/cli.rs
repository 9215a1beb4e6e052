//! The `cannon` command line.
//!
//! Exit codes: 0 success, accepted or equal; 1 rejected, invalid or unequal;
//! 2 usage or parse error; 3 search budget exceeded.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::grammar::{enumerate_by_membership, generate_language_with, GrammarError, Recognizer};
use crate::history::{canonicalize, render_diagram, History};
use crate::io::{parse_system, parse_system_unchecked, serialize_system, write_trace, System};
use crate::nca::{enumerate_language_with, Decision, NcaError, Reducer, DEFAULT_ENUMERATION_GUARD};
use crate::transforms::{deanchor, eliminate_terminals, gcsg_to_nca, nca_to_gcsg};
use crate::word::{shortlex_cmp, Word};
use crate::Limits;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cannon", version, about = "Length-reducing rewriting systems and growing context-sensitive grammars")]
struct Cli {
    /// Search budget: words expanded per query.
    #[arg(long, global = true, default_value_t = Limits::default().max_expansions)]
    max_expansions: usize,
    /// Search budget: words remembered per query.
    #[arg(long, global = true, default_value_t = Limits::default().max_memo)]
    max_memo: usize,
    /// Longest word `enumerate` and `equiv` will accept.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_GUARD)]
    guard: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a system file and report every violation.
    Validate { file: PathBuf },
    /// Convert between systems and grammar normal forms.
    Convert {
        #[arg(long, value_enum)]
        to: Target,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide membership of WORD (space-separated symbols, `_` for empty).
    Decide {
        file: PathBuf,
        word: String,
        /// Write the witness reduction to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// List the language up to a length, shortest first.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Compare two languages up to a length.
    Equiv {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Print a witness reduction of WORD.
    Trace {
        file: PathBuf,
        word: String,
        /// Reorder independent steps left first.
        #[arg(long)]
        canonical: bool,
        /// Append the diagram even when stdout is not a terminal.
        #[arg(long)]
        diagram: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// Grammar to rewriting system.
    Nca,
    /// Rewriting system to standard grammar.
    Gcsg,
    /// Extended grammar to standard grammar.
    Standard,
    /// Grammar without terminals on left-hand sides.
    Noterm,
}

/// Why a command stopped early.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<NcaError> for Failure {
    fn from(e: NcaError) -> Failure {
        match e {
            NcaError::BudgetExceeded(w) => Failure::Budget(format!("search budget exceeded on {w}")),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<GrammarError> for Failure {
    fn from(e: GrammarError) -> Failure {
        match e {
            GrammarError::BudgetExceeded => Failure::Budget(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

struct Context<'a> {
    out: &'a mut dyn Write,
    limits: Limits,
    guard: usize,
    stdout_is_terminal: bool,
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, stdout_is_terminal: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let limits = Limits { max_expansions: cli.max_expansions, max_memo: cli.max_memo };
    let mut cx = Context { out, limits, guard: cli.guard, stdout_is_terminal };
    match dispatch(&mut cx, cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cx: &mut Context<'_>, command: Command) -> Result<i32, Failure> {
    match command {
        Command::Validate { file } => validate(cx, &file),
        Command::Convert { to, file, output } => convert(cx, to, &file, output.as_deref()),
        Command::Decide { file, word, trace } => decide(cx, &file, &word, trace.as_deref()),
        Command::Enumerate { file, max_len } => enumerate(cx, &file, max_len),
        Command::Equiv { file_a, file_b, max_len } => equiv(cx, &file_a, &file_b, max_len),
        Command::Trace { file, word, canonical, diagram } => trace(cx, &file, &word, canonical, diagram),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<System, Failure> {
    parse_system(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_word(text: &str) -> Result<Word, Failure> {
    Word::parse(text).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(cx: &mut Context<'_>, text: &str) -> Result<(), Failure> {
    cx.out.write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("writing output: {e}")))
}

fn validate(cx: &mut Context<'_>, path: &Path) -> Result<i32, Failure> {
    let sys = parse_system_unchecked(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let violations: Vec<String> = match &sys {
        System::Nca(s) => s.validate().iter().map(ToString::to_string).collect(),
        System::Grammar(g) => g.validate().iter().map(ToString::to_string).collect(),
    };
    if !violations.is_empty() {
        let text: String = violations.iter().map(|v| format!("{v}\n")).collect();
        emit(cx, &text)?;
        return Ok(EXIT_NO);
    }
    let mut text = match &sys {
        System::Nca(s) => format!("valid nca: {} rules\n", s.rules().len()),
        System::Grammar(g) => format!("valid {}: {} productions\n", sys.kind(), g.productions().len()),
    };
    if let System::Grammar(g) = &sys {
        let unreachable = g.unreachable_nonterminals();
        if !unreachable.is_empty() {
            let names: Vec<&str> = unreachable.iter().map(|s| s.name()).collect();
            text.push_str(&format!("unreachable non-terminals: {}\n", names.join(" ")));
        }
    }
    emit(cx, &text)?;
    Ok(EXIT_OK)
}

fn convert(cx: &mut Context<'_>, to: Target, path: &Path, output: Option<&Path>) -> Result<i32, Failure> {
    let sys = load(path)?;
    let target = to.to_possible_value().expect("no skipped variants");
    let wrong = |want: &str| Failure::Usage(format!("--to {} expects {want}, got {}", target.get_name(), sys.kind()));
    let converted = match (to, &sys) {
        (Target::Nca, System::Grammar(g)) => System::Nca(gcsg_to_nca(g).map_err(|e| Failure::Usage(e.to_string()))?),
        (Target::Gcsg, System::Nca(s)) => System::Grammar(nca_to_gcsg(s).map_err(|e| Failure::Usage(e.to_string()))?),
        (Target::Standard, System::Grammar(g)) => System::Grammar(deanchor(g).map_err(|e| Failure::Usage(e.to_string()))?),
        (Target::Noterm, System::Grammar(g)) => {
            System::Grammar(eliminate_terminals(g).map_err(|e| Failure::Usage(e.to_string()))?)
        }
        (Target::Gcsg, _) => return Err(wrong("an nca")),
        _ => return Err(wrong("a grammar")),
    };
    let text = serialize_system(&converted);
    match output {
        Some(out) => fs::write(out, text).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?,
        None => emit(cx, &text)?,
    }
    Ok(EXIT_OK)
}

fn decide(cx: &mut Context<'_>, path: &Path, word: &str, trace: Option<&Path>) -> Result<i32, Failure> {
    let sys = load(path)?;
    let w = parse_word(word)?;
    let decision = match &sys {
        System::Nca(s) => Reducer::new(s)?.decide(&w, cx.limits)?,
        System::Grammar(_) if trace.is_some() => {
            return Err(Failure::Usage("--trace needs an nca file; grammar membership has no reduction history".into()))
        }
        System::Grammar(g) => Recognizer::new(g)?.member(&w, cx.limits)?,
    };
    match decision {
        Decision::Accepted(moves) => {
            if let (Some(out), System::Nca(s)) = (trace, &sys) {
                let h = History::new(Arc::new(s.clone()), w, &moves).expect("witness replays");
                fs::write(out, write_trace(&h)).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            }
            emit(cx, &format!("accepted in {} step{}\n", moves.len(), if moves.len() == 1 { "" } else { "s" }))?;
            Ok(EXIT_OK)
        }
        Decision::Rejected => {
            emit(cx, "rejected\n")?;
            Ok(EXIT_NO)
        }
        Decision::BudgetExceeded => Err(Failure::Budget(format!("search budget exceeded on {word}"))),
    }
}

/// The words of length at most `max_len` in the language of `sys`. Grammars
/// are enumerated by forward generation when `forward` is set, otherwise by
/// one membership query per word.
pub fn language(
    sys: &System,
    max_len: usize,
    guard: usize,
    limits: Limits,
    forward: bool,
) -> Result<BTreeSet<Word>, String> {
    match sys {
        System::Nca(s) => enumerate_language_with(s, max_len, guard, limits).map_err(|e| e.to_string()),
        System::Grammar(g) if forward => generate_language_with(g, max_len, guard, limits).map_err(|e| e.to_string()),
        System::Grammar(g) => enumerate_by_membership(g, max_len, guard, limits).map_err(|e| e.to_string()),
    }
}

fn language_of(cx: &Context<'_>, sys: &System, max_len: usize) -> Result<BTreeSet<Word>, Failure> {
    match sys {
        System::Nca(s) => Ok(enumerate_language_with(s, max_len, cx.guard, cx.limits)?),
        System::Grammar(g) => Ok(enumerate_by_membership(g, max_len, cx.guard, cx.limits)?),
    }
}

/// The shortlex-least word in exactly one of `a` and `b`, and whether it is
/// in `a`.
pub fn first_difference(a: &BTreeSet<Word>, b: &BTreeSet<Word>) -> Option<(Word, bool)> {
    a.symmetric_difference(b).min_by(|x, y| shortlex_cmp(x, y)).map(|w| (w.clone(), a.contains(w)))
}

fn enumerate(cx: &mut Context<'_>, path: &Path, max_len: usize) -> Result<i32, Failure> {
    let sys = load(path)?;
    let mut words: Vec<Word> = language_of(cx, &sys, max_len)?.into_iter().collect();
    words.sort_by(shortlex_cmp);
    let text: String = words.iter().map(|w| format!("{w}\n")).collect();
    emit(cx, &text)?;
    Ok(EXIT_OK)
}

fn equiv(cx: &mut Context<'_>, path_a: &Path, path_b: &Path, max_len: usize) -> Result<i32, Failure> {
    let (a, b) = (load(path_a)?, load(path_b)?);
    let (la, lb) = (language_of(cx, &a, max_len)?, language_of(cx, &b, max_len)?);
    match first_difference(&la, &lb) {
        None => {
            emit(cx, &format!("equal up to length {max_len}: {} words\n", la.len()))?;
            Ok(EXIT_OK)
        }
        Some((w, in_a)) => {
            let (yes, no) = if in_a { (path_a, path_b) } else { (path_b, path_a) };
            emit(cx, &format!("differ at {w}: in {}, not in {}\n", yes.display(), no.display()))?;
            Ok(EXIT_NO)
        }
    }
}

fn trace(cx: &mut Context<'_>, path: &Path, word: &str, canonical: bool, diagram: bool) -> Result<i32, Failure> {
    let System::Nca(s) = load(path)? else {
        return Err(Failure::Usage("trace needs an nca file".into()));
    };
    let w = parse_word(word)?;
    let moves = match Reducer::new(&s)?.decide(&w, cx.limits)? {
        Decision::Accepted(moves) => moves,
        Decision::Rejected => {
            emit(cx, "rejected\n")?;
            return Ok(EXIT_NO);
        }
        Decision::BudgetExceeded => return Err(Failure::Budget(format!("search budget exceeded on {word}"))),
    };
    let mut h = History::new(Arc::new(s), w, &moves).expect("witness replays");
    if canonical {
        h = canonicalize(&h);
    }
    let mut text = write_trace(&h);
    if diagram || cx.stdout_is_terminal {
        text.push('\n');
        text.push_str(&render_diagram(&h));
    }
    emit(cx, &text)?;
    Ok(EXIT_OK)
}
