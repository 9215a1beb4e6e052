//! Text formats for systems, grammars and traces.
//!
//! ```text
//! # free group on one generator
//! kind: nca
//! terminals: a A
//! alphabet: a A
//! rules:
//! a A -> _
//! A a -> _
//! ```
//!
//! Grammars use `kind: gcsg` (standard) or `kind: egcsg` (extended) with
//! `nonterminals:` and `start:` headers and a `productions:` section.
//! A rule line is `LHS -> RHS` with an optional `@left`, `@right` or `@both`.
//! `_` stands for the empty word. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::grammar::{Flavor, Grammar, GrammarViolation, Production};
use crate::history::History;
use crate::nca::{Move, NcaRule, NcaSystem, NcaViolation};
use crate::word::{Alphabet, AnchorMode, Symbol, Word, EMPTY_TOKEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Nca,
    Gcsg,
    Egcsg,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Nca => "nca",
            Kind::Gcsg => "gcsg",
            Kind::Egcsg => "egcsg",
        }
    }

    pub fn from_name(name: &str) -> Option<Kind> {
        match name {
            "nca" => Some(Kind::Nca),
            "gcsg" => Some(Kind::Gcsg),
            "egcsg" => Some(Kind::Egcsg),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum System {
    Nca(NcaSystem),
    Grammar(Grammar),
}

impl System {
    pub fn kind(&self) -> Kind {
        match self {
            System::Nca(_) => Kind::Nca,
            System::Grammar(g) if g.flavor() == Flavor::Standard => Kind::Gcsg,
            System::Grammar(_) => Kind::Egcsg,
        }
    }

    pub fn terminals(&self) -> &BTreeSet<Symbol> {
        match self {
            System::Nca(s) => s.terminals(),
            System::Grammar(g) => g.terminals(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}", join(.0))]
    InvalidNca(Vec<NcaViolation>),
    #[error("{}", join(.0))]
    InvalidGrammar(Vec<GrammarViolation>),
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

/// A whitespace-separated token with its 1-based column.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token { column: line[..s].chars().count() + 1, text: &line[s..i] });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

fn symbol_at(line: usize, t: Token<'_>) -> Result<Symbol, ParseError> {
    Symbol::new(t.text).map_err(|e| syntax(line, t.column, e.to_string()))
}

fn symbol_set(line: usize, ts: &[Token<'_>]) -> Result<BTreeSet<Symbol>, ParseError> {
    ts.iter().map(|&t| symbol_at(line, t)).collect()
}

fn word_at(line: usize, ts: &[Token<'_>]) -> Result<Word, ParseError> {
    if let [t] = ts {
        if t.text == EMPTY_TOKEN {
            return Ok(Word::empty());
        }
    }
    if let Some(t) = ts.iter().find(|t| t.text == EMPTY_TOKEN) {
        return Err(syntax(line, t.column, "`_` must stand alone"));
    }
    ts.iter().map(|&t| symbol_at(line, t)).collect()
}

struct RuleLine {
    lhs: Word,
    rhs: Word,
    anchor: AnchorMode,
}

fn rule_line(line: usize, ts: &[Token<'_>]) -> Result<RuleLine, ParseError> {
    let arrows: Vec<usize> = ts.iter().enumerate().filter(|(_, t)| t.text == "->").map(|(i, _)| i).collect();
    let arrow = match arrows.as_slice() {
        [i] => *i,
        [] => return Err(syntax(line, ts[0].column, "expected `->`")),
        [_, second, ..] => return Err(syntax(line, ts[*second].column, "more than one `->`")),
    };
    let (lhs, rest) = (&ts[..arrow], &ts[arrow + 1..]);
    let (rhs, anchor) = match rest.split_last() {
        Some((last, init)) if last.text.starts_with('@') => {
            let anchor = AnchorMode::from_tag(last.text)
                .filter(|&a| a != AnchorMode::None)
                .ok_or_else(|| syntax(line, last.column, format!("unknown anchor {}", last.text)))?;
            (init, anchor)
        }
        _ => (rest, AnchorMode::None),
    };
    if lhs.is_empty() {
        return Err(syntax(line, ts[arrow].column, "missing left-hand side"));
    }
    if rhs.is_empty() {
        let column = rest.first().map_or(ts[arrow].column + 2, |t| t.column);
        return Err(syntax(line, column, "missing right-hand side (use `_` for the empty word)"));
    }
    Ok(RuleLine { lhs: word_at(line, lhs)?, rhs: word_at(line, rhs)?, anchor })
}

#[derive(Default)]
struct Headers {
    kind: Option<Kind>,
    terminals: Option<BTreeSet<Symbol>>,
    alphabet: Option<BTreeSet<Symbol>>,
    nonterminals: Option<BTreeSet<Symbol>>,
    start: Option<Symbol>,
}

/// Parses a system file without running the validators.
pub fn parse_system_unchecked(text: &str) -> Result<System, ParseError> {
    let mut h = Headers::default();
    let mut rules: Option<Vec<RuleLine>> = None;
    let mut last_line = 0;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        last_line = line;
        let code = strip_comment(raw);
        let ts = tokens(code);
        let Some(&first) = ts.first() else { continue };
        if let Some(rules) = rules.as_mut() {
            rules.push(rule_line(line, &ts)?);
            continue;
        }
        let Some((key, value)) = code.split_once(':') else {
            return Err(syntax(line, first.column, "expected a `key:` header"));
        };
        let key = key.trim();
        let value_offset = key_column_end(code);
        let values: Vec<Token<'_>> =
            tokens(value).into_iter().map(|t| Token { column: t.column + value_offset, text: t.text }).collect();
        let duplicate = || syntax(line, first.column, format!("duplicate header `{key}`"));
        match key {
            "kind" => {
                let [t] = values.as_slice() else {
                    return Err(syntax(line, first.column, "`kind:` takes one of nca, gcsg, egcsg"));
                };
                let kind = Kind::from_name(t.text).ok_or_else(|| syntax(line, t.column, format!("unknown kind {}", t.text)))?;
                if h.kind.replace(kind).is_some() {
                    return Err(duplicate());
                }
            }
            "terminals" => {
                if h.terminals.replace(symbol_set(line, &values)?).is_some() {
                    return Err(duplicate());
                }
            }
            "alphabet" => {
                if h.alphabet.replace(symbol_set(line, &values)?).is_some() {
                    return Err(duplicate());
                }
            }
            "nonterminals" => {
                if h.nonterminals.replace(symbol_set(line, &values)?).is_some() {
                    return Err(duplicate());
                }
            }
            "start" => {
                let [t] = values.as_slice() else {
                    return Err(syntax(line, first.column, "`start:` takes exactly one symbol"));
                };
                if h.start.replace(symbol_at(line, *t)?).is_some() {
                    return Err(duplicate());
                }
            }
            "rules" | "productions" => {
                if let Some(t) = values.first() {
                    return Err(syntax(line, t.column, format!("unexpected text after `{key}:`")));
                }
                let Some(kind) = h.kind else {
                    return Err(syntax(line, first.column, "`kind:` must come first"));
                };
                let expected = if kind == Kind::Nca { "rules" } else { "productions" };
                if key != expected {
                    return Err(syntax(line, first.column, format!("a {kind} file lists `{expected}:`")));
                }
                rules = Some(Vec::new());
            }
            _ => return Err(syntax(line, first.column, format!("unknown header `{key}`"))),
        }
    }
    let end = last_line + 1;
    let kind = h.kind.ok_or_else(|| syntax(end, 1, "missing `kind:` header"))?;
    let rules = rules.ok_or_else(|| {
        syntax(end, 1, if kind == Kind::Nca { "missing `rules:` section" } else { "missing `productions:` section" })
    })?;
    let terminals = h.terminals.ok_or_else(|| syntax(end, 1, "missing `terminals:` header"))?;
    match kind {
        Kind::Nca => {
            if h.nonterminals.is_some() || h.start.is_some() {
                return Err(syntax(end, 1, "an nca file has no `nonterminals:` or `start:`"));
            }
            let working = h.alphabet.unwrap_or_else(|| terminals.clone());
            let rules = rules.into_iter().map(|r| NcaRule::new(r.lhs, r.rhs, r.anchor)).collect();
            Ok(System::Nca(NcaSystem::new(Alphabet::new(terminals, working), rules)))
        }
        Kind::Gcsg | Kind::Egcsg => {
            if h.alphabet.is_some() {
                return Err(syntax(end, 1, "a grammar file has no `alphabet:`"));
            }
            let nonterminals = h.nonterminals.ok_or_else(|| syntax(end, 1, "missing `nonterminals:` header"))?;
            let start = h.start.ok_or_else(|| syntax(end, 1, "missing `start:` header"))?;
            let flavor = if kind == Kind::Gcsg { Flavor::Standard } else { Flavor::Extended };
            let productions = rules.into_iter().map(|r| Production::new(r.lhs, r.rhs, r.anchor)).collect();
            Ok(System::Grammar(Grammar::new(nonterminals, terminals, start, productions, flavor)))
        }
    }
}

fn key_column_end(code: &str) -> usize {
    let colon = code.find(':').expect("header has a colon");
    code[..=colon].chars().count()
}

/// Parses a system file and runs the matching validator.
pub fn parse_system(text: &str) -> Result<System, ParseError> {
    let sys = parse_system_unchecked(text)?;
    match &sys {
        System::Nca(s) => {
            let v = s.validate();
            if !v.is_empty() {
                return Err(ParseError::InvalidNca(v));
            }
        }
        System::Grammar(g) => {
            let v = g.validate();
            if !v.is_empty() {
                return Err(ParseError::InvalidGrammar(v));
            }
        }
    }
    Ok(sys)
}

fn symbol_line(out: &mut String, key: &str, set: &BTreeSet<Symbol>) {
    out.push_str(key);
    out.push(':');
    for s in set {
        out.push(' ');
        out.push_str(s.name());
    }
    out.push('\n');
}

/// Canonical text: sorted symbol sets, rules in their original order (rule
/// indices are what traces refer to).
pub fn serialize_system(sys: &System) -> String {
    let mut out = format!("kind: {}\n", sys.kind());
    match sys {
        System::Nca(s) => {
            symbol_line(&mut out, "terminals", &s.alphabet().terminals);
            symbol_line(&mut out, "alphabet", &s.alphabet().working);
            out.push_str("rules:\n");
            for r in s.rules() {
                let _ = writeln!(out, "{r}");
            }
        }
        System::Grammar(g) => {
            symbol_line(&mut out, "terminals", g.terminals());
            symbol_line(&mut out, "nonterminals", g.nonterminals());
            let _ = writeln!(out, "start: {}", g.start());
            out.push_str("productions:\n");
            for p in g.productions() {
                let _ = writeln!(out, "{p}");
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected word {expected}, trace shows {found}")]
    WordMismatch { line: usize, expected: Word, found: Word },
    #[error("trace is empty")]
    Empty,
    #[error(transparent)]
    History(#[from] crate::history::HistoryError),
}

/// One line per step, `t | word | rule#k @pos`, closed by `n | word | end`.
pub fn write_trace(h: &History) -> String {
    let mut out = String::new();
    let words = h.words();
    for (t, (w, m)) in words.iter().zip(h.moves()).enumerate() {
        let _ = writeln!(out, "{t} | {w} | rule#{} @{}", m.rule_index, m.position);
    }
    let _ = writeln!(out, "{} | {} | end", h.len(), words.last().unwrap());
    out
}

/// Reads a trace back against `system`, checking each recorded word.
/// Lines whose action is `idle` (word unchanged) are skipped, as are lines
/// starting with `#`.
pub fn parse_trace(text: &str, system: Arc<NcaSystem>) -> Result<History, TraceError> {
    let mut rows: Vec<(usize, Word, usize)> = Vec::new();
    let mut moves = Vec::new();
    let mut ended = false;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let code = raw.trim();
        if code.is_empty() || code.starts_with('#') {
            continue;
        }
        let bad = |message: &str| TraceError::Syntax { line, message: message.to_string() };
        if ended {
            return Err(bad("text after `end`"));
        }
        let parts: Vec<&str> = code.split('|').map(str::trim).collect();
        let [_, word, action] = parts.as_slice() else {
            return Err(bad("expected `t | word | action`"));
        };
        let word = Word::parse(word).map_err(|e| bad(&e.to_string()))?;
        rows.push((line, word, moves.len()));
        match *action {
            "end" => ended = true,
            "idle" => {}
            action => moves.push(parse_move(action).ok_or_else(|| bad("expected `rule#k @pos`"))?),
        }
    }
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Err(TraceError::Empty);
    };
    let (start, last_line) = (first.1.clone(), last.0);
    if !ended {
        return Err(TraceError::Syntax { line: last_line, message: "missing final `end` line".into() });
    }
    let h = History::new(system, start, &moves)?;
    let words = h.words();
    for (line, found, t) in rows {
        if found != words[t] {
            return Err(TraceError::WordMismatch { line, expected: words[t].clone(), found });
        }
    }
    Ok(h)
}

fn parse_move(action: &str) -> Option<Move> {
    let (rule, pos) = action.split_once(char::is_whitespace)?;
    let rule = rule.strip_prefix("rule#")?.parse().ok()?;
    let pos = pos.trim().strip_prefix('@')?.parse().ok()?;
    Some(Move::new(rule, pos))
}
