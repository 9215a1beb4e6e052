//! Non-deterministic Cannon's algorithms: strictly length-reducing,
//! optionally anchored rewriting systems whose language is the set of
//! terminal words that reduce to ε.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::search::{self, CompiledRule, Interner, Limits, MoveOrder, SearchResult, Sym};
use crate::word::{words_up_to, Alphabet, AnchorMode, Symbol, Word};

/// Largest `max_len` accepted by [`enumerate_language`] unless a caller
/// raises it explicitly.
pub const DEFAULT_ENUMERATION_GUARD: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcaRule {
    pub lhs: Word,
    pub rhs: Word,
    pub anchor: AnchorMode,
}

impl NcaRule {
    pub fn new(lhs: Word, rhs: Word, anchor: AnchorMode) -> NcaRule {
        NcaRule { lhs, rhs, anchor }
    }

    pub fn is_length_reducing(&self) -> bool {
        self.lhs.len() > self.rhs.len()
    }
}

impl fmt::Display for NcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if self.anchor != AnchorMode::None {
            write!(f, " {}", self.anchor.tag())?;
        }
        Ok(())
    }
}

/// The triple (terminals, working alphabet, rules). Duplicate rules are
/// dropped on construction, keeping the first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcaSystem {
    alphabet: Alphabet,
    rules: Vec<NcaRule>,
}

impl NcaSystem {
    pub fn new(alphabet: Alphabet, rules: Vec<NcaRule>) -> NcaSystem {
        let mut seen = HashSet::new();
        let rules = rules.into_iter().filter(|r| seen.insert(r.clone())).collect();
        NcaSystem { alphabet, rules }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn terminals(&self) -> &BTreeSet<Symbol> {
        &self.alphabet.terminals
    }

    pub fn rules(&self) -> &[NcaRule] {
        &self.rules
    }

    pub fn rule(&self, index: usize) -> Option<&NcaRule> {
        self.rules.get(index)
    }

    pub fn validate(&self) -> Vec<NcaViolation> {
        validate_nca(self)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NcaViolation {
    #[error("terminal {0} is not in the working alphabet")]
    TerminalOutsideWorking(Symbol),
    #[error("rule #{rule} ({text}) is not length-reducing")]
    NotLengthReducing { rule: usize, text: String },
    #[error("rule #{rule} uses symbol {symbol} outside working alphabet")]
    SymbolOutsideAlphabet { rule: usize, symbol: Symbol },
}

/// Reports every alphabet and rule violation; an empty list means valid.
pub fn validate_nca(sys: &NcaSystem) -> Vec<NcaViolation> {
    let mut violations: Vec<NcaViolation> = sys
        .alphabet
        .terminals
        .difference(&sys.alphabet.working)
        .map(|s| NcaViolation::TerminalOutsideWorking(s.clone()))
        .collect();
    for (i, rule) in sys.rules.iter().enumerate() {
        if !rule.is_length_reducing() {
            violations.push(NcaViolation::NotLengthReducing { rule: i, text: rule.to_string() });
        }
        let mut reported = BTreeSet::new();
        for s in rule.lhs.iter().chain(rule.rhs.iter()) {
            if !sys.alphabet.contains(s) && reported.insert(s.clone()) {
                violations.push(NcaViolation::SymbolOutsideAlphabet { rule: i, symbol: s.clone() });
            }
        }
    }
    violations
}

/// One rule application: `rule_index` applied at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub rule_index: usize,
    pub position: usize,
}

impl Move {
    pub fn new(rule_index: usize, position: usize) -> Move {
        Move { rule_index, position }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NcaError {
    #[error("invalid system: {}", join_violations(.0))]
    InvalidSystem(Vec<NcaViolation>),
    #[error("symbol {0} is not a terminal")]
    NotTerminal(Symbol),
    #[error("symbol {0} is outside the working alphabet")]
    OutsideAlphabet(Symbol),
    #[error("rule #{} cannot be applied at position {}", .0.rule_index, .0.position)]
    IllegalMove(Move),
    #[error("max length {max_len} exceeds enumeration guard {guard}")]
    GuardExceeded { max_len: usize, guard: usize },
    #[error("search budget exceeded while deciding {0}")]
    BudgetExceeded(Word),
}

fn join_violations(v: &[NcaViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// All applicable moves, ordered by rule index and then position.
pub fn legal_moves(sys: &NcaSystem, w: &Word) -> Vec<Move> {
    let mut moves = Vec::new();
    for (rule_index, rule) in sys.rules.iter().enumerate() {
        for position in w.occurrences(&rule.lhs, rule.anchor) {
            moves.push(Move { rule_index, position });
        }
    }
    moves
}

pub fn is_legal(sys: &NcaSystem, w: &Word, m: Move) -> bool {
    let Some(rule) = sys.rules.get(m.rule_index) else {
        return false;
    };
    let end = m.position + rule.lhs.len();
    !rule.lhs.is_empty()
        && end <= w.len()
        && w.symbols()[m.position..end] == *rule.lhs.symbols()
        && rule.anchor.allows(m.position, rule.lhs.len(), w.len())
}

pub fn apply_move(sys: &NcaSystem, w: &Word, m: Move) -> Result<Word, NcaError> {
    if !is_legal(sys, w, m) {
        return Err(NcaError::IllegalMove(m));
    }
    let rule = &sys.rules[m.rule_index];
    w.splice(m.position, rule.lhs.len(), &rule.rhs).map_err(|_| NcaError::IllegalMove(m))
}

/// Outcome of a bounded membership search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// Reduces to the goal; carries the witness moves in order.
    Accepted(Vec<Move>),
    Rejected,
    BudgetExceeded,
}

impl Decision {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Decision::Accepted(_))
    }
}

/// A validated system compiled to interned symbols, reusable across many
/// membership queries.
#[derive(Debug, Clone)]
pub struct Reducer {
    interner: Interner,
    terminals: BTreeSet<Symbol>,
    rules: Vec<CompiledRule>,
}

impl Reducer {
    pub fn new(sys: &NcaSystem) -> Result<Reducer, NcaError> {
        let violations = sys.validate();
        if !violations.is_empty() {
            return Err(NcaError::InvalidSystem(violations));
        }
        let mut interner = Interner::default();
        for s in &sys.alphabet.working {
            interner.intern(s);
        }
        let rules = sys
            .rules
            .iter()
            .map(|r| CompiledRule {
                lhs: r.lhs.iter().map(|s| interner.intern(s)).collect(),
                rhs: r.rhs.iter().map(|s| interner.intern(s)).collect(),
                anchor: r.anchor,
            })
            .collect();
        Ok(Reducer { interner, terminals: sys.alphabet.terminals.clone(), rules })
    }

    /// Decides membership of a terminal word.
    pub fn decide(&self, w: &Word, limits: Limits) -> Result<Decision, NcaError> {
        if let Some(s) = w.iter().find(|s| !self.terminals.contains(*s)) {
            return Err(NcaError::NotTerminal(s.clone()));
        }
        self.reduce_to_empty(w, limits)
    }

    /// Like [`Reducer::decide`] but accepts any word over the working
    /// alphabet.
    pub fn reduce_to_empty(&self, w: &Word, limits: Limits) -> Result<Decision, NcaError> {
        self.run(w, limits, None)
    }

    /// Search with a caller-supplied permutation of each node's legal moves.
    pub fn decide_with_move_order(
        &self,
        w: &Word,
        limits: Limits,
        order: &mut dyn FnMut(&mut Vec<Move>),
    ) -> Result<Decision, NcaError> {
        self.run(w, limits, Some(order))
    }

    fn run(
        &self,
        w: &Word,
        limits: Limits,
        order: Option<MoveOrder<'_>>,
    ) -> Result<Decision, NcaError> {
        let start: Vec<Sym> = self.interner.encode(w).map_err(NcaError::OutsideAlphabet)?;
        let goal = |word: &[Sym]| word.is_empty();
        let prune = |_: &[Sym]| false;
        Ok(match search::search(&self.rules, start, &goal, &prune, limits, order) {
            SearchResult::Found(moves) => Decision::Accepted(moves),
            SearchResult::Exhausted => Decision::Rejected,
            SearchResult::BudgetExceeded => Decision::BudgetExceeded,
        })
    }
}

/// Decides whether the terminal word `w` reduces to ε.
pub fn decide(sys: &NcaSystem, w: &Word, limits: Limits) -> Result<Decision, NcaError> {
    Reducer::new(sys)?.decide(w, limits)
}

/// The language of `sys` restricted to words of length at most `max_len`.
pub fn enumerate_language(sys: &NcaSystem, max_len: usize) -> Result<BTreeSet<Word>, NcaError> {
    enumerate_language_with(sys, max_len, DEFAULT_ENUMERATION_GUARD, Limits::default())
}

pub fn enumerate_language_with(
    sys: &NcaSystem,
    max_len: usize,
    guard: usize,
    limits: Limits,
) -> Result<BTreeSet<Word>, NcaError> {
    if max_len > guard {
        return Err(NcaError::GuardExceeded { max_len, guard });
    }
    let reducer = Reducer::new(sys)?;
    let letters: Vec<Symbol> = sys.alphabet.terminals.iter().cloned().collect();
    let mut language = BTreeSet::new();
    for w in words_up_to(&letters, max_len) {
        match reducer.decide(&w, limits)? {
            Decision::Accepted(_) => {
                language.insert(w);
            }
            Decision::Rejected => {}
            Decision::BudgetExceeded => return Err(NcaError::BudgetExceeded(w)),
        }
    }
    Ok(language)
}
