//! Growing context-sensitive grammars, optionally with anchored productions.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::nca::{Decision, DEFAULT_ENUMERATION_GUARD};
use crate::search::{self, CompiledRule, Interner, Limits, SearchResult, Sym};
use crate::word::{occurrences, splice, words_up_to, AnchorMode, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Standard,
    /// Non-start productions may be anchored.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub lhs: Word,
    pub rhs: Word,
    pub anchor: AnchorMode,
}

impl Production {
    pub fn new(lhs: Word, rhs: Word, anchor: AnchorMode) -> Production {
        Production { lhs, rhs, anchor }
    }

    pub fn plain(lhs: Word, rhs: Word) -> Production {
        Production::new(lhs, rhs, AnchorMode::None)
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if self.anchor != AnchorMode::None {
            write!(f, " {}", self.anchor.tag())?;
        }
        Ok(())
    }
}

/// The quadruple (non-terminals, terminals, start, productions). Duplicate
/// productions are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    nonterminals: BTreeSet<Symbol>,
    terminals: BTreeSet<Symbol>,
    start: Symbol,
    productions: Vec<Production>,
    flavor: Flavor,
}

impl Grammar {
    pub fn new(
        nonterminals: BTreeSet<Symbol>,
        terminals: BTreeSet<Symbol>,
        start: Symbol,
        productions: Vec<Production>,
        flavor: Flavor,
    ) -> Grammar {
        let mut seen = HashSet::new();
        let productions = productions.into_iter().filter(|p| seen.insert(p.clone())).collect();
        Grammar { nonterminals, terminals, start, productions, flavor }
    }

    pub fn nonterminals(&self) -> &BTreeSet<Symbol> {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &BTreeSet<Symbol> {
        &self.terminals
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_start_production(&self, p: &Production) -> bool {
        p.lhs.len() == 1 && p.lhs.symbols()[0] == self.start
    }

    pub fn has_empty_production(&self) -> bool {
        self.productions.iter().any(|p| self.is_start_production(p) && p.rhs.is_empty())
    }

    pub fn is_terminal_word(&self, w: &Word) -> bool {
        w.iter().all(|s| self.terminals.contains(s))
    }

    /// Violations of the growing context-sensitive conditions (plus the
    /// structural ones); empty means valid.
    pub fn validate(&self) -> Vec<GrammarViolation> {
        validate_grammar(self)
    }

    /// Violations of the weaker context-sensitive conditions.
    pub fn validate_context_sensitive(&self) -> Vec<GrammarViolation> {
        let mut out = self.structural_violations();
        for (i, p) in self.productions.iter().enumerate() {
            let empty_start = self.is_start_production(p) && p.rhs.is_empty();
            if p.lhs.len() > p.rhs.len() && !empty_start {
                out.push(GrammarViolation::NotContextSensitive { production: i, text: p.to_string() });
            }
        }
        out.extend(self.empty_production_violation());
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn structural_violations(&self) -> Vec<GrammarViolation> {
        let mut out: Vec<GrammarViolation> = self
            .nonterminals
            .intersection(&self.terminals)
            .map(|s| GrammarViolation::TerminalAndNonterminal(s.clone()))
            .collect();
        if !self.nonterminals.contains(&self.start) {
            out.push(GrammarViolation::StartNotNonterminal(self.start.clone()));
        }
        for (i, p) in self.productions.iter().enumerate() {
            if p.lhs.is_empty() {
                out.push(GrammarViolation::EmptyLhs { production: i });
            }
            let mut reported = BTreeSet::new();
            for s in p.lhs.iter().chain(p.rhs.iter()) {
                if !self.nonterminals.contains(s) && !self.terminals.contains(s) && reported.insert(s.clone()) {
                    out.push(GrammarViolation::UnknownSymbol { production: i, symbol: s.clone() });
                }
            }
            if p.anchor != AnchorMode::None {
                if self.flavor == Flavor::Standard {
                    out.push(GrammarViolation::AnchorInStandard { production: i, text: p.to_string() });
                } else if self.is_start_production(p) {
                    out.push(GrammarViolation::AnchoredStart { production: i, text: p.to_string() });
                }
            }
        }
        out
    }

    fn empty_production_violation(&self) -> Option<GrammarViolation> {
        let start_in_rhs = self.productions.iter().any(|p| p.rhs.contains(&self.start));
        (self.has_empty_production() && start_in_rhs).then_some(GrammarViolation::EmptyWithStartInRhs)
    }

    /// Non-terminals that occur in no sentential form derivable from the
    /// start symbol, by a fixpoint over productions whose left side is made
    /// of reachable symbols. Over-approximates reachability (adjacency in
    /// the left side is not checked).
    pub fn unreachable_nonterminals(&self) -> BTreeSet<Symbol> {
        let mut reachable: BTreeSet<Symbol> = [self.start.clone()].into_iter().collect();
        loop {
            let before = reachable.len();
            for p in &self.productions {
                if p.lhs.iter().all(|s| reachable.contains(s)) {
                    reachable.extend(p.rhs.iter().cloned());
                }
            }
            if reachable.len() == before {
                break;
            }
        }
        self.nonterminals.difference(&reachable).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarViolation {
    #[error("symbol {0} is both terminal and non-terminal")]
    TerminalAndNonterminal(Symbol),
    #[error("start symbol {0} is not a non-terminal")]
    StartNotNonterminal(Symbol),
    #[error("production #{production} has an empty left hand side")]
    EmptyLhs { production: usize },
    #[error("production #{production} uses undeclared symbol {symbol}")]
    UnknownSymbol { production: usize, symbol: Symbol },
    #[error("production #{production} ({text}) is not context-sensitive")]
    NotContextSensitive { production: usize, text: String },
    #[error("production #{production} ({text}) has start symbol in rhs")]
    StartInRhs { production: usize, text: String },
    #[error("production #{production} ({text}) is not growing")]
    NotGrowing { production: usize, text: String },
    #[error("empty production from the start symbol while the start symbol occurs in a rhs")]
    EmptyWithStartInRhs,
    #[error("production #{production} ({text}) is anchored but rewrites the start symbol")]
    AnchoredStart { production: usize, text: String },
    #[error("production #{production} ({text}) is anchored in a standard grammar")]
    AnchorInStandard { production: usize, text: String },
}

/// Checks every invariant of a (possibly extended) growing context-sensitive
/// grammar.
pub fn validate_grammar(g: &Grammar) -> Vec<GrammarViolation> {
    let mut out = g.structural_violations();
    for (i, p) in g.productions.iter().enumerate() {
        if p.rhs.contains(&g.start) {
            out.push(GrammarViolation::StartInRhs { production: i, text: p.to_string() });
        }
        if !g.is_start_production(p) && p.lhs.len() >= p.rhs.len() {
            out.push(GrammarViolation::NotGrowing { production: i, text: p.to_string() });
        }
    }
    out.extend(g.empty_production_violation());
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("invalid grammar: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<GrammarViolation>),
    #[error("symbol {0} is not a terminal")]
    NotTerminal(Symbol),
    #[error("max length {max_len} exceeds enumeration guard {guard}")]
    GuardExceeded { max_len: usize, guard: usize },
    #[error("search budget exceeded")]
    BudgetExceeded,
}

fn require_growing(g: &Grammar) -> Result<(), GrammarError> {
    let v = g.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(GrammarError::Invalid(v))
    }
}

/// Every word reachable from `sentential` by one production application,
/// deduplicated, in first-found order.
pub fn derive_successors(g: &Grammar, sentential: &Word) -> Vec<Word> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in &g.productions {
        for at in sentential.occurrences(&p.lhs, p.anchor) {
            let next = sentential.splice(at, p.lhs.len(), &p.rhs).expect("occurrence in range");
            if seen.insert(next.clone()) {
                out.push(next);
            }
        }
    }
    out
}

struct Compiled {
    interner: Interner,
    start: Sym,
    terminal: Vec<bool>,
}

impl Compiled {
    fn new(g: &Grammar) -> Compiled {
        let mut interner = Interner::default();
        for s in g.terminals.iter().chain(g.nonterminals.iter()) {
            interner.intern(s);
        }
        let start = interner.intern(&g.start);
        let mut terminal = vec![false; g.terminals.len() + g.nonterminals.len() + 1];
        for s in &g.terminals {
            terminal[interner.get(s).unwrap() as usize] = true;
        }
        Compiled { interner, start, terminal }
    }

    fn encode(&mut self, w: &Word) -> Vec<Sym> {
        w.iter().map(|s| self.interner.intern(s)).collect()
    }
}

/// Terminal words derivable from the start symbol, of length at most
/// `max_len`.
pub fn generate_language(g: &Grammar, max_len: usize) -> Result<BTreeSet<Word>, GrammarError> {
    generate_language_with(g, max_len, DEFAULT_ENUMERATION_GUARD, Limits::default())
}

/// Breadth-first closure from the start symbol. Sentential forms longer than
/// `max_len` are dropped: only the start production can shrink a word, and
/// only at the root. `limits.max_memo` bounds the number of stored forms.
pub fn generate_language_with(
    g: &Grammar,
    max_len: usize,
    guard: usize,
    limits: Limits,
) -> Result<BTreeSet<Word>, GrammarError> {
    if max_len > guard {
        return Err(GrammarError::GuardExceeded { max_len, guard });
    }
    require_growing(g)?;
    let mut c = Compiled::new(g);
    let productions: Vec<(Vec<Sym>, Vec<Sym>, AnchorMode)> =
        g.productions.iter().map(|p| (c.encode(&p.lhs), c.encode(&p.rhs), p.anchor)).collect();

    let root = vec![c.start];
    let mut seen: HashSet<Vec<Sym>> = HashSet::new();
    seen.insert(root.clone());
    let mut frontier = vec![root];
    let mut language = BTreeSet::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for form in &frontier {
            for (lhs, rhs, anchor) in &productions {
                if form.len() - lhs.len().min(form.len()) + rhs.len() > max_len {
                    continue;
                }
                for at in occurrences(form, lhs, *anchor) {
                    let derived = splice(form, at, lhs.len(), rhs).expect("occurrence in range");
                    debug_assert!(!derived.contains(&c.start), "start symbol re-derived");
                    if seen.contains(&derived) {
                        continue;
                    }
                    if seen.len() >= limits.max_memo {
                        return Err(GrammarError::BudgetExceeded);
                    }
                    seen.insert(derived.clone());
                    if derived.iter().all(|&s| c.terminal[s as usize]) {
                        language.insert(derived.iter().map(|&s| c.interner.symbol(s).clone()).collect::<Word>());
                    }
                    next.push(derived);
                }
            }
        }
        frontier = next;
    }
    Ok(language)
}

/// A validated grammar compiled for repeated membership queries: each
/// non-start production `u -> v` runs backwards as the length-reducing rule
/// `v -> u`, and the search succeeds on reaching the right side of a start
/// production.
pub struct Recognizer {
    compiled: Compiled,
    rules: Vec<CompiledRule>,
    targets: HashSet<Vec<Sym>>,
}

impl Recognizer {
    pub fn new(g: &Grammar) -> Result<Recognizer, GrammarError> {
        require_growing(g)?;
        let mut compiled = Compiled::new(g);
        let mut rules = Vec::new();
        let mut targets = HashSet::new();
        for p in &g.productions {
            if g.is_start_production(p) {
                targets.insert(compiled.encode(&p.rhs));
            } else {
                rules.push(CompiledRule {
                    lhs: compiled.encode(&p.rhs),
                    rhs: compiled.encode(&p.lhs),
                    anchor: p.anchor,
                });
            }
        }
        Ok(Recognizer { compiled, rules, targets })
    }

    pub fn member(&self, w: &Word, limits: Limits) -> Result<Decision, GrammarError> {
        let mut start = Vec::with_capacity(w.len());
        for s in w {
            match self.compiled.interner.get(s) {
                Some(id) if self.compiled.terminal[id as usize] => start.push(id),
                _ => return Err(GrammarError::NotTerminal(s.clone())),
            }
        }
        let sigma = self.compiled.start;
        let goal = |word: &[Sym]| self.targets.contains(word);
        let prune = |word: &[Sym]| word.contains(&sigma);
        Ok(match search::search(&self.rules, start, &goal, &prune, limits, None) {
            SearchResult::Found(moves) => Decision::Accepted(moves),
            SearchResult::Exhausted => Decision::Rejected,
            SearchResult::BudgetExceeded => Decision::BudgetExceeded,
        })
    }
}

/// Decides whether the start symbol derives `w`.
pub fn member(g: &Grammar, w: &Word, limits: Limits) -> Result<Decision, GrammarError> {
    Recognizer::new(g)?.member(w, limits)
}

/// The language up to `max_len`, computed by a membership query per
/// terminal word rather than by forward generation.
pub fn enumerate_by_membership(
    g: &Grammar,
    max_len: usize,
    guard: usize,
    limits: Limits,
) -> Result<BTreeSet<Word>, GrammarError> {
    if max_len > guard {
        return Err(GrammarError::GuardExceeded { max_len, guard });
    }
    let recognizer = Recognizer::new(g)?;
    let letters: Vec<Symbol> = g.terminals.iter().cloned().collect();
    let mut language = BTreeSet::new();
    for w in words_up_to(&letters, max_len) {
        match recognizer.member(&w, limits)? {
            Decision::Accepted(_) => {
                language.insert(w);
            }
            Decision::Rejected => {}
            Decision::BudgetExceeded => return Err(GrammarError::BudgetExceeded),
        }
    }
    Ok(language)
}
