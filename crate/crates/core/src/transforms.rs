//! Constructive conversions between grammars and Cannon's algorithms:
//! terminal elimination, removal of anchored productions, and both
//! directions between growing context-sensitive grammars and NCAs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::grammar::{Flavor, Grammar, GrammarViolation, Production};
use crate::nca::{NcaRule, NcaSystem, NcaViolation};
use crate::word::{Alphabet, AnchorMode, Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("invalid grammar: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGrammar(Vec<GrammarViolation>),
    #[error("invalid system: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSystem(Vec<NcaViolation>),
    #[error("grammar has no empty production from the start symbol")]
    MissingEmptyProduction,
    #[error("expected a standard grammar, got an extended one")]
    ExtendedInput,
    #[error("decorated symbol {0} collides with an existing symbol")]
    NameCollision(Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decoration {
    Plain,
    /// Non-terminal twin of a terminal, printed `~x`.
    Tilde,
    /// Leftmost-only copy, printed `^x`.
    CaretLeft,
    /// Rightmost-only copy, printed `x^`.
    CaretRight,
    /// Whole-word copy, printed `^x^`.
    CaretBoth,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedSymbol {
    pub base: Symbol,
    pub decoration: Decoration,
}

impl DecoratedSymbol {
    pub fn new(base: Symbol, decoration: Decoration) -> DecoratedSymbol {
        DecoratedSymbol { base, decoration }
    }

    pub fn to_symbol(&self) -> Symbol {
        let base = self.base.name();
        let name = match self.decoration {
            Decoration::Plain => return self.base.clone(),
            Decoration::Tilde => format!("~{base}"),
            Decoration::CaretLeft => format!("^{base}"),
            Decoration::CaretRight => format!("{base}^"),
            Decoration::CaretBoth => format!("^{base}^"),
        };
        Symbol::new(&name).expect("decorating a valid name keeps it valid")
    }
}

impl fmt::Display for DecoratedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_symbol())
    }
}

fn require_valid(g: &Grammar) -> Result<(), TransformError> {
    let v = g.validate();
    if v.is_empty() {
        Ok(())
    } else {
        Err(TransformError::InvalidGrammar(v))
    }
}

/// Allocates decorated names, refusing any that clash with the symbols the
/// grammar already declares.
struct Decorator<'a> {
    taken: BTreeSet<&'a Symbol>,
    made: BTreeMap<DecoratedSymbol, Symbol>,
}

impl<'a> Decorator<'a> {
    fn new(g: &'a Grammar) -> Decorator<'a> {
        Decorator { taken: g.nonterminals().iter().chain(g.terminals()).collect(), made: BTreeMap::new() }
    }

    fn get(&mut self, base: &Symbol, decoration: Decoration) -> Result<Symbol, TransformError> {
        let key = DecoratedSymbol::new(base.clone(), decoration);
        if let Some(s) = self.made.get(&key) {
            return Ok(s.clone());
        }
        let s = key.to_symbol();
        if self.taken.contains(&s) || self.made.values().any(|m| *m == s) {
            return Err(TransformError::NameCollision(s));
        }
        self.made.insert(key, s.clone());
        Ok(s)
    }
}

/// Rewrites `g` so that no production has a terminal on its left side.
///
/// Every terminal `x` gets a non-terminal twin `~x`. Each production `u -> v`
/// becomes `~u -> v'` for all 2^k words `v'` obtained by swapping any subset
/// of the k terminal occurrences of `v` for their twins.
pub fn eliminate_terminals(g: &Grammar) -> Result<Grammar, TransformError> {
    require_valid(g)?;
    let mut decorator = Decorator::new(g);
    let mut twin = BTreeMap::new();
    for x in g.terminals() {
        twin.insert(x.clone(), decorator.get(x, Decoration::Tilde)?);
    }
    let tilde = |s: &Symbol| twin.get(s).cloned().unwrap_or_else(|| s.clone());

    let mut productions = Vec::new();
    for p in g.productions() {
        let lhs: Word = p.lhs.iter().map(tilde).collect();
        let slots: Vec<usize> = p.rhs.iter().enumerate().filter(|(_, s)| twin.contains_key(*s)).map(|(i, _)| i).collect();
        for mask in 0u64..(1u64 << slots.len()) {
            let mut rhs = p.rhs.symbols().to_vec();
            for (bit, &i) in slots.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    rhs[i] = tilde(&rhs[i]);
                }
            }
            productions.push(Production::new(lhs.clone(), Word::from_symbols(rhs), p.anchor));
        }
    }
    let mut nonterminals = g.nonterminals().clone();
    nonterminals.extend(twin.into_values());
    Ok(Grammar::new(nonterminals, g.terminals().clone(), g.start().clone(), productions, g.flavor()))
}

/// The caret decorations `^w`, `w^` and `^w^`: an end symbol is decorated
/// only when it is a non-start non-terminal.
struct Carets {
    left: BTreeMap<Symbol, Symbol>,
    right: BTreeMap<Symbol, Symbol>,
    both: BTreeMap<Symbol, Symbol>,
}

impl Carets {
    fn apply(&self, w: &Word, left: bool, right: bool) -> Word {
        let mut symbols = w.symbols().to_vec();
        match symbols.len() {
            0 => {}
            1 if left && right => {
                if let Some(s) = self.both.get(&symbols[0]) {
                    symbols[0] = s.clone();
                }
            }
            n => {
                if left {
                    if let Some(s) = self.left.get(&symbols[0]) {
                        symbols[0] = s.clone();
                    }
                }
                if right {
                    if let Some(s) = self.right.get(&symbols[n - 1]) {
                        symbols[n - 1] = s.clone();
                    }
                }
            }
        }
        Word::from_symbols(symbols)
    }
}

/// Replaces anchored productions by plain ones over boundary-marked copies
/// of the non-terminals, giving a standard grammar with the same language.
///
/// Terminals are first eliminated from left sides. Then `^N`, `N^` and
/// `^N^` copies of every non-start non-terminal mark the leftmost,
/// rightmost and only symbol of a sentential form.
pub fn deanchor(g: &Grammar) -> Result<Grammar, TransformError> {
    let g = eliminate_terminals(g)?;
    let mut decorator = Decorator::new(&g);
    let mut carets = Carets { left: BTreeMap::new(), right: BTreeMap::new(), both: BTreeMap::new() };
    for n in g.nonterminals().iter().filter(|n| *n != g.start()) {
        carets.left.insert(n.clone(), decorator.get(n, Decoration::CaretLeft)?);
        carets.right.insert(n.clone(), decorator.get(n, Decoration::CaretRight)?);
        carets.both.insert(n.clone(), decorator.get(n, Decoration::CaretBoth)?);
    }

    let mut productions = Vec::new();
    for p in g.productions() {
        let (u, v) = (&p.lhs, &p.rhs);
        let mut push = |l: bool, r: bool| {
            productions.push(Production::plain(carets.apply(u, l, r), carets.apply(v, l, r)));
        };
        if g.is_start_production(p) {
            productions.push(Production::plain(u.clone(), carets.apply(v, true, true)));
            continue;
        }
        match p.anchor {
            AnchorMode::None => {
                push(false, false);
                push(true, false);
                push(false, true);
                push(true, true);
            }
            AnchorMode::Left => {
                push(true, false);
                push(true, true);
            }
            AnchorMode::Right => {
                push(false, true);
                push(true, true);
            }
            AnchorMode::Both => push(true, true),
        }
    }
    let mut nonterminals = g.nonterminals().clone();
    for family in [&carets.left, &carets.right, &carets.both] {
        nonterminals.extend(family.values().cloned());
    }
    Ok(Grammar::new(nonterminals, g.terminals().clone(), g.start().clone(), productions, Flavor::Standard))
}

/// Turns a standard growing grammar whose language contains ε into an NCA
/// with the same language: `sigma -> v` becomes the both-anchored rule
/// `v -> ε`, every other `u -> v` becomes `v -> u`, and `sigma -> ε` is
/// dropped.
///
/// Productions with the start symbol inside a longer left side can never
/// fire (the start symbol only occurs alone, at the root) and are skipped.
pub fn gcsg_to_nca(g: &Grammar) -> Result<NcaSystem, TransformError> {
    require_valid(g)?;
    if g.flavor() == Flavor::Extended {
        return Err(TransformError::ExtendedInput);
    }
    if !g.has_empty_production() {
        return Err(TransformError::MissingEmptyProduction);
    }
    let sigma = g.start();
    let working: BTreeSet<Symbol> = g.terminals().iter().chain(g.nonterminals()).filter(|s| *s != sigma).cloned().collect();
    let mut rules = Vec::new();
    for p in g.productions() {
        if g.is_start_production(p) {
            if !p.rhs.is_empty() {
                rules.push(NcaRule::new(p.rhs.clone(), Word::empty(), AnchorMode::Both));
            }
        } else if !p.lhs.contains(sigma) {
            rules.push(NcaRule::new(p.rhs.clone(), p.lhs.clone(), AnchorMode::None));
        }
    }
    let sys = NcaSystem::new(Alphabet::new(g.terminals().clone(), working), rules);
    let violations = sys.validate();
    if !violations.is_empty() {
        return Err(TransformError::InvalidSystem(violations));
    }
    Ok(sys)
}

fn fresh_start(taken: &BTreeSet<Symbol>) -> Symbol {
    std::iter::once("S".to_string())
        .chain((0..).map(|i| format!("S{i}")))
        .map(|name| Symbol::new(&name).expect("valid name"))
        .find(|s| !taken.contains(s))
        .expect("unbounded supply of names")
}

/// The extended grammar read off an NCA by reversing its rules.
///
/// Rules `v -> u` with `u` non-empty reverse to `u -> v` with the same
/// anchor. An erasing rule `v -> ε` becomes `sigma -> v`, plus insertion
/// productions next to any working symbol `x`: `x -> xv` and `x -> vx` when
/// unanchored, only `x -> vx` (left-anchored) or only `x -> xv`
/// (right-anchored) when anchored on one side, and nothing more when anchored
/// on both.
pub fn nca_to_extended_gcsg(sys: &NcaSystem) -> Result<Grammar, TransformError> {
    let violations = sys.validate();
    if !violations.is_empty() {
        return Err(TransformError::InvalidSystem(violations));
    }
    let working = &sys.alphabet().working;
    let sigma = fresh_start(working);
    let mut nonterminals: BTreeSet<Symbol> = working.difference(sys.terminals()).cloned().collect();
    nonterminals.insert(sigma.clone());
    let start = Word::from_symbols(vec![sigma.clone()]);

    let mut productions = vec![Production::plain(start.clone(), Word::empty())];
    for rule in sys.rules() {
        let v = &rule.lhs;
        if !rule.rhs.is_empty() {
            productions.push(Production::new(rule.rhs.clone(), v.clone(), rule.anchor));
            continue;
        }
        for x in working {
            let x = Word::from_symbols(vec![x.clone()]);
            match rule.anchor {
                AnchorMode::None => {
                    productions.push(Production::plain(x.clone(), x.concat(v)));
                    productions.push(Production::plain(x.clone(), v.concat(&x)));
                }
                AnchorMode::Left => productions.push(Production::new(x.clone(), v.concat(&x), AnchorMode::Left)),
                AnchorMode::Right => productions.push(Production::new(x.clone(), x.concat(v), AnchorMode::Right)),
                AnchorMode::Both => {}
            }
        }
        productions.push(Production::plain(start.clone(), v.clone()));
    }
    let g = Grammar::new(nonterminals, sys.terminals().clone(), sigma, productions, Flavor::Extended);
    require_valid(&g)?;
    Ok(g)
}

/// [`nca_to_extended_gcsg`] followed by [`deanchor`].
pub fn nca_to_gcsg(sys: &NcaSystem) -> Result<Grammar, TransformError> {
    deanchor(&nca_to_extended_gcsg(sys)?)
}
