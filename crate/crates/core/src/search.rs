//! Depth-first reduction search over interned words.
//!
//! Both the NCA decision procedure and grammar membership (which runs the
//! reversed productions) end up here.

use std::collections::{HashMap, HashSet};

use crate::nca::Move;
use crate::word::{occurrences, AnchorMode, Symbol, Word};

pub(crate) type Sym = u32;

/// Permutes the legal moves of a word before they are tried.
pub(crate) type MoveOrder<'a> = &'a mut dyn FnMut(&mut Vec<Move>);

/// Budget for a single search. Exceeding either bound is reported
/// separately from rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_expansions: usize,
    pub max_memo: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_expansions: 1_000_000, max_memo: 1_000_000 }
    }
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Interner {
    ids: HashMap<Symbol, Sym>,
    symbols: Vec<Symbol>,
}

impl Interner {
    pub fn intern(&mut self, s: &Symbol) -> Sym {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as Sym;
        self.ids.insert(s.clone(), id);
        self.symbols.push(s.clone());
        id
    }

    pub fn get(&self, s: &Symbol) -> Option<Sym> {
        self.ids.get(s).copied()
    }

    pub fn symbol(&self, id: Sym) -> &Symbol {
        &self.symbols[id as usize]
    }

    pub fn encode(&self, w: &Word) -> Result<Vec<Sym>, Symbol> {
        w.iter().map(|s| self.get(s).ok_or_else(|| s.clone())).collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub lhs: Vec<Sym>,
    pub rhs: Vec<Sym>,
    pub anchor: AnchorMode,
}

pub(crate) enum SearchResult {
    Found(Vec<Move>),
    Exhausted,
    BudgetExceeded,
}

pub(crate) fn legal_moves(rules: &[CompiledRule], word: &[Sym]) -> Vec<Move> {
    let mut moves = Vec::new();
    for (rule_index, rule) in rules.iter().enumerate() {
        for position in occurrences(word, &rule.lhs, rule.anchor) {
            moves.push(Move { rule_index, position });
        }
    }
    moves
}

pub(crate) fn apply(rules: &[CompiledRule], word: &[Sym], m: Move) -> Vec<Sym> {
    let rule = &rules[m.rule_index];
    let mut out = Vec::with_capacity(word.len() + rule.rhs.len() - rule.lhs.len());
    out.extend_from_slice(&word[..m.position]);
    out.extend_from_slice(&rule.rhs);
    out.extend_from_slice(&word[m.position + rule.lhs.len()..]);
    out
}

struct Frame {
    word: Vec<Sym>,
    moves: Vec<Move>,
    next: usize,
}

/// Exhaustive depth-first search from `start` for a word satisfying `goal`.
///
/// Every rule must be strictly length-reducing, so the search tree is finite.
/// `memo` holds every word already expanded; a word is never expanded twice.
/// `order` may permute the legal moves of each expanded word.
pub(crate) fn search(
    rules: &[CompiledRule],
    start: Vec<Sym>,
    goal: &dyn Fn(&[Sym]) -> bool,
    prune: &dyn Fn(&[Sym]) -> bool,
    limits: Limits,
    mut order: Option<MoveOrder<'_>>,
) -> SearchResult {
    if goal(&start) {
        return SearchResult::Found(Vec::new());
    }
    if prune(&start) {
        return SearchResult::Exhausted;
    }
    let mut memo: HashSet<Vec<Sym>> = HashSet::new();
    let mut expansions = 0usize;

    let expand = |word: Vec<Sym>, order: &mut Option<MoveOrder<'_>>| {
        let mut moves = legal_moves(rules, &word);
        if let Some(f) = order.as_mut() {
            f(&mut moves);
        }
        Frame { word, moves, next: 0 }
    };

    memo.insert(start.clone());
    expansions += 1;
    let mut stack = vec![expand(start, &mut order)];

    while let Some(top) = stack.last_mut() {
        if top.next >= top.moves.len() {
            stack.pop();
            continue;
        }
        let m = top.moves[top.next];
        top.next += 1;
        let child = apply(rules, &top.word, m);
        if goal(&child) {
            let path = stack.iter().map(|f| f.moves[f.next - 1]).collect();
            return SearchResult::Found(path);
        }
        if prune(&child) || memo.contains(&child) {
            continue;
        }
        if memo.len() >= limits.max_memo || expansions >= limits.max_expansions {
            return SearchResult::BudgetExceeded;
        }
        memo.insert(child.clone());
        expansions += 1;
        stack.push(expand(child, &mut order));
    }
    SearchResult::Exhausted
}
