//! Reduction histories and their diagrams.
//!
//! A history is a start word plus the substitutions performed on it. Every
//! letter that ever appears gets a provenance-based [`LetterId`], so the same
//! letter keeps its identity when independent substitutions are reordered.
//! The diagram geometry (widths, generations, horizontal intervals) is exact
//! rational arithmetic.
//!
//! Two substitutions are ordered by the precedence relation when one must
//! happen before the other in every equivalent reduction: their substitution
//! lines overlap horizontally, or the later one is anchored and the earlier
//! one lies on its anchored side. Substitutions that are not ordered this way
//! can be swapped freely; the canonical history performs them left first.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::nca::{apply_move, Move, NcaError, NcaSystem};
use crate::word::{Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("step {step}: {source}")]
    IllegalStep { step: usize, source: NcaError },
    #[error("events {0} and {1} are comparable and cannot be swapped")]
    NotSwappable(usize, usize),
    #[error("event index {0} out of range")]
    OutOfRange(usize),
    #[error("event sets overlap at event {0}")]
    SetsOverlap(usize),
    #[error("events {0} and {1} are comparable")]
    ComparableSets(usize, usize),
    #[error("order is not a permutation of the events")]
    BadPermutation,
}

/// Identity of a letter by provenance: initial letter `i` is `[i]`; the
/// `k`-th letter produced by a substitution whose leftmost consumed letter
/// is `p` is `p ++ [k]`. Each letter is consumed at most once, so this is
/// unique within a history and invariant under swaps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LetterId(Vec<u32>);

impl LetterId {
    pub fn initial(index: usize) -> LetterId {
        LetterId(vec![index as u32])
    }

    fn child(&self, k: usize) -> LetterId {
        let mut path = self.0.clone();
        path.push(k as u32);
        LetterId(path)
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for LetterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubstitutionEvent {
    pub step: usize,
    pub rule_index: usize,
    pub position: usize,
    pub consumed: Vec<LetterId>,
    pub produced: Vec<LetterId>,
}

impl SubstitutionEvent {
    /// Swap-invariant identity of the substitution.
    pub fn key(&self) -> &LetterId {
        &self.consumed[0]
    }

    pub fn as_move(&self) -> Move {
        Move::new(self.rule_index, self.position)
    }
}

/// A start word and the substitutions applied to it, in time order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    system: Arc<NcaSystem>,
    start: Word,
    events: Vec<SubstitutionEvent>,
}

impl History {
    /// Replays `moves` from `start`, checking every step.
    pub fn new(system: Arc<NcaSystem>, start: Word, moves: &[Move]) -> Result<History, HistoryError> {
        let mut word = start.clone();
        let mut row: Vec<LetterId> = (0..start.len()).map(LetterId::initial).collect();
        let mut events = Vec::with_capacity(moves.len());
        for (step, &m) in moves.iter().enumerate() {
            let next = apply_move(&system, &word, m).map_err(|source| HistoryError::IllegalStep { step, source })?;
            let rule = &system.rules()[m.rule_index];
            let consumed: Vec<LetterId> = row[m.position..m.position + rule.lhs.len()].to_vec();
            let produced: Vec<LetterId> = (0..rule.rhs.len()).map(|k| consumed[0].child(k)).collect();
            row.splice(m.position..m.position + rule.lhs.len(), produced.iter().cloned());
            events.push(SubstitutionEvent { step, rule_index: m.rule_index, position: m.position, consumed, produced });
            word = next;
        }
        Ok(History { system, start, events })
    }

    pub fn system(&self) -> &Arc<NcaSystem> {
        &self.system
    }

    pub fn start(&self) -> &Word {
        &self.start
    }

    pub fn events(&self) -> &[SubstitutionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn moves(&self) -> Vec<Move> {
        self.events.iter().map(SubstitutionEvent::as_move).collect()
    }

    /// The rows `w_0, ..., w_n`.
    pub fn words(&self) -> Vec<Word> {
        let mut out = vec![self.start.clone()];
        for e in &self.events {
            let next = apply_move(&self.system, out.last().unwrap(), e.as_move()).expect("history replays");
            out.push(next);
        }
        out
    }

    pub fn end_word(&self) -> Word {
        self.words().pop().unwrap()
    }

    /// The same substitutions performed in a new order: `order[t]` is the
    /// old index of the event performed at time `t`.
    pub fn reordered(&self, order: &[usize]) -> Result<History, HistoryError> {
        let mut seen = vec![false; self.events.len()];
        if order.len() != self.events.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(HistoryError::BadPermutation);
        }
        let mut row: Vec<LetterId> = (0..self.start.len()).map(LetterId::initial).collect();
        let mut moves = Vec::with_capacity(order.len());
        for (step, &i) in order.iter().enumerate() {
            let e = &self.events[i];
            let position = row.iter().position(|l| l == e.key());
            let Some(position) = position.filter(|&p| row[p..].starts_with(&e.consumed)) else {
                return Err(HistoryError::IllegalStep { step, source: NcaError::IllegalMove(e.as_move()) });
            };
            row.splice(position..position + e.consumed.len(), e.produced.iter().cloned());
            moves.push(Move::new(e.rule_index, position));
        }
        History::new(self.system.clone(), self.start.clone(), &moves)
    }
}

/// Half-open horizontal extent `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: BigRational,
    pub end: BigRational,
}

impl Interval {
    pub fn new(start: BigRational, end: BigRational) -> Interval {
        Interval { start, end }
    }

    pub fn len(&self) -> BigRational {
        &self.end - &self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps_interior(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Entirely to the left, possibly touching at an endpoint.
    pub fn lies_left_of(&self, other: &Interval) -> bool {
        self.end <= other.start
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    pub id: LetterId,
    pub symbol: Symbol,
    pub width: BigRational,
    pub generation: u32,
    pub interval: Interval,
}

/// Diagram geometry of a history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    /// Every letter that ever appears.
    pub letters: BTreeMap<LetterId, Letter>,
    /// Letters of each row `w_0 .. w_n`, left to right.
    pub rows: Vec<Vec<LetterId>>,
    /// Substitution line of each event.
    pub lines: Vec<Interval>,
    /// Length of the start word; the diagram spans `[0, total)`.
    pub total: BigRational,
}

impl Geometry {
    pub fn row_width(&self, t: usize) -> BigRational {
        self.rows[t].iter().map(|id| self.letters[id].width.clone()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// Measure of the part of `[0, total)` not covered by row `t`.
    pub fn uncovered_width(&self, t: usize) -> BigRational {
        let mut uncovered = BigRational::zero();
        let mut cursor = BigRational::zero();
        for id in &self.rows[t] {
            let iv = &self.letters[id].interval;
            uncovered += &iv.start - &cursor;
            cursor = iv.end.clone();
        }
        uncovered + (&self.total - cursor)
    }

    /// Whether the letters of row `t` are laid out left to right without
    /// overlap inside `[0, total)`, each as wide as its interval.
    pub fn row_is_well_formed(&self, t: usize) -> bool {
        let mut cursor = BigRational::zero();
        for id in &self.rows[t] {
            let l = &self.letters[id];
            if l.interval.start < cursor || l.interval.len() != l.width || l.width <= BigRational::zero() {
                return false;
            }
            cursor = l.interval.end.clone();
        }
        cursor <= self.total
    }
}

fn rat(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Widths, generations and intervals of every letter, and the substitution
/// line of every event.
///
/// Initial letters have width 1 and generation 0. A substitution line runs
/// from the left end of the first consumed letter to the right end of the
/// last; the produced letters split it into equal parts and have generation
/// one more than the oldest-generation consumed letter.
pub fn geometry(h: &History) -> Geometry {
    let mut letters = BTreeMap::new();
    let mut row = Vec::with_capacity(h.start.len());
    for (i, s) in h.start.iter().enumerate() {
        let id = LetterId::initial(i);
        letters.insert(
            id.clone(),
            Letter { id: id.clone(), symbol: s.clone(), width: BigRational::one(), generation: 0, interval: Interval::new(rat(i), rat(i + 1)) },
        );
        row.push(id);
    }
    let mut rows = vec![row.clone()];
    let mut lines = Vec::with_capacity(h.events.len());
    for e in &h.events {
        let first: &Letter = &letters[&e.consumed[0]];
        let last: &Letter = &letters[e.consumed.last().unwrap()];
        let line = Interval::new(first.interval.start.clone(), last.interval.end.clone());
        let generation = 1 + e.consumed.iter().map(|id| letters[id].generation).max().unwrap();
        let rhs = &h.system.rules()[e.rule_index].rhs;
        if !e.produced.is_empty() {
            let width = line.len() / rat(e.produced.len());
            for (k, (id, s)) in e.produced.iter().zip(rhs.iter()).enumerate() {
                let start = &line.start + &width * rat(k);
                let end = &start + &width;
                letters.insert(
                    id.clone(),
                    Letter { id: id.clone(), symbol: s.clone(), width: width.clone(), generation, interval: Interval::new(start, end) },
                );
            }
        }
        row.splice(e.position..e.position + e.consumed.len(), e.produced.iter().cloned());
        rows.push(row.clone());
        lines.push(line);
    }
    Geometry { letters, rows, lines, total: rat(h.start.len()) }
}

/// The precedence partial order on the events of one history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precedence {
    /// `closure[i][j]` iff event `i` precedes event `j`.
    closure: Vec<Vec<bool>>,
    /// The generating pairs `(earlier, later)`.
    edges: Vec<(usize, usize)>,
    lines: Vec<Interval>,
    rules: Vec<usize>,
}

impl Precedence {
    pub fn len(&self) -> usize {
        self.closure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.is_empty()
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.closure[a][b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.closure[a][b] || self.closure[b][a]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn line(&self, i: usize) -> &Interval {
        &self.lines[i]
    }

    /// For incomparable `a` and `b`, whether `a` lies to the left of `b`
    /// (by line start, then rule index). `None` when comparable.
    pub fn lies_left_of(&self, a: usize, b: usize) -> Option<bool> {
        if self.comparable(a, b) {
            return None;
        }
        Some(self.left_key(a) < self.left_key(b))
    }

    fn left_key(&self, i: usize) -> (&BigRational, usize) {
        (&self.lines[i].start, self.rules[i])
    }

    /// Every incomparable pair `(a, b)` with `a < b`, tagged with whichever
    /// of the two lies to the left.
    pub fn incomparable_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if let Some(a_left) = self.lies_left_of(a, b) {
                    out.push((a, b, if a_left { a } else { b }));
                }
            }
        }
        out
    }
}

pub fn precedence(h: &History) -> Precedence {
    let g = geometry(h);
    let n = h.events.len();
    let anchors: Vec<_> = h.events.iter().map(|e| h.system.rules()[e.rule_index].anchor).collect();
    let mut edges = Vec::new();
    for (j, anchor) in anchors.iter().enumerate() {
        for i in 0..j {
            let (li, lj) = (&g.lines[i], &g.lines[j]);
            let ordered = li.overlaps_interior(lj)
                || (anchor.anchors_left() && li.lies_left_of(lj))
                || (anchor.anchors_right() && lj.lies_left_of(li));
            if ordered {
                edges.push((i, j));
            }
        }
    }
    let mut closure = vec![vec![false; n]; n];
    for &(i, j) in &edges {
        closure[i][j] = true;
    }
    // edges only go forward in time, so one backwards sweep closes them
    for j in 0..n {
        for i in (0..j).rev() {
            if closure[i][j] {
                continue;
            }
            closure[i][j] = (i + 1..j).any(|k| closure[i][k] && closure[k][j]);
        }
    }
    let rules = h.events.iter().map(|e| e.rule_index).collect();
    Precedence { closure, edges, lines: g.lines, rules }
}

/// Performs events `i` and `i + 1` in the opposite order.
pub fn swap_adjacent(h: &History, i: usize) -> Result<History, HistoryError> {
    if i + 1 >= h.events.len() {
        return Err(HistoryError::OutOfRange(i + 1));
    }
    if precedence(h).comparable(i, i + 1) {
        return Err(HistoryError::NotSwappable(i, i + 1));
    }
    let mut order: Vec<usize> = (0..h.events.len()).collect();
    order.swap(i, i + 1);
    h.reordered(&order)
}

/// An equivalent history together with the adjacent swaps that produced it
/// (each entry `i` swaps the events at times `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reordering {
    pub history: History,
    pub swaps: Vec<usize>,
}

struct Swapper {
    history: History,
    swaps: Vec<usize>,
}

impl Swapper {
    fn swap(&mut self, i: usize) -> Result<(), HistoryError> {
        self.history = swap_adjacent(&self.history, i)?;
        self.swaps.push(i);
        Ok(())
    }

    fn index_of(&self, key: &LetterId) -> usize {
        self.history.events.iter().position(|e| e.key() == key).expect("event keys survive swaps")
    }

    /// Given incomparable events `a` before `b`, moves `a` after `b`.
    ///
    /// While some precedence-ancestor of `b` happens between them, the
    /// earliest such ancestor `c` is bubbled back past `a` (nothing between
    /// `a` and `c` is an ancestor of `c`, and `a` cannot precede `c`).
    /// Then `b` is bubbled back until it sits right after `a`, and the two
    /// are exchanged.
    fn move_after(&mut self, a: &LetterId, b: &LetterId) -> Result<(), HistoryError> {
        loop {
            let (ia, ib) = (self.index_of(a), self.index_of(b));
            let prec = precedence(&self.history);
            match (ia + 1..ib).find(|&c| prec.precedes(c, ib)) {
                Some(ic) => {
                    for k in (ia..ic).rev() {
                        self.swap(k)?;
                    }
                }
                None => {
                    for k in (ia + 1..ib).rev() {
                        self.swap(k)?;
                    }
                    return self.swap(ia);
                }
            }
        }
    }
}

/// An equivalent history in which every event of `first` happens before
/// every event of `second`. Indices refer to event times in `h`; no event of
/// one set may be comparable with an event of the other.
pub fn reorder_before(h: &History, first: &BTreeSet<usize>, second: &BTreeSet<usize>) -> Result<Reordering, HistoryError> {
    let n = h.events.len();
    if let Some(&i) = first.iter().chain(second).find(|&&i| i >= n) {
        return Err(HistoryError::OutOfRange(i));
    }
    if let Some(&i) = first.intersection(second).next() {
        return Err(HistoryError::SetsOverlap(i));
    }
    let prec = precedence(h);
    for &a in first {
        if let Some(&b) = second.iter().find(|&&b| prec.comparable(a, b)) {
            return Err(HistoryError::ComparableSets(a, b));
        }
    }
    let first_keys: BTreeSet<LetterId> = first.iter().map(|&i| h.events[i].key().clone()).collect();
    let second_keys: BTreeSet<LetterId> = second.iter().map(|&i| h.events[i].key().clone()).collect();

    let mut swapper = Swapper { history: h.clone(), swaps: Vec::new() };
    loop {
        let keys: Vec<&LetterId> = swapper.history.events.iter().map(SubstitutionEvent::key).collect();
        let inversion = keys.iter().enumerate().filter(|(_, k)| second_keys.contains(**k)).find_map(|(ia, _)| {
            keys[ia + 1..].iter().find(|k| first_keys.contains(**k)).map(|kb| (keys[ia].clone(), (*kb).clone()))
        });
        match inversion {
            Some((a, b)) => swapper.move_after(&a, &b)?,
            None => break,
        }
    }
    Ok(Reordering { history: swapper.history, swaps: swapper.swaps })
}

/// The equivalent history in which incomparable events are performed left
/// first: a topological sort of the precedence order that always takes the
/// leftmost available event.
pub fn canonicalize(h: &History) -> History {
    let prec = precedence(h);
    let n = h.events.len();
    let mut indegree: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| prec.precedes(i, j)).count()).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&i| !done[i] && indegree[i] == 0)
            .min_by(|&a, &b| prec.left_key(a).cmp(&prec.left_key(b)))
            .expect("precedence is acyclic");
        done[next] = true;
        order.push(next);
        for (j, d) in indegree.iter_mut().enumerate() {
            if prec.precedes(next, j) {
                *d -= 1;
            }
        }
    }
    h.reordered(&order).expect("linear extensions of the precedence order replay")
}

/// Same system, same start word, and the same canonical form.
pub fn equivalent(h1: &History, h2: &History) -> bool {
    h1.system == h2.system
        && h1.start == h2.start
        && h1.events.len() == h2.events.len()
        && canonicalize(h1).moves() == canonicalize(h2).moves()
}

/// Rows of letters with their intervals, and a line under each row naming
/// the substitution applied to it.
pub fn render_diagram(h: &History) -> String {
    let g = geometry(h);
    let mut out = String::new();
    for (t, row) in g.rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|id| format!("{}{}", g.letters[id].symbol, g.letters[id].interval)).collect();
        let shown = if cells.is_empty() { "_".to_string() } else { cells.join(" ") };
        let _ = writeln!(out, "{t:>3}: {shown}");
        if let Some(e) = h.events.get(t) {
            let rule = &h.system.rules()[e.rule_index];
            let _ = writeln!(out, "     -- rule#{} ({}) @{} line {}", e.rule_index, rule, e.position, g.lines[t]);
        }
    }
    out
}

/// Event keys mapped to their line intervals; swap-invariant.
pub fn lines_by_key(h: &History) -> HashMap<LetterId, Interval> {
    let g = geometry(h);
    h.events.iter().zip(g.lines).map(|(e, l)| (e.key().clone(), l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nca::NcaRule;
    use crate::word::{Alphabet, AnchorMode};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn rule(lhs: &str, rhs: &str) -> NcaRule {
        NcaRule::new(w(lhs), w(rhs), AnchorMode::None)
    }

    fn system(working: &str, rules: Vec<NcaRule>) -> Arc<NcaSystem> {
        let set: BTreeSet<Symbol> = w(working).into_symbols().into_iter().collect();
        Arc::new(NcaSystem::new(Alphabet::new(set.clone(), set), rules))
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> Interval {
        Interval::new(r(a.0, a.1), r(b.0, b.1))
    }

    fn moves(list: &[(usize, usize)]) -> Vec<Move> {
        list.iter().map(|&(r, p)| Move::new(r, p)).collect()
    }

    #[test]
    fn geometry_examples() {
        let sys = system("a b", vec![rule("a b", "_")]);
        let h = History::new(sys, w("a b a b"), &moves(&[(0, 0)])).unwrap();
        let g = geometry(&h);
        let consumed = &h.events()[0].consumed;
        assert_eq!(g.letters[&consumed[0]].interval, iv((0, 1), (1, 1)));
        assert_eq!(g.letters[&consumed[1]].interval, iv((1, 1), (2, 1)));
        assert_eq!(g.lines[0], iv((0, 1), (2, 1)));

        let sys = system("a b T", vec![rule("a b", "T")]);
        let h = History::new(sys, w("a a b b"), &moves(&[(0, 1)])).unwrap();
        let g = geometry(&h);
        let t = &g.letters[&h.events()[0].produced[0]];
        assert_eq!((t.width.clone(), t.interval.clone(), t.generation), (r(2, 1), iv((1, 1), (3, 1)), 1));

        let sys = system("a b c d e", vec![rule("a b c", "d e")]);
        let h = History::new(sys, w("a b c"), &moves(&[(0, 0)])).unwrap();
        let g = geometry(&h);
        for id in &h.events()[0].produced {
            assert_eq!(g.letters[id].width, r(3, 2));
        }
        assert_eq!(g.row_width(1), r(3, 1));
    }

    #[test]
    fn erased_gap_is_spanned_by_later_line() {
        let sys = system("a b c d", vec![rule("b", "_"), rule("a c", "d")]);
        let h = History::new(sys, w("a b c"), &moves(&[(0, 1), (1, 0)])).unwrap();
        let g = geometry(&h);
        assert_eq!(g.lines[1], iv((0, 1), (3, 1)));
        assert_eq!(g.row_width(1) + g.uncovered_width(1), r(3, 1));
        assert_eq!(g.uncovered_width(1), r(1, 1));
        assert_eq!(g.uncovered_width(2), r(0, 1));
        // the erasure made `a c` adjacent, so it must come first
        assert!(precedence(&h).precedes(0, 1));
        assert!(swap_adjacent(&h, 0).is_err());
    }

    #[test]
    fn precedence_examples() {
        let sys = system("a b", vec![rule("a b", "_")]);
        let h = History::new(sys, w("a b a b"), &moves(&[(0, 0), (0, 0)])).unwrap();
        let p = precedence(&h);
        assert!(!p.comparable(0, 1));
        assert_eq!(p.lies_left_of(0, 1), Some(true));
        assert_eq!(p.incomparable_pairs(), vec![(0, 1, 0)]);

        let sys = system("a b T c", vec![rule("a b", "T"), rule("T b", "c")]);
        let h = History::new(sys, w("a b b"), &moves(&[(0, 0), (1, 0)])).unwrap();
        let p = precedence(&h);
        assert!(p.precedes(0, 1));
        assert_eq!(p.edges(), &[(0, 1)]);
        assert_eq!(p.lies_left_of(0, 1), None);

        let sys = system("a b c d e", vec![rule("a b", "c"), rule("c c", "d"), rule("d", "_")]);
        let h = History::new(sys, w("a b c"), &moves(&[(0, 0), (1, 0), (2, 0)])).unwrap();
        let p = precedence(&h);
        assert!(p.precedes(0, 1) && p.precedes(1, 2) && p.precedes(0, 2));
        assert!(p.incomparable_pairs().is_empty());
    }

    #[test]
    fn anchored_events_wait_for_their_side() {
        let set: BTreeSet<Symbol> = w("a b x").into_symbols().into_iter().collect();
        let sys = Arc::new(NcaSystem::new(
            Alphabet::new(set.clone(), set),
            vec![rule("a b", "_"), NcaRule::new(w("x"), w("_"), AnchorMode::Left)],
        ));
        let h = History::new(sys, w("a b x"), &moves(&[(0, 0), (1, 0)])).unwrap();
        let p = precedence(&h);
        assert!(p.precedes(0, 1));
        assert!(matches!(swap_adjacent(&h, 0), Err(HistoryError::NotSwappable(0, 1))));
    }

    #[test]
    fn swap_matches_commuting_square() {
        let sys = system("x u y u2 z v v2", vec![rule("u u", "v"), rule("u2 u2", "v2")]);
        let start = w("x u u y u2 u2 z");
        let h1 = History::new(sys.clone(), start.clone(), &moves(&[(0, 1), (1, 3)])).unwrap();
        assert_eq!(h1.words()[1], w("x v y u2 u2 z"));
        let h2 = swap_adjacent(&h1, 0).unwrap();
        assert_eq!(h2.moves(), moves(&[(1, 4), (0, 1)]));
        assert_eq!(h2.words()[1], w("x u u y v2 z"));
        assert_eq!(h1.end_word(), w("x v y v2 z"));
        assert_eq!(h2.end_word(), h1.end_word());
        assert_eq!(geometry(&h1).letters, geometry(&h2).letters);
        assert_eq!(lines_by_key(&h1), lines_by_key(&h2));
        assert!(equivalent(&h1, &h2));
        assert_eq!(swap_adjacent(&h2, 0).unwrap(), h1);
        assert!(matches!(swap_adjacent(&h1, 1), Err(HistoryError::OutOfRange(2))));
    }

    #[test]
    fn dependent_pair_cannot_swap() {
        let sys = system("a b T c", vec![rule("a b", "T"), rule("T b", "c")]);
        let h = History::new(sys, w("a b b"), &moves(&[(0, 0), (1, 0)])).unwrap();
        assert_eq!(swap_adjacent(&h, 0), Err(HistoryError::NotSwappable(0, 1)));
    }

    #[test]
    fn reorder_two_independent_events() {
        let sys = system("a b", vec![rule("a b", "_")]);
        // right pair first, then left pair
        let h = History::new(sys, w("a b a b"), &moves(&[(0, 2), (0, 0)])).unwrap();
        let out = reorder_before(&h, &[1].into(), &[0].into()).unwrap();
        assert_eq!(out.swaps, vec![0]);
        assert_eq!(out.history.moves(), moves(&[(0, 0), (0, 0)]));
        let same = reorder_before(&out.history, &[0].into(), &[1].into()).unwrap();
        assert!(same.swaps.is_empty());
        assert_eq!(same.history, out.history);
    }

    #[test]
    fn reorder_hoists_blocking_ancestor_first() {
        // s1: c d -> ε, s3: a b -> T, s2: T x -> ε with s3 ≺ s2
        let sys = system("a b c d x T", vec![rule("c d", "_"), rule("a b", "T"), rule("T x", "_")]);
        let h = History::new(sys, w("c d a b x"), &moves(&[(0, 0), (1, 0), (2, 0)])).unwrap();
        let p = precedence(&h);
        assert!(p.precedes(1, 2) && !p.comparable(0, 2) && !p.comparable(0, 1));
        let out = reorder_before(&h, &[2].into(), &[0].into()).unwrap();
        assert_eq!(out.swaps, vec![0, 1]);
        assert_eq!(out.history.words(), vec![w("c d a b x"), w("c d T x"), w("c d"), w("_")]);
        let mut replay = h.clone();
        for &i in &out.swaps {
            replay = swap_adjacent(&replay, i).unwrap();
        }
        assert_eq!(replay, out.history);
    }

    #[test]
    fn reorder_rejects_bad_sets() {
        let sys = system("a b T c", vec![rule("a b", "T"), rule("T b", "c")]);
        let h = History::new(sys, w("a b b"), &moves(&[(0, 0), (1, 0)])).unwrap();
        assert_eq!(reorder_before(&h, &[1].into(), &[0].into()), Err(HistoryError::ComparableSets(1, 0)));
        assert_eq!(reorder_before(&h, &[0].into(), &[0].into()), Err(HistoryError::SetsOverlap(0)));
        assert_eq!(reorder_before(&h, &[5].into(), &[0].into()), Err(HistoryError::OutOfRange(5)));
    }

    #[test]
    fn canonical_form_reduces_left_first() {
        let sys = system("a b", vec![rule("a b", "_")]);
        let h = History::new(sys, w("a b a b"), &moves(&[(0, 2), (0, 0)])).unwrap();
        let c = canonicalize(&h);
        assert_eq!(c.moves(), moves(&[(0, 0), (0, 0)]));
        assert_eq!(canonicalize(&c), c);
        assert!(equivalent(&h, &c));
    }

    #[test]
    fn equivalence_negative_cases() {
        let sys = system("a b c", vec![rule("a b", "_"), rule("a b", "c"), rule("c", "_")]);
        let h1 = History::new(sys.clone(), w("a b"), &moves(&[(0, 0)])).unwrap();
        let h2 = History::new(sys.clone(), w("a b"), &moves(&[(1, 0), (2, 0)])).unwrap();
        assert_eq!(h1.end_word(), h2.end_word());
        assert!(!equivalent(&h1, &h2));
        let h3 = History::new(sys, w("a b"), &moves(&[(1, 0)])).unwrap();
        assert!(!equivalent(&h2, &h3));
    }

    #[test]
    fn reordered_rejects_non_permutations() {
        let sys = system("a b", vec![rule("a b", "_")]);
        let h = History::new(sys, w("a b a b"), &moves(&[(0, 2), (0, 0)])).unwrap();
        assert_eq!(h.reordered(&[0, 0]), Err(HistoryError::BadPermutation));
        assert_eq!(h.reordered(&[0]), Err(HistoryError::BadPermutation));
        assert_eq!(h.reordered(&[1, 2]), Err(HistoryError::BadPermutation));
    }

    #[test]
    fn illegal_history_is_rejected() {
        let sys = system("a b", vec![rule("a b", "_")]);
        let err = History::new(sys, w("a b"), &moves(&[(0, 0), (0, 0)])).unwrap_err();
        assert!(matches!(err, HistoryError::IllegalStep { step: 1, .. }));
    }

    #[test]
    fn diagram_lists_rows_and_lines() {
        let sys = system("a b T", vec![rule("a b", "T")]);
        let h = History::new(sys, w("a a b b"), &moves(&[(0, 1)])).unwrap();
        let d = render_diagram(&h);
        assert!(d.contains("0: a[0,1) a[1,2) b[2,3) b[3,4)"), "{d}");
        assert!(d.contains("rule#0 (a b -> T) @1 line [1,3)"), "{d}");
        assert!(d.contains("1: a[0,1) T[1,3) b[3,4)"), "{d}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::rngs::StdRng;
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};

        const LETTERS: [&str; 3] = ["a", "b", "c"];

        fn anchor_strategy() -> impl Strategy<Value = AnchorMode> {
            prop_oneof![
                6 => Just(AnchorMode::None),
                1 => Just(AnchorMode::Left),
                1 => Just(AnchorMode::Right),
                1 => Just(AnchorMode::Both),
            ]
        }

        fn rule_strategy() -> impl Strategy<Value = NcaRule> {
            (1usize..=3).prop_flat_map(|n| {
                (proptest::collection::vec(0..3usize, n), proptest::collection::vec(0..3usize, 0..n), anchor_strategy())
                    .prop_map(|(l, r, a)| {
                        let word = |v: Vec<usize>| Word::from_symbols(v.into_iter().map(|i| Symbol::new(LETTERS[i]).unwrap()).collect());
                        NcaRule::new(word(l), word(r), a)
                    })
            })
        }

        /// A random reduction of a random word, as long as moves are available.
        fn history_strategy() -> impl Strategy<Value = History> {
            (proptest::collection::vec(rule_strategy(), 1..5), proptest::collection::vec(0..3usize, 0..10), any::<u64>()).prop_map(
                |(rules, start, seed)| {
                    let sys = system("a b c", rules);
                    let start = Word::from_symbols(start.into_iter().map(|i| Symbol::new(LETTERS[i]).unwrap()).collect());
                    let mut rng = StdRng::seed_from_u64(seed);
                    let mut word = start.clone();
                    let mut ms = Vec::new();
                    loop {
                        let legal = crate::nca::legal_moves(&sys, &word);
                        let Some(&m) = legal.choose(&mut rng) else { break };
                        word = apply_move(&sys, &word, m).unwrap();
                        ms.push(m);
                    }
                    History::new(sys, start, &ms).unwrap()
                },
            )
        }

        fn random_linear_extension(p: &Precedence, rng: &mut StdRng) -> Vec<usize> {
            let n = p.len();
            let mut done = vec![false; n];
            let mut order = Vec::new();
            while order.len() < n {
                let ready: Vec<usize> = (0..n).filter(|&j| !done[j] && (0..n).all(|i| done[i] || !p.precedes(i, j))).collect();
                let j = *ready.choose(rng).unwrap();
                done[j] = true;
                order.push(j);
            }
            order
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn every_linear_extension_replays(h in history_strategy(), seed in any::<u64>()) {
                let p = precedence(&h);
                let mut rng = StdRng::seed_from_u64(seed);
                let order = random_linear_extension(&p, &mut rng);
                let h2 = h.reordered(&order).unwrap();
                prop_assert_eq!(h2.end_word(), h.end_word());
                prop_assert_eq!(geometry(&h2).letters, geometry(&h).letters);
                prop_assert_eq!(lines_by_key(&h2), lines_by_key(&h));
                prop_assert!(equivalent(&h, &h2));
            }

            #[test]
            fn swap_walks_stay_equivalent(h in history_strategy(), seed in any::<u64>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let canonical = canonicalize(&h);
                let mut cur = h.clone();
                for _ in 0..20 {
                    if cur.len() < 2 { break; }
                    let i = rng.gen_range(0..cur.len() - 1);
                    match swap_adjacent(&cur, i) {
                        Ok(next) => {
                            prop_assert_eq!(swap_adjacent(&next, i).unwrap(), cur.clone());
                            cur = next;
                        }
                        Err(e) => {
                            prop_assert_eq!(e, HistoryError::NotSwappable(i, i + 1));
                            prop_assert!(precedence(&cur).comparable(i, i + 1));
                        }
                    }
                }
                prop_assert_eq!(canonicalize(&cur), canonical);
            }

            #[test]
            fn canonical_form_is_idempotent_and_leftmost(h in history_strategy()) {
                let c = canonicalize(&h);
                prop_assert_eq!(canonicalize(&c), c.clone());
                let p = precedence(&c);
                for i in 0..c.len().saturating_sub(1) {
                    if !p.comparable(i, i + 1) {
                        prop_assert_eq!(p.lies_left_of(i, i + 1), Some(true));
                    }
                }
            }

            #[test]
            fn incomparable_lines_are_disjoint(h in history_strategy()) {
                let p = precedence(&h);
                for (a, b, left) in p.incomparable_pairs() {
                    prop_assert!(!p.line(a).overlaps_interior(p.line(b)));
                    let right = if left == a { b } else { a };
                    prop_assert!(p.line(left).start <= p.line(right).start);
                }
            }

            #[test]
            fn width_is_conserved(h in history_strategy()) {
                let g = geometry(&h);
                let erasing = h.events().iter().any(|e| e.produced.is_empty());
                for t in 0..g.rows.len() {
                    prop_assert!(g.row_is_well_formed(t));
                    prop_assert_eq!(g.row_width(t) + g.uncovered_width(t), g.total.clone());
                    if !erasing {
                        prop_assert_eq!(g.row_width(t), g.total.clone());
                    }
                }
            }

            #[test]
            fn reorder_puts_first_set_first(h in history_strategy(), seed in any::<u64>()) {
                let p = precedence(&h);
                let mut rng = StdRng::seed_from_u64(seed);
                let n = h.len();
                let mut first = BTreeSet::new();
                let mut second = BTreeSet::new();
                for i in 0..n {
                    match rng.gen_range(0..3) {
                        0 if second.iter().all(|&j| !p.comparable(i, j)) => { first.insert(i); }
                        1 if first.iter().all(|&j| !p.comparable(i, j)) => { second.insert(i); }
                        _ => {}
                    }
                }
                let out = reorder_before(&h, &first, &second).unwrap();
                let keys = |set: &BTreeSet<usize>| -> BTreeSet<LetterId> { set.iter().map(|&i| h.events()[i].key().clone()).collect() };
                let (k1, k2) = (keys(&first), keys(&second));
                let times: Vec<&LetterId> = out.history.events().iter().map(SubstitutionEvent::key).collect();
                let last_first = times.iter().rposition(|k| k1.contains(*k));
                let first_second = times.iter().position(|k| k2.contains(*k));
                if let (Some(a), Some(b)) = (last_first, first_second) {
                    prop_assert!(a < b);
                }
                let mut replay = h.clone();
                for &i in &out.swaps {
                    replay = swap_adjacent(&replay, i).unwrap();
                }
                prop_assert_eq!(&replay, &out.history);
                prop_assert!(equivalent(&h, &out.history));
            }
        }
    }
}
