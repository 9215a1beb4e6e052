//! Symbols, words, alphabets and the anchor-aware matcher shared by the
//! rewriting engines.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Token used for the empty word in all textual input and output.
pub const EMPTY_TOKEN: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("invalid symbol name {0:?}")]
    InvalidSymbol(String),
    #[error("splice out of range: at {at} + remove {remove} exceeds length {len}")]
    SpliceOutOfRange { at: usize, remove: usize, len: usize },
}

/// A named token. Names are non-empty, whitespace-free, and never `_`.
///
/// Names are also kept free of `#` (comment marker), and may not be `->` or
/// start with `@`, so every symbol survives a round trip through the text
/// format.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Symbol, WordError> {
        if Symbol::is_valid_name(name) {
            Ok(Symbol(Arc::from(name)))
        } else {
            Err(WordError::InvalidSymbol(name.to_string()))
        }
    }

    pub fn is_valid_name(name: &str) -> bool {
        !name.is_empty()
            && name != EMPTY_TOKEN
            && name != "->"
            && !name.starts_with('@')
            && !name.contains('#')
            && !name.chars().any(char::is_whitespace)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Symbol {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::new(s)
    }
}

/// A finite sequence of symbols; the empty sequence is ε.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Word {
        Word(symbols)
    }

    /// Parses whitespace-separated symbol names; `_` (or blank input) is ε.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() == 1 && tokens[0] == EMPTY_TOKEN {
            return Ok(Word::empty());
        }
        tokens.into_iter().map(Symbol::new).collect::<Result<_, _>>().map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    pub fn first(&self) -> Option<&Symbol> {
        self.0.first()
    }

    pub fn last(&self) -> Option<&Symbol> {
        self.0.last()
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.0.contains(symbol)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = self.0.clone();
        symbols.extend(other.0.iter().cloned());
        Word(symbols)
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    pub fn occurrences(&self, needle: &Word, anchor: AnchorMode) -> Vec<usize> {
        occurrences(&self.0, &needle.0, anchor)
    }

    /// Replaces `self[at .. at + remove_len)` by `insert`.
    pub fn splice(&self, at: usize, remove_len: usize, insert: &Word) -> Result<Word, WordError> {
        splice(&self.0, at, remove_len, &insert.0).map(Word)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(EMPTY_TOKEN);
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(s.name())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<T: IntoIterator<Item = Symbol>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Terminal and working alphabets of a rewriting system.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    pub terminals: BTreeSet<Symbol>,
    pub working: BTreeSet<Symbol>,
}

impl Alphabet {
    pub fn new(terminals: BTreeSet<Symbol>, working: BTreeSet<Symbol>) -> Alphabet {
        Alphabet { terminals, working }
    }

    pub fn is_consistent(&self) -> bool {
        self.terminals.is_subset(&self.working)
    }

    pub fn is_terminal(&self, s: &Symbol) -> bool {
        self.terminals.contains(s)
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.working.contains(s)
    }
}

/// Where a rule or production may be applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnchorMode {
    #[default]
    None,
    /// Only as a prefix of the word.
    Left,
    /// Only as a suffix of the word.
    Right,
    /// Only as the whole word.
    Both,
}

impl AnchorMode {
    pub fn allows(self, at: usize, needle_len: usize, haystack_len: usize) -> bool {
        let left_ok = at == 0;
        let right_ok = at + needle_len == haystack_len;
        match self {
            AnchorMode::None => true,
            AnchorMode::Left => left_ok,
            AnchorMode::Right => right_ok,
            AnchorMode::Both => left_ok && right_ok,
        }
    }

    pub fn anchors_left(self) -> bool {
        matches!(self, AnchorMode::Left | AnchorMode::Both)
    }

    pub fn anchors_right(self) -> bool {
        matches!(self, AnchorMode::Right | AnchorMode::Both)
    }

    /// Suffix used in the text format, empty for `None`.
    pub fn tag(self) -> &'static str {
        match self {
            AnchorMode::None => "",
            AnchorMode::Left => "@left",
            AnchorMode::Right => "@right",
            AnchorMode::Both => "@both",
        }
    }

    pub fn from_tag(tag: &str) -> Option<AnchorMode> {
        match tag {
            "@left" => Some(AnchorMode::Left),
            "@right" => Some(AnchorMode::Right),
            "@both" => Some(AnchorMode::Both),
            _ => None,
        }
    }
}

impl fmt::Display for AnchorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorMode::None => "none",
            AnchorMode::Left => "left",
            AnchorMode::Right => "right",
            AnchorMode::Both => "both",
        })
    }
}

/// Start indices of every (possibly overlapping) occurrence of `needle` in
/// `haystack` that satisfies `anchor`, ascending. An empty needle matches
/// nowhere.
pub fn occurrences<T: PartialEq>(haystack: &[T], needle: &[T], anchor: AnchorMode) -> Vec<usize> {
    let (n, m) = (haystack.len(), needle.len());
    if m == 0 || m > n {
        return Vec::new();
    }
    let candidates: Box<dyn Iterator<Item = usize>> = match anchor {
        AnchorMode::None => Box::new(0..=n - m),
        AnchorMode::Left => Box::new(std::iter::once(0)),
        AnchorMode::Right => Box::new(std::iter::once(n - m)),
        AnchorMode::Both if m == n => Box::new(std::iter::once(0)),
        AnchorMode::Both => return Vec::new(),
    };
    candidates.filter(|&i| &haystack[i..i + m] == needle).collect()
}

pub fn splice<T: Clone>(w: &[T], at: usize, remove_len: usize, insert: &[T]) -> Result<Vec<T>, WordError> {
    if at.checked_add(remove_len).is_none_or(|end| end > w.len()) {
        return Err(WordError::SpliceOutOfRange { at, remove: remove_len, len: w.len() });
    }
    let mut out = Vec::with_capacity(w.len() - remove_len + insert.len());
    out.extend_from_slice(&w[..at]);
    out.extend_from_slice(insert);
    out.extend_from_slice(&w[at + remove_len..]);
    Ok(out)
}

/// Every word over `letters` of length at most `max_len`, in shortlex order
/// (by length, then by position in `letters`).
pub fn words_up_to(letters: &[Symbol], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        if letters.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for x in letters {
                let mut symbols = w.0.clone();
                symbols.push(x.clone());
                next.push(Word(symbols));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Length-then-lexicographic comparison.
pub fn shortlex_cmp(a: &Word, b: &Word) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn symbol_names() {
        assert!(Symbol::new("a").is_ok());
        assert!(Symbol::new("^x^").is_ok());
        assert!(Symbol::new("~x").is_ok());
        for bad in ["", "_", "a b", "->", "@left", "a#b", "\t"] {
            assert!(Symbol::new(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("_"), Word::empty());
        assert_eq!(w("  "), Word::empty());
        assert_eq!(w("a  T b").to_string(), "a T b");
        assert_eq!(Word::empty().to_string(), "_");
        assert!(Word::parse("a _").is_err());
    }

    #[test]
    fn occurrence_examples() {
        assert_eq!(w("a b a b").occurrences(&w("a b"), AnchorMode::None), vec![0, 2]);
        assert_eq!(w("x").occurrences(&w("x"), AnchorMode::Both), vec![0]);
        assert!(w("x x").occurrences(&w("x"), AnchorMode::Both).is_empty());
        assert_eq!(w("a a a").occurrences(&w("a a"), AnchorMode::None), vec![0, 1]);
        assert_eq!(w("a a a").occurrences(&w("a a"), AnchorMode::Left), vec![0]);
        assert_eq!(w("a a a").occurrences(&w("a a"), AnchorMode::Right), vec![1]);
        assert!(w("a").occurrences(&Word::empty(), AnchorMode::None).is_empty());
    }

    #[test]
    fn words_up_to_counts() {
        let letters = vec![Symbol::new("a").unwrap(), Symbol::new("b").unwrap()];
        let all = words_up_to(&letters, 3);
        assert_eq!(all.len(), 1 + 2 + 4 + 8);
        assert_eq!(all[0], Word::empty());
        assert_eq!(all[3], w("a a"));
        assert!(all.windows(2).all(|p| shortlex_cmp(&p[0], &p[1]).is_lt()));
        assert_eq!(words_up_to(&[], 4), vec![Word::empty()]);
    }

    #[test]
    fn splice_examples() {
        assert_eq!(w("a b a b").splice(0, 2, &Word::empty()).unwrap(), w("a b"));
        assert_eq!(w("a b").splice(1, 0, &w("c")).unwrap(), w("a c b"));
        assert_eq!(w("a T b").splice(0, 3, &Word::empty()).unwrap(), Word::empty());
        assert!(w("a b").splice(1, 2, &Word::empty()).is_err());
        assert!(w("a b").splice(usize::MAX, 2, &Word::empty()).is_err());
    }

    fn naive(h: &[u8], n: &[u8], anchor: AnchorMode) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..h.len() {
            if n.is_empty() || i + n.len() > h.len() {
                continue;
            }
            let matches = (0..n.len()).all(|k| h[i + k] == n[k]);
            let anchored = match anchor {
                AnchorMode::None => true,
                AnchorMode::Left => i == 0,
                AnchorMode::Right => i + n.len() == h.len(),
                AnchorMode::Both => i == 0 && n.len() == h.len(),
            };
            if matches && anchored {
                out.push(i);
            }
        }
        out
    }

    fn anchor_strategy() -> impl Strategy<Value = AnchorMode> {
        prop_oneof![
            Just(AnchorMode::None),
            Just(AnchorMode::Left),
            Just(AnchorMode::Right),
            Just(AnchorMode::Both)
        ]
    }

    proptest! {
        #[test]
        fn occurrences_match_naive_scan(
            h in prop::collection::vec(0u8..3, 0..12),
            n in prop::collection::vec(0u8..3, 0..4),
            anchor in anchor_strategy(),
        ) {
            prop_assert_eq!(occurrences(&h, &n, anchor), naive(&h, &n, anchor));
        }

        #[test]
        fn splice_inverse_restores(
            base in prop::collection::vec(0u8..3, 0..10),
            insert in prop::collection::vec(0u8..3, 0..4),
            at_frac in 0.0f64..=1.0,
            remove_frac in 0.0f64..=1.0,
        ) {
            let at = (at_frac * base.len() as f64) as usize;
            let remove = (remove_frac * (base.len() - at) as f64) as usize;
            let removed = base[at..at + remove].to_vec();
            let out = splice(&base, at, remove, &insert).unwrap();
            prop_assert_eq!(out.len(), base.len() - remove + insert.len());
            let back = splice(&out, at, insert.len(), &removed).unwrap();
            prop_assert_eq!(back, base);
        }
    }
}
