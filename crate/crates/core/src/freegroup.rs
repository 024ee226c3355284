//! Freely reduced words over a finite alphabet.
//!
//! Generators are single lowercase letters; in the compact text format a
//! lowercase letter is the generator and the matching uppercase letter is its
//! inverse, so `abA` reads as a·b·a⁻¹ and the empty string is the identity.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_GENERATORS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("letter refers to generator {index} but the alphabet has {rank} generators")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("symbol '{symbol}' at offset {offset} is not a generator or inverse")]
    UnknownSymbol { symbol: char, offset: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
}

/// The generating set S = {a_1, …, a_k}, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    pub fn new(names: impl IntoIterator<Item = char>) -> Result<Self, WordError> {
        let names: Vec<char> = names.into_iter().collect();
        if names.is_empty() {
            return Err(WordError::InvalidAlphabet("at least one generator is required".into()));
        }
        if names.len() > MAX_GENERATORS {
            return Err(WordError::InvalidAlphabet(format!(
                "{} generators exceeds the cap of {MAX_GENERATORS}",
                names.len()
            )));
        }
        for (i, &c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() {
                return Err(WordError::InvalidAlphabet(format!(
                    "generator name '{c}' is not a lowercase letter"
                )));
            }
            if names[..i].contains(&c) {
                return Err(WordError::InvalidAlphabet(format!("duplicate generator '{c}'")));
            }
        }
        Ok(Self { names })
    }

    /// The first `k` letters of the Latin alphabet.
    pub fn standard(k: usize) -> Result<Self, WordError> {
        Self::new((b'a'..=b'z').take(k).map(char::from))
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn index_of(&self, name: char) -> Option<usize> {
        self.names.iter().position(|&c| c == name)
    }

    pub fn generator(&self, index: usize) -> Word {
        Word(vec![Letter::new(index, false)])
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let mut letters = Vec::with_capacity(text.len());
        for (offset, c) in text.chars().enumerate() {
            let index = self
                .index_of(c.to_ascii_lowercase())
                .filter(|_| c.is_ascii_alphabetic())
                .ok_or(WordError::UnknownSymbol { symbol: c, offset })?;
            letters.push(Letter::new(index, c.is_ascii_uppercase()));
        }
        Ok(Word::reduce(letters))
    }

    pub fn format_word(&self, word: &Word) -> String {
        word.letters()
            .iter()
            .map(|l| {
                let c = self.names[l.generator()];
                if l.is_inverse() {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    /// Checks that every letter of `word` refers to a generator of this alphabet.
    pub fn check(&self, word: &Word) -> Result<(), WordError> {
        match word.letters().iter().find(|l| l.generator() >= self.rank()) {
            Some(l) => Err(WordError::LetterOutOfRange { index: l.generator(), rank: self.rank() }),
            None => Ok(()),
        }
    }

    /// Reduces a raw letter sequence, rejecting letters outside the alphabet.
    pub fn reduce(&self, raw: impl IntoIterator<Item = Letter>) -> Result<Word, WordError> {
        let mut out = Vec::new();
        for l in raw {
            if l.generator() >= self.rank() {
                return Err(WordError::LetterOutOfRange { index: l.generator(), rank: self.rank() });
            }
            push_reduced(&mut out, l);
        }
        Ok(Word(out))
    }

    /// Number of letters in S ∪ S⁻¹.
    pub fn signed_letters(&self) -> usize {
        2 * self.rank()
    }

    /// Number of reduced words of exactly the given length.
    pub fn words_of_length(&self, length: usize) -> u128 {
        reduced_words_of_length(self.rank(), length)
    }

    /// Number of reduced words of length at most `length`.
    pub fn words_up_to(&self, length: usize) -> u128 {
        let base = (2 * self.rank() - 1) as u128;
        let mut total = 1u128;
        let mut here = (2 * self.rank()) as u128;
        for _ in 0..length {
            total = total.saturating_add(here);
            here = here.saturating_mul(base);
        }
        total
    }

    /// The reduced word at position `n` of the length-lexicographic
    /// enumeration of F_k (letter order a < a⁻¹ < b < b⁻¹ < …).
    pub fn word_at_index(&self, n: u128) -> Word {
        word_at_index(n, self.rank())
    }

    /// Inverse of [`Alphabet::word_at_index`].
    pub fn index_of_word(&self, word: &Word) -> u128 {
        let k = self.rank();
        let len = word.len();
        let mut index = self.words_up_to(len.saturating_sub(1)) * u128::from(len > 0);
        let base = (2 * k - 1) as u128;
        let mut rest = reduced_tail_count(k, len.saturating_sub(1));
        let mut prev: Option<Letter> = None;
        for (pos, &l) in word.letters().iter().enumerate() {
            if pos > 0 {
                rest /= base;
            }
            let rank_here = match prev {
                None => u128::from(l.code()),
                Some(p) => {
                    let skip = p.inverse().code();
                    u128::from(l.code() - u8::from(l.code() > skip))
                }
            };
            index += rank_here * rest;
            prev = Some(l);
        }
        index
    }

    /// Iterates reduced words in enumeration order, starting from the empty word.
    pub fn words(&self) -> WordIter {
        WordIter { rank: self.rank(), current: Some(Vec::new()) }
    }
}

fn reduced_words_of_length(k: usize, length: usize) -> u128 {
    if length == 0 {
        return 1;
    }
    let base = (2 * k - 1) as u128;
    let mut count = (2 * k) as u128;
    for _ in 1..length {
        count = count.saturating_mul(base);
    }
    count
}

fn reduced_tail_count(k: usize, remaining: usize) -> u128 {
    let base = (2 * k - 1) as u128;
    (0..remaining).fold(1u128, |acc, _| acc.saturating_mul(base))
}

fn word_at_index(mut n: u128, k: usize) -> Word {
    let base = (2 * k - 1) as u128;
    let mut length: usize = 0;
    let mut here = 1u128;
    while n >= here {
        n -= here;
        length += 1;
        here = if length == 1 { (2 * k) as u128 } else { here.saturating_mul(base) };
    }
    let mut rest = reduced_tail_count(k, length.saturating_sub(1));
    let mut letters: Vec<Letter> = Vec::with_capacity(length);
    for pos in 0..length {
        let choice = (n / rest) as u8;
        n %= rest;
        let code = match letters.last() {
            None => choice,
            Some(p) => {
                let skip = p.inverse().code();
                if choice >= skip {
                    choice + 1
                } else {
                    choice
                }
            }
        };
        letters.push(Letter(code));
        if pos + 1 < length {
            rest /= base;
        }
    }
    Word(letters)
}

/// Successive reduced words in length-lexicographic order.
#[derive(Debug, Clone)]
pub struct WordIter {
    rank: usize,
    current: Option<Vec<Letter>>,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.current.take()?;
        let out = Word(current.clone());
        self.current = Some(next_reduced(current, self.rank));
        Some(out)
    }
}

fn next_reduced(mut letters: Vec<Letter>, k: usize) -> Vec<Letter> {
    let top = (2 * k) as u8;
    // Bump the rightmost position that can still grow, then fill the tail minimally.
    let mut pos = letters.len();
    while pos > 0 {
        pos -= 1;
        let forbidden = if pos == 0 { None } else { Some(letters[pos - 1].inverse().code()) };
        let mut c = letters[pos].code() + 1;
        if Some(c) == forbidden {
            c += 1;
        }
        if c < top {
            letters[pos] = Letter(c);
            fill_minimal(&mut letters, pos + 1);
            return letters;
        }
    }
    let len = letters.len() + 1;
    letters.clear();
    letters.resize(len, Letter(0));
    fill_minimal(&mut letters, 0);
    letters
}

fn fill_minimal(letters: &mut [Letter], from: usize) {
    for pos in from..letters.len() {
        let c = if pos > 0 && letters[pos - 1].inverse().code() == 0 { 1 } else { 0 };
        letters[pos] = Letter(c);
    }
}

/// A letter of S ∪ S⁻¹, encoded as `2·generator + inverse`.
///
/// The encoding makes the natural order of codes the enumeration order
/// a < a⁻¹ < b < b⁻¹ < ….
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < MAX_GENERATORS, "generator index {generator} out of range");
        Letter((generator as u8) << 1 | u8::from(inverse))
    }

    pub fn generator(self) -> usize {
        usize::from(self.0 >> 1)
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// +1 for a generator, −1 for an inverse generator.
    pub fn sign(self) -> i32 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> u8 {
        self.0
    }
}

#[inline]
pub(crate) fn push_reduced(buf: &mut Vec<Letter>, l: Letter) {
    if buf.last() == Some(&l.inverse()) {
        buf.pop();
    } else {
        buf.push(l);
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(raw: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        for l in raw {
            push_reduced(&mut out, l);
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn invert(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.reserve(other.len());
        for &l in &other.0 {
            push_reduced(&mut out, l);
        }
        Word(out)
    }

    /// t·w·t⁻¹, reduced.
    pub fn conjugate_by(&self, t: &Word) -> Word {
        t.concat(self).concat(&t.invert())
    }

    /// Signed power w^e for e ∈ {+1, −1}.
    pub fn signed(&self, sign: Sign) -> Word {
        match sign {
            Sign::Plus => self.clone(),
            Sign::Minus => self.invert(),
        }
    }

    /// Sum of the exponents of generator `g` over the word.
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.0.iter().filter(|l| l.generator() == g).map(|l| i64::from(l.sign())).sum()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }

    /// Parses the compact format over the first 26 generators, without an
    /// explicit alphabet.
    pub fn parse_standard(text: &str) -> Result<Word, WordError> {
        Alphabet::standard(MAX_GENERATORS)?.parse_word(text)
    }
}

/// Free-standing form of [`Word::conjugate_by`].
pub fn conjugate(t: &Word, w: &Word) -> Word {
    w.conjugate_by(t)
}

impl fmt::Display for Word {
    /// Compact format assuming the standard alphabet a, b, c, ….
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            let c = char::from(b'a' + l.generator() as u8);
            let c = if l.is_inverse() { c.to_ascii_uppercase() } else { c };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Sign> {
        match c {
            "+" | "+1" => Some(Sign::Plus),
            "-" | "-1" => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn ab() -> Alphabet {
        Alphabet::standard(2).unwrap()
    }

    fn w(s: &str) -> Word {
        ab().parse_word(s).unwrap()
    }

    fn a() -> Letter {
        Letter::new(0, false)
    }

    fn b() -> Letter {
        Letter::new(1, false)
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce([a(), a().inverse(), b()]), w("b"));
        assert!(Word::reduce([a(), b(), b().inverse(), a().inverse()]).is_empty());
        let aba = Word::reduce([a(), b(), a().inverse()]);
        assert_eq!(ab().format_word(&aba), "abA");
    }

    #[test]
    fn reduce_rejects_out_of_range_letters() {
        let one = Alphabet::standard(1).unwrap();
        assert_eq!(
            one.reduce([a(), b()]),
            Err(WordError::LetterOutOfRange { index: 1, rank: 1 })
        );
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w("ab").invert(), w("BA"));
        assert_eq!(Word::empty().invert(), Word::empty());
        assert_eq!(w("A").invert(), w("a"));
    }

    #[test]
    fn concat_and_conjugate_examples() {
        let abc = Alphabet::standard(3).unwrap();
        let p = |s: &str| abc.parse_word(s).unwrap();
        assert_eq!(p("ab").concat(&p("Bc")), p("ac"));
        assert!(p("abcA").concat(&p("abcA").invert()).is_empty());
        assert_eq!(Word::empty().concat(&p("cb")), p("cb"));

        assert_eq!(conjugate(&w("b"), &w("aa")), w("baaB"));
        assert_eq!(conjugate(&w("a"), &w("aa")), w("aa"));
        assert_eq!(conjugate(&Word::empty(), &w("abA")), w("abA"));
    }

    #[test]
    fn parse_rejects_unknown_symbols() {
        assert!(matches!(ab().parse_word("ac"), Err(WordError::UnknownSymbol { symbol: 'c', offset: 1 })));
        assert!(matches!(ab().parse_word("a1"), Err(WordError::UnknownSymbol { .. })));
        assert_eq!(ab().parse_word("aAbB"), Ok(Word::empty()));
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::new(['a', 'a']).is_err());
        assert!(Alphabet::new(['A']).is_err());
        assert!(Alphabet::new([]).is_err());
        let xy = Alphabet::new(['x', 'y']).unwrap();
        let word = xy.parse_word("xYx").unwrap();
        assert_eq!(xy.format_word(&word), "xYx");
    }

    #[test]
    fn word_at_index_examples() {
        let one = Alphabet::standard(1).unwrap();
        assert_eq!(one.word_at_index(0), Word::empty());
        assert_eq!(one.format_word(&one.word_at_index(1)), "a");
        assert_eq!(one.format_word(&one.word_at_index(2)), "A");
        let first: Vec<String> = (0..5).map(|n| ab().format_word(&ab().word_at_index(n))).collect();
        assert_eq!(first, ["", "a", "A", "b", "B"]);
        assert_eq!(ab().format_word(&ab().word_at_index(5)), "aa");
        assert_eq!(ab().format_word(&ab().word_at_index(6)), "ab");
    }

    /// Brute force: every sign sequence of each length, filtered to reduced ones,
    /// sorted by letter code. Compared against the closed-form bijection.
    fn brute_force_reduced(k: usize, max_len: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for len in 1..=max_len {
            let total = (2 * k).pow(len as u32);
            let mut block = Vec::new();
            for mut code in 0..total {
                let mut seq = vec![0u8; len];
                for pos in (0..len).rev() {
                    seq[pos] = (code % (2 * k)) as u8;
                    code /= 2 * k;
                }
                if seq.windows(2).all(|p| p[0] ^ 1 != p[1]) {
                    block.push(seq);
                }
            }
            block.sort();
            out.extend(block);
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for k in 1..=2 {
            let alpha = Alphabet::standard(k).unwrap();
            let expected = brute_force_reduced(k, 4);
            for (n, seq) in expected.iter().enumerate() {
                let word = alpha.word_at_index(n as u128);
                let codes: Vec<u8> = word.letters().iter().map(|l| l.code()).collect();
                assert_eq!(&codes, seq, "k={k} n={n}");
                assert_eq!(alpha.index_of_word(&word), n as u128);
            }
            assert_eq!(alpha.words_up_to(4) as usize, expected.len());
            let iterated: Vec<Word> = alpha.words().take(expected.len()).collect();
            let direct: Vec<Word> = (0..expected.len()).map(|n| alpha.word_at_index(n as u128)).collect();
            assert_eq!(iterated, direct);
        }
    }

    #[test]
    fn enumeration_injective_on_first_ten_thousand() {
        for k in 1..=3 {
            let alpha = Alphabet::standard(k).unwrap();
            let seen: HashSet<Word> = (0..10_000u128).map(|n| alpha.word_at_index(n)).collect();
            assert_eq!(seen.len(), 10_000);
        }
    }

    #[test]
    fn inverse_cancels_exhaustively_for_small_rank() {
        for k in 1..=2 {
            let alpha = Alphabet::standard(k).unwrap();
            for word in alpha.words().take_while(|w| w.len() <= 8) {
                assert!(word.concat(&word.invert()).is_empty());
            }
        }
    }

    fn raw_letters(k: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..k, any::<bool>()), 0..max)
            .prop_map(|v| v.into_iter().map(|(g, inv)| Letter::new(g, inv)).collect())
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in raw_letters(3, 24)) {
            let once = Word::reduce(raw);
            let twice = Word::reduce(once.letters().to_vec());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn inverse_cancels_random(raw in raw_letters(4, 8)) {
            let word = Word::reduce(raw);
            prop_assert!(word.concat(&word.invert()).is_empty());
            prop_assert!(word.invert().concat(&word).is_empty());
        }

        #[test]
        fn concat_length_bounds(u in raw_letters(2, 12), v in raw_letters(2, 12)) {
            let (u, v) = (Word::reduce(u), Word::reduce(v));
            let uv = u.concat(&v);
            prop_assert!(uv.len() <= u.len() + v.len());
            prop_assert!(uv.len() >= u.len().abs_diff(v.len()));
        }

        #[test]
        fn concat_is_associative(u in raw_letters(2, 10), v in raw_letters(2, 10), x in raw_letters(2, 10)) {
            let (u, v, x) = (Word::reduce(u), Word::reduce(v), Word::reduce(x));
            prop_assert_eq!(u.concat(&v).concat(&x), u.concat(&v.concat(&x)));
        }

        #[test]
        fn index_round_trip(n in 0u128..5_000_000) {
            let alpha = Alphabet::standard(3).unwrap();
            prop_assert_eq!(alpha.index_of_word(&alpha.word_at_index(n)), n);
        }
    }
}
