//! Letters, freely reduced words and cyclic words over a finite-rank free
//! group alphabet.
//!
//! A letter is stored as a signed integer: `+g` is the generator `a_g` and
//! `-g` its formal inverse (generators are numbered from 1). Words are flat
//! vectors of letters that are kept freely reduced by every constructor.

use std::fmt;
use std::ops::Mul;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("generator {generator} is out of range for rank {rank}")]
    GeneratorOutOfRange { generator: usize, rank: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("letter map must give an image for each of the {expected} generators, got {found}")]
    IncompleteMap { expected: usize, found: usize },
    #[error("exponents must be positive, got n={n}, t={t}")]
    NonPositiveExponent { n: i64, t: i64 },
    #[error("cannot parse word at byte {position}: {reason}")]
    Parse { position: usize, reason: String },
}

/// A generator or the inverse of a generator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    /// `generator` is 1-based.
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator >= 1, "generators are numbered from 1");
        let g = generator as i32;
        Letter(if inverse { -g } else { g })
    }

    pub fn positive(generator: usize) -> Letter {
        Letter::new(generator, false)
    }

    pub fn from_signed(value: i32) -> Letter {
        assert!(value != 0, "0 is not a letter");
        Letter(value)
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position of the letter in the order `a_1 < a_1⁻¹ < a_2 < a_2⁻¹ < …`,
    /// starting at 0.
    pub fn index(self) -> usize {
        2 * (self.generator() - 1) + usize::from(self.is_inverse())
    }

    pub fn from_index(index: usize) -> Letter {
        Letter::new(index / 2 + 1, index % 2 == 1)
    }

    /// Textual form for an alphabet of the given rank.
    pub fn symbol(self, rank: usize) -> String {
        if rank <= 2 {
            let base = if self.generator() == 1 { 'a' } else { 'b' };
            if self.is_inverse() {
                base.to_ascii_uppercase().to_string()
            } else {
                base.to_string()
            }
        } else if self.is_inverse() {
            format!("X{}", self.generator())
        } else {
            format!("x{}", self.generator())
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of letters `a_1^{±1}, …, a_rank^{±1}`.
pub fn alphabet_size(rank: usize) -> usize {
    2 * rank
}

/// Every letter of the alphabet, in index order.
pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
    (0..alphabet_size(rank)).map(Letter::from_index)
}

fn check_letter(letter: Letter, rank: usize) -> Result<(), WordError> {
    if letter.generator() > rank {
        Err(WordError::GeneratorOutOfRange { generator: letter.generator(), rank })
    } else {
        Ok(())
    }
}

/// Stack-based free reduction, appending onto `buffer`.
pub(crate) fn push_reduced(buffer: &mut Vec<Letter>, letter: Letter) {
    if buffer.last() == Some(&letter.inverse()) {
        buffer.pop();
    } else {
        buffer.push(letter);
    }
}

/// A freely reduced word in the free group of a fixed rank.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(rank: usize) -> Word {
        Word { rank, letters: Vec::new() }
    }

    /// Freely reduces an arbitrary sequence of letters.
    pub fn free_reduce<I>(raw: I, rank: usize) -> Result<Word, WordError>
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut letters = Vec::new();
        for letter in raw {
            check_letter(letter, rank)?;
            push_reduced(&mut letters, letter);
        }
        Ok(Word { rank, letters })
    }

    /// Builds a word from signed generator numbers, e.g. `[1, 1, -2]` = `a a B`.
    pub fn from_signed(raw: &[i32], rank: usize) -> Result<Word, WordError> {
        Word::free_reduce(raw.iter().map(|&x| Letter::from_signed(x)), rank)
    }

    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>, rank: usize) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { rank, letters }
    }

    pub fn letter(letter: Letter, rank: usize) -> Result<Word, WordError> {
        check_letter(letter, rank)?;
        Ok(Word { rank, letters: vec![letter] })
    }

    pub fn generator(generator: usize, rank: usize) -> Result<Word, WordError> {
        Word::letter(Letter::positive(generator), rank)
    }

    /// `letter^exponent` (negative exponents give powers of the inverse).
    pub fn letter_power(letter: Letter, exponent: i64, rank: usize) -> Result<Word, WordError> {
        check_letter(letter, rank)?;
        let l = if exponent < 0 { letter.inverse() } else { letter };
        Ok(Word { rank, letters: vec![l; exponent.unsigned_abs() as usize] })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { rank: self.rank, letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Free product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(self.rank, other.rank, "cannot multiply words of different rank");
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Word { rank: self.rank, letters }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..exponent.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Same letters viewed in a larger ambient rank.
    pub fn with_rank(&self, rank: usize) -> Result<Word, WordError> {
        Word::free_reduce(self.letters.iter().copied(), rank)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&first), Some(&last)) => self.letters.len() == 1 || first != last.inverse(),
            _ => true,
        }
    }

    /// Splits `self = conjugator · core · conjugator⁻¹` with `core`
    /// cyclically reduced.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let n = self.letters.len();
        let mut peel = 0;
        while 2 * peel + 1 < n && self.letters[peel] == self.letters[n - 1 - peel].inverse() {
            peel += 1;
        }
        let core = Word { rank: self.rank, letters: self.letters[peel..n - peel].to_vec() };
        let conjugator = Word { rank: self.rank, letters: self.letters[..peel].to_vec() };
        (CyclicWord { representative: core }, conjugator)
    }

    /// Number of occurrences of `a_g^{±1}`, indexed by `g - 1`.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rank];
        for l in &self.letters {
            counts[l.generator() - 1] += 1;
        }
        counts
    }

    /// Exponent sum of each generator, indexed by `g - 1`.
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut sums = vec![0; self.rank];
        for l in &self.letters {
            sums[l.generator() - 1] += if l.is_inverse() { -1 } else { 1 };
        }
        sums
    }

    /// Homomorphic image under `map`, freely reduced.
    pub fn apply_letter_map(&self, map: &LetterMap) -> Result<Word, WordError> {
        if map.source_rank() != self.rank {
            return Err(WordError::RankMismatch { expected: map.source_rank(), found: self.rank });
        }
        let mut out = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            let image = &map.images[l.generator() - 1];
            if l.is_inverse() {
                for &x in image.letters.iter().rev() {
                    push_reduced(&mut out, x.inverse());
                }
            } else {
                for &x in &image.letters {
                    push_reduced(&mut out, x);
                }
            }
        }
        Ok(Word { rank: map.target_rank, letters: out })
    }

    /// Interprets `self` as a word in the alphabet `basis` (generator `g`
    /// standing for `basis[g - 1]`) and evaluates it in the ambient group.
    pub fn substitute(&self, basis: &[Word]) -> Result<Word, WordError> {
        let map = LetterMap::new(basis.to_vec())?;
        self.apply_letter_map(&map)
    }

    /// Parses the text format (`a`, `A`, `b`, `B`, `x3`, `X3`, `^k` powers,
    /// whitespace ignored, `1` for the identity).
    pub fn parse(text: &str, rank: usize) -> Result<Word, WordError> {
        parse_word(text, rank)
    }
}

impl Mul for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl fmt::Display for Word {
    /// Syllable form with powers: `a^3 b^3`; the identity prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let run = j - i;
            if run == 1 {
                write!(f, "{}", l.symbol(self.rank))?;
            } else {
                write!(f, "{}^{}", l.symbol(self.rank), run)?;
            }
            i = j;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[{}]({})", self.rank, self)
    }
}

#[derive(Serialize, Deserialize)]
struct WordRepr {
    rank: usize,
    word: String,
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WordRepr { rank: self.rank, word: self.to_string() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Word, D::Error> {
        let repr = WordRepr::deserialize(deserializer)?;
        Word::parse(&repr.word, repr.rank).map_err(D::Error::custom)
    }
}

fn parse_word(text: &str, rank: usize) -> Result<Word, WordError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut letters: Vec<Letter> = Vec::new();
    let err = |position: usize, reason: &str| WordError::Parse { position, reason: reason.to_string() };

    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };

    let read_number = |pos: &mut usize| -> Option<u64> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        text[start..*pos].parse().ok()
    };

    skip_ws(&mut pos);
    if text.trim() == "1" {
        return Ok(Word::identity(rank));
    }
    while pos < bytes.len() {
        let start = pos;
        let c = bytes[pos] as char;
        let letter = match c {
            'a' | 'A' | 'b' | 'B' => {
                pos += 1;
                let g = if c.eq_ignore_ascii_case(&'a') { 1 } else { 2 };
                Letter::new(g, c.is_ascii_uppercase())
            }
            'x' | 'X' => {
                pos += 1;
                let g = read_number(&mut pos).ok_or_else(|| err(pos, "expected generator number"))?;
                if g == 0 {
                    return Err(err(start, "generators are numbered from 1"));
                }
                Letter::new(g as usize, c == 'X')
            }
            _ => return Err(err(pos, &format!("unexpected character {c:?}"))),
        };
        if letter.generator() > rank {
            return Err(WordError::GeneratorOutOfRange { generator: letter.generator(), rank });
        }
        skip_ws(&mut pos);
        let mut exponent: i64 = 1;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            skip_ws(&mut pos);
            let negative = pos < bytes.len() && bytes[pos] == b'-';
            if negative {
                pos += 1;
            }
            let k = read_number(&mut pos).ok_or_else(|| err(pos, "expected exponent"))?;
            exponent = if negative { -(k as i64) } else { k as i64 };
        }
        let l = if exponent < 0 { letter.inverse() } else { letter };
        for _ in 0..exponent.unsigned_abs() {
            push_reduced(&mut letters, l);
        }
        skip_ws(&mut pos);
    }
    Ok(Word { rank, letters })
}

/// `a^n b^t` in rank 2.
pub fn power_word(n: i64, t: i64) -> Result<Word, WordError> {
    if n < 1 || t < 1 {
        return Err(WordError::NonPositiveExponent { n, t });
    }
    let a = Word::letter_power(Letter::positive(1), n, 2)?;
    let b = Word::letter_power(Letter::positive(2), t, 2)?;
    Ok(a.concat(&b))
}

/// A homomorphism given by the images of the positive generators; inverse
/// letters map to inverted images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterMap {
    images: Vec<Word>,
    target_rank: usize,
}

impl LetterMap {
    pub fn new(images: Vec<Word>) -> Result<LetterMap, WordError> {
        let target_rank = images.first().map(|w| w.rank).unwrap_or(0);
        if let Some(w) = images.iter().find(|w| w.rank != target_rank) {
            return Err(WordError::RankMismatch { expected: target_rank, found: w.rank });
        }
        Ok(LetterMap { images, target_rank })
    }

    /// Map of `rank` generators into a group of rank `target_rank`.
    pub fn with_ranks(images: Vec<Word>, source_rank: usize, target_rank: usize) -> Result<LetterMap, WordError> {
        if images.len() != source_rank {
            return Err(WordError::IncompleteMap { expected: source_rank, found: images.len() });
        }
        if let Some(w) = images.iter().find(|w| w.rank != target_rank) {
            return Err(WordError::RankMismatch { expected: target_rank, found: w.rank });
        }
        Ok(LetterMap { images, target_rank })
    }

    pub fn identity(rank: usize) -> LetterMap {
        let images = (1..=rank).map(|g| Word::generator(g, rank).unwrap()).collect();
        LetterMap { images, target_rank: rank }
    }

    pub fn source_rank(&self) -> usize {
        self.images.len()
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn image(&self, generator: usize) -> &Word {
        &self.images[generator - 1]
    }

    pub fn set_image(&mut self, generator: usize, image: Word) {
        assert_eq!(image.rank, self.target_rank);
        self.images[generator - 1] = image;
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }
}

/// A nontrivial or empty cyclically reduced word, considered up to rotation.
#[derive(Clone)]
pub struct CyclicWord {
    representative: Word,
}

impl CyclicWord {
    /// Cyclically reduces `w`, discarding the conjugator.
    pub fn new(w: &Word) -> CyclicWord {
        w.cyclic_reduce().0
    }

    pub fn representative(&self) -> &Word {
        &self.representative
    }

    pub fn into_word(self) -> Word {
        self.representative
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representative.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.representative.rank
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord { representative: self.representative.inverse() }
    }

    /// Lexicographically least rotation (letters compared by index).
    pub fn canonical(&self) -> Word {
        Word { rank: self.rank(), letters: least_rotation(&self.representative.letters) }
    }

    /// Least rotation of `w` or of `w⁻¹`, whichever is smaller.
    pub fn canonical_up_to_inversion(&self) -> Word {
        let fwd = self.canonical();
        let bwd = self.inverse().canonical();
        let key = |w: &Word| w.letters.iter().map(|l| l.index()).collect::<Vec<_>>();
        if key(&bwd) < key(&fwd) {
            bwd
        } else {
            fwd
        }
    }
}

impl PartialEq for CyclicWord {
    fn eq(&self, other: &CyclicWord) -> bool {
        self.rank() == other.rank() && self.len() == other.len() && self.canonical() == other.canonical()
    }
}

impl Eq for CyclicWord {}

impl std::hash::Hash for CyclicWord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.representative)
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord[{}]({})", self.rank(), self.representative)
    }
}

/// Least rotation by the two-pointer method, O(n).
pub(crate) fn least_rotation(s: &[Letter]) -> Vec<Letter> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let at = |k: usize| s[k % n].index();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let (x, y) = (at(i + k), at(j + k));
        if x == y {
            k += 1;
            continue;
        }
        if x > y {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    let start = i.min(j);
    (0..n).map(|t| s[(start + t) % n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    #[test]
    fn free_reduction_examples() {
        let a = Letter::positive(1);
        let b = Letter::positive(2);
        assert!(Word::free_reduce([a, a.inverse()], 2).unwrap().is_empty());
        assert_eq!(Word::free_reduce([a, b, b.inverse(), b], 2).unwrap(), w("ab"));
        assert_eq!(Word::free_reduce(w("a^2 b^2").letters().iter().copied(), 2).unwrap(), w("aabb"));
    }

    #[test]
    fn out_of_range_generator_is_rejected() {
        let err = Word::free_reduce([Letter::positive(3)], 2).unwrap_err();
        assert_eq!(err, WordError::GeneratorOutOfRange { generator: 3, rank: 2 });
        assert!(Word::parse("x3", 2).is_err());
    }

    #[test]
    fn cyclic_reduction_examples() {
        let (core, conj) = w("B a b").cyclic_reduce();
        assert_eq!(core.representative(), &w("a"));
        assert_eq!(conj, w("B"));

        let (core, conj) = w("a^3 b^3").cyclic_reduce();
        assert_eq!(core.representative(), &w("a^3 b^3"));
        assert!(conj.is_empty());

        let (core, conj) = w("a b A").cyclic_reduce();
        assert_eq!(core.representative(), &w("b"));
        assert_eq!(conj, w("a"));

        let (core, _) = Word::identity(2).cyclic_reduce();
        assert!(core.is_empty());
    }

    #[test]
    fn power_words() {
        let w33 = power_word(3, 3).unwrap();
        assert_eq!(w33.len(), 6);
        assert_eq!(w33, w("aaabbb"));
        assert_eq!(power_word(1, 1).unwrap(), w("ab"));
        assert_eq!(power_word(5, 2).unwrap(), w("a^5 b^2"));
        assert!(power_word(0, 2).is_err());
        assert!(w33.is_cyclically_reduced());
    }

    #[test]
    fn letter_map_examples() {
        // x ↦ x, y1 ↦ y2⁻¹ y1, y2 ↦ y2 in F(x, y1, y2).
        let r = 3;
        let p = |t: &str| Word::parse(t, r).unwrap();
        let map = LetterMap::new(vec![p("x1"), p("X3 x2"), p("x3")]).unwrap();
        let (k, kp) = (4, 3);
        let eta = p("x1").pow(k).concat(&p("x3 x2").pow(kp)).concat(&p("x3"));
        let expected = p("x1").pow(k).concat(&p("x2").pow(kp)).concat(&p("x3"));
        assert_eq!(eta.apply_letter_map(&map).unwrap(), expected);

        assert_eq!(w("a^2 b^2").apply_letter_map(&LetterMap::identity(2)).unwrap(), w("a^2 b^2"));

        let map = LetterMap::new(vec![w("ab"), w("b")]).unwrap();
        assert_eq!(w("a B").apply_letter_map(&map).unwrap(), w("a"));

        let wrong = LetterMap::new(vec![p("x1"), p("x2"), p("x3")]).unwrap();
        assert!(w("ab").apply_letter_map(&wrong).is_err());
    }

    #[test]
    fn text_round_trip() {
        for text in ["a^3 b^3", "A b^2 a B", "1", "a"] {
            assert_eq!(w(text).to_string(), text);
        }
        let big = Word::parse("x1^2 X3 x2", 3).unwrap();
        assert_eq!(Word::parse(&big.to_string(), 3).unwrap(), big);
        assert_eq!(w("a^-2"), w("AA"));
        assert_eq!(w("a ^ 3 b"), w("aaab"));
    }

    #[test]
    fn canonical_rotation() {
        let c = CyclicWord::new(&w("b a a"));
        assert_eq!(c.canonical(), w("a a b"));
        assert_eq!(CyclicWord::new(&w("ab")), CyclicWord::new(&w("ba")));
        assert_ne!(CyclicWord::new(&w("ab")), CyclicWord::new(&w("aB")));
        // inverse of a b is B A, rotations include A B
        assert_eq!(CyclicWord::new(&w("BA")).canonical_up_to_inversion(), w("ab"));
    }

    #[test]
    fn serde_round_trip() {
        let x = w("a^2 B a");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"rank":2,"word":"a^2 B a"}"#);
        assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), x);
    }
}
