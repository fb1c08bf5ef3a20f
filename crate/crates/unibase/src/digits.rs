//! Digit alphabets, finite words, and infinite digit sequences.
//!
//! Digits are drawn from the alphabet `{0, 1, .., M}`. Finite words are
//! plain digit vectors; infinite sequences come in three flavours:
//! eventually periodic, doubling-substitution limits, and opaque streams.
//! Indexing of infinite sequences is 1-based throughout, matching the
//! series convention `x = d_1 q^{-1} + d_2 q^{-2} + ..`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// Periods longer than this are not expanded when deciding exact equality
/// of two eventually periodic sequences; callers fall back to bounded
/// comparison instead.
const EXACT_CMP_PERIOD_CAP: usize = 1 << 20;

/// Digit alphabet `{0, 1, .., m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    m: u64,
}

impl Alphabet {
    /// Alphabet with maximal digit `m >= 1`.
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange);
        }
        Ok(Alphabet { m })
    }

    /// Largest digit.
    pub fn max_digit(&self) -> u64 {
        self.m
    }

    /// Reflection of a single digit: `d -> m - d`.
    pub fn reflect_digit(&self, d: u64) -> u64 {
        debug_assert!(d <= self.m);
        self.m - d
    }

    fn check_digit(&self, d: u64) -> Result<()> {
        if d > self.m {
            Err(Error::DigitOutOfRange { digit: d, max: self.m })
        } else {
            Ok(())
        }
    }

    fn fmt_digits(&self, digits: &[u64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m <= 9 {
            for d in digits {
                write!(f, "{d}")?;
            }
        } else {
            for (i, d) in digits.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }

    fn parse_digits(&self, s: &str) -> Result<Vec<u64>> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        if self.m <= 9 {
            for ch in s.chars() {
                let d = ch
                    .to_digit(10)
                    .ok_or_else(|| Error::Parse(format!("invalid digit character {ch:?}")))?
                    as u64;
                self.check_digit(d)?;
                out.push(d);
            }
        } else {
            for part in s.split(',') {
                let part = part.trim();
                let d: u64 = part
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid digit {part:?}")))?;
                self.check_digit(d)?;
                out.push(d);
            }
        }
        Ok(out)
    }
}

/// Finite word over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    digits: Vec<u64>,
}

impl Word {
    /// Word from explicit digits; every digit must lie in the alphabet.
    pub fn new(alphabet: Alphabet, digits: Vec<u64>) -> Result<Self> {
        for &d in &digits {
            alphabet.check_digit(d)?;
        }
        Ok(Word { alphabet, digits })
    }

    /// Empty word.
    pub fn empty(alphabet: Alphabet) -> Self {
        Word { alphabet, digits: Vec::new() }
    }

    /// Parse a word: contiguous decimal digits for alphabets up to 9,
    /// comma-separated digits above.
    pub fn parse(alphabet: Alphabet, s: &str) -> Result<Self> {
        let digits = alphabet.parse_digits(s)?;
        if digits.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word { alphabet, digits })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// 1-based digit access.
    pub fn digit(&self, i: usize) -> u64 {
        assert!(i >= 1 && i <= self.digits.len(), "digit index out of range");
        self.digits[i - 1]
    }

    /// Digit-wise reflection `d_i -> m - d_i`.
    pub fn reflect(&self) -> Word {
        let digits = self.digits.iter().map(|&d| self.alphabet.m - d).collect();
        Word { alphabet: self.alphabet, digits }
    }

    /// Copy with the last digit incremented.
    pub fn plus(&self) -> Result<Word> {
        let mut digits = self.digits.clone();
        let last = digits.last_mut().ok_or(Error::EmptyWord)?;
        if *last >= self.alphabet.m {
            return Err(Error::IncrementOverflow);
        }
        *last += 1;
        Ok(Word { alphabet: self.alphabet, digits })
    }

    /// Copy with the last digit decremented.
    pub fn minus(&self) -> Result<Word> {
        let mut digits = self.digits.clone();
        let last = digits.last_mut().ok_or(Error::EmptyWord)?;
        if *last == 0 {
            return Err(Error::DecrementUnderflow);
        }
        *last -= 1;
        Ok(Word { alphabet: self.alphabet, digits })
    }

    /// Concatenation; both words must share an alphabet.
    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch in concat");
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        Word { alphabet: self.alphabet, digits }
    }

    /// `k`-fold repetition.
    pub fn repeat(&self, k: usize) -> Word {
        let mut digits = Vec::with_capacity(self.digits.len() * k);
        for _ in 0..k {
            digits.extend_from_slice(&self.digits);
        }
        Word { alphabet: self.alphabet, digits }
    }

    /// Left rotation by `i` positions.
    pub fn rotate_left(&self, i: usize) -> Word {
        if self.digits.is_empty() {
            return self.clone();
        }
        let n = self.digits.len();
        let i = i % n;
        let mut digits = Vec::with_capacity(n);
        digits.extend_from_slice(&self.digits[i..]);
        digits.extend_from_slice(&self.digits[..i]);
        Word { alphabet: self.alphabet, digits }
    }

    /// Sub-word on 1-based inclusive digit positions `[from, to]`.
    pub fn slice(&self, from: usize, to: usize) -> Word {
        assert!(from >= 1 && to <= self.digits.len() && from <= to + 1, "slice out of range");
        Word { alphabet: self.alphabet, digits: self.digits[from - 1..to].to_vec() }
    }

    /// Lexicographic comparison of equal-length words.
    pub fn cmp_lex(&self, other: &Word) -> Ordering {
        debug_assert_eq!(self.len(), other.len(), "cmp_lex expects equal lengths");
        self.digits.cmp(&other.digits)
    }

    /// Comparison of `self 0^inf` against `other 0^inf`: digit-wise with
    /// missing positions read as zero.
    pub fn cmp_padded(&self, other: &Word) -> Ordering {
        let n = self.len().max(other.len());
        for i in 0..n {
            let a = self.digits.get(i).copied().unwrap_or(0);
            let b = other.digits.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    /// Length of the primitive root: the shortest word `u` with
    /// `self = u^k`.
    pub fn primitive_root_len(&self) -> usize {
        let n = self.digits.len();
        'outer: for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            for i in d..n {
                if self.digits[i] != self.digits[i % d] {
                    continue 'outer;
                }
            }
            return d;
        }
        n
    }

    /// The infinite sequence `self 0^inf` (finite expansion).
    pub fn zero_tail_seq(&self) -> DigitSeq {
        DigitSeq::periodic_raw(self.alphabet, self.digits.clone(), vec![0])
    }

    /// The purely periodic sequence `self^inf`; the word must be non-empty.
    pub fn cycle_seq(&self) -> DigitSeq {
        assert!(!self.digits.is_empty(), "cycle of the empty word");
        DigitSeq::periodic_raw(self.alphabet, Vec::new(), self.digits.clone())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.alphabet.fmt_digits(&self.digits, f)
    }
}

/// Doubling substitution `c -> c^plus reflect(c^plus)`, defined whenever the
/// last digit of `c` is below the alphabet maximum.
pub fn substitute_g(word: &Word) -> Result<Word> {
    let plus = word.plus()?;
    Ok(plus.concat(&plus.reflect()))
}

/// Infinite digit source with 1-based indexing.
pub trait DigitStream: Send + Sync {
    fn digit1(&self, i: usize) -> u64;
}

/// Limit word of the doubling substitution started from a block `t` with
/// `t_p < m`: the buffer starts as `t^plus` and each extension appends the
/// incremented reflection of everything so far.
#[derive(Debug)]
pub struct SubstLimitSeq {
    alphabet: Alphabet,
    seed: Word,
    memo: Mutex<Vec<u64>>,
}

impl SubstLimitSeq {
    fn new(seed: &Word) -> Result<Arc<Self>> {
        let start = seed.plus()?; // requires t_p < m
        Ok(Arc::new(SubstLimitSeq {
            alphabet: seed.alphabet(),
            seed: seed.clone(),
            memo: Mutex::new(start.digits().to_vec()),
        }))
    }

    pub fn seed(&self) -> &Word {
        &self.seed
    }

    fn digit(&self, i: usize) -> u64 {
        debug_assert!(i >= 1);
        let mut memo = self.memo.lock().expect("substitution memo poisoned");
        while memo.len() < i {
            let len = memo.len();
            let m = self.alphabet.m;
            for k in 0..len {
                let d = memo[k];
                memo.push(m - d);
            }
            // The appended block is the *incremented* reflection; the old
            // buffer ends in a positive digit, so the bump cannot overflow.
            let last = memo.last_mut().expect("non-empty substitution buffer");
            *last += 1;
        }
        memo[i - 1]
    }
}

impl DigitStream for SubstLimitSeq {
    fn digit1(&self, i: usize) -> u64 {
        self.digit(i)
    }
}

#[derive(Clone)]
enum SeqRepr {
    /// `pre per^inf`, period non-empty.
    Periodic { pre: Vec<u64>, per: Vec<u64> },
    /// Doubling-substitution limit.
    SubstLimit(Arc<SubstLimitSeq>),
    /// Opaque digit stream.
    Stream(Arc<dyn DigitStream>),
}

impl fmt::Debug for SeqRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqRepr::Periodic { pre, per } => {
                f.debug_struct("Periodic").field("pre", pre).field("per", per).finish()
            }
            SeqRepr::SubstLimit(s) => f.debug_struct("SubstLimit").field("seed", s.seed()).finish(),
            SeqRepr::Stream(_) => f.write_str("Stream(..)"),
        }
    }
}

/// Infinite digit sequence over an alphabet.
///
/// A sequence owns a representation plus a shift offset and a reflection
/// flag, so tails and reflections are O(1) views. Digit indexing is
/// 1-based.
#[derive(Debug, Clone)]
pub struct DigitSeq {
    alphabet: Alphabet,
    repr: SeqRepr,
    offset: usize,
    reflected: bool,
}

impl DigitSeq {
    fn periodic_raw(alphabet: Alphabet, pre: Vec<u64>, per: Vec<u64>) -> Self {
        debug_assert!(!per.is_empty());
        DigitSeq { alphabet, repr: SeqRepr::Periodic { pre, per }, offset: 0, reflected: false }
    }

    /// Eventually periodic sequence `pre per^inf`.
    pub fn periodic(pre: &Word, per: &Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::EmptyWord);
        }
        if !pre.is_empty() {
            assert_eq!(pre.alphabet(), per.alphabet(), "alphabet mismatch in periodic");
        }
        Ok(DigitSeq::periodic_raw(per.alphabet(), pre.digits().to_vec(), per.digits().to_vec()))
    }

    /// Substitution-limit sequence seeded by `t` (requires `t_p < m`).
    pub fn subst_limit(seed: &Word) -> Result<Self> {
        let s = SubstLimitSeq::new(seed)?;
        Ok(DigitSeq { alphabet: seed.alphabet(), repr: SeqRepr::SubstLimit(s), offset: 0, reflected: false })
    }

    /// Sequence backed by an arbitrary stream.
    pub fn from_stream(alphabet: Alphabet, stream: Arc<dyn DigitStream>) -> Self {
        DigitSeq { alphabet, repr: SeqRepr::Stream(stream), offset: 0, reflected: false }
    }

    /// Parse `"pre(per)"`, `"(per)"`, or a plain word `"w"` (read as
    /// `w 0^inf`). A trailing `∞` after the period is accepted and ignored.
    pub fn parse(alphabet: Alphabet, s: &str) -> Result<Self> {
        let mut s = s.trim();
        for suffix in ["∞", "^inf"] {
            if let Some(stripped) = s.strip_suffix(suffix) {
                s = stripped.trim_end();
            }
        }
        if let Some(open) = s.find('(') {
            let close = s.rfind(')').ok_or_else(|| Error::Parse("missing ')'".into()))?;
            if close != s.len() - 1 || close < open {
                return Err(Error::Parse("malformed period marker".into()));
            }
            let pre = alphabet.parse_digits(&s[..open])?;
            let per = alphabet.parse_digits(&s[open + 1..close])?;
            if per.is_empty() {
                return Err(Error::Parse("empty period".into()));
            }
            Ok(DigitSeq::periodic_raw(alphabet, pre, per))
        } else {
            let digits = alphabet.parse_digits(s)?;
            if digits.is_empty() {
                return Err(Error::Parse("empty sequence".into()));
            }
            Ok(DigitSeq::periodic_raw(alphabet, digits, vec![0]))
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// 1-based digit.
    pub fn digit(&self, i: usize) -> u64 {
        assert!(i >= 1, "digit indexing is 1-based");
        let j = i + self.offset;
        let raw = match &self.repr {
            SeqRepr::Periodic { pre, per } => {
                if j <= pre.len() {
                    pre[j - 1]
                } else {
                    per[(j - pre.len() - 1) % per.len()]
                }
            }
            SeqRepr::SubstLimit(s) => s.digit(j),
            SeqRepr::Stream(s) => s.digit1(j),
        };
        debug_assert!(raw <= self.alphabet.m, "stream produced an out-of-range digit");
        if self.reflected {
            self.alphabet.m - raw
        } else {
            raw
        }
    }

    /// Tail after dropping `n` leading digits (the n-th shift).
    pub fn shift(&self, n: usize) -> DigitSeq {
        let mut out = self.clone();
        out.offset += n;
        out
    }

    /// Digit-wise reflection.
    pub fn reflect(&self) -> DigitSeq {
        let mut out = self.clone();
        out.reflected = !out.reflected;
        out
    }

    /// Copy with the digit at 1-based position `at` replaced by the next
    /// digit cyclically.  A deliberate fault-injection hook: certificate
    /// suites run against a corrupted sequence to prove they can catch a
    /// single wrong digit.
    pub fn with_corrupted_digit(&self, at: usize) -> DigitSeq {
        struct Corrupted {
            inner: DigitSeq,
            at: usize,
        }
        impl DigitStream for Corrupted {
            fn digit1(&self, i: usize) -> u64 {
                let d = self.inner.digit(i);
                if i == self.at {
                    (d + 1) % (self.inner.alphabet().max_digit() + 1)
                } else {
                    d
                }
            }
        }
        DigitSeq::from_stream(self.alphabet, Arc::new(Corrupted { inner: self.clone(), at }))
    }

    /// First `n` digits as a word.
    pub fn prefix(&self, n: usize) -> Word {
        let digits = (1..=n).map(|i| self.digit(i)).collect();
        Word { alphabet: self.alphabet, digits }
    }

    /// For an eventually periodic sequence, the canonical `(pre, per)`
    /// pair after applying shift and reflection: the period is primitive
    /// and the preperiod is as short as possible. `None` for limit or
    /// stream sequences.
    pub fn eventually_periodic_parts(&self) -> Option<(Vec<u64>, Vec<u64>)> {
        let (pre0, per0) = match &self.repr {
            SeqRepr::Periodic { pre, per } => (pre, per),
            _ => return None,
        };
        let map = |d: u64| if self.reflected { self.alphabet.m - d } else { d };
        // Apply the shift: drop offset digits off the front, rotating into
        // the period once the preperiod is consumed.
        let mut pre: Vec<u64>;
        let mut per: Vec<u64>;
        if self.offset <= pre0.len() {
            pre = pre0[self.offset..].iter().copied().map(map).collect();
            per = per0.iter().copied().map(map).collect();
        } else {
            let k = (self.offset - pre0.len()) % per0.len();
            pre = Vec::new();
            per = per0[k..].iter().chain(per0[..k].iter()).copied().map(map).collect();
        }
        // Reduce the period to its primitive root.
        let root = Word { alphabet: self.alphabet, digits: per.clone() }.primitive_root_len();
        per.truncate(root);
        // Absorb a preperiod tail that merely repeats the cycle.
        while let Some(&last) = pre.last() {
            if last != *per.last().expect("non-empty period") {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Some((pre, per))
    }

    /// True when the sequence is a finite expansion `w 0^inf`.
    pub fn is_finite_expansion(&self) -> bool {
        matches!(self.eventually_periodic_parts(), Some((_, per)) if per == [0])
    }

    /// For a finite expansion, the word before the zero tail (canonical:
    /// empty or ending in a positive digit).
    pub fn finite_word(&self) -> Option<Word> {
        match self.eventually_periodic_parts() {
            Some((pre, per)) if per == [0] => Some(Word { alphabet: self.alphabet, digits: pre }),
            _ => None,
        }
    }
}

impl fmt::Display for DigitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.eventually_periodic_parts() {
            Some((pre, per)) => {
                if per == [0] {
                    if pre.is_empty() {
                        return write!(f, "0");
                    }
                    return self.alphabet.fmt_digits(&pre, f);
                }
                self.alphabet.fmt_digits(&pre, f)?;
                write!(f, "(")?;
                self.alphabet.fmt_digits(&per, f)?;
                write!(f, ")")
            }
            None => {
                let w = self.prefix(24);
                self.alphabet.fmt_digits(w.digits(), f)?;
                write!(f, "..")
            }
        }
    }
}

/// Outcome of comparing two sequences digit-by-digit to a finite depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexOutcome {
    /// First difference at 1-based index `at`, left smaller.
    Less { at: usize },
    /// First difference at 1-based index `at`, left greater.
    Greater { at: usize },
    /// No difference in the first `depth` digits.
    EqualToDepth,
}

/// Compare `a` and `b` lexicographically through `depth` digits.
pub fn lex_compare(a: &DigitSeq, b: &DigitSeq, depth: usize) -> LexOutcome {
    for i in 1..=depth {
        let da = a.digit(i);
        let db = b.digit(i);
        match da.cmp(&db) {
            Ordering::Less => return LexOutcome::Less { at: i },
            Ordering::Greater => return LexOutcome::Greater { at: i },
            Ordering::Equal => {}
        }
    }
    LexOutcome::EqualToDepth
}

/// Exact lexicographic comparison of two eventually periodic sequences.
///
/// Returns `(ordering, index)` where `index` is the 1-based position of the
/// first difference (0 when the sequences are equal). Returns `None` when
/// either sequence is not eventually periodic or the combined period is too
/// large to expand.
pub fn cmp_exact(a: &DigitSeq, b: &DigitSeq) -> Option<(Ordering, usize)> {
    let (pre_a, per_a) = a.eventually_periodic_parts()?;
    let (pre_b, per_b) = b.eventually_periodic_parts()?;
    let lcm = num_integer::lcm(per_a.len(), per_b.len());
    if lcm > EXACT_CMP_PERIOD_CAP {
        return None;
    }
    // Two eventually periodic sequences that agree past the point where
    // both have entered their cycles, for a full common period, agree
    // forever.
    let bound = pre_a.len().max(pre_b.len()) + lcm;
    for i in 1..=bound {
        let da = a.digit(i);
        let db = b.digit(i);
        match da.cmp(&db) {
            Ordering::Equal => {}
            ord => return Some((ord, i)),
        }
    }
    Some((Ordering::Equal, 0))
}
