//! Greedy and quasi-greedy expansions of 1 and their lexicographic
//! validity characterizations.
//!
//! For a base `q` in `(1, m+1]`, `beta(q)` is the greedy expansion of 1
//! (ties take the digit) and `alpha(q)` is the quasi-greedy expansion:
//! the lexicographically largest *infinite* expansion of 1. A digit
//! sequence is a valid `alpha` iff every tail after a digit below `m` is
//! lexicographically at most the sequence itself, and a valid `beta` iff
//! those tails are strictly smaller. Both maps are strictly increasing
//! in `q`, which makes exact bisection the workhorse everywhere else in
//! the crate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::digits::{cmp_exact, Alphabet, DigitSeq, DigitStream, Word};
use crate::error::{Error, Result};
use crate::evalroot::{
    poly_const, poly_eval_interval, poly_is_zero, poly_step, BaseEnclosure, Poly,
};

/// Largest integer strictly below `v`.
pub(crate) fn strict_floor(v: &BigRational) -> BigInt {
    if v.is_integer() {
        v.to_integer() - 1
    } else {
        v.floor().to_integer()
    }
}

fn digit_from_int(k: BigInt, m: u64) -> u64 {
    if k.sign() == num_bigint::Sign::Minus {
        0
    } else {
        k.to_u64().map_or(m, |d| d.min(m))
    }
}

fn check_domain(alphabet: Alphabet, x: &BigRational, q: &BigRational) -> Result<()> {
    let m = BigRational::from_integer(alphabet.max_digit().into());
    let one = BigRational::one();
    if *q <= one || *q > &m + &one {
        return Err(Error::OutOfRange);
    }
    if x < &BigRational::zero() || *x > m / (q - one) {
        return Err(Error::OutOfRange);
    }
    Ok(())
}

/// First `n` greedy digits of `x` in base `q`: each digit is the largest
/// in `{0,..,m}` keeping the partial sum at most `x` (an exact hit takes
/// the digit).
pub fn greedy_expand(alphabet: Alphabet, x: &BigRational, q: &BigRational, n: usize) -> Result<Word> {
    expand_value(alphabet, x, q, n, true)
}

/// First `n` quasi-greedy digits of `x` in base `q`: the largest digits
/// whose partial sums stay strictly below `x`, producing the
/// lexicographically largest infinite expansion (all zeros for `x = 0`).
pub fn quasi_greedy_expand(
    alphabet: Alphabet,
    x: &BigRational,
    q: &BigRational,
    n: usize,
) -> Result<Word> {
    expand_value(alphabet, x, q, n, false)
}

fn expand_value(
    alphabet: Alphabet,
    x: &BigRational,
    q: &BigRational,
    n: usize,
    greedy: bool,
) -> Result<Word> {
    check_domain(alphabet, x, q)?;
    let m = alphabet.max_digit();
    let mut digits = Vec::with_capacity(n);
    let mut r = x.clone();
    for _ in 0..n {
        if r.is_zero() {
            digits.push(0);
            continue;
        }
        let v = q * &r;
        let k = if greedy { v.floor().to_integer() } else { strict_floor(&v) };
        let d = digit_from_int(k, m);
        digits.push(d);
        r = v - BigRational::from_integer(d.into());
    }
    Word::new(alphabet, digits)
}

/// Digit stream continuing a rational expansion of 1 from a saved
/// remainder; pure exact arithmetic, so digits never fail.
struct RationalExpansionStream {
    m: u64,
    q: BigRational,
    greedy: bool,
    memo: Mutex<(Vec<u64>, BigRational)>,
}

impl DigitStream for RationalExpansionStream {
    fn digit1(&self, i: usize) -> u64 {
        let mut memo = self.memo.lock().expect("expansion memo poisoned");
        let (digits, r) = &mut *memo;
        while digits.len() < i {
            if r.is_zero() {
                digits.push(0);
                continue;
            }
            let v = &self.q * &*r;
            let k = if self.greedy { v.floor().to_integer() } else { strict_floor(&v) };
            let d = digit_from_int(k, self.m);
            digits.push(d);
            *r = v - BigRational::from_integer(d.into());
        }
        digits[i - 1]
    }
}

/// How many steps of remainder tracking to spend looking for an exact
/// cycle before falling back to a lazy stream.
const CYCLE_DETECT_CAP: usize = 512;

/// Expansion of 1 at an exact rational base, with cycle detection: the
/// result is eventually periodic (or finite) whenever the remainder
/// orbit closes within the cap, else a lazy exact stream.
fn expand_one_rational(alphabet: Alphabet, q: &BigRational, greedy: bool) -> Result<DigitSeq> {
    check_domain(alphabet, &BigRational::one(), q)?;
    let m = alphabet.max_digit();
    let mut digits: Vec<u64> = Vec::new();
    let mut seen: HashMap<BigRational, usize> = HashMap::new();
    let mut r = BigRational::one();
    for _ in 0..CYCLE_DETECT_CAP {
        if r.is_zero() {
            let pre = Word::new(alphabet, digits)?;
            return Ok(pre.zero_tail_seq());
        }
        if let Some(&j) = seen.get(&r) {
            let pre = Word::new(alphabet, digits[..j].to_vec())?;
            let per = Word::new(alphabet, digits[j..].to_vec())?;
            return DigitSeq::periodic(&pre, &per);
        }
        seen.insert(r.clone(), digits.len());
        let v = q * &r;
        let k = if greedy { v.floor().to_integer() } else { strict_floor(&v) };
        let d = digit_from_int(k, m);
        digits.push(d);
        r = v - BigRational::from_integer(d.into());
    }
    let stream = RationalExpansionStream {
        m,
        q: q.clone(),
        greedy,
        memo: Mutex::new((digits, r)),
    };
    Ok(DigitSeq::from_stream(alphabet, Arc::new(stream)))
}

/// Digit stream that only knows a precomputed window; reading past it is
/// a crate-internal bug.
struct FixedPrefixStream {
    digits: Vec<u64>,
}

impl DigitStream for FixedPrefixStream {
    fn digit1(&self, i: usize) -> u64 {
        assert!(
            i <= self.digits.len(),
            "digit {i} requested beyond the computed window of {}",
            self.digits.len()
        );
        self.digits[i - 1]
    }
}

/// Expansion digits of 1 over a base enclosure, by tracking the
/// remainder as an exact polynomial in `q` and refining the enclosure
/// until each digit is pinned.
fn expand_one_enclosure(enc: &BaseEnclosure, greedy: bool, n: usize) -> Result<Vec<u64>> {
    let mut enc = enc.clone();
    let m = enc.alphabet().max_digit();
    let m_rat = BigRational::from_integer(m.into());
    let mut r: Poly = poly_const(BigRational::one());
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        if poly_is_zero(&r) {
            digits.push(0);
            continue;
        }
        let v = poly_step(&r, 0); // q * r(q)
        let d = loop {
            let w = poly_eval_interval(&v, &enc.interval());
            // Values above m always clamp to digit m, whatever the floor.
            if *w.lo() > m_rat {
                break m;
            }
            let decided = if greedy {
                let fl = w.lo().floor();
                if fl == w.hi().floor() {
                    Some(digit_from_int(fl.to_integer(), m))
                } else {
                    None
                }
            } else {
                let fl = strict_floor(w.lo());
                if fl == strict_floor(w.hi()) {
                    Some(digit_from_int(fl, m))
                } else {
                    None
                }
            };
            if let Some(d) = decided {
                break d;
            }
            if !enc.refine_once()? {
                return Err(Error::PrecisionExhausted);
            }
        };
        digits.push(d);
        r = poly_step(&r, d);
    }
    Ok(digits)
}

/// Verdict of a truncated lexicographic validity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParryVerdict {
    /// No violation through the given depth.
    ValidToDepth(usize),
    /// The tail after 1-based position `index` breaks the inequality.
    Invalid { index: usize },
}

impl ParryVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ParryVerdict::ValidToDepth(_))
    }
}

/// Decision for an eventually periodic sequence, where the check is
/// exhaustive rather than depth-truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactValidity {
    Valid,
    Invalid { index: usize },
}

fn check_tails(seq: &DigitSeq, depth: usize, strict: bool) -> ParryVerdict {
    let m = seq.alphabet().max_digit();
    let periodic = seq.eventually_periodic_parts().is_some();
    for n in 1..=depth {
        if seq.digit(n) >= m {
            continue;
        }
        if periodic {
            // Both sides eventually periodic: the comparison is exact.
            let (ord, _) = cmp_exact(&seq.shift(n), seq)
                .expect("periodic sequences always compare exactly");
            match ord {
                Ordering::Greater => return ParryVerdict::Invalid { index: n },
                Ordering::Equal if strict => return ParryVerdict::Invalid { index: n },
                _ => {}
            }
        } else {
            // Window comparison truncated at `depth`; equality through
            // the window is not a certified violation.
            for k in 1..=depth.saturating_sub(n) {
                match seq.digit(n + k).cmp(&seq.digit(k)) {
                    Ordering::Greater => return ParryVerdict::Invalid { index: n },
                    Ordering::Less => break,
                    Ordering::Equal => {}
                }
            }
        }
    }
    ParryVerdict::ValidToDepth(depth)
}

/// Check the quasi-greedy validity condition: for every `n <= depth`
/// with the `n`-th digit below `m`, the tail from `n+1` is at most the
/// whole sequence. Eventually periodic sequences are compared exactly.
pub fn parry_check_alpha(seq: &DigitSeq, depth: usize) -> ParryVerdict {
    check_tails(seq, depth, false)
}

/// Strict variant characterizing greedy expansions of 1: tails after a
/// digit below `m` must be strictly smaller than the sequence.
pub fn parry_check_beta(seq: &DigitSeq, depth: usize) -> ParryVerdict {
    check_tails(seq, depth, true)
}

fn exact_validity(seq: &DigitSeq, strict: bool) -> Option<ExactValidity> {
    let (pre, per) = seq.eventually_periodic_parts()?;
    let m = seq.alphabet().max_digit();
    // Shifts beyond preperiod + period repeat earlier shifts, so this
    // bound makes the check exhaustive.
    let bound = pre.len() + per.len();
    for n in 1..=bound {
        if seq.digit(n) >= m {
            continue;
        }
        let (ord, _) = cmp_exact(&seq.shift(n), seq)?;
        match ord {
            Ordering::Greater => return Some(ExactValidity::Invalid { index: n }),
            Ordering::Equal if strict => return Some(ExactValidity::Invalid { index: n }),
            _ => {}
        }
    }
    Some(ExactValidity::Valid)
}

/// Exhaustive quasi-greedy validity for an eventually periodic sequence
/// (`None` when the sequence is not eventually periodic).
pub fn alpha_valid_exact(seq: &DigitSeq) -> Option<ExactValidity> {
    exact_validity(seq, false)
}

/// Exhaustive greedy validity for an eventually periodic sequence.
pub fn beta_valid_exact(seq: &DigitSeq) -> Option<ExactValidity> {
    exact_validity(seq, true)
}

/// Quasi-greedy expansion from a finite greedy expansion: when the
/// greedy expansion of 1 is `w 0^inf` with `w` ending in a positive
/// digit, the quasi-greedy expansion is `(w^minus)^inf` — the same base,
/// exactly, since dropping the final unit and cycling re-sums to 1.
pub fn quasi_from_finite_greedy(w: &Word) -> Result<DigitSeq> {
    Ok(w.minus()?.cycle_seq())
}

/// Base handle for an exact rational `q` in `[1, m+1]`; the defining
/// sequence is the quasi-greedy expansion of 1 (the zero sequence under
/// the degenerate base-1 convention).
pub fn base_from_rational(alphabet: Alphabet, q: &BigRational) -> Result<BaseEnclosure> {
    let one = BigRational::one();
    let top = BigRational::from_integer((alphabet.max_digit() + 1).into());
    if *q < one || *q > top {
        return Err(Error::OutOfRange);
    }
    let seq = if q.is_one() {
        Word::new(alphabet, vec![0])?.zero_tail_seq()
    } else {
        expand_one_rational(alphabet, q, false)?
    };
    Ok(crate::evalroot::enclosure_from_exact(seq, q.clone()))
}

/// The quasi-greedy expansion of 1, as a full sequence.
///
/// Resolution order: exact rational bases expand directly (with cycle
/// detection, so periodic answers come back exact); an enclosure whose
/// defining sequence is itself a valid quasi-greedy expansion returns
/// that sequence (exhaustively validated when eventually periodic,
/// depth-validated otherwise); a finite-greedy defining sequence
/// converts via `quasi_from_finite_greedy`; anything else falls back to
/// polynomial-remainder digits over the refining enclosure, valid
/// through `depth` digits only.
pub fn alpha_seq(enc: &BaseEnclosure, depth: usize) -> Result<DigitSeq> {
    let alphabet = enc.alphabet();
    if let Some(q) = enc.exact() {
        if q.is_one() {
            // Degenerate convention: the quasi-greedy expansion of 1 in
            // base 1 is the zero sequence.
            return Ok(Word::new(alphabet, vec![0])?.zero_tail_seq());
        }
        return expand_one_rational(alphabet, q, false);
    }
    let defseq = enc.seq();
    match defseq.eventually_periodic_parts() {
        Some((_, per)) if per != [0] => {
            if alpha_valid_exact(defseq) == Some(ExactValidity::Valid) {
                return Ok(defseq.clone());
            }
        }
        Some(_) => {
            // Finite defining sequence: read it as a greedy expansion.
            if beta_valid_exact(defseq) == Some(ExactValidity::Valid) {
                if let Some(w) = defseq.finite_word() {
                    let alpha = quasi_from_finite_greedy(&w)?;
                    debug_assert_eq!(alpha_valid_exact(&alpha), Some(ExactValidity::Valid));
                    return Ok(alpha);
                }
            }
        }
        None => {
            if parry_check_alpha(defseq, depth).is_valid() {
                return Ok(defseq.clone());
            }
        }
    }
    let digits = expand_one_enclosure(enc, false, depth)?;
    Ok(DigitSeq::from_stream(alphabet, Arc::new(FixedPrefixStream { digits })))
}

/// The greedy expansion of 1, as a full sequence.
///
/// Resolution order mirrors `alpha_seq`: exact rational bases expand
/// directly; a purely periodic valid quasi-greedy defining sequence
/// `w^inf` converts to the finite greedy expansion `w^plus 0^inf` (an
/// exact identity at the same base); a defining sequence that is itself
/// greedy-valid is returned as-is; otherwise polynomial-remainder
/// digits, valid through `depth`.
pub fn beta_seq(enc: &BaseEnclosure, depth: usize) -> Result<DigitSeq> {
    let alphabet = enc.alphabet();
    if let Some(q) = enc.exact() {
        if q.is_one() {
            // Degenerate convention: greedy expansion of 1 in base 1.
            return Ok(Word::new(alphabet, vec![1, 0])?.zero_tail_seq());
        }
        return expand_one_rational(alphabet, q, true);
    }
    let defseq = enc.seq();
    if let Some((pre, per)) = defseq.eventually_periodic_parts() {
        if pre.is_empty() && per != [0] && alpha_valid_exact(defseq) == Some(ExactValidity::Valid)
        {
            let candidate = Word::new(alphabet, per)?.plus()?.zero_tail_seq();
            if beta_valid_exact(&candidate) == Some(ExactValidity::Valid) {
                return Ok(candidate);
            }
        }
        if beta_valid_exact(defseq) == Some(ExactValidity::Valid) {
            return Ok(defseq.clone());
        }
    } else if parry_check_beta(defseq, depth).is_valid()
        && parry_check_alpha(defseq, depth).is_valid()
    {
        // Infinite-kind defining sequence valid both ways to depth: the
        // greedy expansion is infinite and coincides with it.
        return Ok(defseq.clone());
    }
    let digits = expand_one_enclosure(enc, true, depth)?;
    Ok(DigitSeq::from_stream(alphabet, Arc::new(FixedPrefixStream { digits })))
}

/// First `n` digits of the quasi-greedy expansion of 1 in the enclosed
/// base, auto-refining the enclosure as digits demand.
pub fn alpha_of(enc: &BaseEnclosure, n: usize) -> Result<Word> {
    Ok(alpha_seq(enc, n)?.prefix(n))
}

/// First `n` digits of the greedy expansion of 1 in the enclosed base.
pub fn beta_of(enc: &BaseEnclosure, n: usize) -> Result<Word> {
    Ok(beta_seq(enc, n)?.prefix(n))
}

/// The two canonical expansions of 1 in a base, bundled.
#[derive(Debug, Clone)]
pub struct ExpansionPair {
    pub alpha: DigitSeq,
    pub beta: DigitSeq,
    pub base: BaseEnclosure,
}

/// Quasi-greedy and greedy expansions of 1, resolved through `depth`
/// digits of certification.
pub fn expansion_pair(enc: &BaseEnclosure, depth: usize) -> Result<ExpansionPair> {
    Ok(ExpansionPair {
        alpha: alpha_seq(enc, depth)?,
        beta: beta_seq(enc, depth)?,
        base: enc.clone(),
    })
}
