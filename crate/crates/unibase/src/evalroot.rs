//! Exact evaluation of digit series and base solving.
//!
//! Everything here is rational-interval arithmetic over `BigRational`:
//! series values are either exact (eventually periodic digits, closed
//! form) or two-sided enclosures (partial sum plus a geometric tail
//! bound), and bases defined by "the digit series sums to one" are
//! narrowed by bisection with exact midpoint comparisons. No floating
//! point enters any decision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::digits::{Alphabet, DigitSeq, Word};
use crate::error::{Error, Result};

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RatInterval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn strictly_below(&self, other: &RatInterval) -> bool {
        self.hi < other.lo
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = candidates[0].clone();
        let mut hi = candidates[0].clone();
        for c in &candidates[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        RatInterval { lo, hi }
    }

    pub fn add_scalar(&self, v: &BigRational) -> RatInterval {
        RatInterval { lo: &self.lo + v, hi: &self.hi + v }
    }

    pub fn mul_scalar(&self, v: &BigRational) -> RatInterval {
        if v.is_negative() {
            RatInterval { lo: &self.hi * v, hi: &self.lo * v }
        } else {
            RatInterval { lo: &self.lo * v, hi: &self.hi * v }
        }
    }

    /// Outward rounding to denominator `2^bits`; never shrinks the interval.
    pub fn compress(&self, bits: u32) -> RatInterval {
        RatInterval { lo: round_down(&self.lo, bits), hi: round_up(&self.hi, bits) }
    }

    pub fn approx_f64(&self) -> f64 {
        approx_f64(&self.mid())
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `floor(v * 2^bits) / 2^bits`.
pub(crate) fn round_down(v: &BigRational, bits: u32) -> BigRational {
    let scale = BigRational::from_integer(BigInt::one() << bits);
    (v * &scale).floor() / scale
}

/// `ceil(v * 2^bits) / 2^bits`.
pub(crate) fn round_up(v: &BigRational, bits: u32) -> BigRational {
    let scale = BigRational::from_integer(BigInt::one() << bits);
    (v * &scale).ceil() / scale
}

/// Best-effort `f64` image of a rational, for reporting only.
pub fn approx_f64(v: &BigRational) -> f64 {
    if let Some(x) = v.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Scale down by a common power of two until both parts fit.
    let nbits = v.numer().bits().max(v.denom().bits());
    let shift = nbits.saturating_sub(512) as u32;
    let scale = BigInt::one() << shift;
    let num = (v.numer() / &scale).to_f64().unwrap_or(f64::NAN);
    let den = (v.denom() / &scale).to_f64().unwrap_or(f64::NAN);
    num / den
}

/// Parse a plain decimal literal like `"1.787231650182965933"` exactly.
pub fn rat_from_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("empty decimal {s:?}")));
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("invalid decimal {s:?}")));
    }
    let num: BigInt = digits.parse().map_err(|_| Error::Parse(format!("invalid decimal {s:?}")))?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(num * BigInt::from(sign), den))
}

pub(crate) fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub(crate) fn rat_pow(base: &BigRational, exp: usize) -> BigRational {
    num_traits::pow(base.clone(), exp)
}

// ---------------------------------------------------------------------------
// Polynomials in the base (ascending coefficients).
// ---------------------------------------------------------------------------

/// Polynomial in `q` with rational coefficients, ascending degree.
pub type Poly = Vec<BigRational>;

pub(crate) fn poly_const(v: BigRational) -> Poly {
    vec![v]
}

pub(crate) fn poly_is_zero(p: &Poly) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// `q * p(q) - d`.
pub(crate) fn poly_step(p: &Poly, d: u64) -> Poly {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(-rat_int(d as i64));
    out.extend(p.iter().cloned());
    out
}

/// `(q - 1) * p(q) - m`.
pub(crate) fn poly_feasibility_gap(p: &Poly, m: u64) -> Poly {
    let mut out = vec![BigRational::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c;
    }
    out[0] -= rat_int(m as i64);
    while out.len() > 1 && out.last().map(|c| c.is_zero()).unwrap_or(false) {
        out.pop();
    }
    out
}

pub fn poly_eval_at(p: &Poly, q: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * q + c;
    }
    acc
}

/// Interval Horner evaluation over `q` in the given interval.
pub fn poly_eval_interval(p: &Poly, q: &RatInterval) -> RatInterval {
    let mut acc = RatInterval::point(BigRational::zero());
    for c in p.iter().rev() {
        acc = acc.mul(q).add_scalar(c);
    }
    acc
}

/// Bisection root enclosure for a polynomial with a sign change on `[lo, hi]`.
pub fn poly_root_bisect(p: &Poly, lo: BigRational, hi: BigRational, tol: &BigRational) -> Result<RatInterval> {
    let f_lo = poly_eval_at(p, &lo);
    let f_hi = poly_eval_at(p, &hi);
    if f_lo.is_zero() {
        return Ok(RatInterval::point(lo));
    }
    if f_hi.is_zero() {
        return Ok(RatInterval::point(hi));
    }
    if f_lo.is_positive() == f_hi.is_positive() {
        return Err(Error::NoRoot);
    }
    let mut lo = lo;
    let mut hi = hi;
    let sign_lo = f_lo.is_positive();
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / rat_int(2);
        let f_mid = poly_eval_at(p, &mid);
        if f_mid.is_zero() {
            return Ok(RatInterval::point(mid));
        }
        if f_mid.is_positive() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RatInterval::new(lo, hi))
}

// ---------------------------------------------------------------------------
// Series evaluation.
// ---------------------------------------------------------------------------

/// Value of the digit series `sum d_i q^{-i}` at an exact rational `q > 1`.
///
/// Eventually periodic sequences evaluate exactly (point interval,
/// independent of `depth`); other sequences get a partial sum through
/// `depth` digits plus a geometric tail bound.
pub fn series_value(seq: &DigitSeq, q: &BigRational, depth: usize) -> Result<RatInterval> {
    if *q <= BigRational::one() {
        return Err(Error::OutOfRange);
    }
    if let Some((pre, per)) = seq.eventually_periodic_parts() {
        let qinv = q.recip();
        // Head: sum over the preperiod.
        let mut head = BigRational::zero();
        let mut pw = BigRational::one();
        for &d in &pre {
            pw *= &qinv;
            head += rat_int(d as i64) * &pw;
        }
        // One period, scaled into place, then the geometric factor.
        let mut block = BigRational::zero();
        let mut pw2 = BigRational::one();
        for &d in &per {
            pw2 *= &qinv;
            block += rat_int(d as i64) * &pw2;
        }
        let qk = rat_pow(&qinv, pre.len());
        let qp = rat_pow(&qinv, per.len());
        let value = head + qk * block / (BigRational::one() - qp);
        return Ok(RatInterval::point(value));
    }
    // Partial sum via integer accumulation: with q = a/b in lowest terms,
    // sum_{i<=D} d_i (b/a)^i = (sum d_i b^i a^{D-i}) / a^D.
    let a = q.numer().clone();
    let b = q.denom().clone();
    let mut acc = BigInt::zero();
    let mut bpow = BigInt::one();
    for i in 1..=depth {
        bpow *= &b;
        acc = acc * &a + BigInt::from(seq.digit(i)) * &bpow;
    }
    let apow = num_traits::pow(a, depth);
    let partial = BigRational::new(acc, apow);
    // Tail: at most m * q^{-D} / (q - 1).
    let m = rat_int(seq.alphabet().max_digit() as i64);
    let tail = m * rat_pow(&q.recip(), depth) / (q - BigRational::one());
    Ok(RatInterval::new(partial.clone(), partial + tail))
}

/// Series value over an interval of bases (monotone decreasing in `q`).
pub fn series_value_interval(seq: &DigitSeq, q: &RatInterval, depth: usize) -> Result<RatInterval> {
    if q.is_point() {
        return series_value(seq, q.lo(), depth);
    }
    let at_hi = series_value(seq, q.hi(), depth)?;
    let at_lo = series_value(seq, q.lo(), depth)?;
    Ok(RatInterval::new(at_hi.lo().clone(), at_lo.hi().clone()))
}

/// Compare the series value at rational `q` against 1, sharpening the
/// partial sum adaptively for non-periodic sequences.
pub fn series_cmp_one(seq: &DigitSeq, q: &BigRational, depth_cap: usize) -> Result<Ordering> {
    if seq.eventually_periodic_parts().is_some() {
        let v = series_value(seq, q, 0)?;
        return Ok(v.lo().cmp(&BigRational::one()));
    }
    let mut depth = 64;
    loop {
        let v = series_value(seq, q, depth)?;
        if *v.hi() < BigRational::one() {
            return Ok(Ordering::Less);
        }
        if *v.lo() > BigRational::one() {
            return Ok(Ordering::Greater);
        }
        if depth >= depth_cap {
            return Err(Error::PrecisionExhausted);
        }
        depth = (depth * 2).min(depth_cap.max(depth + 1));
    }
}

// ---------------------------------------------------------------------------
// Base enclosures.
// ---------------------------------------------------------------------------

/// Two-sided enclosure of the base `q` in `(1, m+1]` at which the digit
/// series of `seq` sums to exactly 1.
///
/// The series is strictly decreasing in `q`, so bisection with exact
/// midpoint comparisons maintains `value(lo) >= 1 >= value(hi)`. A
/// midpoint where the series is exactly 1 collapses the enclosure to a
/// point.
#[derive(Debug, Clone)]
pub struct BaseEnclosure {
    seq: DigitSeq,
    lo: BigRational,
    hi: BigRational,
    floor_width: BigRational,
    depth_cap: usize,
}

impl BaseEnclosure {
    pub fn seq(&self) -> &DigitSeq {
        &self.seq
    }

    pub fn alphabet(&self) -> Alphabet {
        self.seq.alphabet()
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn interval(&self) -> RatInterval {
        RatInterval::new(self.lo.clone(), self.hi.clone())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Exact base when the enclosure has collapsed to a point.
    pub fn exact(&self) -> Option<&BigRational> {
        if self.lo == self.hi {
            Some(&self.lo)
        } else {
            None
        }
    }

    pub fn approx_f64(&self) -> f64 {
        self.interval().approx_f64()
    }

    /// One bisection step; `Ok(false)` when the enclosure is already a
    /// point or has reached its width floor.
    pub fn refine_once(&mut self) -> Result<bool> {
        if self.lo == self.hi || self.width() <= self.floor_width {
            return Ok(false);
        }
        let mid = (&self.lo + &self.hi) / rat_int(2);
        match series_cmp_one(&self.seq, &mid, self.depth_cap)? {
            Ordering::Greater => self.lo = mid,
            Ordering::Less => self.hi = mid,
            Ordering::Equal => {
                self.lo = mid.clone();
                self.hi = mid;
            }
        }
        Ok(true)
    }

    /// Refine until the width is at most `tol`.
    pub fn refine_to(&mut self, tol: &BigRational) -> Result<()> {
        while self.width() > *tol {
            if !self.refine_once()? {
                return Err(Error::PrecisionExhausted);
            }
        }
        Ok(())
    }
}

/// Degenerate (point) enclosure at an exact base with the given defining
/// sequence; crate-internal, used to wrap exact rational bases.
pub(crate) fn enclosure_from_exact(seq: DigitSeq, q: BigRational) -> BaseEnclosure {
    BaseEnclosure {
        floor_width: BigRational::new(BigInt::one(), BigInt::one() << 576),
        depth_cap: 4096,
        lo: q.clone(),
        hi: q,
        seq,
    }
}

/// Solve `series(seq, q) = 1` for `q` in `(1, m+1]` to width `tol`.
///
/// `depth_cap` bounds the adaptive partial-sum depth used for midpoint
/// comparisons of non-periodic sequences. Fails with `NoRoot` when the
/// series cannot reach 1 anywhere above 1 (zero sequence, or root at the
/// excluded left endpoint).
pub fn base_from_seq(seq: &DigitSeq, tol: &BigRational, depth_cap: usize) -> Result<BaseEnclosure> {
    let m = seq.alphabet().max_digit();
    let scan = depth_cap.max(64);
    if (1..=scan).all(|i| seq.digit(i) == 0) {
        return Err(Error::NoRoot);
    }
    let one = BigRational::one();
    // Allow later callers (feasibility refinement, digit pinning) to
    // bisect well past the requested width before giving up.
    let floor_width = tol.clone() / rat_pow(&rat_int(2), 512);
    let mut enc = BaseEnclosure {
        seq: seq.clone(),
        lo: one.clone(),
        hi: rat_int(m as i64 + 1),
        floor_width,
        depth_cap,
    };
    // The right endpoint can be an exact root (the all-m sequence).
    if series_cmp_one(seq, &enc.hi, depth_cap)? == Ordering::Equal {
        enc.lo = enc.hi.clone();
        return Ok(enc);
    }
    while enc.width() > *tol {
        if !enc.refine_once()? {
            break;
        }
    }
    if enc.lo == one {
        // The lower endpoint never moved: any root sits at the excluded
        // boundary q = 1.
        return Err(Error::NoRoot);
    }
    Ok(enc)
}

// ---------------------------------------------------------------------------
// Expansion counting.
// ---------------------------------------------------------------------------

/// The value whose expansions are being counted.
#[derive(Debug, Clone)]
pub enum Probe {
    /// An explicit rational value.
    Value(BigRational),
    /// The reciprocal `1/q` of the (possibly irrational) ambient base.
    ReciprocalBase,
}

/// Why a branch is known to admit exactly one completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Remainder identically zero: the only completion is the zero tail.
    PinnedZero,
    /// Remainder identically `m/(q-1)`: the only completion is the all-m
    /// tail.
    PinnedMax,
    /// The greedy completion of the remainder satisfies the strict
    /// two-sided tail conditions against the expansion of 1 through the
    /// stated number of digits, with every comparison witnessed.
    UniqueTail { checked_depth: usize },
}

/// Status of one digit-prefix branch in the count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchStatus {
    /// Exactly one completion, with the reason.
    Certified(Certificate),
    /// Certainly feasible at the depth horizon but not certified unique.
    FeasibleLeaf,
    /// Feasibility undecided at the precision floor.
    Indeterminate,
}

/// One branch of the expansion count.
#[derive(Debug, Clone)]
pub struct Branch {
    pub prefix: Word,
    pub status: BranchStatus,
}

/// Overall verdict of an expansion count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountVerdict {
    /// Every surviving branch carries a uniqueness certificate and no
    /// branch was left indeterminate; the count is exact (certificates
    /// are depth-qualified).
    Exactly(usize),
    /// At least this many distinct expansions exist.
    AtLeast(usize),
    /// No feasible branch survives: the value has no expansion.
    NoneFound,
    /// The probe value lies outside `[0, m/(q-1)]`.
    OutOfRange,
}

/// Report of an expansion count.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub verdict: CountVerdict,
    pub branches: Vec<Branch>,
    /// True when the node budget was exhausted before the depth horizon.
    pub truncated: bool,
}

enum Feasibility {
    Certain,
    Infeasible,
    Indeterminate,
}

fn feasibility(p: &Poly, m: u64, enc: &mut BaseEnclosure) -> Result<Feasibility> {
    loop {
        let q = enc.interval();
        let val = poly_eval_interval(p, &q);
        if val.hi().is_negative() {
            return Ok(Feasibility::Infeasible);
        }
        let gap = poly_eval_interval(&poly_feasibility_gap(p, m), &q);
        if gap.lo().is_positive() {
            return Ok(Feasibility::Infeasible);
        }
        if !val.lo().is_negative() && !gap.hi().is_positive() {
            return Ok(Feasibility::Certain);
        }
        if !enc.refine_once()? {
            return Ok(Feasibility::Indeterminate);
        }
    }
}

/// Greedy digits of the remainder polynomial over the enclosure, refined
/// until each digit is determined; `None` when a digit cannot be pinned
/// at the precision floor.
fn greedy_digits_of_remainder(
    p: &Poly,
    enc: &mut BaseEnclosure,
    count: usize,
) -> Result<Option<Vec<u64>>> {
    let m = enc.alphabet().max_digit();
    let mut r = p.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        // Next greedy digit: min(m, floor(q * r(q))), where an exact
        // integer value takes that digit (and pins the remainder to zero).
        let shifted: Poly = poly_step(&r, 0); // q * r(q)
        let d = loop {
            let w = poly_eval_interval(&shifted, &enc.interval());
            let fl = w.lo().floor();
            let fh = w.hi().floor();
            if fl == fh {
                let k = fl.to_integer();
                let k = if k.is_negative() { 0u64 } else { k.to_u64().unwrap_or(m) };
                break k.min(m);
            }
            // The floors disagree, so the interval straddles an integer
            // boundary; only refinement can pin the digit. (A point
            // interval always has equal floors, so exact bases never
            // loop here.)
            if !enc.refine_once()? {
                return Ok(None);
            }
        };
        r = poly_step(&r, d);
        out.push(d);
    }
    Ok(Some(out))
}

/// Strict two-sided tail check of a finite digit word against the digits
/// of `alpha` (the quasi-greedy expansion of 1) and its reflection: every
/// applicable comparison must produce a strict witness inside the window.
fn unique_tail_check(word: &[u64], alpha: &DigitSeq) -> Option<usize> {
    let m = alpha.alphabet().max_digit();
    let len = word.len();
    if len < 2 {
        return None;
    }
    for j in 1..len {
        let tail = &word[j..];
        if word[j - 1] < m {
            // Need tail < alpha with a witness inside the window.
            let mut witnessed = false;
            for (k, &d) in tail.iter().enumerate() {
                let a = alpha.digit(k + 1);
                match d.cmp(&a) {
                    Ordering::Less => {
                        witnessed = true;
                        break;
                    }
                    Ordering::Greater => return None,
                    Ordering::Equal => {}
                }
            }
            if !witnessed {
                return None;
            }
        }
        if word[j - 1] > 0 {
            // Need tail > reflect(alpha) with a witness inside the window.
            let mut witnessed = false;
            for (k, &d) in tail.iter().enumerate() {
                let a = m - alpha.digit(k + 1);
                match d.cmp(&a) {
                    Ordering::Greater => {
                        witnessed = true;
                        break;
                    }
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                }
            }
            if !witnessed {
                return None;
            }
        }
    }
    Some(len)
}

/// Count the expansions of a value in the base described by `enc`.
///
/// Branches are digit prefixes with exactly-representable remainder
/// polynomials in `q`; infeasible branches are pruned with certified
/// interval bounds, and surviving branches are closed by uniqueness
/// certificates where possible. `alpha`, when supplied, must be the
/// (caller-validated) quasi-greedy expansion of 1 in this base; it powers
/// the greedy-tail uniqueness certificate.
pub fn count_expansions(
    probe: &Probe,
    enc: &BaseEnclosure,
    alpha: Option<&DigitSeq>,
    depth: usize,
    node_budget: usize,
) -> Result<CountReport> {
    let mut enc = enc.clone();
    let alphabet = enc.alphabet();
    let m = alphabet.max_digit();
    let mut branches = Vec::new();
    let mut truncated = false;

    // Roots of the search: (prefix, remainder polynomial, depth used).
    let mut queue: Vec<(Vec<u64>, Poly)> = Vec::new();
    match probe {
        Probe::Value(v) => {
            if v.is_negative() {
                return Ok(CountReport { verdict: CountVerdict::OutOfRange, branches, truncated });
            }
            let p = poly_const(v.clone());
            match feasibility(&p, m, &mut enc)? {
                Feasibility::Infeasible => {
                    return Ok(CountReport { verdict: CountVerdict::OutOfRange, branches, truncated });
                }
                _ => queue.push((Vec::new(), p)),
            }
        }
        Probe::ReciprocalBase => {
            // q * (1/q) = 1, so after one digit the remainder is the
            // polynomial 1 - d, exactly.
            for d in 0..=m {
                let head = rat_int(1) - rat_int(d as i64);
                queue.push((vec![d], poly_const(head)));
            }
        }
    }

    let mut nodes = 0usize;
    let mut exact = true; // no indeterminate branches and no truncation
    let mut count_certified = 0usize;
    let mut count_feasible_leaves = 0usize;

    while let Some((prefix, p)) = queue.pop() {
        nodes += 1;
        if nodes > node_budget {
            truncated = true;
            exact = false;
            break;
        }
        match feasibility(&p, m, &mut enc)? {
            Feasibility::Infeasible => continue,
            Feasibility::Indeterminate => {
                exact = false;
                branches.push(Branch {
                    prefix: Word::new(alphabet, prefix)?,
                    status: BranchStatus::Indeterminate,
                });
                continue;
            }
            Feasibility::Certain => {}
        }
        // Pinned remainders close the branch with an exact certificate:
        // either a polynomial identity (valid at any base in the
        // enclosure) or exact evaluation at a collapsed rational base.
        let exact_base = enc.exact().cloned();
        let pinned_zero = poly_is_zero(&p)
            || exact_base.as_ref().map_or(false, |q| poly_eval_at(&p, q).is_zero());
        if pinned_zero {
            count_certified += 1;
            branches.push(Branch {
                prefix: Word::new(alphabet, prefix)?,
                status: BranchStatus::Certified(Certificate::PinnedZero),
            });
            continue;
        }
        let gap = poly_feasibility_gap(&p, m);
        let pinned_max = poly_is_zero(&gap)
            || exact_base.as_ref().map_or(false, |q| poly_eval_at(&gap, q).is_zero());
        if pinned_max {
            count_certified += 1;
            branches.push(Branch {
                prefix: Word::new(alphabet, prefix)?,
                status: BranchStatus::Certified(Certificate::PinnedMax),
            });
            continue;
        }
        if prefix.len() >= depth {
            // Depth horizon: try the greedy-tail uniqueness certificate.
            let mut status = BranchStatus::FeasibleLeaf;
            if let Some(alpha) = alpha {
                if let Some(tail) = greedy_digits_of_remainder(&p, &mut enc, depth.max(16))? {
                    if let Some(checked) = unique_tail_check(&tail, alpha) {
                        status = BranchStatus::Certified(Certificate::UniqueTail {
                            checked_depth: checked,
                        });
                    }
                }
            }
            match &status {
                BranchStatus::Certified(_) => count_certified += 1,
                _ => {
                    count_feasible_leaves += 1;
                    exact = false;
                }
            }
            branches.push(Branch { prefix: Word::new(alphabet, prefix)?, status });
            continue;
        }
        for d in 0..=m {
            let child = poly_step(&p, d);
            let mut next = prefix.clone();
            next.push(d);
            queue.push((next, child));
        }
    }

    let lower = count_certified + count_feasible_leaves;
    let verdict = if truncated {
        CountVerdict::AtLeast(lower)
    } else if exact {
        if lower == 0 {
            CountVerdict::NoneFound
        } else {
            CountVerdict::Exactly(lower)
        }
    } else {
        CountVerdict::AtLeast(lower)
    };
    branches.sort_by(|a, b| a.prefix.digits().cmp(b.prefix.digits()));
    Ok(CountReport { verdict, branches, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::{Alphabet, DigitSeq, Word};

    fn ab(m: u64) -> Alphabet {
        Alphabet::new(m).unwrap()
    }

    fn seq(m: u64, s: &str) -> DigitSeq {
        DigitSeq::parse(ab(m), s).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn periodic_series_is_exact() {
        // (10)^inf at q = 3/2: sum (2/3)^(2k+1) = (2/3)/(1-4/9) = 6/5.
        let v = series_value(&seq(1, "(10)"), &rat(3, 2), 0).unwrap();
        assert!(v.is_point());
        assert_eq!(*v.lo(), rat(6, 5));
        // Finite expansion 11 0^inf at q = 2: 3/4.
        let v = series_value(&seq(1, "11"), &rat(2, 1), 0).unwrap();
        assert_eq!(*v.lo(), rat(3, 4));
        // (1)^inf at q = 2 sums to exactly 1.
        let v = series_value(&seq(2, "(1)"), &rat(2, 1), 0).unwrap();
        assert_eq!(*v.lo(), rat(1, 1));
    }

    #[test]
    fn partial_sum_brackets_limit_value() {
        let s = DigitSeq::subst_limit(&Word::parse(ab(1), "10").unwrap()).unwrap();
        let coarse = series_value(&s, &rat(2, 1), 16).unwrap();
        let fine = series_value(&s, &rat(2, 1), 64).unwrap();
        assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
        assert!(fine.width() < rat(1, 1_000_000_000));
        // Digits 1101.. give a value a bit above 0.82.
        assert!(*fine.lo() > rat(82, 100) && *fine.hi() < rat(83, 100));
    }

    #[test]
    fn golden_base_by_bisection() {
        // (10)^inf sums to 1 exactly at the positive root of q^2 = q + 1.
        let tol = rat(1, 1i64 << 48);
        let enc = base_from_seq(&seq(1, "(10)"), &tol, 256).unwrap();
        assert!(enc.width() <= tol);
        let phi_lo = rat_from_decimal("1.61803398874989").unwrap();
        let phi_hi = rat_from_decimal("1.61803398874990").unwrap();
        assert!(*enc.lo() <= phi_hi && phi_lo <= *enc.hi());
        // Cross-check against the polynomial root.
        let p = vec![rat(-1, 1), rat(-1, 1), rat(1, 1)];
        let root = poly_root_bisect(&p, rat(1, 1), rat(2, 1), &tol).unwrap();
        assert!(enc.lo() <= root.hi() && root.lo() <= enc.hi());
    }

    #[test]
    fn exact_rational_base_collapses() {
        // (1)^inf over {0,1,2} pins q = 2 exactly.
        let enc = base_from_seq(&seq(2, "(1)"), &rat(1, 1024), 256).unwrap();
        assert_eq!(enc.exact(), Some(&rat(2, 1)));
        // m^inf pins q = m + 1 exactly.
        let enc = base_from_seq(&seq(2, "(2)"), &rat(1, 1024), 256).unwrap();
        assert_eq!(enc.exact(), Some(&rat(3, 1)));
    }

    #[test]
    fn no_root_cases() {
        let z = Word::parse(ab(1), "0001").unwrap().zero_tail_seq();
        // A single unit digit reaches 1 only at the excluded endpoint.
        assert!(matches!(base_from_seq(&z, &rat(1, 1 << 20), 256), Err(Error::NoRoot)));
        let all_zero = Word::parse(ab(1), "0").unwrap().zero_tail_seq();
        assert!(matches!(base_from_seq(&all_zero, &rat(1, 4), 64), Err(Error::NoRoot)));
    }

    #[test]
    fn count_value_one_at_base_two() {
        let enc = base_from_seq(&seq(1, "(1)"), &rat(1, 1024), 256).unwrap();
        assert_eq!(enc.exact(), Some(&rat(2, 1)));
        let report =
            count_expansions(&Probe::Value(rat(1, 1)), &enc, None, 12, 4096).unwrap();
        assert_eq!(report.verdict, CountVerdict::Exactly(1));
        assert_eq!(report.branches.len(), 1);
        assert_eq!(report.branches[0].status, BranchStatus::Certified(Certificate::PinnedMax));
    }

    #[test]
    fn count_reciprocal_at_base_two() {
        let enc = base_from_seq(&seq(1, "(1)"), &rat(1, 1024), 256).unwrap();
        let report = count_expansions(&Probe::ReciprocalBase, &enc, None, 12, 4096).unwrap();
        assert_eq!(report.verdict, CountVerdict::Exactly(2));
        let statuses: Vec<_> = report
            .branches
            .iter()
            .map(|b| (b.prefix.to_string(), b.status.clone()))
            .collect();
        assert_eq!(statuses.len(), 2);
        assert_eq!(statuses[0].0, "0");
        assert_eq!(statuses[0].1, BranchStatus::Certified(Certificate::PinnedMax));
        assert_eq!(statuses[1].0, "1");
        assert_eq!(statuses[1].1, BranchStatus::Certified(Certificate::PinnedZero));
    }

    #[test]
    fn count_out_of_range() {
        let enc = base_from_seq(&seq(1, "(1)"), &rat(1, 1024), 256).unwrap();
        let report =
            count_expansions(&Probe::Value(rat(3, 1)), &enc, None, 8, 4096).unwrap();
        assert_eq!(report.verdict, CountVerdict::OutOfRange);
        let report =
            count_expansions(&Probe::Value(rat(-1, 2)), &enc, None, 8, 4096).unwrap();
        assert_eq!(report.verdict, CountVerdict::OutOfRange);
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(rat_from_decimal("1.5").unwrap(), rat(3, 2));
        assert_eq!(rat_from_decimal("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(rat_from_decimal("3").unwrap(), rat(3, 1));
        assert!(rat_from_decimal("1.2.3").is_err());
    }

    #[test]
    fn interval_arithmetic() {
        let a = RatInterval::new(rat(-1, 2), rat(1, 3));
        let b = RatInterval::new(rat(2, 1), rat(3, 1));
        let p = a.mul(&b);
        assert_eq!(*p.lo(), rat(-3, 2));
        assert_eq!(*p.hi(), rat(1, 1));
        let c = a.compress(4);
        assert!(c.lo() <= a.lo() && a.hi() <= c.hi());
        assert_eq!(*c.lo(), rat(-8, 16));
        assert_eq!(*c.hi(), rat(6, 16));
    }
}
