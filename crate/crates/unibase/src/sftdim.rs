//! Shift spaces of window blocks and the dimension bounds they certify.
//!
//! At doubling level `n`, the four words — the level word, the level word
//! with its final digit lowered, and the reflections of both — generate a
//! shift space: bi-infinite block chains restricted by a follower
//! relation with six edges.  Every chain, read as digits, passes the
//! two-sided uniqueness test at the `n`-th approximating base and above,
//! so the space embeds into the uniqueness sets there.  The embedding
//! transports entropy: the similarity dimension of the projected
//! uniqueness set is at least `log(radius) / (2^n p log(M+1))`, where the
//! radius is the spectral radius of the follower relation.
//!
//! Everything here is certified with exact rational arithmetic: spectral
//! radii by power iteration with two-sided ratio bounds, logarithms by
//! repeated squaring with directed rounding, path checks by exhaustive
//! enumeration (path counts grow like Fibonacci numbers, so exhaustion is
//! cheap), and the boundary of the method by an explicit excluded word
//! whose every continuation fails two approximation levels further down.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::components::{omega_n, r_n, rn_seq, Component, VerifyReport};
use crate::digits::{cmp_exact, lex_compare, DigitSeq, LexOutcome, Word};
use crate::error::{Error, Result};
use crate::evalroot::{
    base_from_seq, rat_pow, round_down, round_up, series_value, BaseEnclosure, RatInterval,
};
use crate::parry::alpha_seq;
use crate::univoque::{in_uq_prime_seq, komornik_loreti};

/// Series evaluation horizon used when solving for bases internally.
const BASE_DEPTH_CAP: usize = 4096;

/// Iteration budget for the spectral-radius enclosure.
const PERRON_MAX_ITERS: usize = 100_000;

/// Working precision (bits) for the certificates inside a dimension
/// bound: approximant enclosures, the spectral radius, and logarithms.
const CERT_BITS: u32 = 96;

/// How many blocks deep the excluded word is extended when demonstrating
/// that its continuations still pass at the bound's own base.
const EXCLUSION_EXTENSION_BLOCKS: usize = 8;

/// `2^e` as an exact rational, `e` possibly negative.
fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

fn bits_tol(bits: u32) -> BigRational {
    pow2(-(bits as i64))
}

// ---------------------------------------------------------------------------
// The block shift space.
// ---------------------------------------------------------------------------

/// A finite directed graph whose vertices carry equal-length words;
/// walks spell digit sequences by concatenating the words they visit.
#[derive(Debug, Clone)]
pub struct SftGraph {
    /// One labelling word per state.
    pub states: Vec<Word>,
    /// `adjacency[i][j]` is true when state `j` may follow state `i`.
    pub adjacency: Vec<Vec<bool>>,
}

impl SftGraph {
    pub fn size(&self) -> usize {
        self.states.len()
    }

    /// Common length of the state words.
    pub fn state_len(&self) -> usize {
        let len = self.states.first().map_or(0, Word::len);
        assert!(
            self.states.iter().all(|w| w.len() == len),
            "state words must share one length"
        );
        len
    }

    /// True when every state reaches every other along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.size();
        if n == 0 {
            return true;
        }
        let reachable = |forward: bool| -> usize {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let edge = if forward { self.adjacency[i][j] } else { self.adjacency[j][i] };
                    if edge && !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
            count
        };
        reachable(true) == n && reachable(false) == n
    }

    /// True when consecutive path entries all follow edges.
    pub fn is_legal_path(&self, path: &[usize]) -> bool {
        path.windows(2).all(|e| self.adjacency[e[0]][e[1]])
    }

    /// Number of directed paths with `edges` steps starting at `from`.
    pub fn path_count(&self, from: usize, edges: usize) -> u128 {
        let n = self.size();
        let mut counts = vec![1u128; n];
        for _ in 0..edges {
            let next: Vec<u128> = (0..n)
                .map(|i| (0..n).filter(|&j| self.adjacency[i][j]).map(|j| counts[j]).sum())
                .collect();
            counts = next;
        }
        counts[from]
    }

    /// All directed paths with `edges` steps starting at `from`, each as
    /// its full state sequence, ordered by the state indices chosen.
    pub fn paths_from(&self, from: usize, edges: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![from];
        self.walk(&mut cur, edges, &mut out);
        out
    }

    fn walk(&self, cur: &mut Vec<usize>, remaining: usize, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        let here = *cur.last().expect("walk starts from a state");
        for j in 0..self.size() {
            if self.adjacency[here][j] {
                cur.push(j);
                self.walk(cur, remaining - 1, out);
                cur.pop();
            }
        }
    }

    /// Digits spelled by a state path.
    pub fn word_of_path(&self, path: &[usize]) -> Word {
        assert!(!path.is_empty(), "empty state path");
        let mut w = self.states[path[0]].clone();
        for &s in &path[1..] {
            w = w.concat(&self.states[s]);
        }
        w
    }
}

/// The four-block shift space of a window at doubling level `n >= 1`.
///
/// States, in order: the level word, the level word with its final digit
/// lowered, the reflected level word, and the reflected-and-raised word.
/// A plain or reflected word may only be followed by one of the two
/// reflected (respectively plain) forms that completes a word one level
/// up; the lowered and raised forms are followed by the plain
/// (respectively reflected) word or themselves.
pub fn make_xa(comp: &Component, n: usize) -> Result<SftGraph> {
    if n == 0 {
        return Err(Error::OutOfRange);
    }
    let len = (1usize << n) * comp.block.len();
    let xi = comp.theta.prefix(len);
    let xim = xi.minus()?;
    let rxi = xi.reflect();
    let rxim = xim.reflect();
    let adjacency = vec![
        vec![false, false, true, true],
        vec![true, false, false, false],
        vec![true, true, false, false],
        vec![false, false, true, false],
    ];
    Ok(SftGraph { states: vec![xi, xim, rxi, rxim], adjacency })
}

/// Continues a path word inside the shift space forever: the lowered and
/// raised states bridge to their plain neighbour, then the two plain
/// blocks alternate.  The result is eventually periodic, so downstream
/// comparisons certify exactly.
fn complete_from(g: &SftGraph, pre: Word, last_state: usize) -> Result<DigitSeq> {
    let (bridge, cycle) = match last_state {
        0 => (None, [2usize, 0]),
        1 => (Some(0usize), [2, 0]),
        2 => (None, [0, 2]),
        3 => (Some(2), [0, 2]),
        other => panic!("state {other} outside the four-state space"),
    };
    let mut pre = pre;
    if let Some(b) = bridge {
        pre = pre.concat(&g.states[b]);
    }
    let per = g.states[cycle[0]].concat(&g.states[cycle[1]]);
    DigitSeq::periodic(&pre, &per)
}

// ---------------------------------------------------------------------------
// Spectral radius.
// ---------------------------------------------------------------------------

/// Certified enclosure of the spectral radius of a nonnegative 0/1
/// matrix, by exact-rational power iteration.
///
/// For any strictly positive vector `v`, the ratios `(Av)_i / v_i`
/// bracket the spectral radius of a nonnegative matrix, so every
/// iteration yields a valid enclosure; the running intersection can only
/// tighten and converges whenever the dominant eigenvalue is simple in
/// modulus.  Rows without any edge are rejected (the iterates would lose
/// positivity).
pub fn perron_root(g: &SftGraph, tol: &BigRational) -> Result<RatInterval> {
    let n = g.adjacency.len();
    if n == 0 {
        return Err(Error::OutOfRange);
    }
    assert!(
        g.adjacency.iter().all(|row| row.len() == n),
        "adjacency must be square"
    );
    if !g.adjacency.iter().all(|row| row.iter().any(|&e| e)) {
        return Err(Error::OutOfRange);
    }
    let mut v: Vec<BigRational> = vec![BigRational::one(); n];
    let mut best_lo: Option<BigRational> = None;
    let mut best_hi: Option<BigRational> = None;
    for _ in 0..PERRON_MAX_ITERS {
        let w: Vec<BigRational> = (0..n)
            .map(|i| {
                let mut acc = BigRational::new(BigInt::from(0), BigInt::one());
                for j in 0..n {
                    if g.adjacency[i][j] {
                        acc += &v[j];
                    }
                }
                acc
            })
            .collect();
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for i in 0..n {
            let ratio = &w[i] / &v[i];
            if lo.as_ref().map_or(true, |l| ratio < *l) {
                lo = Some(ratio.clone());
            }
            if hi.as_ref().map_or(true, |h| ratio > *h) {
                hi = Some(ratio);
            }
        }
        let lo = lo.expect("nonempty matrix");
        let hi = hi.expect("nonempty matrix");
        if best_lo.as_ref().map_or(true, |b| lo > *b) {
            best_lo = Some(lo);
        }
        if best_hi.as_ref().map_or(true, |b| hi < *b) {
            best_hi = Some(hi);
        }
        let (blo, bhi) = (best_lo.as_ref().unwrap(), best_hi.as_ref().unwrap());
        if bhi - blo <= *tol {
            return Ok(RatInterval::new(blo.clone(), bhi.clone()));
        }
        let max = w.iter().max().expect("nonempty iterate").clone();
        v = w.into_iter().map(|x| x / &max).collect();
    }
    Err(Error::PrecisionExhausted)
}

// ---------------------------------------------------------------------------
// Logarithms as intervals.
// ---------------------------------------------------------------------------

/// Floor of the base-2 logarithm of a positive rational: the unique `e`
/// with `2^e <= v < 2^{e+1}`.
fn floor_log2(v: &BigRational) -> i64 {
    debug_assert!(v.is_positive());
    let mut e = v.numer().bits() as i64 - v.denom().bits() as i64;
    while pow2(e + 1) <= *v {
        e += 1;
    }
    while pow2(e) > *v {
        e -= 1;
    }
    e
}

/// One-sided base-2 logarithm of a positive rational by repeated
/// squaring with directed rounding: a lower bound when `upper` is false,
/// an upper bound otherwise, within `2^-bits` of the true value.
///
/// The invariant `acc + log2(m)/2^k  <=  log2(v)` (reversed for the
/// upper direction) survives both the exact square-and-halve step and
/// the directed rounding of `m`, so the returned bound is rigorous no
/// matter how rounding interacts with the digit decisions.
fn log2_directed(v: &BigRational, bits: u32, upper: bool) -> BigRational {
    debug_assert!(v.is_positive());
    let e = floor_log2(v);
    let mut m = v / pow2(e);
    let mut acc = BigRational::from_integer(BigInt::from(e));
    if m.is_one() {
        return acc;
    }
    let work = bits + 8;
    let prec = work + 8;
    let two = BigRational::from_integer(2.into());
    let mut step = pow2(-1);
    for _ in 0..work {
        m = &m * &m;
        m = if upper { round_up(&m, prec) } else { round_down(&m, prec) };
        if m >= two {
            m /= &two;
            acc += &step;
        }
        step /= &two;
    }
    if upper {
        // Pad by the undistilled fraction: `log2(m)` is below 1 plus the
        // accumulated rounding drift, scaled by `2^-work`.
        acc + pow2(-(work as i64 - 1))
    } else {
        acc
    }
}

/// Interval base-2 logarithm: encloses `log2` over the whole input.
/// Exact powers of two at both ends give a point or integer-ended
/// interval.
pub fn log2_interval(x: &RatInterval, bits: u32) -> Result<RatInterval> {
    if !x.lo().is_positive() {
        return Err(Error::OutOfRange);
    }
    Ok(RatInterval::new(
        log2_directed(x.lo(), bits, false),
        log2_directed(x.hi(), bits, true),
    ))
}

/// Interval quotient with a strictly positive divisor.
fn div_interval(a: &RatInterval, b: &RatInterval) -> RatInterval {
    assert!(b.lo().is_positive(), "divisor must be strictly positive");
    let lo_a = a.lo() / b.lo();
    let lo_b = a.lo() / b.hi();
    let hi_a = a.hi() / b.lo();
    let hi_b = a.hi() / b.hi();
    RatInterval::new(lo_a.min(lo_b), hi_a.max(hi_b))
}

// ---------------------------------------------------------------------------
// The dimension bound and its excluded-word certificate.
// ---------------------------------------------------------------------------

/// The excluded-prefix witness materialized with a dimension bound: a
/// legal word of the shift space which, continued in any way whatsoever,
/// fails the uniqueness test two approximation levels further down.
#[derive(Debug, Clone)]
pub struct ExclusionCertificate {
    /// The word: lowered block, plain block, raised reflection, then
    /// three reflected/plain pairs.
    pub word: Word,
    /// Its state path through the shift graph.
    pub state_path: Vec<usize>,
    /// Shift index at which every continuation breaks the upper tail
    /// constraint (the digit there is below the maximum).
    pub violation_index: usize,
    /// Absolute digit position certifying the strict excess.  It falls
    /// inside the word itself, which is why no continuation escapes.
    pub resolved_at: usize,
}

/// A certified lower bound for the similarity dimension of the projected
/// uniqueness set at a base, as a ratio of interval logarithms.
#[derive(Debug, Clone)]
pub struct DimBound {
    /// Enclosure of the spectral radius whose logarithm is the numerator.
    pub value_log_numer: RatInterval,
    /// Block count `2^n p` in the symbolic denominator `2^n p log(M+1)`.
    pub denom_blocks: usize,
    /// The `M + 1` in the symbolic denominator.
    pub alphabet_size: u64,
    /// Rigorous interval for `log(radius) / (2^n p log(M+1))`.
    pub numeric: RatInterval,
    /// The excluded-word construction certified alongside the bound.
    pub exclusion: ExclusionCertificate,
}

impl DimBound {
    /// Display-only float image of the bound.
    pub fn approx_f64(&self) -> f64 {
        self.numeric.approx_f64()
    }
}

/// First difference between two equal-length words.
fn word_cmp_at(a: &Word, b: &Word) -> (Ordering, usize) {
    debug_assert_eq!(a.len(), b.len());
    for k in 1..=a.len() {
        match a.digit(k).cmp(&b.digit(k)) {
            Ordering::Equal => {}
            ord => return (ord, k),
        }
    }
    (Ordering::Equal, 0)
}

/// Certified dimension lower bound at a base strictly above the window.
///
/// `n` must be the minimal level whose approximating base lies strictly
/// below `r_enc` (checked: the level-`n` enclosure must clear the base
/// and, for `n >= 2`, the level-`n-1` enclosure must not).  The bound is
/// `log(radius) / (2^n p log(M+1))` as a rigorous interval, positive.
///
/// Three further certificates accompany it.  (a) The excluded word — the
/// lowered block, the plain block, the raised reflection, then three
/// reflected/plain pairs — walks a legal state path.  (b) Every
/// extension of that word by eight further blocks, completed canonically,
/// still passes the two-sided uniqueness test at `r_enc` with every
/// comparison strictly certified: the shift space embeds whole, excluded
/// word included.  (c) Dropping the word's first block leaves a word
/// strictly above the equally long prefix of the substitution limit —
/// and that prefix starts the expansion of 1 at the level-`n+2`
/// approximant, so every sequence beginning with the excluded word
/// breaks the upper tail constraint there, two levels below `r_enc`.
pub fn dim_lower_bound_33(
    comp: &Component,
    n: usize,
    r_enc: &BaseEnclosure,
) -> Result<DimBound> {
    if n == 0 {
        return Err(Error::OutOfRange);
    }
    let tol = bits_tol(CERT_BITS);
    if !(comp.q0star.hi() < r_enc.lo()) {
        return Err(Error::OutOfRange);
    }
    let rn = r_n(comp, n, &tol)?;
    if !(rn.hi() < r_enc.lo()) {
        if rn.lo() > r_enc.hi() {
            return Err(Error::OutOfRange);
        }
        return Err(Error::PrecisionExhausted);
    }
    if n >= 2 {
        let prev = r_n(comp, n - 1, &tol)?;
        if prev.hi() < r_enc.lo() {
            return Err(Error::OutOfRange);
        }
        if !(prev.lo() > r_enc.hi()) {
            return Err(Error::PrecisionExhausted);
        }
    }

    let g = make_xa(comp, n)?;
    let len = g.state_len();
    let m = comp.block.alphabet().max_digit();

    let perron = perron_root(&g, &tol)?;
    let log_num = log2_interval(&perron, CERT_BITS)?;
    let alphabet_size = m + 1;
    let log_den = log2_interval(
        &RatInterval::point(BigRational::from_integer(alphabet_size.into())),
        CERT_BITS,
    )?;
    let den = log_den.mul_scalar(&BigRational::from_integer((len as u64).into()));
    let numeric = div_interval(&log_num, &den);
    if !numeric.lo().is_positive() {
        return Err(Error::Certificate(
            "dimension bound is not positive at this precision".into(),
        ));
    }

    // (a) The excluded word walks a legal path.
    let state_path = vec![1usize, 0, 3, 2, 0, 2, 0, 2, 0];
    if !g.is_legal_path(&state_path) {
        return Err(Error::Certificate(
            "excluded word: state path leaves the graph".into(),
        ));
    }
    let word = g.word_of_path(&state_path);

    // (c) The comparison chain that dooms every continuation: past the
    // first block, the word strictly exceeds the substitution limit's
    // prefix of the same length.
    let shifted = word.slice(len + 1, 9 * len);
    let target = comp.theta.prefix(8 * len);
    let (ord, k0) = word_cmp_at(&shifted, &target);
    if ord != Ordering::Greater {
        return Err(Error::Certificate(
            "excluded word: comparison chain against the limit prefix fails".into(),
        ));
    }
    if word.digit(len) >= m {
        return Err(Error::Certificate(
            "excluded word: the violating shift lands on a maximal digit".into(),
        ));
    }

    // (b) Extensions of the excluded word still pass at the bound's own
    // base.
    let ext_depth = 24 * len;
    let alpha_r = alpha_seq(r_enc, ext_depth)?;
    for (i, path) in g
        .paths_from(0, EXCLUSION_EXTENSION_BLOCKS)
        .into_iter()
        .enumerate()
    {
        let mut pre = word.clone();
        for &s in &path[1..] {
            pre = pre.concat(&g.states[s]);
        }
        let d = complete_from(&g, pre, *path.last().expect("nonempty path"))?;
        let verdict = in_uq_prime_seq(&d, &alpha_r, ext_depth);
        if !verdict.is_certified() {
            return Err(Error::Certificate(format!(
                "extension {i} of the excluded word is not certified at the base: {:?}",
                verdict.status
            )));
        }
    }

    Ok(DimBound {
        value_log_numer: perron,
        denom_blocks: len,
        alphabet_size,
        numeric,
        exclusion: ExclusionCertificate {
            word,
            state_path,
            violation_index: len,
            resolved_at: len + k0,
        },
    })
}

// ---------------------------------------------------------------------------
// Exhaustive two-block inequalities.
// ---------------------------------------------------------------------------

/// Exhaustively checks all six two-block words of each level against the
/// substitution limit: for `1 <= n <= n_max` and every shift
/// `0 <= i < 2^n p`, the shifted two-block word stays strictly between
/// the reflected prefix and the prefix of matching length.  Two designed
/// equalities are allowed and recorded as tight cases: at shift 0 the
/// plain/raised pair *is* the prefix, and its reflection *is* the
/// reflected prefix.
pub fn verify_lemma32(comp: &Component, n_max: usize) -> Result<VerifyReport> {
    if n_max == 0 {
        return Err(Error::OutOfRange);
    }
    let p = comp.block.len();
    let mut report = VerifyReport::new();
    for n in 1..=n_max {
        let len = (1usize << n) * p;
        let xi = comp.theta.prefix(len);
        let xim = xi.minus()?;
        let rxi = xi.reflect();
        let rxim = xim.reflect();
        let bound = comp.theta.prefix(2 * len);
        let rbound = bound.reflect();
        let families: [(Word, &'static str, bool, bool); 6] = [
            (xi.concat(&rxi), "block+reflected", false, false),
            (xi.concat(&rxim), "block+raised", false, true),
            (xim.concat(&xi), "lowered+block", false, false),
            (rxi.concat(&xi), "reflected+block", false, false),
            (rxi.concat(&xim), "reflected+lowered", true, false),
            (rxim.concat(&rxi), "raised+reflected", false, false),
        ];
        for (w, name, lower_eq, upper_eq) in &families {
            for i in 0..len {
                let l = 2 * len - i;
                let window = w.slice(i + 1, 2 * len);
                report.tally();
                match window.cmp_lex(&rbound.slice(1, l)) {
                    Ordering::Greater => {}
                    Ordering::Equal if *lower_eq => report.tight(name, n, i),
                    _ => report.fail(
                        name,
                        n,
                        i,
                        "shifted pair fails to stay above the reflected prefix".into(),
                    ),
                }
                report.tally();
                match window.cmp_lex(&bound.slice(1, l)) {
                    Ordering::Less => {}
                    Ordering::Equal if *upper_eq => report.tight(name, n, i),
                    _ => report.fail(
                        name,
                        n,
                        i,
                        "shifted pair fails to stay below the prefix".into(),
                    ),
                }
            }
        }
    }
    Ok(report)
}

/// Exhaustively verifies the shift space's membership promise at a base:
/// every state path of `max_blocks` blocks, from every start state,
/// completed canonically, passes the two-sided uniqueness test with all
/// comparisons strictly certified.  Shorter paths continue into longer
/// ones canonically, so scanning the full length covers every path up to
/// it.
pub fn verify_path_words(
    comp: &Component,
    n: usize,
    max_blocks: usize,
    r_enc: &BaseEnclosure,
    depth: usize,
) -> Result<VerifyReport> {
    if max_blocks == 0 || depth == 0 {
        return Err(Error::OutOfRange);
    }
    let g = make_xa(comp, n)?;
    let alpha = alpha_seq(r_enc, depth)?;
    let mut report = VerifyReport::new();
    for start in 0..g.size() {
        for (i, path) in g.paths_from(start, max_blocks - 1).into_iter().enumerate() {
            let w = g.word_of_path(&path);
            let d = complete_from(&g, w, *path.last().expect("nonempty path"))?;
            report.tally();
            let verdict = in_uq_prime_seq(&d, &alpha, depth);
            if !verdict.is_certified() {
                report.fail(
                    "membership",
                    start,
                    i,
                    format!("path {path:?} reports {:?}", verdict.status),
                );
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The constructive uniqueness family.
// ---------------------------------------------------------------------------

/// One certified member of the constructive family at level `n`.
#[derive(Debug, Clone)]
pub struct GammaMember {
    /// The finite prefix pinned by the construction.
    pub prefix: Word,
    /// The member continued canonically inside the shift space.
    pub seq: DigitSeq,
    /// State path of the tail blocks (starting at the reflected state).
    pub path: Vec<usize>,
    /// Enclosure of the base in which the member expands 1.
    pub base: BaseEnclosure,
}

/// Emits `count` distinct members of the level-`n` constructive family,
/// each pinned to length `2^{n+1} p + l`: the level-`(n-1)` word followed
/// by three copies of its raised reflection, then a block path of
/// `l / 2^n p` blocks starting at the reflected state.
///
/// Each member is certified before it is returned: every shift up to the
/// pinned length stays strictly between the member's reflection and the
/// member itself (exact comparisons on the eventually periodic
/// completion); the member lies strictly between the substitution limit
/// and the expansion at the level-`(n-1)` approximant; and its base
/// enclosure lands strictly inside the gap between the window's right
/// endpoint and that approximant.
pub fn gamma_n_prime(
    comp: &Component,
    n: usize,
    count: usize,
    l: usize,
) -> Result<Vec<GammaMember>> {
    if n < 2 {
        return Err(Error::OutOfRange);
    }
    let p = comp.block.len();
    let len = (1usize << n) * p;
    if l == 0 || l % len != 0 {
        return Err(Error::OutOfRange);
    }
    let blocks = l / len;
    let g = make_xa(comp, n)?;

    let half = omega_n(&comp.block, n - 1)?;
    let raised = half.reflect().plus()?;
    let mut head = half;
    for _ in 0..3 {
        head = head.concat(&raised);
    }
    debug_assert_eq!(head.len(), 2 * len);

    let paths = g.paths_from(2, blocks - 1);
    if count > paths.len() {
        return Err(Error::OutOfRange);
    }

    let tol = bits_tol(64);
    let prev_seq = rn_seq(comp, n - 1)?;
    let prev_enc = r_n(comp, n - 1, &tol)?;
    let scan = 2 * len + l;

    let mut out = Vec::with_capacity(count);
    for path in paths.into_iter().take(count) {
        let mut prefix = head.clone();
        for &s in &path {
            prefix = prefix.concat(&g.states[s]);
        }
        let seq = complete_from(&g, prefix.clone(), *path.last().expect("nonempty path"))?;
        let refl = seq.reflect();
        for j in 1..=scan {
            let tail = seq.shift(j);
            match cmp_exact(&tail, &seq) {
                Some((Ordering::Less, _)) => {}
                other => {
                    return Err(Error::Certificate(format!(
                        "family member {path:?}: shift {j} not below the member ({other:?})"
                    )))
                }
            }
            match cmp_exact(&tail, &refl) {
                Some((Ordering::Greater, _)) => {}
                other => {
                    return Err(Error::Certificate(format!(
                        "family member {path:?}: shift {j} not above the reflection ({other:?})"
                    )))
                }
            }
        }
        match lex_compare(&seq, &comp.theta, scan + 2 * len) {
            LexOutcome::Greater { .. } => {}
            other => {
                return Err(Error::Certificate(format!(
                    "family member {path:?}: not above the substitution limit ({other:?})"
                )))
            }
        }
        match cmp_exact(&seq, &prev_seq) {
            Some((Ordering::Less, _)) => {}
            other => {
                return Err(Error::Certificate(format!(
                    "family member {path:?}: not below the approximant expansion ({other:?})"
                )))
            }
        }
        let base = base_from_seq(&seq, &tol, BASE_DEPTH_CAP)?;
        if !(comp.q0star.hi() < base.lo() && base.hi() < prev_enc.lo()) {
            return Err(Error::Certificate(format!(
                "family member {path:?}: base escapes the window gap"
            )));
        }
        out.push(GammaMember { prefix, seq, path, base });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Modulus of continuity.
// ---------------------------------------------------------------------------

/// First digit position where the quasi-greedy expansion of 1 at the
/// given base drops below the maximal digit, scanning at most `cap`
/// positions.
pub fn holder_exponent(r_enc: &BaseEnclosure, cap: usize) -> Result<usize> {
    if cap == 0 {
        return Err(Error::OutOfRange);
    }
    let alpha = alpha_seq(r_enc, cap)?;
    let m = r_enc.alphabet().max_digit();
    for i in 1..=cap {
        if alpha.digit(i) < m {
            return Ok(i);
        }
    }
    Err(Error::PrecisionExhausted)
}

/// Verifies the modulus-of-continuity bound on pairs of bases
/// `p1 <= p2`: projected in base `M+1`, the expansions of 1 satisfy
/// `0 <= pi(alpha(p2)) - pi(alpha(p1)) <= (M+1)^{2+N} (p2-p1) / (q'-1)^2`
/// with `N` the supplied exponent index and `q'` the smallest
/// uniquely-expanding base.  Both directions are certified from interval
/// bounds rounded the safe way; a pair whose certification fails at the
/// working precision is recorded as a violation with the reason.
pub fn holder_check(
    pairs: &[(BaseEnclosure, BaseEnclosure)],
    n_exp: usize,
    depth: usize,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new();
    let Some(first) = pairs.first() else {
        return Ok(report);
    };
    if depth == 0 {
        return Err(Error::OutOfRange);
    }
    let alphabet = first.0.alphabet();
    let m = alphabet.max_digit();
    let radix = BigRational::from_integer(BigInt::from(m + 1));
    let kl = komornik_loreti(alphabet, &bits_tol(64))?;
    // Safe lower bound for the constant: the power is exact and the
    // denominator uses the upper end of the enclosure of `q'`.
    let gap_to_one = kl.hi() - BigRational::one();
    let c_lo = rat_pow(&radix, 2 + n_exp) / (&gap_to_one * &gap_to_one);
    let zero = BigRational::new(BigInt::from(0), BigInt::one());

    for (i, (p1, p2)) in pairs.iter().enumerate() {
        assert_eq!(p1.alphabet(), alphabet, "pairs must share one digit alphabet");
        assert_eq!(p2.alphabet(), alphabet, "pairs must share one digit alphabet");
        let a1 = alpha_seq(p1, depth)?;
        let a2 = alpha_seq(p2, depth)?;
        let v1 = series_value(&a1, &radix, depth)?;
        let v2 = series_value(&a2, &radix, depth)?;
        let diff = v2.sub(&v1);

        report.tally();
        if *diff.lo() < zero && !(diff.lo() == diff.hi() && *diff.lo() == zero) {
            report.fail(
                "order",
                n_exp,
                i,
                "sign of the projected difference is not certified at this precision".into(),
            );
        }

        report.tally();
        let gap_lo = {
            let g = p2.lo() - p1.hi();
            if g < zero { zero.clone() } else { g }
        };
        let rhs_lo = &c_lo * &gap_lo;
        if *diff.hi() > rhs_lo {
            report.fail(
                "modulus",
                n_exp,
                i,
                "бound not certified at this precision".into(),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{component_of, AdmissibleBlock};
    use crate::digits::Alphabet;
    use crate::evalroot::{poly_root_bisect, rat_from_decimal};
    use crate::parry::base_from_rational;
    use crate::univoque::{in_uq_prime, Side, UniqStatus};

    fn a(m: u64) -> Alphabet {
        Alphabet::new(m).unwrap()
    }

    fn w(m: u64, s: &str) -> Word {
        Word::parse(a(m), s).unwrap()
    }

    fn comp(m: u64, t: &str) -> Component {
        let block = AdmissibleBlock::new(w(m, t)).unwrap();
        component_of(&block, &bits_tol(80)).unwrap()
    }

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn graph(adjacency: Vec<Vec<bool>>) -> SftGraph {
        SftGraph { states: Vec::new(), adjacency }
    }

    #[test]
    fn states_and_adjacency_of_the_level_one_space() {
        let g = make_xa(&comp(1, "10"), 1).unwrap();
        assert_eq!(g.states, vec![w(1, "1101"), w(1, "1100"), w(1, "0010"), w(1, "0011")]);
        assert_eq!(g.state_len(), 4);
        let row_sums: Vec<usize> = g
            .adjacency
            .iter()
            .map(|row| row.iter().filter(|&&e| e).count())
            .collect();
        assert_eq!(row_sums, vec![2, 1, 2, 1]);
        assert!(g.is_strongly_connected());
        assert!(matches!(make_xa(&comp(1, "10"), 0), Err(Error::OutOfRange)));
    }

    #[test]
    fn path_counts_grow_like_fibonacci() {
        let g = make_xa(&comp(1, "10"), 1).unwrap();
        let counts: Vec<u128> = (1..=6).map(|k| g.path_count(2, k)).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21]);
        let paths = g.paths_from(2, 3);
        assert_eq!(paths.len(), 5);
        assert!(paths.iter().all(|p| g.is_legal_path(p)));
        assert_eq!(g.word_of_path(&[0, 2]), w(1, "11010010"));
    }

    #[test]
    fn spectral_radius_enclosures() {
        let id = graph(vec![
            vec![true, false, false, false],
            vec![false, true, false, false],
            vec![false, false, true, false],
            vec![false, false, false, true],
        ]);
        let enc = perron_root(&id, &bits_tol(40)).unwrap();
        assert!(enc.is_point() && *enc.lo() == ri(1));

        let ones = graph(vec![vec![true; 4]; 4]);
        let enc = perron_root(&ones, &bits_tol(40)).unwrap();
        assert!(enc.is_point() && *enc.lo() == ri(4));

        // The level graph's radius is the golden ratio: cross-check the
        // enclosure against an independent bisection of x^2 = x + 1.
        let g = make_xa(&comp(1, "10"), 1).unwrap();
        let enc = perron_root(&g, &bits_tol(42)).unwrap();
        assert!(enc.width() < rat_from_decimal("0.000000000001").unwrap());
        let golden =
            poly_root_bisect(&vec![ri(-1), ri(-1), ri(1)], ri(1), ri(2), &bits_tol(60)).unwrap();
        assert!(enc.lo() <= golden.hi() && golden.lo() <= enc.hi());

        // A state with no out-edge starves the iteration.
        let dead = graph(vec![vec![false, true], vec![false, false]]);
        assert!(matches!(perron_root(&dead, &bits_tol(10)), Err(Error::OutOfRange)));
    }

    #[test]
    fn interval_logarithms() {
        let exact = log2_interval(&RatInterval::point(ri(2)), 80).unwrap();
        assert!(exact.is_point() && *exact.lo() == ri(1));
        let exact = log2_interval(&RatInterval::point(ri(1)), 80).unwrap();
        assert!(exact.is_point() && *exact.lo() == ri(0));

        let three = log2_interval(&RatInterval::point(ri(3)), 80).unwrap();
        assert!((three.approx_f64() - 1.584_962_500_721_156).abs() < 1e-15);
        assert!(three.width() <= bits_tol(78));

        let spread = log2_interval(&RatInterval::new(ri(3), ri(5)), 80).unwrap();
        assert!(spread.contains(&ri(2)));

        assert!(matches!(
            log2_interval(&RatInterval::point(ri(0)), 16),
            Err(Error::OutOfRange)
        ));
    }

    #[test]
    fn dimension_bound_at_the_first_level() {
        let c = comp(1, "10");
        let r = base_from_rational(a(1), &rat_from_decimal("1.79").unwrap()).unwrap();
        let bound = dim_lower_bound_33(&c, 1, &r).unwrap();
        assert_eq!(bound.denom_blocks, 4);
        assert_eq!(bound.alphabet_size, 2);
        assert!(bound.numeric.lo().is_positive());
        assert!(bound.numeric.width() < rat_from_decimal("0.000001").unwrap());
        assert!((bound.approx_f64() - 0.173_560_478_407_654_35).abs() < 1e-8);

        // The excluded word and its certificate, frozen.
        assert_eq!(
            bound.exclusion.word.to_string(),
            "110011010011001011010010110100101101"
        );
        assert_eq!(bound.exclusion.state_path, vec![1, 0, 3, 2, 0, 2, 0, 2, 0]);
        assert_eq!(bound.exclusion.violation_index, 4);
        assert_eq!(bound.exclusion.resolved_at, 28);
    }

    #[test]
    fn dimension_bound_respects_level_minimality() {
        let c = comp(1, "10");
        // 1.79 lies above the first approximant, so level 2 is not minimal.
        let r = base_from_rational(a(1), &rat_from_decimal("1.79").unwrap()).unwrap();
        assert!(matches!(dim_lower_bound_33(&c, 2, &r), Err(Error::OutOfRange)));
        // 1.5 sits below the window's right endpoint entirely.
        let low = base_from_rational(a(1), &rat_from_decimal("1.5").unwrap()).unwrap();
        assert!(matches!(dim_lower_bound_33(&c, 1, &low), Err(Error::OutOfRange)));

        // Between the first two approximants, level 2 is minimal and the
        // bound halves (the radius is the same golden ratio).
        let r = base_from_rational(a(1), &rat_from_decimal("1.7874").unwrap()).unwrap();
        let bound = dim_lower_bound_33(&c, 2, &r).unwrap();
        assert_eq!(bound.denom_blocks, 8);
        assert!((bound.approx_f64() - 0.086_780_239_203_827_17).abs() < 1e-8);
    }

    #[test]
    fn excluded_word_fails_two_levels_down() {
        let c = comp(1, "10");
        let g = make_xa(&c, 1).unwrap();
        let word = g.word_of_path(&[1, 0, 3, 2, 0, 2, 0, 2, 0]);
        let x = complete_from(&g, word, 0).unwrap();
        let r3 = r_n(&c, 3, &bits_tol(80)).unwrap();
        let verdict = in_uq_prime(&x, &r3, 64).unwrap();
        assert_eq!(
            verdict.status,
            UniqStatus::Violated { index: 4, side: Side::Upper, resolved_at: Some(28) }
        );
    }

    #[test]
    fn two_block_inequalities_hold_with_the_designed_equalities() {
        let report = verify_lemma32(&comp(1, "10"), 4).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.checks, 720);
        let mut expected = Vec::new();
        for n in 1..=4 {
            expected.push(("block+raised", n, 0));
            expected.push(("reflected+lowered", n, 0));
        }
        let mut tight = report.tight.clone();
        tight.sort();
        expected.sort();
        assert_eq!(tight, expected);

        let report = verify_lemma32(&comp(2, "1"), 3).unwrap();
        assert!(report.passed());

        let mut corrupted = comp(1, "10");
        corrupted.theta = corrupted.theta.with_corrupted_digit(3);
        let report = verify_lemma32(&corrupted, 2).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn every_short_path_word_passes_at_the_approximant() {
        let c = comp(1, "10");
        let r1 = r_n(&c, 1, &bits_tol(80)).unwrap();
        let report = verify_path_words(&c, 1, 4, &r1, 64).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.checks, 16);
    }

    #[test]
    fn constructive_family_members_are_certified() {
        let c = comp(1, "10");
        let members = gamma_n_prime(&c, 2, 5, 32).unwrap();
        assert_eq!(members.len(), 5);
        for member in &members {
            assert_eq!(member.prefix.len(), 48);
        }
        assert_eq!(members[0].prefix.slice(1, 16), w(1, "1101001100110011"));
        assert_eq!(members[0].path, vec![2, 0, 2, 0]);

        // Distinct prefixes, and every base strictly inside the gap.
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                assert_ne!(members[i].prefix, members[j].prefix);
            }
        }

        // Capacity: seven blocks of tail admit exactly 21 paths.
        assert_eq!(gamma_n_prime(&c, 2, 20, 56).unwrap().len(), 20);
        assert!(matches!(gamma_n_prime(&c, 2, 22, 56), Err(Error::OutOfRange)));
        assert!(matches!(gamma_n_prime(&c, 1, 5, 32), Err(Error::OutOfRange)));
        assert!(matches!(gamma_n_prime(&c, 2, 5, 30), Err(Error::OutOfRange)));
    }

    #[test]
    fn modulus_of_continuity_on_approximant_pairs() {
        let c = comp(1, "10");
        let r1 = r_n(&c, 1, &bits_tol(80)).unwrap();
        let r2 = r_n(&c, 2, &bits_tol(80)).unwrap();
        assert_eq!(holder_exponent(&r1, 10).unwrap(), 3);

        let pairs = vec![(r2.clone(), r1.clone()), (r1.clone(), r1.clone())];
        let report = holder_check(&pairs, 3, 128).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.checks, 4);

        // A reversed pair is caught by the order side.
        let report = holder_check(&vec![(r1.clone(), r2.clone())], 3, 128).unwrap();
        assert!(!report.passed());
    }
}
