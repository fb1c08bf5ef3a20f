//! Uniqueness tests for digit sequences and bases.
//!
//! A sequence is the *unique* expansion of its value exactly when every
//! tail is small enough to forbid borrowing from the digit before it and
//! large enough to forbid carrying into it.  Both constraints are strict
//! lexicographic comparisons against the quasi-greedy expansion of 1 and
//! its reflection:
//!
//! * whenever `d_n < M` the tail after position `n` must stay strictly
//!   below `alpha(q)`;
//! * whenever `d_n > 0` the tail must stay strictly above the reflection
//!   of `alpha(q)`.
//!
//! A base `q` admits a unique expansion of 1 exactly when `alpha(q)`
//! itself passes the two-sided test at every shift.  This module decides
//! both questions at a finite depth, computes the smallest base that
//! passes (as a certified enclosure), and classifies a base against the
//! interval structure formed by the bases that fail.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::components::{component_of, enumerate_admissible};
use crate::digits::{cmp_exact, lex_compare, Alphabet, DigitSeq, LexOutcome, Word};
use crate::error::{Error, Result};
use crate::evalroot::{base_from_seq, BaseEnclosure};
use crate::parry::alpha_seq;

/// Series evaluation horizon used when solving for bases internally.
const BASE_DEPTH_CAP: usize = 4096;

/// Which of the two strict tail constraints failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// A tail reached or exceeded `alpha(q)` after a digit below the maximum.
    Upper,
    /// A tail reached or fell below the reflection of `alpha(q)` after a
    /// positive digit.
    Lower,
}

/// Outcome of a depth-limited uniqueness test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniqStatus {
    /// No violation was certified for any shift up to the depth.
    SatisfiedToDepth,
    /// The tail after position `index` certifiably breaks the strict
    /// constraint on the given side.  `resolved_at` is the absolute digit
    /// position witnessing the strict difference, or `None` when the
    /// violation is an exact equality of eventually periodic sequences
    /// (certified algebraically, with no finite differing digit).
    Violated {
        index: usize,
        side: Side,
        resolved_at: Option<usize>,
    },
}

/// Verdict of a uniqueness test together with its certification depth.
///
/// `unresolved` counts tail comparisons that agreed through the whole
/// comparison window without an exact representation to settle them; a
/// satisfied verdict with `unresolved == 0` means every checked shift was
/// strictly certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqVerdict {
    pub status: UniqStatus,
    pub depth: usize,
    pub unresolved: usize,
}

impl UniqVerdict {
    /// True when no violation was found through the depth.
    pub fn is_satisfied(&self) -> bool {
        matches!(self.status, UniqStatus::SatisfiedToDepth)
    }

    /// True when every checked comparison was strictly certified.
    pub fn is_certified(&self) -> bool {
        self.is_satisfied() && self.unresolved == 0
    }
}

/// Certified comparison of two digit sequences.
///
/// Returns the ordering and the 1-based position of the first difference
/// (`None` for provable equality) when the order can be certified, either
/// exactly (both sequences eventually periodic) or by a strict difference
/// inside the window.  Returns `None` when the sequences agree through
/// `window` digits and neither side can be settled exactly.
fn certified_cmp(
    a: &DigitSeq,
    b: &DigitSeq,
    window: usize,
) -> Option<(Ordering, Option<usize>)> {
    if let Some((ord, at)) = cmp_exact(a, b) {
        return Some((ord, if at == 0 { None } else { Some(at) }));
    }
    match lex_compare(a, b, window) {
        LexOutcome::Less { at } => Some((Ordering::Less, Some(at))),
        LexOutcome::Greater { at } => Some((Ordering::Greater, Some(at))),
        LexOutcome::EqualToDepth => None,
    }
}

/// One two-sided tail scan shared by the sequence and base tests.
///
/// Checks, for every `1 <= n <= depth`, that the tail of `d` after
/// position `n` stays strictly below `alpha` whenever `d_n` is below the
/// maximal digit and strictly above the reflection of `alpha` whenever
/// `d_n` is positive.  Reports the first certified violation.
fn scan_tails(d: &DigitSeq, alpha: &DigitSeq, depth: usize) -> UniqVerdict {
    let m = d.alphabet().max_digit();
    let alpha_refl = alpha.reflect();
    let mut unresolved = 0usize;
    for n in 1..=depth {
        let dn = d.digit(n);
        let tail = d.shift(n);
        if dn < m {
            match certified_cmp(&tail, alpha, depth) {
                Some((Ordering::Less, _)) => {}
                Some((_, at)) => {
                    return UniqVerdict {
                        status: UniqStatus::Violated {
                            index: n,
                            side: Side::Upper,
                            resolved_at: at.map(|k| n + k),
                        },
                        depth,
                        unresolved,
                    };
                }
                None => unresolved += 1,
            }
        }
        if dn > 0 {
            match certified_cmp(&tail, &alpha_refl, depth) {
                Some((Ordering::Greater, _)) => {}
                Some((_, at)) => {
                    return UniqVerdict {
                        status: UniqStatus::Violated {
                            index: n,
                            side: Side::Lower,
                            resolved_at: at.map(|k| n + k),
                        },
                        depth,
                        unresolved,
                    };
                }
                None => unresolved += 1,
            }
        }
    }
    UniqVerdict {
        status: UniqStatus::SatisfiedToDepth,
        depth,
        unresolved,
    }
}

/// The same two-sided test with the quasi-greedy expansion of 1 supplied
/// directly instead of resolved from an enclosure.  Useful when many
/// sequences are scanned against one base: resolve the expansion once and
/// share it across calls.
pub fn in_uq_prime_seq(d: &DigitSeq, alpha: &DigitSeq, depth: usize) -> UniqVerdict {
    assert_eq!(
        d.alphabet(),
        alpha.alphabet(),
        "sequence and expansion must share one digit alphabet"
    );
    scan_tails(d, alpha, depth)
}

/// Tests whether `d` is the unique expansion of its value in base `q` at
/// the given depth.
///
/// The comparisons run against the quasi-greedy expansion of 1 computed
/// from the enclosure; shifts are scanned in increasing order and the
/// first certified violation wins, so when a sequence breaks both sides
/// the earliest index is reported.
pub fn in_uq_prime(d: &DigitSeq, q_enc: &BaseEnclosure, depth: usize) -> Result<UniqVerdict> {
    if depth == 0 {
        return Err(Error::OutOfRange);
    }
    assert_eq!(
        d.alphabet(),
        q_enc.alphabet(),
        "sequence and base must share one digit alphabet"
    );
    let alpha = alpha_seq(q_enc, depth)?;
    Ok(scan_tails(d, &alpha, depth))
}

/// Tests whether the expansion of 1 in base `q` is unique, i.e. whether
/// every shifted tail of `alpha(q)` lies strictly between the reflection
/// of `alpha(q)` and `alpha(q)` itself, at the given depth.
///
/// The base `M + 1` is the largest base that qualifies: there the
/// expansion of 1 is the constant maximal word and every tail equals the
/// whole sequence, so the strict scan does not apply and the answer is
/// satisfied by convention.
pub fn in_univoque_bases(q_enc: &BaseEnclosure, depth: usize) -> Result<UniqVerdict> {
    if depth == 0 {
        return Err(Error::OutOfRange);
    }
    let m = q_enc.alphabet().max_digit();
    if *q_enc.hi() <= BigRational::one() {
        return Err(Error::OutOfRange);
    }
    if let Some(q) = q_enc.exact() {
        if *q <= BigRational::one() {
            return Err(Error::OutOfRange);
        }
        if *q == BigRational::from_integer(BigInt::from(m + 1)) {
            return Ok(UniqVerdict {
                status: UniqStatus::SatisfiedToDepth,
                depth,
                unresolved: 0,
            });
        }
    }
    let alpha = alpha_seq(q_enc, depth)?;
    Ok(scan_tails(&alpha, &alpha, depth))
}

/// Seed word for the doubling substitution whose limit is the expansion
/// of 1 at the smallest base with a unique expansion: the single digit
/// `k` when `M = 2k`, and the two-digit word `k (k-1)` when `M = 2k-1`.
///
/// The seeds are pinned by two independent checks in the test suite: for
/// `M = 1` the substitution limit must equal the bit-parity sequence
/// digit by digit, and for every alphabet the first digit of the limit
/// must be `floor(M/2) + 1`.
pub fn kl_seed(alphabet: Alphabet) -> Word {
    let m = alphabet.max_digit();
    let digits = if m % 2 == 0 {
        vec![m / 2]
    } else {
        vec![(m + 1) / 2, (m + 1) / 2 - 1]
    };
    Word::new(alphabet, digits).expect("seed digits lie inside the alphabet")
}

/// Certified enclosure of the smallest base over `{0, ..., M}` at which
/// the expansion of 1 is unique, refined until its width is at most `tol`.
pub fn komornik_loreti(alphabet: Alphabet, tol: &BigRational) -> Result<BaseEnclosure> {
    let seq = DigitSeq::subst_limit(&kl_seed(alphabet))?;
    base_from_seq(&seq, tol, BASE_DEPTH_CAP)
}

/// Where a base sits relative to the set of bases with a unique
/// expansion of 1 and the interval structure of its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// Strictly below the smallest base with a unique expansion.
    BelowKl,
    /// The expansion of 1 is unique at the working depth.
    InU,
    /// The base is the left endpoint of a gap interval: its quasi-greedy
    /// expansion of 1 is exactly the periodic repetition of the block.
    InClosureLeftEndpoint { t: Word },
    /// The base lies strictly inside the gap interval generated by the
    /// block.
    InComponentInterior { t: Word },
    /// The base is the right endpoint of the gap interval generated by
    /// the block: its expansion of 1 matches the substitution limit of
    /// the block through the working depth.
    RightEndpoint { t: Word },
    /// Precision or depth was insufficient to certify any of the above.
    Undecided,
}

/// Locates a base within the uniqueness landscape: strictly below the
/// smallest qualifying base, a certified member, an endpoint or interior
/// point of a gap interval generated by a block of length at most
/// `p_max`, or undecided when the working precision cannot separate the
/// cases.  Never errs: all internal precision failures collapse to
/// `Undecided`.
pub fn classify_base(
    q_enc: &BaseEnclosure,
    depth: usize,
    p_max: usize,
    tol: &BigRational,
) -> Classification {
    classify_inner(q_enc, depth, p_max, tol).unwrap_or(Classification::Undecided)
}

fn classify_inner(
    q_enc: &BaseEnclosure,
    depth: usize,
    p_max: usize,
    tol: &BigRational,
) -> Result<Classification> {
    let alphabet = q_enc.alphabet();
    let m = alphabet.max_digit();
    if let Some(q) = q_enc.exact() {
        if *q == BigRational::from_integer(BigInt::from(m + 1)) {
            return Ok(Classification::InU);
        }
    }
    let kl = komornik_loreti(alphabet, tol)?;
    let alpha = alpha_seq(q_enc, depth)?;

    // Endpoint matches take precedence: a quasi-greedy expansion that is
    // exactly the periodic repetition of a block, or that follows the
    // block's substitution limit through the whole window, pins the base
    // to the corresponding gap boundary regardless of where it sits.
    let blocks = enumerate_admissible(alphabet, p_max)?;
    for block in &blocks {
        let periodic = block.word().cycle_seq();
        if let Some((Ordering::Equal, _)) = cmp_exact(&alpha, &periodic) {
            return Ok(Classification::InClosureLeftEndpoint {
                t: block.word().clone(),
            });
        }
        let limit = DigitSeq::subst_limit(block.word())?;
        if matches!(
            lex_compare(&alpha, &limit, depth),
            LexOutcome::EqualToDepth
        ) {
            return Ok(Classification::RightEndpoint {
                t: block.word().clone(),
            });
        }
    }

    if q_enc.hi() < kl.lo() {
        return Ok(Classification::BelowKl);
    }

    let verdict = in_univoque_bases(q_enc, depth)?;
    if verdict.is_certified() {
        return Ok(Classification::InU);
    }
    if verdict.is_satisfied() {
        // Some comparisons stayed open; membership cannot be certified.
        return Ok(Classification::Undecided);
    }

    for block in &blocks {
        let comp = component_of(block, tol)?;
        if comp.q0.hi() < q_enc.lo() && q_enc.hi() < comp.q0star.lo() {
            return Ok(Classification::InComponentInterior {
                t: block.word().clone(),
            });
        }
    }
    Ok(Classification::Undecided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalroot::rat_from_decimal;

    fn a(m: u64) -> Alphabet {
        Alphabet::new(m).unwrap()
    }

    fn seq(m: u64, s: &str) -> DigitSeq {
        DigitSeq::parse(a(m), s).unwrap()
    }

    fn enclose(m: u64, s: &str) -> BaseEnclosure {
        let tol = BigRational::new(BigInt::one(), BigInt::from(1u128 << 80));
        base_from_seq(&seq(m, s), &tol, 4096).unwrap()
    }

    fn tol_bits(bits: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(2u8).pow(bits))
    }

    #[test]
    fn unique_tail_test_on_periodic_sequences() {
        // At the base defined by 1 = pi((110)^inf), the tails of (10)^inf
        // stay strictly inside the two-sided corridor at every shift.
        let trib = enclose(1, "(110)");
        let v = in_uq_prime(&seq(1, "(10)"), &trib, 200).unwrap();
        assert_eq!(v.status, UniqStatus::SatisfiedToDepth);
        assert_eq!(v.unresolved, 0);

        // At the base defined by 1 = pi((10)^inf) the same sequence fails
        // both sides; the scan reports the earliest index, where the tail
        // (01)^inf exactly equals the reflected corridor wall. (The tail
        // after the first 0 equals the upper wall (10)^inf itself, which
        // would be reported as index 2 / upper if scanned first.)
        let golden = enclose(1, "(10)");
        let v = in_uq_prime(&seq(1, "(10)"), &golden, 200).unwrap();
        assert_eq!(
            v.status,
            UniqStatus::Violated {
                index: 1,
                side: Side::Lower,
                resolved_at: None,
            }
        );

        // The zero sequence has no positive digits, so only the upper
        // constraint applies, and it is settled by the very first digit.
        let v = in_uq_prime(&seq(1, "0"), &golden, 64).unwrap();
        assert_eq!(v.status, UniqStatus::SatisfiedToDepth);
        assert_eq!(v.unresolved, 0);
    }

    #[test]
    fn unique_base_test_certifies_equality_violations() {
        // sigma^3 of (110)^inf is (110)^inf itself: the strict upper
        // comparison fails by exact equality at shift 3.
        let trib = enclose(1, "(110)");
        let v = in_univoque_bases(&trib, 300).unwrap();
        assert_eq!(
            v.status,
            UniqStatus::Violated {
                index: 3,
                side: Side::Upper,
                resolved_at: None,
            }
        );

        // sigma of (10)^inf equals the reflection (01)^inf exactly.
        let golden = enclose(1, "(10)");
        let v = in_univoque_bases(&golden, 300).unwrap();
        assert_eq!(
            v.status,
            UniqStatus::Violated {
                index: 1,
                side: Side::Lower,
                resolved_at: None,
            }
        );
    }

    #[test]
    fn unique_base_test_right_edge_and_members() {
        // The base M + 1 passes by convention at any depth.
        let two = crate::parry::base_from_rational(a(1), &rat_from_decimal("2").unwrap()).unwrap();
        let v = in_univoque_bases(&two, 777).unwrap();
        assert!(v.is_certified());

        // The base with expansion 1101(0011)^inf is a genuine member and
        // every comparison is settled exactly.
        let r1 = enclose(1, "1101(0011)");
        let v = in_univoque_bases(&r1, 256).unwrap();
        assert!(v.is_certified(), "expected certified membership, got {v:?}");

        // The smallest member: all comparisons certify strictly inside
        // the window even though the expansion is aperiodic.
        let kl = komornik_loreti(a(1), &tol_bits(80)).unwrap();
        let v = in_univoque_bases(&kl, 128).unwrap();
        assert!(v.is_certified(), "expected certified membership, got {v:?}");
    }

    #[test]
    fn smallest_unique_base_matches_parity_oracle() {
        let kl = komornik_loreti(a(1), &tol_bits(100)).unwrap();
        assert!(kl.width() <= tol_bits(100));
        let known = rat_from_decimal("1.787231650182965933").unwrap();
        assert!(kl.lo() <= &known && &known <= kl.hi());

        // First sixteen digits of the expansion of 1 there agree with the
        // bit-parity sequence.
        let prefix = crate::parry::alpha_of(&kl, 16).unwrap();
        assert_eq!(prefix, Word::parse(a(1), "1101001100101101").unwrap());
    }

    #[test]
    fn smallest_unique_base_first_digits() {
        for m in 1..=8u64 {
            let kl = komornik_loreti(a(m), &tol_bits(48)).unwrap();
            let first = crate::parry::alpha_of(&kl, 1).unwrap();
            assert_eq!(first.digit(1), m / 2 + 1, "m = {m}");
        }
    }

    #[test]
    fn classify_known_bases() {
        let tol = tol_bits(64);
        let m1 = a(1);

        let q32 = crate::parry::base_from_rational(m1, &rat_from_decimal("1.5").unwrap()).unwrap();
        assert_eq!(classify_base(&q32, 256, 4, &tol), Classification::BelowKl);

        let golden = enclose(1, "(10)");
        assert_eq!(
            classify_base(&golden, 256, 4, &tol),
            Classification::InClosureLeftEndpoint {
                t: Word::parse(m1, "10").unwrap()
            }
        );

        let trib = enclose(1, "(110)");
        assert_eq!(
            classify_base(&trib, 256, 4, &tol),
            Classification::InClosureLeftEndpoint {
                t: Word::parse(m1, "110").unwrap()
            }
        );

        let kl = komornik_loreti(m1, &tol).unwrap();
        assert_eq!(
            classify_base(&kl, 256, 4, &tol),
            Classification::RightEndpoint {
                t: Word::parse(m1, "10").unwrap()
            }
        );

        // A rational point inside the gap generated by 110.
        let inner =
            crate::parry::base_from_rational(m1, &rat_from_decimal("1.842").unwrap()).unwrap();
        assert_eq!(
            classify_base(&inner, 256, 4, &tol),
            Classification::InComponentInterior {
                t: Word::parse(m1, "110").unwrap()
            }
        );

        // A certified member strictly between the gaps.
        let r1 = enclose(1, "1101(0011)");
        assert_eq!(classify_base(&r1, 256, 4, &tol), Classification::InU);

        // The right edge of the admissible base range.
        let two = crate::parry::base_from_rational(m1, &rat_from_decimal("2").unwrap()).unwrap();
        assert_eq!(classify_base(&two, 64, 4, &tol), Classification::InU);
    }
}
