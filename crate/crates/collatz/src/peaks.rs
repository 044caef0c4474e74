//! Structure of trajectory peaks.
//!
//! For a start n whose trajectory maximum p is not n itself, the value
//! immediately before p is an odd u with 3u+1 = p, and the first odd value
//! after p is v = p with all factors of two removed (everything between is
//! a halving). This module locates the (u, p, v) triple and checks the
//! divisibility and successor predictions that follow from writing u in
//! base-4 shapes:
//!
//!   u = 2·4^t·k + (4^(t+1) - 1)/3   ("twice" pattern, p = 2·4^t·(3k+2))
//!   u = 4^t·k + (4^t - 1)/3         ("plain" pattern, p = 4^t·(3k+1))
//!
//! Splitting k (and then l) by parity pins down the exact power of two
//! dividing p and the odd part that survives it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{self, step, summarize};
use crate::laws::{Counterexample, LawReport, Outcome};
use crate::nat::Nat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] core::Error),
    /// Peaks of 1 and 2 are 1 and 2, degenerate for every statement here.
    #[error("peak analysis requires n >= 3 (got {0})")]
    InputBelowThree(Nat),
}

/// The peak of a trajectory with its odd neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakTriple {
    pub start: Nat,
    /// Trajectory maximum, the start included.
    pub peak: Nat,
    /// Odd value immediately before the peak; absent iff the start is the
    /// peak (then nothing precedes it).
    pub odd_before: Option<Nat>,
    /// First odd value after the peak: the peak with all twos divided out.
    pub odd_after: Nat,
}

/// Locates (u, p, v) for n >= 3.
pub fn peak_triple(n: &Nat, cap: u64) -> Result<PeakTriple, Error> {
    if *n < Nat::from(3u64) {
        return Err(Error::InputBelowThree(n.clone()));
    }
    let s = summarize(n, cap)?;
    if let Some(u) = &s.before_peak {
        // An even predecessor would be twice the peak and exceed it.
        assert!(u.is_odd(), "predecessor {u} of peak {} must be odd", s.peak);
        debug_assert_eq!(step(u), s.peak);
    }
    Ok(PeakTriple {
        start: n.clone(),
        odd_after: s.peak.odd_part(),
        odd_before: s.before_peak,
        peak: s.peak,
    })
}

/// 4 divides the peak of every n >= 3. Scans odd n by default; evens are
/// admitted with the flag.
pub fn check_peak_divisibility(max: u64, include_even: bool, cap: u64) -> LawReport {
    let mut points = 0u64;
    let mut fail = None;
    let (first, stride) = if include_even { (3, 1) } else { (3, 2) };
    let mut n = first;
    while n <= max {
        points += 1;
        let triple = peak_triple(&Nat::from(n), cap).expect("n >= 3 within cap");
        if triple.peak.rem_u64(4) != 0 {
            fail = Some(Counterexample {
                params: vec![("n".to_string(), n.to_string())],
                observed: format!("peak {}", triple.peak),
                expected: "peak divisible by 4".to_string(),
            });
            break;
        }
        n += stride;
    }
    LawReport {
        law: "peak-divisible-by-4".to_string(),
        ranges: format!(
            "{} n in 3..={max}",
            if include_even { "all" } else { "odd" }
        ),
        points,
        outcome: match fail {
            None => Outcome::Pass,
            Some(counterexample) => Outcome::Fail { counterexample },
        },
    }
}

/// Wherever the peak has an odd predecessor u: u = 1 mod 4, 3u+1 is the
/// peak, and the first odd value after the peak is strictly below u.
pub fn check_peak_neighbors(max: u64, cap: u64) -> LawReport {
    let mut points = 0u64;
    let mut fail = None;
    let mut n = 3u64;
    while n <= max {
        let triple = peak_triple(&Nat::from(n), cap).expect("n >= 3 within cap");
        if let Some(u) = &triple.odd_before {
            points += 1;
            let ok = u.rem_u64(4) == 1
                && step(u) == triple.peak
                && triple.odd_after < *u
                && triple.odd_after.is_odd();
            if !ok {
                fail = Some(Counterexample {
                    params: vec![("n".to_string(), n.to_string())],
                    observed: format!(
                        "u={u}, p={}, v={}",
                        triple.peak, triple.odd_after
                    ),
                    expected: "u = 1 mod 4, T(u) = p, v odd, v < u".to_string(),
                });
                break;
            }
        }
        n += 2;
    }
    LawReport {
        law: "peak-neighbors".to_string(),
        ranges: format!("odd n in 3..={max} with a peak predecessor"),
        points,
        outcome: match fail {
            None => Outcome::Pass,
            Some(counterexample) => Outcome::Fail { counterexample },
        },
    }
}

/// The two base-4 shapes a peak predecessor can be written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UPattern {
    /// u = 2·4^t·k + (4^(t+1) - 1)/3
    TwicePow4,
    /// u = 4^t·k + (4^t - 1)/3
    Pow4,
}

impl UPattern {
    /// (progression modulus, offset) of the pattern at parameter t.
    fn shape(self, t: u32) -> (Nat, Nat) {
        match self {
            UPattern::TwicePow4 => (
                Nat::from(2u64).checked_mul(&Nat::pow(4, t)),
                crate::laws::pow4_minus_one_div3(t + 1),
            ),
            UPattern::Pow4 => (Nat::pow(4, t), crate::laws::pow4_minus_one_div3(t)),
        }
    }
}

/// A successful match of u against one pattern at one t, with the divisor
/// and odd-successor prediction the match pins down for p = 3u+1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UDecomposition {
    pub pattern: UPattern,
    pub t: u32,
    pub k: Nat,
    /// Half of k (k = 2l or k = 2l+1), where the branch needs it.
    pub l: Option<Nat>,
    /// Largest e with 2^e dividing the designated odd-part source, where
    /// the branch needs it.
    pub e: Option<u64>,
    /// Power of two claimed to divide p (in fact its exact 2-part).
    pub predicted_divisor: Nat,
    /// Claimed first odd value after the peak (the odd part of p).
    pub predicted_v: Nat,
}

impl UDecomposition {
    /// Rebuilds u from the pattern; exact by construction.
    pub fn reconstruct(&self) -> Nat {
        let (modulus, offset) = self.pattern.shape(self.t);
        modulus.checked_mul(&self.k).checked_add(&offset)
    }
}

fn pow2(e: u64) -> Nat {
    Nat::pow(2, u32::try_from(e).expect("exponent fits"))
}

/// Matches `u` against one pattern at parameter `t` and derives the
/// prediction for p = 3u+1. Requires odd u and t >= 1; returns None when
/// u is not of that shape.
pub fn decompose_at(u: &Nat, t: u32, pattern: UPattern) -> Option<UDecomposition> {
    assert!(u.is_odd(), "peak predecessors are odd");
    assert!(t >= 1, "patterns are indexed from t = 1");
    let (modulus, offset) = pattern.shape(t);
    if *u < offset {
        return None;
    }
    let delta = u.saturating_sub(&offset);
    if !delta.is_divisible_by(&modulus) {
        return None;
    }
    let k = delta.exact_div(&modulus);
    let three = Nat::from(3u64);
    let two_t = 2 * t as u64;

    let (l, e, divisor_exp, v) = match pattern {
        UPattern::TwicePow4 => {
            if k.is_odd() {
                // p = 2·4^t·(3k+2) with 3k+2 odd.
                let v = three.checked_mul(&k).checked_add(&Nat::from(2u64));
                (None, None, two_t + 1, v)
            } else {
                // k = 2l: p = 4^(t+1)·(3l+1); strip the twos of 3l+1.
                let l = k.half();
                let src = three.checked_mul(&l).checked_add(&Nat::ONE);
                let e = src.twos_valuation();
                (Some(l), Some(e), two_t + 2 + e, src.odd_part())
            }
        }
        UPattern::Pow4 => {
            if k.is_even() {
                // k = 2l: p = 4^t·(6l+1) with 6l+1 odd.
                let l = k.half();
                let v = Nat::from(6u64).checked_mul(&l).checked_add(&Nat::ONE);
                (Some(l), None, two_t, v)
            } else {
                // k = 2l+1: p = 2^(2t+1)·(3l+2); strip the twos of 3l+2.
                let l = k.saturating_sub(&Nat::ONE).half();
                let src = three.checked_mul(&l).checked_add(&Nat::from(2u64));
                let e = src.twos_valuation();
                (Some(l), Some(e), two_t + 1 + e, src.odd_part())
            }
        }
    };

    Some(UDecomposition {
        pattern,
        t,
        k,
        l,
        e,
        predicted_divisor: pow2(divisor_exp),
        predicted_v: v,
    })
}

/// The decomposition of u at parameter t, preferring the twice-pattern
/// when both apply (a twice-pattern match is also a plain-pattern match
/// with odd k, and the predictions coincide).
pub fn decompose_u(u: &Nat, t: u32) -> Option<UDecomposition> {
    decompose_at(u, t, UPattern::TwicePow4).or_else(|| decompose_at(u, t, UPattern::Pow4))
}

/// Every pattern match of u for t in 1..=t_max, in (t, pattern) order.
pub fn decompose_all(u: &Nat, t_max: u32) -> Vec<UDecomposition> {
    let mut out = Vec::new();
    for t in 1..=t_max {
        for pattern in [UPattern::TwicePow4, UPattern::Pow4] {
            if let Some(d) = decompose_at(u, t, pattern) {
                out.push(d);
            }
        }
    }
    out
}

/// Checks a decomposition against the actual p = 3u+1: the predicted
/// divisor must be the exact power of two in p and the predicted v its
/// odd part, and the decomposition must rebuild u.
pub fn verify_decomposition(u: &Nat, d: &UDecomposition) -> Result<(), String> {
    if d.reconstruct() != *u {
        return Err(format!("{d:?} does not rebuild {u}"));
    }
    let p = step(u);
    if !p.is_divisible_by(&d.predicted_divisor) {
        return Err(format!(
            "u={u}: predicted divisor {} does not divide p={p}",
            d.predicted_divisor
        ));
    }
    let quotient = p.exact_div(&d.predicted_divisor);
    if quotient != d.predicted_v || d.predicted_v.is_even() {
        return Err(format!(
            "u={u}: p={p} = {} x {quotient}, predicted v={}",
            d.predicted_divisor, d.predicted_v
        ));
    }
    // The branches pin down the full 2-part of p, so the prediction must
    // equal the odd part exactly — this is what makes decompositions at
    // different t mutually consistent.
    if d.predicted_v != p.odd_part() {
        return Err(format!(
            "u={u}: predicted v={} is not the odd part of p={p}",
            d.predicted_v
        ));
    }
    Ok(())
}

/// Verifies every pattern match for every odd u up to u_max against the
/// actual p = 3u+1.
pub fn check_divisor_predictions(u_max: u64, t_max: u32) -> LawReport {
    let mut points = 0u64;
    let mut fail = None;
    let mut u = 1u64;
    'outer: while u <= u_max {
        let u_nat = Nat::from(u);
        for d in decompose_all(&u_nat, t_max) {
            points += 1;
            if let Err(msg) = verify_decomposition(&u_nat, &d) {
                fail = Some(Counterexample {
                    params: vec![
                        ("u".to_string(), u.to_string()),
                        ("t".to_string(), d.t.to_string()),
                        ("pattern".to_string(), format!("{:?}", d.pattern)),
                    ],
                    observed: msg,
                    expected: "divisor and odd successor as predicted".to_string(),
                });
                break 'outer;
            }
        }
        u += 2;
    }
    LawReport {
        law: "peak-divisor-predictions".to_string(),
        ranges: format!("odd u in 1..={u_max}, t=1..={t_max}"),
        points,
        outcome: match fail {
            None => Outcome::Pass,
            Some(counterexample) => Outcome::Fail { counterexample },
        },
    }
}

pub mod defaults {
    pub const N_MAX: u64 = 100_000;
    pub const T_MAX: u32 = 10;
}

/// Runs every peak law at its default range.
pub fn run_all(cap: u64) -> Vec<LawReport> {
    vec![
        check_peak_divisibility(defaults::N_MAX, false, cap),
        check_peak_neighbors(defaults::N_MAX, cap),
        check_divisor_predictions(defaults::N_MAX, defaults::T_MAX),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::DEFAULT_STEP_CAP as CAP;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    fn triple(v: u64) -> PeakTriple {
        peak_triple(&n(v), CAP).unwrap()
    }

    #[test]
    fn known_triples() {
        let t = triple(15);
        assert_eq!(t.peak, n(160));
        assert_eq!(t.odd_before, Some(n(53)));
        assert_eq!(t.odd_after, n(5));

        let t = triple(13);
        assert_eq!(t.peak, n(40));
        assert_eq!(t.odd_before, Some(n(13)));
        assert_eq!(t.odd_after, n(5));

        // 20 is its own peak: no predecessor, and 20 = 4·5 halves to 5.
        let t = triple(20);
        assert_eq!(t.peak, n(20));
        assert_eq!(t.odd_before, None);
        assert_eq!(t.odd_after, n(5));
    }

    #[test]
    fn triples_found_by_direct_iteration() {
        // Oracle: walk the raw value list and read the triple off it.
        for start in [7u64, 9, 27, 97] {
            let values = crate::core::trajectory(&n(start), CAP).unwrap().values;
            let peak = values.iter().max().unwrap().clone();
            let idx = values.iter().position(|v| *v == peak).unwrap();
            let expect_before = (idx > 0).then(|| values[idx - 1].clone());

            let t = triple(start);
            assert_eq!(t.peak, peak);
            assert_eq!(t.odd_before, expect_before);
            assert_eq!(t.odd_after, peak.odd_part());
        }
        // 7 and 9 share the tail through 17 -> 52: peak 52, u 17, v 13.
        assert_eq!(triple(7).peak, n(52));
        assert_eq!(triple(7).odd_before, Some(n(17)));
        assert_eq!(triple(7).odd_after, n(13));
        assert_eq!(triple(9).peak, n(52));
        assert_eq!(triple(9).odd_before, Some(n(17)));
    }

    #[test]
    fn small_inputs_are_rejected() {
        assert!(matches!(
            peak_triple(&n(1), CAP),
            Err(Error::InputBelowThree(_))
        ));
        assert!(matches!(
            peak_triple(&n(2), CAP),
            Err(Error::InputBelowThree(_))
        ));
        assert!(peak_triple(&n(3), CAP).is_ok());
        assert!(peak_triple(&n(4), CAP).is_ok());
    }

    #[test]
    fn divisibility_law_small_ranges() {
        assert!(check_peak_divisibility(1000, false, CAP).passed());
        assert!(check_peak_divisibility(1000, true, CAP).passed());
    }

    #[test]
    fn neighbors_law_small_range() {
        let r = check_peak_neighbors(2000, CAP);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn decompose_13_at_t1() {
        let d = decompose_u(&n(13), 1).unwrap();
        assert_eq!(d.pattern, UPattern::TwicePow4);
        assert_eq!(d.k, n(1));
        assert_eq!(d.predicted_divisor, n(8));
        assert_eq!(d.predicted_v, n(5));
        verify_decomposition(&n(13), &d).unwrap(); // p = 40 = 8·5
    }

    #[test]
    fn decompose_37_at_t1() {
        // 37 = 8·4 + 5, k = 4 = 2·2, 3l+1 = 7 odd so e = 0: 16 | 112, v = 7.
        let d = decompose_u(&n(37), 1).unwrap();
        assert_eq!(d.pattern, UPattern::TwicePow4);
        assert_eq!(d.k, n(4));
        assert_eq!(d.l, Some(n(2)));
        assert_eq!(d.e, Some(0));
        assert_eq!(d.predicted_divisor, n(16));
        assert_eq!(d.predicted_v, n(7));
        verify_decomposition(&n(37), &d).unwrap();
    }

    #[test]
    fn decompose_65_at_t1() {
        // 65 = 4·16 + 1 only matches the plain pattern: l = 8, 4 | 196, v = 49.
        let d = decompose_u(&n(65), 1).unwrap();
        assert_eq!(d.pattern, UPattern::Pow4);
        assert_eq!(d.k, n(16));
        assert_eq!(d.l, Some(n(8)));
        assert_eq!(d.predicted_divisor, n(4));
        assert_eq!(d.predicted_v, n(49));
        verify_decomposition(&n(65), &d).unwrap(); // p = 196 = 4·49
    }

    #[test]
    fn decompose_53_and_101_at_t2() {
        // 53 = 32·1 + 21: k odd, 32 | 160, v = 5.
        let d = decompose_u(&n(53), 2).unwrap();
        assert_eq!((d.pattern, d.k.clone()), (UPattern::TwicePow4, n(1)));
        assert_eq!(d.predicted_divisor, n(32));
        assert_eq!(d.predicted_v, n(5));
        verify_decomposition(&n(53), &d).unwrap();

        // 101 = 16·6 + 5: plain pattern, l = 3, 16 | 304, v = 19.
        let d = decompose_u(&n(101), 2).unwrap();
        assert_eq!((d.pattern, d.k.clone()), (UPattern::Pow4, n(6)));
        assert_eq!(d.predicted_divisor, n(16));
        assert_eq!(d.predicted_v, n(19));
        verify_decomposition(&n(101), &d).unwrap();
    }

    #[test]
    fn decompositions_of_149_agree_across_t() {
        // 149 matches both patterns at t=1 and t=2 and the plain pattern
        // at t=3 (k=2, l=1); every route predicts 64 | 448 and v = 7.
        let all = decompose_all(&n(149), 4);
        assert_eq!(all.len(), 5);
        for d in &all {
            assert_eq!(d.predicted_divisor, n(64));
            assert_eq!(d.predicted_v, n(7));
            verify_decomposition(&n(149), d).unwrap();
        }
        // The t=2 twice-pattern route: k=4, l=2, 3l+1 = 7 odd so e = 0.
        let d = &all[2];
        assert_eq!((d.pattern, d.t, d.k.clone()), (UPattern::TwicePow4, 2, n(4)));
        assert_eq!((d.l.clone(), d.e), (Some(n(2)), Some(0)));
        // The t=2 plain-pattern route: k=9, l=4, 3l+2 = 14 so e = 1.
        let d = &all[3];
        assert_eq!((d.pattern, d.t, d.k.clone()), (UPattern::Pow4, 2, n(9)));
        assert_eq!((d.l.clone(), d.e), (Some(n(4)), Some(1)));
        // The t=3 plain-pattern route: k=2, l=1, 6l+1 = 7 directly.
        let d = &all[4];
        assert_eq!((d.pattern, d.t, d.k.clone()), (UPattern::Pow4, 3, n(2)));
        assert_eq!((d.l.clone(), d.e), (Some(n(1)), None));
    }

    #[test]
    fn reconstruction_is_identity() {
        for u in (1u64..500).step_by(2) {
            for d in decompose_all(&n(u), 5) {
                assert_eq!(d.reconstruct(), n(u));
            }
        }
    }

    #[test]
    fn divisor_predictions_hold_on_a_small_range() {
        let r = check_divisor_predictions(2001, 6);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn non_matching_shapes_return_none() {
        // 7 = 3 mod 4 matches neither pattern at any t.
        assert!(decompose_u(&n(7), 1).is_none());
        assert!(decompose_u(&n(7), 2).is_none());
        assert!(decompose_all(&n(7), 6).is_empty());
        // 149 does not match the twice-pattern at t = 3.
        assert!(decompose_at(&n(149), 3, UPattern::TwicePow4).is_none());
    }
}
