//! The map n -> n/2 (even) / 3n+1 (odd), trajectory generation, and the
//! scalar statistics derived from a trajectory.
//!
//! One iteration count is charged per application of the map; there is no
//! (3n+1)/2 shortcut anywhere. A trajectory starts at its input and stops
//! the first time it reaches 1, so `trajectory(1)` is the single-element
//! list `[1]` and the 1 -> 4 -> 2 -> 1 cycle is never entered implicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nat::Nat;

/// Default bound on map applications before a run is abandoned.
///
/// Orders of magnitude above any stopping time observed in the supported
/// sweep ranges, while keeping every call guaranteed to terminate.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// 1 was not reached within the configured number of applications.
    /// Either the cap is too small or the input is a counterexample;
    /// the caller decides, we never truncate silently.
    #[error("trajectory of {start} did not reach 1 within {cap} steps")]
    CapExceeded { start: Nat, cap: u64 },
    /// Inputs must be >= 1.
    #[error("input must be a positive integer")]
    ZeroInput,
    /// No value below 1 exists, so its stopping time is undefined.
    #[error("stopping time is undefined for 1")]
    StoppingTimeOfOne,
    /// Digit strings are supported for bases 2..=36.
    #[error("base {0} out of range (2..=36)")]
    BaseOutOfRange(u32),
    /// A digit string contained characters outside its base.
    #[error("{input:?} is not a base-{base} numeral")]
    InvalidDigits { input: String, base: u32 },
}

/// A full orbit from `start` down to 1, with its derived statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Nat,
    /// `values[0] == start`, each entry is one map application after the
    /// previous, and the list ends at the first occurrence of 1.
    pub values: Vec<Nat>,
    /// Applications needed to reach 1 (`values.len() - 1`).
    pub total_stopping_time: u64,
    /// Least `j >= 1` with `values[j] < start`; `None` for start 1.
    pub stopping_time: Option<u64>,
    /// Maximum of `values`, the start included.
    pub peak: Nat,
    /// Least index attaining the peak.
    pub peak_index: u64,
}

/// One application of the map. Requires `n >= 1`.
pub fn step(n: &Nat) -> Nat {
    assert!(!n.is_zero(), "step requires n >= 1");
    if n.is_even() {
        n.half()
    } else {
        n.triple_plus_one()
    }
}

/// `k` applications of the map, iterating past 1 if the orbit reaches it.
pub fn step_k(n: &Nat, k: u64) -> Nat {
    let mut cur = n.clone();
    for _ in 0..k {
        cur = step(&cur);
    }
    cur
}

/// Scalar summary of an orbit, computed in one pass without materializing
/// the value list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSummary {
    pub total_stopping_time: u64,
    pub stopping_time: Option<u64>,
    pub peak: Nat,
    pub peak_index: u64,
    /// Value one step before the peak; `None` when the start is the peak.
    pub before_peak: Option<Nat>,
}

// Fast path: run the orbit in u128 registers with checked arithmetic.
// Returns Err with the resume state if 3n+1 leaves the 128-bit range.
struct Escalated {
    cur: Nat,
    state: OrbitState,
}

struct OrbitState {
    steps: u64,
    stop: Option<u64>,
    peak: Nat,
    peak_index: u64,
    before_peak: Option<Nat>,
}

fn summarize_u128(start: u128, cap: u64) -> Result<Result<OrbitSummary, Escalated>, Error> {
    let mut cur = start;
    let mut steps: u64 = 0;
    let mut stop: Option<u64> = None;
    let mut peak = start;
    let mut peak_index: u64 = 0;
    let mut before_peak: Option<u128> = None;

    while cur != 1 {
        if steps >= cap {
            return Err(Error::CapExceeded {
                start: Nat::from(start),
                cap,
            });
        }
        let next = if cur & 1 == 0 {
            cur >> 1
        } else {
            match cur.checked_mul(3).and_then(|m| m.checked_add(1)) {
                Some(v) => v,
                None => {
                    // Continue in arbitrary precision from this point on.
                    let big = Nat::from(cur).triple_plus_one();
                    steps += 1;
                    // A promoted value certainly exceeds the running peak.
                    let state = OrbitState {
                        steps,
                        stop,
                        peak: big.clone(),
                        peak_index: steps,
                        before_peak: Some(Nat::from(cur)),
                    };
                    return Ok(Err(Escalated { cur: big, state }));
                }
            }
        };
        steps += 1;
        if stop.is_none() && next < start {
            stop = Some(steps);
        }
        if next > peak {
            before_peak = Some(cur);
            peak = next;
            peak_index = steps;
        }
        cur = next;
    }

    Ok(Ok(OrbitSummary {
        total_stopping_time: steps,
        stopping_time: stop,
        peak: Nat::from(peak),
        peak_index,
        before_peak: before_peak.map(Nat::from),
    }))
}

fn summarize_nat(start: &Nat, cap: u64, resume: Option<Escalated>) -> Result<OrbitSummary, Error> {
    let (mut cur, mut state) = match resume {
        Some(e) => (e.cur, e.state),
        None => (
            start.clone(),
            OrbitState {
                steps: 0,
                stop: None,
                peak: start.clone(),
                peak_index: 0,
                before_peak: None,
            },
        ),
    };

    while !cur.is_one() {
        if state.steps >= cap {
            return Err(Error::CapExceeded {
                start: start.clone(),
                cap,
            });
        }
        let next = step(&cur);
        state.steps += 1;
        if state.stop.is_none() && next < *start {
            state.stop = Some(state.steps);
        }
        if next > state.peak {
            state.before_peak = Some(cur.clone());
            state.peak = next.clone();
            state.peak_index = state.steps;
        }
        cur = next;
    }

    Ok(OrbitSummary {
        total_stopping_time: state.steps,
        stopping_time: state.stop,
        peak: state.peak,
        peak_index: state.peak_index,
        before_peak: state.before_peak,
    })
}

/// One-pass orbit statistics for `n >= 1`.
pub fn summarize(n: &Nat, cap: u64) -> Result<OrbitSummary, Error> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    match n.to_u128() {
        Some(v) => match summarize_u128(v, cap)? {
            Ok(summary) => Ok(summary),
            Err(escalated) => summarize_nat(n, cap, Some(escalated)),
        },
        None => summarize_nat(n, cap, None),
    }
}

/// The full trajectory of `n >= 1`, ending at the first occurrence of 1.
pub fn trajectory(n: &Nat, cap: u64) -> Result<Trajectory, Error> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut values = vec![n.clone()];
    let mut cur = n.clone();
    let mut stop = None;
    let mut peak = n.clone();
    let mut peak_index: u64 = 0;
    let mut steps: u64 = 0;

    while !cur.is_one() {
        if steps >= cap {
            return Err(Error::CapExceeded {
                start: n.clone(),
                cap,
            });
        }
        cur = step(&cur);
        steps += 1;
        if stop.is_none() && cur < *n {
            stop = Some(steps);
        }
        if cur > peak {
            peak = cur.clone();
            peak_index = steps;
        }
        values.push(cur.clone());
    }

    Ok(Trajectory {
        start: n.clone(),
        values,
        total_stopping_time: steps,
        stopping_time: stop,
        peak,
        peak_index,
    })
}

/// Applications needed for `n >= 1` to reach 1.
pub fn total_stopping_time(n: &Nat, cap: u64) -> Result<u64, Error> {
    summarize(n, cap).map(|s| s.total_stopping_time)
}

/// Least `j` with the j-th iterate of `n` strictly below `n`. Requires `n >= 2`.
///
/// Stops iterating at the first drop, so it is much cheaper than a full
/// orbit when only this statistic is needed.
pub fn stopping_time(n: &Nat, cap: u64) -> Result<u64, Error> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    if n.is_one() {
        return Err(Error::StoppingTimeOfOne);
    }

    let mut steps: u64 = 0;
    // u128 leg while the values fit.
    let mut big: Option<Nat> = match n.to_u128() {
        Some(start) => {
            let mut cur = start;
            loop {
                if cur < start && steps >= 1 {
                    return Ok(steps);
                }
                if steps >= cap {
                    return Err(Error::CapExceeded {
                        start: n.clone(),
                        cap,
                    });
                }
                if cur & 1 == 0 {
                    cur >>= 1;
                } else {
                    match cur.checked_mul(3).and_then(|m| m.checked_add(1)) {
                        Some(v) => cur = v,
                        None => {
                            steps += 1;
                            break Some(Nat::from(cur).triple_plus_one());
                        }
                    }
                }
                steps += 1;
            }
        }
        None => None,
    };

    let mut cur = big.take().unwrap_or_else(|| n.clone());
    loop {
        if cur < *n && steps >= 1 {
            return Ok(steps);
        }
        if steps >= cap {
            return Err(Error::CapExceeded {
                start: n.clone(),
                cap,
            });
        }
        cur = step(&cur);
        steps += 1;
    }
}

/// Maximum value in the trajectory of `n >= 1`, the start included.
pub fn peak_of(n: &Nat, cap: u64) -> Result<Nat, Error> {
    summarize(n, cap).map(|s| s.peak)
}

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Most-significant-first digit string of `n` in `base` (2..=36).
/// No leading zeros; zero itself renders as "0".
pub fn to_base(n: &Nat, base: u32) -> Result<String, Error> {
    if !(2..=36).contains(&base) {
        return Err(Error::BaseOutOfRange(base));
    }
    if n.is_zero() {
        return Ok("0".to_string());
    }
    let digits = match n {
        Nat::Small(v) => {
            let mut v = *v;
            let mut out = Vec::new();
            while v > 0 {
                out.push((v % base as u128) as u8);
                v /= base as u128;
            }
            out.reverse();
            out
        }
        Nat::Big(b) => b.to_radix_be(base),
    };
    Ok(digits.iter().map(|&d| DIGITS[d as usize] as char).collect())
}

/// Parses a digit string produced by [`to_base`] back into a value.
pub fn parse_base(s: &str, base: u32) -> Result<Nat, Error> {
    if !(2..=36).contains(&base) {
        return Err(Error::BaseOutOfRange(base));
    }
    if s.is_empty() {
        return Err(Error::InvalidDigits {
            input: s.to_string(),
            base,
        });
    }
    let big = num_bigint::BigUint::parse_bytes(s.as_bytes(), base).ok_or(Error::InvalidDigits {
        input: s.to_string(),
        base,
    })?;
    Ok(Nat::from_big(big))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn step_branches() {
        assert_eq!(step(&n(3)), n(10));
        assert_eq!(step(&n(10)), n(5));
        assert_eq!(step(&n(13)), n(40));
        assert_eq!(step(&n(1)), n(4));
    }

    #[test]
    fn trajectory_of_three() {
        let t = trajectory(&n(3), DEFAULT_STEP_CAP).unwrap();
        let expect: Vec<Nat> = [3u64, 10, 5, 16, 8, 4, 2, 1].iter().map(|&v| n(v)).collect();
        assert_eq!(t.values, expect);
        assert_eq!(t.total_stopping_time, 7);
        assert_eq!(t.stopping_time, Some(6));
        assert_eq!(t.peak, n(16));
        assert_eq!(t.peak_index, 3);
    }

    #[test]
    fn trajectory_of_one_is_a_fixed_point() {
        let t = trajectory(&n(1), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(t.values, vec![n(1)]);
        assert_eq!(t.total_stopping_time, 0);
        assert_eq!(t.stopping_time, None);
        assert_eq!(t.peak, n(1));
        assert_eq!(t.peak_index, 0);
    }

    #[test]
    fn total_stopping_times() {
        for (input, expect) in [(5u64, 5u64), (13, 9), (21, 7), (53, 11), (213, 13)] {
            assert_eq!(total_stopping_time(&n(input), DEFAULT_STEP_CAP).unwrap(), expect);
        }
    }

    #[test]
    fn stopping_times() {
        assert_eq!(stopping_time(&n(7), DEFAULT_STEP_CAP).unwrap(), 11);
        assert_eq!(stopping_time(&n(9), DEFAULT_STEP_CAP).unwrap(), 3);
        assert_eq!(stopping_time(&n(2), DEFAULT_STEP_CAP).unwrap(), 1);
        assert_eq!(
            stopping_time(&n(1), DEFAULT_STEP_CAP),
            Err(Error::StoppingTimeOfOne)
        );
    }

    #[test]
    fn stopping_time_of_27_descends_to_23() {
        // Independent oracle: raw iteration, recording the first drop.
        let mut cur = n(27);
        let mut j = 0u64;
        while cur >= n(27) {
            cur = step(&cur);
            j += 1;
        }
        assert_eq!(j, 96);
        assert_eq!(cur, n(23));
        assert_eq!(stopping_time(&n(27), DEFAULT_STEP_CAP).unwrap(), 96);
    }

    #[test]
    fn peaks() {
        assert_eq!(peak_of(&n(15), DEFAULT_STEP_CAP).unwrap(), n(160));
        assert_eq!(peak_of(&n(4), DEFAULT_STEP_CAP).unwrap(), n(4));
        assert_eq!(peak_of(&n(27), DEFAULT_STEP_CAP).unwrap(), n(9232));
    }

    #[test]
    fn peak_index_is_first_occurrence() {
        let t = trajectory(&n(27), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(t.values[t.peak_index as usize], t.peak);
        for v in &t.values[..t.peak_index as usize] {
            assert!(*v < t.peak);
        }
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let err = trajectory(&n(27), 10).unwrap_err();
        assert_eq!(
            err,
            Error::CapExceeded {
                start: n(27),
                cap: 10
            }
        );
        assert!(total_stopping_time(&n(27), 10).is_err());
    }

    #[test]
    fn zero_is_rejected() {
        assert_eq!(trajectory(&Nat::ZERO, 10), Err(Error::ZeroInput));
        assert_eq!(summarize(&Nat::ZERO, 10).unwrap_err(), Error::ZeroInput);
    }

    #[test]
    fn base_conversion_matches_known_digit_strings() {
        assert_eq!(to_base(&n(7), 2).unwrap(), "111");
        assert_eq!(to_base(&n(21), 3).unwrap(), "210");
        assert_eq!(to_base(&n(19), 4).unwrap(), "103");
        assert_eq!(to_base(&Nat::ZERO, 2).unwrap(), "0");
        assert_eq!(to_base(&n(255), 16).unwrap(), "ff");
        assert!(to_base(&n(1), 1).is_err());
        assert!(to_base(&n(1), 37).is_err());
    }

    #[test]
    fn parse_base_rejects_foreign_digits() {
        assert_eq!(parse_base("111", 2).unwrap(), n(7));
        assert_eq!(
            parse_base("210", 2),
            Err(Error::InvalidDigits {
                input: "210".into(),
                base: 2
            })
        );
        assert!(parse_base("", 10).is_err());
        assert!(parse_base("10", 40).is_err());
    }

    #[test]
    fn summarize_agrees_with_trajectory() {
        for v in 1..400u64 {
            let t = trajectory(&n(v), DEFAULT_STEP_CAP).unwrap();
            let s = summarize(&n(v), DEFAULT_STEP_CAP).unwrap();
            assert_eq!(s.total_stopping_time, t.total_stopping_time);
            assert_eq!(s.stopping_time, t.stopping_time);
            assert_eq!(s.peak, t.peak);
            assert_eq!(s.peak_index, t.peak_index);
            if t.peak_index > 0 {
                assert_eq!(
                    s.before_peak.as_ref(),
                    Some(&t.values[t.peak_index as usize - 1])
                );
            } else {
                assert_eq!(s.before_peak, None);
            }
        }
    }

    #[test]
    fn escalation_past_u128_is_lossless() {
        // 2^127 - 1 is odd; 3n+1 overflows u128 immediately.
        let start = Nat::Small((1u128 << 127) - 1);
        let s = summarize(&start, 10_000_000).unwrap();
        // The orbit must come back below the start eventually.
        assert!(s.stopping_time.is_some());
        assert!(s.peak > start);

        // Cross-check the first few iterates against pure big arithmetic.
        let mut big = start.to_biguint();
        let mut cur = start.clone();
        for _ in 0..64 {
            big = if big.bit(0) {
                &big * 3u32 + 1u32
            } else {
                &big >> 1u32
            };
            cur = step(&cur);
            assert_eq!(cur.to_biguint(), big);
        }
    }
}
