//! Pointwise checkers for arithmetic identities of the map on structured
//! integer families.
//!
//! Each checker scans its parameter ranges in lexicographic order and stops
//! at the first violation, so a failing report always carries the minimal
//! counterexample within the scanned range. The identities themselves are
//! verified by direct evaluation of both sides — nothing is assumed.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{self, step, step_k, total_stopping_time};
use crate::nat::Nat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] core::Error),
    #[error("{name} must be odd (got {value})")]
    NotOdd { name: &'static str, value: u64 },
    #[error("gcd({a}, {b}) must be 4 (got {gcd})")]
    GcdNotFour { a: u64, b: u64, gcd: u64 },
}

/// A parameter point where a law failed, with both sides of the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub params: Vec<(String, String)>,
    pub observed: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail { counterexample: Counterexample },
}

/// Result of scanning one law over a parameter range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub ranges: String,
    /// Number of parameter points checked (up to and including a failure).
    pub points: u64,
    pub outcome: Outcome,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Pass)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Pass => write!(f, "PASS {} [{}] ({} points)", self.law, self.ranges, self.points),
            Outcome::Fail { counterexample } => {
                let params: Vec<String> = counterexample
                    .params
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                write!(
                    f,
                    "FAIL {} [{}] at {}: observed {}, expected {}",
                    self.law,
                    self.ranges,
                    params.join(", "),
                    counterexample.observed,
                    counterexample.expected
                )
            }
        }
    }
}

struct Scan {
    law: &'static str,
    ranges: String,
    points: u64,
    fail: Option<Counterexample>,
}

impl Scan {
    fn new(law: &'static str, ranges: String) -> Self {
        Scan {
            law,
            ranges,
            points: 0,
            fail: None,
        }
    }

    /// Records one checked point; returns false once a failure is latched
    /// so callers can break out of their loops.
    fn check(
        &mut self,
        ok: bool,
        params: &[(&str, String)],
        observed: impl fmt::Display,
        expected: impl fmt::Display,
    ) -> bool {
        self.points += 1;
        if !ok {
            self.fail = Some(Counterexample {
                params: params
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect(),
                observed: observed.to_string(),
                expected: expected.to_string(),
            });
        }
        self.fail.is_none()
    }

    fn finish(self) -> LawReport {
        LawReport {
            law: self.law.to_string(),
            ranges: self.ranges,
            points: self.points,
            outcome: match self.fail {
                None => Outcome::Pass,
                Some(counterexample) => Outcome::Fail { counterexample },
            },
        }
    }
}

fn require_odd(name: &'static str, value: u64) -> Result<(), Error> {
    if value % 2 == 1 {
        Ok(())
    } else {
        Err(Error::NotOdd { name, value })
    }
}

/// (4^k - 1) / 3 by exact division; the divisibility is asserted, never
/// approximated.
pub fn pow4_minus_one_div3(k: u32) -> Nat {
    let p = Nat::pow(4, k);
    p.saturating_sub(&Nat::ONE).exact_div(&Nat::from(3u64))
}

/// For odd `a1`, `b` and the sequence a_{i+1} = (3b+1)·a_i + b, checks both
/// T(a_{i+1}) = (3b+1)·T(a_i) and T(a_{i+1}) = (3b+1)^i·T(a_1) for every
/// i in 1..=n_max, plus agreement of the two right-hand sides.
pub fn check_affine_recurrence(a1: u64, b: u64, n_max: u32) -> Result<LawReport, Error> {
    require_odd("a1", a1)?;
    require_odd("b", b)?;
    let mut scan = Scan::new(
        "affine-recurrence",
        format!("a1={a1}, b={b}, n=1..={n_max}"),
    );
    scan_affine_recurrence(&mut scan, a1, b, n_max);
    Ok(scan.finish())
}

fn scan_affine_recurrence(scan: &mut Scan, a1: u64, b: u64, n_max: u32) {
    let factor = Nat::from(3 * b + 1);
    let b_nat = Nat::from(b);
    let t_a1 = step(&Nat::from(a1));
    let mut a_i = Nat::from(a1);
    let mut factor_pow = Nat::ONE;
    for i in 1..=n_max {
        let a_next = factor.checked_mul(&a_i).checked_add(&b_nat);
        debug_assert!(a_next.is_odd());
        factor_pow = factor_pow.checked_mul(&factor);

        let lhs = step(&a_next);
        let one_step = factor.checked_mul(&step(&a_i));
        let power_form = factor_pow.checked_mul(&t_a1);
        let params = [
            ("a1", a1.to_string()),
            ("b", b.to_string()),
            ("n", i.to_string()),
        ];
        if !scan.check(
            lhs == one_step && one_step == power_form,
            &params,
            format!("T(a_{}) = {}", i + 1, lhs),
            format!("(3b+1)·T(a_{i}) = {one_step} and (3b+1)^{i}·T(a_1) = {power_form}"),
        ) {
            return;
        }
        a_i = a_next;
    }
}

/// Scans [`check_affine_recurrence`] over all odd a1, b up to the bounds,
/// merging into a single report.
pub fn check_affine_recurrence_range(a1_max: u64, b_max: u64, n_max: u32) -> LawReport {
    let mut scan = Scan::new(
        "affine-recurrence",
        format!("a1 odd <={a1_max}, b odd <={b_max}, n=1..={n_max}"),
    );
    'outer: for a1 in (1..=a1_max).step_by(2) {
        for b in (1..=b_max).step_by(2) {
            scan_affine_recurrence(&mut scan, a1, b, n_max);
            if scan.fail.is_some() {
                break 'outer;
            }
        }
    }
    scan.finish()
}

/// T(8j+5) = 4·T(2j+1) for j in 1..=j_max.
pub fn check_step_identity_8j5(j_max: u64) -> LawReport {
    let mut scan = Scan::new("step-identity-8j5", format!("j=1..={j_max}"));
    let four = Nat::from(4u64);
    for j in 1..=j_max {
        let lhs = step(&Nat::from(8 * j + 5));
        let rhs = four.checked_mul(&step(&Nat::from(2 * j + 1)));
        if !scan.check(
            lhs == rhs,
            &[("j", j.to_string())],
            format!("T({}) = {lhs}", 8 * j + 5),
            format!("4·T({}) = {rhs}", 2 * j + 1),
        ) {
            break;
        }
    }
    scan.finish()
}

/// For odd `a` that reaches 1 in j steps, 4^k·a + (4^k-1)/3 reaches 1 in
/// j + 2k steps.
pub fn check_iteration_offset(a: u64, k: u32, cap: u64) -> Result<LawReport, Error> {
    require_odd("a", a)?;
    let mut scan = Scan::new("iteration-offset", format!("a={a}, k={k}"));
    scan_iteration_offset(&mut scan, a, k, cap)?;
    Ok(scan.finish())
}

fn scan_iteration_offset(scan: &mut Scan, a: u64, k: u32, cap: u64) -> Result<bool, Error> {
    let j = total_stopping_time(&Nat::from(a), cap)?;
    let derived = Nat::pow(4, k)
        .checked_mul(&Nat::from(a))
        .checked_add(&pow4_minus_one_div3(k));
    let observed = total_stopping_time(&derived, cap)?;
    let expected = j + 2 * k as u64;
    Ok(scan.check(
        observed == expected,
        &[("a", a.to_string()), ("k", k.to_string())],
        format!("{derived} reaches 1 in {observed}"),
        format!("{} + 2·{} = {expected}", j, k),
    ))
}

/// Scans [`check_iteration_offset`] over odd a and k in 1..=k_max.
pub fn check_iteration_offset_range(a_max: u64, k_max: u32, cap: u64) -> Result<LawReport, Error> {
    let mut scan = Scan::new(
        "iteration-offset",
        format!("a odd 3..={a_max}, k=1..={k_max}"),
    );
    'outer: for a in (3..=a_max).step_by(2) {
        for k in 1..=k_max {
            if !scan_iteration_offset(&mut scan, a, k, cap)? {
                break 'outer;
            }
        }
    }
    Ok(scan.finish())
}

/// The geometric sums 1 + 4 + 4^2 + ... + 4^k reach 1 in exactly 2k+3 steps.
pub fn check_geometric_series(k_max: u32, cap: u64) -> Result<LawReport, Error> {
    let mut scan = Scan::new("geometric-series-stopping", format!("k=1..={k_max}"));
    for k in 1..=k_max {
        let s = pow4_minus_one_div3(k + 1);
        let observed = total_stopping_time(&s, cap)?;
        let expected = 2 * k as u64 + 3;
        if !scan.check(
            observed == expected,
            &[("k", k.to_string())],
            format!("{s} reaches 1 in {observed}"),
            format!("2·{k}+3 = {expected}"),
        ) {
            break;
        }
    }
    Ok(scan.finish())
}

/// (3+4t)^m for even m is 1 mod 4 and drops below itself in 3 steps.
pub fn check_odd_power_descent(t_max: u64, m_max: u32) -> LawReport {
    let mut scan = Scan::new(
        "odd-power-descent",
        format!("t=0..={t_max}, even m=2..={m_max}"),
    );
    'outer: for t in 0..=t_max {
        for m in (2..=m_max).step_by(2) {
            let n = Nat::pow(3 + 4 * t, m);
            let residue = n.rem_u64(4);
            let third = step_k(&n, 3);
            let params = [("t", t.to_string()), ("m", m.to_string())];
            if !scan.check(
                residue == 1 && third < n,
                &params,
                format!("n = {n} (mod 4 = {residue}), T^3(n) = {third}"),
                "n = 1 mod 4 and T^3(n) < n".to_string(),
            ) {
                break 'outer;
            }
        }
    }
    scan.finish()
}

/// The sums 1 + 4^n + 4^(2n) + ... + 4^(mn) are 1 mod 4 and drop below
/// themselves in 3 steps.
pub fn check_power_sum_descent(n_max: u32, m_max: u32) -> LawReport {
    let mut scan = Scan::new(
        "power-sum-descent",
        format!("n=1..={n_max}, m=1..={m_max}"),
    );
    'outer: for n in 1..=n_max {
        let term = Nat::pow(4, n);
        let mut s = Nat::ONE;
        let mut power = Nat::ONE;
        for m in 1..=m_max {
            power = power.checked_mul(&term);
            s = s.checked_add(&power);
            let residue = s.rem_u64(4);
            let third = step_k(&s, 3);
            let params = [("n", n.to_string()), ("m", m.to_string())];
            if !scan.check(
                residue == 1 && third < s,
                &params,
                format!("s = {s} (mod 4 = {residue}), T^3(s) = {third}"),
                "s = 1 mod 4 and T^3(s) < s".to_string(),
            ) {
                break 'outer;
            }
        }
    }
    scan.finish()
}

/// For gcd(a, b) = 4, the sums 1 + (an+b) + ... + (an+b)^m are 1 mod 4 and
/// drop below themselves in 3 steps. A gcd other than 4 is rejected.
pub fn check_gcd4_series_descent(
    a: u64,
    b: u64,
    n_max: u64,
    m_max: u32,
) -> Result<LawReport, Error> {
    let gcd = a.gcd(&b);
    if gcd != 4 {
        return Err(Error::GcdNotFour { a, b, gcd });
    }
    let mut scan = Scan::new(
        "gcd4-series-descent",
        format!("a={a}, b={b}, n=1..={n_max}, m=1..={m_max}"),
    );
    'outer: for n in 1..=n_max {
        let base = Nat::from(a * n + b);
        let mut s = Nat::ONE;
        let mut power = Nat::ONE;
        for m in 1..=m_max {
            power = power.checked_mul(&base);
            s = s.checked_add(&power);
            let residue = s.rem_u64(4);
            let third = step_k(&s, 3);
            let params = [("n", n.to_string()), ("m", m.to_string())];
            if !scan.check(
                residue == 1 && third < s,
                &params,
                format!("s = {s} (mod 4 = {residue}), T^3(s) = {third}"),
                "s = 1 mod 4 and T^3(s) < s".to_string(),
            ) {
                break 'outer;
            }
        }
    }
    Ok(scan.finish())
}

/// u = (4^a - 1)/3 steps to the power of four 4^a, which is its trajectory
/// peak, halves all the way to 1, and reaches it in exactly 2a+1 steps.
/// Scans a in 2..=a_max (a = 1 gives u = 1, which never leaves 1).
pub fn check_power_of_four_peak(a_max: u32, cap: u64) -> Result<LawReport, Error> {
    let mut scan = Scan::new("power-of-four-peak", format!("a=2..={a_max}"));
    for a in 2..=a_max {
        let u = pow4_minus_one_div3(a);
        let power = Nat::pow(4, a);
        let p = step(&u);
        let peak = core::peak_of(&u, cap)?;
        let v = peak.odd_part();
        let steps = total_stopping_time(&u, cap)?;
        let expected_steps = 2 * a as u64 + 1;
        let ok = p == power && peak == power && v.is_one() && steps == expected_steps;
        if !scan.check(
            ok,
            &[("a", a.to_string())],
            format!("u={u}: T(u)={p}, peak={peak}, v={v}, steps={steps}"),
            format!("T(u)=peak=4^{a}={power}, v=1, steps={expected_steps}"),
        ) {
            break;
        }
    }
    Ok(scan.finish())
}

/// Default scan bounds: wide enough to be convincing, small enough that
/// the whole suite stays sub-second.
pub mod defaults {
    pub const A1_MAX: u64 = 99;
    pub const B_MAX: u64 = 99;
    pub const RECURRENCE_N_MAX: u32 = 10;
    pub const J_MAX: u64 = 1000;
    pub const OFFSET_A_MAX: u64 = 99;
    pub const OFFSET_K_MAX: u32 = 10;
    pub const GEOMETRIC_K_MAX: u32 = 12;
    pub const T_MAX: u64 = 1000;
    pub const M_MAX: u32 = 8;
    pub const POWER_SUM_N_MAX: u32 = 20;
    pub const GCD4_A: u64 = 12;
    pub const GCD4_B: u64 = 4;
    pub const GCD4_N_MAX: u64 = 50;
    pub const POWER_OF_FOUR_A_MAX: u32 = 20;
}

/// Runs every law at its default range, in a fixed order.
pub fn run_all(cap: u64) -> Result<Vec<LawReport>, Error> {
    use defaults::*;
    Ok(vec![
        check_affine_recurrence_range(A1_MAX, B_MAX, RECURRENCE_N_MAX),
        check_step_identity_8j5(J_MAX),
        check_iteration_offset_range(OFFSET_A_MAX, OFFSET_K_MAX, cap)?,
        check_geometric_series(GEOMETRIC_K_MAX, cap)?,
        check_odd_power_descent(T_MAX, M_MAX),
        check_power_sum_descent(POWER_SUM_N_MAX, M_MAX),
        check_gcd4_series_descent(GCD4_A, GCD4_B, GCD4_N_MAX, M_MAX)?,
        check_power_of_four_peak(POWER_OF_FOUR_A_MAX, cap)?,
    ])
}
