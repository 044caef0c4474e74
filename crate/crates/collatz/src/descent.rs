//! Symbolic descent certificates for residue classes mod 2^s.
//!
//! A class {2^s·t + r : t >= 0} is tracked under the map as an affine form
//! a·t + c. While the coefficient stays even, the parity of a·t + c is the
//! parity of c for every t, so one symbolic step covers the whole class:
//!
//!   a·t + c  ->  (a/2)·t + c/2        when c is even
//!   a·t + c  ->  (3a)·t + 3c + 1      when c is odd
//!
//! A certificate records the first step count m at which the iterated form
//! is pointwise below the class (coeff < modulus and const <= residue),
//! which proves T^m(n) < n for every member of the class (for residue-equal
//! constants, every member with t >= 1). When the coefficient turns odd the
//! parity of the class members diverges and the class must be split into
//! its two children at modulus 2^(s+1) before anything more can be said.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::step_k;
use crate::laws::{Counterexample, LawReport, Outcome};
use crate::nat::Nat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("cannot step {0}: odd coefficient leaves the class parity undetermined")]
    ParityUndetermined(AffineForm),
    #[error("modulus must be 2^s with s >= 1 (got {0})")]
    InvalidModulus(Nat),
    #[error("residue {residue} must be below the modulus {modulus}")]
    ResidueOutOfRange { modulus: Nat, residue: Nat },
}

/// The integer family coeff·t + constant over t >= 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineForm {
    pub coeff: Nat,
    pub constant: Nat,
}

impl AffineForm {
    pub fn new(coeff: impl Into<Nat>, constant: impl Into<Nat>) -> Self {
        AffineForm {
            coeff: coeff.into(),
            constant: constant.into(),
        }
    }

    /// The family member at parameter `t`.
    pub fn eval(&self, t: &Nat) -> Nat {
        self.coeff.checked_mul(t).checked_add(&self.constant)
    }
}

impl std::fmt::Display for AffineForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}t+{}", self.coeff, self.constant)
    }
}

/// One symbolic application of the map to a whole class.
/// Requires an even coefficient, otherwise the branch taken would differ
/// between class members.
pub fn step_affine(f: &AffineForm) -> Result<AffineForm, Error> {
    if f.coeff.is_odd() {
        return Err(Error::ParityUndetermined(f.clone()));
    }
    if f.constant.is_even() {
        Ok(AffineForm {
            coeff: f.coeff.half(),
            constant: f.constant.half(),
        })
    } else {
        let three = Nat::from(3u64);
        Ok(AffineForm {
            coeff: f.coeff.checked_mul(&three),
            constant: f.constant.triple_plus_one(),
        })
    }
}

/// The residue class {modulus·t + residue : t >= 0} with modulus 2^s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub modulus: Nat,
    pub residue: Nat,
}

impl ResidueClass {
    pub fn new(modulus: impl Into<Nat>, residue: impl Into<Nat>) -> Result<Self, Error> {
        let modulus = modulus.into();
        let residue = residue.into();
        if !is_power_of_two_at_least_2(&modulus) {
            return Err(Error::InvalidModulus(modulus));
        }
        if residue >= modulus {
            return Err(Error::ResidueOutOfRange { modulus, residue });
        }
        Ok(ResidueClass { modulus, residue })
    }

    /// Class for residue r at modulus 2^s.
    pub fn mod_pow2(s: u32, residue: impl Into<Nat>) -> Result<Self, Error> {
        assert!(s >= 1, "modulus exponent must be >= 1");
        ResidueClass::new(Nat::pow(2, s), residue)
    }

    /// The exponent s of the modulus 2^s.
    pub fn exponent(&self) -> u64 {
        self.modulus.twos_valuation()
    }

    /// Splits on the next bit of t: the children {2M·u + r} (t even) and
    /// {2M·u + r + M} (t odd) partition this class.
    pub fn refine(&self) -> (ResidueClass, ResidueClass) {
        let doubled = self.modulus.checked_mul(&Nat::from(2u64));
        (
            ResidueClass {
                modulus: doubled.clone(),
                residue: self.residue.clone(),
            },
            ResidueClass {
                modulus: doubled,
                residue: self.residue.checked_add(&self.modulus),
            },
        )
    }
}

impl std::fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}t+{}", self.modulus, self.residue)
    }
}

fn is_power_of_two_at_least_2(n: &Nat) -> bool {
    if *n < Nat::from(2u64) {
        return false;
    }
    n.odd_part().is_one()
}

/// Proof that every member of `class` falls below itself after `steps`
/// applications of the map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentCertificate {
    pub class: ResidueClass,
    pub steps: u64,
    /// Symbolic iterates; `trace[0]` is the class itself as a form and
    /// `trace[i+1]` is the symbolic step of `trace[i]`.
    pub trace: Vec<AffineForm>,
    pub final_form: AffineForm,
    /// Whether descent is strict at t = 0 as well. When the final constant
    /// equals the residue, the t = 0 member only reproduces itself.
    pub strict_at_zero: bool,
    /// First earlier step at which descent already held for every t >= 1
    /// (a weaker claim), when that precedes `steps`.
    pub weak_steps: Option<u64>,
}

impl DescentCertificate {
    /// Replays the certificate numerically: for each t in 0..=t_max the
    /// trace evaluated at t must match raw iteration, and the final value
    /// must sit below the class member. Returns the first discrepancy.
    pub fn verify_numeric(&self, t_max: u64) -> Result<(), String> {
        for t in 0..=t_max {
            let t_nat = Nat::from(t);
            let n = self.trace[0].eval(&t_nat);
            if n.is_zero() {
                continue; // residue 0 at t = 0 is outside the map's domain
            }
            let mut cur = n.clone();
            for (i, form) in self.trace.iter().enumerate().skip(1) {
                cur = crate::core::step(&cur);
                let symbolic = form.eval(&t_nat);
                if cur != symbolic {
                    return Err(format!(
                        "class {}: t={t} step {i}: numeric {cur} != symbolic {symbolic}",
                        self.class
                    ));
                }
            }
            let must_be_strict = t >= 1 || self.strict_at_zero;
            if must_be_strict && cur >= n {
                return Err(format!(
                    "class {}: t={t}: T^{}({n}) = {cur} is not below {n}",
                    self.class, self.steps
                ));
            }
        }
        Ok(())
    }
}

/// Why a class could not be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obstruction {
    /// The symbolic iterate reached an odd coefficient; members of the
    /// class take different branches from here.
    OddCoeff,
    /// The step budget ran out first.
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DescentOutcome {
    Certified(DescentCertificate),
    Undetermined {
        steps_taken: u64,
        blocking: AffineForm,
        reason: Obstruction,
    },
    /// The class was split; certify the children instead.
    Refined(Vec<ResidueClass>),
}

impl DescentOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, DescentOutcome::Certified(_))
    }

    pub fn certificate(&self) -> Option<&DescentCertificate> {
        match self {
            DescentOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }
}

/// Default step budget for a class mod 2^s. Every class either certifies
/// or hits an odd coefficient within about 2s+2 steps (an odd step is
/// always followed by a halving, and s halvings exhaust the coefficient),
/// so 4s leaves generous room.
pub fn default_max_steps(s: u64) -> u64 {
    4 * s.max(1)
}

/// Iterates the class symbolically and returns the first step count at
/// which the whole class provably descends, or the obstruction hit first.
pub fn certify(class: &ResidueClass, max_steps: u64) -> DescentOutcome {
    let modulus = &class.modulus;
    let residue = &class.residue;
    let mut form = AffineForm {
        coeff: modulus.clone(),
        constant: residue.clone(),
    };
    let mut trace = vec![form.clone()];
    let mut weak_from: Option<u64> = None;

    for m in 1..=max_steps {
        form = match step_affine(&form) {
            Ok(next) => next,
            Err(_) => {
                return DescentOutcome::Undetermined {
                    steps_taken: m - 1,
                    blocking: form,
                    reason: Obstruction::OddCoeff,
                }
            }
        };
        trace.push(form.clone());

        // Weak descent: a·t + c < M·t + r for every t >= 1.
        if weak_from.is_none() {
            let weak = (form.coeff < *modulus
                && form.coeff.checked_add(&form.constant) < modulus.checked_add(residue))
                || (form.coeff == *modulus && form.constant < *residue);
            if weak {
                weak_from = Some(m);
            }
        }

        // Full descent: pointwise below the class for every t >= 1, and
        // at t = 0 too unless the constant ties the residue.
        if form.coeff < *modulus && form.constant <= *residue {
            let strict_at_zero = form.constant < *residue;
            return DescentOutcome::Certified(DescentCertificate {
                class: class.clone(),
                steps: m,
                final_form: form.clone(),
                strict_at_zero,
                weak_steps: weak_from.filter(|&w| w < m),
                trace,
            });
        }
    }

    DescentOutcome::Undetermined {
        steps_taken: max_steps,
        blocking: form,
        reason: Obstruction::StepBudget,
    }
}

/// [`certify`], but an undetermined class is split one level instead.
pub fn certify_with_refinement(
    class: &ResidueClass,
    max_steps: u64,
    refine_budget: u32,
) -> DescentOutcome {
    match certify(class, max_steps) {
        DescentOutcome::Undetermined { .. } if refine_budget > 0 => {
            let (even, odd) = class.refine();
            DescentOutcome::Refined(vec![even, odd])
        }
        other => other,
    }
}

/// Resolves a class to leaf outcomes, refining undetermined classes up to
/// `extra_bits` further modulus bits. Leaves appear in depth-first
/// refinement order (even child before odd child).
pub fn refine_frontier(
    class: &ResidueClass,
    extra_bits: u32,
) -> Vec<(ResidueClass, DescentOutcome)> {
    let s = class.exponent();
    match certify_with_refinement(class, default_max_steps(s), extra_bits) {
        DescentOutcome::Refined(children) => children
            .iter()
            .flat_map(|child| refine_frontier(child, extra_bits - 1))
            .collect(),
        other => vec![(class.clone(), other)],
    }
}

/// One outcome per residue 0..2^s-1, in residue order.
pub fn enumerate(s: u32, max_steps: u64) -> Vec<(ResidueClass, DescentOutcome)> {
    use rayon::prelude::*;
    assert!((1..28).contains(&s), "enumeration is exponential in s");
    (0u64..(1 << s))
        .into_par_iter()
        .map(|r| {
            let class = ResidueClass::mod_pow2(s, r).expect("residue below modulus");
            let outcome = certify(&class, max_steps);
            (class, outcome)
        })
        .collect()
}

/// Certified share of residues per modulus exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub exponent: u32,
    pub certified: u64,
    pub total: u64,
}

impl CoverageRow {
    pub fn fraction(&self) -> f64 {
        self.certified as f64 / self.total as f64
    }
}

/// For each s in 1..=s_max, the fraction of residues mod 2^s whose class
/// certifies within the default step budget. Non-decreasing in s, because
/// certificates lift to both children of a refinement.
pub fn descent_coverage(s_max: u32) -> Vec<CoverageRow> {
    (1..=s_max)
        .map(|s| {
            let outcomes = enumerate(s, default_max_steps(s as u64));
            CoverageRow {
                exponent: s,
                certified: outcomes.iter().filter(|(_, o)| o.is_certified()).count() as u64,
                total: 1 << s,
            }
        })
        .collect()
}

/// The classes with a fixed-step descent certificate used as the engine's
/// regression anchor, with their certified step counts.
pub const CATALOG: [(u64, u64, u64); 13] = [
    (4, 1, 3),
    (16, 3, 6),
    (32, 11, 8),
    (32, 23, 8),
    (128, 7, 11),
    (128, 15, 11),
    (128, 59, 11),
    (256, 39, 13),
    (256, 79, 13),
    (256, 95, 13),
    (256, 123, 13),
    (256, 199, 13),
    (256, 219, 13),
];

/// Certifies every catalog class and checks the exact step counts, plus a
/// numeric replay of each certificate for t in 0..=t_check.
pub fn verify_catalog(t_check: u64) -> LawReport {
    let mut points = 0u64;
    let mut fail: Option<Counterexample> = None;

    for &(modulus, residue, expected_steps) in CATALOG.iter() {
        points += 1;
        let class = ResidueClass::new(modulus, residue).expect("catalog classes are valid");
        let params = [
            ("modulus", modulus.to_string()),
            ("residue", residue.to_string()),
        ];
        match certify(&class, default_max_steps(class.exponent())) {
            DescentOutcome::Certified(cert) => {
                if cert.steps != expected_steps {
                    fail = Some(make_counterexample(
                        &params,
                        format!("certified in {} steps", cert.steps),
                        format!("{expected_steps} steps"),
                    ));
                } else if let Err(msg) = cert.verify_numeric(t_check) {
                    fail = Some(make_counterexample(
                        &params,
                        msg,
                        "symbolic trace matches numeric iteration".to_string(),
                    ));
                }
            }
            other => {
                fail = Some(make_counterexample(
                    &params,
                    format!("{other:?}"),
                    format!("Certified in {expected_steps} steps"),
                ));
            }
        }
        if fail.is_some() {
            break;
        }
    }

    LawReport {
        law: "descent-catalog".to_string(),
        ranges: format!("{} classes, numeric replay t=0..={t_check}", CATALOG.len()),
        points,
        outcome: match fail {
            None => Outcome::Pass,
            Some(counterexample) => Outcome::Fail { counterexample },
        },
    }
}

fn make_counterexample(
    params: &[(&str, String)],
    observed: String,
    expected: String,
) -> Counterexample {
    Counterexample {
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect(),
        observed,
        expected,
    }
}

/// Brute-force oracle: the least m <= max_steps with T^m(n) < n for every
/// sampled member of the class (t in t_from..=t_to, skipping n = 0), or
/// None when no single m works for all of them. Independent of the
/// symbolic engine; used to cross-check certificates.
pub fn numeric_descent_oracle(
    class: &ResidueClass,
    max_steps: u64,
    t_from: u64,
    t_to: u64,
) -> Option<u64> {
    let members: Vec<Nat> = (t_from..=t_to)
        .map(|t| {
            class
                .modulus
                .checked_mul(&Nat::from(t))
                .checked_add(&class.residue)
        })
        .filter(|n| !n.is_zero())
        .collect();
    'step: for m in 1..=max_steps {
        for n in &members {
            if step_k(n, m) >= *n {
                continue 'step;
            }
        }
        return Some(m);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(modulus: u64, residue: u64) -> ResidueClass {
        ResidueClass::new(modulus, residue).unwrap()
    }

    #[test]
    fn affine_steps_follow_the_map() {
        let f = AffineForm::new(16u64, 3u64);
        let f1 = step_affine(&f).unwrap();
        assert_eq!(f1, AffineForm::new(48u64, 10u64));
        let f2 = step_affine(&f1).unwrap();
        assert_eq!(f2, AffineForm::new(24u64, 5u64));
        assert_eq!(
            step_affine(&AffineForm::new(4u64, 0u64)).unwrap(),
            AffineForm::new(2u64, 0u64)
        );
        assert!(matches!(
            step_affine(&AffineForm::new(3u64, 1u64)),
            Err(Error::ParityUndetermined(_))
        ));
    }

    #[test]
    fn class_validation() {
        assert!(ResidueClass::new(4u64, 1u64).is_ok());
        assert!(matches!(
            ResidueClass::new(6u64, 1u64),
            Err(Error::InvalidModulus(_))
        ));
        assert!(matches!(
            ResidueClass::new(1u64, 0u64),
            Err(Error::InvalidModulus(_))
        ));
        assert!(matches!(
            ResidueClass::new(4u64, 4u64),
            Err(Error::ResidueOutOfRange { .. })
        ));
    }

    #[test]
    fn refine_splits_on_the_next_bit() {
        let (even, odd) = class(4, 3).refine();
        assert_eq!(even, class(8, 3));
        assert_eq!(odd, class(8, 7));
        let (even, odd) = class(8, 3).refine();
        assert_eq!(even, class(16, 3));
        assert_eq!(odd, class(16, 11));
        let (even, odd) = class(2, 1).refine();
        assert_eq!(even, class(4, 1));
        assert_eq!(odd, class(4, 3));
    }

    #[test]
    fn certify_mod4_residue1() {
        let outcome = certify(&class(4, 1), 12);
        let cert = outcome.certificate().expect("certifies");
        assert_eq!(cert.steps, 3);
        assert_eq!(cert.final_form, AffineForm::new(3u64, 1u64));
        // Constant ties the residue: at t = 0 (n = 1) nothing descends.
        assert!(!cert.strict_at_zero);
        cert.verify_numeric(200).unwrap();
    }

    #[test]
    fn certify_mod16_residue3() {
        let cert = certify(&class(16, 3), 24);
        let cert = cert.certificate().expect("certifies");
        assert_eq!(cert.steps, 6);
        assert_eq!(cert.final_form, AffineForm::new(9u64, 2u64));
        assert!(cert.strict_at_zero);
        cert.verify_numeric(200).unwrap();
    }

    #[test]
    fn residue_27_mod_32_is_blocked_by_parity() {
        match certify(&class(32, 27), 20) {
            DescentOutcome::Undetermined {
                steps_taken,
                blocking,
                reason,
            } => {
                assert_eq!(steps_taken, 9);
                assert_eq!(blocking, AffineForm::new(81u64, 71u64));
                assert_eq!(reason, Obstruction::OddCoeff);
            }
            other => panic!("expected parity obstruction, got {other:?}"),
        }
    }

    #[test]
    fn enumerate_mod4() {
        let outcomes = enumerate(2, 8);
        assert_eq!(outcomes.len(), 4);
        let steps: Vec<Option<u64>> = outcomes
            .iter()
            .map(|(_, o)| o.certificate().map(|c| c.steps))
            .collect();
        assert_eq!(steps, vec![Some(1), Some(3), Some(1), None]);
        match &outcomes[3].1 {
            DescentOutcome::Undetermined { blocking, .. } => {
                assert_eq!(*blocking, AffineForm::new(9u64, 8u64));
            }
            other => panic!("residue 3 should be undetermined, got {other:?}"),
        }
    }

    #[test]
    fn certificates_match_the_numeric_oracle() {
        // The oracle finds the least step count at which every sampled
        // member with t >= 1 sits below itself. That is the weak-descent
        // step when one precedes full descent, otherwise the certified
        // step count, so it pins down both fields at once.
        for s in 1..=6u32 {
            for (class, outcome) in enumerate(s, default_max_steps(s as u64)) {
                if let Some(cert) = outcome.certificate() {
                    let oracle = numeric_descent_oracle(&class, 40, 1, 64);
                    assert_eq!(
                        oracle,
                        Some(cert.weak_steps.unwrap_or(cert.steps)),
                        "class {class}: oracle disagrees with certificate"
                    );
                    cert.verify_numeric(64).unwrap();
                }
            }
        }
    }

    #[test]
    fn catalog_certifies_with_expected_step_counts() {
        let report = verify_catalog(100);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn catalog_final_forms() {
        for (modulus, residue, expected_final) in [
            (32u64, 11u64, AffineForm::new(27u64, 10u64)),
            (128, 15, AffineForm::new(81u64, 10u64)),
        ] {
            let outcome = certify(&class(modulus, residue), 64);
            assert_eq!(outcome.certificate().unwrap().final_form, expected_final);
        }
    }

    #[test]
    fn certified_classes_lift_to_both_children() {
        for s in 1..=8u32 {
            for (class, outcome) in enumerate(s, default_max_steps(s as u64)) {
                let Some(cert) = outcome.certificate() else {
                    continue;
                };
                let (even, odd) = class.refine();
                for child in [even, odd] {
                    let child_outcome = certify(&child, default_max_steps(s as u64 + 1));
                    let child_cert = child_outcome
                        .certificate()
                        .unwrap_or_else(|| panic!("child {child} of {class} must certify"));
                    assert_eq!(
                        child_cert.steps, cert.steps,
                        "child {child} of {class} certified at a different step count"
                    );
                }
            }
        }
    }

    #[test]
    fn coeff_evolution_is_threes_times_twos() {
        let outcome = certify(&class(128, 7), 64);
        let cert = outcome.certificate().unwrap();
        let mut odd_steps = 0u32;
        let mut halvings = 0u32;
        for (prev, next) in cert.trace.iter().zip(cert.trace.iter().skip(1)) {
            if prev.constant.is_odd() {
                odd_steps += 1;
            } else {
                halvings += 1;
            }
            let expected = Nat::pow(3, odd_steps).checked_mul(&Nat::pow(2, 7 - halvings));
            assert_eq!(next.coeff, expected);
            assert!(halvings <= 7);
        }
    }

    #[test]
    fn refinement_frontier_resolves_undetermined_classes() {
        let leaves = refine_frontier(&class(4, 3), 3);
        // 4t+3 splits until its certifiable descendants appear; within
        // three extra bits that is 16t+3 (6 steps), 32t+11 and 32t+23
        // (8 steps each), with the rest still open.
        let mut certified: Vec<(String, u64)> = leaves
            .iter()
            .filter_map(|(c, o)| o.certificate().map(|cert| (c.to_string(), cert.steps)))
            .collect();
        certified.sort();
        assert_eq!(
            certified,
            vec![
                ("16t+3".to_string(), 6),
                ("32t+11".to_string(), 8),
                ("32t+23".to_string(), 8),
            ]
        );
    }

    #[test]
    fn weak_descent_is_reported_when_it_precedes_full_descent() {
        for s in 1..=8u32 {
            for (_, outcome) in enumerate(s, default_max_steps(s as u64)) {
                if let Some(cert) = outcome.certificate() {
                    if let Some(w) = cert.weak_steps {
                        assert!(w < cert.steps);
                        // The weak step must genuinely descend for t >= 1.
                        let form = &cert.trace[w as usize];
                        let m = &cert.class.modulus;
                        let r = &cert.class.residue;
                        let weak_holds = (form.coeff < *m
                            && form.coeff.checked_add(&form.constant) < m.checked_add(r))
                            || (form.coeff == *m && form.constant < *r);
                        assert!(weak_holds);
                    }
                }
            }
        }
    }
}
