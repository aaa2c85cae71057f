//! Parallel repetition: threshold test operators, decay and concentration
//! bounds, measurement conditioning and the convex-constraint framework.

mod conditioning;
mod framework;
mod recursion;

pub use conditioning::{
    cmi_chain_check, post_measurement_update, recursive_conditioning_demo, CmiChainReport, ConditioningStep,
    ConditioningTrajectory, PostMeasurement, Selection, CHAIN_TOL,
};
pub use framework::{
    framework_decay_from_fidelity, framework_fidelity_from_decay, ConstraintFamily, DecayProfile, DecayReport,
    FidelityDecayReport, RootReport, ROOT_TOL,
};
pub use recursion::{
    recursion_hypothesis, sample_admissible_sequence, saturating_sequence, scalar_recursion_bound,
    scalar_recursion_corollary, AdmissibleSample, RecursionReport, Verdict, BOUND_TOL,
};

use crate::error::{Error, Result};
use crate::operator::linalg::{identity, kron};
use crate::operator::{CMatrix, DimCap, HermitianOperator};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// `Σ_{|I|≥t} M^{⊗I} ⊗ (I−M)^{⊗I^c}`: probability of passing at least `t` tests.
    ExactPovm,
    /// `Σ_{|I|≥t} M^{⊗I} ⊗ I^{⊗I^c}`, which over-counts outcomes.
    PrintedSum,
}

/// Test element for passing at least `t` of `n` parallel binary tests.
#[derive(Clone, Debug)]
pub struct ThresholdOperator {
    pub n: usize,
    pub t: usize,
    pub variant: ThresholdVariant,
    pub op: HermitianOperator,
}

pub fn threshold_operator(m: &HermitianOperator, n: usize, t: usize, variant: ThresholdVariant, cap: DimCap) -> Result<ThresholdOperator> {
    if t > n {
        return Err(Error::InvalidParameter(format!("threshold {t} exceeds {n} repetitions")));
    }
    let side = cap.check_power(m.side(), n)?;
    let base = m.matrix();
    let off = match variant {
        ThresholdVariant::ExactPovm => identity(m.side()) - base,
        ThresholdVariant::PrintedSum => identity(m.side()),
    };
    let mut total = CMatrix::zeros(side, side);
    for mask in 0u64..(1u64 << n) {
        if (mask.count_ones() as usize) < t {
            continue;
        }
        let mut acc = CMatrix::identity(1, 1);
        for i in 0..n {
            let f = if mask >> (n - 1 - i) & 1 == 1 { base } else { &off };
            acc = kron(&acc, f);
        }
        total += acc;
    }
    let op = HermitianOperator::new(total, m.dims().repeat(n))?;
    Ok(ThresholdOperator { n, t, variant, op })
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} = {x} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} = {x} must be positive")));
    }
    Ok(())
}

fn power(base: f64, n: usize) -> f64 {
    base.powi(n as i32)
}

/// `(1 − δ²/(5r²))^n`.
pub fn bound_hsep_power(delta: f64, r: f64, n: usize) -> Result<f64> {
    check_open_unit("delta", delta)?;
    check_positive("r", r)?;
    Ok(power(1.0 - delta * delta / (5.0 * r * r), n))
}

/// `exp(−n α²/(5r²))`.
pub fn bound_threshold(alpha: f64, r: f64, n: usize) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    check_positive("r", r)?;
    Ok((-(n as f64) * alpha * alpha / (5.0 * r * r)).exp())
}

/// `(1 − (1−h)²/(8 ln2 q²))^n` for an extendibility value `h`.
pub fn bound_qext_power(h: f64, q: usize, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::InvalidParameter(format!("extendibility value {h} outside [0, 1]")));
    }
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    let q = q as f64;
    Ok(power(1.0 - (1.0 - h).powi(2) / (8.0 * LN_2 * q * q), n))
}

/// `(1 − δ⁴/(512 ln2 d⁴))^n`.
pub fn bound_sep_dim(delta: f64, d: usize, n: usize) -> Result<f64> {
    check_open_unit("delta", delta)?;
    let d4 = (d as f64).powi(4);
    Ok(power(1.0 - delta.powi(4) / (512.0 * LN_2 * d4), n))
}

/// `(1 − α⁵/(2048 ln2 d⁴ (2δ−α)))^n`.
pub fn bound_threshold_dim(alpha: f64, delta: f64, d: usize, n: usize) -> Result<f64> {
    check_open_unit("delta", delta)?;
    if !(alpha > 0.0 && alpha <= delta) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, delta]")));
    }
    let d4 = (d as f64).powi(4);
    Ok(power(1.0 - alpha.powi(5) / (2048.0 * LN_2 * d4 * (2.0 * delta - alpha)), n))
}

/// `e^{−2n(t/n − p)²}` when `t/n > p`, else 1.
pub fn hoeffding_tail(n: usize, p: f64, t: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let gap = t as f64 / n as f64 - p;
    if gap > 0.0 {
        (-2.0 * n as f64 * gap * gap).exp()
    } else {
        1.0
    }
}

/// `Σ_{k≥t} C(n,k) p^k (1−p)^{n−k}` in exact arithmetic.
pub fn binomial_tail(n: usize, p: &BigRational, t: usize) -> BigRational {
    let one = BigRational::one();
    let q = &one - p;
    let mut total = BigRational::zero();
    let mut coeff = BigInt::one();
    for k in 0..=n {
        if k >= t {
            let term = BigRational::from_integer(coeff.clone()) * pow(p, k) * pow(&q, n - k);
            total += term;
        }
        coeff = coeff * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    total
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Exact binary expansion of a float as a rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// [`binomial_tail`] for a float probability, rounded back to a float.
pub fn binomial_tail_f64(n: usize, p: f64, t: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(rational_to_f64(&binomial_tail(n, &rational_from_f64(p)?, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::random_contraction;
    use crate::operator::symmetric::permutation_twirl;
    use crate::operator::Dims;
    use crate::rng::stream;

    #[test]
    fn threshold_extremes() {
        let m = random_contraction(Dims::single(2), &mut stream(3, "t", 0)).unwrap();
        let full = threshold_operator(&m, 3, 3, ThresholdVariant::ExactPovm, DimCap::default()).unwrap();
        assert!((full.op.matrix() - m.tensor_power(3).matrix()).norm() < 1e-10);
        let none = threshold_operator(&m, 3, 0, ThresholdVariant::ExactPovm, DimCap::default()).unwrap();
        assert!((none.op.matrix() - identity(8)).norm() < 1e-10);
    }

    #[test]
    fn printed_sum_overcounts_identity() {
        let id = HermitianOperator::identity(Dims::single(2));
        let printed = threshold_operator(&id, 2, 1, ThresholdVariant::PrintedSum, DimCap::default()).unwrap();
        assert!((printed.op.matrix() - identity(4) * crate::operator::linalg::real_scalar(3.0)).norm() < 1e-12);
        let exact = threshold_operator(&id, 2, 1, ThresholdVariant::ExactPovm, DimCap::default()).unwrap();
        assert!((exact.op.matrix() - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn exact_threshold_is_povm_and_invariant() {
        for seed in 0..5 {
            let m = random_contraction(Dims::uniform(2, 2), &mut stream(seed, "t", 1)).unwrap();
            for t in 0..=2 {
                let exact = threshold_operator(&m, 2, t, ThresholdVariant::ExactPovm, DimCap::default()).unwrap();
                assert!(exact.op.min_eigenvalue().unwrap() > -1e-10);
                assert!(exact.op.max_eigenvalue().unwrap() < 1.0 + 1e-10);
                let twirled = permutation_twirl(&exact.op, 2).unwrap();
                assert!((twirled.matrix() - exact.op.matrix()).norm() < 1e-10);
                let printed = threshold_operator(&m, 2, t, ThresholdVariant::PrintedSum, DimCap::default()).unwrap();
                assert!(printed.op.sub(&exact.op).unwrap().min_eigenvalue().unwrap() > -1e-10);
            }
        }
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_hsep_power(0.5, 1.0, 10).unwrap(), 0.95f64.powi(10));
        assert!((bound_hsep_power(0.5, 1.0, 10).unwrap() - 0.598_736_939_238_378_9).abs() < 1e-15);
        assert!((bound_threshold(0.5, 1.0, 10).unwrap() - 0.606_530_659_712_633).abs() < 1e-14);
        assert_eq!(bound_hsep_power(0.5, 1.0, 0).unwrap(), 1.0);
        assert_eq!(bound_threshold(0.5, 1.0, 0).unwrap(), 1.0);
        assert_eq!(bound_qext_power(1.0, 3, 7).unwrap(), 1.0);
        let v = bound_sep_dim(0.5, 2, 1).unwrap();
        assert!((v - (1.0 - 0.0625 / (512.0 * LN_2 * 16.0))).abs() < 1e-16);
        for n in 1..20 {
            assert!(bound_sep_dim(0.5, 2, n + 1).unwrap() < bound_sep_dim(0.5, 2, n).unwrap());
            assert!(bound_threshold_dim(0.3, 0.5, 2, n + 1).unwrap() < bound_threshold_dim(0.3, 0.5, 2, n).unwrap());
        }
        assert!(bound_hsep_power(1.5, 1.0, 2).is_err());
        assert!(bound_threshold_dim(0.6, 0.5, 2, 2).is_err());
    }

    #[test]
    fn binomial_tails() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(binomial_tail(2, &half, 2), BigRational::new(1.into(), 4.into()));
        assert_eq!(binomial_tail(7, &half, 0), BigRational::one());
        for n in 1..=12usize {
            for pi in 1..=9 {
                let p = pi as f64 / 10.0;
                for t in 0..=n {
                    if t as f64 > n as f64 * p {
                        assert!(binomial_tail_f64(n, p, t).unwrap() <= hoeffding_tail(n, p, t) + 1e-15);
                    }
                }
            }
        }
    }
}
