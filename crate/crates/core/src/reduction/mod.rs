//! Exact checks of constrained de Finetti operator inequalities.
//!
//! Each check forms a left-hand operator, the exact right-hand integral and
//! the combinatorial prefactor, then inspects the smallest eigenvalue of
//! `prefactor · rhs − lhs`.

mod moment;

pub use moment::{
    check_symmetric_unit, constrained_moment, moment_of_operator, monte_carlo_moment_check, pure_power_sandwich,
    MonteCarloCheck,
};

use crate::error::{Error, Result};
use crate::info::{fidelity, fidelity_matrices, ClassicalDistribution};
use crate::operator::linalg::{digits, from_digits, partial_trace, real_scalar};
use crate::operator::random::{haar_pure, induced_mixed, symmetric_pure, tensor_power_vector};
use crate::operator::symmetric::{binomial, multisets, occupation_basis, permutation_twirl};
use crate::operator::{apply_channel, CMatrix, CVector, DensityMatrix, DimCap, Dims, HermitianOperator, KrausChannel};
use crate::rng::stream;
use moment::psd_gap;
use num_bigint::BigUint;
use serde::Serialize;
use std::collections::BTreeMap;

/// Default tolerance on the minimum eigenvalue of a gap operator.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;
/// Tolerance on pointwise sampled inequalities.
pub const SAMPLE_TOL: f64 = 1e-9;
/// Tolerance on channel preconditions.
pub const PRECONDITION_TOL: f64 = 1e-8;

/// Outcome of one operator-inequality check `lhs ⪯ prefactor · rhs`.
#[derive(Clone, Debug)]
pub struct ReductionCheck {
    pub lhs: HermitianOperator,
    pub rhs: HermitianOperator,
    pub gap_min_eig: f64,
    pub prefactor: BigUint,
    pub tolerance: f64,
    pub pass: bool,
    pub params: BTreeMap<String, u64>,
}

impl ReductionCheck {
    fn build(
        lhs: HermitianOperator,
        rhs: HermitianOperator,
        prefactor: BigUint,
        tolerance: f64,
        params: BTreeMap<String, u64>,
    ) -> Result<Self> {
        let gap_min_eig = psd_gap(lhs.matrix(), rhs.matrix(), biguint_to_f64(&prefactor))?;
        Ok(Self { pass: gap_min_eig >= -tolerance, lhs, rhs, gap_min_eig, prefactor, tolerance, params })
    }

    pub fn prefactor_f64(&self) -> f64 {
        biguint_to_f64(&self.prefactor)
    }

    pub fn summary(&self) -> CheckSummary {
        CheckSummary {
            params: self.params.clone(),
            prefactor: self.prefactor.to_string(),
            gap_min_eig: self.gap_min_eig,
            tolerance: self.tolerance,
            pass: self.pass,
        }
    }
}

/// Serializable digest of a [`ReductionCheck`].
#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub params: BTreeMap<String, u64>,
    pub prefactor: String,
    pub gap_min_eig: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().expect("decimal digits")
}

fn params(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `binom(n+d-1, n)^3`.
pub fn pure_prefactor(n: usize, d: usize) -> BigUint {
    BigUint::from(binomial(n + d - 1, n)).pow(3)
}

/// `(n+1)^{3d²}`, the looser polynomial form of the mixed prefactor.
pub fn power_prefactor(n: usize, d: usize) -> BigUint {
    BigUint::from(n as u64 + 1).pow((3 * d * d) as u32)
}

/// `r Σ M_i ρ M_i† − Σ_{ij} M_i ρ M_j† ⪰ 0`.
pub fn check_pinching(ops: &[CMatrix], rho: &DensityMatrix, tolerance: f64) -> Result<ReductionCheck> {
    let n = rho.matrix().nrows();
    if ops.is_empty() {
        return Err(Error::InvalidParameter("no operators".into()));
    }
    if ops.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::DimensionMismatch("pinching operators must match the state".into()));
    }
    let r = ops.len();
    let total: CMatrix = ops.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m);
    let lhs = &total * rho.matrix() * total.adjoint();
    let diag = ops.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m * rho.matrix() * m.adjoint());
    let dims = rho.dims().clone();
    ReductionCheck::build(
        HermitianOperator::from_parts(lhs, dims.clone()),
        HermitianOperator::from_parts(diag, dims),
        BigUint::from(r),
        tolerance,
        params(&[("r", r as u64), ("dim", n as u64)]),
    )
}

/// `|θ><θ| ⪯ binom(n+d-1,n)^3 ∫ |<θ|ψ^{⊗n}>|² |ψ><ψ|^{⊗n} dψ`.
pub fn check_pure_reduction(theta: &CVector, n: usize, d: usize, cap: DimCap, tolerance: f64) -> Result<ReductionCheck> {
    let rhs = constrained_moment(theta, n, d, cap)?;
    let lhs = HermitianOperator::projector(theta, Dims::uniform(d, n))?;
    ReductionCheck::build(lhs, rhs, pure_prefactor(n, d), tolerance, params(&[("n", n as u64), ("d", d as u64)]))
}

/// Result of the mixed-state reduction check.
#[derive(Clone, Debug)]
pub struct MixedReductionReport {
    pub check: ReductionCheck,
    pub rho: DensityMatrix,
    /// Smallest `F(ρ, σ(ψ)^{⊗n}) − |<θ|ψ^{⊗n}>|` over the samples.
    pub domination_min_margin: f64,
    pub domination_samples: usize,
    pub domination_pass: bool,
    /// `‖twirl(ρ) − ρ‖_F`.
    pub twirl_defect: f64,
    pub power_prefactor: BigUint,
}

impl MixedReductionReport {
    pub fn pass(&self) -> bool {
        self.check.pass && self.domination_pass
    }
}

/// Factor indices of the `H` parts when each copy is `H ⊗ H'`.
fn system_factors(n: usize) -> Vec<usize> {
    (0..n).map(|i| 2 * i).collect()
}

/// Draws a symmetric pure `θ` on `(H ⊗ H')^{⊗n}`, sets `ρ = Tr_{H'} |θ><θ|`
/// and checks `ρ ⪯ binom(n+d²-1,n)^3 Tr_{H'}[∫ |<θ|ψ^{⊗n}>|² |ψ><ψ|^{⊗n}]`,
/// plus the pointwise step `|<θ|ψ^{⊗n}>| ≤ F(ρ, σ(ψ)^{⊗n})`.
pub fn check_mixed_reduction(
    n: usize,
    d: usize,
    seed: u64,
    samples: usize,
    cap: DimCap,
    tolerance: f64,
) -> Result<MixedReductionReport> {
    let dd = d * d;
    cap.check_power(dd, 2 * n)?;
    let mut rng = stream(seed, "mixed-reduction", 0);
    let theta = symmetric_pure(n, dd, &mut rng)?;
    check_mixed_reduction_for(&theta, n, d, seed, samples, cap, tolerance)
}

/// As [`check_mixed_reduction`] for a caller-supplied symmetric `θ` on
/// `(C^{d²})^{⊗n}` whose copies are ordered `H ⊗ H'`.
pub fn check_mixed_reduction_for(
    theta: &CVector,
    n: usize,
    d: usize,
    seed: u64,
    samples: usize,
    cap: DimCap,
    tolerance: f64,
) -> Result<MixedReductionReport> {
    let dd = d * d;
    let moment = constrained_moment(theta, n, dd, cap)?;
    let pair_dims = vec![d; 2 * n];
    let keep = system_factors(n);
    let (rho_m, _) = partial_trace(&(theta * theta.adjoint()), &pair_dims, &keep)?;
    let (rhs_m, _) = partial_trace(moment.matrix(), &pair_dims, &keep)?;
    let dims = Dims::uniform(d, n);
    let rho = DensityMatrix::new(HermitianOperator::from_parts(rho_m, dims.clone()))?;
    let rhs = HermitianOperator::from_parts(rhs_m, dims);
    let check = ReductionCheck::build(
        rho.op().clone(),
        rhs,
        pure_prefactor(n, dd),
        tolerance,
        params(&[("n", n as u64), ("d", d as u64), ("seed", seed)]),
    )?;

    let mut rng = stream(seed, "mixed-domination", 0);
    let mut min_margin = f64::INFINITY;
    for _ in 0..samples {
        let psi = haar_pure(dd, &mut rng);
        let lhs = theta.dotc(&tensor_power_vector(&psi, n)).norm();
        let (sigma, _) = partial_trace(&(&psi * psi.adjoint()), &[d, d], &[0])?;
        let sigma_n = DensityMatrix::new(HermitianOperator::from_parts(sigma, Dims::single(d)))?.tensor_power(n);
        min_margin = min_margin.min(fidelity(&rho, &sigma_n)? - lhs);
    }
    let twirl = permutation_twirl(rho.op(), n)?;
    let twirl_defect = (twirl.matrix() - rho.matrix()).norm();
    Ok(MixedReductionReport {
        check,
        rho,
        domination_min_margin: if samples == 0 { 0.0 } else { min_margin },
        domination_samples: samples,
        domination_pass: samples == 0 || min_margin >= -SAMPLE_TOL,
        twirl_defect,
        power_prefactor: power_prefactor(n, d),
    })
}

/// Sampled pointwise comparison report.
#[derive(Clone, Debug, Serialize)]
pub struct SampledReport {
    pub samples: usize,
    /// Smallest `rhs − lhs` over the samples.
    pub min_margin: f64,
    pub pass: bool,
    /// Fraction of samples with `F(τ0, N(σ)) ≥ 1 − δ`, when a `δ` is given.
    pub mass_inside: Option<f64>,
    pub mass_outside: Option<f64>,
}

fn channel_power_apply(ch: &KrausChannel, n: usize, x: &CMatrix) -> Result<CMatrix> {
    ch.tensor_power(n).apply_matrix(x)
}

/// For `σ` from the induced measure, checks
/// `F(ρ, σ^{⊗n})² ≤ F(τ0, N(σ))^{2n}` given `N^{⊗n}(ρ) = τ0^{⊗n}`.
pub fn check_integrand_domination(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    tau0: &DensityMatrix,
    n: usize,
    samples: usize,
    delta: Option<f64>,
    seed: u64,
) -> Result<SampledReport> {
    let image = channel_power_apply(ch, n, rho.matrix())?;
    let target = tau0.tensor_power(n);
    let defect = (image - target.matrix()).norm();
    if defect > PRECONDITION_TOL {
        return Err(Error::Precondition(format!("N^n(ρ) differs from τ0^n by {defect:e}")));
    }
    let mut rng = stream(seed, "integrand-domination", 0);
    let mut min_margin = f64::INFINITY;
    let mut inside = 0usize;
    for _ in 0..samples {
        let sigma = induced_mixed(ch.in_dims().clone(), &mut rng);
        let lhs = fidelity(rho, &sigma.tensor_power(n))?.powi(2);
        let f_single = fidelity_matrices(tau0.matrix(), &ch.apply_matrix(sigma.matrix())?)?;
        min_margin = min_margin.min(f_single.powi(2 * n as i32) - lhs);
        if delta.is_some_and(|dl| f_single >= 1.0 - dl) {
            inside += 1;
        }
    }
    let frac = |c: usize| if samples == 0 { 0.0 } else { c as f64 / samples as f64 };
    Ok(SampledReport {
        samples,
        min_margin,
        pass: min_margin >= -SAMPLE_TOL,
        mass_inside: delta.map(|_| frac(inside)),
        mass_outside: delta.map(|_| frac(samples - inside)),
    })
}

/// For `σ` from the induced measure, checks
/// `F(ρ, N(σ)^{⊗n}) ≥ F(ρ, σ^{⊗n})` given `N^{⊗n}(ρ) = ρ`.
pub fn check_fixed_point_reduction(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<SampledReport> {
    let image = channel_power_apply(ch, n, rho.matrix())?;
    let defect = (image - rho.matrix()).norm();
    if defect > PRECONDITION_TOL {
        return Err(Error::Precondition(format!("N^n(ρ) differs from ρ by {defect:e}")));
    }
    let mut rng = stream(seed, "fixed-point", 0);
    let mut min_margin = f64::INFINITY;
    for _ in 0..samples {
        let sigma = induced_mixed(ch.in_dims().clone(), &mut rng);
        let image = apply_channel(ch, &sigma)?;
        let margin = fidelity(rho, &image.tensor_power(n))? - fidelity(rho, &sigma.tensor_power(n))?;
        min_margin = min_margin.min(margin);
    }
    Ok(SampledReport { samples, min_margin, pass: min_margin >= -SAMPLE_TOL, mass_inside: None, mass_outside: None })
}

/// Per-string outcome of the classical reduction.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalPoint {
    pub string: Vec<usize>,
    pub probability: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalReport {
    pub points: Vec<ClassicalPoint>,
    /// Smallest `bound − probability`.
    pub min_slack: f64,
    pub pass: bool,
    pub prefactor: String,
    pub power_prefactor: String,
}

/// Checks `P(x) ≤ binom(n+d²-1,n)^3 · diag(N^{⊗n}(R))(x)` for every string,
/// where `R` is the mixed-reduction integral for the purification
/// `Σ_x √P(x) |x>_H |x>_{H'}` and `N` is the dephasing channel.
pub fn check_classical_reduction(
    p: &ClassicalDistribution,
    n: usize,
    d: usize,
    cap: DimCap,
    tolerance: f64,
) -> Result<ClassicalReport> {
    let dd = d * d;
    cap.check_power(dd, 2 * n)?;
    let dims = vec![d; n];
    let total = d.pow(n as u32);
    if p.weights().len() != total {
        return Err(Error::DimensionMismatch(format!("{} weights for {d}^{n} strings", p.weights().len())));
    }
    if !p.is_normalized() {
        return Err(Error::InvalidTrace(p.total()));
    }
    for (x, &w) in p.weights().iter().enumerate() {
        let mut s = digits(x, &dims);
        s.sort_unstable();
        let asym = (w - p.weights()[from_digits(&s, &dims)]).abs();
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
    }
    let pair_dims = vec![dd; n];
    let mut theta = CVector::zeros(dd.pow(n as u32));
    for (x, &w) in p.weights().iter().enumerate() {
        let paired: Vec<usize> = digits(x, &dims).iter().map(|&xi| xi * d + xi).collect();
        theta[from_digits(&paired, &pair_dims)] = real_scalar(w.sqrt());
    }
    let moment = constrained_moment(&theta, n, dd, cap)?;
    let (reduced, _) = partial_trace(moment.matrix(), &vec![d; 2 * n], &system_factors(n))?;
    let dephased = KrausChannel::qc_dephasing(d).tensor_power(n).apply_matrix(&reduced)?;
    let prefactor = pure_prefactor(n, dd);
    let scale = biguint_to_f64(&prefactor);
    let mut points = Vec::with_capacity(total);
    let mut min_slack = f64::INFINITY;
    for (x, &w) in p.weights().iter().enumerate() {
        let bound = scale * dephased[(x, x)].re;
        min_slack = min_slack.min(bound - w);
        points.push(ClassicalPoint { string: digits(x, &dims), probability: w, bound });
    }
    Ok(ClassicalReport {
        points,
        min_slack,
        pass: min_slack >= -tolerance,
        prefactor: prefactor.to_string(),
        power_prefactor: power_prefactor(n, d).to_string(),
    })
}

/// `Σ_{q=0}^k binom(n+k,q) · binom(n+d-1,n)^3`.
pub fn truncated_prefactor(n: usize, k: usize, d: usize) -> BigUint {
    let subsets: u128 = (0..=k).map(|q| binomial(n + k, q)).sum();
    BigUint::from(subsets) * pure_prefactor(n, d)
}

fn check_truncated_dims(n: usize, k: usize, d: usize, big_d: usize, cap: DimCap) -> Result<()> {
    if d == 0 || d >= big_d {
        return Err(Error::InvalidParameter(format!("need 0 < d < D, got d={d}, D={big_d}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    cap.check_power(big_d, n + k).map(|_| ())
}

/// Random unit vector of `Sym^{n+k}(C^d, C^D)`: symmetric vectors on
/// `(C^D)^{⊗(n+k)}` whose basis strings have at least `n` letters below `d`.
pub fn truncated_symmetric_pure(
    n: usize,
    k: usize,
    d: usize,
    big_d: usize,
    rng: &mut crate::rng::StreamRng,
) -> Result<CVector> {
    let len = n + k;
    let allowed: Vec<_> = occupation_basis(len, big_d)
        .into_iter()
        .zip(multisets(len, big_d))
        .filter(|(_, ms)| ms.iter().filter(|&&j| j < d).count() >= n)
        .map(|(e, _)| e)
        .collect();
    let coeffs = haar_pure(allowed.len(), rng);
    let mut theta = CVector::zeros(big_d.pow(len as u32));
    for (e, c) in allowed.iter().zip(coeffs.iter()) {
        for &i in &e.indices {
            theta[i] += c * e.amplitude;
        }
    }
    Ok(theta)
}

/// The subset term `∫ (1_⊥^{I^c} ⊗ |x><x|^{⊗I}) |θ><θ| (1_⊥^{I^c} ⊗ |x><x|^{⊗I}) dx`
/// embedded in `(C^D)^{⊗(n+k)}`.
fn truncated_subset_term(theta: &CVector, subset: &[usize], len: usize, d: usize, big_d: usize) -> Result<CMatrix> {
    let m = subset.len();
    let comp: Vec<usize> = (0..len).filter(|i| !subset.contains(i)).collect();
    let perp = big_d - d;
    let restricted_dims: Vec<usize> = std::iter::repeat_n(d, m).chain(std::iter::repeat_n(perp, len - m)).collect();
    let restricted_len: usize = restricted_dims.iter().product();
    let full_dims = vec![big_d; len];
    let mut embed = Vec::with_capacity(restricted_len);
    let mut local = CVector::zeros(restricted_len);
    for r in 0..restricted_len {
        let rd = digits(r, &restricted_dims);
        let mut full = vec![0; len];
        for (slot, &pos) in subset.iter().enumerate() {
            full[pos] = rd[slot];
        }
        for (slot, &pos) in comp.iter().enumerate() {
            full[pos] = d + rd[m + slot];
        }
        let idx = from_digits(&full, &full_dims);
        embed.push(idx);
        local[r] = theta[idx];
    }
    let k_dim = perp.pow((len - m) as u32);
    let term = pure_power_sandwich(&(&local * local.adjoint()), m, d, k_dim)?;
    let mut out = CMatrix::zeros(theta.len(), theta.len());
    for (a, &ia) in embed.iter().enumerate() {
        for (b, &ib) in embed.iter().enumerate() {
            out[(ia, ib)] = term[(a, b)];
        }
    }
    Ok(out)
}

/// Checks `|θ><θ| ⪯ [Σ_q binom(n+k,q) binom(n+d-1,n)^3] Σ_{|I|≥n} Term_I`
/// for a caller-supplied `θ ∈ Sym^{n+k}(C^d, C^D)`.
pub fn check_truncated_ambient_for(
    theta: &CVector,
    n: usize,
    k: usize,
    d: usize,
    big_d: usize,
    cap: DimCap,
    tolerance: f64,
) -> Result<ReductionCheck> {
    check_truncated_dims(n, k, d, big_d, cap)?;
    let len = n + k;
    check_symmetric_unit(theta, len, big_d)?;
    let side = theta.len();
    let mut rhs = CMatrix::zeros(side, side);
    for m in n..=len {
        for subset in itertools::Itertools::combinations(0..len, m) {
            rhs += truncated_subset_term(theta, &subset, len, d, big_d)?;
        }
    }
    let dims = Dims::uniform(big_d, len);
    ReductionCheck::build(
        HermitianOperator::projector(theta, dims.clone())?,
        HermitianOperator::from_parts(rhs, dims),
        truncated_prefactor(n, k, d),
        tolerance,
        params(&[("n", n as u64), ("k", k as u64), ("d", d as u64), ("D", big_d as u64)]),
    )
}

pub fn check_truncated_ambient_reduction(
    n: usize,
    k: usize,
    d: usize,
    big_d: usize,
    seed: u64,
    cap: DimCap,
    tolerance: f64,
) -> Result<ReductionCheck> {
    check_truncated_dims(n, k, d, big_d, cap)?;
    let mut rng = stream(seed, "truncated-ambient", 0);
    let theta = truncated_symmetric_pure(n, k, d, big_d, &mut rng)?;
    let mut check = check_truncated_ambient_for(&theta, n, k, d, big_d, cap, tolerance)?;
    check.params.insert("seed".into(), seed);
    Ok(check)
}

/// Embeds a vector of `(C^d)^{⊗n}` into `(C^D)^{⊗n}`.
pub fn embed_in_ambient(v: &CVector, n: usize, d: usize, big_d: usize) -> CVector {
    let mut out = CVector::zeros(big_d.pow(n as u32));
    let small = vec![d; n];
    let large = vec![big_d; n];
    for (i, z) in v.iter().enumerate() {
        out[from_digits(&digits(i, &small), &large)] = *z;
    }
    out
}
