//! Conditioning product states on passing tests, with entropy bookkeeping.

use super::bound_qext_power;
use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, mutual_information, relative_entropy_matrices};
use crate::operator::linalg::{frobenius, hermitian_part, identity, kron, partial_trace, real_scalar};
use crate::operator::spectral::sqrt_psd;
use crate::operator::{DensityMatrix, DimCap, Dims, HermitianOperator};
use crate::rng::stream;
use crate::separability::{hqext, BipartiteCut};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Success probabilities below this are treated as zero.
pub const VANISHING_PROBABILITY: f64 = 1e-14;
pub const CHAIN_TOL: f64 = 1e-9;
/// Agreement required between the two forms of the post-measurement state
/// and between the two ways of computing `p_k`.
pub const FORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PostMeasurement {
    pub p: f64,
    pub tau: DensityMatrix,
    /// `D(τ_V ‖ ρ_V)` in bits.
    pub relative_entropy: f64,
    /// `−log₂ p`.
    pub bound: f64,
    /// Frobenius distance between the `Tr_U[(T⊗I)ρ]` and Kraus forms.
    pub form_defect: f64,
    pub pass: bool,
}

/// Outcome `T` of the measurement `(T, I−T)` on the leading factors of `ρ`.
pub fn post_measurement_update(rho: &DensityMatrix, t: &HermitianOperator) -> Result<PostMeasurement> {
    t.contraction_check()?;
    let dims = rho.dims().factors();
    let u = t.dims().len();
    if dims.len() <= u || dims[..u] != *t.dims().factors() {
        return Err(Error::DimensionMismatch(format!("test on {:?} vs state on {:?}", t.dims().factors(), dims)));
    }
    let dv: usize = dims[u..].iter().product();
    let keep: Vec<usize> = (u..dims.len()).collect();
    let raw = kron(t.matrix(), &identity(dv)) * rho.matrix();
    let p = raw.trace().re;
    if p <= VANISHING_PROBABILITY {
        return Err(Error::VanishingProbability(p));
    }
    let (direct, _) = partial_trace(&raw, dims, &keep)?;
    let k = kron(&sqrt_psd(t.matrix(), 0.0)?, &identity(dv));
    let (kraus, vdims) = partial_trace(&(&k * rho.matrix() * &k), dims, &keep)?;
    let inv = real_scalar(1.0 / p);
    let direct = direct * inv;
    let kraus = hermitian_part(&(kraus * inv));
    let form_defect = frobenius(&(&direct - &kraus));
    let tau = DensityMatrix::normalize(HermitianOperator::new(kraus, Dims::new(vdims)?)?)?;
    let rho_v = rho.partial_trace(&keep)?;
    let relative_entropy = relative_entropy_matrices(tau.matrix(), rho_v.matrix())?;
    let bound = -p.log2();
    let pass = relative_entropy <= bound + CHAIN_TOL && form_defect <= FORM_TOL;
    Ok(PostMeasurement { p, tau, relative_entropy, bound, form_defect, pass })
}

/// Links of the entropy chain for the state left after passing the first `k` tests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CmiChainReport {
    pub n: usize,
    pub k: usize,
    pub p_k: f64,
    /// `Σ_j I(A_j : B_j | A_{k+1} … A_{j−1})`.
    pub cmi_sum: f64,
    /// `I(A_{k+1..n} : B_{k+1..n})`.
    pub mutual_information: f64,
    /// `D(τ(k) ‖ α_{k+1..n} ⊗ β_{k+1..n})`.
    pub relative_entropy: f64,
    /// `log₂(1/p_k)`.
    pub log_inverse_p: f64,
    pub links: [bool; 3],
    pub pass: bool,
}

fn check_test_inputs(m: &HermitianOperator, alpha: &DensityMatrix, beta: &DensityMatrix, cap: DimCap) -> Result<(usize, usize, usize)> {
    m.contraction_check()?;
    let n = alpha.dims().len();
    if beta.dims().len() != n {
        return Err(Error::DimensionMismatch(format!("{} A copies vs {} B copies", n, beta.dims().len())));
    }
    let (da, db) = (alpha.dims().factors()[0], beta.dims().factors()[0]);
    if alpha.dims().factors().iter().any(|&x| x != da) || beta.dims().factors().iter().any(|&x| x != db) {
        return Err(Error::InvalidParameter("copies must share one local dimension".into()));
    }
    if m.dims().factors() != [da, db] {
        return Err(Error::DimensionMismatch(format!("test on {:?}, locals ({da}, {db})", m.dims().factors())));
    }
    cap.check(alpha.matrix().nrows().saturating_mul(beta.matrix().nrows()))?;
    Ok((n, da, db))
}

/// Moves copies `chosen` to the front as `A_i B_i` pairs, the remaining
/// copies following as `A_rest…, B_rest…`. `r` is the number of copies.
fn pair_order(chosen: &[usize], rest: &[usize], r: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * r);
    for &i in chosen {
        order.push(i);
        order.push(r + i);
    }
    order.extend(rest.iter().copied());
    order.extend(rest.iter().map(|&i| r + i));
    order
}

/// `Σ_j I(A_j : B_j | A_<j)` for a state on `A_1..A_r B_1..B_r`.
fn cmi_sum(tau: &DensityMatrix, r: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..r {
        let prev: Vec<usize> = (0..j).collect();
        total += conditional_mutual_information(tau, &[j], &[r + j], &prev)?;
    }
    Ok(total)
}

pub fn cmi_chain_check(
    m: &HermitianOperator,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    k: usize,
    cap: DimCap,
) -> Result<CmiChainReport> {
    let (n, _, _) = check_test_inputs(m, alpha, beta, cap)?;
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let chosen: Vec<usize> = (0..k).collect();
    let rest: Vec<usize> = (k..n).collect();
    let rho = alpha.tensor(beta).permute_factors(&pair_order(&chosen, &rest, n))?;
    let post = post_measurement_update(&rho, &m.tensor_power(k))?;
    let r = n - k;
    let tau = &post.tau;
    let cmi = cmi_sum(tau, r)?;
    let a_side: Vec<usize> = (0..r).collect();
    let b_side: Vec<usize> = (r..2 * r).collect();
    let mi = mutual_information(tau, &a_side, &b_side)?;
    let reference = alpha.partial_trace(&rest)?.tensor(&beta.partial_trace(&rest)?);
    let d = relative_entropy_matrices(tau.matrix(), reference.matrix())?;
    let log_inv = -post.p.log2();
    let links = [cmi <= mi + CHAIN_TOL, mi <= d + CHAIN_TOL, d <= log_inv + CHAIN_TOL];
    Ok(CmiChainReport {
        n,
        k,
        p_k: post.p,
        cmi_sum: cmi,
        mutual_information: mi,
        relative_entropy: d,
        log_inverse_p: log_inv,
        links,
        pass: links.iter().all(|&l| l),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Copy whose pair has the least mutual information, lowest index on ties.
    GreedyMinMi,
    UniformRandom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditioningStep {
    pub k: usize,
    /// Copy measured at this step, counted from 0.
    pub index: usize,
    pub p: f64,
    /// Pass probability of the measured copy given all earlier passes.
    pub ratio: f64,
    /// `½ I(A_i : B_i)` of the measured pair before the measurement.
    pub surrogate: f64,
    /// `(1/(n−k+1)) · ½ log₂(1/p_{k−1})`.
    pub averaged_bound: f64,
    pub surrogate_ok: bool,
    /// `Σ_j I(A_j : B_j | A_<j)` over the copies still unmeasured.
    pub cmi_chain: f64,
    /// `p_k` recomputed directly from the initial state.
    pub direct_p: f64,
    /// `(1 − (1−h)²/(8 ln2 q²))^k`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditioningTrajectory {
    pub n: usize,
    pub q: usize,
    pub selection: Selection,
    pub qext_value: f64,
    pub steps: Vec<ConditioningStep>,
    /// Set when a pass probability vanished before all copies were measured.
    pub truncated: bool,
    pub final_p: f64,
    pub final_bound: f64,
    /// Largest gap between the chained and directly computed `p_k`.
    pub ratio_defect: f64,
}

impl ConditioningTrajectory {
    pub fn final_ok(&self, tol: f64) -> bool {
        self.final_p <= self.final_bound + tol
    }

    pub fn monotone(&self) -> bool {
        let mut prev = 1.0;
        self.steps.iter().all(|s| {
            let ok = s.p <= prev + FORM_TOL && s.p > 0.0;
            prev = s.p;
            ok
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,i_k,p_k,surrogate,cmi_chain,bound_k\n");
        for s in &self.steps {
            out.push_str(&format!("{},{},{},{},{},{}\n", s.k, s.index, s.p, s.surrogate, s.cmi_chain, s.bound));
        }
        out
    }
}

/// `Tr[(⊗_{i∈I} M_{A_i B_i}) α ⊗ β]` straight from the initial state.
fn direct_pass_probability(m: &HermitianOperator, alpha: &DensityMatrix, beta: &DensityMatrix, measured: &[usize]) -> Result<f64> {
    let mut idx = measured.to_vec();
    idx.sort_unstable();
    let k = idx.len();
    let marg = alpha.partial_trace(&idx)?.tensor(&beta.partial_trace(&idx)?);
    let order: Vec<usize> = (0..k).flat_map(|i| [i, k + i]).collect();
    marg.op().permute_factors(&order)?.overlap(&m.tensor_power(k))
}

/// Measures the copies one at a time, conditioning on passing each test.
pub fn recursive_conditioning_demo(
    m: &HermitianOperator,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    q: usize,
    selection: Selection,
    seed: u64,
    cap: DimCap,
) -> Result<ConditioningTrajectory> {
    let (n, _, _) = check_test_inputs(m, alpha, beta, cap)?;
    let qext_value = hqext(m, &BipartiteCut::two_party(), q, cap)?.value;
    let mut rng = stream(seed, "conditioning", 0);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut measured = Vec::new();
    let mut tau = alpha.tensor(beta);
    let mut p: f64 = 1.0;
    let mut steps = Vec::with_capacity(n);
    let mut truncated = false;
    let mut ratio_defect: f64 = 0.0;
    for k in 1..=n {
        let r = remaining.len();
        let surrogates: Vec<f64> =
            (0..r).map(|j| Ok(0.5 * mutual_information(&tau, &[j], &[r + j])?)).collect::<Result<_>>()?;
        let pos = match selection {
            Selection::GreedyMinMi => {
                let mut best = 0;
                for (j, &s) in surrogates.iter().enumerate() {
                    if s < surrogates[best] {
                        best = j;
                    }
                }
                best
            }
            Selection::UniformRandom => rng.random_range(0..r),
        };
        let local_rest: Vec<usize> = (0..r).filter(|&j| j != pos).collect();
        let arranged = tau.permute_factors(&pair_order(&[pos], &local_rest, r))?;
        let ratio = if local_rest.is_empty() {
            let ratio = arranged.op().overlap(m)?;
            (ratio > VANISHING_PROBABILITY).then_some(ratio)
        } else {
            match post_measurement_update(&arranged, m) {
                Ok(post) => {
                    tau = post.tau;
                    Some(post.p)
                }
                Err(Error::VanishingProbability(_)) => None,
                Err(e) => return Err(e),
            }
        };
        let Some(ratio) = ratio else {
            truncated = true;
            break;
        };
        let averaged_bound = 0.5 * (-p.log2()) / r as f64;
        let surrogate = surrogates[pos];
        p *= ratio;
        measured.push(remaining.remove(pos));
        let direct_p = direct_pass_probability(m, alpha, beta, &measured)?;
        ratio_defect = ratio_defect.max((direct_p - p).abs());
        let cmi_chain = if remaining.is_empty() { 0.0 } else { cmi_sum(&tau, remaining.len())? };
        steps.push(ConditioningStep {
            k,
            index: *measured.last().expect("just pushed"),
            p,
            ratio,
            surrogate,
            averaged_bound,
            surrogate_ok: surrogate <= averaged_bound + CHAIN_TOL,
            cmi_chain,
            direct_p,
            bound: bound_qext_power(qext_value.clamp(0.0, 1.0), q, k)?,
        });
        if remaining.is_empty() {
            break;
        }
    }
    let final_p = if truncated { 0.0 } else { p };
    Ok(ConditioningTrajectory {
        n,
        q,
        selection,
        qext_value,
        steps,
        truncated,
        final_p,
        final_bound: bound_qext_power(qext_value.clamp(0.0, 1.0), q, n)?,
        ratio_defect,
    })
}
