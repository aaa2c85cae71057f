//! Fidelities, distances, entropies and measured distances.
//!
//! Entropies are in bits. Eigenvalues of PSD inputs that fall below zero by
//! less than the spectral tolerance are clipped to zero.

use crate::error::{Error, Result};
use crate::operator::linalg::{kron_vec, real_scalar};
use crate::operator::spectral::{eigh, spectral_tolerance, sqrt_psd, trace_norm, trace_norm_hermitian};
use crate::operator::{CMatrix, CVector, DensityMatrix, Dims, HermitianOperator};
use serde::{Deserialize, Serialize};

/// Eigenvalues below this are treated as outside the support.
pub const SUPPORT_FLOOR: f64 = 1e-12;

fn same_side(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!("sides {} and {}", a.nrows(), b.nrows())));
    }
    Ok(())
}

/// `‖√a √b‖₁` for PSD matrices of any trace.
pub fn fidelity_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    same_side(a, b)?;
    let sa = sqrt_psd(a, spectral_tolerance(a))?;
    let sb = sqrt_psd(b, spectral_tolerance(b))?;
    Ok(trace_norm(&(sa * sb)))
}

/// Root fidelity `‖√ρ √σ‖₁`; sub-normalized inputs are allowed.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

/// `|<ψ|φ>|`-style fidelity between a pure state and a density operator:
/// `sqrt(<ψ|σ|ψ>)`.
pub fn fidelity_pure(psi: &CVector, sigma: &CMatrix) -> f64 {
    psi.dotc(&(sigma * psi)).re.max(0.0).sqrt()
}

pub fn trace_distance_matrices(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    same_side(a, b)?;
    Ok(0.5 * trace_norm_hermitian(&(a - b))?)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(rho.matrix(), sigma.matrix())
}

/// `‖ρ − σ‖₂`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_side(rho.matrix(), sigma.matrix())?;
    Ok((rho.matrix() - sigma.matrix()).norm())
}

fn clipped_spectrum(m: &CMatrix) -> Result<Vec<f64>> {
    let e = eigh(m)?;
    let tol = spectral_tolerance(m);
    if e.min() < -tol {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(e.values.into_iter().map(|v| v.max(0.0)).collect())
}

/// `−Σ λ log₂ λ` of a list of nonnegative weights.
pub fn shannon(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&w| w > 0.0).map(|&w| w * w.log2()).sum::<f64>()
}

pub fn entropy_matrix(m: &CMatrix) -> Result<f64> {
    Ok(shannon(&clipped_spectrum(m)?))
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_matrix(rho.matrix())
}

/// `Tr ρ (log₂ ρ − log₂ σ)`, or `+∞` when the support of ρ is not inside
/// the support of σ.
pub fn relative_entropy_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    same_side(rho, sigma)?;
    let er = eigh(rho)?;
    let es = eigh(sigma)?;
    let tol_r = spectral_tolerance(rho);
    let tol_s = spectral_tolerance(sigma);
    if er.min() < -tol_r {
        return Err(Error::NotPsd(er.min()));
    }
    if es.min() < -tol_s {
        return Err(Error::NotPsd(es.min()));
    }
    let floor = SUPPORT_FLOOR.max(tol_s);
    let mut value = 0.0;
    for (i, &lr) in er.values.iter().enumerate() {
        if lr <= SUPPORT_FLOOR {
            continue;
        }
        let vi = er.vectors.column(i);
        let mut cross = 0.0;
        for (j, &ls) in es.values.iter().enumerate() {
            let overlap = vi.dotc(&es.vectors.column(j)).norm_sqr();
            if overlap * lr <= 1e-14 {
                continue;
            }
            if ls <= floor {
                return Ok(f64::INFINITY);
            }
            cross += overlap * ls.log2();
        }
        value += lr * lr.log2() - lr * cross;
    }
    Ok(value)
}

pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    relative_entropy_matrices(rho.matrix(), sigma.matrix())
}

fn entropy_of(rho: &DensityMatrix, keep: &[usize]) -> Result<f64> {
    if keep.is_empty() {
        return Ok(0.0);
    }
    entropy(&rho.partial_trace(keep)?)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// `I(A:B) = S(A) + S(B) − S(AB)` for factor groups `a` and `b`.
pub fn mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(entropy_of(rho, a)? + entropy_of(rho, b)? - entropy_of(rho, &union(a, b))?)
}

/// `I(A:B|C) = S(AC) + S(BC) − S(C) − S(ABC)`.
pub fn conditional_mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    Ok(entropy_of(rho, &ac)? + entropy_of(rho, &bc)? - entropy_of(rho, c)? - entropy_of(rho, &abc)?)
}

/// Purification on `H ⊗ H'` with `|H'| = |H|`: `Σ_k √λ_k |v_k>|k>` with
/// eigenvalues in descending order, so a pure input maps to `|v>|0>`.
pub fn purify(rho: &DensityMatrix) -> Result<CVector> {
    let d = rho.matrix().nrows();
    let e = eigh(rho.matrix())?;
    let mut psi = CVector::zeros(d * d);
    for k in 0..d {
        let idx = d - 1 - k;
        let lambda = e.values[idx].max(0.0);
        if lambda == 0.0 {
            continue;
        }
        let v = e.vector(idx);
        let v = crate::operator::spectral::fix_phase(v);
        let mut ket = CVector::zeros(d);
        ket[k] = real_scalar(1.0);
        psi += kron_vec(&v, &ket) * real_scalar(lambda.sqrt());
    }
    Ok(psi)
}

/// Probability weights over a finite alphabet; sub-normalized when flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassicalDistribution {
    weights: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidTrace(total));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= 1e-12
    }

    /// `Σ √(p q)`.
    pub fn fidelity(&self, other: &ClassicalDistribution) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(p, q)| (p * q).sqrt()).sum()
    }

    /// `½ Σ |p − q|`.
    pub fn trace_distance(&self, other: &ClassicalDistribution) -> f64 {
        0.5 * self.weights.iter().zip(&other.weights).map(|(p, q)| (p - q).abs()).sum::<f64>()
    }
}

/// Finite POVM with one label per element.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidParameter("empty POVM".into()))?;
        if labels.len() != elements.len() {
            return Err(Error::InvalidParameter("one label per element required".into()));
        }
        let n = first.side();
        let mut sum = CMatrix::zeros(n, n);
        for e in &elements {
            if e.side() != n {
                return Err(Error::DimensionMismatch("POVM elements of different sizes".into()));
            }
            let min = e.min_eigenvalue()?;
            if min < -spectral_tolerance(e.matrix()) {
                return Err(Error::NotPsd(min));
            }
            sum += e.matrix();
        }
        let defect = (sum - CMatrix::identity(n, n)).norm();
        if defect > 1e-10 {
            return Err(Error::InvalidTrace(defect));
        }
        Ok(Self { elements, labels })
    }

    pub fn unlabeled(elements: Vec<HermitianOperator>) -> Result<Self> {
        let labels = (0..elements.len()).map(|i| i.to_string()).collect();
        Self::new(elements, labels)
    }

    /// `{I}`.
    pub fn trivial(dims: Dims) -> Self {
        Self { elements: vec![HermitianOperator::identity(dims)], labels: vec!["I".into()] }
    }

    pub fn computational_basis(dims: Dims) -> Self {
        let n = dims.total();
        let elements = (0..n)
            .map(|x| {
                let mut d = vec![0.0; n];
                d[x] = 1.0;
                HermitianOperator::from_real_diagonal(&d, dims.clone()).expect("diagonal")
            })
            .collect();
        Self { elements, labels: (0..n).map(|x| x.to_string()).collect() }
    }

    /// Single-qubit Pauli tomography: `{(I ± P)/6}` for `P ∈ {X, Y, Z}`.
    pub fn pauli_tomography() -> Self {
        let i = num_complex::Complex64::i();
        let one = real_scalar(1.0);
        let zero = real_scalar(0.0);
        let paulis = [
            ("X", CMatrix::from_row_slice(2, 2, &[zero, one, one, zero])),
            ("Y", CMatrix::from_row_slice(2, 2, &[zero, -i, i, zero])),
            ("Z", CMatrix::from_row_slice(2, 2, &[one, zero, zero, -one])),
        ];
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for (name, p) in paulis {
            for (sign, s) in [("+", 1.0), ("-", -1.0)] {
                let m = (CMatrix::identity(2, 2) + p.clone() * real_scalar(s)) / real_scalar(6.0);
                elements.push(HermitianOperator::new(m, Dims::single(2)).expect("Hermitian"));
                labels.push(format!("{sign}{name}"));
            }
        }
        Self { elements, labels }
    }

    /// Product POVM `{E_i ⊗ F_j}`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for (a, la) in self.elements.iter().zip(&self.labels) {
            for (b, lb) in other.elements.iter().zip(&other.labels) {
                elements.push(a.tensor(b));
                labels.push(format!("{la}|{lb}"));
            }
        }
        Povm { elements, labels }
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `p_i = Tr(E_i ρ)`, clipped at zero.
    pub fn outcome_probabilities(&self, rho: &CMatrix) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| {
                same_side(e.matrix(), rho)?;
                Ok(crate::operator::linalg::trace_product(e.matrix(), rho).re.max(0.0))
            })
            .collect()
    }

    pub fn distribution(&self, rho: &DensityMatrix) -> Result<ClassicalDistribution> {
        let mut w = self.outcome_probabilities(rho.matrix())?;
        let total: f64 = w.iter().sum();
        if total > 1.0 {
            w.iter_mut().for_each(|x| *x /= total);
        }
        ClassicalDistribution::new(w)
    }
}

/// Largest classical trace distance of outcome distributions over the family.
pub fn measured_trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix, family: &[Povm]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty POVM family".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for m in family {
        best = best.max(m.distribution(rho)?.trace_distance(&m.distribution(sigma)?));
    }
    Ok(best)
}

/// Smallest classical fidelity of outcome distributions over the family.
pub fn measured_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix, family: &[Povm]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty POVM family".into()));
    }
    let mut best = f64::INFINITY;
    for m in family {
        best = best.min(m.distribution(rho)?.fidelity(&m.distribution(sigma)?));
    }
    Ok(best)
}
