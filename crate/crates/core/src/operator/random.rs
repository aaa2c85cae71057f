//! Seeded random states, operators and channels.

use super::linalg::{kron_vec, partial_trace, projector, real_scalar};
use super::symmetric::project_symmetric;
use super::{CMatrix, CVector, DensityMatrix, Dims, HermitianOperator, KrausChannel};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Attempts made before a vanishing symmetric projection is reported.
pub const SYMMETRIC_RETRIES: usize = 16;

fn gaussian(rng: &mut StreamRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut StreamRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly distributed unit vector (a column of a Haar unitary).
pub fn haar_pure(dim: usize, rng: &mut StreamRng) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        if n > 1e-300 {
            return v / real_scalar(n);
        }
    }
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the
/// phases of `R`'s diagonal removed.
pub fn haar_unitary(dim: usize, rng: &mut StreamRng) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Partial trace of a Haar pure state on `H ⊗ H'` with `|H'| = |H|`.
pub fn induced_mixed(dims: Dims, rng: &mut StreamRng) -> DensityMatrix {
    let d = dims.total();
    let psi = haar_pure(d * d, rng);
    let (rho, _) = partial_trace(&projector(&psi), &[d, d], &[0]).expect("valid factors");
    DensityMatrix::from_parts(HermitianOperator::from_parts(rho, dims), true)
}

/// Normalized projection of a Haar vector of `(C^d)^{⊗n}` onto `Sym^n`.
pub fn symmetric_pure(n: usize, d: usize, rng: &mut StreamRng) -> Result<CVector> {
    let dim = d.pow(n as u32);
    for _ in 0..SYMMETRIC_RETRIES {
        let p = project_symmetric(&haar_pure(dim, rng), n, d)?;
        let norm = p.norm();
        if norm > 1e-12 {
            return Ok(p / real_scalar(norm));
        }
    }
    Err(Error::ZeroProjection(SYMMETRIC_RETRIES))
}

/// `ψ^{⊗n}`.
pub fn tensor_power_vector(psi: &CVector, n: usize) -> CVector {
    let mut acc = CVector::from_element(1, real_scalar(1.0));
    for _ in 0..n {
        acc = kron_vec(&acc, psi);
    }
    acc
}

/// Random Hermitian matrix `(G + G†)/2` with Ginibre `G`.
pub fn random_hermitian(dims: Dims, rng: &mut StreamRng) -> HermitianOperator {
    let d = dims.total();
    let g = ginibre(d, d, rng);
    HermitianOperator::from_parts((&g + g.adjoint()) * real_scalar(0.5), dims)
}

/// Wishart matrix scaled so its largest eigenvalue is one.
pub fn random_contraction(dims: Dims, rng: &mut StreamRng) -> Result<HermitianOperator> {
    let d = dims.total();
    let g = ginibre(d, d, rng);
    let w = HermitianOperator::from_parts(&g * g.adjoint(), dims);
    let top = w.max_eigenvalue()?;
    Ok(w.scale(1.0 / top))
}

/// Channel from a Haar isometry `C^{din} -> C^{dout} ⊗ C^{env}`.
pub fn random_channel(din: usize, dout: usize, env: usize, rng: &mut StreamRng) -> Result<KrausChannel> {
    let u = haar_unitary(dout * env, rng);
    let v = u.columns(0, din).into_owned();
    let kraus = (0..env)
        .map(|e| CMatrix::from_fn(dout, din, |i, j| v[(i * env + e, j)]))
        .collect();
    KrausChannel::new(kraus, Dims::single(din), Dims::single(dout))
}

/// Which family [`random_state`] draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    HaarPure,
    InducedMixed,
    /// Symmetric pure state on `n` copies of the first factor of `dims`.
    SymmetricPure { n: usize },
}

/// Output of [`random_state`].
#[derive(Clone, Debug)]
pub enum RandomSample {
    Vector(CVector),
    Density(DensityMatrix),
}

/// Deterministic draw keyed by `seed`.
pub fn random_state(kind: StateKind, dims: Dims, seed: u64) -> Result<RandomSample> {
    let mut rng = stream(seed, "random-state", 0);
    match kind {
        StateKind::HaarPure => Ok(RandomSample::Vector(haar_pure(dims.total(), &mut rng))),
        StateKind::InducedMixed => Ok(RandomSample::Density(induced_mixed(dims, &mut rng))),
        StateKind::SymmetricPure { n } => {
            let d = *dims.factors().first().ok_or_else(|| Error::InvalidParameter("empty dims".into()))?;
            Ok(RandomSample::Vector(symmetric_pure(n, d, &mut rng)?))
        }
    }
}
