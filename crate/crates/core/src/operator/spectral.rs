//! Hermitian eigensolver and spectral functions.

use super::linalg::{frobenius, hermitian_part};
use super::{CMatrix, CVector};
use crate::error::{Error, Result};
use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

/// Eigendecomposition with eigenvalues sorted ascending and matching
/// orthonormal eigenvectors stored column-wise.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let fk = Complex64::new(f(v), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Top eigenvector, ties inside `tie_tol` of the maximum broken by the
    /// lexicographically largest vector of absolute components. The global
    /// phase is fixed so that the largest component is real positive.
    pub fn top_vector(&self, tie_tol: f64) -> CVector {
        let top = self.max();
        let mut best: Option<(Vec<f64>, CVector)> = None;
        for k in (0..self.values.len()).rev() {
            if self.values[k] < top - tie_tol {
                break;
            }
            let v = self.vector(k);
            let key: Vec<f64> = v.iter().map(|z| z.norm()).collect();
            let better = match &best {
                None => true,
                Some((bk, _)) => lex_greater(&key, bk),
            };
            if better {
                best = Some((key, v));
            }
        }
        fix_phase(best.expect("at least one eigenvector").1)
    }
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x > y;
        }
    }
    false
}

/// Multiply by the phase that makes the largest-modulus entry real positive.
pub fn fix_phase(mut v: CVector) -> CVector {
    let (mut idx, mut best) = (0, -1.0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best + 1e-12 {
            best = z.norm();
            idx = i;
        }
    }
    if best > 0.0 {
        let phase = v[idx].conj() / v[idx].norm();
        v *= phase;
    }
    v
}

/// Eigendecomposition of a (numerically) Hermitian matrix. The input is
/// symmetrized before solving; use [`check_hermitian`] first when the input
/// is untrusted.
pub fn eigh(m: &CMatrix) -> Result<Eigen> {
    let n = m.nrows();
    let max_iter = 1000 + 100 * n;
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter).ok_or(Error::NotConverged(max_iter))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    Ok(Eigen { values, vectors })
}

/// Absolute floor plus Frobenius-relative tolerance used by every
/// Hermiticity and PSD check.
pub fn spectral_tolerance(m: &CMatrix) -> f64 {
    1e-10 + 1e-9 * frobenius(m)
}

pub fn check_hermitian(m: &CMatrix, rel_tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let dev = frobenius(&(m - m.adjoint()));
    if dev > rel_tol * frobenius(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.min())
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.max())
}

/// Square root of a PSD matrix; eigenvalues in `(-clip, 0)` are treated as 0,
/// more negative ones are an error. Eigenvalues at rounding level relative to
/// the largest one are also dropped, since their square roots would not be.
pub fn sqrt_psd(m: &CMatrix, clip: f64) -> Result<CMatrix> {
    let e = eigh(m)?;
    if e.min() < -clip {
        return Err(Error::NotPsd(e.min()));
    }
    let noise = 16.0 * f64::EPSILON * e.max().abs();
    Ok(e.map(|x| if x > noise { x.sqrt() } else { 0.0 }))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.iter().map(|v| v.abs()).sum())
}

/// Sum of singular values of an arbitrary square matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Projector onto the eigenspaces with strictly positive eigenvalues.
pub fn positive_part_projector(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    Ok(eigh(m)?.map(|x| if x > tol { 1.0 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::real_scalar;

    #[test]
    fn diag_sorted() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            real_scalar(3.0),
            real_scalar(1.0),
            real_scalar(2.0),
        ]));
        let e = eigh(&m).unwrap();
        assert_eq!(e.values.len(), 3);
        for (v, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn top_vector_breaks_ties_deterministically() {
        let e = eigh(&CMatrix::identity(3, 3)).unwrap();
        let v = e.top_vector(1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(v[v.iter().position(|z| z.norm() > 0.5).unwrap()].im.abs() < 1e-14);
    }
}
