//! Exact Haar integrals of sandwiched operators.
//!
//! `∫ (|x><x|^{⊗m} ⊗ I_K) X (|x><x|^{⊗m} ⊗ I_K) dx` is a degree-`2m`
//! polynomial moment, so it equals a contraction of `X` against the
//! projector onto `Sym^{2m}(C^d)`. The projector is never formed; the sum
//! runs over its occupation-basis vectors, which are sparse.

use crate::error::{Error, Result};
use crate::operator::linalg::real_scalar;
use crate::operator::spectral::min_eigenvalue;
use crate::operator::symmetric::{occupation_basis, symmetry_defect, sym_dimension};
use crate::operator::random::{haar_pure, tensor_power_vector};
use crate::operator::{CMatrix, CVector, DimCap, Dims, HermitianOperator};
use crate::rng::stream;

/// Symmetry tolerance for `θ`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `∫ (|x><x|^{⊗m} ⊗ I_K) X (|x><x|^{⊗m} ⊗ I_K) dx` over unit `x ∈ C^d`,
/// where `X` acts on `(C^d)^{⊗m} ⊗ C^K` with the `K` factor last.
pub fn pure_power_sandwich(x: &CMatrix, m: usize, d: usize, k: usize) -> Result<CMatrix> {
    let dm = d.pow(m as u32);
    let side = dm * k;
    if x.nrows() != side || !x.is_square() {
        return Err(Error::DimensionMismatch(format!("operator side {} vs {d}^{m}·{k}", x.nrows())));
    }
    let norm = 1.0 / sym_dimension(2 * m, d) as f64;
    let mut out = CMatrix::zeros(side, side);
    for e in occupation_basis(2 * m, d) {
        let w = real_scalar(e.amplitude * e.amplitude * norm);
        let pairs: Vec<(usize, usize)> = e.indices.iter().map(|&idx| (idx / dm, idx % dm)).collect();
        // Result[(i,c),(j,c')] += w · X[(a,c),(b,c')] for (i,b), (a,j) in the class.
        for &(i, b) in &pairs {
            for &(a, j) in &pairs {
                for c in 0..k {
                    for c2 in 0..k {
                        out[(i * k + c, j * k + c2)] += w * x[(a * k + c, b * k + c2)];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Checks that `θ` is a unit vector of `Sym^n(C^d)`.
pub fn check_symmetric_unit(theta: &CVector, n: usize, d: usize) -> Result<()> {
    if theta.len() != d.pow(n as u32) {
        return Err(Error::DimensionMismatch(format!("θ of length {} vs {d}^{n}", theta.len())));
    }
    if (theta.norm() - 1.0).abs() > SYMMETRY_TOL {
        return Err(Error::InvalidParameter(format!("θ has norm {}", theta.norm())));
    }
    let defect = symmetry_defect(theta, n, d);
    if defect > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(defect));
    }
    Ok(())
}

/// `∫ |<θ|ψ^{⊗n}>|² |ψ><ψ|^{⊗n} dψ`, evaluated exactly.
pub fn constrained_moment(theta: &CVector, n: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    cap.check_power(d, 2 * n)?;
    check_symmetric_unit(theta, n, d)?;
    let x = theta * theta.adjoint();
    let m = pure_power_sandwich(&x, n, d, 1)?;
    Ok(HermitianOperator::from_parts(m, Dims::uniform(d, n)))
}

/// Same integral with `|θ><θ|` replaced by an arbitrary operator on
/// `(C^d)^{⊗n}`; linear in the operator.
pub fn moment_of_operator(x: &CMatrix, n: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    cap.check_power(d, 2 * n)?;
    let m = pure_power_sandwich(x, n, d, 1)?;
    Ok(HermitianOperator::from_parts(m, Dims::uniform(d, n)))
}

/// Entrywise Monte-Carlo comparison of [`constrained_moment`] with sampled
/// Haar vectors.
#[derive(Clone, Debug)]
pub struct MonteCarloCheck {
    pub samples: usize,
    /// Largest `|mean − exact| / stderr` over real and imaginary parts of
    /// entries whose standard error is not negligible.
    pub max_z: f64,
    /// Largest `|mean − exact|` over entries with negligible standard error.
    pub max_abs_deviation_flat: f64,
    pub sigmas: f64,
    pub pass: bool,
}

/// Standard errors below this are treated as zero variance.
const FLAT_STDERR: f64 = 1e-14;

pub fn monte_carlo_moment_check(
    theta: &CVector,
    n: usize,
    d: usize,
    samples: usize,
    sigmas: f64,
    seed: u64,
    cap: DimCap,
) -> Result<MonteCarloCheck> {
    let exact = constrained_moment(theta, n, d, cap)?;
    let side = exact.side();
    let mut sum = vec![0.0f64; 2 * side * side];
    let mut sum_sq = vec![0.0f64; 2 * side * side];
    let mut rng = stream(seed, "moment-monte-carlo", 0);
    for _ in 0..samples {
        let v = tensor_power_vector(&haar_pure(d, &mut rng), n);
        let w = theta.dotc(&v).norm_sqr();
        for i in 0..side {
            for j in 0..side {
                let z = v[i] * v[j].conj() * w;
                let idx = 2 * (i * side + j);
                sum[idx] += z.re;
                sum[idx + 1] += z.im;
                sum_sq[idx] += z.re * z.re;
                sum_sq[idx + 1] += z.im * z.im;
            }
        }
    }
    let count = samples as f64;
    let mut max_z: f64 = 0.0;
    let mut max_flat: f64 = 0.0;
    for i in 0..side {
        for j in 0..side {
            let e = exact.matrix()[(i, j)];
            for (part, target) in [(0, e.re), (1, e.im)] {
                let idx = 2 * (i * side + j) + part;
                let mean = sum[idx] / count;
                let var = (sum_sq[idx] / count - mean * mean).max(0.0) * count / (count - 1.0);
                let se = (var / count).sqrt();
                let dev = (mean - target).abs();
                if se > FLAT_STDERR {
                    max_z = max_z.max(dev / se);
                } else {
                    max_flat = max_flat.max(dev);
                }
            }
        }
    }
    Ok(MonteCarloCheck {
        samples,
        max_z,
        max_abs_deviation_flat: max_flat,
        sigmas,
        pass: max_z <= sigmas && max_flat <= 1e-12,
    })
}

/// Minimum eigenvalue of `prefactor · rhs − lhs`.
pub(crate) fn psd_gap(lhs: &CMatrix, rhs: &CMatrix, prefactor: f64) -> Result<f64> {
    min_eigenvalue(&(rhs * real_scalar(prefactor) - lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::{basis_vector, kron, partial_trace};
    use crate::operator::random::symmetric_pure;
    use crate::operator::symmetric::sym_projector;

    fn dense_oracle(theta: &CVector, n: usize, d: usize) -> CMatrix {
        let p = sym_projector(2 * n, d, DimCap::default()).unwrap();
        let big = kron(&(theta * theta.adjoint()), &CMatrix::identity(d.pow(n as u32), d.pow(n as u32)));
        let prod = big * p.matrix();
        let dims = vec![d; 2 * n];
        let keep: Vec<usize> = (n..2 * n).collect();
        let (m, _) = partial_trace(&prod, &dims, &keep).unwrap();
        m / real_scalar(sym_dimension(2 * n, d) as f64)
    }

    #[test]
    fn matches_dense_contraction() {
        let mut rng = stream(3, "moment", 0);
        for (n, d) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let theta = symmetric_pure(n, d, &mut rng).unwrap();
            let fast = constrained_moment(&theta, n, d, DimCap::default()).unwrap();
            assert!((fast.matrix() - dense_oracle(&theta, n, d)).norm() < 1e-12, "n={n} d={d}");
        }
    }

    #[test]
    fn single_copy_closed_form() {
        let mut rng = stream(4, "moment", 0);
        let d = 3;
        let theta = symmetric_pure(1, d, &mut rng).unwrap();
        let c = constrained_moment(&theta, 1, d, DimCap::default()).unwrap();
        let want = (&theta * theta.adjoint() + CMatrix::identity(d, d)) / real_scalar((d * (d + 1)) as f64);
        assert!((c.matrix() - want).norm() < 1e-14);
    }

    #[test]
    fn monte_carlo_agrees() {
        let theta = symmetric_pure(2, 2, &mut stream(6, "moment", 0)).unwrap();
        let mc = monte_carlo_moment_check(&theta, 2, 2, 20_000, 5.0, 1, DimCap::default()).unwrap();
        assert!(mc.pass, "{mc:?}");
    }

    #[test]
    fn rejects_asymmetric() {
        let theta = basis_vector(4, 1);
        assert!(matches!(constrained_moment(&theta, 2, 2, DimCap::default()), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn environment_factor_is_spectator() {
        // With X = A ⊗ |c><c'|, the K factor carries |c><c'| through unchanged.
        let mut rng = stream(5, "moment", 0);
        let theta = symmetric_pure(2, 2, &mut rng).unwrap();
        let a = &theta * theta.adjoint();
        let env = crate::operator::linalg::outer(&basis_vector(2, 0), &basis_vector(2, 1));
        let out = pure_power_sandwich(&kron(&a, &env), 2, 2, 2).unwrap();
        let want = kron(&pure_power_sandwich(&a, 2, 2, 1).unwrap(), &env);
        assert!((out - want).norm() < 1e-14);
    }
}
