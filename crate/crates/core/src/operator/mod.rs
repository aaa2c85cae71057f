//! Dense complex operator algebra with tensor-factor bookkeeping.

mod channel;
mod io;
pub mod linalg;
mod permutation;
pub mod random;
pub mod spectral;
pub mod symmetric;

pub use channel::{apply_channel, KrausChannel};
pub use io::{read_binary, write_binary, OperatorJson};
pub use permutation::{permutation_unitary, PermutationSpec};
pub use spectral::Eigen;
pub use symmetric::{
    b_side_twirl, binomial, haar_moment_operator, occupation_basis, permutation_twirl, sym_dimension,
    sym_projector, sym_projector_by_average, sym_projector_by_occupation, SparseVector,
};

use crate::error::{Error, Result};
use linalg::{frobenius, hermitian_part, real_scalar};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spectral::{check_hermitian, eigh, spectral_tolerance};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Frobenius tolerance on the anti-Hermitian part.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for normalized states.
pub const TRACE_TOL: f64 = 1e-10;

/// Largest operator side length any routine is allowed to allocate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimCap(pub usize);

impl Default for DimCap {
    fn default() -> Self {
        DimCap(4096)
    }
}

impl DimCap {
    pub fn check(self, side: usize) -> Result<()> {
        if side > self.0 {
            Err(Error::CapExceeded { side, cap: self.0 })
        } else {
            Ok(())
        }
    }

    /// Checks `base^exp` without overflowing.
    pub fn check_power(self, base: usize, exp: usize) -> Result<usize> {
        let mut side: usize = 1;
        for _ in 0..exp {
            side = side.checked_mul(base).ok_or(Error::CapExceeded { side: usize::MAX, cap: self.0 })?;
            if side > self.0 {
                return Err(Error::CapExceeded { side, cap: self.0 });
            }
        }
        Ok(side)
    }
}

/// Ordered local dimensions of the tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidParameter(format!("zero local dimension in {factors:?}")));
        }
        Ok(Dims(factors))
    }

    /// `n` copies of a `d`-dimensional factor.
    pub fn uniform(d: usize, n: usize) -> Self {
        Dims(vec![d.max(1); n])
    }

    pub fn single(d: usize) -> Self {
        Dims(vec![d.max(1)])
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &Dims) -> Dims {
        Dims(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn repeat(&self, n: usize) -> Dims {
        Dims(self.0.iter().copied().cycle().take(self.0.len() * n).collect())
    }

    /// Splits the factor list into `groups` identical consecutive chunks and
    /// returns the chunk.
    pub fn uniform_groups(&self, groups: usize) -> Result<Dims> {
        let err = || Error::NonUniformGrouping { groups, dims: self.0.clone() };
        if groups == 0 || !self.0.len().is_multiple_of(groups) {
            return Err(err());
        }
        let size = self.0.len() / groups;
        let first = &self.0[..size];
        if self.0.chunks(size).any(|c| c != first) {
            return Err(err());
        }
        Ok(Dims(first.to_vec()))
    }
}

impl From<Vec<usize>> for Dims {
    fn from(v: Vec<usize>) -> Self {
        Dims(v)
    }
}

/// Dense Hermitian matrix tagged with its tensor-factor structure.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMatrix,
    dims: Dims,
}

impl HermitianOperator {
    /// Validates shape and Hermiticity, then stores the exact Hermitian part.
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self> {
        if matrix.nrows() != dims.total() || !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix tagged with {:?}",
                matrix.nrows(),
                matrix.ncols(),
                dims.factors()
            )));
        }
        check_hermitian(&matrix, HERMITIAN_TOL)?;
        Ok(Self { matrix: hermitian_part(&matrix), dims })
    }

    /// For results that are Hermitian by construction up to rounding.
    pub(crate) fn from_parts(matrix: CMatrix, dims: Dims) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.total());
        Self { matrix: hermitian_part(&matrix), dims }
    }

    pub fn identity(dims: Dims) -> Self {
        let n = dims.total();
        Self { matrix: CMatrix::identity(n, n), dims }
    }

    pub fn zeros(dims: Dims) -> Self {
        let n = dims.total();
        Self { matrix: CMatrix::zeros(n, n), dims }
    }

    pub fn from_real_diagonal(diag: &[f64], dims: Dims) -> Result<Self> {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| real_scalar(x)));
        Self::new(CMatrix::from_diagonal(&v), dims)
    }

    /// `|v><v|`.
    pub fn projector(v: &CVector, dims: Dims) -> Result<Self> {
        if v.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!("vector of length {} vs {:?}", v.len(), dims)));
        }
        Ok(Self::from_parts(linalg::projector(v), dims))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn frobenius(&self) -> f64 {
        frobenius(&self.matrix)
    }

    /// Kronecker product; factor lists are concatenated.
    pub fn tensor(&self, other: &HermitianOperator) -> HermitianOperator {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            dims: self.dims.concat(&other.dims),
        }
    }

    pub fn tensor_power(&self, n: usize) -> HermitianOperator {
        let mut acc = HermitianOperator::identity(Dims::new(vec![]).expect("empty dims"));
        for _ in 0..n {
            acc = acc.tensor(self);
        }
        acc
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<HermitianOperator> {
        let (m, d) = linalg::partial_trace(&self.matrix, self.dims.factors(), keep)?;
        Ok(Self::from_parts(m, Dims(d)))
    }

    /// Reorders factors so that old factor `order[i]` becomes factor `i`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<HermitianOperator> {
        let (m, d) = linalg::permute_factors(&self.matrix, self.dims.factors(), order)?;
        Ok(Self { matrix: m, dims: Dims(d) })
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        Self { matrix: &self.matrix * real_scalar(s), dims: self.dims.clone() }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.same_shape(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, dims: self.dims.clone() })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.same_shape(other)?;
        Ok(Self { matrix: &self.matrix - &other.matrix, dims: self.dims.clone() })
    }

    fn same_shape(&self, other: &HermitianOperator) -> Result<()> {
        if self.side() != other.side() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    /// `Tr(self · other)`.
    pub fn overlap(&self, other: &HermitianOperator) -> Result<f64> {
        self.same_shape(other)?;
        Ok(linalg::trace_product(&self.matrix, &other.matrix).re)
    }

    /// `<v|self|v>`.
    pub fn expectation(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn eig(&self) -> Result<Eigen> {
        eigh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.min())
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.max())
    }

    /// True when `0 ⪯ self ⪯ I` within the spectral tolerance.
    pub fn is_contraction(&self) -> Result<bool> {
        let e = self.eig()?;
        let tol = spectral_tolerance(&self.matrix);
        Ok(e.min() >= -tol && e.max() <= 1.0 + tol)
    }

    pub fn contraction_check(&self) -> Result<()> {
        let e = self.eig()?;
        let tol = spectral_tolerance(&self.matrix);
        if e.min() < -tol || e.max() > 1.0 + tol {
            return Err(Error::NotContractive { min: e.min(), max: e.max() });
        }
        Ok(())
    }

    pub fn with_dims(self, dims: Dims) -> Result<HermitianOperator> {
        if dims.total() != self.side() {
            return Err(Error::DimensionMismatch(format!("{:?} for side {}", dims, self.side())));
        }
        Ok(Self { matrix: self.matrix, dims })
    }
}

/// Eigendecomposition of a Hermitian operator (values ascending).
pub fn eig_hermitian(a: &HermitianOperator) -> Result<Eigen> {
    a.eig()
}

/// A positive semidefinite operator of unit trace, or of trace in
/// `(0, 1]` when flagged as sub-normalized.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
    normalized: bool,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::validate(op, true)
    }

    pub fn subnormalized(op: HermitianOperator) -> Result<Self> {
        Self::validate(op, false)
    }

    fn validate(op: HermitianOperator, normalized: bool) -> Result<Self> {
        let tr = op.trace();
        if normalized && (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        if !normalized && !(tr > 0.0 && tr <= 1.0 + TRACE_TOL) {
            return Err(Error::InvalidTrace(tr));
        }
        let min = op.min_eigenvalue()?;
        if min < -spectral_tolerance(op.matrix()) {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { op, normalized })
    }

    /// Rescales a nonzero PSD operator to unit trace.
    pub fn normalize(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(op.scale(1.0 / tr))
    }

    pub(crate) fn from_parts(op: HermitianOperator, normalized: bool) -> Self {
        Self { op, normalized }
    }

    pub fn pure(v: &CVector, dims: Dims) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        Self::new(HermitianOperator::projector(&(v / real_scalar(n)), dims)?)
    }

    pub fn maximally_mixed(dims: Dims) -> Self {
        let n = dims.total();
        Self { op: HermitianOperator::identity(dims).scale(1.0 / n as f64), normalized: true }
    }

    pub fn basis_state(index: usize, dims: Dims) -> Result<Self> {
        if index >= dims.total() {
            return Err(Error::IndexOutOfRange { index, len: dims.total() });
        }
        Self::pure(&linalg::basis_vector(dims.total(), index), dims)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dims(&self) -> &Dims {
        self.op.dims()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self { op: self.op.tensor(&other.op), normalized: self.normalized && other.normalized }
    }

    pub fn tensor_power(&self, n: usize) -> DensityMatrix {
        Self { op: self.op.tensor_power(n), normalized: self.normalized }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(Self { op: self.op.partial_trace(keep)?, normalized: self.normalized })
    }

    pub fn permute_factors(&self, order: &[usize]) -> Result<DensityMatrix> {
        Ok(Self { op: self.op.permute_factors(order)?, normalized: self.normalized })
    }

    /// Convex combination `(1-w) self + w other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        let op = self.op.scale(1.0 - w).add(&other.op.scale(w))?;
        Ok(Self { op, normalized: self.normalized && other.normalized })
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ONE, linalg::ZERO])
    }

    #[test]
    fn tensor_identity() {
        let i2 = HermitianOperator::identity(Dims::single(2));
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.dims().factors(), &[2, 2]);
        assert!((i4.matrix() - CMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0], Dims::single(2)).unwrap();
        let p1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0], Dims::single(2)).unwrap();
        let want = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0], Dims::uniform(2, 2)).unwrap();
        assert!((p0.tensor(&p1).matrix() - want.matrix()).norm() < 1e-15);
    }

    #[test]
    fn x_tensor_x_flips_both_bits() {
        let x = HermitianOperator::new(pauli_x(), Dims::single(2)).unwrap();
        let xx = x.tensor(&x);
        let out = xx.matrix() * linalg::basis_vector(4, 0);
        assert!((out - linalg::basis_vector(4, 3)).norm() < 1e-15);
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let mut v = CVector::zeros(4);
        v[0] = real_scalar(0.5f64.sqrt());
        v[3] = real_scalar(0.5f64.sqrt());
        let bell = DensityMatrix::pure(&v, Dims::uniform(2, 2)).unwrap();
        let red = bell.partial_trace(&[0]).unwrap();
        assert!((red.matrix() - CMatrix::identity(2, 2) * real_scalar(0.5)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = HermitianOperator::from_real_diagonal(&[0.3, 0.7], Dims::single(2)).unwrap();
        let sigma = HermitianOperator::from_real_diagonal(&[0.1, 0.2, 0.3], Dims::single(3)).unwrap();
        let red = rho.tensor(&sigma).partial_trace(&[0]).unwrap();
        assert!((red.matrix() - rho.matrix() * real_scalar(0.6)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_over_nothing_is_identity_map() {
        let rho = HermitianOperator::from_real_diagonal(&[0.3, 0.7, 0.0, 0.0], Dims::uniform(2, 2)).unwrap();
        let same = rho.partial_trace(&[0, 1]).unwrap();
        assert_eq!(same.dims(), rho.dims());
        assert!((same.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = linalg::ONE;
        assert!(matches!(HermitianOperator::new(m, Dims::single(2)), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_checks() {
        let bad = HermitianOperator::from_real_diagonal(&[1.2, -0.2], Dims::single(2)).unwrap();
        assert!(matches!(DensityMatrix::new(bad), Err(Error::NotPsd(_))));
        let half = HermitianOperator::from_real_diagonal(&[0.25, 0.25], Dims::single(2)).unwrap();
        assert!(matches!(DensityMatrix::new(half.clone()), Err(Error::InvalidTrace(_))));
        let sub = DensityMatrix::subnormalized(half).unwrap();
        assert!(!sub.is_normalized());
        assert_abs_diff_eq!(sub.trace(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn uniform_groups() {
        let d = Dims::new(vec![2, 3, 2, 3]).unwrap();
        assert_eq!(d.uniform_groups(2).unwrap().factors(), &[2, 3]);
        assert!(d.uniform_groups(4).is_err());
    }

    #[test]
    fn cap_power() {
        assert_eq!(DimCap(4096).check_power(4, 6).unwrap(), 4096);
        assert!(DimCap(4096).check_power(4, 7).is_err());
    }
}
