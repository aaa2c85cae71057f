//! Completely positive trace-preserving maps in Kraus form.

use super::linalg::{basis_vector, frobenius, outer, real_scalar, ONE, ZERO};
use super::{CMatrix, DensityMatrix, Dims, HermitianOperator};
use crate::error::{Error, Result};

/// Tolerance on `‖Σ K†K − I‖_F`.
pub const CPTP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    kraus_ops: Vec<CMatrix>,
    in_dims: Dims,
    out_dims: Dims,
}

impl KrausChannel {
    pub fn new(kraus_ops: Vec<CMatrix>, in_dims: Dims, out_dims: Dims) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus list".into()));
        }
        let (din, dout) = (in_dims.total(), out_dims.total());
        if let Some(k) = kraus_ops.iter().find(|k| k.nrows() != dout || k.ncols() != din) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {}x{} for map {din} -> {dout}",
                k.nrows(),
                k.ncols()
            )));
        }
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus_ops {
            sum += k.adjoint() * k;
        }
        let defect = frobenius(&(sum - CMatrix::identity(din, din)));
        if defect > CPTP_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Self { kraus_ops, in_dims, out_dims })
    }

    pub fn identity(dims: Dims) -> Self {
        let n = dims.total();
        Self { kraus_ops: vec![CMatrix::identity(n, n)], in_dims: dims.clone(), out_dims: dims }
    }

    /// Kraus set `{|x><x|}`: keeps the diagonal, removes coherences.
    pub fn qc_dephasing(d: usize) -> Self {
        let kraus_ops = (0..d).map(|x| outer(&basis_vector(d, x), &basis_vector(d, x))).collect();
        Self { kraus_ops, in_dims: Dims::single(d), out_dims: Dims::single(d) }
    }

    /// Kraus set `{|i><j|/√d}`: every input goes to `I/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = real_scalar(1.0 / (d as f64).sqrt());
        let mut kraus_ops = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                kraus_ops.push(outer(&basis_vector(d, i), &basis_vector(d, j)) * s);
            }
        }
        Self { kraus_ops, in_dims: Dims::single(d), out_dims: Dims::single(d) }
    }

    /// Uniform average of conjugation by a finite list of unitaries.
    pub fn group_twirl(unitaries: &[CMatrix], dims: Dims) -> Result<Self> {
        let s = real_scalar(1.0 / (unitaries.len() as f64).sqrt());
        Self::new(unitaries.iter().map(|u| u * s).collect(), dims.clone(), dims)
    }

    /// Twirl over the single-qubit Pauli group.
    pub fn pauli_twirl() -> Self {
        let i = num_complex::Complex64::i();
        let paulis = [
            CMatrix::identity(2, 2),
            CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        ];
        Self::group_twirl(&paulis, Dims::single(2)).expect("Pauli matrices are unitary")
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn in_dims(&self) -> &Dims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &Dims {
        &self.out_dims
    }

    /// `Σ K x K†` on a raw matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.in_dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "input side {} for channel on {:?}",
                x.nrows(),
                self.in_dims
            )));
        }
        let d = self.out_dims.total();
        let mut out = CMatrix::zeros(d, d);
        for k in &self.kraus_ops {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply_operator(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator::from_parts(self.apply_matrix(x.matrix())?, self.out_dims.clone()))
    }

    /// Parallel composition; Kraus operators are all pairwise products.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut kraus_ops = Vec::with_capacity(self.kraus_ops.len() * other.kraus_ops.len());
        for a in &self.kraus_ops {
            for b in &other.kraus_ops {
                kraus_ops.push(a.kronecker(b));
            }
        }
        Self {
            kraus_ops,
            in_dims: self.in_dims.concat(&other.in_dims),
            out_dims: self.out_dims.concat(&other.out_dims),
        }
    }

    pub fn tensor_power(&self, n: usize) -> KrausChannel {
        let empty = Dims::from(vec![]);
        let mut acc = KrausChannel::identity(empty);
        for _ in 0..n {
            acc = acc.tensor(self);
        }
        acc
    }
}

/// `Σ K ρ K†`; normalization is preserved.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_operator(rho.op())?;
    Ok(DensityMatrix::from_parts(out, rho.is_normalized()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::CVector;

    fn plus() -> DensityMatrix {
        let v = CVector::from_vec(vec![real_scalar(1.0), real_scalar(1.0)]);
        DensityMatrix::pure(&v, Dims::single(2)).unwrap()
    }

    fn half_identity() -> CMatrix {
        CMatrix::identity(2, 2) * real_scalar(0.5)
    }

    #[test]
    fn identity_channel() {
        let rho = plus();
        let out = apply_channel(&KrausChannel::identity(Dims::single(2)), &rho).unwrap();
        assert!((out.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn dephasing_plus() {
        let out = apply_channel(&KrausChannel::qc_dephasing(2), &plus()).unwrap();
        assert!((out.matrix() - half_identity()).norm() < 1e-15);
    }

    #[test]
    fn dephasing_fixes_diagonal_and_is_idempotent() {
        let ch = KrausChannel::qc_dephasing(3);
        let diag = HermitianOperator::from_real_diagonal(&[0.2, 0.3, 0.5], Dims::single(3)).unwrap();
        let out = ch.apply_operator(&diag).unwrap();
        assert!((out.matrix() - diag.matrix()).norm() < 1e-15);
        let once = apply_channel(&KrausChannel::qc_dephasing(2), &plus()).unwrap();
        let twice = apply_channel(&KrausChannel::qc_dephasing(2), &once).unwrap();
        assert!((once.matrix() - twice.matrix()).norm() < 1e-15);
    }

    #[test]
    fn depolarizing_sends_everything_to_maximally_mixed() {
        let out = apply_channel(&KrausChannel::completely_depolarizing(2), &plus()).unwrap();
        assert!((out.matrix() - half_identity()).norm() < 1e-15);
        let out = apply_channel(&KrausChannel::pauli_twirl(), &plus()).unwrap();
        assert!((out.matrix() - half_identity()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = vec![CMatrix::identity(2, 2) * real_scalar(0.5)];
        assert!(matches!(
            KrausChannel::new(k, Dims::single(2), Dims::single(2)),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn rejects_wrong_input_side() {
        let rho = DensityMatrix::maximally_mixed(Dims::single(3));
        assert!(apply_channel(&KrausChannel::qc_dephasing(2), &rho).is_err());
    }

    #[test]
    fn tensor_power_dims() {
        let ch = KrausChannel::qc_dephasing(2).tensor_power(3);
        assert_eq!(ch.in_dims().factors(), &[2, 2, 2]);
        assert_eq!(ch.kraus_ops().len(), 8);
    }
}
