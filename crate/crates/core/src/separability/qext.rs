//! Exact `q`-extendibility support function by eigensolve.

use super::seesaw::{hsep_seesaw, SeesawOptions};
use super::BipartiteCut;
use crate::error::{Error, Result};
use crate::operator::linalg::kron;
use crate::operator::spectral::eigh;
use crate::operator::symmetric::b_side_twirl;
use crate::operator::{CMatrix, CVector, DimCap, Dims, HermitianOperator};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct QExtResult {
    pub value: f64,
    pub q: usize,
    /// Top eigenvector of the twirled operator on `A ⊗ B^{⊗q}`.
    pub witness_vec: CVector,
}

/// `h_{q-ext}(M) = λ_max(twirl_B(M ⊗ I_B^{⊗(q-1)}))`.
pub fn hqext(m: &HermitianOperator, cut: &BipartiteCut, q: usize, cap: DimCap) -> Result<QExtResult> {
    if q == 0 {
        return Err(Error::InvalidParameter("extension order must be at least 1".into()));
    }
    m.contraction_check()?;
    let c = cut.canonical(m)?;
    let side = c.da.checked_mul(cap.check_power(c.db, q)?).ok_or(Error::CapExceeded { side: usize::MAX, cap: cap.0 })?;
    cap.check(side)?;
    let rest = c.db.pow((q - 1) as u32);
    let extended = kron(&c.matrix, &CMatrix::identity(rest, rest));
    let dims = Dims::new(std::iter::once(c.da).chain(std::iter::repeat_n(c.db, q)).collect())?;
    let twirled = b_side_twirl(&HermitianOperator::from_parts(extended, dims), q)?;
    let e = eigh(twirled.matrix())?;
    Ok(QExtResult { value: e.max(), q, witness_vec: e.top_vector(1e-12) })
}

/// Bracket on `h_sep(M)`: seesaw below, best `q`-extension value above.
#[derive(Clone, Debug, Serialize)]
pub struct CertifiedInterval {
    pub lower: f64,
    pub upper: f64,
    /// Extension order attaining `upper`.
    pub q_used: usize,
    pub q_max: usize,
    pub qext_values: Vec<f64>,
    /// `1 − upper`.
    pub delta_certified: f64,
    /// `1 − lower − 2d²/q_max` with `d = max(|A|, |B|)`.
    pub delta_loose: f64,
    pub local_dim: usize,
}

pub fn hsep_certified_interval(
    m: &HermitianOperator,
    cut: &BipartiteCut,
    q_max: usize,
    opts: &SeesawOptions,
    cap: DimCap,
) -> Result<CertifiedInterval> {
    let lower = hsep_seesaw(m, cut, opts)?.value;
    let mut qext_values = Vec::with_capacity(q_max);
    let (mut upper, mut q_used) = (f64::INFINITY, 1);
    for q in 1..=q_max {
        let v = hqext(m, cut, q, cap)?.value;
        qext_values.push(v);
        if v < upper {
            upper = v;
            q_used = q;
        }
    }
    let (da, db) = cut.side_dims(m.dims())?;
    let d = da.max(db);
    Ok(CertifiedInterval {
        lower,
        upper,
        q_used,
        q_max,
        qext_values,
        delta_certified: 1.0 - upper,
        delta_loose: 1.0 - lower - 2.0 * (d * d) as f64 / q_max as f64,
        local_dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::{basis_vector, real_scalar};
    use crate::operator::spectral::max_eigenvalue;

    fn singlet() -> HermitianOperator {
        let mut v = CVector::zeros(4);
        v[1] = real_scalar(0.5f64.sqrt());
        v[2] = real_scalar(-(0.5f64.sqrt()));
        HermitianOperator::projector(&v, Dims::uniform(2, 2)).unwrap()
    }

    #[test]
    fn one_extension_is_top_eigenvalue() {
        let r = hqext(&singlet(), &BipartiteCut::two_party(), 1, DimCap::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_two_extension_by_sector_compression() {
        let r = hqext(&singlet(), &BipartiteCut::two_party(), 2, DimCap::default()).unwrap();
        assert!((r.value - 0.75).abs() < 1e-12);
        // Independent route: the twirled operator is block diagonal over the
        // symmetric and antisymmetric sectors of B1 B2.
        let ext = kron(singlet().matrix(), &CMatrix::identity(2, 2));
        let swap = crate::operator::permutation_unitary(&crate::operator::PermutationSpec::transposition(2, 0, 1).unwrap(), 2);
        let ps = kron(&CMatrix::identity(2, 2), &((CMatrix::identity(4, 4) + &swap) * real_scalar(0.5)));
        let pa = kron(&CMatrix::identity(2, 2), &((CMatrix::identity(4, 4) - &swap) * real_scalar(0.5)));
        let top = max_eigenvalue(&(&ps * &ext * &ps)).unwrap().max(max_eigenvalue(&(&pa * &ext * &pa)).unwrap());
        assert!((r.value - top).abs() < 1e-12);
    }

    #[test]
    fn product_interval_collapses() {
        let m = HermitianOperator::projector(&basis_vector(4, 0), Dims::uniform(2, 2)).unwrap();
        let iv = hsep_certified_interval(&m, &BipartiteCut::two_party(), 3, &SeesawOptions::default(), DimCap::default())
            .unwrap();
        assert!((iv.lower - 1.0).abs() < 1e-12 && (iv.upper - 1.0).abs() < 1e-12);
    }
}
