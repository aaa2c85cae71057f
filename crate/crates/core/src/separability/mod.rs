//! Support functions and distances relative to separable and
//! `q`-extendible states.

mod certificate;
mod frank_wolfe;
mod qext;
mod seesaw;

pub use certificate::{recheck, Certificate, CertificateCheck, ComplexVec, MixtureAtom, RECHECK_TOL};
pub(crate) use frank_wolfe::{max_fidelity_over_atoms, project_simplex};
pub use frank_wolfe::{
    hs_distance_to_sep, max_fidelity_to_sep, measured_fidelity_to_sep_upper, FwOptions, SepMixture,
};
pub use qext::{hqext, hsep_certified_interval, CertifiedInterval, QExtResult};
pub use seesaw::{hsep_seesaw, maximize_product, SeesawOptions, SeesawResult};

use crate::error::{Error, Result};
use crate::operator::linalg::{kron_vec, permute_factors, ZERO};
use crate::operator::{CMatrix, CVector, Dims, HermitianOperator};
use serde::{Deserialize, Serialize};

/// Partition of the tensor factors into an A group and a B group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteCut {
    a_factors: Vec<usize>,
    b_factors: Vec<usize>,
}

impl BipartiteCut {
    pub fn new(a_factors: Vec<usize>, b_factors: Vec<usize>, num_factors: usize) -> Result<Self> {
        let mut seen = vec![false; num_factors];
        for &f in a_factors.iter().chain(&b_factors) {
            if f >= num_factors {
                return Err(Error::IndexOutOfRange { index: f, len: num_factors });
            }
            if seen[f] {
                return Err(Error::InvalidParameter(format!("factor {f} appears twice in the cut")));
            }
            seen[f] = true;
        }
        if seen.iter().any(|s| !s) || a_factors.is_empty() || b_factors.is_empty() {
            return Err(Error::InvalidParameter("cut must cover all factors with nonempty sides".into()));
        }
        Ok(Self { a_factors, b_factors })
    }

    /// Factor 0 against factor 1.
    pub fn two_party() -> Self {
        Self { a_factors: vec![0], b_factors: vec![1] }
    }

    /// `A_1 B_1 A_2 B_2 …` regrouped as `A^n : B^n`.
    pub fn interleaved(n: usize) -> Self {
        Self { a_factors: (0..n).map(|i| 2 * i).collect(), b_factors: (0..n).map(|i| 2 * i + 1).collect() }
    }

    pub fn a_factors(&self) -> &[usize] {
        &self.a_factors
    }

    pub fn b_factors(&self) -> &[usize] {
        &self.b_factors
    }

    pub fn num_factors(&self) -> usize {
        self.a_factors.len() + self.b_factors.len()
    }

    fn order(&self) -> Vec<usize> {
        self.a_factors.iter().chain(&self.b_factors).copied().collect()
    }

    /// `(|A|, |B|)` for a factor list.
    pub fn side_dims(&self, dims: &Dims) -> Result<(usize, usize)> {
        self.check(dims)?;
        let f = dims.factors();
        Ok((self.a_factors.iter().map(|&i| f[i]).product(), self.b_factors.iter().map(|&i| f[i]).product()))
    }

    fn check(&self, dims: &Dims) -> Result<()> {
        if dims.len() != self.num_factors() {
            return Err(Error::DimensionMismatch(format!(
                "cut over {} factors applied to {:?}",
                self.num_factors(),
                dims.factors()
            )));
        }
        Ok(())
    }

    /// Reorders the factors of `m` to `A-group ⊗ B-group`.
    pub fn canonical(&self, m: &HermitianOperator) -> Result<Canonical> {
        let (da, db) = self.side_dims(m.dims())?;
        let (matrix, _) = permute_factors(m.matrix(), m.dims().factors(), &self.order())?;
        Ok(Canonical { matrix, da, db })
    }

    /// Maps `a ⊗ b` (A-group then B-group) back to the original factor order.
    pub fn product_vector(&self, dims: &Dims, a: &CVector, b: &CVector) -> Result<CVector> {
        self.check(dims)?;
        let order = self.order();
        let canon_dims: Vec<usize> = order.iter().map(|&i| dims.factors()[i]).collect();
        let mut inverse = vec![0; order.len()];
        for (pos, &f) in order.iter().enumerate() {
            inverse[f] = pos;
        }
        let (v, _) = crate::operator::linalg::permute_vector_factors(&kron_vec(a, b), &canon_dims, &inverse)?;
        Ok(v)
    }
}

/// Operator with its factors regrouped as `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub matrix: CMatrix,
    pub da: usize,
    pub db: usize,
}

impl Canonical {
    /// `<a⊗b| M |a⊗b>`.
    pub fn value(&self, a: &CVector, b: &CVector) -> f64 {
        let v = kron_vec(a, b);
        v.dotc(&(&self.matrix * &v)).re
    }

    /// `(I ⊗ <b|) M (I ⊗ |b>)` on A.
    pub fn contract_b(&self, b: &CVector) -> CMatrix {
        let (da, db) = (self.da, self.db);
        let mut out = CMatrix::from_element(da, da, ZERO);
        for i in 0..da {
            for j in 0..da {
                let mut acc = ZERO;
                for k in 0..db {
                    let bk = b[k].conj();
                    if bk == ZERO {
                        continue;
                    }
                    for l in 0..db {
                        acc += bk * self.matrix[(i * db + k, j * db + l)] * b[l];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `(<a| ⊗ I) M (|a> ⊗ I)` on B.
    pub fn contract_a(&self, a: &CVector) -> CMatrix {
        let (da, db) = (self.da, self.db);
        let mut out = CMatrix::from_element(db, db, ZERO);
        for i in 0..da {
            let ai = a[i].conj();
            if ai == ZERO {
                continue;
            }
            for j in 0..da {
                let w = ai * a[j];
                if w == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out[(k, l)] += w * self.matrix[(i * db + k, j * db + l)];
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::{basis_vector, projector};

    #[test]
    fn cut_validation() {
        assert!(BipartiteCut::new(vec![0], vec![0], 2).is_err());
        assert!(BipartiteCut::new(vec![0], vec![2], 2).is_err());
        assert!(BipartiteCut::new(vec![0], vec![], 1).is_err());
        assert!(BipartiteCut::new(vec![1, 3], vec![0, 2], 4).is_ok());
    }

    #[test]
    fn product_vector_roundtrip() {
        let cut = BipartiteCut::interleaved(2);
        let dims = Dims::uniform(2, 4);
        let a = basis_vector(4, 1); // A1=0, A2=1
        let b = basis_vector(4, 2); // B1=1, B2=0
        let v = cut.product_vector(&dims, &a, &b).unwrap();
        // order A1 B1 A2 B2 = 0 1 1 0
        assert_eq!(v, basis_vector(16, 0b0110));
        let m = HermitianOperator::projector(&v, dims).unwrap();
        let c = cut.canonical(&m).unwrap();
        assert!((c.value(&a, &b) - 1.0).abs() < 1e-15);
        assert!((c.contract_b(&b) - projector(&a)).norm() < 1e-15);
        assert!((c.contract_a(&a) - projector(&b)).norm() < 1e-15);
    }
}
