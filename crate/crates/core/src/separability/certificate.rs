//! Serializable witnesses for separable-set optimizations and their
//! independent re-verification.

use super::frank_wolfe::SepMixture;
use super::seesaw::SeesawResult;
use super::BipartiteCut;
use crate::error::{Error, Result};
use crate::info::fidelity_matrices;
use crate::operator::linalg::{kron_vec, projector, real_scalar};
use crate::operator::{CMatrix, CVector, DensityMatrix, HermitianOperator, OperatorJson};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Slack allowed between a claimed and a recomputed value, and on the
/// normalization of weights and vectors.
pub const RECHECK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVec {
    pub fn from_vector(v: &CVector) -> Self {
        Self { re: v.iter().map(|z| z.re).collect(), im: v.iter().map(|z| z.im).collect() }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if self.re.len() != self.im.len() {
            return Err(Error::DimensionMismatch(format!("re has {} entries, im has {}", self.re.len(), self.im.len())));
        }
        Ok(CVector::from_iterator(self.re.len(), self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureAtom {
    pub weight: f64,
    pub a: ComplexVec,
    pub b: ComplexVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// A product vector with `<a⊗b|M|a⊗b>` equal to the claimed value.
    ProductValue { operator: OperatorJson, cut: BipartiteCut, a: ComplexVec, b: ComplexVec, claimed_value: f64 },
    /// A separable mixture whose fidelity with `state` is the claimed value.
    FidelityMixture { state: OperatorJson, cut: BipartiteCut, atoms: Vec<MixtureAtom>, claimed_value: f64 },
    /// A separable mixture whose Hilbert–Schmidt distance to `state` is the claimed value.
    DistanceMixture { state: OperatorJson, cut: BipartiteCut, atoms: Vec<MixtureAtom>, claimed_value: f64 },
}

fn atoms_of(m: &SepMixture) -> Vec<MixtureAtom> {
    m.atoms
        .iter()
        .zip(&m.weights)
        .map(|((a, b), &w)| MixtureAtom { weight: w, a: ComplexVec::from_vector(a), b: ComplexVec::from_vector(b) })
        .collect()
}

impl Certificate {
    pub fn from_seesaw(m: &HermitianOperator, cut: &BipartiteCut, r: &SeesawResult) -> Self {
        Certificate::ProductValue {
            operator: m.to_json(),
            cut: cut.clone(),
            a: ComplexVec::from_vector(&r.a_vec),
            b: ComplexVec::from_vector(&r.b_vec),
            claimed_value: r.value,
        }
    }

    pub fn from_fidelity(rho: &DensityMatrix, cut: &BipartiteCut, m: &SepMixture) -> Self {
        Certificate::FidelityMixture {
            state: rho.op().to_json(),
            cut: cut.clone(),
            atoms: atoms_of(m),
            claimed_value: m.value,
        }
    }

    pub fn from_distance(sigma: &DensityMatrix, cut: &BipartiteCut, m: &SepMixture) -> Self {
        Certificate::DistanceMixture {
            state: sigma.op().to_json(),
            cut: cut.clone(),
            atoms: atoms_of(m),
            claimed_value: m.value,
        }
    }

    pub fn claimed_value(&self) -> f64 {
        match self {
            Certificate::ProductValue { claimed_value, .. }
            | Certificate::FidelityMixture { claimed_value, .. }
            | Certificate::DistanceMixture { claimed_value, .. } => *claimed_value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub claimed: f64,
    pub recomputed: f64,
    pub weight_sum: f64,
    pub min_weight: f64,
    pub pass: bool,
    /// First failed condition, if any.
    pub reason: Option<String>,
}

fn unit_vector(v: &ComplexVec, expected: usize) -> Result<CVector> {
    let v = v.to_vector()?;
    if v.len() != expected {
        return Err(Error::DimensionMismatch(format!("vector of length {} where {} was expected", v.len(), expected)));
    }
    Ok(v)
}

fn norm_defect(v: &CVector) -> f64 {
    (v.norm() - 1.0).abs()
}

struct Rebuilt {
    matrix: CMatrix,
    vectors: Vec<CVector>,
    weights: Vec<f64>,
    max_norm_defect: f64,
}

fn rebuild(state: &OperatorJson, cut: &BipartiteCut, atoms: &[MixtureAtom]) -> Result<Rebuilt> {
    let op = state.to_operator()?;
    let cut = BipartiteCut::new(cut.a_factors().to_vec(), cut.b_factors().to_vec(), op.dims().len())?;
    let c = cut.canonical(&op)?;
    let mut vectors = Vec::with_capacity(atoms.len());
    let mut max_norm_defect: f64 = 0.0;
    for atom in atoms {
        let a = unit_vector(&atom.a, c.da)?;
        let b = unit_vector(&atom.b, c.db)?;
        max_norm_defect = max_norm_defect.max(norm_defect(&a)).max(norm_defect(&b));
        vectors.push(kron_vec(&a, &b));
    }
    Ok(Rebuilt { matrix: c.matrix, vectors, weights: atoms.iter().map(|a| a.weight).collect(), max_norm_defect })
}

fn mixture(vectors: &[CVector], weights: &[f64], side: usize) -> CMatrix {
    let mut s = CMatrix::zeros(side, side);
    for (v, &w) in vectors.iter().zip(weights) {
        s += projector(v) * real_scalar(w);
    }
    s
}

fn verdict(claimed: f64, recomputed: f64, weights: &[f64], norm_defect: f64) -> CertificateCheck {
    let weight_sum: f64 = weights.iter().sum();
    let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let reason = if weights.is_empty() {
        Some("no atoms".to_string())
    } else if min_weight < 0.0 {
        Some(format!("negative weight {min_weight}"))
    } else if (weight_sum - 1.0).abs() > RECHECK_TOL {
        Some(format!("weights sum to {weight_sum}"))
    } else if norm_defect > RECHECK_TOL {
        Some(format!("vector norm off by {norm_defect}"))
    } else if !((claimed - recomputed).abs() <= RECHECK_TOL) {
        Some(format!("claimed {claimed}, recomputed {recomputed}"))
    } else {
        None
    };
    CertificateCheck { claimed, recomputed, weight_sum, min_weight, pass: reason.is_none(), reason }
}

/// Recomputes a certificate's value from its raw data.
pub fn recheck(cert: &Certificate) -> Result<CertificateCheck> {
    match cert {
        Certificate::ProductValue { operator, cut, a, b, claimed_value } => {
            let atoms = [MixtureAtom { weight: 1.0, a: a.clone(), b: b.clone() }];
            let r = rebuild(operator, cut, &atoms)?;
            let v = &r.vectors[0];
            let value = v.dotc(&(&r.matrix * v)).re;
            Ok(verdict(*claimed_value, value, &r.weights, r.max_norm_defect))
        }
        Certificate::FidelityMixture { state, cut, atoms, claimed_value } => {
            let r = rebuild(state, cut, atoms)?;
            let sigma = mixture(&r.vectors, &r.weights, r.matrix.nrows());
            let value = fidelity_matrices(&r.matrix, &sigma)?;
            Ok(verdict(*claimed_value, value, &r.weights, r.max_norm_defect))
        }
        Certificate::DistanceMixture { state, cut, atoms, claimed_value } => {
            let r = rebuild(state, cut, atoms)?;
            let sigma = mixture(&r.vectors, &r.weights, r.matrix.nrows());
            let value = (&r.matrix - sigma).norm();
            Ok(verdict(*claimed_value, value, &r.weights, r.max_norm_defect))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Dims;
    use crate::separability::{hsep_seesaw, max_fidelity_to_sep, FwOptions, SeesawOptions};

    fn singlet_vec() -> CVector {
        let mut v = CVector::zeros(4);
        v[1] = real_scalar(0.5f64.sqrt());
        v[2] = real_scalar(-(0.5f64.sqrt()));
        v
    }

    #[test]
    fn seesaw_certificate_round_trips() {
        let m = HermitianOperator::projector(&singlet_vec(), Dims::uniform(2, 2)).unwrap();
        let cut = BipartiteCut::two_party();
        let r = hsep_seesaw(&m, &cut, &SeesawOptions::default()).unwrap();
        let cert = Certificate::from_seesaw(&m, &cut, &r);
        let text = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert!(recheck(&back).unwrap().pass);
    }

    #[test]
    fn tampered_claim_fails() {
        let rho = DensityMatrix::pure(&singlet_vec(), Dims::uniform(2, 2)).unwrap();
        let cut = BipartiteCut::two_party();
        let m = max_fidelity_to_sep(&rho, &cut, &FwOptions::default()).unwrap();
        let mut cert = Certificate::from_fidelity(&rho, &cut, &m);
        assert!(recheck(&cert).unwrap().pass);
        if let Certificate::FidelityMixture { claimed_value, .. } = &mut cert {
            *claimed_value += 1e-6;
        }
        assert!(!recheck(&cert).unwrap().pass);
    }

    #[test]
    fn negative_weight_fails() {
        let rho = DensityMatrix::pure(&singlet_vec(), Dims::uniform(2, 2)).unwrap();
        let e0 = ComplexVec { re: vec![1.0, 0.0], im: vec![0.0, 0.0] };
        let e1 = ComplexVec { re: vec![0.0, 1.0], im: vec![0.0, 0.0] };
        let cert = Certificate::DistanceMixture {
            state: rho.op().to_json(),
            cut: BipartiteCut::two_party(),
            atoms: vec![
                MixtureAtom { weight: 1.5, a: e0.clone(), b: e1.clone() },
                MixtureAtom { weight: -0.5, a: e1, b: e0 },
            ],
            claimed_value: 0.0,
        };
        let c = recheck(&cert).unwrap();
        assert!(!c.pass);
        assert!(c.reason.unwrap().contains("negative"));
    }
}
