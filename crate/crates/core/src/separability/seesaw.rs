//! Alternating top-eigenvector maximization over product vectors.

use super::{BipartiteCut, Canonical};
use crate::error::Result;
use crate::operator::random::haar_pure;
use crate::operator::spectral::eigh;
use crate::operator::{CVector, HermitianOperator};
use crate::rng::stream;
use rayon::prelude::*;

/// Eigenvalues within this of the top one count as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once one sweep increases the value by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Extra starting points tried before the random ones.
    pub warm_starts: Vec<(CVector, CVector)>,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 1000, tol: 1e-12, seed: 0, warm_starts: Vec::new() }
    }
}

impl SeesawOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    /// Unit vector on the A group.
    pub a_vec: CVector,
    /// Unit vector on the B group.
    pub b_vec: CVector,
    pub iterations: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub seed: u64,
    pub converged: bool,
    /// Objective after each sweep of the winning restart.
    pub history: Vec<f64>,
}

fn run_from(c: &Canonical, mut a: CVector, mut b: CVector, opts: &SeesawOptions) -> Result<SeesawResult> {
    let mut value = c.value(&a, &b);
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        a = eigh(&c.contract_b(&b))?.top_vector(TIE_TOL);
        b = eigh(&c.contract_a(&a))?.top_vector(TIE_TOL);
        let next = c.value(&a, &b);
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(SeesawResult {
        value,
        a_vec: a,
        b_vec: b,
        iterations,
        restarts: 0,
        best_restart: 0,
        seed: opts.seed,
        converged,
        history,
    })
}

/// Seesaw on an operator already regrouped as `A ⊗ B`; no contraction
/// requirement, so it also serves as a linear maximization oracle.
pub fn maximize_product(c: &Canonical, opts: &SeesawOptions) -> Result<SeesawResult> {
    let warm = opts.warm_starts.len();
    let total = warm + opts.restarts.max(if warm == 0 { 1 } else { 0 });
    let runs: Vec<SeesawResult> = (0..total)
        .into_par_iter()
        .map(|r| {
            let (a, b) = if r < warm {
                opts.warm_starts[r].clone()
            } else {
                let mut rng = stream(opts.seed, "seesaw", (r - warm) as u64);
                (haar_pure(c.da, &mut rng), haar_pure(c.db, &mut rng))
            };
            run_from(c, a, b, opts)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let mut out = runs.into_iter().nth(best).expect("at least one restart");
    out.restarts = total;
    out.best_restart = best;
    Ok(out)
}

/// Lower bound on `h_sep(M) = max Tr(Mσ)` over separable `σ`, for
/// `0 ⪯ M ⪯ I`.
pub fn hsep_seesaw(m: &HermitianOperator, cut: &BipartiteCut, opts: &SeesawOptions) -> Result<SeesawResult> {
    m.contraction_check()?;
    maximize_product(&cut.canonical(m)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::{basis_vector, real_scalar};
    use crate::operator::{CMatrix, Dims};

    fn singlet() -> HermitianOperator {
        let mut v = CVector::zeros(4);
        v[1] = real_scalar(0.5f64.sqrt());
        v[2] = real_scalar(-(0.5f64.sqrt()));
        HermitianOperator::projector(&v, Dims::uniform(2, 2)).unwrap()
    }

    #[test]
    fn product_projector() {
        let m = HermitianOperator::projector(&basis_vector(4, 0), Dims::uniform(2, 2)).unwrap();
        let r = hsep_seesaw(&m, &BipartiteCut::two_party(), &SeesawOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.a_vec[0].norm() - 1.0).abs() < 1e-9);
        assert!((r.b_vec[0].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_value_one() {
        let m = HermitianOperator::identity(Dims::uniform(2, 2));
        let r = hsep_seesaw(&m, &BipartiteCut::two_party(), &SeesawOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_half_and_monotone() {
        let r = hsep_seesaw(&singlet(), &BipartiteCut::two_party(), &SeesawOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn rejects_non_contraction() {
        let m = HermitianOperator::new(CMatrix::identity(4, 4) * real_scalar(2.0), Dims::uniform(2, 2)).unwrap();
        assert!(hsep_seesaw(&m, &BipartiteCut::two_party(), &SeesawOptions::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let opts = SeesawOptions::with_seed(9);
        let a = hsep_seesaw(&singlet(), &BipartiteCut::two_party(), &opts).unwrap();
        let b = hsep_seesaw(&singlet(), &BipartiteCut::two_party(), &opts).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.a_vec, b.a_vec);
    }
}
