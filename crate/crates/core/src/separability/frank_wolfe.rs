//! Frank–Wolfe over the separable set with a seesaw linear oracle.
//!
//! The iterate is an explicit mixture of pure product states. After each
//! oracle step the weights of all atoms found so far are re-optimized over
//! the simplex, which keeps the atom set small and speeds up convergence.

use super::seesaw::{maximize_product, SeesawOptions};
use super::{BipartiteCut, Canonical};
use crate::error::{Error, Result};
use crate::info::Povm;
use crate::operator::linalg::{kron_vec, projector, real_scalar, trace_product};
use crate::operator::spectral::{eigh, spectral_tolerance, sqrt_psd, trace_norm};
use crate::operator::{CMatrix, CVector, DensityMatrix};
use crate::rng::stream_id;

/// Regularization added to `σ` before differentiating the fidelity.
pub const FIDELITY_REGULARIZATION: f64 = 1e-12;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FwOptions {
    pub iters: usize,
    pub seed: u64,
    pub lmo_restarts: usize,
    /// Stop when the oracle's duality gap falls below this.
    pub gap_tol: f64,
    pub corrective_iters: usize,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self { iters: 200, seed: 0, lmo_restarts: 8, gap_tol: 1e-10, corrective_iters: 500 }
    }
}

/// Separable mixture `Σ w_i |a_i><a_i| ⊗ |b_i><b_i|` and its objective value.
#[derive(Clone, Debug)]
pub struct SepMixture {
    pub value: f64,
    pub atoms: Vec<(CVector, CVector)>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Last oracle duality gap.
    pub gap: f64,
}

impl SepMixture {
    /// The mixture in `A-group ⊗ B-group` order.
    pub fn matrix(&self) -> CMatrix {
        mixture(&self.atoms.iter().map(|(a, b)| kron_vec(a, b)).collect::<Vec<_>>(), &self.weights)
    }
}

fn mixture(vectors: &[CVector], weights: &[f64]) -> CMatrix {
    let n = vectors[0].len();
    let mut s = CMatrix::zeros(n, n);
    for (v, &w) in vectors.iter().zip(weights) {
        s += projector(v) * real_scalar(w);
    }
    s
}

fn matrix_mixture(atoms: &[CMatrix], weights: &[f64]) -> CMatrix {
    let n = atoms[0].nrows();
    let mut s = CMatrix::zeros(n, n);
    for (a, &w) in atoms.iter().zip(weights) {
        s += a * real_scalar(w);
    }
    s
}

trait Objective: Sync {
    fn value(&self, sigma: &CMatrix) -> Result<f64>;
    fn gradient(&self, sigma: &CMatrix) -> Result<CMatrix>;
}

struct FidelityObjective {
    sqrt_rho: CMatrix,
}

impl Objective for FidelityObjective {
    fn value(&self, sigma: &CMatrix) -> Result<f64> {
        let sqrt_sigma = sqrt_psd(sigma, spectral_tolerance(sigma))?;
        Ok(trace_norm(&(&self.sqrt_rho * sqrt_sigma)))
    }

    /// `½ √ρ (√ρ σ √ρ)^{-1/2} √ρ` with `σ` regularized and the inverse
    /// taken on the support.
    fn gradient(&self, sigma: &CMatrix) -> Result<CMatrix> {
        let n = sigma.nrows();
        let reg = sigma + CMatrix::identity(n, n) * real_scalar(FIDELITY_REGULARIZATION);
        let x = &self.sqrt_rho * reg * &self.sqrt_rho;
        let e = eigh(&x)?;
        let floor = 1e-14 * e.max().max(1e-300);
        let inv_sqrt = e.map(|v| if v > floor { 1.0 / v.sqrt() } else { 0.0 });
        Ok(&self.sqrt_rho * inv_sqrt * &self.sqrt_rho * real_scalar(0.5))
    }
}

struct HsObjective {
    target: CMatrix,
}

impl Objective for HsObjective {
    fn value(&self, sigma: &CMatrix) -> Result<f64> {
        Ok(-(&self.target - sigma).norm_squared())
    }

    fn gradient(&self, sigma: &CMatrix) -> Result<CMatrix> {
        Ok((&self.target - sigma) * real_scalar(2.0))
    }
}

struct MeasuredObjective {
    elements: Vec<CMatrix>,
    p: Vec<f64>,
}

impl MeasuredObjective {
    fn q(&self, sigma: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| trace_product(e, sigma).re.max(0.0)).collect()
    }
}

impl Objective for MeasuredObjective {
    fn value(&self, sigma: &CMatrix) -> Result<f64> {
        Ok(self.p.iter().zip(self.q(sigma)).map(|(p, q)| (p * q).sqrt()).sum())
    }

    fn gradient(&self, sigma: &CMatrix) -> Result<CMatrix> {
        let n = sigma.nrows();
        let mut g = CMatrix::zeros(n, n);
        for ((e, p), q) in self.elements.iter().zip(&self.p).zip(self.q(sigma)) {
            g += e * real_scalar(0.5 * (p / (q + FIDELITY_REGULARIZATION)).sqrt());
        }
        Ok(g)
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Maximizes `h` on `[0, 1]` by golden-section search, also checking the
/// endpoints.
fn golden_section(h: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = h(x1)?;
    let mut f2 = h(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = h(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = h(x1)?;
        }
    }
    let mut best = ((lo + hi) / 2.0, h((lo + hi) / 2.0)?);
    for x in [0.0, 1.0] {
        let fx = h(x)?;
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Projected-gradient ascent on the atom weights.
fn reoptimize_weights(obj: &dyn Objective, atoms: &[CMatrix], weights: &mut Vec<f64>, iters: usize) -> Result<f64> {
    let mut value = obj.value(&matrix_mixture(atoms, weights))?;
    let mut step = 1.0;
    for _ in 0..iters {
        let g = obj.gradient(&matrix_mixture(atoms, weights))?;
        let grad: Vec<f64> = atoms.iter().map(|a| trace_product(&g, a).re).collect();
        let mut improved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = weights.iter().zip(&grad).map(|(w, g)| w + step * g).collect();
            let trial = project_simplex(&trial);
            let tv = obj.value(&matrix_mixture(atoms, &trial))?;
            if tv > value {
                let gain = tv - value;
                *weights = trial;
                value = tv;
                improved = gain > 1e-16;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(value)
}

fn frank_wolfe(
    obj: &dyn Objective,
    da: usize,
    db: usize,
    init: (CVector, CVector),
    opts: &FwOptions,
) -> Result<SepMixture> {
    let mut atoms = vec![init];
    let mut vectors: Vec<CVector> = atoms.iter().map(|(a, b)| kron_vec(a, b)).collect();
    let mut weights = vec![1.0];
    let mut value = obj.value(&mixture(&vectors, &weights))?;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.iters {
        iterations += 1;
        let sigma = mixture(&vectors, &weights);
        let g = obj.gradient(&sigma)?;
        let lmo_opts = SeesawOptions {
            restarts: opts.lmo_restarts,
            seed: stream_id("frank-wolfe", iterations as u64) ^ opts.seed,
            warm_starts: atoms.iter().rev().take(4).cloned().collect(),
            ..SeesawOptions::default()
        };
        let lmo = maximize_product(&Canonical { matrix: g.clone(), da, db }, &lmo_opts)?;
        let s = kron_vec(&lmo.a_vec, &lmo.b_vec);
        gap = lmo.value - trace_product(&g, &sigma).re;
        if gap <= opts.gap_tol {
            converged = true;
            break;
        }
        let ps = projector(&s);
        let (gamma, _) = golden_section(|t| obj.value(&(&sigma * real_scalar(1.0 - t) + &ps * real_scalar(t))))?;
        for w in weights.iter_mut() {
            *w *= 1.0 - gamma;
        }
        match vectors.iter().position(|v| v.dotc(&s).norm_sqr() > 1.0 - 1e-14) {
            Some(i) => weights[i] += gamma,
            None => {
                atoms.push((lmo.a_vec, lmo.b_vec));
                vectors.push(s);
                weights.push(gamma);
            }
        }
        let projectors: Vec<CMatrix> = vectors.iter().map(projector).collect();
        value = reoptimize_weights(obj, &projectors, &mut weights, opts.corrective_iters)?;
        let keep: Vec<bool> = weights.iter().map(|&w| w > 1e-15).collect();
        if keep.iter().any(|k| !k) {
            let mut idx = 0;
            atoms.retain(|_| (keep[idx], idx += 1).0);
            let mut idx = 0;
            vectors.retain(|_| (keep[idx], idx += 1).0);
            weights.retain(|&w| w > 1e-15);
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            value = obj.value(&mixture(&vectors, &weights))?;
        }
    }
    Ok(SepMixture { value, atoms, weights, iterations, converged, gap })
}

fn best_product_start(c: &Canonical, seed: u64) -> Result<(CVector, CVector)> {
    let r = maximize_product(c, &SeesawOptions { restarts: 8, seed, ..SeesawOptions::default() })?;
    Ok((r.a_vec, r.b_vec))
}

fn check_normalized(rho: &DensityMatrix) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::InvalidTrace(rho.trace()));
    }
    Ok(())
}

/// Lower bound on `max_{σ ∈ SEP} F(ρ, σ)` with the separable mixture attaining it.
pub fn max_fidelity_to_sep(rho: &DensityMatrix, cut: &BipartiteCut, opts: &FwOptions) -> Result<SepMixture> {
    check_normalized(rho)?;
    let c = cut.canonical(rho.op())?;
    let sqrt_rho = sqrt_psd(&c.matrix, spectral_tolerance(&c.matrix))?;
    let init = best_product_start(&c, opts.seed)?;
    frank_wolfe(&FidelityObjective { sqrt_rho }, c.da, c.db, init, opts)
}

/// Upper bound on `min_{τ ∈ SEP} ‖σ − τ‖₂`; `value` holds the distance.
pub fn hs_distance_to_sep(sigma: &DensityMatrix, cut: &BipartiteCut, opts: &FwOptions) -> Result<SepMixture> {
    check_normalized(sigma)?;
    let c = cut.canonical(sigma.op())?;
    let init = best_product_start(&c, opts.seed)?;
    let mut out = frank_wolfe(&HsObjective { target: c.matrix.clone() }, c.da, c.db, init, opts)?;
    out.value = (-out.value).max(0.0).sqrt();
    Ok(out)
}

/// `‖E‖` of the second singular value of the realigned element over the first.
fn realignment_ratio(e: &CMatrix, da: usize, db: usize) -> f64 {
    let mut r = CMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    r[(i * da + j, k * db + l)] = e[(i * db + k, j * db + l)];
                }
            }
        }
    }
    let s = r.svd(false, false).singular_values;
    let mut sv: Vec<f64> = s.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv.len() < 2 || sv[0] == 0.0 {
        return 0.0;
    }
    sv[1] / sv[0]
}

/// `max_{σ ∈ SEP} Σ_i √(p_i q_i(σ))` for a fixed product POVM; an upper
/// bound on the separably measured fidelity of `ρ` to the separable set.
pub fn measured_fidelity_to_sep_upper(
    rho: &DensityMatrix,
    cut: &BipartiteCut,
    povm: &Povm,
    opts: &FwOptions,
) -> Result<SepMixture> {
    check_normalized(rho)?;
    let c = cut.canonical(rho.op())?;
    let mut elements = Vec::with_capacity(povm.elements().len());
    for (i, e) in povm.elements().iter().enumerate() {
        let ce = cut.canonical(e)?;
        if realignment_ratio(&ce.matrix, c.da, c.db) > 1e-10 {
            return Err(Error::NotProduct(i));
        }
        elements.push(ce.matrix);
    }
    let p = elements.iter().map(|e| trace_product(e, &c.matrix).re.max(0.0)).collect();
    let init = best_product_start(&c, opts.seed)?;
    frank_wolfe(&MeasuredObjective { elements, p }, c.da, c.db, init, opts)
}

/// `max F(ρ, Σ w_i K_i)` over the simplex, for a finite list of atoms `K_i`.
pub(crate) fn max_fidelity_over_atoms(rho: &CMatrix, atoms: &[CMatrix], iters: usize) -> Result<(f64, Vec<f64>)> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("empty atom list".into()));
    }
    let sqrt_rho = sqrt_psd(rho, spectral_tolerance(rho))?;
    let obj = FidelityObjective { sqrt_rho };
    let mut weights = vec![1.0 / atoms.len() as f64; atoms.len()];
    let value = reoptimize_weights(&obj, atoms, &mut weights, iters)?;
    Ok((value, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::linalg::basis_vector;
    use crate::operator::{Dims, HermitianOperator};

    fn singlet() -> DensityMatrix {
        let mut v = CVector::zeros(4);
        v[1] = real_scalar(1.0);
        v[2] = real_scalar(-1.0);
        DensityMatrix::pure(&v, Dims::uniform(2, 2)).unwrap()
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex(&[2.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn singlet_fidelity_squared_is_half() {
        let r = max_fidelity_to_sep(&singlet(), &BipartiteCut::two_party(), &FwOptions::default()).unwrap();
        assert!((r.value.powi(2) - 0.5).abs() < 1e-8, "{}", r.value);
        let f = crate::info::fidelity_matrices(singlet().matrix(), &r.matrix()).unwrap();
        assert!((f - r.value).abs() < 1e-9);
    }

    #[test]
    fn separable_state_has_fidelity_one() {
        let p00 = HermitianOperator::projector(&basis_vector(4, 0), Dims::uniform(2, 2)).unwrap();
        let p11 = HermitianOperator::projector(&basis_vector(4, 3), Dims::uniform(2, 2)).unwrap();
        let rho = DensityMatrix::new(p00.scale(0.3).add(&p11.scale(0.7)).unwrap()).unwrap();
        let r = max_fidelity_to_sep(&rho, &BipartiteCut::two_party(), &FwOptions::default()).unwrap();
        assert!(r.value >= 1.0 - 1e-6, "{}", r.value);
        let d = hs_distance_to_sep(&rho, &BipartiteCut::two_party(), &FwOptions::default()).unwrap();
        assert!(d.value <= 1e-6);
    }

    #[test]
    fn singlet_hs_distance_reaches_werner_value() {
        let r = hs_distance_to_sep(&singlet(), &BipartiteCut::two_party(), &FwOptions::default()).unwrap();
        assert!(r.value <= (1.0f64 / 3.0).sqrt() + 1e-6, "{}", r.value);
    }

    #[test]
    fn measured_upper_with_tomography_below_one() {
        let povm = Povm::pauli_tomography().tensor(&Povm::pauli_tomography());
        let r = measured_fidelity_to_sep_upper(&singlet(), &BipartiteCut::two_party(), &povm, &FwOptions::default())
            .unwrap();
        assert!(r.value < 1.0 - 1e-3, "{}", r.value);
        let trivial = Povm::trivial(Dims::uniform(2, 2));
        let r = measured_fidelity_to_sep_upper(&singlet(), &BipartiteCut::two_party(), &trivial, &FwOptions::default())
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_entangled_povm() {
        let s = singlet();
        let comp = HermitianOperator::identity(Dims::uniform(2, 2)).sub(s.op()).unwrap();
        let povm = Povm::unlabeled(vec![s.op().clone(), comp]).unwrap();
        let r = measured_fidelity_to_sep_upper(&s, &BipartiteCut::two_party(), &povm, &FwOptions::default());
        assert!(matches!(r, Err(Error::NotProduct(0))));
    }
}
