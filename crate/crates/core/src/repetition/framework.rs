//! Convex constraint families stable under permutations and partial traces,
//! and the conversions between decay of their support functions and decay
//! of their maximum fidelities.

use super::{binomial_tail_f64, ThresholdVariant};
use crate::error::{Error, Result};
use crate::operator::linalg::{kron, permute_factors, real_scalar, trace_product};
use crate::operator::spectral::positive_part_projector;
use crate::operator::{CMatrix, DensityMatrix, DimCap, Dims, HermitianOperator};
use crate::separability::{hsep_seesaw, max_fidelity_over_atoms, max_fidelity_to_sep, BipartiteCut, FwOptions, SeesawOptions};
use serde::{Deserialize, Serialize};

pub const ROOT_TOL: f64 = 1e-12;
const HULL_ITERS: usize = 4000;
const MEMBERSHIP_TOL: f64 = 1e-10;

/// Non-decreasing function on `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayProfile {
    /// Piecewise-linear interpolation through `(x, y)` points, constant
    /// beyond the end points.
    Table { points: Vec<(f64, f64)> },
    /// `coef · x^exponent`.
    Power { coef: f64, exponent: f64 },
}

impl DecayProfile {
    /// `ε²/4`, the fidelity decay rate of separable states.
    pub fn quarter_square() -> Self {
        DecayProfile::Power { coef: 0.25, exponent: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DecayProfile::Table { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidParameter("empty decay table".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return Err(Error::InvalidParameter("decay table must be increasing in x and non-decreasing in y".into()));
                    }
                }
                if points.iter().any(|&(x, y)| !(x > 0.0 && x < 1.0) || !(0.0..1.0).contains(&y)) {
                    return Err(Error::InvalidParameter("decay table points must lie in (0, 1) x [0, 1)".into()));
                }
                Ok(())
            }
            DecayProfile::Power { coef, exponent } => {
                if !(*coef > 0.0 && *exponent > 0.0) {
                    return Err(Error::InvalidParameter("power profile needs positive coefficient and exponent".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DecayProfile::Power { coef, exponent } => coef * x.powf(*exponent),
            DecayProfile::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let i = points.partition_point(|&(px, _)| px <= x);
                let (x0, y0) = points[i - 1];
                let (x1, y1) = points[i];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootReport {
    pub eps: f64,
    /// `f(ε)` at the root.
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Root of an increasing `h` on `(lo, hi)`, or `None` without a sign change.
fn bisect(h: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64, usize)> {
    let (mut a, mut b) = (lo, hi);
    if !(h(a) < 0.0 && h(b) > 0.0) {
        return None;
    }
    let mut iterations = 0;
    while b - a > f64::EPSILON * b.max(1e-300) && iterations < 2000 {
        iterations += 1;
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = h(mid);
        if v == 0.0 {
            return Some((mid, 0.0, iterations));
        }
        if v < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (ha, hb) = (h(a), h(b));
    let (eps, res) = if ha.abs() <= hb.abs() { (a, ha) } else { (b, hb) };
    Some((eps, res.abs(), iterations))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub delta: f64,
    pub alpha: f64,
    pub r: f64,
    pub n: usize,
    /// Root of `f(ε) = δ − rε`; `g = f(ε)`.
    pub g: Option<RootReport>,
    /// Root of `f(ε) = 2(α − rε)²`; `g' = f(ε)`.
    pub g_prime: Option<RootReport>,
    /// `(1 − g)^n`.
    pub power_bound: Option<f64>,
    /// `e^{−n g'}`.
    pub threshold_bound: Option<f64>,
    /// No root, or a rate too small to move the bound below 1.
    pub vacuous: bool,
}

/// Support-function decay rates implied by a fidelity decay profile `f`.
pub fn framework_decay_from_fidelity(f: &DecayProfile, r: f64, delta: f64, alpha: f64, n: usize) -> Result<DecayReport> {
    f.validate()?;
    if !(delta > 0.0 && delta < 1.0 && alpha > 0.0 && alpha <= delta && r > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < alpha <= delta < 1 and r > 0; got {alpha}, {delta}, {r}")));
    }
    let report = |root: Option<(f64, f64, usize)>| {
        root.map(|(eps, residual, iterations)| RootReport { eps, value: f.eval(eps), residual, iterations })
    };
    let g = report(bisect(|e| f.eval(e) - (delta - r * e), 0.0, 1.0));
    let g_prime = report(bisect(|e| f.eval(e) - 2.0 * (alpha - r * e).powi(2), 0.0, (alpha / r).min(1.0)));
    let power_bound = g.as_ref().map(|g| (1.0 - g.value).powi(n as i32));
    let threshold_bound = g_prime.as_ref().map(|g| (-(n as f64) * g.value).exp());
    let tiny = |x: &Option<RootReport>| x.as_ref().is_none_or(|r| r.value <= f64::EPSILON);
    let vacuous = tiny(&g) && tiny(&g_prime);
    Ok(DecayReport { delta, alpha, r, n, g, g_prime, power_bound, threshold_bound, vacuous })
}

/// Sequence of convex sets `K^(n)` given through its extreme points.
#[derive(Clone, Debug)]
pub enum ConstraintFamily {
    /// States separable across `A^n : B^n`; extreme points are pure products.
    Separable { da: usize, db: usize },
    /// Convex hulls of `n`-fold tensor products of the listed states.
    ProjectivePower { atoms: Vec<DensityMatrix> },
}

impl ConstraintFamily {
    pub fn projective_power(atoms: Vec<DensityMatrix>) -> Result<Self> {
        let first = atoms.first().ok_or_else(|| Error::InvalidParameter("empty atom list".into()))?;
        if atoms.iter().any(|a| a.dims() != first.dims()) {
            return Err(Error::DimensionMismatch("atoms must share dimensions".into()));
        }
        Ok(ConstraintFamily::ProjectivePower { atoms })
    }

    pub fn local_dims(&self) -> Dims {
        match self {
            ConstraintFamily::Separable { da, db } => Dims::new(vec![*da, *db]).expect("positive dims"),
            ConstraintFamily::ProjectivePower { atoms } => atoms[0].dims().clone(),
        }
    }

    /// `f` in `‖ρ − K‖₂ ≥ ε ⇒ F(ρ^{⊗n}, K^(n))² ≤ (1 − f(ε))^n`, where known.
    pub fn fidelity_decay(&self) -> Option<DecayProfile> {
        match self {
            ConstraintFamily::Separable { .. } => Some(DecayProfile::quarter_square()),
            ConstraintFamily::ProjectivePower { .. } => None,
        }
    }

    /// `f(α)` in `h_K(M) ≤ 1−δ ⇒ h_{K^(n)}(M^{(t/n)}) ≤ e^{−n f(α)}` for `t ≥ (1−δ+α)n`.
    pub fn threshold_decay(&self, alpha: f64) -> f64 {
        match self {
            ConstraintFamily::Separable { da, db } => alpha * alpha / (5.0 * (*da * *db) as f64),
            ConstraintFamily::ProjectivePower { .. } => 2.0 * alpha * alpha,
        }
    }

    /// Extreme points of `K^(n)` for the finite family.
    pub fn power_atoms(&self, n: usize, cap: DimCap) -> Result<Vec<CMatrix>> {
        let ConstraintFamily::ProjectivePower { atoms } = self else {
            return Err(Error::InvalidParameter("separable family has no finite atom list".into()));
        };
        cap.check_power(atoms[0].matrix().nrows(), n)?;
        cap.check_power(atoms.len(), n)?;
        let mut out = vec![CMatrix::identity(1, 1)];
        for _ in 0..n {
            out = out.iter().flat_map(|acc| atoms.iter().map(move |a| kron(acc, a.matrix()))).collect();
        }
        Ok(out)
    }

    /// `h_K(M) = max_{σ ∈ K} Tr(Mσ)`; a seesaw lower bound for the separable family.
    pub fn support(&self, m: &HermitianOperator, seed: u64) -> Result<f64> {
        match self {
            ConstraintFamily::ProjectivePower { atoms } => {
                Ok(atoms.iter().map(|a| trace_product(m.matrix(), a.matrix()).re).fold(f64::NEG_INFINITY, f64::max))
            }
            ConstraintFamily::Separable { .. } => Ok(hsep_seesaw(m, &BipartiteCut::two_party(), &SeesawOptions::with_seed(seed))?.value),
        }
    }

    /// `max_{σ ∈ K^(n)} Pr[at least t of n tests (M, I−M) pass]`, by
    /// enumerating atom assignments and outcome strings.
    pub fn threshold_support_enumerated(&self, m: &HermitianOperator, n: usize, t: usize) -> Result<f64> {
        let ConstraintFamily::ProjectivePower { atoms } = self else {
            return Err(Error::InvalidParameter("enumeration needs a finite atom list".into()));
        };
        if n > 16 || atoms.len().pow(n as u32) > 1 << 16 {
            return Err(Error::InvalidParameter("enumeration too large".into()));
        }
        let pass: Vec<f64> = atoms.iter().map(|a| trace_product(m.matrix(), a.matrix()).re).collect();
        let k = atoms.len();
        let mut best = f64::NEG_INFINITY;
        for assign in 0..k.pow(n as u32) {
            let mut choice = Vec::with_capacity(n);
            let mut rest = assign;
            for _ in 0..n {
                choice.push(pass[rest % k]);
                rest /= k;
            }
            let mut total = 0.0;
            for outcome in 0u32..(1 << n) {
                if (outcome.count_ones() as usize) < t {
                    continue;
                }
                let mut prob = 1.0;
                for (i, &h) in choice.iter().enumerate() {
                    prob *= if outcome >> i & 1 == 1 { h } else { 1.0 - h };
                }
                total += prob;
            }
            best = best.max(total);
        }
        Ok(best)
    }

    /// Same quantity from the exact threshold operator and the atom matrices.
    pub fn threshold_support_matrix(&self, m: &HermitianOperator, n: usize, t: usize, cap: DimCap) -> Result<f64> {
        let op = super::threshold_operator(m, n, t, ThresholdVariant::ExactPovm, cap)?;
        Ok(self
            .power_atoms(n, cap)?
            .iter()
            .map(|a| trace_product(op.op.matrix(), a).re)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `F(ρ, K^(n))` for a state on `n` copies: a maximization over the hull
    /// for finite families, Frank–Wolfe over products for the separable one.
    pub fn max_fidelity(&self, rho: &DensityMatrix, n: usize, seed: u64, cap: DimCap) -> Result<f64> {
        match self {
            ConstraintFamily::ProjectivePower { .. } => {
                let atoms = self.power_atoms(n, cap)?;
                Ok(max_fidelity_over_atoms(rho.matrix(), &atoms, HULL_ITERS)?.0)
            }
            ConstraintFamily::Separable { .. } => {
                let opts = FwOptions { seed, ..FwOptions::default() };
                Ok(max_fidelity_to_sep(rho, &BipartiteCut::interleaved(n), &opts)?.value)
            }
        }
    }

    /// Permuting copies of, or tracing one copy out of, an extreme point of
    /// `K^(n)` gives a member of `K^(n)` or `K^(n−1)`. Checked on every atom
    /// of the finite family and on the given product vectors for the
    /// separable one.
    pub fn check_stability(&self, n: usize, samples: &[HermitianOperator], cap: DimCap) -> Result<bool> {
        if n < 2 {
            return Ok(true);
        }
        let local = self.local_dims();
        let dims: Vec<usize> = local.repeat(n).factors().to_vec();
        let g = local.len();
        let swap_first_two: Vec<usize> = (0..n)
            .map(|i| match i {
                0 => 1,
                1 => 0,
                _ => i,
            })
            .flat_map(|c| (0..g).map(move |f| c * g + f))
            .collect();
        let keep_rest: Vec<usize> = (g..n * g).collect();
        match self {
            ConstraintFamily::ProjectivePower { .. } => {
                let full = self.power_atoms(n, cap)?;
                let smaller = self.power_atoms(n - 1, cap)?;
                let member = |x: &CMatrix, list: &[CMatrix]| list.iter().any(|a| (a - x).norm() <= MEMBERSHIP_TOL);
                for a in &full {
                    let (swapped, _) = permute_factors(a, &dims, &swap_first_two)?;
                    let (traced, _) = crate::operator::linalg::partial_trace(a, &dims, &keep_rest)?;
                    if !member(&swapped, &full) || !member(&traced, &smaller) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            ConstraintFamily::Separable { .. } => {
                let cut = BipartiteCut::interleaved(n);
                let smaller_cut = BipartiteCut::interleaved(n - 1);
                for s in samples {
                    let swapped = s.permute_factors(&swap_first_two)?;
                    let traced = s.partial_trace(&keep_rest)?;
                    if !is_product(&swapped, &cut)? || !is_product(&traced, &smaller_cut)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// `ρ = ρ_A ⊗ ρ_B` across the cut, to within the membership tolerance.
fn is_product(op: &HermitianOperator, cut: &BipartiteCut) -> Result<bool> {
    let c = cut.canonical(op)?;
    let dims = [c.da, c.db];
    let (ra, _) = crate::operator::linalg::partial_trace(&c.matrix, &dims, &[0])?;
    let (rb, _) = crate::operator::linalg::partial_trace(&c.matrix, &dims, &[1])?;
    let tr = c.matrix.trace().re;
    Ok((kron(&ra, &rb) * real_scalar(1.0 / tr) - &c.matrix).norm() <= MEMBERSHIP_TOL)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FidelityDecayReport {
    pub n: usize,
    /// `½‖ρ − σ*‖₁` for the closest hull point found.
    pub trace_distance: f64,
    /// `Tr(Mρ) − h_K(M)` for the extracted witness `M`.
    pub eps: f64,
    /// `1 − h_K(M)`.
    pub eta: f64,
    pub alpha: f64,
    /// Passes needed out of `n` for the `+` outcome.
    pub threshold: usize,
    /// `F(ρ^{⊗n}, K^(n))`.
    pub fidelity: f64,
    /// `e^{−n(ε−α)²} + e^{−n f(α)/2}`.
    pub printed_bound: f64,
    /// `√(1−p) + √(1−q)` from exact binomial tails.
    pub exact_bound: f64,
    pub pass: bool,
}

/// `min_w ‖ρ − Σ w_i K_i‖₁` by projected subgradient descent.
fn closest_hull_point(rho: &CMatrix, atoms: &[CMatrix]) -> Result<(CMatrix, f64)> {
    let side = rho.nrows();
    let mix = |w: &[f64]| {
        let mut s = CMatrix::zeros(side, side);
        for (a, &x) in atoms.iter().zip(w) {
            s += a * real_scalar(x);
        }
        s
    };
    let mut w = vec![1.0 / atoms.len() as f64; atoms.len()];
    let mut best = (mix(&w), f64::INFINITY);
    for it in 0..HULL_ITERS {
        let sigma = mix(&w);
        let diff = rho - &sigma;
        let e = crate::operator::spectral::eigh(&diff)?;
        let dist: f64 = e.values.iter().map(|v| v.abs()).sum();
        if dist < best.1 {
            best = (sigma, dist);
        }
        let sign = e.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 });
        let grad: Vec<f64> = atoms.iter().map(|a| -trace_product(&sign, a).re).collect();
        let step = 0.5 / ((it + 1) as f64).sqrt();
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        w = crate::separability::project_simplex(&trial);
    }
    Ok(best)
}

/// Binary-test bound on `F(ρ^{⊗n}, K^(n))` for a finite family, checked
/// against the fidelity maximized over the hull.
pub fn framework_fidelity_from_decay(family: &ConstraintFamily, rho: &DensityMatrix, n: usize, cap: DimCap) -> Result<FidelityDecayReport> {
    let ConstraintFamily::ProjectivePower { atoms } = family else {
        return Err(Error::InvalidParameter("needs a finite atom list".into()));
    };
    if rho.dims() != atoms[0].dims() {
        return Err(Error::DimensionMismatch("state and atoms differ in dimension".into()));
    }
    let atom_mats: Vec<CMatrix> = atoms.iter().map(|a| a.matrix().clone()).collect();
    let (closest, dist) = closest_hull_point(rho.matrix(), &atom_mats)?;
    let witness = positive_part_projector(&(rho.matrix() - &closest), 1e-12)?;
    let h = atom_mats.iter().map(|a| trace_product(&witness, a).re).fold(f64::NEG_INFINITY, f64::max);
    let on_rho = trace_product(&witness, rho.matrix()).re;
    let eps = on_rho - h;
    if eps <= 1e-12 {
        return Err(Error::InsideHull(eps));
    }
    let eta = 1.0 - h;
    // f(α)/2 = (ε − α)², solved on (0, ε).
    let alpha = bisect(|a| family.threshold_decay(a) / 2.0 - (eps - a).powi(2), 0.0, eps).map_or(eps / 2.0, |r| r.0);
    let nf = n as f64;
    let printed_bound = (-nf * (eps - alpha).powi(2)).exp() + (-nf * family.threshold_decay(alpha) / 2.0).exp();
    let threshold = ((1.0 - eta + alpha) * nf - 1e-12).ceil().max(0.0) as usize;
    let miss_rho = 1.0 - binomial_tail_f64(n, on_rho.clamp(0.0, 1.0), threshold)?;
    let pass_family = binomial_tail_f64(n, h.clamp(0.0, 1.0), threshold)?;
    let exact_bound = miss_rho.max(0.0).sqrt() + pass_family.max(0.0).sqrt();
    let rho_n = rho.tensor_power(n);
    cap.check(rho_n.matrix().nrows())?;
    let fidelity = family.max_fidelity(&rho_n, n, 0, cap)?;
    let pass = fidelity <= printed_bound + 1e-9 && fidelity <= exact_bound + 1e-9;
    Ok(FidelityDecayReport {
        n,
        trace_distance: dist / 2.0,
        eps,
        eta,
        alpha,
        threshold,
        fidelity,
        printed_bound,
        exact_bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::random::random_contraction;
    use crate::operator::CVector;
    use crate::rng::stream;

    fn basis(i: usize) -> DensityMatrix {
        DensityMatrix::basis_state(i, Dims::single(2)).unwrap()
    }

    fn plus() -> DensityMatrix {
        let v = CVector::from_element(2, real_scalar(0.5f64.sqrt()));
        DensityMatrix::pure(&v, Dims::single(2)).unwrap()
    }

    #[test]
    fn separable_root_matches_quadratic() {
        let r = framework_decay_from_fidelity(&DecayProfile::quarter_square(), 1.0, 0.5, 0.25, 5).unwrap();
        let g = r.g.unwrap();
        let closed = 2.0 * (1.5f64.sqrt() - 1.0);
        assert!((g.eps - closed).abs() < 1e-10, "{}", g.eps);
        assert!((g.eps - 0.449_489_742_783_178).abs() < 1e-12);
        assert!(g.residual <= ROOT_TOL);
        assert!((g.value - (0.5 - g.eps)).abs() < 1e-12);
        assert!(!r.vacuous);
        assert!(r.g_prime.unwrap().residual <= ROOT_TOL);
    }

    #[test]
    fn tiny_profile_is_vacuous() {
        let f = DecayProfile::Table { points: vec![(0.1, 1e-300), (0.9, 1e-300)] };
        let r = framework_decay_from_fidelity(&f, 1.0, 0.5, 0.25, 5).unwrap();
        assert!(r.vacuous);
    }

    #[test]
    fn table_profile_interpolates() {
        let f = DecayProfile::Table { points: vec![(0.2, 0.1), (0.6, 0.3)] };
        assert!((f.eval(0.4) - 0.2).abs() < 1e-15);
        assert_eq!(f.eval(0.05), 0.1);
        assert_eq!(f.eval(0.95), 0.3);
        assert!(DecayProfile::Table { points: vec![(0.2, 0.3), (0.6, 0.1)] }.validate().is_err());
    }

    #[test]
    fn orthogonal_atom_gives_zero_fidelity() {
        let family = ConstraintFamily::projective_power(vec![basis(0)]).unwrap();
        let r = framework_fidelity_from_decay(&family, &basis(1), 3, DimCap::default()).unwrap();
        assert!(r.fidelity.abs() < 1e-9 && r.pass);
        assert!((r.eps - 1.0).abs() < 1e-9);
    }

    #[test]
    fn plus_state_against_diagonal_hull() {
        let family = ConstraintFamily::projective_power(vec![basis(0), basis(1)]).unwrap();
        let r = framework_fidelity_from_decay(&family, &plus(), 3, DimCap::default()).unwrap();
        // Every diagonal state on three qubits has overlap 1/8 with |+++>.
        assert!((r.fidelity - (1.0f64 / 8.0).sqrt()).abs() < 1e-6, "{}", r.fidelity);
        assert!((r.trace_distance - 0.5).abs() < 1e-3);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn inside_hull_rejected() {
        let family = ConstraintFamily::projective_power(vec![basis(0), basis(1)]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(Dims::single(2));
        assert!(matches!(framework_fidelity_from_decay(&family, &mixed, 2, DimCap::default()), Err(Error::InsideHull(_))));
    }

    #[test]
    fn threshold_support_is_binomial_tail() {
        let family = ConstraintFamily::projective_power(vec![basis(0), plus()]).unwrap();
        let m = random_contraction(Dims::single(2), &mut stream(9, "fw", 0)).unwrap();
        let h = family.support(&m, 0).unwrap();
        for n in 1..=6 {
            for t in 0..=n {
                let e = family.threshold_support_enumerated(&m, n, t).unwrap();
                let b = binomial_tail_f64(n, h, t).unwrap();
                assert!((e - b).abs() < 1e-12, "n={n} t={t}: {e} vs {b}");
                if n <= 3 {
                    let x = family.threshold_support_matrix(&m, n, t, DimCap::default()).unwrap();
                    assert!((x - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn families_are_stable() {
        let family = ConstraintFamily::projective_power(vec![basis(0), plus()]).unwrap();
        assert!(family.check_stability(3, &[], DimCap::default()).unwrap());
        let sep = ConstraintFamily::Separable { da: 2, db: 2 };
        let a = crate::operator::random::haar_pure(4, &mut stream(1, "st", 0));
        let b = crate::operator::random::haar_pure(4, &mut stream(1, "st", 1));
        let v = crate::separability::BipartiteCut::interleaved(2)
            .product_vector(&Dims::uniform(2, 4), &a, &b)
            .unwrap();
        let atom = HermitianOperator::projector(&v, Dims::uniform(2, 4)).unwrap();
        assert!(sep.check_stability(2, &[atom], DimCap::default()).unwrap());
    }
}
