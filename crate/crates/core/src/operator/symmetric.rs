//! Symmetric-subspace combinatorics, permutation averages and twirls.

use super::linalg::{conjugate_by_map, frobenius, real_scalar};
use super::permutation::PermutationSpec;
use super::{CMatrix, CVector, DimCap, Dims, HermitianOperator};
use crate::error::{Error, Result};
use itertools::Itertools;
use nalgebra::DMatrix;

/// Largest copy count for which permutation averages are summed explicitly.
pub const EXPLICIT_AVERAGE_MAX: usize = 6;
/// Frobenius change at which the adjacent-swap iterations stop.
pub const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITERS: usize = 100_000;

/// `binom(n, k)` as `u128`; panics on overflow, which no supported size reaches.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of `Sym^n(C^d)`.
pub fn sym_dimension(n: usize, d: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    binomial(n + d - 1, n)
}

/// A real vector with equal amplitudes on a list of basis indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub amplitude: f64,
}

impl SparseVector {
    pub fn to_dense(&self, dim: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        for &i in &self.indices {
            v[i] = real_scalar(self.amplitude);
        }
        v
    }

    /// `<self|v>`.
    pub fn dot(&self, v: &CVector) -> num_complex::Complex64 {
        self.indices.iter().map(|&i| v[i]).sum::<num_complex::Complex64>() * self.amplitude
    }
}

/// Advances `v` to the next lexicographic arrangement; false when `v` was last.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All distinct strings whose letters form the sorted multiset `letters`.
pub(crate) fn type_class(letters: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = letters.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Sorted multisets of size `n` drawn from `0..d`, lexicographic.
pub fn multisets(n: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..d).combinations_with_replacement(n)
}

/// Normalized occupation-number basis of `Sym^n(C^d)`, one vector per
/// multiset in lexicographic order.
pub fn occupation_basis(n: usize, d: usize) -> Vec<SparseVector> {
    let dims = vec![d; n];
    multisets(n, d)
        .map(|ms| {
            let class = type_class(&ms);
            let amplitude = 1.0 / (class.len() as f64).sqrt();
            let mut indices: Vec<usize> = class.iter().map(|s| super::linalg::from_digits(s, &dims)).collect();
            indices.sort_unstable();
            SparseVector { indices, amplitude }
        })
        .collect()
}

/// Isometry whose columns are the occupation basis vectors.
pub fn sym_isometry(n: usize, d: usize, cap: DimCap) -> Result<CMatrix> {
    let side = cap.check_power(d, n)?;
    let basis = occupation_basis(n, d);
    let mut v = CMatrix::zeros(side, basis.len());
    for (c, e) in basis.iter().enumerate() {
        for &i in &e.indices {
            v[(i, c)] = real_scalar(e.amplitude);
        }
    }
    Ok(v)
}

/// Nonzero entries `((row, col), value)` of the symmetric projector, sorted.
pub type Entries = Vec<((usize, usize), f64)>;

/// Projector entries from `Σ_s |e_s><e_s|` over the occupation basis.
pub fn sym_entries_by_occupation(n: usize, d: usize) -> Entries {
    let mut out = Vec::new();
    for e in occupation_basis(n, d) {
        let w = e.amplitude * e.amplitude;
        for &i in &e.indices {
            for &j in &e.indices {
                out.push(((i, j), w));
            }
        }
    }
    out.sort_unstable_by_key(|e| e.0);
    out
}

/// Projector entries from the permutation average: explicit sum over `S_n`
/// for small `n`, otherwise the fixed point of alternating adjacent-swap
/// symmetrizations restricted to each invariant block of basis strings.
pub fn sym_entries_by_average(n: usize, d: usize) -> Entries {
    let dims = vec![d; n];
    let mut out = Vec::new();
    if n <= EXPLICIT_AVERAGE_MAX {
        let total = d.pow(n as u32);
        let weight = 1.0 / (1..=n).product::<usize>() as f64;
        let mut acc = std::collections::HashMap::new();
        for perm in PermutationSpec::all(n) {
            let map = perm.index_map(d);
            for (col, &row) in map.iter().enumerate().take(total) {
                *acc.entry((row, col)).or_insert(0.0) += weight;
            }
        }
        out.extend(acc);
    } else {
        // Each orbit of basis strings under S_n is invariant, so the average
        // acts blockwise; iterate the swap product inside each block.
        for ms in multisets(n, d) {
            let class = type_class(&ms);
            let index: std::collections::HashMap<&[usize], usize> =
                class.iter().enumerate().map(|(k, s)| (s.as_slice(), k)).collect();
            let c = class.len();
            let mut step = DMatrix::<f64>::identity(c, c);
            for i in 0..n - 1 {
                let mut swapped = DMatrix::<f64>::zeros(c, c);
                for (k, s) in class.iter().enumerate() {
                    let mut t = s.clone();
                    t.swap(i, i + 1);
                    swapped[(index[t.as_slice()], k)] = 1.0;
                }
                let half = (DMatrix::<f64>::identity(c, c) + swapped) * 0.5;
                step = half * step;
            }
            let block = fixed_point_by_squaring(step);
            let global: Vec<usize> = class.iter().map(|s| super::linalg::from_digits(s, &dims)).collect();
            for a in 0..c {
                for b in 0..c {
                    if block[(a, b)].abs() > 1e-15 {
                        out.push(((global[a], global[b]), block[(a, b)]));
                    }
                }
            }
        }
    }
    out.sort_unstable_by_key(|e| e.0);
    out
}

/// Iterates `X ← X·X` from the one-sweep product until the Frobenius change
/// drops below [`FIXED_POINT_TOL`].
fn fixed_point_by_squaring(mut x: DMatrix<f64>) -> DMatrix<f64> {
    for _ in 0..200 {
        let next = &x * &x;
        let change = (&next - &x).norm();
        x = next;
        if change <= FIXED_POINT_TOL {
            break;
        }
    }
    x
}

/// Frobenius distance between two sorted entry lists.
pub fn entries_distance(a: &Entries, b: &Entries) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let ka = a.get(i).map(|e| e.0);
        let kb = b.get(j).map(|e| e.0);
        match (ka, kb) {
            (Some(x), Some(y)) if x == y => {
                acc += (a[i].1 - b[j].1).powi(2);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                acc += a[i].1.powi(2);
                i += 1;
            }
            (Some(_), None) => {
                acc += a[i].1.powi(2);
                i += 1;
            }
            _ => {
                acc += b[j].1.powi(2);
                j += 1;
            }
        }
    }
    acc.sqrt()
}

fn scatter(entries: &Entries, side: usize) -> CMatrix {
    let mut m = CMatrix::zeros(side, side);
    for &((i, j), v) in entries {
        m[(i, j)] += real_scalar(v);
    }
    m
}

/// Orthogonal projector onto `Sym^n(C^d)` from the occupation basis.
pub fn sym_projector_by_occupation(n: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    let side = cap.check_power(d, n)?;
    Ok(HermitianOperator::from_parts(scatter(&sym_entries_by_occupation(n, d), side), Dims::uniform(d, n)))
}

/// Orthogonal projector onto `Sym^n(C^d)` as the average of all `U_π`.
pub fn sym_projector_by_average(n: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    let side = cap.check_power(d, n)?;
    Ok(HermitianOperator::from_parts(scatter(&sym_entries_by_average(n, d), side), Dims::uniform(d, n)))
}

/// Orthogonal projector onto `Sym^n(C^d)`, cross-checked against the
/// permutation average.
pub fn sym_projector(n: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    let side = cap.check_power(d, n)?;
    let occ = sym_entries_by_occupation(n, d);
    let avg = sym_entries_by_average(n, d);
    let dist = entries_distance(&occ, &avg);
    if dist > 1e-10 {
        return Err(Error::ConstructionMismatch(dist));
    }
    Ok(HermitianOperator::from_parts(scatter(&occ, side), Dims::uniform(d, n)))
}

/// `∫ |ψ><ψ|^{⊗m} dψ = P_Sym / binom(m+d-1, m)`.
pub fn haar_moment_operator(m: usize, d: usize, cap: DimCap) -> Result<HermitianOperator> {
    let p = sym_projector(m, d, cap)?;
    Ok(p.scale(1.0 / sym_dimension(m, d) as f64))
}

/// Orthogonal projection of `v` onto `Sym^n(C^d)`.
pub fn project_symmetric(v: &CVector, n: usize, d: usize) -> Result<CVector> {
    if v.len() != d.pow(n as u32) {
        return Err(Error::DimensionMismatch(format!("vector of length {} vs {d}^{n}", v.len())));
    }
    let mut out = CVector::zeros(v.len());
    for e in occupation_basis(n, d) {
        let c = e.dot(v) * e.amplitude;
        for &i in &e.indices {
            out[i] += c;
        }
    }
    Ok(out)
}

/// `max_π ‖U_π v − v‖` over adjacent transpositions (which generate `S_n`).
pub fn symmetry_defect(v: &CVector, n: usize, d: usize) -> f64 {
    (0..n.saturating_sub(1))
        .map(|i| {
            let map = PermutationSpec::transposition(n, i, i + 1).expect("in range").index_map(d);
            map.iter().enumerate().map(|(k, &mk)| (v[mk] - v[k]).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

fn average_over_group_maps(x: &CMatrix, maps: &[Vec<usize>]) -> CMatrix {
    let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
    for map in maps {
        acc += conjugate_by_map(x, map);
    }
    acc / real_scalar(maps.len() as f64)
}

/// Alternating `x ← (x + S x S)/2` over the generating swaps until the
/// Frobenius change is below [`FIXED_POINT_TOL`].
fn average_by_alternation(x: &CMatrix, swaps: &[Vec<usize>]) -> Result<CMatrix> {
    let mut cur = x.clone();
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let mut change = 0.0;
        for map in swaps {
            let next = (&cur + conjugate_by_map(&cur, map)) * real_scalar(0.5);
            change += frobenius(&(&next - &cur));
            cur = next;
        }
        if change <= FIXED_POINT_TOL {
            return Ok(cur);
        }
    }
    Err(Error::NotConverged(FIXED_POINT_MAX_ITERS))
}

/// Average of `x` over permutations of `q` equal trailing blocks of factors
/// `block`, where `prefix` leading factors stay in place.
fn block_twirl(x: &CMatrix, prefix: &[usize], block: &[usize], q: usize) -> Result<CMatrix> {
    let k = block.len();
    let p = prefix.len();
    let dims: Vec<usize> = prefix.iter().copied().chain(block.iter().copied().cycle().take(k * q)).collect();
    let order_for = |perm: &PermutationSpec| -> Vec<usize> {
        (0..p).chain(perm.mapping().iter().flat_map(|&g| (0..k).map(move |f| p + g * k + f))).collect()
    };
    let map_for = |perm: &PermutationSpec| {
        super::linalg::factor_permutation_map(&dims, &order_for(perm)).expect("valid order").0
    };
    if q <= EXPLICIT_AVERAGE_MAX {
        let maps: Vec<Vec<usize>> = PermutationSpec::all(q).map(|p| map_for(&p)).collect();
        Ok(average_over_group_maps(x, &maps))
    } else {
        let swaps: Vec<Vec<usize>> =
            (0..q - 1).map(|i| map_for(&PermutationSpec::transposition(q, i, i + 1).expect("in range"))).collect();
        average_by_alternation(x, &swaps)
    }
}

/// `(1/n!) Σ_π U_π x U_π†` where `U_π` permutes `n` equal groups of factors.
pub fn permutation_twirl(x: &HermitianOperator, n: usize) -> Result<HermitianOperator> {
    let block = x.dims().uniform_groups(n)?;
    let m = block_twirl(x.matrix(), &[], block.factors(), n)?;
    Ok(HermitianOperator::from_parts(m, x.dims().clone()))
}

/// Average over the `q!` permutations of the B factors of an operator on
/// `A ⊗ B^{⊗q}`, where A is the first factor and the remaining factors
/// form `q` equal groups.
pub fn b_side_twirl(m: &HermitianOperator, q: usize) -> Result<HermitianOperator> {
    let f = m.dims().factors();
    if f.is_empty() {
        return Err(Error::NonUniformGrouping { groups: q, dims: f.to_vec() });
    }
    let rest = Dims::from(f[1..].to_vec()).uniform_groups(q).map_err(|_| Error::NonUniformGrouping {
        groups: q,
        dims: f.to_vec(),
    })?;
    let out = block_twirl(m.matrix(), &f[..1], rest.factors(), q)?;
    Ok(HermitianOperator::from_parts(out, m.dims().clone()))
}
