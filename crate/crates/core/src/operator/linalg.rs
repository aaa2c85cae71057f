//! Index-level helpers on raw dense matrices carrying an explicit factor list.
//!
//! Basis strings are big-endian: the first factor is the most significant
//! digit, matching the Kronecker product convention.

use super::{CMatrix, CVector};
use crate::error::{Error, Result};
use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Digits of `index` in the mixed radix given by `dims`.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&j, &d)| acc * d + j)
}

/// Map old basis index -> new basis index when factor `order[i]` becomes
/// the new factor `i`.
pub fn factor_permutation_map(dims: &[usize], order: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    check_order(dims.len(), order)?;
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let mut map = vec![0; total];
    let mut new_digits = vec![0; dims.len()];
    for (old, slot) in map.iter_mut().enumerate() {
        let d = digits(old, dims);
        for (i, &o) in order.iter().enumerate() {
            new_digits[i] = d[o];
        }
        *slot = from_digits(&new_digits, &new_dims);
    }
    Ok((map, new_dims))
}

fn check_order(len: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; len];
    if order.len() != len {
        return Err(Error::InvalidPermutation(order.to_vec()));
    }
    for &o in order {
        if o >= len || seen[o] {
            return Err(Error::InvalidPermutation(order.to_vec()));
        }
        seen[o] = true;
    }
    Ok(())
}

/// `out[map[i], map[j]] = m[i, j]`, i.e. `P m P^T` for the permutation
/// matrix `P` sending basis vector `i` to `map[i]`.
pub fn conjugate_by_map(m: &CMatrix, map: &[usize]) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        let mj = map[j];
        for i in 0..n {
            out[(map[i], mj)] = m[(i, j)];
        }
    }
    out
}

pub fn permute_vector_by_map(v: &CVector, map: &[usize]) -> CVector {
    let mut out = CVector::zeros(v.len());
    for (i, &mi) in map.iter().enumerate() {
        out[mi] = v[i];
    }
    out
}

pub fn permute_factors(m: &CMatrix, dims: &[usize], order: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    let (map, new_dims) = factor_permutation_map(dims, order)?;
    Ok((conjugate_by_map(m, &map), new_dims))
}

pub fn permute_vector_factors(v: &CVector, dims: &[usize], order: &[usize]) -> Result<(CVector, Vec<usize>)> {
    let (map, new_dims) = factor_permutation_map(dims, order)?;
    Ok((permute_vector_by_map(v, &map), new_dims))
}

/// Partial trace keeping the factors listed in `keep` (any order in the
/// input; the output keeps the original factor order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{} vs dims {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange { index: bad, len: dims.len() });
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let keep_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let trace_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    // Bucket every basis index by its traced digits.
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    let mut kd = vec![0; kept.len()];
    let mut td = vec![0; traced.len()];
    for idx in 0..total {
        let d = digits(idx, dims);
        for (slot, &k) in kd.iter_mut().zip(&kept) {
            *slot = d[k];
        }
        for (slot, &t) in td.iter_mut().zip(&traced) {
            *slot = d[t];
        }
        buckets[from_digits(&td, &trace_dims)].push((from_digits(&kd, &keep_dims), idx));
    }
    let mut out = CMatrix::zeros(dk, dk);
    for bucket in &buckets {
        for &(a, i) in bucket {
            for &(b, j) in bucket {
                out[(a, b)] += m[(i, j)];
            }
        }
    }
    Ok((out, keep_dims))
}

/// Outer product `|u><v|`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn real_scalar(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_roundtrip() {
        let dims = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(from_digits(&digits(i, &dims), &dims), i);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let m = identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[2]),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn factor_permutation_swaps_kron_order() {
        let a = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i * 2 + j) as f64, 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 5 * j) as f64, -0.5));
        let (swapped, nd) = permute_factors(&kron(&a, &b), &[2, 3], &[1, 0]).unwrap();
        assert_eq!(nd, vec![3, 2]);
        assert!(frobenius(&(swapped - kron(&b, &a))) < 1e-14);
    }
}
