//! Permutations of tensor factors and their unitaries.

use super::linalg::{factor_permutation_map, ONE};
use super::CMatrix;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A bijection on `{0, .., n-1}`. The associated unitary sends
/// `|j_0 .. j_{n-1}>` to `|j_{π(0)} .. j_{π(n-1)}>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationSpec {
    mapping: Vec<usize>,
}

impl PermutationSpec {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::InvalidPermutation(mapping));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    /// Swaps positions `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
        }
        let mut m: Vec<usize> = (0..n).collect();
        m.swap(i, j);
        Ok(Self { mapping: m })
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// The permutation whose unitary equals `U_self · U_other`, namely
    /// `i ↦ other(self(i))`.
    pub fn compose(&self, other: &PermutationSpec) -> Result<PermutationSpec> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutations on {} and {} points",
                self.len(),
                other.len()
            )));
        }
        Ok(Self { mapping: self.mapping.iter().map(|&i| other.mapping[i]).collect() })
    }

    pub fn inverse(&self) -> PermutationSpec {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// All permutations of `n` points in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = PermutationSpec> {
        use itertools::Itertools;
        (0..n).permutations(n).map(|mapping| PermutationSpec { mapping })
    }

    /// Basis-index map of the unitary on `(C^d)^{⊗n}`.
    pub fn index_map(&self, local_dim: usize) -> Vec<usize> {
        let dims = vec![local_dim; self.len()];
        factor_permutation_map(&dims, &self.mapping).expect("validated permutation").0
    }

    /// Index map when each position carries a block of factors `block`.
    pub fn block_index_map(&self, block: &[usize]) -> Vec<usize> {
        let k = block.len();
        let dims: Vec<usize> = block.iter().copied().cycle().take(k * self.len()).collect();
        let order: Vec<usize> = self.mapping.iter().flat_map(|&p| (0..k).map(move |f| p * k + f)).collect();
        factor_permutation_map(&dims, &order).expect("validated permutation").0
    }
}

impl TryFrom<Vec<usize>> for PermutationSpec {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PermutationSpec> for Vec<usize> {
    fn from(p: PermutationSpec) -> Self {
        p.mapping
    }
}

/// The permutation unitary on `(C^local_dim)^{⊗n}` as a dense 0/1 matrix.
pub fn permutation_unitary(perm: &PermutationSpec, local_dim: usize) -> CMatrix {
    let map = perm.index_map(local_dim);
    let n = map.len();
    let mut u = CMatrix::zeros(n, n);
    for (col, &row) in map.iter().enumerate() {
        u[(row, col)] = ONE;
    }
    u
}
