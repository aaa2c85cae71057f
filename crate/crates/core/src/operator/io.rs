//! JSON and little-endian binary operator containers.
//!
//! Binary layout: `u32` factor count, one `u64` per factor, then the matrix
//! entries in column-major order as `(re, im)` pairs of `f64`.

use super::{CMatrix, Dims, HermitianOperator};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// `{dims, re, im}` with row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl OperatorJson {
    pub fn from_matrix(m: &CMatrix, dims: &Dims) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { dims: dims.factors().to_vec(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<(CMatrix, Dims)> {
        let dims = Dims::new(self.dims.clone())?;
        let n = dims.total();
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == n && a.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::DimensionMismatch(format!("entries do not form a {n}x{n} matrix")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        Ok((m, dims))
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let (m, dims) = self.to_matrix()?;
        HermitianOperator::new(m, dims)
    }
}

impl HermitianOperator {
    pub fn to_json(&self) -> OperatorJson {
        OperatorJson::from_matrix(self.matrix(), self.dims())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str::<OperatorJson>(s)?.to_operator()
    }
}

pub fn write_binary(m: &CMatrix, dims: &Dims, mut w: impl Write) -> Result<()> {
    if m.nrows() != dims.total() || !m.is_square() {
        return Err(Error::DimensionMismatch("matrix does not match dims".into()));
    }
    w.write_all(&(dims.len() as u32).to_le_bytes())?;
    for &d in dims.factors() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for z in m.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<(CMatrix, Dims)> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        factors.push(usize::try_from(u64::from_le_bytes(b8)).map_err(|_| Error::InvalidParameter("dimension".into()))?);
    }
    let dims = Dims::new(factors)?;
    let n = dims.total();
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        data.push(Complex64::new(re, f64::from_le_bytes(b8)));
    }
    Ok((CMatrix::from_vec(n, n, data), dims))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HermitianOperator {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.25), Complex64::new(0.5, 0.25), Complex64::new(-2.0, 0.0)],
        );
        HermitianOperator::new(m, Dims::single(2)).unwrap()
    }

    #[test]
    fn json_roundtrip() {
        let a = sample();
        let s = serde_json::to_string(&a.to_json()).unwrap();
        let b = HermitianOperator::from_json_str(&s).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(s.contains("\"dims\":[2]"));
    }

    #[test]
    fn binary_roundtrip() {
        let a = sample();
        let mut buf = Vec::new();
        write_binary(a.matrix(), a.dims(), &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 8 + 4 * 16);
        let (m, d) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(&m, a.matrix());
        assert_eq!(&d, a.dims());
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(HermitianOperator::from_json_str(r#"{"dims":[2],"re":[[1]],"im":[[0]]}"#).is_err());
    }
}
