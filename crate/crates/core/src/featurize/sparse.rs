use alloc::vec::Vec;

use super::morgan::{Fingerprint, FP_BITS};

/// Sparse real vector with ascending indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub dim: usize,
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn from_dense(x: &[f64]) -> SparseVec {
        let mut s = SparseVec {
            dim: x.len(),
            ..SparseVec::default()
        };
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                s.idx.push(i as u32);
                s.val.push(v);
            }
        }
        s
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            out[i as usize] = v;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| (i as usize, v))
    }
}

impl From<&Fingerprint> for SparseVec {
    fn from(fp: &Fingerprint) -> SparseVec {
        let idx: Vec<u32> = fp.on_bits().into_iter().map(|b| b as u32).collect();
        SparseVec {
            dim: FP_BITS,
            val: alloc::vec![1.0; idx.len()],
            idx,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip() {
        let x = [0.0, 1.5, 0.0, -2.0];
        let s = SparseVec::from_dense(&x);
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense(), x);
    }
}
