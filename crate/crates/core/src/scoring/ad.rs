//! k-nearest-neighbour applicability domain.
//!
//! A query is inside the domain when its mean distance to the `K` closest
//! training rows does not exceed `mean + Z * sd` of the same statistic taken
//! over the training rows, each measured against the others.

use alloc::vec::Vec;

pub const DEFAULT_Z: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdError {
    #[error("applicability domain needs more than K={k} training rows, got {n}")]
    TooFewRows { n: usize, k: usize },
    #[error("row {row} has dimension {got}, expected {expected}")]
    Dimension { row: usize, got: usize, expected: usize },
}

#[derive(Debug, Clone)]
pub struct AdModel {
    rows: Vec<Vec<f64>>,
    k: usize,
    z: f64,
    mean: f64,
    sd: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Mean of the `k` smallest values; `d` is reordered.
fn mean_of_smallest(d: &mut [f64], k: usize) -> f64 {
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    d[..k].iter().sum::<f64>() / k as f64
}

impl AdModel {
    /// Fits with `K = round(sqrt(n))` and the default `Z`.
    pub fn fit(rows: Vec<Vec<f64>>) -> Result<AdModel, AdError> {
        let k = (libm::round(libm::sqrt(rows.len() as f64)) as usize).max(1);
        AdModel::fit_with(rows, k, DEFAULT_Z)
    }

    pub fn fit_with(rows: Vec<Vec<f64>>, k: usize, z: f64) -> Result<AdModel, AdError> {
        let n = rows.len();
        if k == 0 || n <= k {
            return Err(AdError::TooFewRows { n, k });
        }
        let dim = rows[0].len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(AdError::Dimension {
                row,
                got: r.len(),
                expected: dim,
            });
        }
        let mut stats = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n - 1);
        for i in 0..n {
            d.clear();
            d.extend((0..n).filter(|&j| j != i).map(|j| distance(&rows[i], &rows[j])));
            stats.push(mean_of_smallest(&mut d, k));
        }
        let mean = stats.iter().sum::<f64>() / n as f64;
        let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
        Ok(AdModel {
            rows,
            k,
            z,
            mean,
            sd: libm::sqrt(var),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> f64 {
        self.mean + self.z * self.sd
    }

    /// Mean distance from `x` to its `K` nearest training rows.
    pub fn distance_of(&self, x: &[f64]) -> f64 {
        let mut d: Vec<f64> = self.rows.iter().map(|r| distance(x, r)).collect();
        mean_of_smallest(&mut d, self.k)
    }

    pub fn inside(&self, x: &[f64]) -> bool {
        self.distance_of(x) <= self.threshold()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_points() {
        let rows = vec![vec![1.0, 2.0]; 10];
        let m = AdModel::fit(rows).unwrap();
        assert_eq!(m.k(), 3);
        assert_eq!(m.threshold(), 0.0);
        assert!(m.inside(&[1.0, 2.0]));
        assert!(!m.inside(&[5.0, 2.0]));
    }

    #[test]
    fn too_few_rows() {
        assert_eq!(
            AdModel::fit_with(vec![vec![0.0]; 3], 3, 1.5).unwrap_err(),
            AdError::TooFewRows { n: 3, k: 3 }
        );
    }

    #[test]
    fn line_statistic_by_hand() {
        // points 0..5 on a line with K=1: nearest-neighbour distance is 1 for
        // every row, so the threshold is exactly 1
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let m = AdModel::fit_with(rows, 1, 1.5).unwrap();
        assert_eq!(m.threshold(), 1.0);
        assert!(m.inside(&[5.0]));
        assert!(!m.inside(&[5.5]));
    }
}
