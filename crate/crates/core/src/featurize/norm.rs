use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::FeaturizeError;

/// Per-dimension min and max of a reference corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    /// Fits min/max over raw descriptor rows.
    pub fn fit(names: &[&str], rows: &[Vec<f64>]) -> Result<NormStats, FeaturizeError> {
        let first = rows.first().ok_or(FeaturizeError::EmptyCorpus)?;
        let d = first.len();
        if names.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(FeaturizeError::Dimension);
        }
        let mut min = first.clone();
        let mut max = first.clone();
        for r in rows {
            for k in 0..d {
                min[k] = min[k].min(r[k]);
                max[k] = max[k].max(r[k]);
            }
        }
        Ok(NormStats {
            names: names.iter().map(|s| String::from(*s)).collect(),
            min,
            max,
        })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `true` where the fitted range is a single point.
    pub fn degenerate(&self) -> Vec<bool> {
        self.min.iter().zip(&self.max).map(|(a, b)| a == b).collect()
    }

    /// Affine map onto [-1, 1] with clipping; degenerate dimensions map to 0.
    pub fn normalize(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi == lo {
                    0.0
                } else {
                    (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
                }
            })
            .collect()
    }

    /// Text form: one `name<TAB>min<TAB>max` line per descriptor, floats in
    /// round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# descriptor\tmin\tmax\n");
        for k in 0..self.dim() {
            let _ = writeln!(out, "{}\t{:?}\t{:?}", self.names[k], self.min[k], self.max[k]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<NormStats, FeaturizeError> {
        let mut s = NormStats {
            names: Vec::new(),
            min: Vec::new(),
            max: Vec::new(),
        };
        for (k, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = t.split('\t').collect();
            let bad = || FeaturizeError::Format(format!("line {}: expected name, min, max", k + 1));
            if cols.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = cols[1].parse().map_err(|_| bad())?;
            let hi: f64 = cols[2].parse().map_err(|_| bad())?;
            if !(lo <= hi) {
                return Err(FeaturizeError::Format(format!("line {}: min exceeds max", k + 1)));
            }
            s.names.push(String::from(cols[0]));
            s.min.push(lo);
            s.max.push(hi);
        }
        Ok(s)
    }
}
