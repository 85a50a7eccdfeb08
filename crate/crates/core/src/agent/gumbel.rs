//! Masked Gumbel-softmax template selection.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use crate::env::EnvRng;

#[derive(Debug, Clone, PartialEq)]
pub struct GumbelSample {
    /// Relaxed one-hot; exactly zero on masked entries.
    pub soft: Vec<f64>,
    /// Argmax of the perturbed logits.
    pub hard: usize,
    pub noise: Vec<f64>,
}

pub fn gumbel_noise(n: usize, rng: &mut EnvRng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            -libm::log(-libm::log(u))
        })
        .collect()
}

/// `softmax((logits + noise) / tau)` over unmasked entries.
///
/// Panics when the mask has no true entry.
pub fn gumbel_softmax_with_noise(logits: &[f64], mask: &[bool], tau: f64, noise: &[f64]) -> (Vec<f64>, usize) {
    assert!(mask.iter().any(|&m| m), "template mask is all false");
    let z: Vec<f64> = (0..logits.len())
        .map(|i| {
            if mask[i] {
                (logits[i] + noise[i]) / tau
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut hard = usize::MAX;
    for i in 0..z.len() {
        if mask[i] && (hard == usize::MAX || z[i] > z[hard]) {
            hard = i;
        }
    }
    let zmax = z[hard];
    let e: Vec<f64> = z
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { libm::exp(v - zmax) } else { 0.0 })
        .collect();
    let s: f64 = e.iter().sum();
    (e.into_iter().map(|v| v / s).collect(), hard)
}

pub fn gumbel_softmax(logits: &[f64], mask: &[bool], tau: f64, rng: &mut EnvRng) -> GumbelSample {
    let noise = gumbel_noise(logits.len(), rng);
    let (soft, hard) = gumbel_softmax_with_noise(logits, mask, tau, &noise);
    GumbelSample { soft, hard, noise }
}

/// Gradient with respect to the logits given the gradient `dsoft` with
/// respect to the relaxed output, at fixed noise.
pub fn gumbel_softmax_backward(soft: &[f64], tau: f64, dsoft: &[f64]) -> Vec<f64> {
    let dot: f64 = soft.iter().zip(dsoft).map(|(s, d)| s * d).sum();
    soft.iter().zip(dsoft).map(|(s, d)| s * (d - dot) / tau).collect()
}

/// Log-softmax restricted to unmasked entries (masked entries get `-inf`).
pub fn masked_log_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let m = logits
        .iter()
        .zip(mask)
        .filter(|(_, &ok)| ok)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let lse = m + libm::log(
        logits
            .iter()
            .zip(mask)
            .filter(|(_, &ok)| ok)
            .map(|(&l, _)| libm::exp(l - m))
            .sum::<f64>(),
    );
    logits
        .iter()
        .zip(mask)
        .map(|(&l, &ok)| if ok { l - lse } else { f64::NEG_INFINITY })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_unmasked_entry_is_certain() {
        let mut rng = EnvRng::seed_from_u64(1);
        for tau in [0.1, 1.0, 5.0] {
            let g = gumbel_softmax(&[3.0, -1.0, 0.5], &[false, true, false], tau, &mut rng);
            assert_eq!(g.soft, alloc::vec![0.0, 1.0, 0.0]);
            assert_eq!(g.hard, 1);
        }
    }

    #[test]
    fn masked_entries_are_exactly_zero() {
        let mut rng = EnvRng::seed_from_u64(2);
        for _ in 0..100 {
            let g = gumbel_softmax(&[0.0, 10.0, 1.0, 2.0], &[true, false, true, true], 0.5, &mut rng);
            assert_eq!(g.soft[1], 0.0);
            assert_ne!(g.hard, 1);
            assert!((g.soft.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_softmax_normalizes() {
        let l = masked_log_softmax(&[1.0, 2.0, 3.0], &[true, false, true]);
        let p: f64 = l.iter().filter(|v| v.is_finite()).map(|v| libm::exp(*v)).sum();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(l[1], f64::NEG_INFINITY);
    }
}
