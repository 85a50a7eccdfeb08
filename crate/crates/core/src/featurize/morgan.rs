//! Morgan-style circular fingerprints.
//!
//! Radius-0 identifiers hash the atom invariant (element, charge, heavy
//! degree, hydrogens, ring flag, aromatic flag). Each further round hashes the
//! previous identifier with the sorted list of (bond code, neighbour
//! identifier) pairs. An environment is identified by the set of bonds it
//! covers; rounds that add no new bond set are dropped, and among atoms that
//! reach the same bond set in one round the smaller identifier is kept.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::hash::{combine, hash_words};
use crate::molgraph::Molecule;

pub const FP_BITS: usize = 1024;
pub const FP_RADIUS: usize = 2;
const WORDS: usize = FP_BITS / 64;

/// One retained circular environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Environment {
    pub id: u64,
    pub radius: usize,
    pub center: usize,
}

/// Fixed-length bit fingerprint of [`FP_BITS`] bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: [u64; WORDS],
}

impl Default for Fingerprint {
    fn default() -> Self {
        Fingerprint { words: [0; WORDS] }
    }
}

impl Fingerprint {
    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn on_bits(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (k, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                out.push(k * 64 + t);
                w &= w - 1;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        FP_BITS
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    /// Dense 0/1 vector of length [`FP_BITS`].
    pub fn to_dense(&self) -> Vec<f64> {
        (0..FP_BITS).map(|b| if self.get(b) { 1.0 } else { 0.0 }).collect()
    }
}

fn atom_invariant(m: &Molecule, i: usize) -> u64 {
    let a = m.atom(i);
    hash_words(&[
        a.element.atomic_number() as u64,
        a.formal_charge as i64 as u64,
        m.degree(i) as u64,
        a.implicit_h as u64,
        a.in_ring as u64,
        a.aromatic as u64,
    ])
}

/// All retained environments up to `radius`, ordered by (radius, center).
pub fn environments(m: &Molecule, radius: usize) -> Vec<Environment> {
    let n = m.atom_count();
    let words = m.bond_count().div_ceil(64).max(1);
    let mut ids: Vec<u64> = (0..n).map(|i| atom_invariant(m, i)).collect();
    let mut out: Vec<Environment> = (0..n)
        .map(|i| Environment {
            id: ids[i],
            radius: 0,
            center: i,
        })
        .collect();
    let mut covered: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    let mut seen_sets: BTreeSet<Vec<u64>> = BTreeSet::new();
    // the empty set stands for every radius-0 environment
    seen_sets.insert(vec![0u64; words]);

    for r in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_cov = Vec::with_capacity(n);
        for i in 0..n {
            let mut pairs: Vec<(u64, u64)> = m
                .neighbors(i)
                .iter()
                .map(|&(j, b)| (m.bonds()[b].order.code() as u64, ids[j]))
                .collect();
            pairs.sort_unstable();
            let mut h = combine(r as u64, ids[i]);
            for (code, id) in pairs {
                h = combine(combine(h, code), id);
            }
            next_ids.push(h);
            let mut cov = covered[i].clone();
            for &(j, b) in m.neighbors(i) {
                cov[b / 64] |= 1 << (b % 64);
                for (x, y) in cov.iter_mut().zip(&covered[j]) {
                    *x |= *y;
                }
            }
            next_cov.push(cov);
        }
        let mut candidates: Vec<(Vec<u64>, u64, usize)> = (0..n)
            .filter(|&i| next_cov[i] != covered[i])
            .map(|i| (next_cov[i].clone(), next_ids[i], i))
            .collect();
        candidates.sort();
        for (cov, id, center) in candidates {
            if seen_sets.insert(cov) {
                out.push(Environment { id, radius: r, center });
            }
        }
        ids = next_ids;
        covered = next_cov;
    }
    out
}

/// Bit fingerprint with radius [`FP_RADIUS`] folded to [`FP_BITS`] bits.
pub fn morgan_fingerprint(m: &Molecule) -> Fingerprint {
    morgan_fingerprint_with(m, FP_RADIUS)
}

pub fn morgan_fingerprint_with(m: &Molecule, radius: usize) -> Fingerprint {
    let mut fp = Fingerprint::default();
    for env in environments(m, radius) {
        fp.set((env.id % FP_BITS as u64) as usize);
    }
    fp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn methane_has_one_environment() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(environments(&m, 2).len(), 1);
        assert_eq!(morgan_fingerprint(&m).count_ones(), 1);
    }

    #[test]
    fn ethanol_environments_by_hand() {
        // radius 0: CH3, CH2, OH; radius 1: each atom with its bonds, all three
        // bond sets distinct; radius 2 reaches the whole molecule, which the
        // central carbon already covered at radius 1.
        let m = parse_smiles("CCO").unwrap();
        let envs = environments(&m, 2);
        assert_eq!(envs.len(), 6);
        assert_eq!(envs.iter().filter(|e| e.radius == 0).count(), 3);
        assert_eq!(envs.iter().filter(|e| e.radius == 1).count(), 3);
        assert_eq!(morgan_fingerprint(&m).count_ones(), 6);
    }

    #[test]
    fn benzene_environments() {
        // all six atoms identical at every radius, but bond sets differ per
        // centre, so each radius contributes one identifier six times
        let m = parse_smiles("c1ccccc1").unwrap();
        let ids: BTreeSet<u64> = environments(&m, 2).iter().map(|e| e.id).collect();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn on_bits_round_trip() {
        let mut fp = Fingerprint::default();
        for b in [0, 63, 64, 1023] {
            fp.set(b);
        }
        assert_eq!(fp.on_bits(), vec![0, 63, 64, 1023]);
        assert_eq!(fp.to_dense().iter().sum::<f64>(), 4.0);
    }
}
