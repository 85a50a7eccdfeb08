//! Canonical atom ranking by iterative neighbourhood refinement.

use alloc::vec;
use alloc::vec::Vec;

use super::graph::Molecule;

/// Invariant tuple: element, charge, heavy degree, hydrogens, ring flag,
/// aromatic flag.
fn initial_invariant(m: &Molecule, i: usize) -> (u8, i8, usize, u8, bool, bool) {
    let a = m.atom(i);
    (
        a.element.atomic_number(),
        a.formal_charge,
        m.degree(i),
        a.implicit_h,
        a.in_ring,
        a.aromatic,
    )
}

fn dense_rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for w in 0..order.len() {
        if w > 0 && keys[order[w]] != keys[order[w - 1]] {
            r += 1;
        }
        ranks[order[w]] = r;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |&r| r + 1)
}

fn refine(m: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..m.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(u8, usize)> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (m.bonds()[b].order.code(), ranks[j]))
                    .collect();
                nbrs.sort_unstable();
                (ranks[i], nbrs)
            })
            .collect();
        let next = dense_rank(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

/// Returns a rank per atom, all distinct, invariant under atom renumbering up
/// to automorphism.
///
/// Ties left after refinement are broken by promoting one atom of the lowest
/// tied class and refining again.
pub fn canonical_ranks(m: &Molecule) -> Vec<usize> {
    let n = m.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let initial: Vec<_> = (0..n).map(|i| initial_invariant(m, i)).collect();
    let mut ranks = refine(m, dense_rank(&initial));
    while class_count(&ranks) < n {
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).expect("a tied class exists");
        let chosen = (0..n).find(|&i| ranks[i] == tied).expect("member of tied class");
        let split: Vec<(usize, bool)> = (0..n).map(|i| (ranks[i], i != chosen)).collect();
        ranks = refine(m, dense_rank(&split));
    }
    ranks
}
