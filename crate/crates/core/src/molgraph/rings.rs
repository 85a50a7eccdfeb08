//! Ring perception: bridge detection and the smallest set of smallest rings.
//!
//! The SSSR is computed as a minimum cycle basis: Horton candidate cycles
//! (shortest path from a root to both ends of an edge) are sorted by size and
//! then by their sorted atom lists, and accepted greedily when independent over
//! GF(2) in edge space.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::BondOrder;

/// `true` for every bond that lies on at least one cycle.
pub(crate) fn ring_bonds(n: usize, adjacency: &[Vec<(usize, usize)>], n_bonds: usize) -> Vec<bool> {
    // Iterative Tarjan bridge finding.
    let mut in_ring = vec![true; n_bonds];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, parent bond, next neighbour cursor)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent_bond, ref mut cursor)) = stack.last_mut() {
            if *cursor < adjacency[u].len() {
                let (v, bond) = adjacency[u][*cursor];
                *cursor += 1;
                if bond == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bond, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        in_ring[parent_bond] = false;
                    }
                }
            }
        }
    }
    in_ring
}

struct Candidate {
    atoms: Vec<usize>,
    edges: Vec<u64>,
    cycle: Vec<usize>,
}

pub(crate) fn sssr(
    n: usize,
    adjacency: &[Vec<(usize, usize)>],
    bonds: &[(usize, usize, BondOrder)],
) -> Vec<Vec<usize>> {
    let m = bonds.len();
    let components = {
        let mut seen = vec![false; n];
        let mut c = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            c += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in &adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        c
    };
    let nu = m + components - n;
    if nu == 0 {
        return Vec::new();
    }
    let in_ring = ring_bonds(n, adjacency, m);
    let words = m.div_ceil(64);

    let mut candidates: Vec<Candidate> = Vec::new();
    for root in 0..n {
        if !adjacency[root].iter().any(|&(_, b)| in_ring[b]) {
            continue;
        }
        // BFS restricted to ring bonds, neighbours visited in index order.
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        dist[root] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let mut nbrs: Vec<(usize, usize)> = adjacency[u]
                .iter()
                .copied()
                .filter(|&(_, b)| in_ring[b])
                .collect();
            nbrs.sort_unstable();
            for (v, b) in nbrs {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = (u, b);
                    queue.push_back(v);
                }
            }
        }
        let path = |mut v: usize| -> (Vec<usize>, Vec<usize>) {
            let mut atoms = vec![v];
            let mut edges = Vec::new();
            while v != root {
                let (p, b) = parent[v];
                edges.push(b);
                atoms.push(p);
                v = p;
            }
            (atoms, edges)
        };
        for (bi, &(u, v, _)) in bonds.iter().enumerate() {
            if !in_ring[bi] || dist[u] == usize::MAX || dist[v] == usize::MAX {
                continue;
            }
            if parent[u].1 == bi || parent[v].1 == bi {
                continue;
            }
            let (pu_atoms, pu_edges) = path(u);
            let (pv_atoms, pv_edges) = path(v);
            // Paths may only share the root.
            let disjoint = pu_atoms[..pu_atoms.len() - 1]
                .iter()
                .all(|a| !pv_atoms[..pv_atoms.len() - 1].contains(a));
            if !disjoint {
                continue;
            }
            let mut cycle: Vec<usize> = pu_atoms.iter().rev().copied().collect();
            cycle.extend(pv_atoms[..pv_atoms.len() - 1].iter().copied());
            // cycle runs root .. u, v .. (before root); rotate into root-first order
            let mut edge_bits = vec![0u64; words];
            for &e in pu_edges.iter().chain(pv_edges.iter()).chain(core::iter::once(&bi)) {
                edge_bits[e / 64] |= 1 << (e % 64);
            }
            let mut atoms_sorted = cycle.clone();
            atoms_sorted.sort_unstable();
            candidates.push(Candidate {
                atoms: atoms_sorted,
                edges: edge_bits,
                cycle,
            });
        }
    }
    candidates.sort_by(|a, b| {
        a.atoms
            .len()
            .cmp(&b.atoms.len())
            .then_with(|| a.atoms.cmp(&b.atoms))
    });
    candidates.dedup_by(|a, b| a.edges == b.edges);

    // Greedy GF(2) independence test with an incrementally reduced basis.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for cand in candidates {
        let mut v = cand.edges.clone();
        for (pivot, row) in &basis {
            if v[pivot / 64] & (1 << (pivot % 64)) != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= *y;
                }
            }
        }
        let pivot = v
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize);
        if let Some(p) = pivot {
            for (_, row) in basis.iter_mut() {
                if row[p / 64] & (1 << (p % 64)) != 0 {
                    for (x, y) in row.iter_mut().zip(&v) {
                        *x ^= *y;
                    }
                }
            }
            basis.push((p, v));
            rings.push(normalize_cycle(cand.cycle));
            if rings.len() == nu {
                break;
            }
        }
    }
    rings
}

/// Rotates a cycle to start at its smallest atom and walk towards the smaller
/// of its two neighbours.
fn normalize_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let len = cycle.len();
    let (start, _) = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &a)| a)
        .expect("non-empty cycle");
    let next = cycle[(start + 1) % len];
    let prev = cycle[(start + len - 1) % len];
    if next <= prev {
        (0..len).map(|k| cycle[(start + k) % len]).collect()
    } else {
        (0..len).map(|k| cycle[(start + len - k) % len]).collect()
    }
}

#[cfg(test)]
mod tests {
    use crate::molgraph::parse_smiles;

    fn ring_sizes(smiles: &str) -> alloc::vec::Vec<usize> {
        let m = parse_smiles(smiles).unwrap();
        let mut sizes: alloc::vec::Vec<usize> = m.rings().iter().map(|r| r.len()).collect();
        sizes.sort_unstable();
        sizes
    }

    #[test]
    fn benzene_has_one_six_ring() {
        assert_eq!(ring_sizes("c1ccccc1"), [6]);
    }

    #[test]
    fn naphthalene_has_two_six_rings() {
        assert_eq!(ring_sizes("c1ccc2ccccc2c1"), [6, 6]);
    }

    #[test]
    fn acyclic_chain_has_no_rings() {
        assert!(ring_sizes("CCCCO").is_empty());
    }

    #[test]
    fn bicyclic_and_spiro_systems() {
        assert_eq!(ring_sizes("C1CC2CCC1C2"), [5, 5]);
        assert_eq!(ring_sizes("C1CCC2CCCC2C1"), [5, 6]);
        assert_eq!(ring_sizes("C1CCC2(CC1)CCC2"), [4, 6]);
        assert_eq!(ring_sizes("C12C3C4C1C5C2C3C45"), [4, 4, 4, 4, 4]);
    }

    #[test]
    fn ring_cycles_are_closed_walks() {
        let m = parse_smiles("c1ccc2c(c1)CCN2").unwrap();
        for ring in m.rings() {
            for k in 0..ring.len() {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                assert!(m.bond_between(a, b).is_some());
            }
        }
    }
}
