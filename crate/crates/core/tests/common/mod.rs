//! Helpers shared by the integration tests: bundled-corpus loading and
//! small independent oracles (graph isomorphism, exhaustive matching).

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use pgfs_core::bundled;
use pgfs_core::env::{BuildingBlockIndex, EnvRng};
use pgfs_core::featurize::Descriptor;
use pgfs_core::molgraph::{parse_smiles, Molecule};
use pgfs_core::pattern::{parse_template_file, PatternGraph, ReactionTemplate};
use rand::seq::SliceRandom;

pub fn bundled_smiles() -> Vec<String> {
    bundled::BLOCKS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect()
}

pub fn bundled_molecules() -> Vec<Molecule> {
    bundled_smiles()
        .iter()
        .map(|s| parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}")))
        .collect()
}

pub fn bundled_templates() -> Vec<ReactionTemplate> {
    parse_template_file(bundled::TEMPLATES).expect("bundled templates parse")
}

pub fn bundled_index() -> Arc<BuildingBlockIndex> {
    static INDEX: OnceLock<Arc<BuildingBlockIndex>> = OnceLock::new();
    INDEX
        .get_or_init(|| {
            let (idx, _) =
                BuildingBlockIndex::build(bundled_molecules(), bundled_templates(), &Descriptor::ALL, None).unwrap();
            Arc::new(idx)
        })
        .clone()
}

pub fn random_order(n: usize, rng: &mut EnvRng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

fn same_atom(a: &Molecule, i: usize, b: &Molecule, j: usize) -> bool {
    let (x, y) = (a.atom(i), b.atom(j));
    x.element == y.element
        && x.formal_charge == y.formal_charge
        && x.aromatic == y.aromatic
        && x.implicit_h == y.implicit_h
        && a.degree(i) == b.degree(j)
}

/// Labelled-graph isomorphism by plain backtracking in atom index order.
/// Atoms must agree on element, charge, aromaticity, hydrogens and degree;
/// bonds on presence and order.
pub fn isomorphic(a: &Molecule, b: &Molecule) -> bool {
    if a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count() {
        return false;
    }
    let n = a.atom_count();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(a: &Molecule, b: &Molecule, i: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        if i == map.len() {
            return true;
        }
        for j in 0..b.atom_count() {
            if used[j] || !same_atom(a, i, b, j) {
                continue;
            }
            let consistent = (0..i).all(|p| {
                let ab = a.bond_between(i, p).map(|k| a.bonds()[k].order);
                let bb = b.bond_between(j, map[p]).map(|k| b.bonds()[k].order);
                ab == bb
            });
            if consistent {
                map[i] = j;
                used[j] = true;
                if extend(a, b, i + 1, map, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        map[i] = usize::MAX;
        false
    }

    extend(a, b, 0, &mut map, &mut used)
}

/// Every injective assignment of pattern atoms to molecule atoms that
/// satisfies atom and bond queries, found by index-order enumeration.
pub fn brute_force_mappings(p: &PatternGraph, m: &Molecule) -> Vec<Vec<usize>> {
    let n = p.atom_count();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);

    fn go(p: &PatternGraph, m: &Molecule, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == p.atom_count() {
            out.push(cur.clone());
            return;
        }
        for j in 0..m.atom_count() {
            if cur.contains(&j) || !p.atoms[i].matches(m, j) {
                continue;
            }
            let ok = (0..i).all(|q| match p.bond_between(i, q) {
                None => true,
                Some(pb) => match m.bond_between(j, cur[q]) {
                    Some(mb) => p.bonds[pb].query.matches(m.bonds()[mb].order),
                    None => false,
                },
            });
            if ok {
                cur.push(j);
                go(p, m, cur, out);
                cur.pop();
            }
        }
    }

    go(p, m, &mut cur, &mut out);
    out
}

/// Distinct matches: mappings sharing their atom image and bond image count once.
pub fn brute_force_match_count(p: &PatternGraph, m: &Molecule) -> usize {
    let mut keys = BTreeSet::new();
    for map in brute_force_mappings(p, m) {
        let mut atoms = map.clone();
        atoms.sort_unstable();
        let mut bonds: Vec<usize> = p
            .bonds
            .iter()
            .map(|b| m.bond_between(map[b.a], map[b.b]).unwrap())
            .collect();
        bonds.sort_unstable();
        keys.insert((atoms, bonds));
    }
    keys.len()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
