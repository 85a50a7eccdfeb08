//! Subgraph matching by backtracking over a connectivity-respecting atom order.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::molgraph::Molecule;

use super::smarts::PatternGraph;

/// Injective assignment of pattern atoms to molecule atoms, with the induced
/// bond images.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MatchMap {
    /// `atoms[p]` is the molecule atom matched by pattern atom `p`.
    pub atoms: Vec<usize>,
    /// `bonds[q]` is the molecule bond matched by pattern bond `q`.
    pub bonds: Vec<usize>,
}

impl MatchMap {
    /// Sorted image atoms followed by sorted image bonds; automorphic
    /// mappings share this key.
    pub fn image_key(&self) -> (Vec<usize>, Vec<usize>) {
        let mut a = self.atoms.clone();
        a.sort_unstable();
        let mut b = self.bonds.clone();
        b.sort_unstable();
        (a, b)
    }
}

/// Visiting order: each atom after the first of its component has an earlier
/// neighbour (`parent`) through which candidates are generated.
struct Plan {
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
}

fn plan(p: &PatternGraph) -> Plan {
    let n = p.atom_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut head = order.len() - 1;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(v, _) in p.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    order.push(v);
                }
            }
        }
    }
    Plan { order, parent }
}

struct Search<'a, F: FnMut(&[usize]) -> bool> {
    p: &'a PatternGraph,
    m: &'a Molecule,
    plan: Plan,
    assign: Vec<usize>,
    used: Vec<bool>,
    visit: F,
}

impl<F: FnMut(&[usize]) -> bool> Search<'_, F> {
    /// Returns `false` once the visitor asks to stop.
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.plan.order.len() {
            return (self.visit)(&self.assign);
        }
        let pa = self.plan.order[depth];
        let candidates: Vec<usize> = match self.plan.parent[pa] {
            Some(par) => self.m.neighbors(self.assign[par]).iter().map(|&(v, _)| v).collect(),
            None => (0..self.m.atom_count()).collect(),
        };
        for ma in candidates {
            if self.used[ma] || !self.p.atoms[pa].matches(self.m, ma) {
                continue;
            }
            let bonds_ok = self.p.neighbors(pa).iter().all(|&(pn, pb)| {
                let img = self.assign[pn];
                if img == usize::MAX {
                    return true;
                }
                match self.m.bond_between(ma, img) {
                    Some(mb) => self.p.bonds[pb].query.matches(self.m.bonds()[mb].order),
                    None => false,
                }
            });
            if !bonds_ok {
                continue;
            }
            self.assign[pa] = ma;
            self.used[ma] = true;
            let go_on = self.extend(depth + 1);
            self.assign[pa] = usize::MAX;
            self.used[ma] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
}

fn search<F: FnMut(&[usize]) -> bool>(p: &PatternGraph, m: &Molecule, visit: F) {
    if p.atom_count() == 0 || p.atom_count() > m.atom_count() {
        return;
    }
    let mut s = Search {
        p,
        m,
        plan: plan(p),
        assign: vec![usize::MAX; p.atom_count()],
        used: vec![false; m.atom_count()],
        visit,
    };
    s.extend(0);
}

fn to_map(p: &PatternGraph, m: &Molecule, atoms: &[usize]) -> MatchMap {
    let bonds = p
        .bonds
        .iter()
        .map(|b| m.bond_between(atoms[b.a], atoms[b.b]).expect("matched bond exists"))
        .collect();
    MatchMap {
        atoms: atoms.to_vec(),
        bonds,
    }
}

/// Every injective mapping, including automorphic repeats, up to `limit`.
/// Order follows the search and is deterministic for a given input.
pub fn all_mappings(p: &PatternGraph, m: &Molecule, limit: usize) -> Vec<MatchMap> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    search(p, m, |atoms| {
        out.push(to_map(p, m, atoms));
        out.len() < limit
    });
    out
}

/// Distinct matches up to `limit`, one representative per image atom and
/// bond set, sorted by that image key.
pub fn find_matches(p: &PatternGraph, m: &Molecule, limit: usize) -> Vec<MatchMap> {
    let mut keys: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut reps: Vec<MatchMap> = Vec::new();
    if limit == 0 {
        return reps;
    }
    search(p, m, |atoms| {
        let map = to_map(p, m, atoms);
        if keys.insert(map.image_key()) {
            reps.push(map);
        }
        keys.len() < limit
    });
    reps.sort_by_cached_key(MatchMap::image_key);
    reps
}

/// Number of distinct matches, counting at most `limit`.
pub fn count_matches(p: &PatternGraph, m: &Molecule, limit: usize) -> usize {
    find_matches(p, m, limit).len()
}

/// `true` iff the pattern occurs exactly once.
pub fn has_unique_match(p: &PatternGraph, m: &Molecule) -> bool {
    count_matches(p, m, 2) == 1
}

/// `true` iff the pattern occurs at least once.
pub fn has_match(p: &PatternGraph, m: &Molecule) -> bool {
    let mut found = false;
    search(p, m, |_| {
        found = true;
        false
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;
    use crate::pattern::parse_smarts;

    fn count(pat: &str, smi: &str) -> usize {
        count_matches(&parse_smarts(pat).unwrap(), &parse_smiles(smi).unwrap(), usize::MAX)
    }

    #[test]
    fn hydroxyl_on_ethanol() {
        assert_eq!(count("[OH]", "CCO"), 1);
        assert!(has_unique_match(&parse_smarts("[OH]").unwrap(), &parse_smiles("CCO").unwrap()));
    }

    #[test]
    fn methyls_on_propane() {
        assert_eq!(count("[CH3]", "CCC"), 2);
        assert!(!has_unique_match(&parse_smarts("[CH3]").unwrap(), &parse_smiles("CCC").unwrap()));
    }

    #[test]
    fn absent_pattern() {
        assert_eq!(count("[NH2]", "c1ccccc1"), 0);
        assert!(!has_unique_match(&parse_smarts("[NH2]").unwrap(), &parse_smiles("c1ccccc1").unwrap()));
    }

    #[test]
    fn automorphic_images_collapse() {
        // six mappings around the ring, one distinct image
        assert_eq!(count("c1ccccc1", "c1ccccc1"), 1);
        assert_eq!(all_mappings(&parse_smarts("c1ccccc1").unwrap(), &parse_smiles("c1ccccc1").unwrap(), 100).len(), 12);
        assert_eq!(count("CC", "CCC"), 2);
    }

    #[test]
    fn bond_queries() {
        assert_eq!(count("C=O", "CC(=O)O"), 1);
        assert_eq!(count("C-O", "CC(=O)O"), 1);
        assert_eq!(count("C~O", "CC(=O)O"), 2);
        assert_eq!(count("cc", "c1ccccc1"), 6);
        assert_eq!(count("c-c", "c1ccccc1"), 0);
        assert_eq!(count("c-c", "c1ccc(cc1)-c1ccccc1"), 1);
        assert_eq!(count("c:c", "c1ccccc1"), 6);
    }

    #[test]
    fn matches_are_sorted_and_repeatable() {
        let p = parse_smarts("[CH3]").unwrap();
        let m = parse_smiles("CC(C)CC").unwrap();
        let a = find_matches(&p, &m, usize::MAX);
        let b = find_matches(&p, &m, usize::MAX);
        assert_eq!(a, b);
        let firsts: Vec<usize> = a.iter().map(|x| x.atoms[0]).collect();
        assert_eq!(firsts, vec![0, 2, 4]);
    }
}
