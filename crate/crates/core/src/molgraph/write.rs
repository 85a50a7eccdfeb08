use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::canon::canonical_ranks;
use super::graph::{implicit_h_for, BondOrder, Molecule};

/// Writes the canonical SMILES of a molecule.
///
/// Traversal starts at the lowest-ranked atom of each component and visits
/// neighbours in rank order, so the string depends only on the graph.
pub fn write_smiles(m: &Molecule) -> String {
    let ranks = canonical_ranks(m);
    write_with_ranks(m, &ranks)
}

pub(crate) fn write_with_ranks(m: &Molecule, ranks: &[usize]) -> String {
    let n = m.atom_count();
    let mut out = String::new();
    if n == 0 {
        return out;
    }
    let sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v: Vec<(usize, usize)> = m.neighbors(i).to_vec();
            v.sort_by_key(|&(j, _)| ranks[j]);
            v
        })
        .collect();

    // First pass: spanning forest and ring-closure bonds.
    let mut visited = vec![false; n];
    let mut parent_bond = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closure = vec![false; m.bond_count()];
    let mut roots = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    for &root in &by_rank {
        if visited[root] {
            continue;
        }
        roots.push(root);
        let mut stack = vec![(root, 0usize)];
        visited[root] = true;
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            if *cursor >= sorted_nbrs[u].len() {
                stack.pop();
                continue;
            }
            let (v, b) = sorted_nbrs[u][*cursor];
            *cursor += 1;
            if b == parent_bond[u] || closure[b] {
                continue;
            }
            if visited[v] {
                closure[b] = true;
            } else {
                visited[v] = true;
                parent_bond[v] = b;
                children[u].push(v);
                stack.push((v, 0));
            }
        }
    }

    // Second pass: emission.
    let mut ring_digit = vec![usize::MAX; m.bond_count()];
    let mut digits_in_use: Vec<bool> = Vec::new();
    let mut emitted = vec![false; n];
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        // Explicit stack of actions keeps deep chains off the call stack.
        enum Action {
            Atom(usize),
            Open,
            Close,
        }
        let mut actions = vec![Action::Atom(root)];
        while let Some(action) = actions.pop() {
            match action {
                Action::Open => out.push('('),
                Action::Close => out.push(')'),
                Action::Atom(u) => {
                    if parent_bond[u] != usize::MAX {
                        let b = parent_bond[u];
                        push_bond(&mut out, m, b);
                    }
                    push_atom(&mut out, m, u);
                    emitted[u] = true;
                    // ring closures: those closing first, then opening in rank order
                    let mut closing: Vec<(usize, usize)> = Vec::new();
                    let mut opening: Vec<usize> = Vec::new();
                    for &(v, b) in &sorted_nbrs[u] {
                        if !closure[b] {
                            continue;
                        }
                        if emitted[v] && ring_digit[b] != usize::MAX {
                            closing.push((ring_digit[b], b));
                        } else if !emitted[v] {
                            opening.push(b);
                        }
                    }
                    closing.sort_unstable();
                    for (d, _) in &closing {
                        push_digit(&mut out, *d);
                        digits_in_use[*d] = false;
                    }
                    for b in opening {
                        let d = match digits_in_use.iter().position(|used| !used) {
                            Some(d) => d,
                            None => {
                                digits_in_use.push(false);
                                digits_in_use.len() - 1
                            }
                        };
                        digits_in_use[d] = true;
                        ring_digit[b] = d;
                        push_bond(&mut out, m, b);
                        push_digit(&mut out, d);
                    }
                    let kids = &children[u];
                    // push in reverse so the first child is emitted first
                    for (idx, &child) in kids.iter().enumerate().rev() {
                        if idx + 1 < kids.len() {
                            actions.push(Action::Close);
                            actions.push(Action::Atom(child));
                            actions.push(Action::Open);
                        } else {
                            actions.push(Action::Atom(child));
                        }
                    }
                }
            }
        }
    }
    out
}

fn push_digit(out: &mut String, d: usize) {
    // digits are allocated from 1
    let d = d + 1;
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

fn push_bond(out: &mut String, m: &Molecule, b: usize) {
    let bond = &m.bonds()[b];
    let both_aromatic = m.atom(bond.a).aromatic && m.atom(bond.b).aromatic;
    match bond.order {
        BondOrder::Single if both_aromatic => out.push('-'),
        BondOrder::Single => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic => {}
    }
}

fn push_atom(out: &mut String, m: &Molecule, i: usize) {
    let atom = m.atom(i);
    let symbol = atom.element.symbol();
    let used: u8 = m
        .neighbors(i)
        .iter()
        .map(|&(_, b)| m.bonds()[b].order.valence_units())
        .sum();
    let organic = atom.element.is_organic_subset()
        && atom.formal_charge == 0
        && (!atom.aromatic || atom.element.can_be_aromatic())
        && implicit_h_for(atom.element, 0, atom.aromatic, used) == atom.implicit_h;
    let mut sym_buf = [0u8; 2];
    let sym: &str = if atom.aromatic {
        let bytes = symbol.as_bytes();
        sym_buf[0] = bytes[0].to_ascii_lowercase();
        core::str::from_utf8(&sym_buf[..1]).unwrap_or(symbol)
    } else {
        symbol
    };
    if organic {
        out.push_str(sym);
        return;
    }
    out.push('[');
    out.push_str(sym);
    match atom.implicit_h {
        0 => {}
        1 => out.push('H'),
        h => {
            let _ = write!(out, "H{h}");
        }
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => {
            let _ = write!(out, "+{q}");
        }
        q => {
            let _ = write!(out, "-{}", -q);
        }
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use crate::molgraph::{parse_smiles, write_smiles};

    fn canon(s: &str) -> alloc::string::String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn same_molecule_different_traversal() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C1=CC=CC=C1"), canon("c1ccccc1"));
        assert_eq!(canon("OC(=O)c1ccccc1"), canon("c1ccc(cc1)C(O)=O"));
    }

    #[test]
    fn distinct_molecules_differ() {
        assert_ne!(canon("CCO"), canon("COC"));
        assert_ne!(canon("Cc1ccccc1C"), canon("Cc1cccc(C)c1"));
    }

    #[test]
    fn writes_brackets_when_needed() {
        assert_eq!(canon("[NH4+]"), "[NH4+]");
        assert!(canon("c1cc[nH]c1").contains("[nH]"));
        assert!(canon("C[N+](=O)[O-]").contains("[O-]"));
    }

    #[test]
    fn rewrites_are_fixed_points() {
        for s in [
            "CC(=O)Nc1ccc(O)cc1",
            "c1ccc2c(c1)-c1ccccc1C2",
            "O=C(O)C1CCN(C(=O)OC(C)(C)C)CC1",
            "C1CC2CCC1C2",
            "Brc1cccc2ccccc12",
            "C%10CCCCC%10",
        ] {
            let once = canon(s);
            assert_eq!(canon(&once), once, "{s}");
        }
    }
}
