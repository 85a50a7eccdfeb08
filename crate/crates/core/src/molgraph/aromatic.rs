//! Kekulization and Hückel aromaticity perception.
//!
//! π-electron contributions per ring atom (kekulé form):
//!
//! | situation                                         | electrons |
//! |---------------------------------------------------|-----------|
//! | double bond that is a ring bond                   | 1         |
//! | exocyclic double bond from C to N, O or S          | 0         |
//! | no double bond, neutral N/P with valence 3        | 2         |
//! | no double bond, neutral O/S with valence 2        | 2         |
//! | no double bond, anionic C or N                    | 2         |
//! | no double bond, cationic C or neutral trivalent B | 0         |
//!
//! Anything else (sp³ centres, triple bonds, cumulated doubles, more than
//! three connections) disqualifies the ring.

use alloc::vec;
use alloc::vec::Vec;

use super::element::Element;
use super::graph::{BondOrder, BuildAtom};
use super::MolError;

/// Assigns integer orders to every bond, resolving aromatic bonds into an
/// alternating single/double pattern.
pub(crate) fn kekulize(
    atoms: &[BuildAtom],
    hydrogens: &[u8],
    bonds: &[(usize, usize, BondOrder)],
    adjacency: &[Vec<(usize, usize)>],
) -> Result<Vec<u8>, MolError> {
    let n = atoms.len();
    let mut orders: Vec<u8> = bonds
        .iter()
        .map(|&(_, _, o)| match o {
            BondOrder::Aromatic => 1,
            other => other.valence_units(),
        })
        .collect();
    if !bonds.iter().any(|b| b.2 == BondOrder::Aromatic) {
        return Ok(orders);
    }

    let mut needs = vec![false; n];
    for i in 0..n {
        if !adjacency[i]
            .iter()
            .any(|&(_, b)| bonds[b].2 == BondOrder::Aromatic)
        {
            continue;
        }
        let used: u8 = adjacency[i].iter().map(|&(_, b)| orders[b]).sum::<u8>() + hydrogens[i];
        let atom = &atoms[i];
        match atom.element.valence_at_least(atom.charge, used) {
            Some(v) if v == used + 1 => needs[i] = true,
            Some(v) if v == used => {}
            // Radical-like or overfull aromatic atoms cannot be assigned.
            _ => return Err(MolError::Kekulize),
        }
    }

    let mut mate = vec![usize::MAX; n];
    let candidate_bonds: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            adjacency[i]
                .iter()
                .copied()
                .filter(|&(j, b)| bonds[b].2 == BondOrder::Aromatic && needs[i] && needs[j])
                .collect()
        })
        .collect();
    let mut steps = 0usize;
    if !match_all(&needs, &candidate_bonds, &mut mate, &mut steps) {
        return Err(MolError::Kekulize);
    }
    for i in 0..n {
        let j = mate[i];
        if j != usize::MAX && i < j {
            let b = candidate_bonds[i]
                .iter()
                .find(|&&(k, _)| k == j)
                .map(|&(_, b)| b)
                .expect("mate is a candidate neighbour");
            orders[b] = 2;
        }
    }
    Ok(orders)
}

/// Backtracking perfect matching over the atoms that need a π partner,
/// always expanding the most constrained atom first.
fn match_all(
    needs: &[bool],
    candidates: &[Vec<(usize, usize)>],
    mate: &mut [usize],
    steps: &mut usize,
) -> bool {
    *steps += 1;
    if *steps > 200_000 {
        return false;
    }
    let mut best: Option<(usize, usize)> = None;
    for i in 0..needs.len() {
        if !needs[i] || mate[i] != usize::MAX {
            continue;
        }
        let free = candidates[i]
            .iter()
            .filter(|&&(j, _)| mate[j] == usize::MAX)
            .count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((i, free));
        }
    }
    let Some((i, _)) = best else {
        return true;
    };
    for &(j, _) in &candidates[i] {
        if mate[j] != usize::MAX {
            continue;
        }
        mate[i] = j;
        mate[j] = i;
        if match_all(needs, candidates, mate, steps) {
            return true;
        }
        mate[i] = usize::MAX;
        mate[j] = usize::MAX;
    }
    false
}

pub(crate) struct Perceived {
    pub atom: Vec<bool>,
    pub bond: Vec<bool>,
}

fn pi_electrons(
    i: usize,
    atoms: &[BuildAtom],
    hydrogens: &[u8],
    adjacency: &[Vec<(usize, usize)>],
    kekule: &[u8],
    ring_bond: &[bool],
) -> Option<u8> {
    let atom = &atoms[i];
    if !atom.element.can_be_aromatic() {
        return None;
    }
    let connections = adjacency[i].len() + hydrogens[i] as usize;
    if connections > 3 {
        return None;
    }
    let mut doubles = adjacency[i].iter().filter(|&&(_, b)| kekule[b] == 2);
    let first_double = doubles.next();
    if doubles.next().is_some() || adjacency[i].iter().any(|&(_, b)| kekule[b] == 3) {
        return None;
    }
    let used: u8 = adjacency[i].iter().map(|&(_, b)| kekule[b]).sum::<u8>() + hydrogens[i];
    match first_double {
        Some(&(j, b)) => {
            if ring_bond[b] {
                Some(1)
            } else if atom.element == Element::C
                && matches!(atoms[j].element, Element::N | Element::O | Element::S)
            {
                Some(0)
            } else {
                None
            }
        }
        None => match (atom.element, atom.charge, used) {
            (Element::N, 0, 3) | (Element::P, 0, 3) => Some(2),
            (Element::O, 0, 2) | (Element::S, 0, 2) => Some(2),
            (Element::C, -1, 3) | (Element::N, -1, 2) => Some(2),
            (Element::C, 1, 3) | (Element::B, 0, 3) => Some(0),
            _ => None,
        },
    }
}

pub(crate) fn perceive(
    atoms: &[BuildAtom],
    hydrogens: &[u8],
    bonds: &[(usize, usize, BondOrder)],
    adjacency: &[Vec<(usize, usize)>],
    kekule: &[u8],
    rings: &[Vec<usize>],
) -> Perceived {
    let n = atoms.len();
    let ring_bond = super::rings::ring_bonds(n, adjacency, bonds.len());
    let electrons: Vec<Option<u8>> = (0..n)
        .map(|i| pi_electrons(i, atoms, hydrogens, adjacency, kekule, &ring_bond))
        .collect();
    let mut atom = vec![false; n];
    let mut bond = vec![false; bonds.len()];
    for ring in rings {
        let mut total = 0u32;
        let mut ok = true;
        for &a in ring {
            match electrons[a] {
                Some(e) => total += e as u32,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || total < 2 || (total - 2) % 4 != 0 {
            continue;
        }
        for k in 0..ring.len() {
            let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
            atom[a] = true;
            if let Some(&(_, bi)) = adjacency[a].iter().find(|&&(x, _)| x == b) {
                bond[bi] = true;
            }
        }
    }
    Perceived { atom, bond }
}
