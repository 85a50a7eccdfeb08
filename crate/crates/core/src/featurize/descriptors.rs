//! Continuous molecular descriptors used as the action space.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::molgraph::{BondOrder, Element, Molecule};
use crate::scoring::crippen;

/// Registry of available descriptors, in their fixed vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Descriptor {
    MolWeight,
    HeavyAtoms,
    Rings,
    AromaticRings,
    HBondDonors,
    HBondAcceptors,
    RotatableBonds,
    FractionCsp3,
    CrippenLogP,
    CrippenMR,
    Tpsa,
    BalabanJ,
    BondComplexity,
    LargestRing,
    HeteroatomFraction,
    NetCharge,
}

impl Descriptor {
    pub const ALL: [Descriptor; 16] = [
        Descriptor::MolWeight,
        Descriptor::HeavyAtoms,
        Descriptor::Rings,
        Descriptor::AromaticRings,
        Descriptor::HBondDonors,
        Descriptor::HBondAcceptors,
        Descriptor::RotatableBonds,
        Descriptor::FractionCsp3,
        Descriptor::CrippenLogP,
        Descriptor::CrippenMR,
        Descriptor::Tpsa,
        Descriptor::BalabanJ,
        Descriptor::BondComplexity,
        Descriptor::LargestRing,
        Descriptor::HeteroatomFraction,
        Descriptor::NetCharge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::MolWeight => "mol_weight",
            Descriptor::HeavyAtoms => "heavy_atoms",
            Descriptor::Rings => "rings",
            Descriptor::AromaticRings => "aromatic_rings",
            Descriptor::HBondDonors => "hbd",
            Descriptor::HBondAcceptors => "hba",
            Descriptor::RotatableBonds => "rotatable_bonds",
            Descriptor::FractionCsp3 => "fraction_csp3",
            Descriptor::CrippenLogP => "crippen_logp",
            Descriptor::CrippenMR => "crippen_mr",
            Descriptor::Tpsa => "tpsa",
            Descriptor::BalabanJ => "balaban_j",
            Descriptor::BondComplexity => "bond_complexity",
            Descriptor::LargestRing => "largest_ring",
            Descriptor::HeteroatomFraction => "heteroatom_fraction",
            Descriptor::NetCharge => "net_charge",
        }
    }

    pub fn from_name(name: &str) -> Option<Descriptor> {
        Self::ALL.iter().copied().find(|d| d.name() == name)
    }

    pub fn compute(self, m: &Molecule) -> f64 {
        match self {
            Descriptor::MolWeight => mol_weight(m),
            Descriptor::HeavyAtoms => m.heavy_atom_count() as f64,
            Descriptor::Rings => m.rings().len() as f64,
            Descriptor::AromaticRings => aromatic_ring_count(m) as f64,
            Descriptor::HBondDonors => h_bond_donors(m) as f64,
            Descriptor::HBondAcceptors => h_bond_acceptors(m) as f64,
            Descriptor::RotatableBonds => rotatable_bonds(m) as f64,
            Descriptor::FractionCsp3 => fraction_csp3(m),
            Descriptor::CrippenLogP => crippen::crippen_logp(m),
            Descriptor::CrippenMR => crippen::crippen_mr(m),
            Descriptor::Tpsa => tpsa(m),
            Descriptor::BalabanJ => balaban_j(m),
            Descriptor::BondComplexity => bond_complexity(m),
            Descriptor::LargestRing => m.largest_ring_size() as f64,
            Descriptor::HeteroatomFraction => heteroatom_fraction(m),
            Descriptor::NetCharge => m.atoms().iter().map(|a| a.formal_charge as f64).sum(),
        }
    }
}

/// Raw descriptor vector over the full registry.
pub fn descriptor_vector(m: &Molecule) -> Vec<f64> {
    descriptor_vector_for(m, &Descriptor::ALL)
}

pub fn descriptor_vector_for(m: &Molecule, set: &[Descriptor]) -> Vec<f64> {
    // logP and MR share one typing pass
    let cr = if set.iter().any(|d| matches!(d, Descriptor::CrippenLogP | Descriptor::CrippenMR)) {
        Some(crippen::crippen(m))
    } else {
        None
    };
    set.iter()
        .map(|&d| match (d, cr) {
            (Descriptor::CrippenLogP, Some(c)) => c.logp,
            (Descriptor::CrippenMR, Some(c)) => c.mr,
            _ => d.compute(m),
        })
        .collect()
}

pub fn mol_weight(m: &Molecule) -> f64 {
    m.atoms()
        .iter()
        .map(|a| a.element.mass() + a.implicit_h as f64 * Element::H.mass())
        .sum()
}

pub fn aromatic_ring_count(m: &Molecule) -> usize {
    m.rings()
        .iter()
        .filter(|r| r.iter().all(|&a| m.atom(a).aromatic))
        .count()
}

pub fn h_bond_donors(m: &Molecule) -> usize {
    m.atoms()
        .iter()
        .filter(|a| matches!(a.element, Element::N | Element::O) && a.implicit_h > 0)
        .count()
}

/// True for an aliphatic nitrogen single-bonded to a carbonyl carbon.
fn is_amide_nitrogen(m: &Molecule, i: usize) -> bool {
    let a = m.atom(i);
    a.element == Element::N
        && !a.aromatic
        && m.neighbors(i).iter().any(|&(c, b)| {
            m.bonds()[b].order == BondOrder::Single && m.atom(c).element == Element::C && has_double_o(m, c)
        })
}

fn has_double_o(m: &Molecule, c: usize) -> bool {
    m.neighbors(c)
        .iter()
        .any(|&(o, b)| m.bonds()[b].order == BondOrder::Double && m.atom(o).element == Element::O)
}

/// N and O atoms that keep an available lone pair.
///
/// Excluded: aromatic nitrogen bearing hydrogen or three ring/substituent
/// connections (pyrrole type), amide nitrogen, and cationic nitrogen.
pub fn h_bond_acceptors(m: &Molecule) -> usize {
    (0..m.atom_count())
        .filter(|&i| {
            let a = m.atom(i);
            match a.element {
                Element::O => true,
                Element::N => {
                    if a.formal_charge > 0 {
                        return false;
                    }
                    if a.aromatic && (a.implicit_h > 0 || m.degree(i) == 3) {
                        return false;
                    }
                    !is_amide_nitrogen(m, i)
                }
                _ => false,
            }
        })
        .count()
}

/// Acyclic single bonds between non-terminal heavy atoms, amide C–N excluded.
pub fn rotatable_bonds(m: &Molecule) -> usize {
    m.bonds()
        .iter()
        .enumerate()
        .filter(|&(bi, b)| {
            if b.order != BondOrder::Single || m.bond_in_ring(bi) {
                return false;
            }
            if m.atom(b.a).element == Element::H || m.atom(b.b).element == Element::H {
                return false;
            }
            if m.degree(b.a) < 2 || m.degree(b.b) < 2 {
                return false;
            }
            let amide = |c: usize, n: usize| {
                m.atom(c).element == Element::C && m.atom(n).element == Element::N && has_double_o(m, c)
            };
            !(amide(b.a, b.b) || amide(b.b, b.a))
        })
        .count()
}

pub fn fraction_csp3(m: &Molecule) -> f64 {
    let mut carbons = 0usize;
    let mut sp3 = 0usize;
    for i in 0..m.atom_count() {
        let a = m.atom(i);
        if a.element != Element::C {
            continue;
        }
        carbons += 1;
        if !a.aromatic && m.neighbors(i).iter().all(|&(_, b)| m.bonds()[b].order == BondOrder::Single) {
            sp3 += 1;
        }
    }
    if carbons == 0 {
        0.0
    } else {
        sp3 as f64 / carbons as f64
    }
}

fn in_three_ring(m: &Molecule, i: usize) -> bool {
    m.rings().iter().any(|r| r.len() == 3 && r.contains(&i))
}

/// Topological polar surface area from N and O group contributions.
pub fn tpsa(m: &Molecule) -> f64 {
    let mut total = 0.0;
    for i in 0..m.atom_count() {
        let a = m.atom(i);
        if !matches!(a.element, Element::N | Element::O) {
            continue;
        }
        let (mut single, mut double, mut triple, mut arom) = (0u8, 0u8, 0u8, 0u8);
        for &(_, b) in m.neighbors(i) {
            match m.bonds()[b].order {
                BondOrder::Single => single += 1,
                BondOrder::Double => double += 1,
                BondOrder::Triple => triple += 1,
                BondOrder::Aromatic => arom += 1,
            }
        }
        let h = a.implicit_h;
        let q = a.formal_charge;
        let ring3 = in_three_ring(m, i);
        let v = match a.element {
            Element::N => match (q, h, single, double, triple, arom) {
                (0, 0, 3, 0, 0, 0) if ring3 => 3.01,
                (0, 0, 3, 0, 0, 0) => 3.24,
                (0, 0, 1, 1, 0, 0) => 12.36,
                (0, 0, 0, 0, 1, 0) => 23.79,
                (0, 0, 1, 2, 0, 0) => 11.68,
                (0, 0, 0, 1, 1, 0) => 13.60,
                (0, 1, 2, 0, 0, 0) if ring3 => 21.94,
                (0, 1, 2, 0, 0, 0) => 12.03,
                (0, 1, 0, 1, 0, 0) => 23.85,
                (0, 2, 1, 0, 0, 0) => 26.02,
                (1, 0, 4, 0, 0, 0) => 0.00,
                (1, 0, 2, 1, 0, 0) => 3.01,
                (1, 0, 1, 0, 1, 0) => 4.36,
                (1, 1, 3, 0, 0, 0) => 4.44,
                (1, 1, 1, 1, 0, 0) => 13.97,
                (1, 2, 2, 0, 0, 0) => 16.61,
                (1, 2, 0, 1, 0, 0) => 25.59,
                (1, 3, 1, 0, 0, 0) => 27.64,
                (0, 0, 0, 0, 0, 2) => 12.89,
                (0, 0, 0, 0, 0, 3) => 4.41,
                (0, 0, 1, 0, 0, 2) => 4.93,
                (0, 0, 0, 1, 0, 2) => 8.39,
                (0, 1, 0, 0, 0, 2) => 15.79,
                (1, 0, 0, 0, 0, 3) => 4.10,
                (1, 0, 1, 0, 0, 2) => 3.88,
                (1, 1, 0, 0, 0, 2) => 14.14,
                _ => {
                    let heavy = (single + double + triple + arom) as f64;
                    (30.5 - 8.2 * heavy + 1.5 * h as f64).max(0.0)
                }
            },
            _ => match (q, h, single, double, arom) {
                (0, 0, 2, 0, 0) if ring3 => 12.53,
                (0, 0, 2, 0, 0) => 9.23,
                (0, 0, 0, 1, 0) => 17.07,
                (0, 1, 1, 0, 0) => 20.23,
                (-1, 0, 1, 0, 0) => 23.06,
                (0, 0, 0, 0, 2) => 13.14,
                _ => {
                    let heavy = (single + double + arom) as f64;
                    (28.5 - 8.6 * heavy + 1.5 * h as f64).max(0.0)
                }
            },
        };
        total += v;
    }
    total
}

fn distance_sums(m: &Molecule) -> Vec<f64> {
    let n = m.atom_count();
    let mut sums = vec![0.0; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let mut total = 0usize;
        while let Some(u) = queue.pop_front() {
            total += dist[u];
            for &(v, _) in m.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        sums[s] = total as f64;
    }
    sums
}

/// Balaban's J: `q / (mu + 1) * sum over bonds of (s_i s_j)^(-1/2)` with `q`
/// the bond count, `mu` the cyclomatic number and `s` the distance sums.
pub fn balaban_j(m: &Molecule) -> f64 {
    let q = m.bond_count();
    if q == 0 {
        return 0.0;
    }
    let mu = q + m.components() - m.atom_count();
    let s = distance_sums(m);
    let sum: f64 = m
        .bonds()
        .iter()
        .map(|b| 1.0 / libm::sqrt(s[b.a] * s[b.b]))
        .sum();
    q as f64 / (mu as f64 + 1.0) * sum
}

/// Bond-type complexity: `ln(1 + B + B ln B - sum_k c_k ln c_k)`, where `B` is
/// the bond count and `c_k` counts bonds of type k (endpoint elements plus
/// order). The bracketed entropy term is `B` times the Shannon entropy of the
/// bond-type distribution.
pub fn bond_complexity(m: &Molecule) -> f64 {
    let b = m.bond_count();
    if b == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<(u8, u8, u8), usize> = BTreeMap::new();
    for bond in m.bonds() {
        let (x, y) = (m.atom(bond.a).element.atomic_number(), m.atom(bond.b).element.atomic_number());
        *counts.entry((x.min(y), x.max(y), bond.order.code())).or_default() += 1;
    }
    let bf = b as f64;
    let entropy = bf * libm::log(bf) - counts.values().map(|&c| c as f64 * libm::log(c as f64)).sum::<f64>();
    libm::log(1.0 + bf + entropy)
}

pub fn heteroatom_fraction(m: &Molecule) -> f64 {
    let heavy = m.heavy_atom_count();
    if heavy == 0 {
        return 0.0;
    }
    let hetero = m
        .atoms()
        .iter()
        .filter(|a| !matches!(a.element, Element::C | Element::H))
        .count();
    hetero as f64 / heavy as f64
}
