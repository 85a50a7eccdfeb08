use alloc::vec;
use alloc::vec::Vec;

use super::aromatic;
use super::element::Element;
use super::rings;
use super::MolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer contribution to valence, counting an aromatic bond as one.
    pub fn valence_units(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    /// Stable small code used by hashing and canonical ranking.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    /// Number of attached hydrogens not present as graph nodes.
    pub implicit_h: u8,
    pub in_ring: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// An immutable, validated molecular graph.
///
/// Construction goes through [`MolBuilder::build`], which assigns hydrogens,
/// checks valences, kekulizes and perceives aromaticity, so every `Molecule`
/// in circulation satisfies the valence and aromaticity invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    kekule: Vec<u8>,
    rings: Vec<Vec<usize>>,
    ring_bond: Vec<bool>,
}

impl Molecule {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Count of non-hydrogen atoms.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    /// `(neighbor, bond index)` pairs for an atom.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, bi)| bi)
    }

    /// Kekulé bond order (1, 2 or 3) of a bond; aromatic bonds resolve to the
    /// alternating assignment found at construction.
    pub fn kekule_order(&self, bond: usize) -> u8 {
        self.kekule[bond]
    }

    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    /// Smallest set of smallest rings as ordered atom cycles.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    /// Sum of kekulé bond orders plus hydrogens.
    pub fn total_valence(&self, i: usize) -> u8 {
        let bonds: u8 = self.adjacency[i]
            .iter()
            .map(|&(_, b)| self.kekule[b])
            .sum();
        bonds + self.atoms[i].implicit_h
    }

    pub fn total_h(&self, i: usize) -> u8 {
        self.atoms[i].implicit_h
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        component_labels(self.atoms.len(), &self.adjacency).1
    }

    /// Per-atom component label and the number of components.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        component_labels(self.atoms.len(), &self.adjacency)
    }

    /// Size of the largest SSSR ring, 0 when acyclic.
    pub fn largest_ring_size(&self) -> usize {
        self.rings.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// Rebuilds the molecule with atoms reordered: new atom `k` is old atom
    /// `order[k]`. Bonds are emitted in the order of their first new endpoint.
    pub fn permuted(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len());
        let mut inverse = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let mut builder = MolBuilder::new();
        for &old in order {
            let a = self.atoms[old];
            builder.add_atom(BuildAtom {
                element: a.element,
                charge: a.formal_charge,
                aromatic: a.aromatic,
                hydrogens: Some(a.implicit_h),
            });
        }
        let mut bonds: Vec<(usize, usize, BondOrder)> = self
            .bonds
            .iter()
            .map(|b| {
                let (x, y) = (inverse[b.a], inverse[b.b]);
                (x.min(y), x.max(y), b.order)
            })
            .collect();
        bonds.sort_unstable();
        for (a, b, o) in bonds {
            builder.add_bond(a, b, o);
        }
        builder
            .build()
            .expect("permutation of a valid molecule is valid")
    }

    /// Converts back to a builder with explicit hydrogen counts.
    pub fn to_builder(&self) -> MolBuilder {
        let mut builder = MolBuilder::new();
        for a in &self.atoms {
            builder.add_atom(BuildAtom {
                element: a.element,
                charge: a.formal_charge,
                aromatic: a.aromatic,
                hydrogens: Some(a.implicit_h),
            });
        }
        for b in &self.bonds {
            builder.add_bond(b.a, b.b, b.order);
        }
        builder
    }
}

fn component_labels(n: usize, adjacency: &[Vec<(usize, usize)>]) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Atom under construction. `hydrogens: None` requests the implicit count
/// from the valence model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildAtom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    pub hydrogens: Option<u8>,
}

impl BuildAtom {
    pub fn new(element: Element) -> Self {
        BuildAtom {
            element,
            charge: 0,
            aromatic: false,
            hydrogens: None,
        }
    }
}

/// Mutable graph that is validated into a [`Molecule`].
#[derive(Debug, Clone, Default)]
pub struct MolBuilder {
    pub atoms: Vec<BuildAtom>,
    pub bonds: Vec<(usize, usize, BondOrder)>,
}

impl MolBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: BuildAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) {
        self.bonds.push((a, b, order));
    }

    pub fn build(self) -> Result<Molecule, MolError> {
        let MolBuilder { mut atoms, mut bonds } = self;
        let n = atoms.len();
        for (i, &(a, b, _)) in bonds.iter().enumerate() {
            if a >= n || b >= n || a == b {
                return Err(MolError::InvalidBond { a, b });
            }
            if bonds[..i]
                .iter()
                .any(|&(x, y, _)| (x == a && y == b) || (x == b && y == a))
            {
                return Err(MolError::InvalidBond { a, b });
            }
        }

        // Aromatic bonds outside rings are single bonds between aromatic atoms.
        let adjacency = adjacency_of(n, &bonds);
        let in_ring = rings::ring_bonds(n, &adjacency, bonds.len());
        for (i, bond) in bonds.iter_mut().enumerate() {
            if bond.2 == BondOrder::Aromatic && !in_ring[i] {
                bond.2 = BondOrder::Single;
            }
        }

        let mut hydrogens = Vec::with_capacity(n);
        for (i, atom) in atoms.iter().enumerate() {
            let h = match atom.hydrogens {
                Some(h) => h,
                None => implicit_hydrogens(atom, i, &bonds),
            };
            hydrogens.push(h);
        }

        // Fold explicit hydrogen nodes into their heavy neighbour.
        let mut removed = vec![false; n];
        for &(a, b, order) in &bonds {
            if order != BondOrder::Single {
                continue;
            }
            for (h, heavy) in [(a, b), (b, a)] {
                let atom = &atoms[h];
                if atom.element == Element::H
                    && atom.charge == 0
                    && atoms[heavy].element != Element::H
                    && hydrogens[h] == 0
                    && bonds.iter().filter(|&&(x, y, _)| x == h || y == h).count() == 1
                {
                    removed[h] = true;
                    hydrogens[heavy] += 1;
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut kept_atoms = Vec::with_capacity(n);
        let mut kept_h = Vec::with_capacity(n);
        for i in 0..n {
            if !removed[i] {
                remap[i] = kept_atoms.len();
                kept_atoms.push(atoms[i]);
                kept_h.push(hydrogens[i]);
            }
        }
        bonds.retain(|&(a, b, _)| !removed[a] && !removed[b]);
        for bond in bonds.iter_mut() {
            bond.0 = remap[bond.0];
            bond.1 = remap[bond.1];
        }
        atoms = kept_atoms;
        let hydrogens = kept_h;
        let n = atoms.len();

        // Aromatic flags only survive on atoms that keep an aromatic bond.
        let mut has_aromatic_bond = vec![false; n];
        for &(a, b, o) in &bonds {
            if o == BondOrder::Aromatic {
                has_aromatic_bond[a] = true;
                has_aromatic_bond[b] = true;
            }
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.aromatic && !has_aromatic_bond[i] {
                return Err(MolError::Kekulize);
            }
        }

        let adjacency = adjacency_of(n, &bonds);
        let kekule = aromatic::kekulize(&atoms, &hydrogens, &bonds, &adjacency)?;

        for i in 0..n {
            let used: u8 = adjacency[i].iter().map(|&(_, b)| kekule[b]).sum::<u8>() + hydrogens[i];
            if !atoms[i]
                .element
                .permitted_valences(atoms[i].charge)
                .contains(used)
            {
                return Err(MolError::Valence {
                    atom: i,
                    element: atoms[i].element.symbol(),
                });
            }
        }

        let rings = rings::sssr(n, &adjacency, &bonds);
        let ring_bond = rings::ring_bonds(n, &adjacency, bonds.len());
        let perceived = aromatic::perceive(&atoms, &hydrogens, &bonds, &adjacency, &kekule, &rings);

        let mut in_ring_atom = vec![false; n];
        for ring in &rings {
            for &a in ring {
                in_ring_atom[a] = true;
            }
        }
        let final_atoms: Vec<Atom> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| Atom {
                element: a.element,
                formal_charge: a.charge,
                aromatic: perceived.atom[i],
                implicit_h: hydrogens[i],
                in_ring: in_ring_atom[i],
            })
            .collect();
        let final_bonds: Vec<Bond> = bonds
            .iter()
            .enumerate()
            .map(|(i, &(a, b, _))| Bond {
                a,
                b,
                order: if perceived.bond[i] {
                    BondOrder::Aromatic
                } else {
                    match kekule[i] {
                        1 => BondOrder::Single,
                        2 => BondOrder::Double,
                        _ => BondOrder::Triple,
                    }
                },
            })
            .collect();

        Ok(Molecule {
            atoms: final_atoms,
            bonds: final_bonds,
            adjacency,
            kekule,
            rings,
            ring_bond,
        })
    }
}

pub(crate) fn adjacency_of(n: usize, bonds: &[(usize, usize, BondOrder)]) -> Vec<Vec<(usize, usize)>> {
    let mut adjacency = vec![Vec::new(); n];
    for (i, &(a, b, _)) in bonds.iter().enumerate() {
        adjacency[a].push((b, i));
        adjacency[b].push((a, i));
    }
    adjacency
}

/// Hydrogen count implied by the valence model for an atom written without an
/// explicit count. Aromatic atoms reserve one unit for the π bond when it fits
/// under the default valence.
pub(crate) fn implicit_hydrogens(atom: &BuildAtom, index: usize, bonds: &[(usize, usize, BondOrder)]) -> u8 {
    let mut used: u8 = 0;
    let mut aromatic_bonds = 0;
    for &(a, b, o) in bonds {
        if a == index || b == index {
            used += o.valence_units();
            if o == BondOrder::Aromatic {
                aromatic_bonds += 1;
            }
        }
    }
    implicit_h_for(atom.element, atom.charge, atom.aromatic && aromatic_bonds > 0, used)
}

pub(crate) fn implicit_h_for(element: Element, charge: i8, aromatic: bool, used: u8) -> u8 {
    let valences = element.permitted_valences(charge);
    if aromatic {
        let default = valences.lowest().unwrap_or(0);
        if used + 1 <= default {
            return default - used - 1;
        }
        return 0;
    }
    match valences.as_slice().iter().copied().find(|&v| v >= used) {
        Some(v) => v - used,
        None => 0,
    }
}
