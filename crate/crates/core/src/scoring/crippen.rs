//! Atom-additive logP and molar refractivity.
//!
//! Every heavy atom gets a type by the ordered rules below (first match wins)
//! and every hydrogen is typed by its parent atom. The contribution values
//! come from the bundled `crippen.tsv`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use once_cell::race::OnceBox;

use crate::datafile::{verified_body, DataError};
use crate::molgraph::{BondOrder, Element, Molecule};

pub const CRIPPEN_DATA: &str = include_str!("../../data/crippen.tsv");

/// Contribution table keyed by type name.
#[derive(Debug, Clone, PartialEq)]
pub struct CrippenTable {
    entries: BTreeMap<&'static str, (f64, f64)>,
}

impl CrippenTable {
    pub fn parse(text: &'static str) -> Result<CrippenTable, DataError> {
        let mut entries = BTreeMap::new();
        for (line, l) in verified_body(text)? {
            let cols: alloc::vec::Vec<&str> = l.split('\t').collect();
            if cols.len() < 3 {
                return Err(DataError::Malformed {
                    line,
                    msg: format!("expected type, logp, mr; got {l:?}"),
                });
            }
            let logp = cols[1].trim().parse::<f64>();
            let mr = cols[2].trim().parse::<f64>();
            match (logp, mr) {
                (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => {
                    entries.insert(cols[0].trim(), (a, b));
                }
                _ => {
                    return Err(DataError::Malformed {
                        line,
                        msg: format!("non-numeric contribution in {l:?}"),
                    })
                }
            }
        }
        if !entries.contains_key(WILDCARD) {
            return Err(DataError::Malformed {
                line: 0,
                msg: format!("missing wildcard type {WILDCARD}"),
            });
        }
        Ok(CrippenTable { entries })
    }

    /// The bundled table, parsed once.
    pub fn bundled() -> &'static CrippenTable {
        static TABLE: OnceBox<CrippenTable> = OnceBox::new();
        TABLE.get_or_init(|| Box::new(CrippenTable::parse(CRIPPEN_DATA).expect("bundled Crippen table is valid")))
    }

    pub fn get(&self, ty: &str) -> Option<(f64, f64)> {
        self.entries.get(ty).copied()
    }
}

const WILDCARD: &str = "X";

/// Summed contributions plus the number of atoms that fell back to the
/// wildcard type.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrippenResult {
    pub logp: f64,
    pub mr: f64,
    pub untyped: usize,
}

struct Env<'a> {
    m: &'a Molecule,
    i: usize,
}

impl Env<'_> {
    fn element(&self) -> Element {
        self.m.atom(self.i).element
    }
    fn aromatic(&self) -> bool {
        self.m.atom(self.i).aromatic
    }
    fn h(&self) -> u8 {
        self.m.atom(self.i).implicit_h
    }
    fn charge(&self) -> i8 {
        self.m.atom(self.i).formal_charge
    }
    fn degree(&self) -> usize {
        self.m.degree(self.i)
    }
    /// (neighbour, bond order) pairs.
    fn nbrs(&self) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.m
            .neighbors(self.i)
            .iter()
            .map(move |&(j, b)| (j, self.m.bonds()[b].order))
    }
    fn nbr_is(&self, j: usize, e: Element, aromatic: Option<bool>) -> bool {
        let a = self.m.atom(j);
        a.element == e && aromatic.is_none_or(|x| x == a.aromatic)
    }
    fn arom(&self, j: usize) -> bool {
        self.m.atom(j).aromatic
    }
}

fn common_hetero(e: Element) -> bool {
    matches!(
        e,
        Element::N | Element::O | Element::P | Element::S | Element::F | Element::CL | Element::BR | Element::I
    )
}

fn carbon_type(x: &Env) -> &'static str {
    let m = x.m;
    if x.aromatic() {
        let mut aromatic_bonds = 0;
        for (j, o) in x.nbrs() {
            let nb = m.atom(j);
            if o == BondOrder::Aromatic {
                aromatic_bonds += 1;
                continue;
            }
            if o == BondOrder::Single && x.h() == 0 && !nb.aromatic && !matches!(nb.element, Element::C | Element::N | Element::O | Element::S)
                && !nb.element.is_halogen()
            {
                return "C13";
            }
        }
        for (j, _) in x.nbrs() {
            match m.atom(j).element {
                Element::F => return "C14",
                Element::CL => return "C15",
                Element::BR => return "C16",
                Element::I => return "C17",
                _ => {}
            }
        }
        if x.h() > 0 {
            return "C18";
        }
        if aromatic_bonds >= 3 {
            return "C19";
        }
        for (j, o) in x.nbrs() {
            if o == BondOrder::Aromatic {
                continue;
            }
            let nb = m.atom(j);
            if o == BondOrder::Double {
                if matches!(nb.element, Element::C | Element::N | Element::O) {
                    return "C25";
                }
                continue;
            }
            if nb.aromatic {
                return "C20";
            }
            return match nb.element {
                Element::C => "C21",
                Element::N => "C22",
                Element::O => "C23",
                Element::S => "C24",
                _ => "CS",
            };
        }
        return "CS";
    }

    let all_single = x.nbrs().all(|(_, o)| o == BondOrder::Single);
    if all_single {
        let h = x.h();
        let all_aliphatic_c = x.nbrs().all(|(j, _)| x.nbr_is(j, Element::C, Some(false)));
        if all_aliphatic_c {
            return if h >= 2 || x.degree() == 0 { "C1" } else { "C2" };
        }
        let hetero = x.nbrs().any(|(j, _)| !x.arom(j) && common_hetero(m.atom(j).element));
        let aliphatic_heavy = x.nbrs().filter(|&(j, _)| !x.arom(j)).count();
        if hetero {
            match h {
                3 => return "C3",
                2 if aliphatic_heavy >= 2 => return "C3",
                1 if aliphatic_heavy >= 3 => return "C4",
                0 if aliphatic_heavy >= 4 => return "C4",
                _ => {}
            }
        }
        let on_aromatic_c = x.nbrs().any(|(j, _)| x.nbr_is(j, Element::C, Some(true)));
        let on_aromatic = x.nbrs().any(|(j, _)| x.arom(j));
        if on_aromatic {
            return match h {
                3 if on_aromatic_c => "C8",
                3 => "C9",
                2 => "C10",
                1 => "C11",
                _ => "C12",
            };
        }
        if x.nbrs().any(|(j, _)| !common_hetero(m.atom(j).element) && m.atom(j).element != Element::C) {
            return "C27";
        }
        return "CS";
    }

    let mut double_c = None;
    for (j, o) in x.nbrs() {
        let nb = m.atom(j);
        match o {
            BondOrder::Double if !nb.aromatic && nb.element != Element::C => return "C5",
            BondOrder::Double if nb.element == Element::C => double_c = Some(j),
            BondOrder::Triple if !nb.aromatic => return "C7",
            _ => {}
        }
    }
    if let Some(j) = double_c {
        if m.atom(j).aromatic {
            return "C26";
        }
        let others_aromatic = x.nbrs().any(|(k, o)| k != j && o == BondOrder::Single && x.arom(k));
        if others_aromatic {
            return "C26";
        }
        return "C6";
    }
    "CS"
}

fn nitrogen_type(x: &Env) -> &'static str {
    let m = x.m;
    let q = x.charge();
    if x.aromatic() {
        return if q > 0 { "N12" } else if q == 0 { "N11" } else { "N14" };
    }
    if q < 0 {
        return "N14";
    }
    if q > 0 {
        if x.h() > 0 {
            return "N10";
        }
        if x.nbrs().any(|(_, o)| o == BondOrder::Triple) {
            return "N14";
        }
        return "N13";
    }
    let h = x.h();
    let doubles = x.nbrs().filter(|&(_, o)| o == BondOrder::Double).count();
    let triples = x.nbrs().filter(|&(_, o)| o == BondOrder::Triple).count();
    let any_aromatic = x.nbrs().any(|(j, _)| m.atom(j).aromatic);
    if triples == 1 {
        return "N9";
    }
    if doubles == 1 {
        return if h == 1 { "N5" } else if x.degree() == 2 { "N6" } else { "NS" };
    }
    if doubles == 0 {
        return match (h, x.degree()) {
            (2, 1) => if any_aromatic { "N3" } else { "N1" },
            (1, 2) => if any_aromatic { "N4" } else { "N2" },
            (0, 3) => if any_aromatic { "N8" } else { "N7" },
            // ammonia and other odd cases
            _ => "NS",
        };
    }
    "NS"
}

fn oxygen_type(x: &Env) -> &'static str {
    let m = x.m;
    if x.aromatic() {
        return "O1";
    }
    let q = x.charge();
    if q < 0 {
        let Some((j, _)) = x.nbrs().next() else { return "OS" };
        let nb = m.atom(j);
        return match nb.element {
            Element::N => "O5",
            Element::S => "O6",
            Element::C if carbon_has_double_o(m, j) => "O12",
            _ => "OS",
        };
    }
    if q > 0 {
        return "OS";
    }
    if x.h() > 0 {
        return "O2";
    }
    if let Some((j, _)) = x.nbrs().find(|&(_, o)| o == BondOrder::Double) {
        let nb = m.atom(j);
        return match nb.element {
            Element::N | Element::O => "O5",
            Element::C if nb.aromatic => "O8",
            Element::C => {
                let others: alloc::vec::Vec<usize> = m
                    .neighbors(j)
                    .iter()
                    .map(|&(k, _)| k)
                    .filter(|&k| k != x.i)
                    .collect();
                if others.iter().any(|&k| m.atom(k).aromatic) {
                    "O10"
                } else if others.len() == 2 && others.iter().all(|&k| m.atom(k).element != Element::C) {
                    "O11"
                } else {
                    "O9"
                }
            }
            _ => "OS",
        };
    }
    if x.degree() == 2 {
        let any_aromatic = x.nbrs().any(|(j, _)| m.atom(j).aromatic);
        return if any_aromatic { "O4" } else { "O3" };
    }
    "OS"
}

fn carbon_has_double_o(m: &Molecule, c: usize) -> bool {
    m.neighbors(c)
        .iter()
        .any(|&(k, b)| m.bonds()[b].order == BondOrder::Double && m.atom(k).element == Element::O)
}

/// Type name of heavy atom `i`.
pub fn atom_type(m: &Molecule, i: usize) -> &'static str {
    let x = Env { m, i };
    match x.element() {
        Element::C => carbon_type(&x),
        Element::N => nitrogen_type(&x),
        Element::O => oxygen_type(&x),
        Element::F => "F",
        Element::CL => "Cl",
        Element::BR => "Br",
        Element::I => "I",
        Element::P => "P",
        Element::S if x.aromatic() => "S3",
        Element::S if x.charge() != 0 => "S2",
        Element::S => "S1",
        Element::H => "HS",
        _ => WILDCARD,
    }
}

/// Type name of the hydrogens attached to heavy atom `i`.
pub fn hydrogen_type(m: &Molecule, i: usize) -> &'static str {
    let a = m.atom(i);
    match a.element {
        Element::C => "H1",
        Element::N => "H3",
        Element::O => {
            let acidic = m.neighbors(i).iter().any(|&(j, _)| {
                let nb = m.atom(j);
                match nb.element {
                    Element::N | Element::O | Element::S => true,
                    Element::C => m.neighbors(j).iter().any(|&(k, b)| {
                        k != i
                            && m.bonds()[b].order == BondOrder::Double
                            && matches!(m.atom(k).element, Element::C | Element::N | Element::O | Element::S)
                    }),
                    _ => false,
                }
            });
            if acidic {
                "H4"
            } else {
                "H2"
            }
        }
        Element::H => "H1",
        _ => "H2",
    }
}

pub fn crippen_with(m: &Molecule, table: &CrippenTable) -> CrippenResult {
    let mut out = CrippenResult::default();
    let wildcard = table.get(WILDCARD).unwrap_or((0.0, 0.0));
    for i in 0..m.atom_count() {
        let ty = atom_type(m, i);
        let found = table.get(ty);
        if ty == WILDCARD || found.is_none() {
            out.untyped += 1;
        }
        let (lp, mr) = found.unwrap_or(wildcard);
        out.logp += lp;
        out.mr += mr;
        let h = m.atom(i).implicit_h;
        if h > 0 {
            let (hl, hm) = table.get(hydrogen_type(m, i)).unwrap_or(wildcard);
            out.logp += hl * h as f64;
            out.mr += hm * h as f64;
        }
    }
    out
}

pub fn crippen(m: &Molecule) -> CrippenResult {
    crippen_with(m, CrippenTable::bundled())
}

pub fn crippen_logp(m: &Molecule) -> f64 {
    crippen(m).logp
}

pub fn crippen_mr(m: &Molecule) -> f64 {
    crippen(m).mr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn types(s: &str) -> alloc::vec::Vec<&'static str> {
        let m = parse_smiles(s).unwrap();
        (0..m.atom_count()).map(|i| atom_type(&m, i)).collect()
    }

    #[test]
    fn typing_rules() {
        assert_eq!(types("CC"), ["C1", "C1"]);
        assert_eq!(types("CC(C)(C)C")[1], "C2");
        assert_eq!(types("CO"), ["C3", "O2"]);
        assert_eq!(types("CC(=O)O"), ["C1", "C5", "O9", "O2"]);
        assert_eq!(types("c1ccccc1"), ["C18"; 6]);
        assert_eq!(types("Cc1ccccc1")[..2], ["C8", "C21"]);
        assert_eq!(types("Clc1ccccc1")[..2], ["Cl", "C15"]);
        assert_eq!(types("CC#N"), ["C1", "C7", "N9"]);
        assert_eq!(types("CN(C)C")[1], "N7");
        assert_eq!(types("Nc1ccccc1")[..2], ["N3", "C22"]);
        assert_eq!(types("c1ccncc1")[3], "N11");
        assert_eq!(types("C[N+](=O)[O-]")[1..], ["N13", "O5", "O5"]);
        assert_eq!(types("CC(=O)[O-]")[3], "O12");
        assert_eq!(types("O=C1C=CC(=O)C=C1")[0], "O9");
        assert_eq!(types("c1ccc2ccccc2c1")[3], "C19");
        assert_eq!(types("C[Si](C)(C)C")[1], "X");
    }

    #[test]
    fn hydrogen_classes() {
        let m = parse_smiles("OC(=O)CCO").unwrap();
        assert_eq!(hydrogen_type(&m, 0), "H4");
        assert_eq!(hydrogen_type(&m, 5), "H2");
        assert_eq!(hydrogen_type(&m, 3), "H1");
    }

    #[test]
    fn table_values_compose() {
        let t = CrippenTable::bundled();
        let (c1, c1mr) = t.get("C1").unwrap();
        let (h1, h1mr) = t.get("H1").unwrap();
        let r = crippen(&parse_smiles("CC").unwrap());
        assert!((r.logp - (2.0 * c1 + 6.0 * h1)).abs() < 1e-12);
        assert!((r.mr - (2.0 * c1mr + 6.0 * h1mr)).abs() < 1e-12);
        assert_eq!(r.untyped, 0);
    }

    #[test]
    fn wildcard_is_counted() {
        assert_eq!(crippen(&parse_smiles("C[Si](C)(C)C").unwrap()).untyped, 1);
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let bad: &'static str = alloc::boxed::Box::leak(CRIPPEN_DATA.replace("0.1441", "0.1442").into_boxed_str());
        assert!(matches!(CrippenTable::parse(bad), Err(DataError::ChecksumMismatch { .. })));
    }
}
