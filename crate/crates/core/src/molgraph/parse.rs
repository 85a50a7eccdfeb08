use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::element::Element;
use super::graph::{BondOrder, BuildAtom, MolBuilder, Molecule};
use super::MolError;

/// Side information collected while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseFlags {
    /// Chirality or double-bond stereo markers were present and dropped.
    pub stereo_dropped: bool,
}

pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    parse_smiles_with_flags(text).map(|(m, _)| m)
}

pub fn parse_smiles_with_flags(text: &str) -> Result<(Molecule, ParseFlags), MolError> {
    let (builder, flags) = SmilesParser::new(text).run()?;
    Ok((builder.build()?, flags))
}

#[derive(Clone, Copy)]
enum PendingBond {
    Explicit(BondOrder),
}

struct SmilesParser<'a> {
    text: &'a [u8],
    pos: usize,
    builder: MolBuilder,
    flags: ParseFlags,
    prev: Option<usize>,
    pending: Option<PendingBond>,
    branches: Vec<(usize, usize)>,
    rings: BTreeMap<u16, (usize, Option<BondOrder>, usize)>,
}

impl<'a> SmilesParser<'a> {
    fn new(text: &'a str) -> Self {
        SmilesParser {
            text: text.as_bytes(),
            pos: 0,
            builder: MolBuilder::new(),
            flags: ParseFlags::default(),
            prev: None,
            pending: None,
            branches: Vec::new(),
            rings: BTreeMap::new(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn unexpected(&self) -> MolError {
        let ch = core::str::from_utf8(&self.text[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
            .unwrap_or('?');
        MolError::UnexpectedChar { pos: self.pos, ch }
    }

    fn run(mut self) -> Result<(MolBuilder, ParseFlags), MolError> {
        if self.text.iter().all(|c| c.is_ascii_whitespace()) {
            return Err(MolError::Empty);
        }
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(prev) = self.prev else {
                        return Err(MolError::UnbalancedParen { pos: self.pos });
                    };
                    if self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    self.branches.push((prev, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(MolError::UnbalancedParen { pos: self.pos });
                    };
                    if self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() {
                        return Err(self.unexpected());
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return Err(self.unexpected());
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        b'/' | b'\\' => {
                            self.flags.stereo_dropped = true;
                            BondOrder::Single
                        }
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(PendingBond::Explicit(order));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.attach(atom)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.attach(atom)?;
                }
            }
        }
        if let Some(&(_, pos)) = self.branches.last() {
            return Err(MolError::UnbalancedParen { pos });
        }
        if let Some((&digit, _)) = self.rings.iter().next() {
            return Err(MolError::UnclosedRing { digit });
        }
        if self.pending.is_some() {
            return Err(MolError::UnexpectedChar {
                pos: self.text.len(),
                ch: '$',
            });
        }
        Ok((self.builder, self.flags))
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.builder.atoms[a].aromatic && self.builder.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn attach(&mut self, atom: BuildAtom) -> Result<(), MolError> {
        let idx = self.builder.add_atom(atom);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some(PendingBond::Explicit(o)) => o,
                None => self.default_order(prev, idx),
            };
            self.builder.add_bond(prev, idx, order);
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), MolError> {
        let start = self.pos;
        let Some(prev) = self.prev else {
            return Err(self.unexpected());
        };
        let digit: u16 = if self.peek() == Some(b'%') {
            let d = self.text.get(self.pos + 1..self.pos + 3);
            match d {
                Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    ((a - b'0') * 10 + (b - b'0')) as u16
                }
                _ => return Err(self.unexpected()),
            }
        } else {
            let d = (self.text[self.pos] - b'0') as u16;
            self.pos += 1;
            d
        };
        let bond = self.pending.take().map(|PendingBond::Explicit(o)| o);
        match self.rings.remove(&digit) {
            Some((other, open_bond, _)) => {
                if other == prev {
                    return Err(MolError::InvalidBond { a: prev, b: prev });
                }
                let order = match (open_bond, bond) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(MolError::UnexpectedChar { pos: start, ch: '?' })
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.default_order(other, prev),
                };
                self.builder.add_bond(other, prev, order);
            }
            None => {
                self.rings.insert(digit, (prev, bond, start));
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<BuildAtom, MolError> {
        let rest = &self.text[self.pos..];
        let (element, aromatic, len) = match rest {
            [b'C', b'l', ..] => (Element::CL, false, 2),
            [b'B', b'r', ..] => (Element::BR, false, 2),
            [b'B', ..] => (Element::B, false, 1),
            [b'C', ..] => (Element::C, false, 1),
            [b'N', ..] => (Element::N, false, 1),
            [b'O', ..] => (Element::O, false, 1),
            [b'P', ..] => (Element::P, false, 1),
            [b'S', ..] => (Element::S, false, 1),
            [b'F', ..] => (Element::F, false, 1),
            [b'I', ..] => (Element::I, false, 1),
            [b'b', ..] => (Element::B, true, 1),
            [b'c', ..] => (Element::C, true, 1),
            [b'n', ..] => (Element::N, true, 1),
            [b'o', ..] => (Element::O, true, 1),
            [b'p', ..] => (Element::P, true, 1),
            [b's', ..] => (Element::S, true, 1),
            [c, ..] if c.is_ascii_alphabetic() || *c == b'*' => {
                return Err(MolError::UnknownElement((*c as char).to_string()))
            }
            _ => return Err(self.unexpected()),
        };
        self.pos += len;
        Ok(BuildAtom {
            element,
            charge: 0,
            aromatic,
            hydrogens: None,
        })
    }

    fn bracket_atom(&mut self) -> Result<BuildAtom, MolError> {
        let open = self.pos;
        self.pos += 1;
        let close = self.text[self.pos..]
            .iter()
            .position(|&c| c == b']')
            .map(|k| self.pos + k)
            .ok_or(MolError::BadBracket { pos: open })?;
        let body = &self.text[self.pos..close];
        let mut k = 0;
        if body.first().is_some_and(|c| c.is_ascii_digit()) {
            return Err(MolError::Isotope);
        }
        let (element, aromatic, len) = bracket_symbol(body)?;
        k += len;
        // chirality
        if body.get(k) == Some(&b'@') {
            self.flags.stereo_dropped = true;
            k += 1;
            if body.get(k) == Some(&b'@') {
                k += 1;
            }
        }
        let mut hydrogens = 0u8;
        if body.get(k) == Some(&b'H') {
            k += 1;
            hydrogens = 1;
            if let Some(d) = body.get(k).filter(|c| c.is_ascii_digit()) {
                hydrogens = d - b'0';
                k += 1;
            }
        }
        let mut charge: i8 = 0;
        if let Some(&sign) = body.get(k).filter(|&&c| c == b'+' || c == b'-') {
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            k += 1;
            if let Some(d) = body.get(k).filter(|c| c.is_ascii_digit()) {
                charge = unit * (d - b'0') as i8;
                k += 1;
            } else {
                charge = unit;
                while body.get(k) == Some(&sign) {
                    charge += unit;
                    k += 1;
                }
            }
            if body.get(k).is_some_and(|&c| c == b'+' || c == b'-') {
                return Err(MolError::BadCharge { pos: open + 1 + k });
            }
        }
        if body.get(k) == Some(&b':') {
            k += 1;
            let digits = body[k..].iter().take_while(|c| c.is_ascii_digit()).count();
            if digits == 0 {
                return Err(MolError::BadBracket { pos: open });
            }
            k += digits;
        }
        if k != body.len() {
            let c = body[k];
            if c == b'+' || c == b'-' || c.is_ascii_digit() {
                return Err(MolError::BadCharge { pos: open + 1 + k });
            }
            return Err(MolError::BadBracket { pos: open });
        }
        self.pos = close + 1;
        Ok(BuildAtom {
            element,
            charge,
            aromatic,
            hydrogens: Some(hydrogens),
        })
    }
}

fn bracket_symbol(body: &[u8]) -> Result<(Element, bool, usize), MolError> {
    let symbol = |len: usize| core::str::from_utf8(&body[..len]).unwrap_or("?").to_string();
    match body {
        [a, b, ..] if a.is_ascii_uppercase() && b.is_ascii_lowercase() => {
            let sym = symbol(2);
            match Element::from_symbol(&sym) {
                Some(e) => Ok((e, false, 2)),
                None => Err(MolError::UnknownElement(sym)),
            }
        }
        [a, b, ..] if a.is_ascii_lowercase() && b.is_ascii_lowercase() => Err(MolError::UnknownElement(symbol(2))),
        [a, ..] if a.is_ascii_uppercase() => match Element::from_symbol(&symbol(1)) {
            Some(e) => Ok((e, false, 1)),
            None => Err(MolError::UnknownElement(symbol(1))),
        },
        [a, ..] => {
            let e = match a {
                b'b' => Element::B,
                b'c' => Element::C,
                b'n' => Element::N,
                b'o' => Element::O,
                b'p' => Element::P,
                b's' => Element::S,
                _ => return Err(MolError::UnknownElement(symbol(1))),
            };
            Ok((e, true, 1))
        }
        [] => Err(MolError::BadBracket { pos: 0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methane() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.bond_count(), 0);
        assert_eq!(m.atom(0).implicit_h, 4);
    }

    #[test]
    fn benzene() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.atom_count(), 6);
        assert!(m.atoms().iter().all(|a| a.aromatic && a.implicit_h == 1));
        assert_eq!(m.bond_count(), 6);
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(m.rings().len(), 1);
        assert_eq!(m.rings()[0].len(), 6);
    }

    #[test]
    fn acetic_acid() {
        let m = parse_smiles("CC(=O)O").unwrap();
        assert_eq!(m.heavy_atom_count(), 4);
        let doubles: Vec<_> = m.bonds().iter().filter(|b| b.order == BondOrder::Double).collect();
        assert_eq!(doubles.len(), 1);
        let d = doubles[0];
        let ends = [m.atom(d.a).element, m.atom(d.b).element];
        assert!(ends.contains(&Element::C) && ends.contains(&Element::O));
        let hydroxyl = m
            .atoms()
            .iter()
            .enumerate()
            .find(|(i, a)| a.element == Element::O && m.degree(*i) == 1 && m.total_valence(*i) == 2 && a.implicit_h == 1)
            .map(|(i, _)| i)
            .expect("hydroxyl oxygen");
        let (c, b) = m.neighbors(hydroxyl)[0];
        assert_eq!(m.atom(c).element, Element::C);
        assert_eq!(m.bonds()[b].order, BondOrder::Single);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_smiles("C("), Err(MolError::UnbalancedParen { .. })));
        assert!(matches!(parse_smiles("C)"), Err(MolError::UnbalancedParen { .. })));
        assert!(matches!(parse_smiles("C1CC"), Err(MolError::UnclosedRing { digit: 1 })));
        assert!(matches!(parse_smiles("[Na+].[Cl-]"), Err(MolError::UnknownElement(_))));
        assert!(matches!(parse_smiles("Xc"), Err(MolError::UnknownElement(_))));
        assert!(matches!(parse_smiles("[N+-]"), Err(MolError::BadCharge { .. })));
        assert!(matches!(parse_smiles(""), Err(MolError::Empty)));
        assert!(matches!(parse_smiles("[13CH4]"), Err(MolError::Isotope)));
    }

    #[test]
    fn valence_errors() {
        assert!(matches!(parse_smiles("C(C)(C)(C)(C)C"), Err(MolError::Valence { .. })));
        assert!(matches!(parse_smiles("O(C)(C)C"), Err(MolError::Valence { .. })));
        assert!(parse_smiles("C[N+](C)(C)C").is_ok());
    }

    #[test]
    fn stereo_is_dropped_with_flag() {
        let (m, flags) = parse_smiles_with_flags("C/C=C/C").unwrap();
        assert!(flags.stereo_dropped);
        assert_eq!(m.heavy_atom_count(), 4);
        let (_, flags) = parse_smiles_with_flags("N[C@@H](C)C(=O)O").unwrap();
        assert!(flags.stereo_dropped);
        let (_, flags) = parse_smiles_with_flags("CCO").unwrap();
        assert!(!flags.stereo_dropped);
    }

    #[test]
    fn bracket_atoms_and_charges() {
        let m = parse_smiles("[NH4+]").unwrap();
        assert_eq!(m.atom(0).formal_charge, 1);
        assert_eq!(m.atom(0).implicit_h, 4);
        let m = parse_smiles("C[N+](=O)[O-]").unwrap();
        assert_eq!(m.atoms().iter().map(|a| a.formal_charge as i32).sum::<i32>(), 0);
        assert_eq!(parse_smiles("[O--]").unwrap().atom(0).implicit_h, 0);
        assert!(matches!(parse_smiles("[CH5]"), Err(MolError::Valence { .. })));
        let m = parse_smiles("Cl[Si](Cl)(Cl)Cl").unwrap();
        assert_eq!(m.atom(1).element, Element::SI);
    }

    #[test]
    fn explicit_hydrogens_fold_into_neighbours() {
        let m = parse_smiles("[H]C([H])([H])[H]").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atom(0).implicit_h, 4);
        let m = parse_smiles("[H][H]").unwrap();
        assert_eq!(m.atom_count(), 2);
    }

    #[test]
    fn biaryl_single_bond_is_not_aromatic() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let single = m.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(single, 1);
    }

    #[test]
    fn percent_ring_closures() {
        let a = parse_smiles("C%12CCCCC%12").unwrap();
        assert_eq!(a.rings().len(), 1);
    }
}
