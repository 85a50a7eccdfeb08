use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::molgraph::{BondOrder, Element, Molecule};

use super::PatternError;

/// A single atom test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrimitive {
    /// Element with an optional aromaticity requirement (`C`, `c`, `#6`).
    Element { element: Element, aromatic: Option<bool> },
    Any,
    Aromatic,
    Aliphatic,
    Charge(i8),
    /// Number of explicit (heavy-atom) connections.
    Degree(u8),
    /// Total attached hydrogens.
    TotalH(u8),
    InRing,
}

/// Conjunction of possibly negated primitives, with an optional map label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternAtom {
    pub terms: Vec<(bool, AtomPrimitive)>,
    pub map: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondQuery {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    /// Unwritten bond: single or aromatic.
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub query: BondQuery,
}

/// Parsed SMARTS graph. Components joined by `.` are allowed here; reactant
/// patterns of templates are additionally required to be connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<PatternBond>,
    pub(crate) adjacency: Vec<Vec<(usize, usize)>>,
}

impl PatternAtom {
    /// The element this atom pins down, if any non-negated element term exists.
    pub fn element(&self) -> Option<Element> {
        self.terms.iter().find_map(|&(neg, p)| match p {
            AtomPrimitive::Element { element, .. } if !neg => Some(element),
            _ => None,
        })
    }

    pub fn charge(&self) -> Option<i8> {
        self.terms.iter().find_map(|&(neg, p)| match p {
            AtomPrimitive::Charge(q) if !neg => Some(q),
            _ => None,
        })
    }

    pub fn total_h(&self) -> Option<u8> {
        self.terms.iter().find_map(|&(neg, p)| match p {
            AtomPrimitive::TotalH(h) if !neg => Some(h),
            _ => None,
        })
    }

    /// Tests this atom against atom `i` of `m`.
    pub fn matches(&self, m: &Molecule, i: usize) -> bool {
        let atom = m.atom(i);
        self.terms.iter().all(|&(negated, prim)| {
            let hit = match prim {
                AtomPrimitive::Element { element, aromatic } => {
                    atom.element == element && aromatic.is_none_or(|a| a == atom.aromatic)
                }
                AtomPrimitive::Any => true,
                AtomPrimitive::Aromatic => atom.aromatic,
                AtomPrimitive::Aliphatic => !atom.aromatic,
                AtomPrimitive::Charge(q) => atom.formal_charge == q,
                AtomPrimitive::Degree(d) => m.degree(i) == d as usize,
                AtomPrimitive::TotalH(h) => atom.implicit_h == h,
                AtomPrimitive::InRing => atom.in_ring,
            };
            hit != negated
        })
    }
}

impl BondQuery {
    pub fn matches(self, order: BondOrder) -> bool {
        match self {
            BondQuery::Single => order == BondOrder::Single,
            BondQuery::Double => order == BondOrder::Double,
            BondQuery::Triple => order == BondOrder::Triple,
            BondQuery::Aromatic => order == BondOrder::Aromatic,
            BondQuery::Any => true,
            BondQuery::Default => matches!(order, BondOrder::Single | BondOrder::Aromatic),
        }
    }
}

impl PatternGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, bond)| bond)
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Index of the atom carrying map label `map`.
    pub fn atom_with_map(&self, map: u16) -> Option<usize> {
        self.atoms.iter().position(|a| a.map == Some(map))
    }
}

/// Parses a SMARTS string in the supported subset.
pub fn parse_smarts(text: &str) -> Result<PatternGraph, PatternError> {
    Parser {
        s: text.as_bytes(),
        pos: 0,
    }
    .parse()
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> PatternError {
        PatternError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<PatternGraph, PatternError> {
        if self.s.is_empty() {
            return Err(self.syntax("empty pattern"));
        }
        let mut atoms: Vec<PatternAtom> = Vec::new();
        let mut bonds: Vec<PatternBond> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut stack: Vec<Option<usize>> = Vec::new();
        let mut pending: Option<BondQuery> = None;
        let mut rings: BTreeMap<u16, (usize, Option<BondQuery>)> = BTreeMap::new();

        let add_bond = |bonds: &mut Vec<PatternBond>, a: usize, b: usize, q: BondQuery, pos: usize| {
            if a == b || bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
                return Err(PatternError::Syntax {
                    pos,
                    msg: "duplicate or self bond".to_string(),
                });
            }
            bonds.push(PatternBond { a, b, query: q });
            Ok(())
        };

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(self.syntax("branch without atom"));
                    }
                    stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    prev = stack.pop().ok_or_else(|| self.syntax("unbalanced ')'"))?;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.syntax("bond before '.'"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.syntax("misplaced bond"));
                    }
                    pending = Some(match c {
                        b'-' => BondQuery::Single,
                        b'=' => BondQuery::Double,
                        b'#' => BondQuery::Triple,
                        b':' => BondQuery::Aromatic,
                        _ => BondQuery::Any,
                    });
                    self.pos += 1;
                }
                b'/' | b'\\' | b'@' => {
                    return Err(PatternError::Unsupported((c as char).to_string()));
                }
                b'0'..=b'9' | b'%' => {
                    let at = prev.ok_or_else(|| self.syntax("ring closure without atom"))?;
                    let digit = if c == b'%' {
                        let d = self.s.get(self.pos + 1..self.pos + 3).ok_or_else(|| self.syntax("bad %nn"))?;
                        if !d.iter().all(u8::is_ascii_digit) {
                            return Err(self.syntax("bad %nn"));
                        }
                        self.pos += 3;
                        ((d[0] - b'0') * 10 + (d[1] - b'0')) as u16
                    } else {
                        self.pos += 1;
                        (c - b'0') as u16
                    };
                    match rings.remove(&digit) {
                        Some((other, q)) => {
                            let q = match (q, pending.take()) {
                                (Some(a), Some(b)) if a != b => return Err(self.syntax("conflicting ring bond")),
                                (Some(a), _) | (None, Some(a)) => a,
                                (None, None) => BondQuery::Default,
                            };
                            add_bond(&mut bonds, other, at, q, self.pos)?;
                        }
                        None => {
                            rings.insert(digit, (at, pending.take()));
                        }
                    }
                }
                b'[' => {
                    let atom = self.bracket()?;
                    let idx = atoms.len();
                    atoms.push(atom);
                    if let Some(p) = prev {
                        add_bond(&mut bonds, p, idx, pending.take().unwrap_or(BondQuery::Default), self.pos)?;
                    }
                    prev = Some(idx);
                }
                _ => {
                    let atom = self.bare_atom()?;
                    let idx = atoms.len();
                    atoms.push(atom);
                    if let Some(p) = prev {
                        add_bond(&mut bonds, p, idx, pending.take().unwrap_or(BondQuery::Default), self.pos)?;
                    }
                    prev = Some(idx);
                }
            }
        }
        if !stack.is_empty() {
            return Err(self.syntax("unbalanced '('"));
        }
        if pending.is_some() {
            return Err(self.syntax("dangling bond"));
        }
        if let Some((d, _)) = rings.iter().next() {
            return Err(PatternError::Syntax {
                pos: self.pos,
                msg: alloc::format!("ring closure {d} never closed"),
            });
        }
        if atoms.is_empty() {
            return Err(self.syntax("no atoms"));
        }
        let mut seen_maps: Vec<u16> = atoms.iter().filter_map(|a| a.map).collect();
        seen_maps.sort_unstable();
        if seen_maps.windows(2).any(|w| w[0] == w[1]) {
            return Err(PatternError::MapLabel("duplicate atom-map label in one pattern".to_string()));
        }
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            adjacency[b.a].push((b.b, i));
            adjacency[b.b].push((b.a, i));
        }
        Ok(PatternGraph { atoms, bonds, adjacency })
    }

    fn bare_atom(&mut self) -> Result<PatternAtom, PatternError> {
        let rest = &self.s[self.pos..];
        let (prim, len) = match rest {
            [b'C', b'l', ..] => (elem(Element::CL, Some(false)), 2),
            [b'B', b'r', ..] => (elem(Element::BR, Some(false)), 2),
            [b'*', ..] => (AtomPrimitive::Any, 1),
            [b'a', ..] => (AtomPrimitive::Aromatic, 1),
            [b'A', ..] => (AtomPrimitive::Aliphatic, 1),
            [c, ..] => match aliphatic_or_aromatic(*c) {
                Some(p) => (p, 1),
                None => return Err(self.syntax("unexpected character")),
            },
            [] => return Err(self.syntax("expected atom")),
        };
        self.pos += len;
        Ok(PatternAtom {
            terms: vec![(false, prim)],
            map: None,
        })
    }

    fn bracket(&mut self) -> Result<PatternAtom, PatternError> {
        let open = self.pos;
        let close = self.s[open..]
            .iter()
            .position(|&c| c == b']')
            .map(|k| open + k)
            .ok_or_else(|| self.syntax("unclosed '['"))?;
        let body = &self.s[open + 1..close];
        self.pos = close + 1;
        if body == b"H" {
            return Ok(PatternAtom {
                terms: vec![(false, elem(Element::H, None))],
                map: None,
            });
        }
        if body.windows(2).any(|w| w == b"$(") {
            return Err(PatternError::Unsupported("$(".to_string()));
        }
        let mut atom = PatternAtom::default();
        let mut k = 0;
        let mut negate = false;
        let err = |k: usize, msg: &str| PatternError::Syntax {
            pos: open + 1 + k,
            msg: msg.to_string(),
        };
        let number = |k: &mut usize| -> Option<u32> {
            let start = *k;
            while *k < body.len() && body[*k].is_ascii_digit() {
                *k += 1;
            }
            if *k == start {
                None
            } else {
                core::str::from_utf8(&body[start..*k]).ok()?.parse().ok()
            }
        };
        while k < body.len() {
            let c = body[k];
            let prim = match c {
                b';' | b'&' => {
                    if negate {
                        return Err(err(k, "dangling '!'"));
                    }
                    k += 1;
                    continue;
                }
                b'!' => {
                    if negate {
                        return Err(PatternError::Unsupported("!!".to_string()));
                    }
                    negate = true;
                    k += 1;
                    continue;
                }
                b',' => return Err(PatternError::Unsupported(",".to_string())),
                b'@' => return Err(PatternError::Unsupported("@".to_string())),
                b':' => {
                    if negate {
                        return Err(err(k, "negated map label"));
                    }
                    k += 1;
                    let label = number(&mut k).ok_or_else(|| err(k, "missing map label"))?;
                    if k != body.len() {
                        return Err(err(k, "map label must end the bracket"));
                    }
                    atom.map = Some(u16::try_from(label).map_err(|_| err(k, "map label too large"))?);
                    continue;
                }
                b'*' => {
                    k += 1;
                    AtomPrimitive::Any
                }
                b'a' => {
                    k += 1;
                    AtomPrimitive::Aromatic
                }
                b'A' => {
                    k += 1;
                    AtomPrimitive::Aliphatic
                }
                b'#' => {
                    k += 1;
                    let z = number(&mut k).ok_or_else(|| err(k, "missing atomic number"))?;
                    let element = u8::try_from(z)
                        .ok()
                        .and_then(Element::from_atomic_number)
                        .ok_or_else(|| PatternError::UnknownElement(alloc::format!("#{z}")))?;
                    elem(element, None)
                }
                b'D' => {
                    k += 1;
                    AtomPrimitive::Degree(number(&mut k).unwrap_or(1) as u8)
                }
                b'H' => {
                    k += 1;
                    AtomPrimitive::TotalH(number(&mut k).unwrap_or(1) as u8)
                }
                b'R' => {
                    k += 1;
                    match number(&mut k) {
                        None => AtomPrimitive::InRing,
                        Some(0) => {
                            negate = !negate;
                            AtomPrimitive::InRing
                        }
                        Some(_) => return Err(PatternError::Unsupported("R<n>".to_string())),
                    }
                }
                b'+' | b'-' => {
                    let sign: i32 = if c == b'+' { 1 } else { -1 };
                    k += 1;
                    let mag = match number(&mut k) {
                        Some(n) => n as i32,
                        None => {
                            let mut m = 1;
                            while k < body.len() && body[k] == c {
                                m += 1;
                                k += 1;
                            }
                            m
                        }
                    };
                    AtomPrimitive::Charge((sign * mag) as i8)
                }
                b'r' | b'v' | b'x' | b'X' | b'h' | b'^' => {
                    return Err(PatternError::Unsupported((c as char).to_string()));
                }
                b'0'..=b'9' => return Err(PatternError::Unsupported("isotope".to_string())),
                _ => {
                    let two = body.get(k..k + 2);
                    let two_letter = two.filter(|t| t[0].is_ascii_uppercase() && t[1].is_ascii_lowercase());
                    match two_letter.and_then(|t| core::str::from_utf8(t).ok()).and_then(Element::from_symbol) {
                        Some(e) => {
                            k += 2;
                            elem(e, Some(false))
                        }
                        None => match aliphatic_or_aromatic(c) {
                            Some(p) => {
                                k += 1;
                                p
                            }
                            None if c.is_ascii_alphabetic() => {
                                let end = if two_letter.is_some() { k + 2 } else { k + 1 };
                                return Err(PatternError::UnknownElement(
                                    String::from_utf8_lossy(&body[k..end]).into_owned(),
                                ));
                            }
                            None => return Err(err(k, "unexpected character")),
                        },
                    }
                }
            };
            atom.terms.push((negate, prim));
            negate = false;
        }
        if negate {
            return Err(err(k, "dangling '!'"));
        }
        if atom.terms.is_empty() {
            return Err(err(0, "empty bracket atom"));
        }
        Ok(atom)
    }
}

fn elem(element: Element, aromatic: Option<bool>) -> AtomPrimitive {
    AtomPrimitive::Element { element, aromatic }
}

fn aliphatic_or_aromatic(c: u8) -> Option<AtomPrimitive> {
    Some(match c {
        b'B' => elem(Element::B, Some(false)),
        b'C' => elem(Element::C, Some(false)),
        b'N' => elem(Element::N, Some(false)),
        b'O' => elem(Element::O, Some(false)),
        b'F' => elem(Element::F, Some(false)),
        b'P' => elem(Element::P, Some(false)),
        b'S' => elem(Element::S, Some(false)),
        b'I' => elem(Element::I, Some(false)),
        b'b' => elem(Element::B, Some(true)),
        b'c' => elem(Element::C, Some(true)),
        b'n' => elem(Element::N, Some(true)),
        b'o' => elem(Element::O, Some(true)),
        b'p' => elem(Element::P, Some(true)),
        b's' => elem(Element::S, Some(true)),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acid_pattern() {
        let p = parse_smarts("[C:1](=[O:2])[OH]").unwrap();
        assert_eq!(p.atom_count(), 3);
        assert_eq!(p.atoms[0].map, Some(1));
        assert_eq!(p.atoms[1].map, Some(2));
        assert_eq!(p.bonds[0].query, BondQuery::Double);
        assert_eq!(p.bonds[1].query, BondQuery::Default);
        assert_eq!(p.atoms[2].total_h(), Some(1));
    }

    #[test]
    fn ring_constrained_aromatic_carbon() {
        let p = parse_smarts("[c;R]").unwrap();
        assert_eq!(
            p.atoms[0].terms,
            vec![
                (false, elem(Element::C, Some(true))),
                (false, AtomPrimitive::InRing)
            ]
        );
        let p = parse_smarts("[C;!R]").unwrap();
        assert_eq!(p.atoms[0].terms[1], (true, AtomPrimitive::InRing));
    }

    #[test]
    fn unsupported_features_are_named() {
        assert_eq!(parse_smarts("[C$(C=O)]"), Err(PatternError::Unsupported("$(".into())));
        assert_eq!(parse_smarts("[N,O]"), Err(PatternError::Unsupported(",".into())));
        assert_eq!(parse_smarts("[C@H]"), Err(PatternError::Unsupported("@".into())));
        assert_eq!(parse_smarts("[Cr1]"), Err(PatternError::Unsupported("r".into())));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_smarts(""), Err(PatternError::Syntax { .. })));
        assert!(matches!(parse_smarts("C("), Err(PatternError::Syntax { .. })));
        assert!(matches!(parse_smarts("C1CC"), Err(PatternError::Syntax { .. })));
        assert!(matches!(parse_smarts("[C"), Err(PatternError::Syntax { .. })));
        assert!(matches!(parse_smarts("[C:1][O:1]"), Err(PatternError::MapLabel(_))));
        assert!(matches!(parse_smarts("[Zn]"), Err(PatternError::UnknownElement(_))));
    }

    #[test]
    fn charges_and_counts() {
        let p = parse_smarts("[N+:2](=O)[O-]").unwrap();
        assert_eq!(p.atoms[0].charge(), Some(1));
        assert_eq!(p.atoms[2].charge(), Some(-1));
        let p = parse_smarts("[N+0;H2;D1]").unwrap();
        assert_eq!(p.atoms[0].charge(), Some(0));
        assert_eq!(p.atoms[0].total_h(), Some(2));
        assert!(p.atoms[0].terms.contains(&(false, AtomPrimitive::Degree(1))));
        let p = parse_smarts("[#6]Cl").unwrap();
        assert_eq!(p.atoms[0].element(), Some(Element::C));
        assert_eq!(p.atoms[1].element(), Some(Element::CL));
    }

    #[test]
    fn ring_closures_in_patterns() {
        let p = parse_smarts("C1OC1").unwrap();
        assert_eq!(p.bonds.len(), 3);
        assert_eq!(p.components(), 1);
        assert_eq!(parse_smarts("C.C").unwrap().components(), 2);
    }
}
