use core::fmt;

/// Atomic number of a supported element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub const SUPPORTED: [Element; 12] = [
        Self::H,
        Self::B,
        Self::C,
        Self::N,
        Self::O,
        Self::F,
        Self::SI,
        Self::P,
        Self::S,
        Self::CL,
        Self::BR,
        Self::I,
    ];

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        Self::SUPPORTED.iter().copied().find(|e| e.0 == z)
    }

    /// Looks up a capitalised element symbol ("C", "Cl", "Si").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        let e = match symbol {
            "H" => Self::H,
            "B" => Self::B,
            "C" => Self::C,
            "N" => Self::N,
            "O" => Self::O,
            "F" => Self::F,
            "Si" => Self::SI,
            "P" => Self::P,
            "S" => Self::S,
            "Cl" => Self::CL,
            "Br" => Self::BR,
            "I" => Self::I,
            _ => return None,
        };
        Some(e)
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        match self.0 {
            1 => "H",
            5 => "B",
            6 => "C",
            7 => "N",
            8 => "O",
            9 => "F",
            14 => "Si",
            15 => "P",
            16 => "S",
            17 => "Cl",
            35 => "Br",
            53 => "I",
            _ => "?",
        }
    }

    /// Average atomic mass in g/mol.
    pub fn mass(self) -> f64 {
        match self.0 {
            1 => 1.008,
            5 => 10.812,
            6 => 12.011,
            7 => 14.007,
            8 => 15.999,
            9 => 18.998,
            14 => 28.086,
            15 => 30.974,
            16 => 32.067,
            17 => 35.453,
            35 => 79.904,
            53 => 126.904,
            _ => 0.0,
        }
    }

    /// Elements that may be written without brackets in SMILES.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements allowed to carry a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16)
    }

    pub fn is_halogen(self) -> bool {
        matches!(self.0, 9 | 17 | 35 | 53)
    }

    /// Permitted total valences (bond orders plus hydrogens) for a formal charge,
    /// ascending.
    pub fn permitted_valences(self, charge: i8) -> PermittedValences {
        let q = charge as i32;
        let mut out = PermittedValences::default();
        let base: &[i32] = match self.0 {
            1 => &[1],
            5 => &[3],
            6 | 14 => &[4],
            7 => &[3],
            8 => &[2],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            9 | 17 | 35 | 53 => &[1],
            _ => &[],
        };
        for &v in base {
            let adjusted = match self.0 {
                // pnictogens and chalcogens: +1 adds a bond, -1 removes one
                7 | 8 | 15 | 16 => v + q,
                6 | 14 => v - q.abs(),
                5 => v - q,
                1 => v - q.abs(),
                _ => v + q,
            };
            if adjusted >= 0 {
                out.push(adjusted as u8);
            }
        }
        out
    }

    /// Lowest permitted valence that is at least `used`.
    pub fn valence_at_least(self, charge: i8, used: u8) -> Option<u8> {
        self.permitted_valences(charge)
            .as_slice()
            .iter()
            .copied()
            .find(|&v| v >= used)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Small inline list of valences; at most three per element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PermittedValences {
    len: u8,
    values: [u8; 3],
}

impl PermittedValences {
    fn push(&mut self, v: u8) {
        if self.as_slice().contains(&v) {
            return;
        }
        self.values[self.len as usize] = v;
        self.len += 1;
        self.values[..self.len as usize].sort_unstable();
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.values[..self.len as usize]
    }

    pub fn contains(&self, v: u8) -> bool {
        self.as_slice().contains(&v)
    }

    pub fn lowest(&self) -> Option<u8> {
        self.as_slice().first().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_valence_table() {
        assert_eq!(Element::C.permitted_valences(0).as_slice(), &[4]);
        assert_eq!(Element::P.permitted_valences(0).as_slice(), &[3, 5]);
        assert_eq!(Element::S.permitted_valences(0).as_slice(), &[2, 4, 6]);
        assert_eq!(Element::BR.permitted_valences(0).as_slice(), &[1]);
    }

    #[test]
    fn charged_adjustments() {
        assert_eq!(Element::N.permitted_valences(1).as_slice(), &[4]);
        assert_eq!(Element::O.permitted_valences(-1).as_slice(), &[1]);
        assert_eq!(Element::S.permitted_valences(1).as_slice(), &[3, 5, 7]);
        assert_eq!(Element::C.permitted_valences(-1).as_slice(), &[3]);
        assert_eq!(Element::B.permitted_valences(-1).as_slice(), &[4]);
    }

    #[test]
    fn symbols_round_trip() {
        for e in Element::SUPPORTED {
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("Na"), None);
    }
}
