//! Penalized logP: lipophilicity minus synthetic accessibility minus a
//! large-ring penalty.

use crate::molgraph::Molecule;

use super::crippen::crippen_logp;
use super::sa::{sa_score, FragmentTable};

/// The three terms of [`penalized_clogp`], kept apart for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlogpParts {
    pub logp: f64,
    pub sa: f64,
    pub ring_penalty: f64,
}

impl PlogpParts {
    pub fn of(m: &Molecule, table: &FragmentTable) -> PlogpParts {
        PlogpParts {
            logp: crippen_logp(m),
            sa: sa_score(m, table),
            ring_penalty: ring_penalty(m),
        }
    }

    pub fn total(&self) -> f64 {
        self.logp - self.sa - self.ring_penalty
    }
}

/// `max(0, L - 6)` for largest ring size `L` (0 when acyclic).
pub fn ring_penalty(m: &Molecule) -> f64 {
    m.largest_ring_size().saturating_sub(6) as f64
}

pub fn penalized_clogp(m: &Molecule, table: &FragmentTable) -> f64 {
    PlogpParts::of(m, table).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn ring_penalties() {
        assert_eq!(ring_penalty(&parse_smiles("CCCC").unwrap()), 0.0);
        assert_eq!(ring_penalty(&parse_smiles("C1CCCCC1").unwrap()), 0.0);
        assert_eq!(ring_penalty(&parse_smiles("C1CCCCCCC1").unwrap()), 2.0);
    }
}
