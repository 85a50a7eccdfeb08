//! Molecular graphs: SMILES input and canonical output, valence and
//! aromaticity perception, ring analysis.

mod aromatic;
mod canon;
mod element;
mod graph;
mod parse;
mod rings;
mod write;

use alloc::string::String;
use alloc::vec::Vec;

pub use canon::canonical_ranks;
pub use element::{Element, PermittedValences};
pub use graph::{Atom, Bond, BondOrder, BuildAtom, MolBuilder, Molecule};
pub use parse::{parse_smiles, parse_smiles_with_flags, ParseFlags};
pub use write::write_smiles;


/// Failure to parse or validate a molecule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MolError {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected character '{ch}' at position {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unbalanced parenthesis at position {pos}")]
    UnbalancedParen { pos: usize },
    #[error("ring closure {digit} is never closed")]
    UnclosedRing { digit: u16 },
    #[error("unsupported or unknown element '{0}'")]
    UnknownElement(String),
    #[error("malformed charge at position {pos}")]
    BadCharge { pos: usize },
    #[error("malformed bracket atom at position {pos}")]
    BadBracket { pos: usize },
    #[error("atom {atom} ({element}) has a non-permitted valence")]
    Valence { atom: usize, element: &'static str },
    #[error("aromatic system cannot be kekulized")]
    Kekulize,
    #[error("invalid bond between atoms {a} and {b}")]
    InvalidBond { a: usize, b: usize },
    #[error("isotopes are not supported")]
    Isotope,
}

/// Smallest set of smallest rings, as atom-index cycles.
pub fn ring_sets(m: &Molecule) -> Vec<Vec<usize>> {
    m.rings().to_vec()
}

/// Re-runs aromaticity perception from the kekulé form. Because perception
/// already happens at construction this is the identity on valid molecules.
pub fn perceive_aromaticity(m: &Molecule) -> Result<Molecule, MolError> {
    m.to_builder().build()
}
