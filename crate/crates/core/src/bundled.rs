//! The demonstration corpus shipped with the crate.

/// Building blocks, `SMILES<TAB>identifier` per line.
pub const BLOCKS: &str = include_str!("../data/blocks.smi");

/// Reaction templates, `name<TAB>reaction<TAB>arity` per line.
pub const TEMPLATES: &str = include_str!("../data/templates.tsv");
