//! SMARTS-subset patterns, subgraph matching and reaction templates.
//!
//! Supported atom primitives: element symbols (aliphatic and aromatic),
//! `#n`, `*`, `a`, `A`, charge, `D<n>`, `H<n>`, `R`, `!R`, single-primitive
//! negation, and `;`/`&`/implicit conjunction. Bonds: `-`, `=`, `#`, `:`,
//! `~`, with an unwritten bond meaning single or aromatic. Disjunction and
//! recursive SMARTS are rejected with [`PatternError::Unsupported`].

mod matcher;
mod smarts;
mod template;

use alloc::string::String;

pub use matcher::{all_mappings, count_matches, find_matches, has_match, has_unique_match, MatchMap};
pub use smarts::{parse_smarts, AtomPrimitive, BondQuery, PatternAtom, PatternBond, PatternGraph};
pub use template::{
    apply, parse_template, parse_template_file, Product, ReactionTemplate, MAX_COMBINATIONS,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported SMARTS feature '{0}'")]
    Unsupported(String),
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("atom-map error: {0}")]
    MapLabel(String),
    #[error("template format error: {0}")]
    Format(String),
    #[error("template takes {template} reactant(s) but {supplied} were supplied")]
    Arity { template: usize, supplied: usize },
    #[error("reactant {reactant} does not match its pattern")]
    NoMatch { reactant: usize },
}
