//! State fingerprints and action-space descriptors.

mod descriptors;
mod morgan;
mod norm;
mod sparse;

use alloc::string::String;

pub use descriptors::{
    aromatic_ring_count, balaban_j, bond_complexity, descriptor_vector, descriptor_vector_for, fraction_csp3,
    h_bond_acceptors, h_bond_donors, heteroatom_fraction, mol_weight, rotatable_bonds, tpsa, Descriptor,
};
pub use morgan::{
    environments, morgan_fingerprint, morgan_fingerprint_with, Environment, Fingerprint, FP_BITS, FP_RADIUS,
};
pub use norm::NormStats;
pub use sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeaturizeError {
    #[error("cannot fit normalization on an empty corpus")]
    EmptyCorpus,
    #[error("descriptor rows have inconsistent dimensions")]
    Dimension,
    #[error("normalization file: {0}")]
    Format(String),
}
