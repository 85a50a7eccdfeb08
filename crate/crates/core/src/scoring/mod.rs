//! Reward functions and the applicability-domain filter.

pub mod ad;
pub mod crippen;
pub mod plogp;
pub mod qed;
pub mod sa;
mod scorer;

pub use ad::{AdError, AdModel};
pub use crippen::{crippen_logp, crippen_mr, CrippenResult, CrippenTable};
pub use plogp::{penalized_clogp, ring_penalty, PlogpParts};
pub use qed::{qed, qed_properties, qed_with, Ads, QedParams, QED_PROPERTIES};
pub use sa::{sa_score, Complexity, FragmentTable, SaError, MIN_SA_CORPUS};
pub use scorer::{
    ConstantScorer, FnScorer, HeavyAtomScorer, PlogpScorer, QedScorer, ScoreError, ScoreInput, Scorer, Shaped,
    BOUNDED_FLOOR, PLOGP_FLOOR,
};
