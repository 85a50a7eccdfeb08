use alloc::string::String;

use crate::molgraph::parse_smiles;
use crate::pattern::apply;

use super::{BuildingBlockIndex, EpisodeRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("step {step}: unknown template {name}")]
    UnknownTemplate { step: usize, name: String },
    #[error("step {step}: cannot parse {smiles}")]
    Parse { step: usize, smiles: String },
    #[error("step {step}: r1 {found} does not continue from {expected}")]
    Broken { step: usize, expected: String, found: String },
    #[error("step {step}: recorded product {recorded} not reproduced")]
    Mismatch { step: usize, recorded: String },
    #[error("step {step}: recorded failure but the reaction succeeds")]
    UnexpectedSuccess { step: usize },
}

/// Re-runs every recorded reaction from the episode's start and checks that
/// each recorded product comes out at its recorded position.
pub fn replay_episode(index: &BuildingBlockIndex, episode: &EpisodeRecord) -> Result<(), ReplayError> {
    let mut current: Option<String> = None;
    for (step, rec) in episode.steps.iter().enumerate() {
        if let Some(prev) = &current {
            if *prev != rec.r1 {
                return Err(ReplayError::Broken {
                    step,
                    expected: prev.clone(),
                    found: rec.r1.clone(),
                });
            }
        }
        let t = index
            .template_index(&rec.template)
            .map(|i| &index.templates()[i])
            .ok_or_else(|| ReplayError::UnknownTemplate {
                step,
                name: rec.template.clone(),
            })?;
        let parse = |s: &str| {
            parse_smiles(s).map_err(|_| ReplayError::Parse {
                step,
                smiles: String::from(s),
            })
        };
        let r1 = parse(&rec.r1)?;
        let r2 = rec.r2.as_deref().map(parse).transpose()?;
        let products = apply(t, &r1, r2.as_ref()).unwrap_or_default();
        match &rec.product {
            Some(p) => {
                if products.get(rec.product_choice).map(|x| &x.smiles) != Some(p) {
                    return Err(ReplayError::Mismatch {
                        step,
                        recorded: p.clone(),
                    });
                }
                current = Some(p.clone());
            }
            None => {
                if !products.is_empty() {
                    return Err(ReplayError::UnexpectedSuccess { step });
                }
            }
        }
    }
    Ok(())
}
