use alloc::vec::Vec;

use rand::Rng;

use crate::scoring::Scorer;

use super::{EnvError, EnvRng, EpisodeRecord, SynthEnv};

/// Random-search baseline: a uniform valid template and a uniform compatible
/// second reactant at every step, until `budget` reactions have been run.
///
/// Episodes start from `starts` in rotation when given, otherwise from the
/// environment's start pool. The last episode is cut short when the budget
/// runs out mid-episode.
pub fn random_search<S: Scorer>(
    env: &mut SynthEnv<S>,
    budget: usize,
    starts: Option<&[usize]>,
    rng: &mut EnvRng,
) -> Result<Vec<EpisodeRecord>, EnvError> {
    let mut episodes = Vec::new();
    let mut used = 0;
    let max_steps = env.config().max_steps;
    while used < budget {
        let mut s = match starts {
            Some(list) if !list.is_empty() => env.start_state(list[episodes.len() % list.len()]),
            _ => {
                let pool = env.start_pool();
                let i = pool[rng.random_range(0..pool.len())];
                env.start_state(i)
            }
        };
        let mut record = EpisodeRecord::default();
        for step in 0..max_steps {
            if used == budget {
                break;
            }
            let valid: Vec<usize> = (0..s.mask.len()).filter(|&i| s.mask[i]).collect();
            let template = valid[rng.random_range(0..valid.len())];
            let compat = env.index().compat(template);
            let candidate = if compat.is_empty() {
                None
            } else {
                Some(compat[rng.random_range(0..compat.len())])
            };
            let outcome = env.step_with_candidates(&s, template, &[candidate], &[], step, rng)?;
            used += 1;
            record.steps.push(outcome.info);
            if outcome.done {
                break;
            }
            s = outcome.next;
        }
        episodes.push(record);
    }
    Ok(episodes)
}
