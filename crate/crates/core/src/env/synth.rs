use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::featurize::{morgan_fingerprint, Fingerprint, SparseVec, FP_BITS};
use crate::molgraph::{parse_smiles, Molecule};
use crate::pattern::{apply, Product};
use crate::scoring::{ScoreInput, Scorer};

use super::{BuildingBlockIndex, EndReason, EnvError, EnvRng, Environment, Outcome, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub max_steps: usize,
    pub k: usize,
    /// Overrides the scorer's floor reward when set.
    pub floor: Option<f64>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            max_steps: 5,
            k: 1,
            floor: None,
        }
    }
}

/// Current intermediate R1 with its cached fingerprint and template mask.
#[derive(Debug, Clone)]
pub struct SynthState {
    pub smiles: String,
    pub molecule: Molecule,
    pub fingerprint: Fingerprint,
    pub mask: Vec<bool>,
}

impl SynthState {
    pub fn is_terminal(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }
}

/// The forward-synthesis environment over a shared block index.
pub struct SynthEnv<S> {
    index: Arc<BuildingBlockIndex>,
    scorer: S,
    config: EnvConfig,
    start_pool: Vec<usize>,
}

impl<S: Scorer> SynthEnv<S> {
    pub fn new(index: Arc<BuildingBlockIndex>, scorer: S, config: EnvConfig) -> Self {
        let start_pool = index.starts().to_vec();
        SynthEnv {
            index,
            scorer,
            config,
            start_pool,
        }
    }

    pub fn index(&self) -> &Arc<BuildingBlockIndex> {
        &self.index
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn scorer_mut(&mut self) -> &mut S {
        &mut self.scorer
    }

    pub fn floor(&self) -> f64 {
        self.config.floor.unwrap_or_else(|| self.scorer.floor())
    }

    /// Restricts [`Environment::reset`] to the given blocks, all of which must
    /// have an applicable template.
    pub fn set_start_pool(&mut self, pool: Vec<usize>) -> Result<(), EnvError> {
        if pool.is_empty() {
            return Err(EnvError::Config(String::from("empty start pool")));
        }
        if let Some(&bad) = pool.iter().find(|&&i| self.index.starts().binary_search(&i).is_err()) {
            return Err(EnvError::Config(alloc::format!("block {bad} is not a valid start")));
        }
        self.start_pool = pool;
        Ok(())
    }

    pub fn start_pool(&self) -> &[usize] {
        &self.start_pool
    }

    pub fn state_for(&self, smiles: String, molecule: Molecule) -> SynthState {
        SynthState {
            fingerprint: morgan_fingerprint(&molecule),
            mask: self.index.template_mask(&molecule),
            smiles,
            molecule,
        }
    }

    pub fn start_state(&self, block: usize) -> SynthState {
        let b = self.index.block(block);
        SynthState {
            smiles: b.smiles.clone(),
            molecule: b.molecule.clone(),
            fingerprint: b.fingerprint,
            mask: self.index.block_mask(block).to_vec(),
        }
    }

    /// Reacts `s` with each candidate second reactant (or none), scores the
    /// products and keeps the best. Candidates are tried in order; ties go to
    /// the earliest.
    pub fn step_with_candidates(
        &mut self,
        s: &SynthState,
        template: usize,
        candidates: &[Option<usize>],
        fallback_action: &[f64],
        step_index: usize,
        rng: &mut EnvRng,
    ) -> Result<Outcome<SynthState, StepRecord>, EnvError> {
        if !s.mask.get(template).copied().unwrap_or(false) {
            return Err(EnvError::MaskedTemplate(template));
        }
        let index = Arc::clone(&self.index);
        let t = &index.templates()[template];
        let mut results: Vec<(Option<usize>, usize, Product)> = Vec::new();
        for &c in candidates {
            let r2 = c.map(|i| &index.block(i).molecule);
            if let Ok(mut products) = apply(t, &s.molecule, r2) {
                if !products.is_empty() {
                    let j = rng.random_range(0..products.len());
                    results.push((c, j, products.swap_remove(j)));
                }
            }
        }
        let executed_for = |c: Option<usize>| match c {
            Some(i) => index.block(i).features.clone(),
            None => fallback_action.to_vec(),
        };

        if results.is_empty() {
            let first = candidates.first().copied().flatten();
            return Ok(Outcome {
                next: s.clone(),
                reward: self.floor(),
                done: true,
                executed: executed_for(first),
                info: StepRecord {
                    r1: s.smiles.clone(),
                    template: t.name.clone(),
                    r2: first.map(|i| index.block(i).smiles.clone()),
                    product: None,
                    product_choice: 0,
                    reward: self.floor(),
                    done: true,
                    reason: Some(EndReason::ApplyFailed),
                },
            });
        }

        let inputs: Vec<ScoreInput<'_>> = results
            .iter()
            .map(|(_, _, p)| ScoreInput {
                molecule: &p.molecule,
                smiles: &p.smiles,
            })
            .collect();
        let floor = self.floor();
        let scores: Vec<f64> = self
            .scorer
            .score_or_floor(&inputs)?
            .into_iter()
            .map(|v| if v.is_finite() { v } else { floor })
            .collect();
        let mut best = 0;
        for (i, &v) in scores.iter().enumerate() {
            if v > scores[best] {
                best = i;
            }
        }
        let (c, choice, product) = results.swap_remove(best);
        let reward = scores[best];
        let next = self.state_for(product.smiles.clone(), product.molecule);
        let reason = if next.is_terminal() {
            Some(EndReason::NoTemplates)
        } else if step_index + 1 >= self.config.max_steps {
            Some(EndReason::Horizon)
        } else {
            None
        };
        let done = reason.is_some();
        Ok(Outcome {
            info: StepRecord {
                r1: s.smiles.clone(),
                template: t.name.clone(),
                r2: c.map(|i| index.block(i).smiles.clone()),
                product: Some(product.smiles),
                product_choice: choice,
                reward,
                done,
                reason,
            },
            next,
            reward,
            done,
            executed: executed_for(c),
        })
    }
}

impl<S: Scorer> Environment for SynthEnv<S> {
    type State = SynthState;
    type Info = StepRecord;

    fn state_dim(&self) -> usize {
        FP_BITS
    }

    fn n_templates(&self) -> usize {
        self.index.templates().len()
    }

    fn action_dim(&self) -> usize {
        self.index.action_dim()
    }

    fn observe(&self, s: &SynthState) -> SparseVec {
        SparseVec::from(&s.fingerprint)
    }

    fn mask(&self, s: &SynthState) -> Vec<bool> {
        s.mask.clone()
    }

    fn reset(&mut self, rng: &mut EnvRng) -> SynthState {
        let i = self.start_pool[rng.random_range(0..self.start_pool.len())];
        self.start_state(i)
    }

    fn state_key(&self, s: &SynthState) -> String {
        s.smiles.clone()
    }

    fn restore_state(&self, key: &str) -> Option<SynthState> {
        let m = parse_smiles(key).ok()?;
        Some(self.state_for(String::from(key), m))
    }

    fn random_action(&self, _s: &SynthState, template: usize, rng: &mut EnvRng) -> Vec<f64> {
        let compat = self.index.compat(template);
        if compat.is_empty() {
            (0..self.action_dim()).map(|_| rng.random_range(-1.0..=1.0)).collect()
        } else {
            self.index.block(compat[rng.random_range(0..compat.len())]).features.clone()
        }
    }

    /// Feature row of the nearest compatible reactant; unchanged for
    /// templates without a second reactant.
    fn project_action(&self, template: usize, a: &[f64]) -> Vec<f64> {
        match self.index.knn(a, template, 1).0.first() {
            Some(&i) => self.index.block(i).features.clone(),
            None => a.to_vec(),
        }
    }

    fn step(
        &mut self,
        s: &SynthState,
        template: usize,
        a: &[f64],
        step_index: usize,
        rng: &mut EnvRng,
    ) -> Result<Outcome<SynthState, StepRecord>, EnvError> {
        if s.is_terminal() {
            return Err(EnvError::Terminal);
        }
        if !s.mask.get(template).copied().unwrap_or(false) {
            return Err(EnvError::MaskedTemplate(template));
        }
        let candidates: Vec<Option<usize>> = if self.index.templates()[template].arity() == 1 {
            vec![None]
        } else {
            self.index.knn(a, template, self.config.k.max(1)).0.into_iter().map(Some).collect()
        };
        self.step_with_candidates(s, template, &candidates, a, step_index, rng)
    }
}
