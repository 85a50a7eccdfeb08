//! A one-step continuous control problem for checking the learner in
//! isolation: one template, a fixed cloud of "reactant" points in the plane,
//! and reward equal to minus the squared distance between the chosen point
//! and a hidden target.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::featurize::SparseVec;

use super::{EnvError, EnvRng, Environment, Outcome};

pub struct PointEnv {
    pub points: Vec<[f64; 2]>,
    pub target: [f64; 2],
}

impl PointEnv {
    /// `n` points drawn uniformly from `[-1, 1]^2`.
    pub fn new(n: usize, target: [f64; 2], rng: &mut EnvRng) -> PointEnv {
        let points = (0..n)
            .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
            .collect();
        PointEnv { points, target }
    }

    /// Index of the point nearest to `a`, ties to the lower index.
    pub fn nearest(&self, a: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p[0] - a[0]) * (p[0] - a[0]) + (p[1] - a[1]) * (p[1] - a[1]);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn reward_of(&self, p: &[f64; 2]) -> f64 {
        -((p[0] - self.target[0]) * (p[0] - self.target[0]) + (p[1] - self.target[1]) * (p[1] - self.target[1]))
    }
}

impl Environment for PointEnv {
    type State = ();
    type Info = usize;

    fn state_dim(&self) -> usize {
        1
    }

    fn n_templates(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn observe(&self, _s: &()) -> SparseVec {
        SparseVec::from_dense(&[1.0])
    }

    fn mask(&self, _s: &()) -> Vec<bool> {
        vec![true]
    }

    fn reset(&mut self, _rng: &mut EnvRng) {}

    fn state_key(&self, _s: &()) -> String {
        String::new()
    }

    fn restore_state(&self, key: &str) -> Option<()> {
        key.is_empty().then_some(())
    }

    fn random_action(&self, _s: &(), _template: usize, rng: &mut EnvRng) -> Vec<f64> {
        self.points[rng.random_range(0..self.points.len())].to_vec()
    }

    fn project_action(&self, _template: usize, a: &[f64]) -> Vec<f64> {
        self.points[self.nearest(a)].to_vec()
    }

    fn step(
        &mut self,
        _s: &(),
        template: usize,
        a: &[f64],
        _step_index: usize,
        _rng: &mut EnvRng,
    ) -> Result<Outcome<(), usize>, EnvError> {
        if template != 0 {
            return Err(EnvError::MaskedTemplate(template));
        }
        let i = self.nearest(a);
        let p = self.points[i];
        Ok(Outcome {
            next: (),
            reward: self.reward_of(&p),
            done: true,
            executed: p.to_vec(),
            info: i,
        })
    }
}
