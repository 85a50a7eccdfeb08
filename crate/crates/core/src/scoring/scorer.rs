//! Batch scoring interface consumed by the environment.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::molgraph::Molecule;

use super::plogp::penalized_clogp;
use super::qed::{qed_with, QedParams};
use super::sa::FragmentTable;

/// Floor reward suggested for scorers bounded below by zero.
pub const BOUNDED_FLOOR: f64 = 0.0;
/// Floor reward suggested for penalized logP.
pub const PLOGP_FLOOR: f64 = -15.0;

/// A molecule together with its canonical SMILES.
#[derive(Debug, Clone, Copy)]
pub struct ScoreInput<'a> {
    pub molecule: &'a Molecule,
    pub smiles: &'a str,
}

/// Batch-level failure. Per-molecule failures are reported as `None` inside
/// an `Ok` batch instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("scorer process failed: {0}")]
    Process(String),
    #[error("scorer timed out")]
    Timeout,
    #[error("scorer reply {0:?} is not a number")]
    Parse(String),
    #[error("scorer returned {got} values for {expected} inputs")]
    Count { expected: usize, got: usize },
}

pub trait Scorer {
    fn name(&self) -> &str;

    /// Reward used when a molecule cannot be scored or no product exists.
    fn floor(&self) -> f64;

    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError>;

    /// Scores a batch, replacing per-molecule failures with the floor.
    fn score_or_floor(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<f64>, ScoreError> {
        let floor = self.floor();
        let out = self.score_batch(inputs)?;
        if out.len() != inputs.len() {
            return Err(ScoreError::Count {
                expected: inputs.len(),
                got: out.len(),
            });
        }
        Ok(out.into_iter().map(|s| s.unwrap_or(floor)).collect())
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn floor(&self) -> f64 {
        (**self).floor()
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        (**self).score_batch(inputs)
    }
}

impl<S: Scorer + ?Sized> Scorer for &mut S {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn floor(&self) -> f64 {
        (**self).floor()
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        (**self).score_batch(inputs)
    }
}

/// Scorer built from a per-molecule function.
pub struct FnScorer<F> {
    name: String,
    floor: f64,
    f: F,
}

impl<F: FnMut(&Molecule) -> f64> FnScorer<F> {
    pub fn new(name: &str, floor: f64, f: F) -> Self {
        FnScorer {
            name: String::from(name),
            floor,
            f,
        }
    }
}

impl<F: FnMut(&Molecule) -> f64> Scorer for FnScorer<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn floor(&self) -> f64 {
        self.floor
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(inputs.iter().map(|i| Some((self.f)(i.molecule))).collect())
    }
}

#[derive(Debug, Clone)]
pub struct QedScorer {
    params: &'static QedParams,
}

impl QedScorer {
    pub fn new() -> Self {
        QedScorer {
            params: QedParams::bundled(),
        }
    }
}

impl Default for QedScorer {
    fn default() -> Self {
        QedScorer::new()
    }
}

impl Scorer for QedScorer {
    fn name(&self) -> &str {
        "qed"
    }
    fn floor(&self) -> f64 {
        BOUNDED_FLOOR
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(inputs.iter().map(|i| Some(qed_with(i.molecule, self.params))).collect())
    }
}

#[derive(Debug, Clone)]
pub struct PlogpScorer {
    table: FragmentTable,
}

impl PlogpScorer {
    pub fn new(table: FragmentTable) -> Self {
        PlogpScorer { table }
    }

    pub fn table(&self) -> &FragmentTable {
        &self.table
    }
}

impl Scorer for PlogpScorer {
    fn name(&self) -> &str {
        "plogp"
    }
    fn floor(&self) -> f64 {
        PLOGP_FLOOR
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(inputs.iter().map(|i| Some(penalized_clogp(i.molecule, &self.table))).collect())
    }
}

/// Number of heavy atoms; handy for tests of the argmax logic.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeavyAtomScorer;

impl Scorer for HeavyAtomScorer {
    fn name(&self) -> &str {
        "heavy_atoms"
    }
    fn floor(&self) -> f64 {
        BOUNDED_FLOOR
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(inputs.iter().map(|i| Some(i.molecule.heavy_atom_count() as f64)).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn name(&self) -> &str {
        "constant"
    }
    fn floor(&self) -> f64 {
        BOUNDED_FLOOR
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        Ok(inputs.iter().map(|_| Some(self.0)).collect())
    }
}

/// Applies `shape(raw, molecule)` to every successful score of the inner
/// scorer. The floor is passed through unshaped.
pub struct Shaped<S, F> {
    inner: S,
    shape: F,
}

impl<S: Scorer, F: FnMut(f64, &Molecule) -> f64> Shaped<S, F> {
    pub fn new(inner: S, shape: F) -> Self {
        Shaped { inner, shape }
    }
}

impl<S: Scorer, F: FnMut(f64, &Molecule) -> f64> Scorer for Shaped<S, F> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn floor(&self) -> f64 {
        self.inner.floor()
    }
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        let raw = self.inner.score_batch(inputs)?;
        Ok(raw
            .into_iter()
            .zip(inputs)
            .map(|(s, i)| s.map(|v| (self.shape)(v, i.molecule)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;
    use alloc::vec;

    struct Flaky;
    impl Scorer for Flaky {
        fn name(&self) -> &str {
            "flaky"
        }
        fn floor(&self) -> f64 {
            -1.0
        }
        fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
            Ok(inputs.iter().map(|i| if i.smiles == "C" { None } else { Some(2.0) }).collect())
        }
    }

    #[test]
    fn floor_substitution() {
        let a = parse_smiles("C").unwrap();
        let b = parse_smiles("CC").unwrap();
        let inputs = [
            ScoreInput { molecule: &a, smiles: "C" },
            ScoreInput { molecule: &b, smiles: "CC" },
        ];
        assert_eq!(Flaky.score_or_floor(&inputs).unwrap(), vec![-1.0, 2.0]);
        let mut shaped = Shaped::new(Flaky, |v, _: &Molecule| v * 10.0);
        assert_eq!(shaped.score_or_floor(&inputs).unwrap(), vec![-1.0, 20.0]);
        assert_eq!(HeavyAtomScorer.score_or_floor(&inputs).unwrap(), vec![1.0, 2.0]);
        let mut boxed: Box<dyn Scorer> = Box::new(ConstantScorer(0.25));
        assert_eq!(boxed.score_or_floor(&inputs).unwrap(), vec![0.25, 0.25]);
    }
}
