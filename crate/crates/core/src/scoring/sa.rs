//! Corpus-derived synthetic accessibility.
//!
//! Every circular environment (radius 0 to 2) of a molecule is looked up in a
//! table of document frequencies built from a reference corpus. An
//! environment's contribution is its log frequency minus the mean log
//! frequency of the table, so common fragments score positive and rare ones
//! negative. The raw score adds size, ring-count and macrocycle penalties to
//! the negated mean contribution, and an affine map anchored on the corpus
//! 5th and 95th percentiles sends it to `[1, 10]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::featurize::{environments, FP_RADIUS};
use crate::molgraph::Molecule;

/// Smallest corpus accepted by [`FragmentTable::build`].
pub const MIN_SA_CORPUS: usize = 100;
/// Document frequency assumed for an environment absent from the corpus.
const UNSEEN_FREQUENCY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SaError {
    #[error("fragment table needs at least {MIN_SA_CORPUS} molecules, got {0}")]
    CorpusTooSmall(usize),
    #[error("fragment table is empty")]
    Empty,
    #[error("fragment table line {line}: {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentTable {
    contributions: BTreeMap<u64, f64>,
    unseen: f64,
    p5: f64,
    p95: f64,
}

/// Structural terms that enter the raw score alongside the fragment term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexity {
    pub heavy_atoms: usize,
    pub rings: usize,
    pub largest_ring: usize,
}

impl Complexity {
    pub fn of(m: &Molecule) -> Complexity {
        Complexity {
            heavy_atoms: m.heavy_atom_count(),
            rings: m.rings().len(),
            largest_ring: m.largest_ring_size(),
        }
    }

    pub fn penalty(&self) -> f64 {
        let n = self.heavy_atoms as f64;
        let size = libm::pow(n, 1.005) - n;
        let rings = libm::log(1.0 + self.rings as f64);
        let macrocycle = if self.largest_ring > 8 {
            1.0 + libm::log((self.largest_ring - 7) as f64)
        } else {
            0.0
        };
        size + rings + macrocycle
    }
}

fn environment_ids(m: &Molecule) -> Vec<u64> {
    environments(m, FP_RADIUS).into_iter().map(|e| e.id).collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

impl FragmentTable {
    pub fn build(corpus: &[Molecule]) -> Result<FragmentTable, SaError> {
        if corpus.len() < MIN_SA_CORPUS {
            return Err(SaError::CorpusTooSmall(corpus.len()));
        }
        let mut df: BTreeMap<u64, usize> = BTreeMap::new();
        let per_mol: Vec<Vec<u64>> = corpus.iter().map(environment_ids).collect();
        for ids in &per_mol {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            for id in ids {
                *df.entry(id).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(SaError::Empty);
        }
        let mean = df.values().map(|&c| libm::log(c as f64)).sum::<f64>() / df.len() as f64;
        let contributions: BTreeMap<u64, f64> = df.iter().map(|(&id, &c)| (id, libm::log(c as f64) - mean)).collect();
        let mut table = FragmentTable {
            contributions,
            unseen: libm::log(UNSEEN_FREQUENCY) - mean,
            p5: 0.0,
            p95: 0.0,
        };
        let mut raws: Vec<f64> = corpus
            .iter()
            .zip(&per_mol)
            .map(|(m, ids)| table.fragment_penalty_of(ids) + Complexity::of(m).penalty())
            .collect();
        raws.sort_by(f64::total_cmp);
        table.p5 = percentile(&raws, 0.05);
        table.p95 = percentile(&raws, 0.95);
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.contributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributions.is_empty()
    }

    pub fn contribution(&self, id: u64) -> f64 {
        self.contributions.get(&id).copied().unwrap_or(self.unseen)
    }

    pub fn anchors(&self) -> (f64, f64) {
        (self.p5, self.p95)
    }

    fn fragment_penalty_of(&self, ids: &[u64]) -> f64 {
        if ids.is_empty() {
            return 0.0;
        }
        -ids.iter().map(|&id| self.contribution(id)).sum::<f64>() / ids.len() as f64
    }

    /// Negated mean contribution over the molecule's environments.
    pub fn fragment_penalty(&self, m: &Molecule) -> f64 {
        self.fragment_penalty_of(&environment_ids(m))
    }

    pub fn raw_score(&self, m: &Molecule) -> f64 {
        self.fragment_penalty(m) + Complexity::of(m).penalty()
    }

    /// Maps a raw score to `[1, 10]` using the corpus anchors.
    pub fn scale(&self, raw: f64) -> f64 {
        if self.p95 <= self.p5 {
            return if raw <= self.p5 { 1.0 } else { 10.0 };
        }
        (1.0 + 9.0 * (raw - self.p5) / (self.p95 - self.p5)).clamp(1.0, 10.0)
    }

    pub fn score_parts(&self, fragment_penalty: f64, complexity: Complexity) -> f64 {
        self.scale(fragment_penalty + complexity.penalty())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# pgfs fragment table v1\n");
        let _ = writeln!(s, "p5\t{:?}", self.p5);
        let _ = writeln!(s, "p95\t{:?}", self.p95);
        let _ = writeln!(s, "unseen\t{:?}", self.unseen);
        for (id, c) in &self.contributions {
            let _ = writeln!(s, "{id:016x}\t{c:?}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<FragmentTable, SaError> {
        let mut header: [Option<f64>; 3] = [None; 3];
        let mut contributions = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| SaError::Format {
                line: line_no,
                msg: String::from(msg),
            };
            let (key, value) = line.split_once('\t').ok_or_else(|| err("expected key<TAB>value"))?;
            let v: f64 = value.trim().parse().map_err(|_| err("non-numeric value"))?;
            if !v.is_finite() {
                return Err(err("non-finite value"));
            }
            match key {
                "p5" => header[0] = Some(v),
                "p95" => header[1] = Some(v),
                "unseen" => header[2] = Some(v),
                _ => {
                    let id = u64::from_str_radix(key, 16).map_err(|_| err("bad environment id"))?;
                    if contributions.insert(id, v).is_some() {
                        return Err(err("duplicate environment id"));
                    }
                }
            }
        }
        let [Some(p5), Some(p95), Some(unseen)] = header else {
            return Err(SaError::Format {
                line: 0,
                msg: format!("missing p5, p95 or unseen entry"),
            });
        };
        if contributions.is_empty() {
            return Err(SaError::Empty);
        }
        Ok(FragmentTable {
            contributions,
            unseen,
            p5,
            p95,
        })
    }
}

/// Synthetic accessibility in `[1, 10]`; larger is harder.
pub fn sa_score(m: &Molecule, table: &FragmentTable) -> f64 {
    table.scale(table.raw_score(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn corpus(smiles: &[&str], copies: usize) -> Vec<Molecule> {
        let mut out = Vec::new();
        for _ in 0..copies {
            for s in smiles {
                out.push(parse_smiles(s).unwrap());
            }
        }
        out
    }

    #[test]
    fn too_small_corpus_rejected() {
        let c = corpus(&["CCO"], 99);
        assert_eq!(FragmentTable::build(&c), Err(SaError::CorpusTooSmall(99)));
    }

    #[test]
    fn repeated_molecule_has_zero_fragment_penalty() {
        let c = corpus(&["CC(=O)Nc1ccccc1"], 120);
        let t = FragmentTable::build(&c).unwrap();
        assert!(t.fragment_penalty(&c[0]).abs() < 1e-12);
        // degenerate anchors: the corpus molecule itself sits at the bottom
        assert_eq!(sa_score(&c[0], &t), 1.0);
    }

    #[test]
    fn rare_fragments_raise_the_score() {
        let c = corpus(&["CCO", "CCCO", "CCN", "CCCC", "c1ccccc1C", "CC(C)O", "OCCO", "CCOC", "NCCO", "CCCCO"], 12);
        let t = FragmentTable::build(&c).unwrap();
        let common = parse_smiles("CCCO").unwrap();
        let odd = parse_smiles("FC(F)(F)S(=O)(=O)Br").unwrap();
        assert!(t.fragment_penalty(&odd) > t.fragment_penalty(&common));
        for m in &c {
            let s = sa_score(m, &t);
            assert!((1.0..=10.0).contains(&s));
        }
    }

    #[test]
    fn macrocycle_penalty_non_decreasing() {
        let mut prev = f64::NEG_INFINITY;
        for l in 3..30 {
            let p = Complexity {
                heavy_atoms: 30,
                rings: 2,
                largest_ring: l,
            }
            .penalty();
            assert!(p >= prev, "{l}");
            prev = p;
        }
    }

    #[test]
    fn text_round_trip() {
        let c = corpus(&["CCO", "c1ccccc1O", "CC(=O)O", "CCN(C)C"], 30);
        let t = FragmentTable::build(&c).unwrap();
        let back = FragmentTable::from_text(&t.to_text()).unwrap();
        assert_eq!(back, t);
    }
}
