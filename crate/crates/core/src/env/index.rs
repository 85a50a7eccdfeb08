use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::featurize::{descriptor_vector_for, morgan_fingerprint, Descriptor, Fingerprint, NormStats, SparseVec};
use crate::molgraph::{parse_smiles, write_smiles, Molecule};
use crate::pattern::{has_unique_match, ReactionTemplate};

use super::EnvError;

/// One purchasable starting material.
#[derive(Debug, Clone)]
pub struct Block {
    pub smiles: String,
    pub molecule: Molecule,
    pub fingerprint: Fingerprint,
    /// Normalized descriptor row.
    pub features: Vec<f64>,
}

/// Why a template did not survive index construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    TooFewReactants { compatible: usize, required: usize },
}

#[derive(Debug, Clone, Default)]
pub struct IndexReport {
    pub blocks_in: usize,
    pub duplicates: usize,
    pub retained: Vec<(String, usize)>,
    pub dropped: Vec<(String, DropReason)>,
}

/// Default compatibility threshold for a corpus of `n` blocks.
pub fn default_min_compat(n: usize) -> usize {
    (n / 1000).max(5)
}

/// Blocks, their features, and the templates that survived filtering.
#[derive(Debug, Clone)]
pub struct BuildingBlockIndex {
    blocks: Vec<Block>,
    templates: Vec<ReactionTemplate>,
    compat: Vec<Vec<usize>>,
    descriptors: Vec<Descriptor>,
    norm: NormStats,
    starts: Vec<usize>,
    masks: Vec<Vec<bool>>,
    hash: String,
}

impl BuildingBlockIndex {
    /// Deduplicates blocks by canonical SMILES (first occurrence wins),
    /// computes second-reactant compatibility with the unique-match rule and
    /// drops bimolecular templates with fewer than `min_compat` partners.
    pub fn build(
        molecules: Vec<Molecule>,
        templates: Vec<ReactionTemplate>,
        descriptors: &[Descriptor],
        min_compat: Option<usize>,
    ) -> Result<(BuildingBlockIndex, IndexReport), EnvError> {
        let mut report = IndexReport {
            blocks_in: molecules.len(),
            ..IndexReport::default()
        };
        let mut seen = BTreeSet::new();
        let mut kept: Vec<(String, Molecule)> = Vec::new();
        for m in molecules {
            let s = write_smiles(&m);
            if seen.insert(s.clone()) {
                // canonical atom order, matching molecules restored from SMILES
                let m = parse_smiles(&s).unwrap_or(m);
                kept.push((s, m));
            } else {
                report.duplicates += 1;
            }
        }
        if kept.is_empty() {
            return Err(EnvError::Config(String::from("no building blocks")));
        }
        let required = min_compat.unwrap_or_else(|| default_min_compat(kept.len()));

        let raw: Vec<Vec<f64>> = kept.iter().map(|(_, m)| descriptor_vector_for(m, descriptors)).collect();
        let names: Vec<&str> = descriptors.iter().map(|d| d.name()).collect();
        let norm = NormStats::fit(&names, &raw).map_err(|e| EnvError::Config(alloc::format!("{e}")))?;

        let mut retained = Vec::new();
        let mut compat = Vec::new();
        for t in templates {
            let list: Vec<usize> = if t.arity() == 2 {
                kept.iter()
                    .enumerate()
                    .filter(|(_, (_, m))| has_unique_match(&t.reactants[1], m))
                    .map(|(i, _)| i)
                    .collect()
            } else {
                Vec::new()
            };
            if t.arity() == 2 && list.len() < required {
                report.dropped.push((
                    t.name.clone(),
                    DropReason::TooFewReactants {
                        compatible: list.len(),
                        required,
                    },
                ));
                continue;
            }
            report.retained.push((t.name.clone(), list.len()));
            retained.push(t);
            compat.push(list);
        }
        if retained.is_empty() {
            return Err(EnvError::Config(String::from("no reaction template retained")));
        }

        let blocks: Vec<Block> = kept
            .into_iter()
            .zip(raw)
            .map(|((smiles, molecule), r)| Block {
                fingerprint: morgan_fingerprint(&molecule),
                features: norm.normalize(&r),
                smiles,
                molecule,
            })
            .collect();
        debug_assert!(blocks.iter().all(|b| b.features.iter().all(|x| (-1.0..=1.0).contains(x))));

        let mut index = BuildingBlockIndex {
            blocks,
            templates: retained,
            compat,
            descriptors: descriptors.to_vec(),
            norm,
            starts: Vec::new(),
            masks: Vec::new(),
            hash: String::new(),
        };
        index.masks = index.blocks.iter().map(|b| index.template_mask(&b.molecule)).collect();
        index.starts = (0..index.blocks.len())
            .filter(|&i| index.masks[i].iter().any(|&x| x))
            .collect();
        if index.starts.is_empty() {
            return Err(EnvError::Config(String::from("no block has an applicable template")));
        }
        index.hash = index.compute_hash();
        Ok((index, report))
    }

    fn compute_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.templates {
            h.update(t.to_line().as_bytes());
            h.update(b"\n");
        }
        h.update(b"--\n");
        for b in &self.blocks {
            h.update(b.smiles.as_bytes());
            h.update(b"\n");
        }
        h.update(b"--\n");
        for d in &self.descriptors {
            h.update(d.name().as_bytes());
            h.update(b"\n");
        }
        let mut s = String::with_capacity(64);
        for byte in h.finalize() {
            let _ = write!(s, "{byte:02x}");
        }
        s
    }

    /// `mask[i]` is true when template `i`'s first reactant pattern matches
    /// `m` exactly once.
    pub fn template_mask(&self, m: &Molecule) -> Vec<bool> {
        self.templates
            .iter()
            .map(|t| has_unique_match(&t.reactants[0], m))
            .collect()
    }

    /// K nearest compatible blocks of `template` to `a`, ties broken by block
    /// index. The flag is set when fewer than `k` compatible blocks exist.
    pub fn knn(&self, a: &[f64], template: usize, k: usize) -> (Vec<usize>, bool) {
        let list = &self.compat[template];
        let mut d: Vec<(f64, usize)> = list
            .iter()
            .map(|&i| {
                let f = &self.blocks[i].features;
                (f.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum::<f64>(), i)
            })
            .collect();
        let cmp = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
        let flagged = k > d.len();
        let k = k.min(d.len());
        if k == 0 {
            return (Vec::new(), flagged);
        }
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        (d.into_iter().map(|(_, i)| i).collect(), flagged)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    pub fn templates(&self) -> &[ReactionTemplate] {
        &self.templates
    }

    pub fn template_index(&self, name: &str) -> Option<usize> {
        self.templates.iter().position(|t| t.name == name)
    }

    pub fn compat(&self, template: usize) -> &[usize] {
        &self.compat[template]
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn norm(&self) -> &NormStats {
        &self.norm
    }

    pub fn action_dim(&self) -> usize {
        self.descriptors.len()
    }

    /// Blocks with at least one applicable template, ascending.
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn block_mask(&self, i: usize) -> &[bool] {
        &self.masks[i]
    }

    pub fn block_by_smiles(&self, smiles: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.smiles == smiles)
    }

    /// Hex SHA-256 over templates, block SMILES and descriptor names.
    pub fn corpus_hash(&self) -> &str {
        &self.hash
    }

    pub fn features_of(&self, m: &Molecule) -> Vec<f64> {
        self.norm.normalize(&descriptor_vector_for(m, &self.descriptors))
    }

    pub fn state_features(fp: &Fingerprint) -> SparseVec {
        SparseVec::from(fp)
    }
}
