//! Locating and loading the block and template corpora.
//!
//! Paths given explicitly win. Otherwise the files `blocks.smi` and
//! `templates.tsv` are looked up in `$PGFS_DATA_DIR`, and failing that the
//! copies compiled into the binary are used.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pgfs_core::bundled;
use pgfs_core::env::{BuildingBlockIndex, IndexReport};
use pgfs_core::featurize::Descriptor;
use pgfs_core::pattern::{parse_template_file, ReactionTemplate};

use crate::blocks::{parse_blocks, Reject};
use crate::error::{Error, Result};

pub const DATA_DIR_VAR: &str = "PGFS_DATA_DIR";

/// Where a corpus file came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Bundled,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::File(p) => write!(f, "{}", p.display()),
            Source::Bundled => f.write_str("<bundled>"),
        }
    }
}

pub fn resolve(explicit: Option<&Path>, file_name: &str) -> Source {
    if let Some(p) = explicit {
        return Source::File(p.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
        let p = Path::new(&dir).join(file_name);
        if p.exists() {
            return Source::File(p);
        }
    }
    Source::Bundled
}

fn read_source(src: &Source, bundled_text: &'static str) -> Result<String> {
    match src {
        Source::File(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e)),
        Source::Bundled => Ok(String::from(bundled_text)),
    }
}

pub fn load_templates(src: &Source) -> Result<Vec<ReactionTemplate>> {
    let text = read_source(src, bundled::TEMPLATES)?;
    parse_template_file(&text).map_err(|(line, e)| Error::data(format!("{src}: line {line}: {e}")))
}

/// A built index together with what was learned while building it.
pub struct Corpus {
    pub index: Arc<BuildingBlockIndex>,
    pub report: IndexReport,
    pub rejects: Vec<Reject>,
    /// Identifier of each retained block, keyed by canonical SMILES.
    pub ids: BTreeMap<String, String>,
    pub blocks_source: Source,
    pub templates_source: Source,
}

impl Corpus {
    pub fn load(blocks: Option<&Path>, templates: Option<&Path>, min_compat: Option<usize>) -> Result<Corpus> {
        let blocks_source = resolve(blocks, "blocks.smi");
        let templates_source = resolve(templates, "templates.tsv");
        let text = read_source(&blocks_source, bundled::BLOCKS)?;
        let (records, rejects) = parse_blocks(&text);
        let mut ids = BTreeMap::new();
        for r in &records {
            if let Some(id) = &r.id {
                ids.entry(r.smiles.clone()).or_insert_with(|| id.clone());
            }
        }
        let templates = load_templates(&templates_source)?;
        let molecules = records.into_iter().map(|r| r.molecule).collect();
        let (index, report) = BuildingBlockIndex::build(molecules, templates, &Descriptor::ALL, min_compat)
            .map_err(|e| Error::data(format!("building index: {e}")))?;
        Ok(Corpus {
            index: Arc::new(index),
            report,
            rejects,
            ids,
            blocks_source,
            templates_source,
        })
    }
}
