//! Building-block files: one `SMILES[<TAB>identifier]` record per line, `#`
//! comments and blank lines ignored. Unparseable records are collected as
//! rejects and can be written to a `.rejects` sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pgfs_core::molgraph::{parse_smiles, write_smiles, MolError, Molecule};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BlockRecord {
    pub line: usize,
    /// Canonical SMILES.
    pub smiles: String,
    pub id: Option<String>,
    pub molecule: Molecule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: usize,
    pub text: String,
    pub code: &'static str,
    pub detail: String,
}

/// Short stable code for a parse failure.
pub fn reason_code(e: &MolError) -> &'static str {
    match e {
        MolError::Empty => "EMPTY",
        MolError::UnexpectedChar { .. }
        | MolError::UnbalancedParen { .. }
        | MolError::UnclosedRing { .. }
        | MolError::BadCharge { .. }
        | MolError::BadBracket { .. } => "SYNTAX",
        MolError::UnknownElement(_) => "ELEMENT",
        MolError::Valence { .. } => "VALENCE",
        MolError::Kekulize => "AROMATICITY",
        MolError::InvalidBond { .. } => "BOND",
        MolError::Isotope => "ISOTOPE",
    }
}

pub fn parse_blocks(text: &str) -> (Vec<BlockRecord>, Vec<Reject>) {
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.splitn(2, '\t');
        let smiles = fields.next().unwrap_or("").trim();
        let id = fields.next().map(str::trim).filter(|s| !s.is_empty()).map(String::from);
        match parse_smiles(smiles) {
            Ok(molecule) => records.push(BlockRecord {
                line: k + 1,
                smiles: write_smiles(&molecule),
                id,
                molecule,
            }),
            Err(e) => rejects.push(Reject {
                line: k + 1,
                text: String::from(smiles),
                code: reason_code(&e),
                detail: e.to_string(),
            }),
        }
    }
    (records, rejects)
}

pub fn read_blocks(path: &Path) -> Result<(Vec<BlockRecord>, Vec<Reject>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_blocks(&text))
}

/// `# line<TAB>code<TAB>smiles<TAB>detail` rows.
pub fn rejects_text(rejects: &[Reject]) -> String {
    let mut out = String::from("# line\tcode\tsmiles\tdetail\n");
    for r in rejects {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.line, r.code, r.text, r.detail);
    }
    out
}

/// Sidecar name for a block file placed in `dir`: `<stem>.rejects`.
pub fn rejects_path(blocks: &Path, dir: &Path) -> PathBuf {
    let stem = blocks.file_stem().and_then(|s| s.to_str()).unwrap_or("blocks");
    dir.join(format!("{stem}.rejects"))
}
