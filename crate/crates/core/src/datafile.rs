//! Bundled text data files.
//!
//! Each file starts with `#` header lines; one of them must be
//! `# sha256: <hex>` holding the SHA-256 of the body, where the body is every
//! non-comment, non-blank line joined with `\n` terminators.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("missing checksum header")]
    MissingChecksum,
    #[error("checksum mismatch (declared {declared}, computed {computed})")]
    ChecksumMismatch { declared: String, computed: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        out.push(char::from_digit((b >> 4) as u32, 16).unwrap_or('0'));
        out.push(char::from_digit((b & 15) as u32, 16).unwrap_or('0'));
    }
    out
}

/// Body lines with their 1-based line numbers.
pub fn body_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(k, l)| (k + 1, l))
        .collect()
}

/// Checksum of the body as defined in the module docs.
pub fn body_checksum(text: &str) -> String {
    let mut joined = String::new();
    for (_, l) in body_lines(text) {
        joined.push_str(l.trim_end());
        joined.push('\n');
    }
    sha256_hex(joined.as_bytes())
}

/// Verifies the checksum header and returns the body lines.
pub fn verified_body(text: &str) -> Result<Vec<(usize, &str)>, DataError> {
    let declared = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix("# sha256:"))
        .map(|s| s.trim().to_string())
        .next()
        .ok_or(DataError::MissingChecksum)?;
    let computed = body_checksum(text);
    if declared != computed {
        return Err(DataError::ChecksumMismatch { declared, computed });
    }
    Ok(body_lines(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn detects_tampering() {
        let body = "a 1\nb 2\n";
        let text = alloc::format!("# sha256: {}\n{body}", sha256_hex(body.as_bytes()));
        assert_eq!(verified_body(&text).unwrap().len(), 2);
        let bad = text.replace("b 2", "b 3");
        assert!(matches!(verified_body(&bad), Err(DataError::ChecksumMismatch { .. })));
        assert_eq!(verified_body("a 1\n"), Err(DataError::MissingChecksum));
    }
}
