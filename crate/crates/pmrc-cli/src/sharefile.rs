//! Binary per-node share files.
//!
//! Layout: 4-byte magic "PMRC", one version byte, the 32-byte manifest
//! checksum, the node id as u16 little-endian, then stripes x alpha symbols,
//! each little-endian in the smallest of 1, 2, or 4 bytes that holds q-1.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShareFileError {
    #[error("not a share file (bad magic)")]
    BadMagic,
    #[error("unsupported share-file version {0}")]
    BadVersion(u8),
    #[error("share file is truncated or misaligned")]
    Truncated,
    #[error("share file holds symbol {0}, too large for the field")]
    SymbolOutOfRange(u64),
    #[error("share file belongs to a different manifest")]
    ManifestMismatch,
    #[error("share file is for node {got}, expected {expected}")]
    WrongNode { expected: usize, got: usize },
    #[error("share file holds {got} symbols, expected {expected}")]
    WrongLength { expected: usize, got: usize },
}

pub const MAGIC: [u8; 4] = *b"PMRC";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 32 + 2;

/// Smallest of 1, 2, or 4 bytes that encodes every value below q.
pub fn symbol_width(q: u64) -> usize {
    if q - 1 <= 0xFF {
        1
    } else if q - 1 <= 0xFFFF {
        2
    } else {
        4
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub node_id: u16,
    pub manifest_checksum: [u8; 32],
    /// stripes x alpha symbol values, stripe-major.
    pub symbols: Vec<u64>,
}

impl ShareFile {
    pub fn to_bytes(&self, q: u64) -> Vec<u8> {
        let width = symbol_width(q);
        let mut out = Vec::with_capacity(HEADER_LEN + self.symbols.len() * width);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.manifest_checksum);
        out.extend_from_slice(&self.node_id.to_le_bytes());
        for &s in &self.symbols {
            out.extend_from_slice(&s.to_le_bytes()[..width]);
        }
        out
    }

    pub fn from_bytes(data: &[u8], q: u64) -> Result<Self, ShareFileError> {
        if data.len() < HEADER_LEN {
            return Err(ShareFileError::Truncated);
        }
        if data[..4] != MAGIC {
            return Err(ShareFileError::BadMagic);
        }
        if data[4] != VERSION {
            return Err(ShareFileError::BadVersion(data[4]));
        }
        let mut manifest_checksum = [0u8; 32];
        manifest_checksum.copy_from_slice(&data[5..37]);
        let node_id = u16::from_le_bytes([data[37], data[38]]);
        let width = symbol_width(q);
        let payload = &data[HEADER_LEN..];
        if payload.len() % width != 0 {
            return Err(ShareFileError::Truncated);
        }
        let mut symbols = Vec::with_capacity(payload.len() / width);
        for chunk in payload.chunks(width) {
            let mut word = [0u8; 8];
            word[..width].copy_from_slice(chunk);
            let value = u64::from_le_bytes(word);
            if value >= q {
                return Err(ShareFileError::SymbolOutOfRange(value));
            }
            symbols.push(value);
        }
        Ok(ShareFile {
            node_id,
            manifest_checksum,
            symbols,
        })
    }

    /// Full consistency check against the manifest this share should serve.
    pub fn validate(
        &self,
        manifest_checksum: &[u8; 32],
        expected_node: usize,
        expected_symbols: usize,
    ) -> Result<(), ShareFileError> {
        if &self.manifest_checksum != manifest_checksum {
            return Err(ShareFileError::ManifestMismatch);
        }
        if self.node_id as usize != expected_node {
            return Err(ShareFileError::WrongNode {
                expected: expected_node,
                got: self.node_id as usize,
            });
        }
        if self.symbols.len() != expected_symbols {
            return Err(ShareFileError::WrongLength {
                expected: expected_symbols,
                got: self.symbols.len(),
            });
        }
        Ok(())
    }
}
