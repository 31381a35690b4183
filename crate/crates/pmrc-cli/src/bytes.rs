//! Byte <-> field-symbol codecs for file payloads.
//!
//! Two schemes, chosen by the field size. With q >= 257 every byte maps to
//! itself and a single 256 sentinel marks end-of-data, so trailing stripe
//! fill is unambiguous. Smaller fields get a big-endian base-q digit
//! expansion of 8-byte blocks (a fixed digit count per block), with the
//! original length deciding where the last block ends.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("symbol {0} cannot appear in a byte payload")]
    SymbolOutOfRange(u64),
    #[error("payload has no end-of-data sentinel")]
    MissingSentinel,
    #[error("decoded length {got}, manifest says {expected}")]
    LengthMismatch { expected: u64, got: u64 },
    #[error("block of {0} symbols decodes above 2^64")]
    BlockOverflow(usize),
    #[error("field of size {0} cannot carry bytes")]
    FieldTooSmall(u64),
}

pub const SENTINEL: u64 = 256;

/// True when bytes embed directly (0..=255 plus the 256 sentinel fit).
pub fn direct_mode(q: u64) -> bool {
    q >= 257
}

/// Symbols per 8-byte block in base-q mode: smallest m with q^m >= 2^64.
pub fn symbols_per_block(q: u64) -> Result<usize, CodecError> {
    if q < 2 {
        return Err(CodecError::FieldTooSmall(q));
    }
    let mut m = 0;
    let mut reach: u128 = 1;
    while reach < (1u128 << 64) {
        reach = reach.saturating_mul(q as u128);
        m += 1;
    }
    Ok(m)
}

pub fn bytes_to_symbols(data: &[u8], q: u64) -> Result<Vec<u64>, CodecError> {
    if direct_mode(q) {
        let mut symbols: Vec<u64> = data.iter().map(|&b| b as u64).collect();
        symbols.push(SENTINEL);
        return Ok(symbols);
    }
    let m = symbols_per_block(q)?;
    let mut symbols = Vec::with_capacity(data.len().div_ceil(8) * m);
    for block in data.chunks(8) {
        let mut word = [0u8; 8];
        word[..block.len()].copy_from_slice(block);
        let mut value = u64::from_be_bytes(word);
        let mut digits = [0u64; 64];
        for slot in digits[..m].iter_mut().rev() {
            *slot = value % q;
            value /= q;
        }
        symbols.extend_from_slice(&digits[..m]);
    }
    Ok(symbols)
}

pub fn symbols_to_bytes(symbols: &[u64], q: u64, original_len: u64) -> Result<Vec<u8>, CodecError> {
    if direct_mode(q) {
        let end = symbols
            .iter()
            .position(|&s| s == SENTINEL)
            .ok_or(CodecError::MissingSentinel)?;
        if end as u64 != original_len {
            return Err(CodecError::LengthMismatch {
                expected: original_len,
                got: end as u64,
            });
        }
        return symbols[..end]
            .iter()
            .map(|&s| {
                if s <= 0xFF {
                    Ok(s as u8)
                } else {
                    Err(CodecError::SymbolOutOfRange(s))
                }
            })
            .collect();
    }
    let m = symbols_per_block(q)?;
    let blocks = (original_len as usize).div_ceil(8);
    if symbols.len() < blocks * m {
        return Err(CodecError::LengthMismatch {
            expected: (blocks * m) as u64,
            got: symbols.len() as u64,
        });
    }
    let mut bytes = Vec::with_capacity(blocks * 8);
    for chunk in symbols[..blocks * m].chunks(m) {
        let mut value: u128 = 0;
        for &digit in chunk {
            if digit >= q {
                return Err(CodecError::SymbolOutOfRange(digit));
            }
            value = value * q as u128 + digit as u128;
        }
        if value > u64::MAX as u128 {
            return Err(CodecError::BlockOverflow(m));
        }
        bytes.extend_from_slice(&(value as u64).to_be_bytes());
    }
    bytes.truncate(original_len as usize);
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_round_trip() {
        let data: Vec<u8> = (0..=255).collect();
        let symbols = bytes_to_symbols(&data, 257).unwrap();
        assert_eq!(symbols.len(), 257);
        assert_eq!(*symbols.last().unwrap(), SENTINEL);
        let mut padded = symbols.clone();
        padded.extend([0, 0, 0]); // stripe fill
        let back = symbols_to_bytes(&padded, 257, data.len() as u64).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn direct_empty_payload() {
        let symbols = bytes_to_symbols(&[], 257).unwrap();
        assert_eq!(symbols, vec![SENTINEL]);
        assert_eq!(symbols_to_bytes(&symbols, 257, 0).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn direct_detects_corruption() {
        assert_eq!(
            symbols_to_bytes(&[1, 2, 3], 257, 3),
            Err(CodecError::MissingSentinel)
        );
        assert_eq!(
            symbols_to_bytes(&[1, SENTINEL], 257, 5),
            Err(CodecError::LengthMismatch { expected: 5, got: 1 })
        );
    }

    #[test]
    fn block_sizes() {
        assert_eq!(symbols_per_block(2).unwrap(), 64);
        assert_eq!(symbols_per_block(7).unwrap(), 23);
        assert_eq!(symbols_per_block(251).unwrap(), 9);
    }

    #[test]
    fn base_q_digits_are_big_endian() {
        // 8-byte block reads as a big-endian integer, digits come out
        // most-significant first: 263 in base 10 ends ...2,6,3.
        let data = [0u8, 0, 0, 0, 0, 0, 1, 7];
        let m = symbols_per_block(10).unwrap();
        let symbols = bytes_to_symbols(&data, 10).unwrap();
        assert_eq!(symbols.len(), m);
        assert!(symbols[..m - 3].iter().all(|&s| s == 0));
        assert_eq!(&symbols[m - 3..], &[2, 6, 3]);
    }

    #[test]
    fn base_q_round_trip() {
        for q in [3u64, 7, 11, 251] {
            for len in [0usize, 1, 7, 8, 9, 31] {
                let data: Vec<u8> = (0..len as u32).map(|i| (i * 37 + 11) as u8).collect();
                let symbols = bytes_to_symbols(&data, q).unwrap();
                assert!(symbols.iter().all(|&s| s < q));
                let back = symbols_to_bytes(&symbols, q, len as u64).unwrap();
                assert_eq!(back, data, "q={q} len={len}");
            }
        }
    }

    #[test]
    fn base_q_detects_truncation() {
        let data = [1u8; 16];
        let symbols = bytes_to_symbols(&data, 7).unwrap();
        assert!(matches!(
            symbols_to_bytes(&symbols[..symbols.len() - 1], 7, 16),
            Err(CodecError::LengthMismatch { .. })
        ));
    }
}
