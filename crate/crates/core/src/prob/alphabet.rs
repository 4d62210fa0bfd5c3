//! Finite alphabets, sequence indexing and the dense-table sizing bound.
//!
//! Sequences are stored as integer codes in most-significant-first radix
//! order, so the code of a prefix is obtained by integer division of the
//! full code. Every table in the crate relies on that property.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of cells of a dense sequence table.
pub const DEFAULT_MAX_CELLS: u128 = 1 << 24;

/// Environment variable that overrides [`DEFAULT_MAX_CELLS`].
pub const MAX_CELLS_ENV: &str = "DIRINFO_MAC_MAX_CELLS";

/// The current sizing bound.
pub fn max_cells() -> u128 {
    std::env::var(MAX_CELLS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u128>().ok())
        .unwrap_or(DEFAULT_MAX_CELLS)
}

/// Rejects a table with more than [`max_cells`] entries.
pub fn check_cells(cells: u128) -> Result<()> {
    let limit = max_cells();
    if cells > limit {
        return Err(Error::Sizing { cells, limit });
    }
    Ok(())
}

/// A finite alphabet `{0, .., size - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet(size))
    }

    pub const fn binary() -> Self {
        Alphabet(2)
    }

    /// The one-symbol alphabet, used for null feedback and absent inputs.
    pub const fn unit() -> Self {
        Alphabet(1)
    }

    #[inline]
    pub const fn size(self) -> usize {
        self.0
    }

    /// Number of sequences of the given length, `size^len`.
    #[inline]
    pub fn count(self, len: usize) -> usize {
        self.0.pow(len as u32)
    }

    /// Like [`Alphabet::count`] but without overflow.
    pub fn count_wide(self, len: usize) -> u128 {
        (self.0 as u128).saturating_pow(len as u32)
    }

    pub fn check(self, symbol: usize) -> Result<()> {
        if symbol >= self.0 {
            return Err(Error::SymbolOutOfRange {
                symbol,
                size: self.0,
            });
        }
        Ok(())
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// A sequence over an alphabet, identified by its radix code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeqIndex {
    pub alphabet: Alphabet,
    pub length: usize,
    pub code: usize,
}

impl SeqIndex {
    pub fn decode(&self) -> Vec<usize> {
        decode(self.code, self.length, self.alphabet.size())
    }

    /// The code of the first `len` symbols.
    pub fn prefix(&self, len: usize) -> SeqIndex {
        let len = len.min(self.length);
        SeqIndex {
            alphabet: self.alphabet,
            length: len,
            code: prefix_code(self.code, self.length, len, self.alphabet.size()),
        }
    }
}

/// Encodes a symbol tuple most-significant-first.
pub fn seq_encode(symbols: &[usize], alphabet: Alphabet) -> Result<SeqIndex> {
    let code_space = alphabet.count_wide(symbols.len());
    if code_space > usize::MAX as u128 {
        return Err(Error::Sizing {
            cells: code_space,
            limit: usize::MAX as u128,
        });
    }
    let mut code = 0usize;
    for &s in symbols {
        alphabet.check(s)?;
        code = code * alphabet.size() + s;
    }
    Ok(SeqIndex {
        alphabet,
        length: symbols.len(),
        code,
    })
}

pub fn seq_decode(index: &SeqIndex) -> Vec<usize> {
    index.decode()
}

#[inline]
pub(crate) fn encode(symbols: &[usize], base: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * base + s)
}

#[inline]
pub(crate) fn decode(mut code: usize, len: usize, base: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % base;
        code /= base;
    }
    out
}

#[inline]
pub(crate) fn decode_into(mut code: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = code % base;
        code /= base;
    }
}

#[inline]
pub(crate) fn prefix_code(code: usize, len: usize, prefix_len: usize, base: usize) -> usize {
    code / base.pow((len - prefix_len) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encode_examples() {
        let b = Alphabet::binary();
        let e = seq_encode(&[], b).unwrap();
        assert_eq!((e.code, e.length), (0, 0));
        assert_eq!(seq_encode(&[1, 0, 1], b).unwrap().code, 5);
        assert_eq!(
            seq_encode(&[2, 1], Alphabet::new(3).unwrap()).unwrap().code,
            7
        );
    }

    #[test]
    fn out_of_range_symbol() {
        assert!(matches!(
            seq_encode(&[0, 2], Alphabet::binary()),
            Err(Error::SymbolOutOfRange { symbol: 2, size: 2 })
        ));
        assert!(Alphabet::new(0).is_err());
    }

    #[test]
    fn prefix_is_division() {
        let t = Alphabet::new(3).unwrap();
        let s = seq_encode(&[2, 0, 1, 1], t).unwrap();
        assert_eq!(s.prefix(2).decode(), vec![2, 0]);
        assert_eq!(s.prefix(0).code, 0);
    }

    proptest! {
        #[test]
        fn round_trip(size in 1usize..6, raw in proptest::collection::vec(0usize..100, 0..8)) {
            let a = Alphabet::new(size).unwrap();
            let symbols: Vec<usize> = raw.into_iter().map(|s| s % size).collect();
            let idx = seq_encode(&symbols, a).unwrap();
            prop_assert!(idx.code < a.count(symbols.len()));
            prop_assert_eq!(seq_decode(&idx), symbols);
        }
    }
}
