use core::fmt;

use crate::error::{Error, Result};

/// A qubit measurement outcome / vertex partition.
///
/// Character `i` of the textual form is the bit of vertex (or pair) `i`, and the
/// integer value reads that string as a binary number. Pair 0 is therefore the
/// most significant bit, which matches the pair-major state layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    value: u32,
    len: u32,
}

impl Bitstring {
    pub const MAX_LEN: usize = 31;

    pub fn new(value: u32, len: usize) -> Result<Self> {
        if len > Self::MAX_LEN {
            return Err(Error::InvalidConfig("bitstring longer than 31 bits"));
        }
        if len < 32 && value >> len != 0 {
            return Err(Error::InvalidConfig("bitstring value does not fit its length"));
        }
        Ok(Self { value, len: len as u32 })
    }

    pub(crate) const fn from_raw(value: u32, len: usize) -> Self {
        Self { value, len: len as u32 }
    }

    /// Parses a string of `0`/`1` characters, vertex 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let mut value = 0u32;
        let mut len = 0usize;
        for ch in s.chars() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::InvalidConfig("bitstring characters must be 0 or 1")),
            };
            len += 1;
            if len > Self::MAX_LEN {
                return Err(Error::InvalidConfig("bitstring longer than 31 bits"));
            }
            value = (value << 1) | bit;
        }
        Ok(Self { value, len: len as u32 })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Bit of vertex `i`.
    pub fn bit(self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.value >> (self.len as usize - 1 - i)) & 1 == 1
    }

    /// Global bit flip.
    pub fn complement(self) -> Self {
        let mask = if self.len == 0 { 0 } else { u32::MAX >> (32 - self.len) };
        Self { value: !self.value & mask, len: self.len }
    }

    /// All `2^len` bitstrings in increasing integer order.
    pub fn all(len: usize) -> impl Iterator<Item = Bitstring> {
        (0..1u32 << len).map(move |v| Bitstring::from_raw(v, len))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}
