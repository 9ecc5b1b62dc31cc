//! Composite 64-bit keys: a 32-bit user key in the high bits and the item
//! identifier in the low bits, so that live keys are unique and comparisons
//! never tie.

use serde::{Deserialize, Serialize};

/// Identifier of an inserted item: its insertion ordinal within a trace.
pub type ItemId = u32;

/// Total-order key. Ordering is unsigned integer order on `raw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Key64 {
    pub raw: u64,
}

impl Key64 {
    /// Builds a key from a 32-bit user key and an item id: `key32 * 2^32 + id`.
    pub fn new(key32: u32, id: ItemId) -> Self {
        Key64 {
            raw: ((key32 as u64) << 32) | id as u64,
        }
    }

    pub fn from_raw(raw: u64) -> Self {
        Key64 { raw }
    }

    /// High 32 bits: the user key.
    pub fn key32(self) -> u32 {
        (self.raw >> 32) as u32
    }

    /// Low 32 bits. Equals the inserting item's id for keys made at insert time.
    pub fn low32(self) -> u32 {
        self.raw as u32
    }
}

impl std::fmt::Display for Key64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#018x}", self.raw)
    }
}

pub fn make_key(key32: u32, id: ItemId) -> Key64 {
    Key64::new(key32, id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_layout() {
        assert_eq!(make_key(1, 2).raw, 0x0000_0001_0000_0002);
        assert_eq!(make_key(0, 0).raw, 0);
        assert_eq!(make_key(0xFFFF_FFFF, 0xFFFF_FFFF).raw, u64::MAX);
    }

    #[test]
    fn views_round_trip() {
        let k = make_key(0xDEAD_BEEF, 42);
        assert_eq!(k.key32(), 0xDEAD_BEEF);
        assert_eq!(k.low32(), 42);
    }

    #[test]
    fn order_is_raw_order() {
        // Same user key, different ids: tie broken by low bits.
        assert!(make_key(7, 1) < make_key(7, 2));
        assert!(make_key(3, 100) < make_key(4, 0));
    }
}
