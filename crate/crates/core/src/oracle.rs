//! Ordered-set reference heap used for trace generation, validation, and
//! equivalence testing. Deterministic because live keys are unique.

use std::collections::BTreeMap;

use crate::error::HeapError;
use crate::key::{ItemId, Key64};
use crate::trace::{Opcode, TraceRecord};

/// Balanced ordered container keyed by raw key, with an id-addressed side
/// table so traces can reference items by insertion ordinal.
#[derive(Debug, Default, Clone)]
pub struct OracleHeap {
    by_key: BTreeMap<u64, ItemId>,
    key_of: Vec<Option<u64>>, // indexed by ItemId
}

impl OracleHeap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn contains_key(&self, key: Key64) -> bool {
        self.by_key.contains_key(&key.raw)
    }

    pub fn is_live(&self, item: ItemId) -> bool {
        self.key_of
            .get(item as usize)
            .is_some_and(|k| k.is_some())
    }

    pub fn key_of(&self, item: ItemId) -> Option<Key64> {
        self.key_of
            .get(item as usize)
            .and_then(|k| k.map(Key64::from_raw))
    }

    pub fn insert(&mut self, item: ItemId, key: Key64) -> Result<(), HeapError> {
        if self.by_key.insert(key.raw, item).is_some() {
            return Err(HeapError::Internal("duplicate live key"));
        }
        if self.key_of.len() <= item as usize {
            self.key_of.resize(item as usize + 1, None);
        }
        debug_assert!(self.key_of[item as usize].is_none(), "item id reused");
        self.key_of[item as usize] = Some(key.raw);
        Ok(())
    }

    pub fn find_min(&self) -> Result<(ItemId, Key64), HeapError> {
        self.by_key
            .iter()
            .next()
            .map(|(&raw, &item)| (item, Key64::from_raw(raw)))
            .ok_or(HeapError::Underflow)
    }

    pub fn delete_min(&mut self) -> Result<(ItemId, Key64), HeapError> {
        let (item, key) = self.find_min()?;
        self.by_key.remove(&key.raw);
        self.key_of[item as usize] = None;
        Ok((item, key))
    }

    pub fn decrease_key(&mut self, item: ItemId, new: Key64) -> Result<(), HeapError> {
        let current = self
            .key_of(item)
            .ok_or(HeapError::StaleHandle)?;
        if new.raw >= current.raw {
            return Err(HeapError::KeyNotDecreased { current, new });
        }
        if self.by_key.contains_key(&new.raw) {
            return Err(HeapError::Internal("duplicate live key"));
        }
        self.by_key.remove(&current.raw);
        self.by_key.insert(new.raw, item);
        self.key_of[item as usize] = Some(new.raw);
        Ok(())
    }

    /// Uniform iteration order by key; used by the degeneracy checker.
    pub fn live_keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_key.keys().copied()
    }
}

/// Replays a record sequence against the oracle and returns the exact
/// delete-min output sequence.
///
/// Malformed records (delete on empty, decrease on a dead id, a
/// non-decreasing decrease) produce an error naming the record index.
pub fn oracle_replay(
    records: &[TraceRecord],
) -> Result<Vec<(ItemId, Key64)>, crate::error::TraceError> {
    use crate::error::TraceError;
    let mut oracle = OracleHeap::new();
    let mut out = Vec::new();
    for (index, rec) in records.iter().enumerate() {
        match rec.opcode {
            Opcode::Insert => {
                oracle
                    .insert(rec.id, rec.key)
                    .map_err(|e| TraceError::Invalid {
                        index,
                        reason: e.to_string(),
                    })?;
            }
            Opcode::DeleteMin => {
                let got = oracle.delete_min().map_err(|e| TraceError::Invalid {
                    index,
                    reason: e.to_string(),
                })?;
                out.push(got);
            }
            Opcode::DecreaseKey => {
                oracle
                    .decrease_key(rec.id, rec.key)
                    .map_err(|e| TraceError::Invalid {
                        index,
                        reason: e.to_string(),
                    })?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::make_key;

    #[test]
    fn insert_then_delete_in_key_order() {
        let mut o = OracleHeap::new();
        for (id, k) in [(0u32, 3u32), (1, 1), (2, 2)] {
            o.insert(id, make_key(k, id)).unwrap();
        }
        assert_eq!(o.delete_min().unwrap().0, 1);
        assert_eq!(o.delete_min().unwrap().0, 2);
        assert_eq!(o.delete_min().unwrap().0, 0);
        assert!(o.delete_min().is_err());
    }

    #[test]
    fn tie_broken_by_low_bits() {
        let mut o = OracleHeap::new();
        o.insert(1, make_key(7, 1)).unwrap();
        o.insert(2, make_key(7, 2)).unwrap();
        assert_eq!(o.delete_min().unwrap().0, 1);
        assert_eq!(o.delete_min().unwrap().0, 2);
    }

    #[test]
    fn decrease_key_moves_item() {
        let mut o = OracleHeap::new();
        o.insert(0, make_key(50, 0)).unwrap();
        o.insert(1, make_key(30, 1)).unwrap();
        o.decrease_key(0, make_key(10, 0)).unwrap();
        assert_eq!(o.delete_min().unwrap(), (0, make_key(10, 0)));
    }

    #[test]
    fn decrease_key_contract_errors() {
        let mut o = OracleHeap::new();
        o.insert(0, make_key(5, 0)).unwrap();
        assert!(o.decrease_key(0, make_key(9, 0)).is_err());
        assert!(o.decrease_key(3, make_key(1, 3)).is_err());
    }
}
