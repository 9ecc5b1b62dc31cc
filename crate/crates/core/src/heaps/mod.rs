//! The heap variants. Every submodule implements [`crate::heap::PriorityQueue`].

pub mod binomial;
pub mod explicit;
pub mod fibonacci;
pub mod implicit;
pub mod pairing;
pub mod quake;
pub mod rank_pairing;
pub mod strict_fibonacci;
pub mod violation;
pub mod weak_queue;

use crate::error::HeapError;
use crate::key::Key64;

/// Shared decrease-key precondition: the new key must be strictly smaller.
pub(crate) fn check_decreased(current: u64, new: u64) -> Result<(), HeapError> {
    if new >= current {
        return Err(HeapError::KeyNotDecreased {
            current: Key64::from_raw(current),
            new: Key64::from_raw(new),
        });
    }
    Ok(())
}
