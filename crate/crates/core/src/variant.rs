//! Variant descriptors: every concrete heap configuration the harness can
//! build, named so traces, metrics, and CLI flags agree on spelling.
//! Array families carry an arity suffix ("implicit_4"); linked families use
//! the bare family name. Padding and pool strategy are orthogonal knobs and
//! are not part of the name.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::heap::PriorityQueue;
use crate::heaps;
use crate::pool::PoolStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeapFamily {
    ImplicitSimple,
    Implicit,
    Explicit,
    Binomial,
    Pairing,
    Fibonacci,
    RankPairingT1,
    RankPairingT2,
    Violation,
    Quake,
    RankRelaxedWeak,
    StrictFibonacci,
}

impl HeapFamily {
    pub const ALL: [HeapFamily; 12] = [
        HeapFamily::ImplicitSimple,
        HeapFamily::Implicit,
        HeapFamily::Explicit,
        HeapFamily::Binomial,
        HeapFamily::Pairing,
        HeapFamily::Fibonacci,
        HeapFamily::RankPairingT1,
        HeapFamily::RankPairingT2,
        HeapFamily::Violation,
        HeapFamily::Quake,
        HeapFamily::RankRelaxedWeak,
        HeapFamily::StrictFibonacci,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeapFamily::ImplicitSimple => "implicit_simple",
            HeapFamily::Implicit => "implicit",
            HeapFamily::Explicit => "explicit",
            HeapFamily::Binomial => "binomial",
            HeapFamily::Pairing => "pairing",
            HeapFamily::Fibonacci => "fibonacci",
            HeapFamily::RankPairingT1 => "rank_pairing_t1",
            HeapFamily::RankPairingT2 => "rank_pairing_t2",
            HeapFamily::Violation => "violation",
            HeapFamily::Quake => "quake",
            HeapFamily::RankRelaxedWeak => "rank_relaxed_weak",
            HeapFamily::StrictFibonacci => "strict_fibonacci",
        }
    }

    /// Whether the variant name carries an arity suffix.
    pub fn is_array(self) -> bool {
        matches!(
            self,
            HeapFamily::ImplicitSimple | HeapFamily::Implicit | HeapFamily::Explicit
        )
    }

    pub fn supports_decrease_key(self) -> bool {
        self != HeapFamily::ImplicitSimple
    }
}

/// One buildable heap configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HeapVariant {
    pub family: HeapFamily,
    /// Arity; meaningful only for array families.
    pub d: usize,
    /// Node-size multiplier for the padding experiment.
    pub pad_factor: usize,
    pub pool_strategy: PoolStrategy,
}

impl HeapVariant {
    pub fn new(family: HeapFamily) -> Self {
        HeapVariant {
            family,
            d: if family.is_array() { 2 } else { 0 },
            pad_factor: 1,
            pool_strategy: PoolStrategy::Eager,
        }
    }

    pub fn with_d(mut self, d: usize) -> Self {
        assert!(self.family.is_array(), "arity only applies to array families");
        assert!(matches!(d, 2 | 4 | 8 | 16), "d must be in {{2,4,8,16}}");
        self.d = d;
        self
    }

    pub fn with_pad(mut self, pad_factor: usize) -> Self {
        assert!(pad_factor >= 1);
        self.pad_factor = pad_factor;
        self
    }

    pub fn with_pool(mut self, pool_strategy: PoolStrategy) -> Self {
        self.pool_strategy = pool_strategy;
        self
    }

    /// Canonical name: family plus arity suffix for array families.
    pub fn name(&self) -> String {
        if self.family.is_array() {
            format!("{}_{}", self.family.as_str(), self.d)
        } else {
            self.family.as_str().to_string()
        }
    }

    pub fn supports_decrease_key(&self) -> bool {
        self.family.supports_decrease_key()
    }

    /// Builds a heap sized for `capacity_hint` simultaneously-live items.
    pub fn build(&self, capacity_hint: usize) -> Box<dyn PriorityQueue> {
        let (cap, pad, strat) = (capacity_hint, self.pad_factor, self.pool_strategy);
        match self.family {
            HeapFamily::ImplicitSimple => {
                Box::new(heaps::implicit::SimpleImplicitHeap::new(self.d, cap, strat))
            }
            HeapFamily::Implicit => {
                Box::new(heaps::implicit::ImplicitHeap::new(self.d, cap, pad, strat))
            }
            HeapFamily::Explicit => match self.d {
                2 => Box::new(heaps::explicit::ExplicitHeap::<2>::new(cap, pad, strat)),
                4 => Box::new(heaps::explicit::ExplicitHeap::<4>::new(cap, pad, strat)),
                8 => Box::new(heaps::explicit::ExplicitHeap::<8>::new(cap, pad, strat)),
                16 => Box::new(heaps::explicit::ExplicitHeap::<16>::new(cap, pad, strat)),
                other => panic!("unsupported arity {other}"),
            },
            HeapFamily::Binomial => Box::new(heaps::binomial::BinomialHeap::new(cap, pad, strat)),
            HeapFamily::Pairing => Box::new(heaps::pairing::PairingHeap::new(cap, pad, strat)),
            HeapFamily::Fibonacci => {
                Box::new(heaps::fibonacci::FibonacciHeap::new(cap, pad, strat))
            }
            HeapFamily::RankPairingT1 => Box::new(heaps::rank_pairing::RankPairingHeap::new(
                heaps::rank_pairing::RankRule::Type1,
                cap,
                pad,
                strat,
            )),
            HeapFamily::RankPairingT2 => Box::new(heaps::rank_pairing::RankPairingHeap::new(
                heaps::rank_pairing::RankRule::Type2,
                cap,
                pad,
                strat,
            )),
            HeapFamily::Violation => {
                Box::new(heaps::violation::ViolationHeap::new(cap, pad, strat))
            }
            HeapFamily::Quake => Box::new(heaps::quake::QuakeHeap::new(cap, pad, strat)),
            HeapFamily::RankRelaxedWeak => {
                Box::new(heaps::weak_queue::WeakQueue::new(cap, pad, strat))
            }
            HeapFamily::StrictFibonacci => {
                Box::new(heaps::strict_fibonacci::StrictFibonacciHeap::new(cap, pad, strat))
            }
        }
    }
}

impl fmt::Display for HeapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown heap variant `{0}`")]
pub struct ParseVariantError(String);

impl FromStr for HeapVariant {
    type Err = ParseVariantError;

    /// Parses a canonical name, e.g. `pairing` or `implicit_simple_4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for family in HeapFamily::ALL {
            if family.is_array() {
                if let Some(rest) = s.strip_prefix(family.as_str()) {
                    if let Some(d) = rest.strip_prefix('_') {
                        if let Ok(d) = d.parse::<usize>() {
                            if matches!(d, 2 | 4 | 8 | 16) {
                                return Ok(HeapVariant::new(family).with_d(d));
                            }
                        }
                    }
                }
            } else if s == family.as_str() {
                return Ok(HeapVariant::new(family));
            }
        }
        Err(ParseVariantError(s.to_string()))
    }
}

/// The full benchmark roster: every arity for the array families, one entry
/// per linked family.
pub fn all_variants() -> Vec<HeapVariant> {
    let mut out = Vec::new();
    for family in HeapFamily::ALL {
        if family.is_array() {
            for d in [2usize, 4, 8, 16] {
                out.push(HeapVariant::new(family).with_d(d));
            }
        } else {
            out.push(HeapVariant::new(family));
        }
    }
    out
}
