use serde::Serialize;

/// One query to the capacity oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub item: usize,
    pub fits: bool,
}

/// Fit/no-fit oracle over a hidden capacity.
///
/// The capacity is never exposed; a policy learns only whether each attempted
/// item fits on top of what is already packed.
///
/// ```compile_fail
/// use submod_knapsack::policies::CapacityOracle;
/// let oracle = CapacityOracle::new(5);
/// let c = oracle.capacity;
/// ```
///
/// ```compile_fail
/// use submod_knapsack::policies::CapacityOracle;
/// let oracle = CapacityOracle::new(5);
/// let c = oracle.capacity();
/// ```
#[derive(Debug)]
pub struct CapacityOracle {
    capacity: u64,
    packed: u64,
    log: Vec<Attempt>,
}

impl CapacityOracle {
    pub fn new(capacity: u64) -> Self {
        CapacityOracle {
            capacity,
            packed: 0,
            log: Vec::new(),
        }
    }

    /// Oracle whose knapsack already holds items of total size `packed`.
    pub fn with_packed(capacity: u64, packed: u64) -> Self {
        CapacityOracle {
            capacity,
            packed,
            log: Vec::new(),
        }
    }

    /// Packs the item if `s(packed) + size ≤ C`; reports whether it did.
    pub fn try_pack(&mut self, item: usize, size: u64) -> bool {
        let fits = self
            .packed
            .checked_add(size)
            .is_some_and(|total| total <= self.capacity);
        if fits {
            self.packed += size;
        }
        self.log.push(Attempt { item, fits });
        fits
    }

    pub fn packed_size(&self) -> u64 {
        self.packed
    }

    pub fn log(&self) -> &[Attempt] {
        &self.log
    }

    pub(crate) fn take_log(&mut self) -> Vec<Attempt> {
        std::mem::take(&mut self.log)
    }
}
