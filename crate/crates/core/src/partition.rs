use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plts::StateId;

/// A partition of `0..n` into blocks. Blocks are sorted internally and
/// ordered by their smallest member, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    #[serde(skip)]
    index: Vec<usize>,
}

impl Partition {
    /// Everything in one block (no block at all when `n == 0`).
    pub fn trivial(n: usize) -> Self {
        Self::from_labels(&vec![0u8; n])
    }

    pub fn discrete(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    /// States with equal labels share a block.
    pub fn from_labels<L: Eq + Hash>(labels: &[L]) -> Self {
        let mut first: HashMap<&L, usize> = HashMap::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut index = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let b = *first.entry(label).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(StateId(i as u32));
            index.push(b);
        }
        Partition { blocks, index }
    }

    pub fn from_blocks(n: usize, blocks: Vec<Vec<StateId>>) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("empty block in partition"));
            }
            for s in block {
                let slot = labels
                    .get_mut(s.index())
                    .ok_or_else(|| Error::invalid(format!("state {s:?} out of range")))?;
                if *slot != usize::MAX {
                    return Err(Error::invalid(format!("state {s:?} in two blocks")));
                }
                *slot = b;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::invalid("partition does not cover every state"));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn num_states(&self) -> usize {
        self.index.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn block_of(&self, s: StateId) -> Option<usize> {
        self.index.get(s.index()).copied()
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        match (self.block_of(s), self.block_of(t)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.num_states() == coarser.num_states()
            && self.blocks.iter().all(|block| {
                let b = coarser.index[block[0].index()];
                block.iter().all(|s| coarser.index[s.index()] == b)
            })
    }
}
