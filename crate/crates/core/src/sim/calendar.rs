//! Event calendar ordered by `(timestamp, insertion sequence)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::time::SimTime;

pub type Action = Box<dyn FnOnce() + Send>;

struct Entry {
    at: SimTime,
    seq: u64,
    action: Action,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap is a max-heap; invert so the earliest entry is on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending future actions.
#[derive(Default)]
pub struct Calendar {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
}

impl Calendar {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the insertion sequence used to break timestamp ties.
    pub fn schedule(&mut self, at: SimTime, action: Action) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { at, seq, action });
        seq
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.at)
    }

    /// Removes the earliest entry if it is due at or before `limit`.
    pub fn pop_due(&mut self, limit: SimTime) -> Option<(SimTime, u64, Action)> {
        if self.heap.peek()?.at > limit {
            return None;
        }
        self.heap.pop().map(|e| (e.at, e.seq, e.action))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
