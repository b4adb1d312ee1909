//! Min-priority queue of candidate test inputs, FIFO among equal priorities.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::report::Source;
use crate::tabular::Instance;

#[derive(Debug, Clone)]
pub struct RankedInput {
    pub instance: Instance,
    pub priority: f64,
    pub source: Source,
}

#[derive(Debug)]
struct Entry {
    priority: OrderedFloat<f64>,
    seq: u64,
    item: RankedInput,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Entry) -> bool {
        self.priority == other.priority && self.seq == other.seq
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Entry) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Entry) -> std::cmp::Ordering {
        (self.priority, self.seq).cmp(&(other.priority, other.seq))
    }
}

/// Lower priority value dequeues first; insertion order breaks ties.
#[derive(Debug, Default)]
pub struct RankQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    seq: u64,
}

impl RankQueue {
    pub fn new() -> RankQueue {
        RankQueue::default()
    }

    pub fn push(&mut self, instance: Instance, priority: f64, source: Source) {
        debug_assert!(priority.is_finite());
        self.heap.push(Reverse(Entry {
            priority: OrderedFloat(priority),
            seq: self.seq,
            item: RankedInput { instance, priority, source },
        }));
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<RankedInput> {
        self.heap.pop().map(|Reverse(e)| e.item)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
