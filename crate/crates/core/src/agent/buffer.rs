use alloc::vec::Vec;

use rand::Rng;

use crate::env::EnvRng;
use crate::featurize::SparseVec;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: SparseVec,
    pub mask: Vec<bool>,
    pub template: usize,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: SparseVec,
    pub next_mask: Vec<bool>,
    pub done: bool,
}

/// Fixed-capacity FIFO store with uniform sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::new(),
            next: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Slot that the next push will write.
    pub fn cursor(&self) -> usize {
        self.next
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    pub fn items(&self) -> &[Transition] {
        &self.items
    }

    /// Rebuilds a buffer from stored slots and cursor.
    pub fn from_parts(capacity: usize, items: Vec<Transition>, next: usize) -> Option<ReplayBuffer> {
        if capacity == 0 || items.len() > capacity || next >= capacity || (items.len() < capacity && next != items.len() % capacity) {
            return None;
        }
        Some(ReplayBuffer { capacity, items, next })
    }

    /// `n` slot indices drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut EnvRng) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..self.items.len())).collect()
    }
}
