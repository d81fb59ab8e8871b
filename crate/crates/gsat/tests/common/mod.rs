#![allow(dead_code)]

//! Shared test helpers: a deterministic PRNG and a reference map that
//! tracks tombstones and per-key access counts.

use std::collections::BTreeMap;

use gsat::Key;

pub struct XorShift(pub u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        XorShift(seed | 1)
    }

    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Observable-equivalence oracle: maps present keys to values, with the
/// same no-overwrite insert semantics as the trees.
#[derive(Default)]
pub struct RefMap {
    live: BTreeMap<Key, i64>,
}

impl RefMap {
    pub fn get(&self, key: Key) -> Option<i64> {
        self.live.get(&key).copied()
    }

    pub fn insert(&mut self, key: Key, value: i64) {
        self.live.entry(key).or_insert(value);
    }

    pub fn delete(&mut self, key: Key) {
        self.live.remove(&key);
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.live.keys().copied()
    }
}
