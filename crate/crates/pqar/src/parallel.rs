// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::HashMap;
use std::sync::Mutex;

use pqar_core::ga::{Island, IslandExecutor};
use pqar_core::mdl::{LossCache, SegmentKey};
use rayon::prelude::*;

/// Evolves islands on the current rayon pool.
#[derive(Debug, Default, Clone, Copy)]
pub struct RayonExecutor;

impl IslandExecutor for RayonExecutor {
    fn for_each_island(&self, islands: &mut [Island], task: &(dyn Fn(&mut Island) + Sync)) {
        islands.par_iter_mut().for_each(task);
    }
}

/// Segment losses shared by all islands of one search.
#[derive(Debug, Default)]
pub struct SharedCache {
    map: Mutex<HashMap<SegmentKey, f64>>,
}

impl SharedCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LossCache for SharedCache {
    fn get(&self, key: &SegmentKey) -> Option<f64> {
        self.map.lock().expect("cache lock").get(key).copied()
    }

    fn insert(&self, key: SegmentKey, loss: f64) {
        self.map.lock().expect("cache lock").insert(key, loss);
    }
}
