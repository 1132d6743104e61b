use indexmap::IndexMap;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Eviction;
use crate::popularity::FileId;
use crate::rng;

/// Per-file cache metadata. Every EN holds the same fraction of the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheEntry {
    pub fraction: f64,
    pub inserted_slot: u64,
    pub last_request_slot: u64,
}

/// Logical cache shared (symmetrically) by all ENs.
#[derive(Debug, Clone)]
pub struct CacheState {
    entries: IndexMap<FileId, CacheEntry>,
    capacity_files: usize,
    per_file_fraction: f64,
}

impl CacheState {
    pub fn new(capacity_files: usize, per_file_fraction: f64) -> Self {
        Self {
            entries: IndexMap::with_capacity(capacity_files + 1),
            capacity_files,
            per_file_fraction,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity_files
    }

    pub fn capacity_files(&self) -> usize {
        self.capacity_files
    }

    pub fn per_file_fraction(&self) -> f64 {
        self.per_file_fraction
    }

    pub fn contains(&self, id: FileId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn get(&self, id: FileId) -> Option<&CacheEntry> {
        self.entries.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FileId, &CacheEntry)> {
        self.entries.iter().map(|(id, e)| (*id, e))
    }

    /// Records a request for `id` at `slot`; returns whether it was a hit.
    pub fn touch(&mut self, id: FileId, slot: u64) -> bool {
        match self.entries.get_mut(&id) {
            Some(entry) => {
                entry.last_request_slot = slot;
                true
            }
            None => false,
        }
    }

    /// Inserts `id` at the per-file fraction. The caller makes room first.
    pub fn insert(&mut self, id: FileId, slot: u64) {
        debug_assert!(!self.is_full(), "insert into a full cache");
        self.entries.insert(
            id,
            CacheEntry {
                fraction: self.per_file_fraction,
                inserted_slot: slot,
                last_request_slot: slot,
            },
        );
    }

    pub fn remove(&mut self, id: FileId) -> Option<CacheEntry> {
        self.entries.swap_remove(&id)
    }

    /// Removes and returns the victim chosen by `rule` among entries not in
    /// `protected`. Ties in LRU and FIFO go to the smaller file id.
    pub fn evict<R: Rng + ?Sized>(&mut self, rule: Eviction, rng: &mut R, protected: &[FileId]) -> Result<FileId> {
        let eligible = |id: &FileId| !protected.contains(id);
        if !self.entries.keys().any(eligible) {
            return Err(Error::EmptyCache);
        }
        let index = match rule {
            Eviction::Random => loop {
                let i = rng::index(rng, self.entries.len());
                if eligible(self.entries.get_index(i).expect("index in range").0) {
                    break i;
                }
            },
            Eviction::Lru => self.argmin(protected, |e| e.last_request_slot),
            Eviction::Fifo => self.argmin(protected, |e| e.inserted_slot),
        };
        let (id, _) = self.entries.swap_remove_index(index).expect("index in range");
        Ok(id)
    }

    fn argmin(&self, protected: &[FileId], key: impl Fn(&CacheEntry) -> u64) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, (id, _))| !protected.contains(id))
            .min_by_key(|(_, (id, e))| (key(e), **id))
            .map(|(i, _)| i)
            .expect("an eligible entry")
    }
}
