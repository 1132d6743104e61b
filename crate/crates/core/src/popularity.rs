//! Markov popular-set process and per-slot request sampling.
//!
//! In every slot, with probability `p`, one uniformly chosen member of the
//! popular set is replaced by a brand-new file. The `K` users then request
//! `K` distinct files drawn uniformly without replacement from the set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Identifier of a file. Ids are assigned monotonically and never reused
/// within a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FileId(pub u64);

/// Outcome of one popularity step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PopularityChange {
    pub replaced: Option<FileId>,
    pub inserted: Option<FileId>,
}

impl PopularityChange {
    pub fn changed(&self) -> bool {
        self.inserted.is_some()
    }
}

/// The time-varying set of `N` popular files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopularSet {
    files: Vec<FileId>,
    next_id: u64,
}

impl PopularSet {
    /// Initial set `{0, .., n-1}`; new files are numbered from `n` onward.
    pub fn new(n: usize) -> Self {
        Self {
            files: (0..n as u64).map(FileId).collect(),
            next_id: n as u64,
        }
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn files(&self) -> &[FileId] {
        &self.files
    }

    pub fn contains(&self, id: FileId) -> bool {
        self.files.contains(&id)
    }

    /// True if `id` was ever part of this trace's popular set.
    pub fn ever_popular(&self, id: FileId) -> bool {
        id.0 < self.next_id
    }

    /// Advance one slot: with probability `p` replace a uniformly chosen
    /// member by a fresh id.
    pub fn step<R: Rng + ?Sized>(&mut self, p: f64, rng: &mut R) -> PopularityChange {
        if self.files.is_empty() || !rng.random_bool(p) {
            return PopularityChange::default();
        }
        let slot = rng::index(rng, self.files.len());
        let fresh = FileId(self.next_id);
        self.next_id += 1;
        let old = std::mem::replace(&mut self.files[slot], fresh);
        self.debug_check();
        PopularityChange {
            replaced: Some(old),
            inserted: Some(fresh),
        }
    }

    /// Draw `k` distinct files uniformly without replacement.
    pub fn draw_requests<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<RequestVector> {
        let mut sampler = RequestSampler::new(self.len());
        let mut demands = Vec::with_capacity(k);
        sampler.draw(self, k, rng, &mut demands)?;
        Ok(RequestVector { demands })
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let mut ids = self.files.clone();
            ids.sort_unstable();
            ids.dedup();
            debug_assert_eq!(ids.len(), self.files.len(), "duplicate popular file ids");
        }
    }
}

/// The demand vector of one slot: `K` distinct popular files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestVector {
    pub demands: Vec<FileId>,
}

/// Reusable partial Fisher-Yates sampler over positions of a [`PopularSet`].
///
/// The position permutation is kept between draws; a partial shuffle of an
/// arbitrary permutation is still a uniform `k`-subset.
#[derive(Debug, Clone)]
pub struct RequestSampler {
    positions: Vec<usize>,
}

impl RequestSampler {
    pub fn new(n: usize) -> Self {
        Self {
            positions: (0..n).collect(),
        }
    }

    /// Writes `k` distinct members of `set` into `out` (cleared first).
    pub fn draw<R: Rng + ?Sized>(
        &mut self,
        set: &PopularSet,
        k: usize,
        rng: &mut R,
        out: &mut Vec<FileId>,
    ) -> Result<()> {
        let n = set.len();
        if k > n {
            return Err(Error::InvalidParams(format!(
                "cannot draw K = {k} distinct requests from N = {n} files"
            )));
        }
        if self.positions.len() != n {
            self.positions = (0..n).collect();
        }
        out.clear();
        for i in 0..k {
            let j = i + rng::index(rng, n - i);
            self.positions.swap(i, j);
            out.push(set.files[self.positions[i]]);
        }
        Ok(())
    }
}
