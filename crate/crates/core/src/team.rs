//! A fixed-size team of worker threads.
//!
//! Every collective call hands one part to each worker and returns once all
//! parts are done, so the return of a call is the barrier between phases.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub struct WorkerTeam {
    size: usize,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for WorkerTeam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerTeam").field("size", &self.size).finish()
    }
}

impl WorkerTeam {
    /// Team of `size` workers. A team of one runs inline on the caller.
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidWorkers {
                workers: 0,
                max: usize::MAX,
            });
        }
        let pool = if size == 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(size)
                    .thread_name(|i| format!("kg-worker-{i}"))
                    .build()
                    .map_err(|e| Error::WorkerTeam(e.to_string()))?,
            )
        };
        Ok(Self { size, pool })
    }

    pub fn serial() -> Self {
        Self {
            size: 1,
            pool: None,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Runs `f(worker, part)` for every part, concurrently across the team.
    pub fn scatter<T, F>(&self, parts: Vec<T>, f: F)
    where
        T: Send,
        F: Fn(usize, T) + Sync + Send,
    {
        match &self.pool {
            None => parts.into_iter().enumerate().for_each(|(w, p)| f(w, p)),
            Some(pool) => pool.install(|| {
                parts
                    .into_par_iter()
                    .enumerate()
                    .for_each(|(w, p)| f(w, p))
            }),
        }
    }

    /// Like [`WorkerTeam::scatter`] but collects one result per part, in part order.
    pub fn gather<T, R, F>(&self, parts: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(usize, T) -> R + Sync + Send,
    {
        match &self.pool {
            None => parts.into_iter().enumerate().map(|(w, p)| f(w, p)).collect(),
            Some(pool) => pool.install(|| {
                parts
                    .into_par_iter()
                    .enumerate()
                    .map(|(w, p)| f(w, p))
                    .collect()
            }),
        }
    }

    /// Splits `data` into one balanced contiguous chunk per worker and applies
    /// `f(offset, chunk)` to each.
    pub fn for_each_chunk_mut<T, F>(&self, data: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let ranges = balanced_ranges(data.len(), self.size.min(data.len().max(1)));
        let parts = split_mut_by_ranges(data, &ranges);
        self.scatter(parts, |w, chunk| f(ranges[w].start, chunk));
    }
}

/// Splits `0..len` into `parts` contiguous ranges whose sizes differ by at
/// most one; the first `len % parts` ranges get the extra element.
pub fn balanced_ranges(len: usize, parts: usize) -> Vec<Range<usize>> {
    assert!(parts > 0, "cannot split into zero parts");
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|w| {
            let size = base + usize::from(w < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// Splits `data` into disjoint mutable chunks, one per (contiguous, covering) range.
pub fn split_mut_by_ranges<'a, T>(mut data: &'a mut [T], ranges: &[Range<usize>]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(ranges.len());
    let mut consumed = 0;
    for r in ranges {
        debug_assert_eq!(r.start, consumed);
        let (head, tail) = std::mem::take(&mut data).split_at_mut(r.len());
        out.push(head);
        data = tail;
        consumed = r.end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_split_sizes() {
        let sizes: Vec<usize> = balanced_ranges(8, 3).iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![3, 3, 2]);
        let sizes: Vec<usize> = balanced_ranges(8, 4).iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![2, 2, 2, 2]);
        let r = balanced_ranges(10, 4);
        assert_eq!(r.first().unwrap().start, 0);
        assert_eq!(r.last().unwrap().end, 10);
    }

    #[test]
    fn scatter_visits_every_part() {
        let team = WorkerTeam::new(3).unwrap();
        let mut data = vec![0usize; 10];
        team.for_each_chunk_mut(&mut data, |offset, chunk| {
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = offset + i;
            }
        });
        assert_eq!(data, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn gather_preserves_order() {
        let team = WorkerTeam::new(4).unwrap();
        let out = team.gather((0..4).collect(), |w, p: usize| w * 10 + p);
        assert_eq!(out, vec![0, 11, 22, 33]);
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(WorkerTeam::new(0).is_err());
    }
}
