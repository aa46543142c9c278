//! Deterministic chunked parallelism.
//!
//! Work is split into contiguous index ranges, one per worker, and results
//! are combined in range order, so outputs are bytewise independent of the
//! worker count. Without the `std` feature everything degrades to the
//! serial path with identical results.

use alloc::vec::Vec;
use core::ops::Range;

/// Splits `0..len` into at most `threads` contiguous ranges of near-equal
/// length. `threads == 0` is treated as 1.
pub fn chunk_ranges(len: usize, threads: usize) -> Vec<Range<usize>> {
    let threads = threads.max(1).min(len.max(1));
    let base = len / threads;
    let extra = len % threads;
    let mut out = Vec::with_capacity(threads);
    let mut start = 0;
    for i in 0..threads {
        let size = base + usize::from(i < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

/// Runs `work` over each chunk of `0..len` and returns the per-chunk results
/// in chunk order.
#[cfg(feature = "std")]
pub fn map_chunks<T, F>(len: usize, threads: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let ranges = chunk_ranges(len, threads);
    if ranges.len() <= 1 {
        return ranges.into_iter().map(work).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(|| work(r)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

#[cfg(not(feature = "std"))]
pub fn map_chunks<T, F>(len: usize, threads: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    chunk_ranges(len, threads).into_iter().map(work).collect()
}

/// Fills `out` by handing each worker a disjoint sub-slice. `work` receives
/// the absolute offset of its slice.
#[cfg(feature = "std")]
pub fn fill_chunks<T, F>(out: &mut [T], threads: usize, work: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    let ranges = chunk_ranges(out.len(), threads);
    if ranges.len() <= 1 {
        work(0, out);
        return;
    }
    std::thread::scope(|scope| {
        let mut rest = out;
        for r in ranges {
            let (head, tail) = rest.split_at_mut(r.end - r.start);
            let work = &work;
            scope.spawn(move || work(r.start, head));
            rest = tail;
        }
    });
}

#[cfg(not(feature = "std"))]
pub fn fill_chunks<T, F>(out: &mut [T], _threads: usize, work: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    work(0, out);
}
