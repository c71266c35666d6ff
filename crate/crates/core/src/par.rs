//! Order-preserving parallel map, sequential when the `parallel` feature is
//! off (the wasm demo builds without threads).

/// Maps `f` over `0..len`, returning results in index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Splits `0..len` into at most `chunks` contiguous ranges.
pub fn chunk_ranges(len: usize, chunks: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = chunks.max(1).min(len.max(1));
    let step = len.div_ceil(chunks);
    (0..chunks).map(|c| (c * step).min(len)..((c + 1) * step).min(len)).filter(|r| !r.is_empty()).collect()
}

/// Number of chunks worth splitting a scan into.
pub fn worker_hint() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads() * 4
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// ORs per-chunk bitmaps into one; the result does not depend on chunking.
pub fn or_reduce(len: usize, parts: Vec<Vec<bool>>) -> Vec<bool> {
    let mut out = vec![false; len];
    for part in parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o |= p;
        }
    }
    out
}
