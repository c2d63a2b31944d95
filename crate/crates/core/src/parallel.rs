//! Deterministic parallel map: work items are split into contiguous chunks
//! across scoped threads and the results are returned in input order, so any
//! reduction performed over the output vector is independent of the thread
//! count.

/// Map `f` over `0..n` using at most `threads` worker threads. The output is
/// ordered by index regardless of scheduling.
pub fn par_map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads == 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    let fref = &f;
    std::thread::scope(|scope| {
        let mut slices: Vec<&mut [Option<T>]> = Vec::new();
        let mut rest = out.as_mut_slice();
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            slices.push(head);
            rest = tail;
        }
        for (ci, slice) in slices.into_iter().enumerate() {
            scope.spawn(move || {
                for (off, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(fref(ci * chunk + off));
                }
            });
        }
    });
    out.into_iter().map(|x| x.expect("filled")).collect()
}

/// Resolve a thread count: explicit request, else the `SSH2D_THREADS`
/// environment variable, else the machine's available parallelism.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    if let Some(t) = requested {
        return t.max(1);
    }
    if let Ok(v) = std::env::var("SSH2D_THREADS") {
        if let Ok(t) = v.trim().parse::<usize>() {
            return t.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
