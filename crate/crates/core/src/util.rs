//! Small shared helpers: float text formatting and a deterministic
//! parallel map.

/// Formats a float with 17 significant digits so the decimal text
/// round-trips to the identical f64 bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Fills `out[i] = f(i)` using up to `threads` worker threads.
///
/// Each index is computed independently and written to its own slot, so
/// the result is identical to a sequential loop regardless of thread
/// count.
pub fn parallel_fill<T, F>(out: &mut [T], threads: usize, f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let n = out.len();
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 || n < 2 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = c * chunk;
                for (i, slot) in slice.iter_mut().enumerate() {
                    *slot = f(base + i);
                }
            });
        }
    });
}

/// Number of worker threads to use for embarrassingly parallel passes.
pub fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
