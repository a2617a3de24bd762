//! Deterministic seed-parallel map.
//!
//! Replicates are keyed by index; results land in index order no matter how
//! the worker pool schedules them, so output files are identical at any
//! worker count.

/// Applies `f` to `0..n`, fanning out over `workers` threads. `workers == 0`
/// or `1` runs inline.
pub fn par_map_indexed<T, F>(workers: usize, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let next = std::sync::atomic::AtomicU64::new(0);
    let slots_ptr = SendPtr(slots.as_mut_ptr());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(n as usize) {
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                // Each index is claimed by exactly one worker; the move
                // capture takes the whole wrapper.
                let target = slots_ptr;
                unsafe { target.write_at(i as usize, Some(value)) };
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}

struct SendPtr<T>(*mut T);
impl<T> Clone for SendPtr<T> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<T> Copy for SendPtr<T> {}
unsafe impl<T> Send for SendPtr<T> {}
unsafe impl<T> Sync for SendPtr<T> {}

impl<T> SendPtr<T> {
    /// Caller must guarantee exclusive access to slot `i`.
    unsafe fn write_at(self, i: usize, value: T) {
        self.0.add(i).write(value);
    }
}

/// Default worker count.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
