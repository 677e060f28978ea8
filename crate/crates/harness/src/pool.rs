//! Worker pool over independent jobs.

use std::sync::mpsc;
use std::thread;

/// Number of hardware threads, at least 1.
pub fn hardware_parallelism() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Maps `f` over `items` on `workers` threads and returns results in input
/// order. Item `i` is owned by worker `i % workers`; results come back over
/// a channel. One worker runs inline on the calling thread.
pub fn parallel_map<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let n = items.len();
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return items.into_iter().map(f).collect();
    }
    let mut shards: Vec<Vec<(usize, T)>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, item) in items.into_iter().enumerate() {
        shards[i % workers].push((i, item));
    }
    let (tx, rx) = mpsc::channel();
    let f = &f;
    thread::scope(|scope| {
        for shard in shards {
            let tx = tx.clone();
            scope.spawn(move || {
                for (i, item) in shard {
                    tx.send((i, f(item))).expect("collector outlives workers");
                }
            });
        }
    });
    drop(tx);
    let mut out: Vec<Option<R>> = (0..n).map(|_| None).collect();
    for (i, r) in rx {
        out[i] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every job reports")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order_for_any_worker_count() {
        let items: Vec<u64> = (0..37).collect();
        let expect: Vec<u64> = items.iter().map(|x| x * x).collect();
        for workers in [0, 1, 2, 5, 64] {
            assert_eq!(parallel_map(items.clone(), workers, |x| x * x), expect);
        }
        assert!(parallel_map(Vec::<u8>::new(), 4, |x| x).is_empty());
    }
}
