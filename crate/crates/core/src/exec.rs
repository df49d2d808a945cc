//! In-process partitioned dataflow: map over granule partitions, combine per
//! key, shuffle to the driver and reduce by key. Workers are scoped threads
//! pulling tasks from a shared cursor.

use std::collections::BTreeMap;
use std::io;
use std::ops::Deref;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::ExecError;
use crate::model::Granule;

/// Contiguous granule range `[lo, hi]` processed by one map task.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub id: usize,
    pub lo: Granule,
    pub hi: Granule,
}

impl Partition {
    pub fn granules(&self) -> impl Iterator<Item = Granule> {
        (self.lo.0..=self.hi.0).map(Granule)
    }

    pub fn len(&self) -> usize {
        (self.hi.0 - self.lo.0 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Split granules `1..=granules` into `n` balanced contiguous partitions
/// (sizes differ by at most one, larger first). `n` is clamped to `[1, granules]`.
pub fn partition_db(granules: usize, n: usize) -> Vec<Partition> {
    if granules == 0 {
        return Vec::new();
    }
    let n = n.clamp(1, granules);
    let base = granules / n;
    let extra = granules % n;
    let mut lo = 1u32;
    (0..n)
        .map(|id| {
            let size = (base + usize::from(id < extra)) as u32;
            let p = Partition { id, lo: Granule(lo), hi: Granule(lo + size - 1) };
            lo += size;
            p
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageStats {
    pub stage: String,
    pub tasks: usize,
    pub shuffle_records: usize,
    pub shuffle_bytes: usize,
    #[serde(skip)]
    pub wall: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BroadcastStats {
    pub name: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    pub stages: Vec<StageStats>,
    pub broadcasts: Vec<BroadcastStats>,
}

impl ExecStats {
    pub fn tasks_run(&self) -> usize {
        self.stages.iter().map(|s| s.tasks).sum()
    }

    pub fn shuffle_records(&self) -> usize {
        self.stages.iter().map(|s| s.shuffle_records).sum()
    }

    pub fn shuffle_bytes(&self) -> usize {
        self.stages.iter().map(|s| s.shuffle_bytes).sum()
    }

    pub fn wall(&self) -> Duration {
        self.stages.iter().map(|s| s.wall).sum()
    }
}

/// Read-only handle to a value shared by every task.
#[derive(Debug)]
pub struct Broadcast<T>(Arc<T>);

impl<T> Clone for Broadcast<T> {
    fn clone(&self) -> Self {
        Broadcast(Arc::clone(&self.0))
    }
}

impl<T> Deref for Broadcast<T> {
    type Target = T;

    fn deref(&self) -> &T {
        &self.0
    }
}

#[derive(Default)]
struct ByteCounter(usize);

impl io::Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0 += buf.len();
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Serialized size of `value` in bytes.
pub fn serialized_size<T: Serialize + ?Sized>(value: &T) -> usize {
    let mut counter = ByteCounter::default();
    serde_json::to_writer(&mut counter, value).expect("in-memory serialization");
    counter.0
}

const PAR_MAP_CHUNK: usize = 32;

pub struct Executor {
    workers: usize,
    partitions: usize,
    stats: Mutex<ExecStats>,
}

impl Executor {
    pub fn new(workers: usize, partitions: usize) -> Self {
        Self { workers: workers.max(1), partitions: partitions.max(1), stats: Mutex::new(ExecStats::default()) }
    }

    pub fn sequential() -> Self {
        Self::new(1, 1)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn stats(&self) -> ExecStats {
        self.stats.lock().unwrap().clone()
    }

    fn record(&self, stage: StageStats) {
        self.stats.lock().unwrap().stages.push(stage);
    }

    /// Run `n` tasks on the worker pool; results come back in task order.
    fn run_tasks<T, F>(&self, n: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let threads = self.workers.min(n);
        if threads <= 1 {
            return (0..n).map(&task).collect();
        }
        let cursor = AtomicUsize::new(0);
        let mut done: Vec<(usize, T)> = thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    scope.spawn(|| {
                        let mut local = Vec::new();
                        loop {
                            let i = cursor.fetch_add(1, Ordering::Relaxed);
                            if i >= n {
                                break local;
                            }
                            local.push((i, task(i)));
                        }
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        });
        done.sort_by_key(|(i, _)| *i);
        done.into_iter().map(|(_, t)| t).collect()
    }

    /// Map every partition, combine values per key inside the partition,
    /// shuffle the combined records and reduce them by key.
    ///
    /// `merge` must be associative and commutative; the result is then
    /// independent of worker count and partition order.
    pub fn map_reduce<K, V, M, R>(&self, stage: &str, partitions: &[Partition], map_fn: M, merge: R) -> Result<BTreeMap<K, V>, ExecError>
    where
        K: Ord + Send + Serialize,
        V: Send + Serialize,
        M: Fn(&Partition) -> Result<Vec<(K, V)>, String> + Sync,
        R: Fn(V, V) -> V + Sync,
    {
        let started = Instant::now();
        let combine = |pairs: Vec<(K, V)>| {
            let mut local: BTreeMap<K, V> = BTreeMap::new();
            for (k, v) in pairs {
                match local.remove(&k) {
                    Some(prev) => local.insert(k, merge(prev, v)),
                    None => local.insert(k, v),
                };
            }
            local
        };
        let outputs = self.run_tasks(partitions.len(), |i| {
            let local = combine(map_fn(&partitions[i])?);
            let bytes: usize = local.iter().map(|kv| serialized_size(&kv)).sum();
            Ok::<_, String>((local, bytes))
        });
        let mut result: BTreeMap<K, V> = BTreeMap::new();
        let (mut records, mut bytes) = (0, 0);
        for (part, out) in partitions.iter().zip(outputs) {
            let (local, size) = out.map_err(|msg| ExecError::TaskFailed { stage: stage.to_string(), partition: part.id, msg })?;
            records += local.len();
            bytes += size;
            for (k, v) in local {
                match result.remove(&k) {
                    Some(prev) => result.insert(k, merge(prev, v)),
                    None => result.insert(k, v),
                };
            }
        }
        self.record(StageStats {
            stage: stage.to_string(),
            tasks: partitions.len(),
            shuffle_records: records,
            shuffle_bytes: bytes,
            wall: started.elapsed(),
        });
        Ok(result)
    }

    /// Apply `f` to every item in fixed-size chunks on the pool, keeping order.
    pub fn par_map<T, U, F>(&self, stage: &str, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync,
    {
        let started = Instant::now();
        let chunks: Vec<&[T]> = items.chunks(PAR_MAP_CHUNK).collect();
        let out: Vec<U> = self
            .run_tasks(chunks.len(), |i| chunks[i].iter().map(&f).collect::<Vec<U>>())
            .into_iter()
            .flatten()
            .collect();
        self.record(StageStats { stage: stage.to_string(), tasks: chunks.len(), wall: started.elapsed(), ..Default::default() });
        out
    }

    /// Share an immutable value with all tasks, accounting its serialized size.
    pub fn broadcast<T: Serialize>(&self, name: &str, value: T) -> Broadcast<T> {
        let bytes = serialized_size(&value);
        self.stats.lock().unwrap().broadcasts.push(BroadcastStats { name: name.to_string(), bytes });
        Broadcast(Arc::new(value))
    }
}

/// Merge two ascending lists into one ascending, deduplicated list.
pub fn sorted_union<T: Ord>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Less => out.push(a.next().unwrap()),
                std::cmp::Ordering::Greater => out.push(b.next().unwrap()),
                std::cmp::Ordering::Equal => {
                    out.push(a.next().unwrap());
                    b.next();
                }
            },
            (Some(_), None) => out.push(a.next().unwrap()),
            (None, Some(_)) => out.push(b.next().unwrap()),
            (None, None) => break out,
        }
    }
}
