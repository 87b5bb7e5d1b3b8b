//! Monte Carlo trajectories of the infinite-state chain.
//!
//! Path `p` draws its uniforms from a ChaCha8 stream keyed by `(seed, p)`, so
//! a batch is a pure function of `(seed, paths, steps)` whatever the number
//! of worker threads. Each step draws `u ∈ [0, 1)` and moves left if
//! `u < L`, stays if `u < L + C`, and moves right otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, IndexRange};
use crate::kernel::TransitionKernel;
use crate::scalar::Real;
use crate::stats::EmpiricalDistribution;

/// Which steps of each path to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    /// Every step `0..=steps`.
    All,
    /// The listed steps (deduplicated and sorted; values above `steps` are an error).
    Steps(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationOptions {
    pub paths: usize,
    pub steps: u64,
    pub seed: u64,
    pub threads: usize,
    pub record: Record,
}

impl SimulationOptions {
    pub fn new(paths: usize, steps: u64, seed: u64) -> Self {
        SimulationOptions { paths, steps, seed, threads: 1, record: Record::Steps(vec![steps]) }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    fn recorded_steps(&self) -> Result<Vec<u64>> {
        match &self.record {
            Record::All => Ok((0..=self.steps).collect()),
            Record::Steps(list) => {
                let mut v = list.clone();
                v.sort_unstable();
                v.dedup();
                if let Some(&last) = v.last() {
                    if last > self.steps {
                        return Err(Error::param(
                            "record",
                            format!("step {last} exceeds the {} simulated steps", self.steps),
                        ));
                    }
                }
                Ok(v)
            }
        }
    }
}

/// Cumulative thresholds `(L, L + C)` for every index of a window.
#[derive(Debug, Clone)]
struct ThresholdTable<T> {
    lo: i64,
    cuts: Vec<(T, T)>,
}

impl<T: Real> ThresholdTable<T> {
    fn build(kernel: &TransitionKernel<T>, window: IndexRange) -> Result<Self> {
        kernel.check_feasibility(window, &T::zero()).into_result()?;
        let cuts = kernel.table(window)?.into_iter().map(|t| (t.left, t.left + t.stay)).collect();
        Ok(ThresholdTable { lo: window.lo, cuts })
    }

    #[inline]
    fn step(&self, index: i64, u: T) -> i64 {
        let (left, stay) = self.cuts[(index - self.lo) as usize];
        if u < left {
            index - 1
        } else if u < stay {
            index
        } else {
            index + 1
        }
    }
}

/// A kernel in force from `start` onward: it drives the transition out of
/// every step `k >= start`.
#[derive(Debug, Clone)]
struct Segment<T> {
    start: u64,
    table: ThresholdTable<T>,
}

/// Grid indices of simulated paths at the recorded steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch<T> {
    grid: Grid<T>,
    paths: usize,
    steps: u64,
    seed: u64,
    recorded: Vec<u64>,
    /// Path-major: `states[p * recorded.len() + r]`.
    states: Vec<i64>,
}

impl<T: Real> TrajectoryBatch<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn recorded_steps(&self) -> &[u64] {
        &self.recorded
    }

    fn slot(&self, k: u64) -> Result<usize> {
        if k > self.steps {
            return Err(Error::param("k", format!("step {k} beyond the {} simulated steps", self.steps)));
        }
        self.recorded.binary_search(&k).map_err(|_| Error::NotRecorded(k))
    }

    /// Recorded indices of path `p`, aligned with [`recorded_steps`](Self::recorded_steps).
    pub fn path(&self, p: usize) -> &[i64] {
        let width = self.recorded.len();
        &self.states[p * width..(p + 1) * width]
    }

    /// Index of every path at step `k`, in path order.
    pub fn indices_at(&self, k: u64) -> Result<Vec<i64>> {
        let slot = self.slot(k)?;
        Ok((0..self.paths).map(|p| self.path(p)[slot]).collect())
    }

    /// Coordinates of every path at step `k`, in path order.
    pub fn coords_at(&self, k: u64) -> Result<Vec<T>> {
        Ok(self.indices_at(k)?.into_iter().map(|i| self.grid.point(i)).collect())
    }

    pub fn snapshot(&self, k: u64) -> Result<EmpiricalDistribution<T>> {
        EmpiricalDistribution::new(self.coords_at(k)?)
    }
}

fn run<T: Real>(grid: &Grid<T>, segments: &[Segment<T>], opts: &SimulationOptions) -> Result<TrajectoryBatch<T>> {
    if opts.paths == 0 {
        return Err(Error::param("paths", "need at least one path"));
    }
    if opts.threads == 0 {
        return Err(Error::param("threads", "need at least one worker"));
    }
    let recorded = opts.recorded_steps()?;
    let width = recorded.len();
    let mut states = vec![0i64; opts.paths * width];

    let simulate_path = |p: usize, out: &mut [i64]| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(p as u64);
        let mut index = 0i64;
        let mut seg = 0usize;
        let mut slot = 0usize;
        if width > 0 && recorded[0] == 0 {
            out[0] = 0;
            slot = 1;
        }
        for k in 1..=opts.steps {
            while seg + 1 < segments.len() && segments[seg + 1].start < k {
                seg += 1;
            }
            let u = T::from_f64(rng.gen::<f64>()).unwrap();
            index = segments[seg].table.step(index, u);
            if slot < width && recorded[slot] == k {
                out[slot] = index;
                slot += 1;
            }
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    if width > 0 {
        pool.install(|| {
            states.par_chunks_mut(width).enumerate().for_each(|(p, out)| simulate_path(p, out));
        });
    }

    Ok(TrajectoryBatch { grid: grid.clone(), paths: opts.paths, steps: opts.steps, seed: opts.seed, recorded, states })
}

/// Simulates `opts.paths` independent trajectories from `x_0`. Feasibility is
/// checked on the whole reachable window `[-steps, steps]` before sampling.
pub fn simulate<T: Real>(kernel: &TransitionKernel<T>, opts: &SimulationOptions) -> Result<TrajectoryBatch<T>> {
    let table = ThresholdTable::build(kernel, IndexRange::symmetric(opts.steps))?;
    run(kernel.grid(), &[Segment { start: 0, table }], opts)
}

/// Simulates under a sequence of kernels on one grid: the kernel starting at
/// step `s` governs every transition out of steps `>= s` until the next one
/// takes over. Paths continue from wherever they are at the switch.
pub fn simulate_segments<T: Real>(
    grid: &Grid<T>,
    kernels: &[(u64, TransitionKernel<T>)],
    opts: &SimulationOptions,
) -> Result<TrajectoryBatch<T>> {
    match kernels.first() {
        Some((0, _)) => {}
        _ => return Err(Error::param("schedule", "first segment must start at step 0")),
    }
    if kernels.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::param("schedule", "segment start steps must be strictly increasing"));
    }
    if kernels.iter().any(|(_, k)| k.grid() != grid) {
        return Err(Error::param("schedule", "all segments must share the grid"));
    }
    let window = IndexRange::symmetric(opts.steps);
    let segments = kernels
        .iter()
        .map(|(start, kernel)| Ok(Segment { start: *start, table: ThresholdTable::build(kernel, window)? }))
        .collect::<Result<Vec<_>>>()?;
    run(grid, &segments, opts)
}
