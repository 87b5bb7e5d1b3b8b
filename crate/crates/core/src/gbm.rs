//! Log-returns of geometric Brownian motion.
//!
//! For `ds = μ s dt + σ s dw`, `ln(s_t / s_0)` is normal with mean `η t` and
//! variance `σ² t`, `η = μ − σ²/2`. With `t = kτ` that is a time-linear law,
//! so the chain with `M = ητ` and `V = σ²τ` matches it in mean and variance
//! at every step.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{transition_probs, MomentSpec, Transition, TransitionKernel};
use crate::scalar::Real;
use crate::simulate::{simulate_segments, SimulationOptions, TrajectoryBatch};
use crate::stats::{pairwise_sum, NormalLaw};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams<T> {
    pub mu: T,
    pub sigma2: T,
    pub s0: T,
    pub tau: T,
}

impl<T: Real> GbmParams<T> {
    pub fn new(mu: T, sigma2: T, s0: T, tau: T) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        for (name, v) in [("sigma2", sigma2), ("s0", s0), ("tau", tau)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(GbmParams { mu, sigma2, s0, tau })
    }

    /// `η = μ − σ²/2`
    pub fn eta(&self) -> T {
        self.mu - self.sigma2 / (T::one() + T::one())
    }

    /// `M = ητ`, `V = σ²τ`.
    pub fn spec(&self) -> MomentSpec<T> {
        MomentSpec::new(self.eta() * self.tau, self.sigma2 * self.tau)
    }

    pub fn kernel(&self, grid: &Grid<T>) -> TransitionKernel<T> {
        TransitionKernel::new(grid.clone(), self.spec())
    }

    /// Law of `ln(s_{kτ} / s_0)`.
    pub fn log_return_law(&self, k: u64) -> NormalLaw<T> {
        let t = T::from_u64(k).unwrap() * self.tau;
        NormalLaw { mean: self.eta() * t, variance: self.sigma2 * t }
    }

    /// `E[s_{kτ}] = s_0 e^{μkτ}`.
    pub fn expected_price(&self, k: u64) -> T {
        self.s0 * (self.mu * T::from_u64(k).unwrap() * self.tau).exp()
    }
}

pub fn gbm_kernel_probs<T: Real>(grid: &Grid<T>, params: &GbmParams<T>, i: i64) -> Result<Transition<T>> {
    transition_probs(grid, &params.spec(), i)
}

/// Piecewise-constant coefficients: each entry takes over at its start step.
/// `s0` and `τ` are shared by every segment.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSchedule<T> {
    segments: Vec<(u64, GbmParams<T>)>,
}

impl<T: Real> CoefficientSchedule<T> {
    pub fn new(segments: Vec<(u64, GbmParams<T>)>) -> Result<Self> {
        let Some((first_start, first)) = segments.first() else {
            return Err(Error::param("schedule", "need at least one segment"));
        };
        if *first_start != 0 {
            return Err(Error::param("schedule", "first segment must start at step 0"));
        }
        if segments.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::param("schedule", "segment start steps must be strictly increasing"));
        }
        if segments.iter().any(|(_, p)| p.s0 != first.s0 || p.tau != first.tau) {
            return Err(Error::param("schedule", "all segments must share s0 and tau"));
        }
        Ok(CoefficientSchedule { segments })
    }

    pub fn constant(params: GbmParams<T>) -> Self {
        CoefficientSchedule { segments: vec![(0, params)] }
    }

    pub fn segments(&self) -> &[(u64, GbmParams<T>)] {
        &self.segments
    }

    /// Sum of per-segment step moments over the first `k` transitions.
    pub fn log_return_law(&self, k: u64) -> NormalLaw<T> {
        let mut mean = T::zero();
        let mut variance = T::zero();
        for (j, (start, params)) in self.segments.iter().enumerate() {
            let end = self.segments.get(j + 1).map_or(k, |(s, _)| (*s).min(k));
            if end <= *start {
                continue;
            }
            let steps = T::from_u64(end - start).unwrap();
            let spec = params.spec();
            mean = mean + spec.mean * steps;
            variance = variance + spec.variance * steps;
        }
        NormalLaw { mean, variance }
    }
}

pub fn simulate_schedule<T: Real>(
    grid: &Grid<T>,
    schedule: &CoefficientSchedule<T>,
    opts: &SimulationOptions,
) -> Result<TrajectoryBatch<T>> {
    let kernels: Vec<(u64, TransitionKernel<T>)> =
        schedule.segments.iter().map(|(start, p)| (*start, p.kernel(grid))).collect();
    simulate_segments(grid, &kernels, opts)
}

/// `s_0 e^{r(k)}` for every path at every recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePaths<T> {
    pub steps: Vec<u64>,
    /// Path-major, aligned with `steps`.
    pub prices: Vec<T>,
    pub mean: Vec<T>,
    /// `s_0 e^{μkτ}`
    pub expected: Vec<T>,
}

impl<T: Real> PricePaths<T> {
    pub fn path(&self, p: usize) -> &[T] {
        let w = self.steps.len();
        &self.prices[p * w..(p + 1) * w]
    }
}

pub fn price_paths<T: Real>(batch: &TrajectoryBatch<T>, params: &GbmParams<T>) -> PricePaths<T> {
    let steps = batch.recorded_steps().to_vec();
    let grid = batch.grid();
    let mut prices = Vec::with_capacity(batch.paths() * steps.len());
    for p in 0..batch.paths() {
        prices.extend(batch.path(p).iter().map(|&i| params.s0 * grid.point(i).exp()));
    }
    let n = T::from_usize(batch.paths()).unwrap();
    let w = steps.len();
    let mean = (0..w)
        .map(|slot| {
            let column: Vec<T> = (0..batch.paths()).map(|p| prices[p * w + slot]).collect();
            pairwise_sum(&column) / n
        })
        .collect();
    let expected = steps.iter().map(|&k| params.expected_price(k)).collect();
    PricePaths { steps, prices, mean, expected }
}
