//! Exact distribution propagation on the truncated chain `x_{-n} ..= x_n`.
//!
//! Boundary states are absorbing. Starting from all mass at `x_0`, mass needs
//! `n` steps to reach a boundary, so for `k <= n` the truncated chain
//! reproduces the infinite chain's law exactly; propagation past `n` is
//! refused wherever moments are reported.

use crate::error::{Error, Result};
use crate::grid::{Grid, IndexRange};
use crate::kernel::{MomentSpec, Transition, TransitionKernel};
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone)]
pub struct TruncatedChain<T> {
    n: u64,
    coords: Vec<T>,
    /// Row `j` holds the triple of state `j - n`; rows `0` and `2n` are absorbing.
    rows: Vec<Transition<T>>,
    spec: MomentSpec<T>,
}

impl<T: Scalar> TruncatedChain<T> {
    pub fn build(kernel: &TransitionKernel<T>, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "half-width must be positive"));
        }
        let window = IndexRange::symmetric(n);
        let coords = window.iter().map(|i| kernel.grid().point(i)).collect();
        let mut rows = Vec::with_capacity(window.len());
        rows.push(Transition::absorbing());
        let interior = IndexRange::symmetric(n - 1);
        rows.extend(kernel.table(interior)?);
        rows.push(Transition::absorbing());
        Ok(TruncatedChain { n, coords, rows, spec: kernel.spec().clone() })
    }

    pub fn half_width(&self) -> u64 {
        self.n
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn rows(&self) -> &[Transition<T>] {
        &self.rows
    }

    pub fn spec(&self) -> &MomentSpec<T> {
        &self.spec
    }

    /// Point mass at `x_0`.
    pub fn initial(&self) -> GridDistribution<T> {
        let mut mass = vec![T::zero(); self.coords.len()];
        mass[self.n as usize] = T::one();
        GridDistribution { coords: self.coords.clone(), mass }
    }

    /// Dense transition matrix, row-stochastic.
    pub fn dense_matrix(&self) -> Vec<Vec<T>> {
        let size = self.rows.len();
        let mut m = vec![vec![T::zero(); size]; size];
        for (j, row) in self.rows.iter().enumerate() {
            if j > 0 {
                m[j][j - 1] = row.left.clone();
            }
            m[j][j] = row.stay.clone();
            if j + 1 < size {
                m[j][j + 1] = row.right.clone();
            }
        }
        m
    }

    pub fn propagator(&self) -> Propagator<'_, T> {
        let center = self.n as usize;
        Propagator { chain: self, dist: self.initial(), step: 0, support: (center, center) }
    }

    /// `ν P^k`, by `k` tridiagonal vector-matrix products.
    pub fn propagate(&self, k: u64) -> GridDistribution<T> {
        let mut p = self.propagator();
        for _ in 0..k {
            p.advance();
        }
        p.dist
    }
}

/// Stepwise propagation, tracking the support so each step touches only
/// states that can carry mass.
#[derive(Debug, Clone)]
pub struct Propagator<'a, T> {
    chain: &'a TruncatedChain<T>,
    dist: GridDistribution<T>,
    step: u64,
    support: (usize, usize),
}

impl<'a, T: Scalar> Propagator<'a, T> {
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn distribution(&self) -> &GridDistribution<T> {
        &self.dist
    }

    pub fn advance(&mut self) {
        let rows = &self.chain.rows;
        let last = rows.len() - 1;
        let (lo, hi) = self.support;
        let new_lo = lo.saturating_sub(1);
        let new_hi = (hi + 1).min(last);
        let old = &self.dist.mass;
        let mut next = vec![T::zero(); old.len()];
        for j in new_lo..=new_hi {
            let mut acc = old[j].clone() * rows[j].stay.clone();
            if j > lo && j - 1 <= hi {
                acc = acc + old[j - 1].clone() * rows[j - 1].right.clone();
            }
            if j < hi && j + 1 >= lo {
                acc = acc + old[j + 1].clone() * rows[j + 1].left.clone();
            }
            next[j] = acc;
        }
        self.dist.mass = next;
        self.support = (new_lo, new_hi);
        self.step += 1;
    }

    /// Mass currently sitting on the two absorbing states.
    pub fn boundary_mass(&self) -> T {
        let m = &self.dist.mass;
        m[0].clone() + m[m.len() - 1].clone()
    }
}

/// A probability vector over consecutive grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution<T> {
    pub coords: Vec<T>,
    pub mass: Vec<T>,
}

impl<T: Scalar> GridDistribution<T> {
    pub fn total_mass(&self) -> T {
        compensated_sum(self.mass.iter().cloned())
    }

    pub fn mean(&self) -> T {
        compensated_sum(self.coords.iter().zip(&self.mass).map(|(x, p)| x.clone() * p.clone()))
    }

    /// `Σ x² p`.
    pub fn second_moment(&self) -> T {
        compensated_sum(self.coords.iter().zip(&self.mass).map(|(x, p)| x.clone() * x.clone() * p.clone()))
    }

    /// `(mean, Σ x² p - mean²)`.
    pub fn mean_var(&self) -> (T, T) {
        let mean = self.mean();
        let var = self.second_moment() - mean.clone() * mean.clone();
        (mean, var)
    }
}

/// Per-step residuals of the first and second moment recurrences and of their
/// closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceStep<T> {
    pub k: u64,
    pub mean: T,
    pub variance: T,
    pub second_moment: T,
    pub boundary_mass: T,
    /// `mean(k) - mean(k-1) - M`
    pub mean_step: T,
    /// `m2(k) - m2(k-1) - (M² + V + 2M²(k-1))`
    pub second_moment_step: T,
    /// `mean(k) - M k`
    pub mean_closed: T,
    /// `m2(k) - (M² k² + V k)`
    pub second_moment_closed: T,
}

impl<T: Scalar> RecurrenceStep<T> {
    /// Largest absolute recurrence residual at this step.
    pub fn max_step_residual(&self) -> T {
        let a = self.mean_step.abs_val();
        let b = self.second_moment_step.abs_val();
        if a > b {
            a
        } else {
            b
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport<T> {
    pub steps: Vec<RecurrenceStep<T>>,
}

impl<T: Scalar> RecurrenceReport<T> {
    fn max_by(&self, f: impl Fn(&RecurrenceStep<T>) -> T) -> T {
        self.steps.iter().map(|s| f(s).abs_val()).fold(T::zero(), |acc, v| if v > acc { v } else { acc })
    }

    pub fn max_mean_step(&self) -> T {
        self.max_by(|s| s.mean_step.clone())
    }

    pub fn max_second_moment_step(&self) -> T {
        self.max_by(|s| s.second_moment_step.clone())
    }

    pub fn max_mean_closed(&self) -> T {
        self.max_by(|s| s.mean_closed.clone())
    }

    pub fn max_second_moment_closed(&self) -> T {
        self.max_by(|s| s.second_moment_closed.clone())
    }

    /// Largest `|var(k) - V k|`.
    pub fn max_variance_closed(&self, spec: &MomentSpec<T>) -> T {
        self.max_by(|s| s.variance.clone() - spec.variance.clone() * T::from_u64(s.k).expect("k fits"))
    }
}

/// Propagates to `k_max` and records moment recurrences at every step
/// `1..=k_max` (step `0` is the initial point mass).
pub fn check_recurrences<T: Scalar>(chain: &TruncatedChain<T>, k_max: u64) -> Result<RecurrenceReport<T>> {
    if k_max > chain.n {
        return Err(Error::BeyondTruncation { requested: k_max, limit: chain.n });
    }
    let m = chain.spec.mean.clone();
    let base = chain.spec.second_moment();
    let mut p = chain.propagator();
    let mut prev_mean = p.distribution().mean();
    let mut prev_m2 = p.distribution().second_moment();
    let mut steps = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        p.advance();
        let dist = p.distribution();
        let mean = dist.mean();
        let m2 = dist.second_moment();
        let kf = T::from_u64(k).expect("k fits");
        let km1 = kf.clone() - T::one();
        let two = T::one() + T::one();
        let step = RecurrenceStep {
            k,
            variance: m2.clone() - mean.clone() * mean.clone(),
            boundary_mass: p.boundary_mass(),
            mean_step: mean.clone() - prev_mean.clone() - m.clone(),
            second_moment_step: m2.clone() - prev_m2.clone() - (base.clone() + two * m.clone() * m.clone() * km1),
            mean_closed: mean.clone() - m.clone() * kf.clone(),
            second_moment_closed: m2.clone()
                - (m.clone() * m.clone() * kf.clone() * kf.clone() + chain.spec.variance.clone() * kf),
            mean,
            second_moment: m2.clone(),
        };
        prev_mean = step.mean.clone();
        prev_m2 = m2;
        steps.push(step);
    }
    Ok(RecurrenceReport { steps })
}

/// Convenience: `(mean, variance)` after `k <= n` steps.
pub fn moments_after<T: Scalar>(chain: &TruncatedChain<T>, k: u64) -> Result<(T, T)> {
    if k > chain.n {
        return Err(Error::BeyondTruncation { requested: k, limit: chain.n });
    }
    Ok(chain.propagate(k).mean_var())
}

/// Builds the truncated chain directly from a grid and moment specification.
pub fn build_truncated<T: Scalar>(grid: &Grid<T>, spec: &MomentSpec<T>, n: u64) -> Result<TruncatedChain<T>> {
    TruncatedChain::build(&TransitionKernel::new(grid.clone(), spec.clone()), n)
}
