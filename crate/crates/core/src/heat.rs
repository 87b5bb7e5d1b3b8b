//! Heat diffusion: a zero-drift chain whose variance grows as `2ατ` per step,
//! compared against the Gaussian heat kernel with variance `2αt`, `t = kτ`.

use crate::error::{Error, Result};
use crate::exact::TruncatedChain;
use crate::grid::{Grid, IndexRange};
use crate::kernel::{check_feasibility, transition_probs, FeasibilityReport, MomentSpec, Transition, TransitionKernel};
use crate::scalar::Real;
use crate::stats::NormalLaw;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatParams<T> {
    /// Diffusivity.
    pub alpha: T,
    /// Physical time per chain step.
    pub tau: T,
    pub points_of_interest: Vec<T>,
}

impl<T: Real> HeatParams<T> {
    pub fn new(alpha: T, tau: T, points_of_interest: Vec<T>) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(Error::param("tau", format!("must be positive, got {tau}")));
        }
        if points_of_interest.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("points_of_interest", "points must be finite"));
        }
        Ok(HeatParams { alpha, tau, points_of_interest })
    }

    /// `M = 0`, `V = 2ατ`.
    pub fn spec(&self) -> MomentSpec<T> {
        heat_spec(self.alpha, self.tau)
    }

    /// Heat kernel law at step `k`: `N(0, 2αkτ)`.
    pub fn law_at(&self, k: u64) -> NormalLaw<T> {
        let two = T::one() + T::one();
        NormalLaw { mean: T::zero(), variance: two * self.alpha * self.tau * T::from_u64(k).unwrap() }
    }
}

pub fn heat_spec<T: Real>(alpha: T, tau: T) -> MomentSpec<T> {
    MomentSpec::new(T::zero(), (alpha + alpha) * tau)
}

/// With zero drift the three feasibility inequalities reduce to
/// `2ατ <= (x_{i+1} - x_i)(x_i - x_{i-1})`.
pub fn heat_feasibility<T: Real>(grid: &Grid<T>, params: &HeatParams<T>, range: IndexRange) -> FeasibilityReport {
    check_feasibility(grid, &params.spec(), range, &T::zero())
}

pub fn heat_kernel_probs<T: Real>(grid: &Grid<T>, params: &HeatParams<T>, i: i64) -> Result<Transition<T>> {
    transition_probs(grid, &params.spec(), i)
}

/// Largest `τ` for which the heat chain is feasible on all of `Z`.
pub fn max_feasible_tau<T: Real>(grid: &Grid<T>, alpha: T) -> T {
    grid.certifying_window()
        .iter()
        .map(|i| {
            let g = grid.gaps(i);
            g.left * g.right
        })
        .fold(T::infinity(), T::min)
        / (alpha + alpha)
}

/// An explicit grid containing `0` and every point of interest. Gaps wider
/// than `base_gap` are split evenly so no gap exceeds it; the table is
/// extended by `base_gap` on both sides. Duplicates collapse.
pub fn embed_points<T: Real>(points: &[T], base_gap: T) -> Result<Grid<T>> {
    if !(base_gap > T::zero() && base_gap.is_finite()) {
        return Err(Error::param("base_gap", format!("must be positive, got {base_gap}")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::param("points_of_interest", "points must be finite"));
    }
    let mut anchors: Vec<T> = points.to_vec();
    anchors.push(T::zero());
    anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    anchors.dedup();
    if anchors.len() == 1 {
        return Grid::uniform(base_gap);
    }
    let mut table = vec![anchors[0]];
    for w in anchors.windows(2) {
        let gap = w[1] - w[0];
        let pieces = (gap / base_gap).ceil().max(T::one());
        let count = pieces.to_usize().unwrap();
        for j in 1..count {
            table.push(w[0] + gap * T::from_usize(j).unwrap() / pieces);
        }
        table.push(w[1]);
    }
    Grid::explicit(table, base_gap, base_gap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow<T> {
    pub index: i64,
    pub x: T,
    /// `P(r(k) = x_i)`
    pub mass: T,
    /// Mass over the half-span `(x_{i+1} - x_{i-1}) / 2`.
    pub density_estimate: T,
    /// Heat kernel density at `x_i`; absent at `k = 0`.
    pub analytic_density: Option<T>,
    /// Gaussian mass between the midpoints to the neighbours; absent at `k = 0`.
    pub analytic_cell_mass: Option<T>,
}

impl<T: Real> ProfileRow<T> {
    pub fn abs_error(&self) -> Option<T> {
        self.analytic_cell_mass.map(|c| (self.mass - c).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile<T> {
    pub k: u64,
    pub time: T,
    pub rows: Vec<ProfileRow<T>>,
    /// Row positions of the points of interest, in the order given.
    pub highlighted: Vec<Option<usize>>,
}

impl<T: Real> TemperatureProfile<T> {
    /// Total variation distance between the chain and the Gaussian cell
    /// masses, counting the Gaussian mass outside the window.
    pub fn total_variation(&self) -> Option<T> {
        let mut diff = T::zero();
        let mut covered = T::zero();
        for row in &self.rows {
            let c = row.analytic_cell_mass?;
            diff = diff + (row.mass - c).abs();
            covered = covered + c;
        }
        let outside = (T::one() - covered).max(T::zero());
        Some((diff + outside) / (T::one() + T::one()))
    }
}

/// Exact profile after `k` steps on the truncated chain of half-width `n`.
pub fn temperature_profile<T: Real>(
    grid: &Grid<T>,
    params: &HeatParams<T>,
    n: u64,
    k: u64,
) -> Result<TemperatureProfile<T>> {
    if k > n {
        return Err(Error::BeyondTruncation { requested: k, limit: n });
    }
    let kernel = TransitionKernel::new(grid.clone(), params.spec());
    let chain = TruncatedChain::build(&kernel, n)?;
    let dist = chain.propagate(k);
    let law = params.law_at(k);
    let half = T::from_f64(0.5).unwrap();
    let window = IndexRange::symmetric(n);
    let rows: Vec<ProfileRow<T>> = window
        .iter()
        .zip(dist.mass)
        .map(|(i, mass)| {
            let x = grid.point(i);
            let (prev, next) = (grid.point(i - 1), grid.point(i + 1));
            let (analytic_density, analytic_cell_mass) = if k == 0 {
                (None, None)
            } else {
                (Some(law.pdf(x)), Some(law.interval_mass((prev + x) * half, (x + next) * half)))
            };
            ProfileRow {
                index: i,
                x,
                mass,
                density_estimate: mass / ((next - prev) * half),
                analytic_density,
                analytic_cell_mass,
            }
        })
        .collect();
    let highlighted = params.points_of_interest.iter().map(|p| rows.iter().position(|r| r.x == *p)).collect();
    Ok(TemperatureProfile { k, time: params.tau * T::from_u64(k).unwrap(), rows, highlighted })
}
