//! Discrete-time Markov chains on nonuniform one-dimensional grids whose
//! mean and variance grow exactly linearly in the step count.
//!
//! Each state `x_i` moves to `x_{i-1}`, stays, or moves to `x_{i+1}`. Given a
//! per-step mean `M` and variance `V`, [`kernel`] picks the three
//! probabilities so that a chain started at `x_0 = 0` satisfies
//! `E[r(k)] = M k` and `Var[r(k)] = V k`, whenever the grid's gaps admit it.
//!
//! - [`grid`]: lazily evaluated uniform, two-sided and tabulated grids.
//! - [`kernel`]: transition probabilities and feasibility checks.
//! - [`exact`]: exact propagation on a truncated chain, with moment recurrences.
//! - [`simulate`]: reproducible parallel Monte Carlo of the infinite chain.
//! - [`heat`], [`gbm`]: heat diffusion and GBM log-return specializations.
//! - [`stats`]: quantiles, normal law, Wasserstein-1, histograms.
//!
//! Grid, kernel and exact propagation are generic over [`Scalar`], which
//! includes [`Rational`]; the rest is generic over floating-point [`Real`].
//!
//! ```
//! use momentchain::{Grid64, MomentSpec64, TruncatedChain64, TransitionKernel64};
//!
//! let grid = Grid64::two_sided(0.1, 0.01).unwrap();
//! let kernel = TransitionKernel64::new(grid, MomentSpec64::new(3.75e-4, 5e-5));
//! let chain = TruncatedChain64::build(&kernel, 100).unwrap();
//! let (mean, var) = chain.propagate(100).mean_var();
//! assert!((mean - 3.75e-2).abs() < 1e-12);
//! assert!((var - 5e-3).abs() < 1e-12);
//! ```

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod gbm;
pub mod grid;
pub mod heat;
pub mod kernel;
pub mod scalar;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use exact::{check_recurrences, GridDistribution, RecurrenceReport, TruncatedChain};
pub use gbm::{price_paths, simulate_schedule, CoefficientSchedule, GbmParams, PricePaths};
pub use grid::{Gaps, Grid, GridKind, IndexRange};
pub use heat::{embed_points, temperature_profile, HeatParams, TemperatureProfile};
pub use kernel::{
    check_feasibility, check_feasibility_global, transition_probs, uniform_transition_probs, FeasibilityReport,
    FeasibilityViolation, Inequality, MomentSpec, Transition, TransitionKernel,
};
pub use scalar::{Real, Scalar};
pub use simulate::{simulate, Record, SimulationOptions, TrajectoryBatch};
pub use stats::{histogram, wasserstein1, wasserstein1_empirical, EmpiricalDistribution, Histogram, NormalLaw};

/// Arbitrary-precision rationals; exact arithmetic for grids, kernels and
/// propagation.
pub type Rational = num_rational::BigRational;

pub type Grid64 = Grid<f64>;
pub type MomentSpec64 = MomentSpec<f64>;
pub type TransitionKernel64 = TransitionKernel<f64>;
pub type TruncatedChain64 = TruncatedChain<f64>;
pub type TrajectoryBatch64 = TrajectoryBatch<f64>;
pub type GbmParams64 = GbmParams<f64>;
pub type HeatParams64 = HeatParams<f64>;
pub type EmpiricalDistribution64 = EmpiricalDistribution<f64>;
pub type NormalLaw64 = NormalLaw<f64>;

pub type Grid32 = Grid<f32>;
pub type TransitionKernel32 = TransitionKernel<f32>;
pub type TruncatedChain32 = TruncatedChain<f32>;

pub type RationalGrid = Grid<Rational>;
pub type RationalMomentSpec = MomentSpec<Rational>;
pub type RationalKernel = TransitionKernel<Rational>;
pub type RationalChain = TruncatedChain<Rational>;
