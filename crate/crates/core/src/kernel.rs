//! Moment-matched trinomial transition kernels.
//!
//! Given per-step mean increment `M` and variance increment `V`, a chain on a
//! grid moves to `x_{i-1}`, stays, or moves to `x_{i+1}` with probabilities
//!
//! ```text
//! L = (M² + V - M·r) / ((l + r)·l)
//! R = (M² + V + M·l) / ((l + r)·r)
//! C = 1 - (M² + V + M·(l - r)) / (l·r)
//! ```
//!
//! where `l` and `r` are the left and right gaps at `x_i`. When the three
//! inequalities checked by [`check_feasibility`] hold, started from `x_0` the
//! chain has `E[r(k)] = M·k` and `Var[r(k)] = V·k` for every `k`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Gaps, Grid, IndexRange};
use crate::scalar::Scalar;

/// Per-step mean and variance increments, in grid units.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> MomentSpec<T> {
    pub fn new(mean: T, variance: T) -> Self {
        MomentSpec { mean, variance }
    }

    /// `M² + V`, the second raw moment of one increment.
    pub fn second_moment(&self) -> T {
        self.mean.clone() * self.mean.clone() + self.variance.clone()
    }
}

/// Probabilities of moving left, staying, and moving right.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub left: T,
    pub stay: T,
    pub right: T,
}

impl<T: Scalar> Transition<T> {
    pub fn absorbing() -> Self {
        Transition { left: T::zero(), stay: T::one(), right: T::zero() }
    }

    pub fn sum(&self) -> T {
        self.left.clone() + self.stay.clone() + self.right.clone()
    }
}

/// Which of the three feasibility inequalities failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `M·(x_{i+1} - x_i) <= M² + V`, keeps `L >= 0`.
    LeftWeight,
    /// `-M·(x_i - x_{i-1}) <= M² + V`, keeps `R >= 0`.
    RightWeight,
    /// `M² + V + M·(2x_i - x_{i+1} - x_{i-1}) <= (x_{i+1} - x_i)(x_i - x_{i-1})`, keeps `C >= 0`.
    StayWeight,
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Inequality::LeftWeight => "left_weight",
            Inequality::RightWeight => "right_weight",
            Inequality::StayWeight => "stay_weight",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityViolation {
    pub index: i64,
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index {}: {} inequality fails ({} > {})", self.index, self.inequality.name(), self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub range: IndexRange,
    pub first_violation: Option<FeasibilityViolation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match self.first_violation {
            None => Ok(()),
            Some(v) => Err(Error::InfeasibleWindow(v)),
        }
    }
}

fn to_f64<T: Scalar>(v: &T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Checks the three inequalities at a single index, each as `lhs <= rhs + slack`.
fn violation_at<T: Scalar>(gaps: &Gaps<T>, spec: &MomentSpec<T>, slack: &T) -> Option<(Inequality, T, T)> {
    let m = spec.mean.clone();
    let base = spec.second_moment();
    let checks = [
        (Inequality::LeftWeight, m.clone() * gaps.right.clone(), base.clone()),
        (Inequality::RightWeight, -(m.clone() * gaps.left.clone()), base.clone()),
        (
            Inequality::StayWeight,
            base + m * (gaps.left.clone() - gaps.right.clone()),
            gaps.right.clone() * gaps.left.clone(),
        ),
    ];
    checks.into_iter().find(|(_, lhs, rhs)| *lhs > rhs.clone() + slack.clone())
}

/// Checks feasibility on every index of `range`, reporting the first failure
/// (lowest index; inequalities in declaration order).
pub fn check_feasibility<T: Scalar>(
    grid: &Grid<T>,
    spec: &MomentSpec<T>,
    range: IndexRange,
    slack: &T,
) -> FeasibilityReport {
    let first_violation = range.iter().find_map(|i| {
        violation_at(&grid.gaps(i), spec, slack).map(|(inequality, lhs, rhs)| FeasibilityViolation {
            index: i,
            inequality,
            lhs: to_f64(&lhs),
            rhs: to_f64(&rhs),
        })
    });
    if first_violation.is_none() {
        // Feasibility forces a nonnegative variance increment.
        debug_assert!(spec.variance >= -slack.clone());
    }
    FeasibilityReport { range, first_violation }
}

/// Feasibility on all of `Z`, via the grid's certifying window.
pub fn check_feasibility_global<T: Scalar>(grid: &Grid<T>, spec: &MomentSpec<T>, slack: &T) -> FeasibilityReport {
    check_feasibility(grid, spec, grid.certifying_window(), slack)
}

/// The unvalidated triple for the given gaps. Expression order is fixed so
/// that uniform and general paths agree bit for bit.
fn raw_probs<T: Scalar>(gaps: &Gaps<T>, spec: &MomentSpec<T>) -> Transition<T> {
    let Gaps { left, right } = gaps.clone();
    let span = left.clone() + right.clone();
    let m = spec.mean.clone();
    let base = spec.second_moment();
    let num_left = base.clone() - m.clone() * right.clone();
    let num_right = base.clone() + m.clone() * left.clone();
    let num_stay = base + m * (left.clone() - right.clone());
    Transition {
        left: num_left / (span.clone() * left.clone()),
        stay: T::one() - num_stay / (right.clone() * left.clone()),
        right: num_right / (span * right),
    }
}

fn validate<T: Scalar>(index: i64, probs: Transition<T>, tolerance: &T) -> Result<Transition<T>> {
    let lo = -tolerance.clone();
    let hi = T::one() + tolerance.clone();
    let in_range = |p: &T| *p >= lo && *p <= hi;
    let sum_ok = (probs.sum() - T::one()).abs_val() <= T::sum_tolerance();
    if in_range(&probs.left) && in_range(&probs.stay) && in_range(&probs.right) && sum_ok {
        Ok(probs)
    } else {
        Err(Error::InfeasibleAt {
            index,
            left: to_f64(&probs.left),
            stay: to_f64(&probs.stay),
            right: to_f64(&probs.right),
        })
    }
}

/// Transition probabilities at index `i`. Infeasible triples are an error,
/// never clamped.
pub fn transition_probs<T: Scalar>(grid: &Grid<T>, spec: &MomentSpec<T>, i: i64) -> Result<Transition<T>> {
    validate(i, raw_probs(&grid.gaps(i), spec), &T::range_tolerance())
}

/// Closed form for a uniform grid of spacing `h`; independent of the index.
pub fn uniform_transition_probs<T: Scalar>(h: T, spec: &MomentSpec<T>) -> Result<Transition<T>> {
    if !(h > T::zero()) {
        return Err(Error::param("h", format!("must be positive, got {h}")));
    }
    let m = spec.mean.clone();
    let base = spec.second_moment();
    let two_h2 = (h.clone() + h.clone()) * h.clone();
    let probs = Transition {
        left: (base.clone() - m.clone() * h.clone()) / two_h2.clone(),
        stay: T::one() - base.clone() / (h.clone() * h.clone()),
        right: (base + m * h) / two_h2,
    };
    validate(0, probs, &T::range_tolerance())
}

/// A grid paired with a moment specification.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel<T> {
    grid: Grid<T>,
    spec: MomentSpec<T>,
}

impl<T: Scalar> TransitionKernel<T> {
    pub fn new(grid: Grid<T>, spec: MomentSpec<T>) -> Self {
        TransitionKernel { grid, spec }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn spec(&self) -> &MomentSpec<T> {
        &self.spec
    }

    pub fn probs(&self, i: i64) -> Result<Transition<T>> {
        transition_probs(&self.grid, &self.spec, i)
    }

    pub fn check_feasibility(&self, range: IndexRange, slack: &T) -> FeasibilityReport {
        check_feasibility(&self.grid, &self.spec, range, slack)
    }

    /// Triples for every index of `range`, erroring on the first infeasible one.
    pub fn table(&self, range: IndexRange) -> Result<Vec<Transition<T>>> {
        range.iter().map(|i| self.probs(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn spec(m: f64, v: f64) -> MomentSpec<f64> {
        MomentSpec::new(m, v)
    }

    fn close(a: &Transition<f64>, b: (f64, f64, f64), tol: f64) -> bool {
        (a.left - b.0).abs() <= tol && (a.stay - b.1).abs() <= tol && (a.right - b.2).abs() <= tol
    }

    #[test]
    fn uniform_heat_like_triple() {
        let g = Grid::uniform(1.0).unwrap();
        let t = transition_probs(&g, &spec(0.0, 0.2), 7).unwrap();
        assert!(close(&t, (0.1, 0.8, 0.1), 1e-15), "{t:?}");
        let u = uniform_transition_probs(1.0, &spec(0.0, 0.2)).unwrap();
        assert!(close(&u, (0.1, 0.8, 0.1), 1e-15));
    }

    #[test]
    fn frozen_chain() {
        let g = Grid::two_sided(0.1, 0.01).unwrap();
        for i in -3..=3 {
            assert_eq!(
                transition_probs(&g, &spec(0.0, 0.0), i).unwrap(),
                Transition { left: 0.0, stay: 1.0, right: 0.0 }
            );
        }
    }

    #[test]
    fn negative_left_weight_is_an_error() {
        // L = (0.25 - 0.5)/2 = -0.125, R = 0.375, C = 0.75
        let err = uniform_transition_probs(1.0, &spec(0.5, 0.0)).unwrap_err();
        match err {
            Error::InfeasibleAt { left, stay, right, .. } => {
                assert_eq!((left, stay, right), (-0.125, 0.75, 0.375));
            }
            other => panic!("unexpected {other:?}"),
        }
        let report = check_feasibility(&Grid::uniform(1.0).unwrap(), &spec(0.5, 0.0), IndexRange::symmetric(3), &0.0);
        assert_eq!(report.first_violation.unwrap().inequality, Inequality::LeftWeight);
    }

    #[test]
    fn boundary_of_stay_inequality() {
        let h = 0.3;
        let t = uniform_transition_probs(h, &spec(0.0, h * h)).unwrap();
        assert_eq!((t.left, t.stay, t.right), (0.5, 0.0, 0.5));
    }

    #[test]
    fn feasibility_examples() {
        let uniform = Grid::uniform(1.0).unwrap();
        assert!(check_feasibility(&uniform, &spec(0.0, 0.2), IndexRange::new(-100, 100).unwrap(), &0.0).feasible());

        let fine = Grid::uniform(0.1).unwrap();
        let report = check_feasibility(&fine, &spec(0.0, 0.02), IndexRange::new(-5, 5).unwrap(), &0.0);
        let v = report.first_violation.unwrap();
        assert_eq!(v.index, -5);
        assert_eq!(v.inequality, Inequality::StayWeight);
        assert!(v.lhs > v.rhs);
        for i in -5..=5 {
            assert!(transition_probs(&fine, &spec(0.0, 0.02), i).is_err());
        }
    }

    #[test]
    fn reference_gbm_configuration_is_feasible() {
        let g = Grid::two_sided(0.1, 0.01).unwrap();
        let s = spec(1.875 * 0.0002, 0.25 * 0.0002);
        assert!(check_feasibility(&g, &s, IndexRange::symmetric(10_000), &0.0).feasible());
        assert!(check_feasibility_global(&g, &s, &0.0).feasible());
    }

    #[test]
    fn reference_gbm_triples_match_direct_formula() {
        let g = Grid::two_sided(0.1, 0.01).unwrap();
        let (m, v) = (3.75e-4, 5e-5);
        let s = spec(m, v);
        let direct = |l: f64, r: f64| {
            let b = m * m + v;
            ((b - m * r) / ((l + r) * l), 1.0 - (b + m * (l - r)) / (l * r), (b + m * l) / ((l + r) * r))
        };
        // interior of the fine side: both gaps 0.01
        let t = transition_probs(&g, &s, 1).unwrap();
        assert!(close(&t, direct(0.01, 0.01), 1e-15));
        // frozen from an exact rational evaluation of the three formulas
        assert!(close(&t, (0.231_953_125, 0.498_593_75, 0.269_453_125), 1e-15));
        // origin: left gap 0.1, right gap 0.01
        let t0 = transition_probs(&g, &s, 0).unwrap();
        assert!(close(&t0, direct(0.1, 0.01), 1e-15));
        assert!(close(&t0, (0.004_217_329_545_454_546, 0.916_109_375, 0.079_673_295_454_545_45), 1e-15));
    }

    #[test]
    fn rational_triples_are_exact() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let g = Grid::two_sided(r(1, 10), r(1, 100)).unwrap();
        let s = MomentSpec::new(r(3, 8000), r(1, 20000));
        for i in -3..=3 {
            let t = transition_probs(&g, &s, i).unwrap();
            assert_eq!(t.sum(), r(1, 1));
            let gaps = g.gaps(i);
            // one-step mean and second moment of the increment
            let mean = -gaps.left.clone() * t.left.clone() + gaps.right.clone() * t.right.clone();
            let m2 = gaps.left.clone() * gaps.left * t.left + gaps.right.clone() * gaps.right * t.right;
            assert_eq!(mean, r(3, 8000));
            assert_eq!(m2, s.second_moment());
        }
    }

    fn feasible_instance() -> impl Strategy<Value = (Grid<f64>, MomentSpec<f64>, i64)> {
        (1e-3..1.0f64, 1e-3..1.0f64, -1.0..1.0f64, 0.0..1.0f64, -50i64..50).prop_map(|(a, b, mf, vf, i)| {
            let g = Grid::two_sided(a, b).unwrap();
            let gmin = a.min(b);
            // M within the range where feasibility is possible, V a fraction of the gap product
            let m = mf * gmin * 0.5;
            let v = (vf * a * b).max(m.abs() * gmin);
            (g, MomentSpec::new(m, v), i)
        })
    }

    proptest! {
        #[test]
        fn feasible_triples_are_probabilities((g, s, i) in feasible_instance()) {
            let window = IndexRange::new(i, i).unwrap();
            prop_assume!(check_feasibility(&g, &s, window, &0.0).feasible());
            let t = transition_probs(&g, &s, i).unwrap();
            let tol = 4.0 * f64::EPSILON;
            for p in [t.left, t.stay, t.right] {
                prop_assert!((-tol..=1.0 + tol).contains(&p));
            }
            prop_assert!((t.sum() - 1.0).abs() <= 4.0 * f64::EPSILON);
            // the stay weight from its own formula agrees with the complement
            prop_assert!((t.stay - (1.0 - t.left - t.right)).abs() <= 1e-12);
        }

        #[test]
        fn feasibility_implies_nonnegative_variance(
            a in 1e-3..1.0f64, b in 1e-3..1.0f64, m in -1.0..1.0f64, v in -0.5..0.5f64, i in -5i64..5
        ) {
            let g = Grid::two_sided(a, b).unwrap();
            let s = MomentSpec::new(m, v);
            if check_feasibility(&g, &s, IndexRange::new(i, i).unwrap(), &0.0).feasible() {
                prop_assert!(v >= -0.0);
            }
        }

        #[test]
        fn uniform_closed_form_is_bit_identical(h in 1e-3..10.0f64, mf in -1.0..1.0f64, vf in 0.0..1.0f64, seed in any::<u64>()) {
            let m = mf * h * 0.5;
            let v = (vf * h * h * 0.5).max(m.abs() * h);
            let s = MomentSpec::new(m, v);
            let g = Grid::uniform(h).unwrap();
            let closed = uniform_transition_probs(h, &s);
            let mut rng = seed;
            for _ in 0..100 {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let i = (rng >> 33) as i64 - (1 << 30);
                let general = transition_probs(&g, &s, i);
                match (&closed, &general) {
                    (Ok(c), Ok(gen)) => {
                        prop_assert_eq!(c.left.to_bits(), gen.left.to_bits());
                        prop_assert_eq!(c.stay.to_bits(), gen.stay.to_bits());
                        prop_assert_eq!(c.right.to_bits(), gen.right.to_bits());
                    }
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "closed form and general path disagree on feasibility"),
                }
            }
        }
    }
}
