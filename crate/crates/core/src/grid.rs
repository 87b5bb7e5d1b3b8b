//! Nonuniform one-dimensional grids.
//!
//! A grid is a strictly increasing map from `i64` indices to coordinates with
//! `point(0) == 0`. Grids are evaluated lazily so chains on the full integer
//! lattice never need to be truncated.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed interval of grid indices `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

impl IndexRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::param("index_range", format!("empty range [{lo}, {hi}]")));
        }
        Ok(IndexRange { lo, hi })
    }

    /// `[-radius, radius]`.
    pub fn symmetric(radius: u64) -> Self {
        let r = i64::try_from(radius).expect("radius fits in i64");
        IndexRange { lo: -r, hi: r }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// Distances to the neighbouring grid points of an index.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaps<T> {
    /// `x_i - x_{i-1}`
    pub left: T,
    /// `x_{i+1} - x_i`
    pub right: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridKind<T> {
    Uniform {
        h: T,
    },
    /// Slope `slope_pos` for `i >= 0`, `slope_neg` for `i < 0`.
    TwoSided {
        slope_neg: T,
        slope_pos: T,
    },
    /// Table of points with uniform extension beyond both ends.
    Explicit {
        points: Vec<T>,
        /// Position of `0` in `points`.
        origin: usize,
        h_left: T,
        h_right: T,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    kind: GridKind<T>,
}

fn positive<T: Scalar>(name: &'static str, v: &T) -> Result<()> {
    if *v > T::zero() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

impl<T: Scalar> Grid<T> {
    pub fn uniform(h: T) -> Result<Self> {
        positive("h", &h)?;
        Ok(Grid { kind: GridKind::Uniform { h } })
    }

    pub fn two_sided(slope_neg: T, slope_pos: T) -> Result<Self> {
        positive("slope_neg", &slope_neg)?;
        positive("slope_pos", &slope_pos)?;
        Ok(Grid { kind: GridKind::TwoSided { slope_neg, slope_pos } })
    }

    /// Builds a grid from a strictly increasing table that contains `0`
    /// exactly once, extended with spacing `h_left` below the first point and
    /// `h_right` above the last.
    pub fn explicit(points: Vec<T>, h_left: T, h_right: T) -> Result<Self> {
        positive("h_left", &h_left)?;
        positive("h_right", &h_right)?;
        if let Some(w) = points.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        let origin = points
            .iter()
            .position(|p| p.is_zero())
            .ok_or_else(|| Error::InvalidGrid("points must contain 0".into()))?;
        Ok(Grid { kind: GridKind::Explicit { points, origin, h_left, h_right } })
    }

    pub fn kind(&self) -> &GridKind<T> {
        &self.kind
    }

    /// Coordinate `x_i`.
    pub fn point(&self, i: i64) -> T {
        match &self.kind {
            GridKind::Uniform { h } => h.clone() * T::from_i64_exact(i),
            GridKind::TwoSided { slope_neg, slope_pos } => {
                let slope = if i >= 0 { slope_pos } else { slope_neg };
                slope.clone() * T::from_i64_exact(i)
            }
            GridKind::Explicit { points, origin, h_left, h_right } => {
                let pos = *origin as i64 + i;
                let last = points.len() as i64 - 1;
                if pos < 0 {
                    points[0].clone() + h_left.clone() * T::from_i64_exact(pos)
                } else if pos > last {
                    points[last as usize].clone() + h_right.clone() * T::from_i64_exact(pos - last)
                } else {
                    points[pos as usize].clone()
                }
            }
        }
    }

    /// `x_{i+1} - x_i`. Constant-spacing regions return their spacing
    /// parameter directly rather than a rounded coordinate difference.
    pub fn right_gap(&self, i: i64) -> T {
        match &self.kind {
            GridKind::Uniform { h } => h.clone(),
            GridKind::TwoSided { slope_neg, slope_pos } => {
                if i >= 0 {
                    slope_pos.clone()
                } else {
                    slope_neg.clone()
                }
            }
            GridKind::Explicit { points, origin, h_left, h_right } => {
                let pos = *origin as i64 + i;
                let last = points.len() as i64 - 1;
                if pos < 0 {
                    h_left.clone()
                } else if pos >= last {
                    h_right.clone()
                } else {
                    points[pos as usize + 1].clone() - points[pos as usize].clone()
                }
            }
        }
    }

    pub fn gaps(&self, i: i64) -> Gaps<T> {
        Gaps { left: self.right_gap(i - 1), right: self.right_gap(i) }
    }

    /// A window of indices containing every distinct `(left, right)` gap pair
    /// of the grid. Any per-index condition that depends only on the gaps and
    /// holds on this window holds on all of `Z`.
    pub fn certifying_window(&self) -> IndexRange {
        match &self.kind {
            GridKind::Uniform { .. } => IndexRange { lo: 0, hi: 0 },
            GridKind::TwoSided { .. } => IndexRange { lo: -1, hi: 1 },
            GridKind::Explicit { points, origin, .. } => {
                let lo = -(*origin as i64);
                let hi = points.len() as i64 - 1 + lo;
                IndexRange { lo: lo - 1, hi: hi + 1 }
            }
        }
    }
}
