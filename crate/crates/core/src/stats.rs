//! Empirical laws, the normal law, Wasserstein-1 distances and histograms.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sorted sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution<T> {
    samples: Vec<T>,
}

impl<T: Real> EmpiricalDistribution<T> {
    pub fn new(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("samples", "at least one sample is required"));
        }
        if samples.iter().any(|s| s.is_nan()) {
            return Err(Error::param("samples", "NaN sample"));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        Ok(EmpiricalDistribution { samples })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> T {
        pairwise_sum(&self.samples) / T::from_usize(self.len()).unwrap()
    }

    /// Unbiased sample variance (zero for a single sample).
    pub fn variance(&self) -> T {
        let n = self.len();
        if n < 2 {
            return T::zero();
        }
        let mean = self.mean();
        let sq: Vec<T> = self.samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
        pairwise_sum(&sq) / T::from_usize(n - 1).unwrap()
    }

    /// Left-continuous inverse CDF: the `ceil(qN)`-th order statistic.
    pub fn quantile(&self, q: T) -> Result<T> {
        check_open_unit(q)?;
        Ok(self.quantile_unchecked(q))
    }

    fn quantile_unchecked(&self, q: T) -> T {
        let n = self.len();
        let rank = (q * T::from_usize(n).unwrap()).ceil().to_usize().unwrap_or(n);
        self.samples[rank.clamp(1, n) - 1]
    }

    pub fn shifted(&self, c: T) -> Self {
        EmpiricalDistribution { samples: self.samples.iter().map(|&x| x + c).collect() }
    }
}

fn check_open_unit<T: Real>(q: T) -> Result<()> {
    if q > T::zero() && q < T::one() {
        Ok(())
    } else {
        Err(Error::param("q", format!("quantile level must lie in (0, 1), got {q}")))
    }
}

/// Normal law by mean and variance; variance zero is the point mass at the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLaw<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Real> NormalLaw<T> {
    pub fn new(mean: T, variance: T) -> Result<Self> {
        if !(variance >= T::zero()) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::param("variance", format!("must be finite and nonnegative, got {variance}")));
        }
        Ok(NormalLaw { mean, variance })
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }

    pub fn quantile(&self, q: T) -> Result<T> {
        check_open_unit(q)?;
        Ok(self.quantile_unchecked(q))
    }

    fn quantile_unchecked(&self, q: T) -> T {
        if self.variance.is_zero() {
            self.mean
        } else {
            self.mean + self.std_dev() * standard_normal_quantile(q)
        }
    }

    pub fn pdf(&self, x: T) -> T {
        let sd = self.std_dev();
        let z = (x - self.mean) / sd;
        (-(z * z) / lit(2.0)).exp() / (sd * lit::<T>(2.0 * PI).sqrt())
    }

    pub fn cdf(&self, x: T) -> T {
        standard_normal_cdf((x - self.mean) / self.std_dev())
    }

    /// `P(a < X <= b)`, evaluated on whichever tail keeps the difference accurate.
    pub fn interval_mass(&self, a: T, b: T) -> T {
        let sd = self.std_dev();
        let za = (a - self.mean) / sd;
        let zb = (b - self.mean) / sd;
        let s2 = lit::<T>(SQRT_2);
        let half = lit::<T>(0.5);
        if za >= T::zero() {
            half * ((za / s2).erfc() - (zb / s2).erfc())
        } else if zb <= T::zero() {
            half * ((-zb / s2).erfc() - (-za / s2).erfc())
        } else {
            T::one() - half * (zb / s2).erfc() - half * (-za / s2).erfc()
        }
    }
}

fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).unwrap()
}

pub fn standard_normal_cdf<T: Real>(z: T) -> T {
    lit::<T>(0.5) * (-z / lit(SQRT_2)).erfc()
}

// Acklam's rational approximation to the standard normal quantile
// (relative error below 1.15e-9 before refinement).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
const P_LOW: f64 = 0.024_25;

fn acklam_lower(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Standard normal quantile for `p` in `(0, 0.5]`: rational approximation plus
/// one Halley step against the `erfc`-based CDF. Lower-tail form keeps the
/// residual relative to `p`.
fn quantile_lower_tail(p: f64) -> f64 {
    let x = acklam_lower(p);
    let e = 0.5 * libm::erfc(-x / SQRT_2) - p;
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Standard normal inverse CDF on `(0, 1)`. Upper levels use `1 - q`, which
/// is exact for `q >= 0.5`.
pub fn standard_normal_quantile<T: Real>(q: T) -> T {
    let q = q.to_f64().unwrap();
    let z = if q <= 0.5 { quantile_lower_tail(q) } else { -quantile_lower_tail(1.0 - q) };
    lit(z)
}

/// `Σ` by recursive halving; fixed order, so results do not depend on how
/// callers split work.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        xs.iter().fold(T::zero(), |a, &b| a + b)
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

pub const DEFAULT_NODES: usize = 4096;

/// `∫₀¹ |F⁻¹(q) − G⁻¹(q)| dq` between the empirical law and a normal law, by
/// the midpoint rule on `q_j = (j − ½)/nodes`.
pub fn wasserstein1<T: Real>(dist: &EmpiricalDistribution<T>, law: &NormalLaw<T>, nodes: usize) -> Result<T> {
    if nodes < 2 {
        return Err(Error::param("nodes", format!("need at least 2 integration nodes, got {nodes}")));
    }
    let n = T::from_usize(nodes).unwrap();
    let half = lit::<T>(0.5);
    let integrand: Vec<T> = (1..=nodes)
        .map(|j| {
            let q = (T::from_usize(j).unwrap() - half) / n;
            (dist.quantile_unchecked(q) - law.quantile_unchecked(q)).abs()
        })
        .collect();
    Ok(pairwise_sum(&integrand) / n)
}

/// Exact W1 between two equal-size empirical laws: mean gap of sorted samples.
pub fn wasserstein1_empirical<T: Real>(a: &EmpiricalDistribution<T>, b: &EmpiricalDistribution<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    let gaps: Vec<T> = a.samples.iter().zip(&b.samples).map(|(&x, &y)| (x - y).abs()).collect();
    Ok(pairwise_sum(&gaps) / T::from_usize(a.len()).unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
    /// `count / (N · width)`, with `N` the full sample count.
    pub density: Vec<T>,
}

/// Bins are `[e_j, e_{j+1})`; the last bin also includes its right edge.
pub fn histogram<T: Real>(dist: &EmpiricalDistribution<T>, edges: &[T]) -> Result<Histogram<T>> {
    if edges.len() < 2 {
        return Err(Error::param("bin_edges", "need at least two edges"));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("bin_edges", "edges must be strictly increasing"));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let last = edges[bins];
    for &x in &dist.samples {
        if x < edges[0] || x > last {
            continue;
        }
        let bin = if x == last { bins - 1 } else { edges.partition_point(|&e| e <= x) - 1 };
        counts[bin] += 1;
    }
    let total = T::from_usize(dist.len()).unwrap();
    let density =
        counts.iter().zip(edges.windows(2)).map(|(&c, w)| T::from_u64(c).unwrap() / (total * (w[1] - w[0]))).collect();
    Ok(Histogram { edges: edges.to_vec(), counts, density })
}

/// `count + 1` equally spaced edges over `[lo, hi]`.
pub fn uniform_edges<T: Real>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if count == 0 || !(lo < hi) {
        return Err(Error::param("bins", "need count >= 1 and lo < hi"));
    }
    let width = (hi - lo) / T::from_usize(count).unwrap();
    Ok((0..=count).map(|j| if j == count { hi } else { lo + width * T::from_usize(j).unwrap() }).collect())
}
