//! Points, box domains, metrics and deterministic sampling.
//!
//! Every domain is a closed box in ℝᵈ and therefore complete; any
//! completeness hypothesis on an image set reduces to the inclusion checks in
//! [`crate::contraction`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for treating two floating-point points as equal.
pub const DEFAULT_EQ_TOL: f64 = 1e-9;

/// A point of a box domain. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDomain("a point needs at least one coordinate".into()));
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Point(coords))
    }

    /// A one-dimensional point. Panics on a non-finite value.
    pub fn scalar(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite coordinate {x}");
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// First coordinate; the whole point for one-dimensional domains.
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// Coordinates joined by `;`, as used in trace CSV files.
    pub fn joined(&self) -> String {
        self.0
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if *c != 0.0 && (c.abs() < 1e-4 || c.abs() >= 1e16) {
                write!(f, "{c:e}")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        write!(f, ")")
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// A nonempty closed box in ℝᵈ.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Domain {
    bounds: Vec<Interval>,
}

impl Domain {
    pub fn new(bounds: Vec<Interval>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        for (i, b) in bounds.iter().enumerate() {
            if !b.lo.is_finite() || !b.hi.is_finite() {
                return Err(Error::InvalidDomain(format!("axis {i} has a non-finite bound")));
            }
            if b.lo > b.hi {
                return Err(Error::InvalidDomain(format!(
                    "axis {i} is empty: lo {} > hi {}",
                    b.lo, b.hi
                )));
            }
        }
        Ok(Domain { bounds })
    }

    /// The interval `[lo, hi]` as a one-dimensional domain.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Domain::new(vec![Interval { lo, hi }])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(&self.bounds)
                .all(|(c, b)| *c >= b.lo && *c <= b.hi)
    }

    /// Membership allowing each coordinate to overshoot a bound by `tol`.
    pub fn contains_within(&self, p: &Point, tol: f64) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(&self.bounds)
                .all(|(c, b)| *c >= b.lo - tol && *c <= b.hi + tol)
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point(
            p.coords()
                .iter()
                .zip(&self.bounds)
                .map(|(c, b)| c.clamp(b.lo, b.hi))
                .collect(),
        )
    }

    pub fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: p.dim(),
            });
        }
        Ok(())
    }

    /// Lower corner of the box.
    pub fn lower(&self) -> Point {
        Point(self.bounds.iter().map(|b| b.lo).collect())
    }

    pub fn upper(&self) -> Point {
        Point(self.bounds.iter().map(|b| b.hi).collect())
    }

    pub fn is_singleton(&self) -> bool {
        self.bounds.iter().all(|b| b.lo == b.hi)
    }

    /// Largest distance between two points of the box under `metric`.
    pub fn diameter(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Discrete => {
                if self.is_singleton() {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Euclidean | Metric::AbsoluteDifference => self
                .bounds
                .iter()
                .map(|b| (b.hi - b.lo).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bounds = Vec::<Interval>::deserialize(d)?;
        Domain::new(bounds).map_err(serde::de::Error::custom)
    }
}

/// The built-in metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `|p - q|`; the one-dimensional reading of the euclidean metric.
    AbsoluteDifference,
    Discrete,
}

impl Metric {
    pub fn distance(self, p: &Point, q: &Point) -> Result<f64> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                left: p.dim(),
                right: q.dim(),
            });
        }
        Ok(self.distance_unchecked(p.coords(), q.coords()))
    }

    /// Distance between coordinate slices of equal length.
    pub fn distance_unchecked(self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        match self {
            Metric::Euclidean | Metric::AbsoluteDifference => {
                if p.len() == 1 {
                    (p[0] - q[0]).abs()
                } else {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                }
            }
            Metric::Discrete => {
                if p == q {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// How a [`SampleSet`] is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `n` evenly spaced values per axis, endpoints included.
    Grid(usize),
    SeededUniform { count: usize, seed: u64 },
}

/// An ordered list of domain points together with the generator that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub generator: Generator,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }
}

/// Evenly spaced values on `[lo, hi]`, both ends included exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (lo + i as f64 * step).min(hi)
            }
        })
        .collect()
}

/// Deterministically sample `domain`.
///
/// Grids enumerate points in lexicographic order (first axis outermost).
pub fn sample(domain: &Domain, generator: Generator) -> Result<SampleSet> {
    let points = match generator {
        Generator::Grid(n) => {
            if n < 2 {
                return Err(Error::InvalidSampling(format!(
                    "grid needs at least 2 points per axis, got {n}"
                )));
            }
            let axes: Vec<Vec<f64>> = domain
                .bounds()
                .iter()
                .map(|b| linspace(b.lo, b.hi, n))
                .collect();
            let total = n
                .checked_pow(domain.dim() as u32)
                .ok_or_else(|| Error::InvalidSampling("grid too large".into()))?;
            let mut points = Vec::with_capacity(total);
            for mut k in 0..total {
                let mut coords = vec![0.0; domain.dim()];
                for axis in (0..domain.dim()).rev() {
                    coords[axis] = axes[axis][k % n];
                    k /= n;
                }
                points.push(Point(coords));
            }
            points
        }
        Generator::SeededUniform { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidSampling("sample count must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| uniform_point(domain, &mut rng)).collect()
        }
    };
    Ok(SampleSet { points, generator })
}

/// One uniformly distributed point of `domain`, clamped at the bounds.
pub fn uniform_point<R: Rng>(domain: &Domain, rng: &mut R) -> Point {
    Point(
        domain
            .bounds()
            .iter()
            .map(|b| {
                let u: f64 = rng.gen();
                (b.lo + (b.hi - b.lo) * u).clamp(b.lo, b.hi)
            })
            .collect(),
    )
}

/// Worst violations of the metric axioms found on a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAudit {
    pub points: usize,
    pub tol: f64,
    /// max `|d(p, p)|`
    pub identity: f64,
    /// max `|d(p, q) - d(q, p)|`
    pub symmetry: f64,
    /// max `d(p, q) - d(p, r) - d(r, q)`, floored at 0
    pub triangle: f64,
    /// max `-d(p, q)`, floored at 0
    pub negativity: f64,
    pub symmetry_witness: Option<(Point, Point)>,
    pub triangle_witness: Option<(Point, Point, Point)>,
    pub passed: bool,
}

/// Audit one of the built-in metrics.
pub fn audit_metric(metric: Metric, samples: &SampleSet, tol: f64) -> Result<MetricAudit> {
    audit_distance(|p, q| metric.distance_unchecked(p.coords(), q.coords()), samples, tol)
}

/// Audit an arbitrary distance-like function over all sampled pairs and
/// triples.
pub fn audit_distance<F>(d: F, samples: &SampleSet, tol: f64) -> Result<MetricAudit>
where
    F: Fn(&Point, &Point) -> f64,
{
    let pts = &samples.points;
    if pts.len() < 3 {
        return Err(Error::InvalidSampling(format!(
            "metric audit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    let n = pts.len();
    let table: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| pts.iter().map(|q| d(p, q)).collect())
        .collect();

    let mut identity = 0.0_f64;
    let mut symmetry = 0.0_f64;
    let mut negativity = 0.0_f64;
    let mut triangle = 0.0_f64;
    let mut symmetry_witness = None;
    let mut triangle_witness = None;

    for i in 0..n {
        identity = identity.max(table[i][i].abs());
        for j in 0..n {
            negativity = negativity.max(-table[i][j]);
            let asym = (table[i][j] - table[j][i]).abs();
            if asym > symmetry {
                symmetry = asym;
                symmetry_witness = Some((pts[i].clone(), pts[j].clone()));
            }
            for k in 0..n {
                let excess = table[i][j] - table[i][k] - table[k][j];
                if excess > triangle {
                    triangle = excess;
                    triangle_witness = Some((pts[i].clone(), pts[j].clone(), pts[k].clone()));
                }
            }
        }
    }
    let passed = identity <= tol && symmetry <= tol && triangle <= tol && negativity <= tol;
    Ok(MetricAudit {
        points: n,
        tol,
        identity,
        symmetry,
        triangle,
        negativity,
        symmetry_witness,
        triangle_witness,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn euclidean_distances() {
        let m = Metric::Euclidean;
        assert_eq!(m.distance(&Point::scalar(0.0), &Point::scalar(1.0)).unwrap(), 1.0);
        let p = Point::new(vec![3.0, 4.0]).unwrap();
        let q = Point::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(m.distance(&p, &q).unwrap(), 5.0);
        assert_eq!(
            Metric::Discrete
                .distance(&Point::scalar(2.0), &Point::scalar(2.0))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn dimension_mismatch_names_both() {
        let err = Metric::Euclidean
            .distance(&Point::scalar(0.0), &Point::new(vec![0.0, 1.0]).unwrap())
            .unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 1, right: 2 });
    }

    #[test]
    fn points_reject_non_finite() {
        assert!(matches!(
            Point::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn domain_rejects_empty_interval() {
        assert!(Domain::interval(1.0, 0.0).is_err());
        assert!(Domain::interval(0.5, 0.5).is_ok());
    }

    #[test]
    fn grid_endpoints_and_midpoint() {
        let s = sample(&unit(), Generator::Grid(3)).unwrap();
        let xs: Vec<f64> = s.iter().map(Point::x).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_square_corners() {
        let d = Domain::new(vec![Interval { lo: 0.0, hi: 1.0 }; 2]).unwrap();
        let s = sample(&d, Generator::Grid(2)).unwrap();
        let coords: Vec<Vec<f64>> = s.points.into_iter().map(Point::into_coords).collect();
        assert_eq!(
            coords,
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn grid_hits_exact_breakpoints() {
        let d = Domain::interval(0.0, 1.2).unwrap();
        let s = sample(&d, Generator::Grid(1201)).unwrap();
        assert_eq!(s.points[375].x(), 0.375);
        assert_eq!(s.points[500].x(), 0.5);
        assert_eq!(s.points[1000].x(), 1.0);
        assert_eq!(s.points[1200].x(), 1.2);
    }

    #[test]
    fn seeded_uniform_is_deterministic() {
        let g = Generator::SeededUniform { count: 5, seed: 42 };
        let a = sample(&unit(), g).unwrap();
        let b = sample(&unit(), g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|p| unit().contains(p)));
    }

    #[test]
    fn degenerate_requests_are_errors() {
        assert!(sample(&unit(), Generator::SeededUniform { count: 0, seed: 1 }).is_err());
        assert!(sample(&unit(), Generator::Grid(1)).is_err());
    }

    #[test]
    fn euclidean_audit_passes() {
        let s = sample(&unit(), Generator::Grid(5)).unwrap();
        let audit = audit_metric(Metric::Euclidean, &s, 1e-12).unwrap();
        assert!(audit.passed);
    }

    #[test]
    fn discrete_audit_passes() {
        let s = sample(&unit(), Generator::SeededUniform { count: 7, seed: 3 }).unwrap();
        assert!(audit_metric(Metric::Discrete, &s, 0.0).unwrap().passed);
    }

    #[test]
    fn signed_difference_fails_symmetry() {
        let s = sample(&unit(), Generator::Grid(5)).unwrap();
        let audit = audit_distance(|p, q| p.x() - q.x(), &s, 1e-12).unwrap();
        assert!(!audit.passed);
        // d(0,1) = -1 and d(1,0) = 1
        assert_eq!(audit.symmetry, 2.0);
        assert!(audit.symmetry_witness.is_some());
    }

    #[test]
    fn diameter() {
        let d = Domain::new(vec![Interval { lo: 0.0, hi: 3.0 }, Interval { lo: 0.0, hi: 4.0 }]).unwrap();
        assert_eq!(d.diameter(Metric::Euclidean), 5.0);
        assert_eq!(d.diameter(Metric::Discrete), 1.0);
    }
}
