//! Box domains, their sampling lattices and uniform evaluation grids.

use serde::Serialize;

use crate::error::{Error, Result};

/// The box `[a_1, b_1] x ... x [a_r, b_r]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    intervals: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter(
                "domain needs at least one axis".into(),
            ));
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidParameter(format!(
                    "axis {i}: interval [{a}, {b}] must be finite with a < b"
                )));
            }
        }
        Ok(BoxDomain { intervals })
    }

    /// The cube `[a, b]^r`.
    pub fn cube(a: f64, b: f64, r: usize) -> Result<Self> {
        BoxDomain::new(vec![(a, b); r])
    }

    /// `[0, 1]^r`.
    pub fn unit(r: usize) -> Self {
        BoxDomain::cube(0.0, 1.0, r).expect("unit cube is valid")
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension()
            && point
                .iter()
                .zip(&self.intervals)
                .all(|(&y, &(a, b))| a <= y && y <= b)
    }
}

/// The lattice `J_n^r`: per axis the integers `ceil(n a_i) ..= floor(n b_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeIndexSet {
    pub n: u64,
    pub ranges: Vec<(i64, i64)>,
}

impl LatticeIndexSet {
    pub fn dimension(&self) -> usize {
        self.ranges.len()
    }

    /// Number of lattice points.
    pub fn len(&self) -> u128 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as u128)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.ranges.len()
            && k.iter()
                .zip(&self.ranges)
                .all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }
}

/// Builds the full integer box of sample indices for `n` on `domain`.
pub fn build_lattice(n: u64, domain: &BoxDomain) -> Result<LatticeIndexSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ranges = domain
        .intervals()
        .iter()
        .enumerate()
        .map(|(axis, &(a, b))| {
            let lo = (nf * a).ceil() as i64;
            let hi = (nf * b).floor() as i64;
            if lo > hi {
                Err(Error::EmptyLattice { n, axis })
            } else {
                Ok((lo, hi))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeIndexSet { n, ranges })
}

/// Uniform tensor grid including both endpoints on every axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub domain: BoxDomain,
    pub points_per_axis: Vec<usize>,
}

impl GridSpec {
    pub fn new(domain: BoxDomain, points_per_axis: Vec<usize>) -> Result<Self> {
        if points_per_axis.len() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                got: points_per_axis.len(),
            });
        }
        if let Some(&m) = points_per_axis.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points per axis, got {m}"
            )));
        }
        Ok(GridSpec {
            domain,
            points_per_axis,
        })
    }

    /// Same number of points on every axis.
    pub fn uniform(domain: BoxDomain, points: usize) -> Result<Self> {
        let r = domain.dimension();
        GridSpec::new(domain, vec![points; r])
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of grid line `index` on `axis`; the last line is exactly `b`.
    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        let (a, b) = self.domain.intervals()[axis];
        let m = self.points_per_axis[axis];
        if index + 1 == m {
            b
        } else {
            a + (b - a) * index as f64 / (m - 1) as f64
        }
    }

    /// Grid spacing on `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        let (a, b) = self.domain.intervals()[axis];
        (b - a) / (self.points_per_axis[axis] - 1) as f64
    }

    /// The `flat`-th point in row-major order (last axis fastest).
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut point = vec![0.0; self.dimension()];
        let mut rest = flat;
        for axis in (0..self.dimension()).rev() {
            let m = self.points_per_axis[axis];
            point[axis] = self.coordinate(axis, rest % m);
            rest /= m;
        }
        point
    }

    /// All grid points in row-major order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}
