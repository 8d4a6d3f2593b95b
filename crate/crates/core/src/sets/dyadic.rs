//! Maximal dyadic cube decompositions of open sets.
//!
//! A level-`k` cube is `prod_a [m_a 2^-k, (m_a + 1) 2^-k]` with integer corner
//! `m`. Two dyadic cubes are either nested or have disjoint interiors, which
//! makes the disjointness check pure integer arithmetic.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::boxes::OpenBox;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: u32,
    pub corner: Vec<i64>,
}

impl DyadicCube {
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn lo(&self) -> Vec<f64> {
        let s = self.side();
        self.corner.iter().map(|&m| m as f64 * s).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        let s = self.side();
        self.corner.iter().map(|&m| (m + 1) as f64 * s).collect()
    }

    /// Exact volume `2^(-level * n)`.
    pub fn volume(&self) -> BigRational {
        let n = self.corner.len() as u32;
        BigRational::new(BigInt::from(1), BigInt::from(2).pow(self.level * n))
    }

    /// Corner of the ancestor at a coarser `level`.
    pub fn ancestor_corner(&self, level: u32) -> Vec<i64> {
        debug_assert!(level <= self.level);
        let shift = self.level - level;
        self.corner.iter().map(|&m| m >> shift).collect()
    }

    pub fn interiors_overlap(&self, other: &DyadicCube) -> bool {
        let (coarse, fine) = if self.level <= other.level {
            (self, other)
        } else {
            (other, self)
        };
        fine.ancestor_corner(coarse.level) == coarse.corner
    }

    fn children(&self) -> Vec<DyadicCube> {
        let n = self.corner.len();
        (0..(1usize << n))
            .map(|bits| DyadicCube {
                level: self.level + 1,
                corner: self
                    .corner
                    .iter()
                    .enumerate()
                    .map(|(a, &m)| 2 * m + ((bits >> a) & 1) as i64)
                    .collect(),
            })
            .collect()
    }
}

/// An open set that can be decomposed.
pub trait Domain {
    fn bounding_box(&self) -> Option<&OpenBox>;

    /// Whether the closed cube `[lo, hi]` lies inside the open set.
    fn contains_closed_cube(&self, lo: &[f64], hi: &[f64]) -> bool;
}

impl Domain for OpenBox {
    fn bounding_box(&self) -> Option<&OpenBox> {
        Some(self)
    }

    fn contains_closed_cube(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.intervals()
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(&(a, b), (&l, &h))| a < l && h < b)
    }
}

/// Open set given by a point indicator inside a bounding box. A cube counts as
/// contained when the indicator holds at all its corners and at its centre.
pub struct IndicatorDomain<F> {
    bounds: Option<OpenBox>,
    indicator: F,
}

impl<F: Fn(&[f64]) -> bool> IndicatorDomain<F> {
    pub fn new(bounds: OpenBox, indicator: F) -> Self {
        Self {
            bounds: Some(bounds),
            indicator,
        }
    }
}

impl IndicatorDomain<fn(&[f64]) -> bool> {
    pub fn empty() -> Self {
        Self {
            bounds: None,
            indicator: |_| false,
        }
    }
}

impl<F: Fn(&[f64]) -> bool> Domain for IndicatorDomain<F> {
    fn bounding_box(&self) -> Option<&OpenBox> {
        self.bounds.as_ref()
    }

    fn contains_closed_cube(&self, lo: &[f64], hi: &[f64]) -> bool {
        let n = lo.len();
        let centre: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if !(self.indicator)(&centre) {
            return false;
        }
        (0..(1usize << n)).all(|bits| {
            let corner: Vec<f64> = (0..n)
                .map(|a| if (bits >> a) & 1 == 1 { hi[a] } else { lo[a] })
                .collect();
            (self.indicator)(&corner)
        })
    }
}

/// Maximal dyadic cubes (levels `0..=max_level`) inside a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeDecomposition {
    pub dim: usize,
    pub cubes: Vec<DyadicCube>,
}

impl CubeDecomposition {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Exact measure of the union.
    pub fn measure(&self) -> BigRational {
        self.cubes
            .iter()
            .fold(BigRational::zero(), |acc, c| acc + c.volume())
    }

    /// Pairwise check of interior disjointness (quadratic; for tests and reports).
    pub fn interiors_disjoint(&self) -> bool {
        self.cubes.iter().enumerate().all(|(i, a)| {
            self.cubes[i + 1..].iter().all(|b| !a.interiors_overlap(b))
        })
    }

    /// CSV with header `level,m1,...,mn`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for a in 1..=self.dim {
            let _ = write!(out, ",m{a}");
        }
        out.push('\n');
        for c in &self.cubes {
            let _ = write!(out, "{}", c.level);
            for m in &c.corner {
                let _ = write!(out, ",{m}");
            }
            out.push('\n');
        }
        out
    }
}

/// Maximal dyadic cubes of level at most `max_level` whose closed hull lies in
/// the domain, ordered by level then corner.
pub fn dyadic_decompose<D: Domain + ?Sized>(domain: &D, max_level: u32) -> CubeDecomposition {
    let Some(bounds) = domain.bounding_box() else {
        return CubeDecomposition {
            dim: 0,
            cubes: Vec::new(),
        };
    };
    let dim = bounds.dim();
    let ranges: Vec<(i64, i64)> = bounds
        .intervals()
        .iter()
        .map(|&(lo, hi)| (lo.floor() as i64, hi.ceil() as i64))
        .collect();

    let mut stack: Vec<DyadicCube> = Vec::new();
    let mut corner = ranges.iter().map(|r| r.0).collect::<Vec<_>>();
    'outer: loop {
        stack.push(DyadicCube {
            level: 0,
            corner: corner.clone(),
        });
        for a in 0..dim {
            corner[a] += 1;
            if corner[a] < ranges[a].1 {
                continue 'outer;
            }
            corner[a] = ranges[a].0;
        }
        break;
    }

    let mut cubes = Vec::new();
    while let Some(cube) = stack.pop() {
        let (lo, hi) = (cube.lo(), cube.hi());
        let overlaps = bounds
            .intervals()
            .iter()
            .zip(lo.iter().zip(&hi))
            .all(|(&(a, b), (&l, &h))| l < b && h > a);
        if !overlaps {
            continue;
        }
        if domain.contains_closed_cube(&lo, &hi) {
            cubes.push(cube);
        } else if cube.level < max_level {
            stack.extend(cube.children());
        }
    }
    cubes.sort();
    CubeDecomposition { dim, cubes }
}
