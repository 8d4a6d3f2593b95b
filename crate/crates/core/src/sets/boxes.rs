use crate::error::{domain, precondition, Result};

/// An open box `(lo_1, hi_1) x ... x (lo_n, hi_n)` in R^n.
///
/// Only the finite endpoints are stored; every construction in this crate is
/// local, so unbounded factors are clipped to a finite sub-box by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenBox {
    intervals: Vec<(f64, f64)>,
}

impl OpenBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(precondition("a box needs at least one coordinate interval"));
        }
        for (axis, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(precondition(format!(
                    "interval {axis} = ({lo}, {hi}) must be finite with lo < hi"
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// The cube `(lo, hi)^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); n])
    }

    pub fn unit(n: usize) -> Self {
        Self::cube(n, 0.0, 1.0).expect("unit cube is valid")
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn interval(&self, axis: usize) -> (f64, f64) {
        self.intervals[axis]
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.intervals[axis].0
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.intervals[axis].1
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.intervals[axis].1 - self.intervals[axis].0
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.intervals.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Strict membership; the box is open.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .intervals
                .iter()
                .zip(x)
                .all(|(&(lo, hi), &xi)| lo < xi && xi < hi)
    }

    /// `other` is a sub-box of `self` (endpoints may coincide).
    pub fn contains_box(&self, other: &OpenBox) -> bool {
        other.dim() == self.dim()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(&(lo, hi), &(olo, ohi))| lo <= olo && ohi <= hi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(domain(format!("point {x:?} is not inside the box {:?}", self.intervals)))
        }
    }
}

/// A tensor grid of cell centres over an [`OpenBox`].
///
/// Node `i` on axis `a` sits at `lo + (i + 1/2) h_a` with `h_a = width / res_a`,
/// so every node is strictly inside the box. Flat node indices run with axis 0
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    bounds: OpenBox,
    resolution: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(bounds: OpenBox, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != bounds.dim() {
            return Err(precondition(format!(
                "grid resolution has {} axes but the box has {}",
                resolution.len(),
                bounds.dim()
            )));
        }
        if resolution.contains(&0) {
            return Err(precondition("grid resolution must be positive on every axis"));
        }
        let mut strides = Vec::with_capacity(resolution.len());
        let mut acc = 1usize;
        for &r in &resolution {
            strides.push(acc);
            acc *= r;
        }
        Ok(Self {
            bounds,
            resolution,
            strides,
        })
    }

    pub fn uniform(bounds: OpenBox, res: usize) -> Result<Self> {
        let n = bounds.dim();
        Self::new(bounds, vec![res; n])
    }

    pub fn bounds(&self) -> &OpenBox {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.bounds.width(axis) / self.resolution[axis] as f64
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.bounds.lo(axis) + (i as f64 + 0.5) * self.spacing(axis)
    }

    /// All node coordinates along one axis.
    pub fn axis_coordinates(&self, axis: usize) -> Vec<f64> {
        (0..self.resolution[axis]).map(|i| self.coordinate(axis, i)).collect()
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        self.resolution
            .iter()
            .zip(&self.strides)
            .map(|(&r, &s)| (node / s) % r)
            .collect()
    }

    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.resolution[axis]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.coordinate(a, self.index_along(node, a)))
            .collect()
    }

    /// Half-open cell `[lo, hi)` per axis around a node.
    pub fn cell(&self, node: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let i = self.index_along(node, a) as f64;
            let h = self.spacing(a);
            lo.push(self.bounds.lo(a) + i * h);
            hi.push(self.bounds.lo(a) + (i + 1.0) * h);
        }
        (lo, hi)
    }

    /// Neighbour `offset` steps along `axis`, if it exists.
    pub fn neighbor(&self, node: usize, axis: usize, offset: isize) -> Option<usize> {
        let i = self.index_along(node, axis) as isize + offset;
        if i < 0 || i >= self.resolution[axis] as isize {
            None
        } else {
            Some((node as isize + offset * self.strides[axis] as isize) as usize)
        }
    }

    /// Index of the node whose cell contains coordinate `x` on `axis`, clamped.
    pub fn locate(&self, axis: usize, x: f64) -> usize {
        let t = ((x - self.bounds.lo(axis)) / self.spacing(axis)).floor();
        t.clamp(0.0, (self.resolution[axis] - 1) as f64) as usize
    }
}
