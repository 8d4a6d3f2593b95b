//! Parameter-dependent fundamental solutions `X(t, y)` of `D_t X = A(t, y) X`
//! with `X(t_0, y) = I`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{precondition, Error, Result};
use crate::numfmt::num;
use crate::ode::{rk4_linear, simpson, substeps};

/// Tensor grid of parameter values; zero axes means a single empty parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    axes: Vec<Vec<f64>>,
}

impl ParamGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.iter().any(|a| a.is_empty()) {
            return Err(precondition("every parameter axis needs at least one node"));
        }
        Ok(Self { axes })
    }

    /// The grid with one node and no coordinates.
    pub fn none() -> Self {
        Self { axes: Vec::new() }
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis indices of node `k`, axis 0 fastest.
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = k % a.len();
                k /= a.len();
                i
            })
            .collect()
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .into_iter()
            .zip(&self.axes)
            .map(|(i, a)| a[i])
            .collect()
    }

    fn stride(&self, axis: usize) -> usize {
        self.axes[..axis].iter().map(Vec::len).product()
    }
}

/// `X(t, y)` on a time grid containing `t0`, for every node of a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolution {
    t0: f64,
    t0_index: usize,
    times: Vec<f64>,
    params: ParamGrid,
    rank: usize,
    step: f64,
    /// Row-major over (parameter node, time node).
    matrices: Vec<DMatrix<f64>>,
}

impl FundamentalSolution {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t0_index(&self) -> usize {
        self.t0_index
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn params(&self) -> &ParamGrid {
        &self.params
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `X(times[ti], params.point(pk))`.
    pub fn at(&self, ti: usize, pk: usize) -> &DMatrix<f64> {
        &self.matrices[pk * self.times.len() + ti]
    }

    /// Index of `t` in the time grid, if it is a node.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }

    /// Rows `time, y_1..y_p, X_11, X_12, ..` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for a in 1..=self.params.dim() {
            let _ = write!(out, ",y{a}");
        }
        for i in 1..=self.rank {
            for j in 1..=self.rank {
                let _ = write!(out, ",X{i}{j}");
            }
        }
        out.push('\n');
        for pk in 0..self.params.len() {
            let y = self.params.point(pk);
            for (ti, &t) in self.times.iter().enumerate() {
                out.push_str(&num(t));
                for v in &y {
                    let _ = write!(out, ",{}", num(*v));
                }
                let x = self.at(ti, pk);
                for i in 0..self.rank {
                    for j in 0..self.rank {
                        let _ = write!(out, ",{}", num(x[(i, j)]));
                    }
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Integrates `X' = A(t, y) X`, `X(t0, y) = I`, in both time directions.
///
/// `times` is sorted and `t0` inserted if missing. Consecutive time nodes are
/// joined by uniform RK4 steps no longer than `step`.
pub fn fundamental_matrix<A>(a: A, t0: f64, times: &[f64], params: ParamGrid, rank: usize, step: f64) -> Result<FundamentalSolution>
where
    A: Fn(f64, &[f64]) -> Result<DMatrix<f64>> + Sync,
{
    if !(step > 0.0) {
        return Err(precondition("integration step must be positive"));
    }
    if rank == 0 {
        return Err(precondition("rank must be at least 1"));
    }
    let mut grid: Vec<f64> = times.to_vec();
    if grid.iter().any(|t| !t.is_finite()) || !t0.is_finite() {
        return Err(precondition("time nodes must be finite"));
    }
    grid.push(t0);
    grid.sort_by(|x, y| x.total_cmp(y));
    grid.dedup();
    let lo = grid[0];
    let hi = *grid.last().unwrap();
    if times.is_empty() || t0 < lo || t0 > hi {
        return Err(precondition("t0 must lie within the time interval"));
    }
    let t0_index = grid.iter().position(|&t| t == t0).unwrap();
    let nt = grid.len();

    let columns: Vec<Vec<DMatrix<f64>>> = (0..params.len())
        .into_par_iter()
        .map(|pk| {
            let y = params.point(pk);
            let coef = |t: f64| -> Result<DMatrix<f64>> {
                let m = a(t, &y).map_err(|e| locate(e, t, &y))?;
                if m.shape() != (rank, rank) {
                    return Err(precondition(format!("A({t}, {y:?}) has shape {:?}", m.shape())));
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric(format!("A is not finite at t = {t}, y = {y:?}")));
                }
                Ok(m)
            };
            let mut col = vec![DMatrix::identity(rank, rank); nt];
            for i in t0_index + 1..nt {
                let (s, e) = (grid[i - 1], grid[i]);
                col[i] = rk4_linear(coef, col[i - 1].clone(), s, e, substeps(e - s, step))?;
            }
            for i in (0..t0_index).rev() {
                let (s, e) = (grid[i + 1], grid[i]);
                col[i] = rk4_linear(coef, col[i + 1].clone(), s, e, substeps(e - s, step))?;
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;

    Ok(FundamentalSolution {
        t0,
        t0_index,
        times: grid,
        params,
        rank,
        step,
        matrices: columns.into_iter().flatten().collect(),
    })
}

fn locate(e: Error, t: f64, y: &[f64]) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("{m} (at t = {t}, y = {y:?})")),
        Error::Domain(m) => Error::Domain(format!("{m} (at t = {t}, y = {y:?})")),
        other => other,
    }
}

/// `max |det X(t, y) - exp(int_{t0}^t tr A(s, y) ds)|` over all nodes.
///
/// The trace integral uses composite Simpson with `2 ceil(dt / step)` panels on
/// each time interval.
pub fn liouville_defect<A>(fs: &FundamentalSolution, a: A) -> Result<f64>
where
    A: Fn(f64, &[f64]) -> Result<DMatrix<f64>> + Sync,
{
    let times = fs.times();
    (0..fs.params().len())
        .into_par_iter()
        .map(|pk| {
            let y = fs.params().point(pk);
            let trace = |t: f64| a(t, &y).map(|m| m.trace());
            let integral = |s: f64, e: f64| -> Result<f64> {
                // Evaluate once so errors propagate, then integrate the cached closure.
                trace(s)?;
                trace(e)?;
                Ok(simpson(|t| trace(t).unwrap_or(f64::NAN), s, e, 2 * substeps(e - s, fs.step())))
            };
            let mut worst: f64 = 0.0;
            let mut acc = 0.0;
            for i in fs.t0_index() + 1..times.len() {
                acc += integral(times[i - 1], times[i])?;
                worst = worst.max((fs.at(i, pk).determinant() - acc.exp()).abs());
            }
            acc = 0.0;
            for i in (0..fs.t0_index()).rev() {
                acc -= integral(times[i], times[i + 1])?;
                worst = worst.max((fs.at(i, pk).determinant() - acc.exp()).abs());
            }
            worst = worst.max((fs.at(fs.t0_index(), pk).determinant() - 1.0).abs());
            Ok(worst)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

/// Largest `||X(t, y) - X(t, y')||_F / |y - y'|` over parameter nodes adjacent
/// along some axis and all time nodes. Zero for a single-node grid.
pub fn parameter_continuity_modulus(fs: &FundamentalSolution) -> f64 {
    let params = fs.params();
    let mut worst: f64 = 0.0;
    for axis in 0..params.dim() {
        let stride = params.stride(axis);
        let coords = &params.axes()[axis];
        for pk in 0..params.len() {
            let i = params.multi_index(pk)[axis];
            if i + 1 >= coords.len() {
                continue;
            }
            let qk = pk + stride;
            let dy = (coords[i + 1] - coords[i]).abs();
            for ti in 0..fs.times().len() {
                let d = (fs.at(ti, pk) - fs.at(ti, qk)).norm() / dy;
                worst = worst.max(d);
            }
        }
    }
    worst
}
