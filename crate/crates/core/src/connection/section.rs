use std::fmt::Write as _;

use nalgebra::DVector;
use rayon::prelude::*;

use super::form::ConnectionForm;
use crate::error::{precondition, Result};
use crate::numfmt::num;
use crate::sets::{Grid, ObstacleSet};

/// Section of the trivial rank-`r` bundle sampled at the nodes of a grid.
///
/// Values are stored flat, `r` entries per node; entries of undefined nodes are
/// kept at zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSection {
    grid: Grid,
    rank: usize,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl SampledSection {
    pub fn new(grid: Grid, rank: usize, values: Vec<f64>, defined: Vec<bool>) -> Result<Self> {
        if rank == 0 {
            return Err(precondition("rank must be at least 1"));
        }
        if values.len() != grid.len() * rank || defined.len() != grid.len() {
            return Err(precondition("section storage does not match the grid"));
        }
        Ok(Self {
            grid,
            rank,
            values,
            defined,
        })
    }

    /// Samples `f` at every node where it returns `Some`.
    pub fn from_fn<F>(grid: Grid, rank: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
    {
        let samples: Vec<Option<Vec<f64>>> = (0..grid.len())
            .into_par_iter()
            .map(|node| f(&grid.point(node)))
            .collect();
        let mut values = vec![0.0; grid.len() * rank];
        let mut defined = vec![false; grid.len()];
        for (node, s) in samples.into_iter().enumerate() {
            if let Some(v) = s {
                if v.len() != rank {
                    return Err(precondition(format!("section value of length {} for rank {rank}", v.len())));
                }
                values[node * rank..(node + 1) * rank].copy_from_slice(&v);
                defined[node] = true;
            }
        }
        Self::new(grid, rank, values, defined)
    }

    /// Samples `f` on the nodes whose cells miss `obstacle`.
    pub fn off_obstacle<F>(grid: Grid, rank: usize, obstacle: &ObstacleSet, depth: u32, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
    {
        let mask = obstacle.mask(&grid, depth);
        let mut s = Self::from_fn(grid, rank, f)?;
        for (node, inside) in mask.into_iter().enumerate() {
            if inside {
                s.undefine(node);
            }
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn defined(&self) -> &[bool] {
        &self.defined
    }

    pub fn is_defined(&self, node: usize) -> bool {
        self.defined[node]
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|d| **d).count()
    }

    /// Value at `node`, if defined.
    pub fn get(&self, node: usize) -> Option<&[f64]> {
        self.defined[node].then(|| self.value(node))
    }

    pub(crate) fn value(&self, node: usize) -> &[f64] {
        &self.values[node * self.rank..(node + 1) * self.rank]
    }

    pub fn set(&mut self, node: usize, v: &[f64]) {
        self.values[node * self.rank..(node + 1) * self.rank].copy_from_slice(v);
        self.defined[node] = true;
    }

    pub fn undefine(&mut self, node: usize) {
        self.values[node * self.rank..(node + 1) * self.rank].fill(0.0);
        self.defined[node] = false;
    }

    /// Max-norm distance over nodes defined in both sections, with its node.
    pub fn max_difference(&self, other: &SampledSection) -> (f64, Option<usize>) {
        let mut worst = (0.0, None);
        for node in 0..self.grid.len() {
            if let (Some(a), Some(b)) = (self.get(node), other.get(node)) {
                let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if d > worst.0 || worst.1.is_none() {
                    worst = (d, Some(node));
                }
            }
        }
        worst
    }

    /// One row per node: indices, coordinates, defined flag, `r` values.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dim();
        let mut out = String::new();
        let mut header: Vec<String> = (1..=n).map(|a| format!("i{a}")).collect();
        header.extend((1..=n).map(|a| format!("x{a}")));
        header.push("defined".into());
        header.extend((1..=self.rank).map(|k| format!("s{k}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for node in 0..self.grid.len() {
            let idx = self.grid.multi_index(node);
            let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            row.extend(idx.iter().enumerate().map(|(a, &i)| num(self.grid.coordinate(a, i))));
            row.push(u8::from(self.defined[node]).to_string());
            if self.defined[node] {
                row.extend(self.value(node).iter().map(|v| num(*v)));
            } else {
                row.extend(std::iter::repeat_n(String::new(), self.rank));
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Per-node `|D_i s + omega_i s|` by central differences over `stride` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub axis: usize,
    pub h: f64,
    /// `None` at nodes without both neighbours defined.
    pub values: Vec<Option<f64>>,
}

impl ResidualField {
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (node, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((node, v));
                }
            }
        }
        best.map(|(n, _)| n)
    }

    pub fn eligible(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Covariant-derivative residual of `s` along `axis`, step `stride` grid cells.
pub fn covariant_residual(conn: &ConnectionForm, s: &SampledSection, axis: usize, stride: usize) -> ResidualField {
    let grid = s.grid();
    let h = grid.spacing(axis) * stride as f64;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|node| residual_at(conn, s, node, axis, stride))
        .collect();
    ResidualField { axis, h, values }
}

pub(crate) fn residual_at(
    conn: &ConnectionForm,
    s: &SampledSection,
    node: usize,
    axis: usize,
    stride: usize,
) -> Option<f64> {
    let grid = s.grid();
    let k = stride as isize;
    let (lo, hi) = (grid.neighbor(node, axis, -k)?, grid.neighbor(node, axis, k)?);
    let (a, b, c) = (s.get(lo)?, s.get(hi)?, s.get(node)?);
    let h = grid.spacing(axis) * stride as f64;
    let ds = DVector::from_iterator(s.rank(), b.iter().zip(a).map(|(p, q)| (p - q) / (2.0 * h)));
    let w = conn.component(axis, &grid.point(node));
    let r = ds + w * DVector::from_column_slice(c);
    Some(r.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::OpenBox;

    fn grid() -> Grid {
        Grid::uniform(OpenBox::unit(2), 16).unwrap()
    }

    #[test]
    fn constant_section_is_parallel_for_the_standard_connection() {
        let conn = ConnectionForm::standard(OpenBox::unit(2), 2).unwrap();
        let s = SampledSection::from_fn(grid(), 2, |_| Some(vec![1.5, -2.0])).unwrap();
        for axis in 0..2 {
            let r = covariant_residual(&conn, &s, axis, 1);
            assert_eq!(r.max(), 0.0);
            assert_eq!(r.eligible(), 14 * 16);
        }
    }

    #[test]
    fn undefined_neighbours_are_skipped() {
        let conn = ConnectionForm::standard(OpenBox::unit(2), 1).unwrap();
        let s = SampledSection::from_fn(grid(), 1, |x| (x[0] < 0.5).then(|| vec![x[1]])).unwrap();
        let r = covariant_residual(&conn, &s, 0, 1);
        assert_eq!(r.eligible(), 6 * 16);
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let s = SampledSection::from_fn(grid(), 1, |x| (x[0] < 0.5).then(|| vec![1.0])).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i1,i2,x1,x2,defined,s1"));
        assert_eq!(lines.count(), 256);
        assert!(csv.contains("\n0,0,0.03125,0.03125,1,1.0\n"));
    }
}
