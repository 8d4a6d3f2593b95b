use rayon::prelude::*;

use super::boxes::Grid;
use super::cantor::CantorLikeSet;
use crate::error::{precondition, Result};

/// `{ x : x[slab_axis] >= threshold, x[thin_axis] in set }`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSlab {
    pub threshold: f64,
    pub slab_axis: usize,
    pub thin_axis: usize,
    pub set: CantorLikeSet,
}

impl HalfSlab {
    pub fn new(threshold: f64, slab_axis: usize, thin_axis: usize, set: CantorLikeSet) -> Result<Self> {
        if slab_axis == thin_axis {
            return Err(precondition("slab and thin axes must differ"));
        }
        if !threshold.is_finite() {
            return Err(precondition("slab threshold must be finite"));
        }
        Ok(Self {
            threshold,
            slab_axis,
            thin_axis,
            set,
        })
    }

    fn contains(&self, x: &[f64], depth: u32) -> bool {
        x[self.slab_axis] >= self.threshold && self.set.covers(x[self.thin_axis], depth)
    }

    fn meets_cell(&self, lo: &[f64], hi: &[f64], depth: u32) -> bool {
        hi[self.slab_axis] > self.threshold
            && self.set.meets(lo[self.thin_axis], hi[self.thin_axis], depth)
    }
}

/// One-sided bound on a coordinate, used to cut a hyperplane down to a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideConstraint {
    AtLeast { axis: usize, bound: f64 },
    AtMost { axis: usize, bound: f64 },
}

/// Descriptor of a closed obstacle `F` inside a box.
#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleSet {
    HalfSlab(HalfSlab),
    /// Intersection of two half-slabs with swapped axis roles.
    BiSlab(HalfSlab, HalfSlab),
    /// `{ x[axis] = level }` cut by side constraints; with none it is a full hyperplane.
    HyperplanePatch {
        axis: usize,
        level: f64,
        constraints: Vec<SideConstraint>,
    },
    /// Explicit set of grid cells.
    GridMask { grid: Grid, cells: Vec<bool> },
    /// Closed axis-parallel box `[a_1, b_1] x ... x [a_n, b_n]`.
    ClosedBox(Vec<(f64, f64)>),
    /// Finite union; the empty union is the empty set.
    Union(Vec<ObstacleSet>),
}

impl ObstacleSet {
    pub fn empty() -> Self {
        ObstacleSet::Union(Vec::new())
    }

    pub fn is_empty_descriptor(&self) -> bool {
        matches!(self, ObstacleSet::Union(parts) if parts.iter().all(|p| p.is_empty_descriptor()))
    }

    pub fn half_slab(slab: HalfSlab) -> Self {
        ObstacleSet::HalfSlab(slab)
    }

    /// Full hyperplane `{ x[axis] = level }`.
    pub fn hyperplane(axis: usize, level: f64) -> Self {
        ObstacleSet::HyperplanePatch {
            axis,
            level,
            constraints: Vec::new(),
        }
    }

    /// Product `C_1 x C_2` of two Cantor-like sets in the plane, written as the
    /// intersection of the half-slabs `{x_1 >= a_1, x_2 in C_2}` and
    /// `{x_2 >= a_2, x_1 in C_1}` where `a_i` is the left end of `C_i`.
    pub fn product2(c1: CantorLikeSet, c2: CantorLikeSet) -> Result<Self> {
        let first = HalfSlab::new(c1.ambient().0, 0, 1, c2.clone())?;
        let second = HalfSlab::new(c2.ambient().0, 1, 0, c1)?;
        Ok(ObstacleSet::BiSlab(first, second))
    }

    /// Point membership, deciding Cantor-type factors at `depth`.
    pub fn contains(&self, x: &[f64], depth: u32) -> bool {
        match self {
            ObstacleSet::HalfSlab(s) => s.contains(x, depth),
            ObstacleSet::BiSlab(a, b) => a.contains(x, depth) && b.contains(x, depth),
            ObstacleSet::HyperplanePatch {
                axis,
                level,
                constraints,
            } => x[*axis] == *level && constraints.iter().all(|c| satisfies(c, x[axis_of(c)], x[axis_of(c)])),
            ObstacleSet::GridMask { grid, cells } => {
                if !grid.bounds().contains(x) {
                    return false;
                }
                let idx: Vec<usize> = (0..grid.dim()).map(|a| grid.locate(a, x[a])).collect();
                cells[grid.flat_index(&idx)]
            }
            ObstacleSet::ClosedBox(iv) => iv.iter().zip(x).all(|(&(a, b), &xi)| a <= xi && xi <= b),
            ObstacleSet::Union(parts) => parts.iter().any(|p| p.contains(x, depth)),
        }
    }

    /// Does `F` (stage-`depth` cover) meet the half-open cell `[lo, hi)`?
    ///
    /// Undecided cells count as inside, so grid masks over-approximate `F`.
    pub fn meets_cell(&self, lo: &[f64], hi: &[f64], depth: u32) -> bool {
        match self {
            ObstacleSet::HalfSlab(s) => s.meets_cell(lo, hi, depth),
            ObstacleSet::BiSlab(a, b) => a.meets_cell(lo, hi, depth) && b.meets_cell(lo, hi, depth),
            ObstacleSet::HyperplanePatch {
                axis,
                level,
                constraints,
            } => {
                lo[*axis] <= *level
                    && *level < hi[*axis]
                    && constraints.iter().all(|c| satisfies(c, lo[axis_of(c)], hi[axis_of(c)]))
            }
            ObstacleSet::GridMask { .. } => {
                let centre: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                self.contains(&centre, depth)
            }
            ObstacleSet::ClosedBox(iv) => iv
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&(a, b), (&l, &h))| a < h && b >= l),
            ObstacleSet::Union(parts) => parts.iter().any(|p| p.meets_cell(lo, hi, depth)),
        }
    }

    /// Grid nodes whose cells meet `F`.
    pub fn mask(&self, grid: &Grid, depth: u32) -> Vec<bool> {
        (0..grid.len())
            .into_par_iter()
            .map(|node| {
                let (lo, hi) = grid.cell(node);
                self.meets_cell(&lo, &hi, depth)
            })
            .collect()
    }

    /// Largest axis index the descriptor refers to, if any.
    pub fn max_axis(&self) -> Option<usize> {
        match self {
            ObstacleSet::HalfSlab(s) => Some(s.slab_axis.max(s.thin_axis)),
            ObstacleSet::BiSlab(a, b) => Some(a.slab_axis.max(a.thin_axis).max(b.slab_axis).max(b.thin_axis)),
            ObstacleSet::HyperplanePatch {
                axis, constraints, ..
            } => constraints.iter().map(axis_of).chain([*axis]).max(),
            ObstacleSet::GridMask { grid, .. } => Some(grid.dim() - 1),
            ObstacleSet::ClosedBox(iv) => iv.len().checked_sub(1),
            ObstacleSet::Union(parts) => parts.iter().filter_map(|p| p.max_axis()).max(),
        }
    }
}

fn axis_of(c: &SideConstraint) -> usize {
    match *c {
        SideConstraint::AtLeast { axis, .. } | SideConstraint::AtMost { axis, .. } => axis,
    }
}

// Whether [lo, hi) (a point when lo == hi) has a coordinate meeting the constraint.
fn satisfies(c: &SideConstraint, lo: f64, hi: f64) -> bool {
    match *c {
        SideConstraint::AtLeast { bound, .. } => {
            if lo == hi {
                lo >= bound
            } else {
                hi > bound
            }
        }
        SideConstraint::AtMost { bound, .. } => lo <= bound,
    }
}
