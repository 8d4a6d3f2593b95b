use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::slab::{check_inputs, verify_parallel};
use super::Tolerances;
use crate::connection::{ConnectionForm, SampledSection};
use crate::error::{precondition, Result};
use crate::ode::{rk4_linear, substeps};
use crate::sets::{Grid, ObstacleSet};

/// Grid surrogate of the largest region a parallel section extends to.
#[derive(Debug, Clone)]
pub struct MaximalRegion {
    /// Nodes carrying a value: the known nodes off `F` plus every node reached.
    pub mask: Vec<bool>,
    /// Unreached nodes adjacent to the reached region.
    pub frontier: Vec<usize>,
    /// Values on `mask`.
    pub section: SampledSection,
    /// Nodes whose cells meet `F`.
    pub obstacle_nodes: usize,
    pub iterations: usize,
}

impl MaximalRegion {
    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn unreached(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }
}

/// Transport matrices across grid edges: `forward[a][u]` carries a value from
/// `u` to `u + e_a`, `backward[a][u]` from `u + e_a` back to `u`. Only edges
/// inside `near` are computed.
struct EdgePropagators {
    forward: Vec<Vec<Option<DMatrix<f64>>>>,
    backward: Vec<Vec<Option<DMatrix<f64>>>>,
}

impl EdgePropagators {
    fn build(conn: &ConnectionForm, grid: &Grid, near: &[bool], step: f64) -> Result<Self> {
        let r = conn.rank();
        let mut forward = Vec::with_capacity(grid.dim());
        let mut backward = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let pairs: Vec<(Option<DMatrix<f64>>, Option<DMatrix<f64>>)> = (0..grid.len())
                .into_par_iter()
                .map(|u| {
                    let Some(v) = grid.neighbor(u, axis, 1) else {
                        return Ok((None, None));
                    };
                    if !(near[u] && near[v]) {
                        return Ok((None, None));
                    }
                    let x = grid.point(u);
                    let (a, b) = (x[axis], grid.coordinate(axis, grid.index_along(v, axis)));
                    let coef = |t: f64| {
                        let mut y = x.clone();
                        y[axis] = t;
                        Ok(-conn.component(axis, &y))
                    };
                    let steps = substeps(b - a, step);
                    let fwd = rk4_linear(coef, DMatrix::identity(r, r), a, b, steps)?;
                    let bwd = rk4_linear(coef, DMatrix::identity(r, r), b, a, steps)?;
                    Ok((Some(fwd), Some(bwd)))
                })
                .collect::<Result<_>>()?;
            let (f, b): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            forward.push(f);
            backward.push(b);
        }
        Ok(Self { forward, backward })
    }

    /// Carries `v` from `u` one step along `axis` in direction `dir`.
    fn step(&self, grid: &Grid, u: usize, axis: usize, dir: isize, v: &DVector<f64>) -> Option<(usize, DVector<f64>)> {
        let w = grid.neighbor(u, axis, dir)?;
        let m = if dir > 0 {
            self.forward[axis][u].as_ref()?
        } else {
            self.backward[axis][w].as_ref()?
        };
        Some((w, m * v))
    }
}

/// Nodes within Chebyshev distance `radius` of a marked node.
fn dilate(grid: &Grid, marked: &[bool], radius: usize) -> Vec<bool> {
    let mut cur = marked.to_vec();
    for axis in 0..grid.dim() {
        let mut next = cur.clone();
        for node in 0..grid.len() {
            if cur[node] {
                for k in 1..=radius as isize {
                    for dir in [-k, k] {
                        if let Some(m) = grid.neighbor(node, axis, dir) {
                            next[m] = true;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Axis-aligned block of grid nodes, `lo[a] ..= hi[a]` in index space.
struct Block {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Block {
    fn extent(&self, a: usize) -> usize {
        self.hi[a] - self.lo[a] + 1
    }

    fn len(&self) -> usize {
        (0..self.lo.len()).map(|a| self.extent(a)).product()
    }

    fn local(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        let mut stride = 1;
        for a in 0..idx.len() {
            k += (idx[a] - self.lo[a]) * stride;
            stride *= self.extent(a);
        }
        k
    }

    fn index(&self, mut k: usize) -> Vec<usize> {
        (0..self.lo.len())
            .map(|a| {
                let e = self.extent(a);
                let i = self.lo[a] + k % e;
                k /= e;
                i
            })
            .collect()
    }

    fn contains(&self, idx: &[usize]) -> bool {
        idx.iter().enumerate().all(|(a, &i)| self.lo[a] <= i && i <= self.hi[a])
    }
}

struct ScanState<'a> {
    conn: &'a ConnectionForm,
    grid: &'a Grid,
    props: &'a EdgePropagators,
    known: &'a [bool],
    values: &'a [f64],
    rank: usize,
    half: usize,
    tol: &'a Tolerances,
}

impl ScanState<'_> {
    fn value(&self, node: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.values[node * self.rank..(node + 1) * self.rank])
    }

    fn window(&self, idx: &[usize]) -> Block {
        let res = self.grid.resolution();
        Block {
            lo: idx.iter().map(|&i| i.saturating_sub(self.half)).collect(),
            hi: idx.iter().enumerate().map(|(a, &i)| (i + self.half).min(res[a] - 1)).collect(),
        }
    }

    /// Largest number of unknown window nodes in one slice perpendicular to `axis`.
    fn thinness(&self, w: &Block, axis: usize) -> usize {
        let mut counts = vec![0usize; w.extent(axis)];
        for k in 0..w.len() {
            let idx = w.index(k);
            if !self.known[self.grid.flat_index(&idx)] {
                counts[idx[axis] - w.lo[axis]] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }

    fn attempt(&self, p: usize) -> Option<Vec<f64>> {
        let idx = self.grid.multi_index(p);
        let w = self.window(&idx);
        let mut axes: Vec<(usize, usize)> = (0..self.grid.dim()).map(|a| (self.thinness(&w, a), a)).collect();
        axes.sort_unstable();
        for (_, axis) in axes {
            for dir in [1isize, -1] {
                if let Some(v) = self.attempt_along(&idx, &w, axis, dir) {
                    return Some(v);
                }
            }
        }
        None
    }

    /// Local half-slab extension: transport from the nearest fully known slice
    /// behind `p` (seen from direction `dir`) through the rest of the window,
    /// then check agreement with known nodes and residuals on all axes.
    fn attempt_along(&self, idx: &[usize], w: &Block, axis: usize, dir: isize) -> Option<Vec<f64>> {
        let slice_known = |c: usize| {
            let mut lo = w.lo.clone();
            let mut hi = w.hi.clone();
            lo[axis] = c;
            hi[axis] = c;
            let s = Block { lo, hi };
            (0..s.len()).all(|k| self.known[self.grid.flat_index(&s.index(k))])
        };
        let i = idx[axis] as isize;
        let c = (1..=self.half as isize)
            .map(|k| i - dir * k)
            .take_while(|&c| c >= w.lo[axis] as isize && c <= w.hi[axis] as isize)
            .find(|&c| slice_known(c as usize))? as usize;

        let mut local = Block {
            lo: w.lo.clone(),
            hi: w.hi.clone(),
        };
        if dir > 0 {
            local.lo[axis] = c;
        } else {
            local.hi[axis] = c;
        }
        let mut ext: Vec<Option<DVector<f64>>> = vec![None; local.len()];
        let mut base = local.lo.clone();
        let mut base_block = Block {
            lo: local.lo.clone(),
            hi: local.hi.clone(),
        };
        base_block.lo[axis] = c;
        base_block.hi[axis] = c;
        for k in 0..base_block.len() {
            base.clone_from(&base_block.index(k));
            let mut node = self.grid.flat_index(&base);
            let mut v = self.value(node);
            let mut cur = base.clone();
            loop {
                ext[local.local(&cur)] = Some(v.clone());
                let next = cur[axis] as isize + dir;
                if next < local.lo[axis] as isize || next > local.hi[axis] as isize {
                    break;
                }
                let (m, nv) = self.props.step(self.grid, node, axis, dir, &v)?;
                node = m;
                v = nv;
                cur[axis] = next as usize;
            }
        }

        for k in 0..local.len() {
            let q = local.index(k);
            let node = self.grid.flat_index(&q);
            let e = ext[k].as_ref()?;
            if self.known[node] && (e - self.value(node)).amax() > self.tol.agreement {
                return None;
            }
            for b in 0..self.grid.dim() {
                let (mut lo, mut hi) = (q.clone(), q.clone());
                if q[b] == 0 {
                    continue;
                }
                lo[b] -= 1;
                hi[b] += 1;
                if !(local.contains(&lo) && local.contains(&hi)) {
                    continue;
                }
                let (el, eh) = (ext[local.local(&lo)].as_ref()?, ext[local.local(&hi)].as_ref()?);
                let h = self.grid.spacing(b);
                let r = (eh - el) / (2.0 * h) + self.conn.component(b, &self.grid.point(node)) * e;
                if r.amax() > self.tol.residual {
                    return None;
                }
            }
        }
        ext[local.local(idx)].as_ref().map(|v| v.as_slice().to_vec())
    }
}

fn touches(grid: &Grid, mask: &[bool], node: usize) -> bool {
    (0..grid.dim()).any(|a| [-1, 1].iter().any(|&d| grid.neighbor(node, a, d).is_some_and(|m| mask[m])))
}

/// Grows the known region of `s` into `F` node by node. A node is reached when
/// a local half-slab extension on a `window`-wide block around it agrees with
/// every known value in the block and has small residuals on all axes.
/// Iterates in Jacobi sweeps (all proposals of a sweep are computed against the
/// previous state, then applied) until nothing changes.
pub fn maximal_extension_scan(
    conn: &ConnectionForm,
    s: &SampledSection,
    obstacle: &ObstacleSet,
    window: usize,
    tol: &Tolerances,
) -> Result<MaximalRegion> {
    check_inputs(conn, s)?;
    if window < 3 {
        return Err(precondition("scan window must span at least 3 nodes"));
    }
    let grid = s.grid();
    let rank = s.rank();
    let fmask = obstacle.mask(grid, tol.depth);
    let mut known: Vec<bool> = (0..grid.len()).map(|n| s.is_defined(n) && !fmask[n]).collect();
    let mut input = s.clone();
    for (node, &k) in known.iter().enumerate() {
        if !k {
            input.undefine(node);
        }
    }
    verify_parallel(conn, &input, tol.input)?;
    let mut values: Vec<f64> = (0..grid.len())
        .flat_map(|n| input.value(n).to_vec())
        .collect();

    let half = window / 2;
    let unknown: Vec<bool> = known.iter().map(|k| !k).collect();
    let near = dilate(grid, &unknown, half);
    let props = EdgePropagators::build(conn, grid, &near, tol.step)?;

    let mut iterations = 0;
    loop {
        let candidates: Vec<usize> = (0..grid.len())
            .filter(|&n| !known[n] && touches(grid, &known, n))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let state = ScanState {
            conn,
            grid,
            props: &props,
            known: &known,
            values: &values,
            rank,
            half,
            tol,
        };
        let proposals: Vec<(usize, Vec<f64>)> = candidates
            .par_iter()
            .filter_map(|&p| state.attempt(p).map(|v| (p, v)))
            .collect();
        if proposals.is_empty() {
            break;
        }
        iterations += 1;
        for (p, v) in proposals {
            values[p * rank..(p + 1) * rank].copy_from_slice(&v);
            known[p] = true;
        }
    }

    let frontier = (0..grid.len())
        .filter(|&n| !known[n] && touches(grid, &known, n))
        .collect();
    let section = SampledSection::new(grid.clone(), rank, values, known.clone())?;
    Ok(MaximalRegion {
        mask: known,
        frontier,
        section,
        obstacle_nodes: fmask.iter().filter(|m| **m).count(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{OpenBox, SideConstraint};

    fn setup(res: usize) -> (ConnectionForm, Grid) {
        (
            ConnectionForm::standard(OpenBox::unit(2), 1).unwrap(),
            Grid::uniform(OpenBox::unit(2), res).unwrap(),
        )
    }

    #[test]
    fn patch_with_boundary_is_filled() {
        let (conn, grid) = setup(32);
        let f = ObstacleSet::HyperplanePatch {
            axis: 1,
            level: 0.5,
            constraints: vec![SideConstraint::AtLeast { axis: 0, bound: 0.25 }],
        };
        let s = SampledSection::off_obstacle(grid, 1, &f, 10, |_| Some(vec![1.0])).unwrap();
        let m = maximal_extension_scan(&conn, &s, &f, 5, &Tolerances::default()).unwrap();
        assert!(m.is_complete());
        assert!(m.frontier.is_empty());
        assert_eq!(m.obstacle_nodes, 24);
        assert!((0..m.mask.len()).all(|n| m.section.get(n) == Some(&[1.0][..])));
    }

    #[test]
    fn separating_plane_with_mismatched_constants_blocks_everything() {
        let (conn, grid) = setup(32);
        let f = ObstacleSet::hyperplane(1, 0.5);
        let s = SampledSection::off_obstacle(grid, 1, &f, 10, |x| Some(vec![if x[1] < 0.5 { 0.0 } else { 1.0 }])).unwrap();
        let m = maximal_extension_scan(&conn, &s, &f, 5, &Tolerances::default()).unwrap();
        assert_eq!(m.frontier.len(), 32);
        assert_eq!(m.unreached(), 32);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn dilation_is_a_chebyshev_ball() {
        let grid = Grid::uniform(OpenBox::unit(2), 9).unwrap();
        let mut marked = vec![false; grid.len()];
        marked[grid.flat_index(&[4, 4])] = true;
        let d = dilate(&grid, &marked, 2);
        assert_eq!(d.iter().filter(|x| **x).count(), 25);
    }
}
