use nalgebra::DVector;

use super::{AxisResidual, Evidence, ExtensionReport, ResidualPolicy, Tolerances, Verdict};
use crate::connection::{covariant_residual, residual_at, ConnectionForm, SampledSection, Smoothness};
use crate::error::{domain, precondition, Error, Result};
use crate::fundamental::{fundamental_matrix, ParamGrid};
use crate::sets::{Grid, HalfSlab};

pub(crate) fn check_inputs(conn: &ConnectionForm, s: &SampledSection) -> Result<()> {
    let grid = s.grid();
    if conn.dim() != grid.dim() || conn.rank() != s.rank() {
        return Err(precondition("connection and section differ in dimension or rank"));
    }
    if !conn.domain().contains_box(grid.bounds()) {
        return Err(domain("section grid is not inside the connection's box"));
    }
    Ok(())
}

/// Fails with an input-integrity error if `s` is not parallel off the obstacle.
pub(crate) fn verify_parallel(conn: &ConnectionForm, s: &SampledSection, tol: f64) -> Result<()> {
    for axis in 0..conn.dim() {
        let r = covariant_residual(conn, s, axis, 1);
        let worst = r.max();
        if worst > tol {
            let at = r.argmax().map(|n| s.grid().point(n)).unwrap_or_default();
            return Err(Error::InputIntegrity(format!(
                "residual {worst:e} along axis {} at {at:?} exceeds {tol:e}",
                axis + 1
            )));
        }
    }
    Ok(())
}

/// Grid column along `axis` used as the base `a_1`: nearest to `target` from
/// the left, with every node defined and its cell ending at or before `b1`.
fn base_column(s: &SampledSection, axis: usize, target: f64, b1: f64) -> Result<usize> {
    let grid = s.grid();
    let res = grid.resolution()[axis];
    let h = grid.spacing(axis);
    let lo = grid.bounds().lo(axis);
    let admissible = |i: usize| {
        lo + (i as f64 + 1.0) * h <= b1 && column_nodes(grid, axis, i).all(|node| s.is_defined(node))
    };
    let start = grid.locate(axis, target);
    (0..=start)
        .rev()
        .chain(start + 1..res)
        .find(|&i| admissible(i))
        .ok_or_else(|| precondition(format!("no fully defined grid column left of b1 = {b1} on axis {}", axis + 1)))
}

fn column_nodes(grid: &Grid, axis: usize, i: usize) -> impl Iterator<Item = usize> + '_ {
    (0..grid.len()).filter(move |&node| grid.index_along(node, axis) == i)
}

pub(crate) fn residual_sequence(conn: &ConnectionForm, s: &SampledSection, node: usize, axis: usize) -> Vec<(f64, f64)> {
    let h = s.grid().spacing(axis);
    [1usize, 2, 4]
        .iter()
        .filter_map(|&k| residual_at(conn, s, node, axis, k).map(|r| (h * k as f64, r)))
        .collect()
}

/// Extends `s` across `F ⊂ slab` by transporting the base column along the
/// slab axis: `s~(x_1, x') = X(x_1, x') s(a_1, x')`, `X` the fundamental
/// solution of `D_1 X = -omega_1 X`, `X(a_1, x') = I`.
///
/// `a1` defaults to the midpoint between the box's lower end and `b1`; it is
/// moved left to the nearest fully defined grid column.
pub fn extend_slab(
    conn: &ConnectionForm,
    s: &SampledSection,
    slab: &HalfSlab,
    a1: Option<f64>,
    tol: &Tolerances,
    policy: ResidualPolicy,
) -> Result<ExtensionReport> {
    check_inputs(conn, s)?;
    let grid = s.grid();
    let n = grid.dim();
    let axis = slab.slab_axis;
    if axis >= n || slab.thin_axis >= n {
        return Err(precondition("half-slab axes exceed the grid dimension"));
    }
    let (lo, _) = grid.bounds().interval(axis);
    let b1 = slab.threshold;
    let a1 = a1.unwrap_or(0.5 * (lo + b1));
    if a1 >= b1 {
        return Err(precondition(format!("a1 = {a1} must lie below b1 = {b1}")));
    }
    if a1 <= lo {
        return Err(precondition(format!("a1 = {a1} is not inside the box interval starting at {lo}")));
    }
    verify_parallel(conn, s, tol.input)?;

    let col = base_column(s, axis, a1, b1)?;
    let t0 = grid.coordinate(axis, col);
    let others: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
    let params = ParamGrid::new(others.iter().map(|&a| grid.axis_coordinates(a)).collect())?;
    let times = grid.axis_coordinates(axis);
    let rank = s.rank();
    let fs = fundamental_matrix(
        |t, y| {
            let mut x = vec![0.0; n];
            x[axis] = t;
            for (k, &a) in others.iter().enumerate() {
                x[a] = y[k];
            }
            Ok(-conn.component(axis, &x))
        },
        t0,
        &times,
        params,
        rank,
        tol.step,
    )?;
    debug_assert_eq!(fs.times().len(), times.len());

    let mut values = vec![0.0; grid.len() * rank];
    for node in 0..grid.len() {
        let idx = grid.multi_index(node);
        let mut pk = 0;
        let mut stride = 1;
        for &a in &others {
            pk += idx[a] * stride;
            stride *= grid.resolution()[a];
        }
        let mut base_idx = idx.clone();
        base_idx[axis] = col;
        let base = DVector::from_column_slice(s.value(grid.flat_index(&base_idx)));
        let v = fs.at(idx[axis], pk) * base;
        values[node * rank..(node + 1) * rank].copy_from_slice(v.as_slice());
    }
    let extended = SampledSection::new(grid.clone(), rank, values, vec![true; grid.len()])?;

    let (agreement, worst) = extended.max_difference(s);
    let agreement_location = worst.map(|node| grid.point(node));

    let thin_asserted = match policy {
        ResidualPolicy::AssertAll => true,
        ResidualPolicy::SkipThin => false,
        ResidualPolicy::Auto => slab.set.is_discrete() || conn.smoothness() >= Smoothness::C1,
    };
    let residuals = axis_residuals(conn, &extended, |a| a != slab.thin_axis || thin_asserted);

    let mut report = ExtensionReport {
        extended,
        residuals,
        agreement,
        agreement_location,
        verdict: Verdict::Extended,
        evidence: Vec::new(),
        tolerances: tol.clone(),
        base: vec![(axis, t0)],
    };
    decide(conn, &mut report);
    Ok(report)
}

fn axis_residuals(conn: &ConnectionForm, s: &SampledSection, asserted: impl Fn(usize) -> bool) -> Vec<AxisResidual> {
    (0..s.grid().dim())
        .map(|axis| {
            let r = covariant_residual(conn, s, axis, 1);
            AxisResidual {
                axis,
                max: r.max(),
                location: r.argmax().map(|node| s.grid().point(node)),
                eligible: r.eligible(),
                asserted: asserted(axis),
            }
        })
        .collect()
}

/// Sets the verdict from agreement and asserted residuals, adding evidence.
fn decide(conn: &ConnectionForm, report: &mut ExtensionReport) {
    let tol = report.tolerances.clone();
    if report.agreement > tol.agreement {
        report.evidence.push(Evidence::Disagreement {
            location: report.agreement_location.clone().unwrap_or_default(),
            magnitude: report.agreement,
        });
    }
    let grid = report.extended.grid().clone();
    for r in &report.residuals {
        if !r.passes(tol.residual) {
            let location = r.location.clone().unwrap_or_default();
            let node = grid.flat_index(
                &(0..grid.dim())
                    .map(|a| grid.locate(a, location[a]))
                    .collect::<Vec<_>>(),
            );
            report.evidence.push(Evidence::Residual {
                axis: r.axis,
                location,
                sequence: residual_sequence(conn, &report.extended, node, r.axis),
            });
        }
    }
    report.verdict = if report.evidence.is_empty() {
        Verdict::Extended
    } else {
        Verdict::Obstructed
    };
}

/// Runs [`extend_slab`] with both axis roles (`F ⊂ first ∩ second`) and
/// requires the two extensions to agree everywhere. Each run asserts its own
/// slab axis; the thin axes are covered by the other run.
pub fn extend_bidirectional(
    conn: &ConnectionForm,
    s: &SampledSection,
    first: &HalfSlab,
    second: &HalfSlab,
    a1: Option<f64>,
    a2: Option<f64>,
    tol: &Tolerances,
) -> Result<ExtensionReport> {
    if first.slab_axis != second.thin_axis || first.thin_axis != second.slab_axis {
        return Err(precondition("the two half-slabs must use swapped axis roles"));
    }
    let r1 = extend_slab(conn, s, first, a1, tol, ResidualPolicy::SkipThin)?;
    let r2 = extend_slab(conn, s, second, a2, tol, ResidualPolicy::SkipThin)?;
    let (discrepancy, at) = r1.extended.max_difference(&r2.extended);
    if discrepancy > tol.agreement {
        return Err(Error::Inconsistency {
            discrepancy,
            location: at.map(|node| s.grid().point(node)).unwrap_or_default(),
        });
    }
    let residuals = r1
        .residuals
        .iter()
        .zip(&r2.residuals)
        .map(|(a, b)| match (a.asserted, b.asserted) {
            (true, false) => a.clone(),
            (false, true) => b.clone(),
            _ if b.max > a.max => b.clone(),
            _ => a.clone(),
        })
        .collect();
    let (agreement, agreement_location) = if r2.agreement > r1.agreement {
        (r2.agreement, r2.agreement_location.clone())
    } else {
        (r1.agreement, r1.agreement_location.clone())
    };
    let mut report = ExtensionReport {
        extended: r1.extended,
        residuals,
        agreement,
        agreement_location,
        verdict: Verdict::Extended,
        evidence: Vec::new(),
        tolerances: tol.clone(),
        base: vec![r1.base[0], r2.base[0]],
    };
    decide(conn, &mut report);
    Ok(report)
}
