use nalgebra::{DMatrix, DVector};

use super::form::ConnectionForm;
use super::path::PiecewisePath;
use crate::error::{domain, precondition, Result};
use crate::ode::{rk4_linear, substeps};

/// Transport result with its Richardson accuracy estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Transported {
    pub value: DVector<f64>,
    /// Max-norm difference between runs at `step` and `step / 2`.
    pub defect: f64,
}

/// Solves `Y' = -(sum_i omega_i(gamma) gamma_i') Y` along `path` from `y0`.
///
/// Each smooth piece is integrated separately with uniform RK4 steps no longer
/// than `step`. `y0` may be a vector or an `r x r` matrix.
pub fn propagate(conn: &ConnectionForm, path: &PiecewisePath, y0: DMatrix<f64>, step: f64) -> Result<DMatrix<f64>> {
    if !(step > 0.0) {
        return Err(precondition("integration step must be positive"));
    }
    if path.dim() != conn.dim() {
        return Err(precondition("path and connection differ in dimension"));
    }
    if y0.nrows() != conn.rank() {
        return Err(precondition(format!("initial value has {} rows for rank {}", y0.nrows(), conn.rank())));
    }
    let mut y = y0;
    for (t0, t1, pos, vel) in path.pieces() {
        let coef = |t: f64| -> Result<DMatrix<f64>> {
            let x = pos(t);
            if !conn.domain().contains(&x) {
                return Err(domain(format!("path leaves the connection's box at t = {t}, x = {x:?}")));
            }
            Ok(-conn.contract(&x, &vel(t)))
        };
        y = rk4_linear(coef, y, t0, t1, substeps(t1 - t0, step))?;
    }
    Ok(y)
}

/// Parallel transport of `v0` along `path`; returns the end value.
pub fn parallel_transport(conn: &ConnectionForm, path: &PiecewisePath, v0: &[f64], step: f64) -> Result<DVector<f64>> {
    let y = propagate(conn, path, DMatrix::from_column_slice(v0.len(), 1, v0), step)?;
    Ok(y.column(0).into_owned())
}

/// Transport at `step` and `step / 2`; reports the finer value.
pub fn transport_checked(conn: &ConnectionForm, path: &PiecewisePath, v0: &[f64], step: f64) -> Result<Transported> {
    let coarse = parallel_transport(conn, path, v0, step)?;
    let fine = parallel_transport(conn, path, v0, 0.5 * step)?;
    let defect = (&fine - &coarse).amax();
    Ok(Transported { value: fine, defect })
}
