//! Fixed-step classical Runge-Kutta for linear systems `Y' = M(t) Y`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of uniform substeps needed to cover `span` with steps no longer than `step`.
pub fn substeps(span: f64, step: f64) -> usize {
    ((span.abs() / step).ceil() as usize).max(1)
}

/// Integrates `Y' = coef(t) Y` from `t0` to `t1` in `steps` uniform RK4 steps.
///
/// `Y` may be a column (transport of a vector) or a square matrix
/// (fundamental solution). Fails if the coefficient is not finite somewhere.
pub fn rk4_linear<F>(mut coef: F, y0: DMatrix<f64>, t0: f64, t1: f64, steps: usize) -> Result<DMatrix<f64>>
where
    F: FnMut(f64) -> Result<DMatrix<f64>>,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut eval = |t: f64| -> Result<DMatrix<f64>> {
        let m = coef(t)?;
        if m.iter().all(|v| v.is_finite()) {
            Ok(m)
        } else {
            Err(Error::Numeric(format!("coefficient is not finite at t = {t}")))
        }
    };
    let mut m_next = eval(t0)?;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let m0 = m_next;
        let mh = eval(t + 0.5 * h)?;
        m_next = eval(if k + 1 == steps { t1 } else { t + h })?;
        let k1 = &m0 * &y;
        let k2 = &mh * (&y + &k1 * (0.5 * h));
        let k3 = &mh * (&y + &k2 * (0.5 * h));
        let k4 = &m_next * (&y + &k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(y)
}

/// Composite Simpson rule with `panels` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
