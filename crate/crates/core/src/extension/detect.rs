use crate::connection::{parallel_transport, ConnectionForm, PiecewisePath};
use crate::error::{domain, precondition, Result};

/// Growth factor per refinement step that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1.5;
/// Relative allowance on [`DIVERGENCE_FACTOR`] for floating-point step sizes.
const FACTOR_SLACK: f64 = 1e-6;
/// Relative change under which quotients count as settled.
pub const STABLE_RELATIVE: f64 = 0.01;
const ABS_FLOOR: f64 = 1e-9;

/// One-sided limits of a section across a hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub below: Vec<f64>,
    pub above: Vec<f64>,
    /// `max_k |above_k - below_k|`.
    pub jump: f64,
    /// Values at `base - eps` and `base + eps` for each `eps`.
    pub samples: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

fn strictly_decreasing_positive(v: &[f64]) -> bool {
    v.iter().all(|&e| e > 0.0 && e.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn shifted(base: &[f64], axis: usize, by: f64) -> Vec<f64> {
    let mut x = base.to_vec();
    x[axis] += by;
    x
}

/// Value of the section at `x`. Where the closed form is undefined (inside the
/// obstacle) the value is obtained by parallel transport along the axis from
/// the nearest defined point on the far side, as a parallel extension would be.
fn side_value<S>(conn: &ConnectionForm, section: &S, x: &[f64], axis: usize, dir: f64, step: f64) -> Result<Vec<f64>>
where
    S: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    if let Some(v) = section(x) {
        return Ok(v);
    }
    let (lo, hi) = conn.domain().interval(axis);
    let probe = (hi - lo) / 1024.0;
    let mut undefined = x.to_vec();
    let mut k = 1.0;
    let defined = loop {
        let y = shifted(x, axis, dir * k * probe);
        if !conn.domain().contains(&y) {
            return Err(domain(format!("no defined section value along axis {} from {x:?}", axis + 1)));
        }
        if section(&y).is_some() {
            break y;
        }
        undefined = y;
        k += 1.0;
    };
    let (mut a, mut b) = (undefined[axis], defined[axis]);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if section(&shifted(x, axis, m - x[axis])).is_some() {
            b = m;
        } else {
            a = m;
        }
    }
    let start = shifted(x, axis, b - x[axis]);
    let v0 = section(&start).expect("bisection keeps the defined end");
    let path = PiecewisePath::segment(&start, x)?;
    Ok(parallel_transport(conn, &path, &v0, step)?.as_slice().to_vec())
}

/// Evaluates the section at `base -+ eps e_axis` for each `eps` and reports the
/// last pair as the one-sided limits.
pub fn detect_jump<S>(conn: &ConnectionForm, section: &S, axis: usize, base: &[f64], eps: &[f64], step: f64) -> Result<JumpReport>
where
    S: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    if eps.is_empty() || !strictly_decreasing_positive(eps) {
        return Err(precondition("eps sequence must be positive and strictly decreasing"));
    }
    if axis >= base.len() || base.len() != conn.dim() {
        return Err(precondition("base point and axis must match the connection's dimension"));
    }
    let mut samples = Vec::with_capacity(eps.len());
    for &e in eps {
        let below = side_value(conn, section, &shifted(base, axis, -e), axis, -1.0, step)?;
        let above = side_value(conn, section, &shifted(base, axis, e), axis, 1.0, step)?;
        samples.push((e, below, above));
    }
    let (_, below, above) = samples.last().cloned().expect("nonempty");
    let jump = below.iter().zip(&above).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(JumpReport {
        below,
        above,
        jump,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuotientTrend {
    /// Each quotient is at least 1.5 times the previous one.
    Divergent,
    /// The last two quotients agree to 1%; carries the last quotient.
    Convergent(f64),
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientVerdict {
    pub point: Vec<f64>,
    /// `(h, |s(x + h e) - s(x - h e)| / 2h)` in max norm.
    pub quotients: Vec<(f64, f64)>,
    pub trend: QuotientTrend,
}

/// Symmetric difference quotients along `axis` at each point for the
/// decreasing steps `hs`, classified as divergent, convergent or neither.
pub fn detect_nondifferentiability<S>(section: &S, axis: usize, points: &[Vec<f64>], hs: &[f64]) -> Result<Vec<QuotientVerdict>>
where
    S: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    if hs.len() < 3 || !strictly_decreasing_positive(hs) {
        return Err(precondition("need at least three positive, strictly decreasing steps"));
    }
    points
        .iter()
        .map(|x| {
            if axis >= x.len() {
                return Err(precondition("axis exceeds the point dimension"));
            }
            let quotients = hs
                .iter()
                .map(|&h| {
                    let plus = section(&shifted(x, axis, h));
                    let minus = section(&shifted(x, axis, -h));
                    match (plus, minus) {
                        (Some(p), Some(m)) => {
                            let q = p.iter().zip(&m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / (2.0 * h);
                            Ok((h, q))
                        }
                        _ => Err(domain(format!("section undefined near {x:?} at step {h}"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QuotientVerdict {
                point: x.clone(),
                trend: classify(&quotients),
                quotients,
            })
        })
        .collect()
}

fn classify(q: &[(f64, f64)]) -> QuotientTrend {
    let threshold = DIVERGENCE_FACTOR * (1.0 - FACTOR_SLACK);
    let growing = q
        .windows(2)
        .all(|w| w[0].1 > ABS_FLOOR && w[1].1 >= threshold * w[0].1);
    if growing {
        return QuotientTrend::Divergent;
    }
    let (prev, last) = (q[q.len() - 2].1, q[q.len() - 1].1);
    if (last - prev).abs() <= (STABLE_RELATIVE * last.abs()).max(ABS_FLOOR) {
        QuotientTrend::Convergent(last)
    } else {
        QuotientTrend::Inconclusive
    }
}
