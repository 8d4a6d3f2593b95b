use std::sync::Arc;

use nalgebra::DVector;

use super::diffeo::Diffeo;
use crate::error::{precondition, Result};

type CurveFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
struct Segment {
    t0: f64,
    t1: f64,
    position: CurveFn,
    velocity: CurveFn,
}

/// Piecewise `C^1` path `gamma : [t_0, t_m] -> R^n` with explicit velocity.
#[derive(Clone)]
pub struct PiecewisePath {
    dim: usize,
    segments: Vec<Segment>,
}

impl std::fmt::Debug for PiecewisePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PiecewisePath")
            .field("dim", &self.dim)
            .field("breakpoints", &self.breakpoints())
            .finish()
    }
}

const CONTINUITY_TOL: f64 = 1e-9;

impl PiecewisePath {
    /// Single segment on `[t0, t1]` from arbitrary position and velocity maps.
    pub fn from_fns<P, V>(dim: usize, t0: f64, t1: f64, position: P, velocity: V) -> Result<Self>
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        V: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(t0 < t1) {
            return Err(precondition("segment parameter interval must be nonempty"));
        }
        Ok(Self {
            dim,
            segments: vec![Segment {
                t0,
                t1,
                position: Arc::new(position),
                velocity: Arc::new(velocity),
            }],
        })
    }

    /// Straight segment from `a` to `b`, parametrised over `[0, 1]`.
    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(precondition("segment endpoints must have equal, positive dimension"));
        }
        let a = a.to_vec();
        let d: Vec<f64> = b.iter().zip(&a).map(|(bi, ai)| bi - ai).collect();
        let d2 = d.clone();
        Self::from_fns(
            a.len(),
            0.0,
            1.0,
            move |t| a.iter().zip(&d).map(|(ai, di)| ai + t * di).collect(),
            move |_| d2.clone(),
        )
    }

    /// Polygonal path through `points`, one unit of parameter per edge.
    pub fn polyline(points: &[Vec<f64>]) -> Result<Self> {
        if points.len() < 2 {
            return Err(precondition("a polyline needs at least two points"));
        }
        let mut path = Self::segment(&points[0], &points[1])?;
        for w in points[1..].windows(2) {
            path = path.then(&Self::segment(&w[0], &w[1])?)?;
        }
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].t0
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().unwrap().t1
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        b.push(self.end_time());
        b
    }

    pub fn start(&self) -> Vec<f64> {
        let s = &self.segments[0];
        (s.position)(s.t0)
    }

    pub fn end(&self) -> Vec<f64> {
        let s = self.segments.last().unwrap();
        (s.position)(s.t1)
    }

    /// Concatenation: `other` is shifted in time to start where `self` ends.
    pub fn then(&self, other: &PiecewisePath) -> Result<Self> {
        if other.dim != self.dim {
            return Err(precondition("cannot concatenate paths of different dimension"));
        }
        let gap: f64 = self
            .end()
            .iter()
            .zip(other.start())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > CONTINUITY_TOL {
            return Err(precondition(format!("paths do not meet (gap {gap:e})")));
        }
        let shift = self.end_time() - other.start_time();
        let mut segments = self.segments.clone();
        for s in &other.segments {
            let (p, v) = (s.position.clone(), s.velocity.clone());
            segments.push(Segment {
                t0: s.t0 + shift,
                t1: s.t1 + shift,
                position: Arc::new(move |t| p(t - shift)),
                velocity: Arc::new(move |t| v(t - shift)),
            });
        }
        Ok(Self {
            dim: self.dim,
            segments,
        })
    }

    /// Same trace run backwards over the same parameter interval.
    pub fn reversed(&self) -> Self {
        let total = self.start_time() + self.end_time();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let (p, v) = (s.position.clone(), s.velocity.clone());
                Segment {
                    t0: total - s.t1,
                    t1: total - s.t0,
                    position: Arc::new(move |t| p(total - t)),
                    velocity: Arc::new(move |t| v(total - t).into_iter().map(|c| -c).collect()),
                }
            })
            .collect();
        Self {
            dim: self.dim,
            segments,
        }
    }

    /// Image path `phi o gamma`, velocity `J_phi(gamma) gamma'`.
    pub fn mapped(&self, phi: &Diffeo) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let (p, v) = (s.position.clone(), s.velocity.clone());
                let (p2, d1, d2) = (s.position.clone(), phi.clone(), phi.clone());
                Segment {
                    t0: s.t0,
                    t1: s.t1,
                    position: Arc::new(move |t| d1.forward(&p(t))),
                    velocity: Arc::new(move |t| {
                        let j = d2.jacobian(&p2(t));
                        (j * DVector::from_vec(v(t))).as_slice().to_vec()
                    }),
                }
            })
            .collect();
        Self {
            dim: phi.dim(),
            segments,
        }
    }

    pub(crate) fn pieces(&self) -> impl Iterator<Item = (f64, f64, &CurveFn, &CurveFn)> {
        self.segments
            .iter()
            .map(|s| (s.t0, s.t1, &s.position, &s.velocity))
    }

    /// Checks position continuity at every interior breakpoint.
    pub fn is_continuous(&self) -> bool {
        self.segments.windows(2).all(|w| {
            let a = (w[0].position)(w[0].t1);
            let b = (w[1].position)(w[1].t0);
            a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= CONTINUITY_TOL)
        })
    }
}
