use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::form::{ConnectionForm, FormComponent};
use crate::error::{precondition, Error, Result};
use crate::sets::OpenBox;

type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacobianMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Sample points per axis used to validate a user-supplied diffeomorphism.
const CHECK_SAMPLES: usize = 5;
const COMPOSITION_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-12;

/// A diffeomorphism `phi : source -> target` with its inverse and Jacobian.
///
/// `jacobian(x)[(i, j)] = d phi_i / d x_j (x)`.
#[derive(Clone)]
pub struct Diffeo {
    forward: PointMap,
    inverse: PointMap,
    jacobian: JacobianMap,
    source: OpenBox,
    target: OpenBox,
}

impl fmt::Debug for Diffeo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeo")
            .field("source", &self.source)
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

impl Diffeo {
    /// Builds and validates on a tensor sample of the source box: `psi(phi(x)) = x`,
    /// `phi(x)` lies in the target and the Jacobian is nonsingular.
    pub fn new<F, G, J>(source: OpenBox, target: OpenBox, forward: F, inverse: G, jacobian: J) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if source.dim() != target.dim() {
            return Err(precondition("source and target boxes differ in dimension"));
        }
        let d = Self {
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            jacobian: Arc::new(jacobian),
            source,
            target,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let total = CHECK_SAMPLES.pow(n as u32);
        for k in 0..total {
            let mut rest = k;
            let x: Vec<f64> = (0..n)
                .map(|a| {
                    let i = rest % CHECK_SAMPLES;
                    rest /= CHECK_SAMPLES;
                    let (lo, hi) = self.source.interval(a);
                    lo + (hi - lo) * (i as f64 + 0.5) / CHECK_SAMPLES as f64
                })
                .collect();
            let y = self.forward(&x);
            if !self.target.contains(&y) {
                return Err(precondition(format!("phi({x:?}) = {y:?} leaves the target box")));
            }
            let back = self.inverse(&y);
            let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
            if err > COMPOSITION_TOL * scale {
                return Err(precondition(format!("inverse does not undo phi at {x:?} (error {err:e})")));
            }
            let j = self.jacobian(&x);
            if j.shape() != (n, n) {
                return Err(precondition(format!("Jacobian has shape {:?}", j.shape())));
            }
            if j.determinant().abs() < SINGULAR_TOL {
                return Err(Error::Numeric(format!("Jacobian is singular at {x:?}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn source(&self) -> &OpenBox {
        &self.source
    }

    pub fn target(&self) -> &OpenBox {
        &self.target
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        (self.inverse)(y)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(x)
    }

    /// Affine map `x -> a x + c`; `target` must contain the image of `source`.
    pub fn affine(source: OpenBox, target: OpenBox, a: DMatrix<f64>, c: Vec<f64>) -> Result<Self> {
        let n = source.dim();
        if a.shape() != (n, n) || c.len() != n {
            return Err(precondition("affine map has the wrong shape"));
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("affine matrix is singular".into()))?;
        let (a1, c1, c2, a2) = (a.clone(), c.clone(), c, a);
        Self::new(
            source,
            target,
            move |x| {
                let v = &a1 * nalgebra::DVector::from_column_slice(x);
                v.iter().zip(&c1).map(|(vi, ci)| vi + ci).collect()
            },
            move |y| {
                let shifted: Vec<f64> = y.iter().zip(&c2).map(|(yi, ci)| yi - ci).collect();
                (&inv * nalgebra::DVector::from_vec(shifted)).as_slice().to_vec()
            },
            move |_| a2.clone(),
        )
    }

    /// `x -> x + c` from `source` onto the translated box.
    pub fn translation(source: OpenBox, c: Vec<f64>) -> Result<Self> {
        let n = source.dim();
        let target = OpenBox::new(
            source
                .intervals()
                .iter()
                .zip(&c)
                .map(|(&(lo, hi), ci)| (lo + ci, hi + ci))
                .collect(),
        )?;
        Self::affine(source, target, DMatrix::identity(n, n), c)
    }

    /// Exchanges coordinates `i` and `j`.
    pub fn axis_swap(source: OpenBox, i: usize, j: usize) -> Result<Self> {
        let n = source.dim();
        if i >= n || j >= n || i == j {
            return Err(precondition("axis swap needs two distinct axes of the box"));
        }
        let mut iv = source.intervals().to_vec();
        iv.swap(i, j);
        let target = OpenBox::new(iv)?;
        let mut p = DMatrix::identity(n, n);
        p.swap_rows(i, j);
        Self::affine(source, target, p, vec![0.0; n])
    }

    /// Rotation by `angle` in the `(i, j)` plane about `center`. The caller
    /// supplies a target box containing the rotated source.
    pub fn rotation(
        source: OpenBox,
        target: OpenBox,
        i: usize,
        j: usize,
        angle: f64,
        center: &[f64],
    ) -> Result<Self> {
        let n = source.dim();
        if i >= n || j >= n || i == j || center.len() != n {
            return Err(precondition("rotation needs two distinct axes and an n-point centre"));
        }
        let mut r = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        r[(i, i)] = c;
        r[(i, j)] = -s;
        r[(j, i)] = s;
        r[(j, j)] = c;
        let rc = &r * nalgebra::DVector::from_column_slice(center);
        let shift: Vec<f64> = center.iter().zip(rc.iter()).map(|(a, b)| a - b).collect();
        Self::affine(source, target, r, shift)
    }
}

/// `phi^* conn` on `phi.source()`: `omega'_j(x) = sum_i omega_i(phi(x)) J_ij(x)`.
///
/// Only diffeomorphisms are supported; `phi` must map into `conn`'s box.
pub fn pullback(conn: &ConnectionForm, phi: &Diffeo) -> Result<ConnectionForm> {
    if phi.dim() != conn.dim() {
        return Err(precondition("diffeomorphism and connection differ in dimension"));
    }
    if !conn.domain().contains_box(phi.target()) {
        return Err(crate::error::domain("diffeomorphism target is not inside the connection's box"));
    }
    let n = conn.dim();
    let components = (0..n)
        .map(|j| -> FormComponent {
            let (conn, phi) = (conn.clone(), phi.clone());
            Arc::new(move |x: &[f64]| {
                let y = phi.forward(x);
                let jac = phi.jacobian(x);
                let mut out = DMatrix::zeros(conn.rank(), conn.rank());
                for i in 0..n {
                    let c = jac[(i, j)];
                    if c != 0.0 {
                        out += conn.component(i, &y) * c;
                    }
                }
                out
            })
        })
        .collect();
    ConnectionForm::new(phi.source().clone(), conn.rank(), components, conn.smoothness())
}
