use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{domain, precondition, Result};
use crate::sets::OpenBox;

/// One matrix-valued coefficient `omega_i : box -> R^{r x r}`.
pub type FormComponent = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Declared regularity of a connection form. Not verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    C0,
    C1,
    CInf,
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothness::C0 => "C0",
            Smoothness::C1 => "C1",
            Smoothness::CInf => "Cinf",
        })
    }
}

/// Connection on the trivial rank-`r` bundle over an open box, given in the
/// standard frame by its form `omega = omega_1 dx^1 + ... + omega_n dx^n`.
///
/// A section `s` is parallel iff `D_i s + omega_i s = 0` for every axis.
#[derive(Clone)]
pub struct ConnectionForm {
    domain: OpenBox,
    rank: usize,
    components: Vec<FormComponent>,
    smoothness: Smoothness,
}

impl fmt::Debug for ConnectionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionForm")
            .field("domain", &self.domain)
            .field("rank", &self.rank)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl ConnectionForm {
    pub fn new(
        domain: OpenBox,
        rank: usize,
        components: Vec<FormComponent>,
        smoothness: Smoothness,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(precondition("rank must be at least 1"));
        }
        if components.len() != domain.dim() {
            return Err(precondition(format!(
                "{} form components for a {}-dimensional box",
                components.len(),
                domain.dim()
            )));
        }
        let c = domain.center();
        for (i, w) in components.iter().enumerate() {
            let m = w(&c);
            if m.shape() != (rank, rank) {
                return Err(precondition(format!(
                    "component {i} has shape {:?}, expected {rank}x{rank}",
                    m.shape()
                )));
            }
        }
        Ok(Self {
            domain,
            rank,
            components,
            smoothness,
        })
    }

    /// The standard (zero) connection of the trivial bundle.
    pub fn standard(domain: OpenBox, rank: usize) -> Result<Self> {
        let n = domain.dim();
        let zero: FormComponent = Arc::new(move |_| DMatrix::zeros(rank, rank));
        Self::new(domain, rank, vec![zero; n], Smoothness::CInf)
    }

    /// Constant coefficients `omega_i = matrices[i]`.
    pub fn constant(domain: OpenBox, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let rank = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        let components = matrices
            .into_iter()
            .map(|m| -> FormComponent { Arc::new(move |_| m.clone()) })
            .collect();
        Self::new(domain, rank, components, Smoothness::CInf)
    }

    pub fn domain(&self) -> &OpenBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn components(&self) -> &[FormComponent] {
        &self.components
    }

    /// `omega_i(x)`; no domain check.
    pub fn component(&self, axis: usize, x: &[f64]) -> DMatrix<f64> {
        (self.components[axis])(x)
    }

    /// `sum_i omega_i(x) v_i`, the form applied to a tangent vector.
    pub fn contract(&self, x: &[f64], v: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rank, self.rank);
        for (w, &vi) in self.components.iter().zip(v) {
            if vi != 0.0 {
                out += w(x) * vi;
            }
        }
        out
    }

    /// Same component maps, declared on a sub-box.
    pub fn restrict(&self, sub: &OpenBox) -> Result<Self> {
        if !self.domain.contains_box(sub) {
            return Err(domain(format!(
                "{:?} is not contained in {:?}",
                sub.intervals(),
                self.domain.intervals()
            )));
        }
        Ok(Self {
            domain: sub.clone(),
            ..self.clone()
        })
    }

    /// Re-declares the smoothness class.
    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }
}

/// Standard connection of rank `r` on the cube `(-1e3, 1e3)^n`.
pub fn standard_connection(n: usize, r: usize) -> Result<ConnectionForm> {
    ConnectionForm::standard(OpenBox::cube(n, -1e3, 1e3)?, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_is_zero() {
        let c = standard_connection(2, 1).unwrap();
        assert_eq!(c.component(0, &[0.3, 0.4]), DMatrix::zeros(1, 1));
        assert_eq!(c.component(1, &[0.3, 0.4]), DMatrix::zeros(1, 1));
        assert_eq!(c.smoothness(), Smoothness::CInf);
    }

    #[test]
    fn restriction_keeps_maps() {
        let c = ConnectionForm::new(
            OpenBox::unit(2),
            1,
            vec![
                Arc::new(|x: &[f64]| DMatrix::from_element(1, 1, x[0] * x[1])),
                Arc::new(|_: &[f64]| DMatrix::zeros(1, 1)),
            ],
            Smoothness::CInf,
        )
        .unwrap();
        let sub = OpenBox::new(vec![(0.2, 0.6), (0.5, 0.9)]).unwrap();
        let r = c.restrict(&sub).unwrap();
        let centre = sub.center();
        assert_eq!(r.component(0, &centre), c.component(0, &centre));
        let outside = OpenBox::new(vec![(0.5, 1.5), (0.0, 1.0)]).unwrap();
        assert!(c.restrict(&outside).is_err());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let r = ConnectionForm::new(
            OpenBox::unit(1),
            2,
            vec![Arc::new(|_: &[f64]| DMatrix::zeros(1, 1))],
            Smoothness::C0,
        );
        assert!(r.is_err());
    }
}
