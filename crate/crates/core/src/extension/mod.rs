//! Extension of parallel sections across obstacle sets: the half-slab
//! construction `s~(x_1, x') = X(x_1, x') s(a_1, x')`, its two-axis variant, the
//! grid scan for a maximal extension, and obstruction detectors.

mod detect;
mod report;
mod scan;
mod slab;

pub use detect::{detect_jump, detect_nondifferentiability, JumpReport, QuotientVerdict, QuotientTrend};
pub use scan::{maximal_extension_scan, MaximalRegion};
pub use slab::{extend_bidirectional, extend_slab};

use std::fmt;

use crate::connection::SampledSection;
use crate::sets::DEFAULT_DEPTH;

/// Numerical thresholds for an extension run.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Max-norm bound on `|s~ - s|` where `s` is known.
    pub agreement: f64,
    /// Bound on asserted covariant residuals of the extension.
    pub residual: f64,
    /// Bound on the covariant residuals of the input section off `F`.
    pub input: f64,
    /// Integrator step.
    pub step: f64,
    /// Construction depth used to decide obstacle membership.
    pub depth: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            agreement: 1e-6,
            residual: 1e-5,
            input: 1e-5,
            step: 1e-3,
            depth: DEFAULT_DEPTH,
        }
    }
}

/// Which residuals of the extension are asserted rather than only reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualPolicy {
    /// Slab axis and the axes other than the thin one always; the thin axis
    /// when the thin set is discrete, or nowhere dense with a `C^1` connection.
    Auto,
    /// Every axis, regardless of regularity.
    AssertAll,
    /// Every axis except the thin one.
    SkipThin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Extended,
    Obstructed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Extended => "extended",
            Verdict::Obstructed => "obstructed",
        })
    }
}

/// Why a run was declared obstructed.
#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    /// The extension differs from the known section.
    Disagreement { location: Vec<f64>, magnitude: f64 },
    /// An asserted residual is too large; `(h, residual)` at growing strides.
    Residual {
        axis: usize,
        location: Vec<f64>,
        sequence: Vec<(f64, f64)>,
    },
    /// One-sided limits of the section differ.
    Jump {
        location: Vec<f64>,
        axis: usize,
        below: f64,
        above: f64,
    },
    /// Difference quotients grow without bound; `(h, quotient)` pairs.
    Divergent {
        location: Vec<f64>,
        axis: usize,
        quotients: Vec<(f64, f64)>,
    },
    /// The grid scan could not extend past these obstacle nodes.
    Frontier { nodes: usize, sample: Vec<f64> },
}

/// Worst covariant residual along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisResidual {
    pub axis: usize,
    pub max: f64,
    pub location: Option<Vec<f64>>,
    pub eligible: usize,
    pub asserted: bool,
}

impl AxisResidual {
    pub fn passes(&self, tol: f64) -> bool {
        !self.asserted || self.max <= tol
    }
}

/// Outcome of an extension run.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub extended: SampledSection,
    pub residuals: Vec<AxisResidual>,
    pub agreement: f64,
    pub agreement_location: Option<Vec<f64>>,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub tolerances: Tolerances,
    /// Base column of each slab run.
    pub base: Vec<(usize, f64)>,
}

impl ExtensionReport {
    pub fn residual(&self, axis: usize) -> Option<&AxisResidual> {
        self.residuals.iter().find(|r| r.axis == axis)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.max).fold(0.0, f64::max)
    }
}
