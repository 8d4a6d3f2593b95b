use std::sync::OnceLock;

use crate::ode::simpson;

/// Panels of the cached primitive behind [`step_g`].
pub const DEFAULT_STEP_PANELS: usize = 4096;

/// `e^{-1/(1-x^2)}` on `(-1, 1)`, zero elsewhere.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Derivative of [`bump`].
pub fn bump_derivative(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let d = 1.0 - x * x;
        bump(x) * (-2.0 * x / (d * d))
    } else {
        0.0
    }
}

/// `g(x) = g~(2x + 1)` with `g~(u) = int_{-1}^u b / int_{-1}^1 b`, both integrals
/// by composite Simpson with `steps` panels on `[-1, 1]` and the same panel width
/// on `[-1, u]`. Equals 0 for `x <= -1`, 1 for `x >= 0`.
pub fn smooth_step(x: f64, steps: usize) -> f64 {
    let u = 2.0 * x + 1.0;
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let partial = ((steps as f64 * (u + 1.0) / 2.0).round() as usize).max(2);
    simpson(bump, -1.0, u, partial) / simpson(bump, -1.0, 1.0, steps)
}

/// Cumulative Simpson table of `b` on `[-1, 1]`, normalised to end at 1.
#[derive(Debug, Clone)]
pub struct SmoothStep {
    h: f64,
    cumulative: Vec<f64>,
    total: f64,
}

impl SmoothStep {
    pub fn new(panels: usize) -> Self {
        let panels = panels.max(16);
        let h = 2.0 / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..panels {
            let a = -1.0 + k as f64 * h;
            acc += simpson(bump, a, a + h, 2);
            cumulative.push(acc);
        }
        Self {
            h,
            cumulative,
            total: acc,
        }
    }

    /// `g~(u)`: 0 for `u <= -1`, 1 for `u >= 1`.
    pub fn normalized_primitive(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let k = (((u + 1.0) / self.h) as usize).min(self.cumulative.len() - 2);
        let a = -1.0 + k as f64 * self.h;
        (self.cumulative[k] + simpson(bump, a, u, 2)) / self.total
    }

    /// Normalising constant `int_{-1}^1 b`.
    pub fn total(&self) -> f64 {
        self.total
    }
}

fn table() -> &'static SmoothStep {
    static TABLE: OnceLock<SmoothStep> = OnceLock::new();
    TABLE.get_or_init(|| SmoothStep::new(DEFAULT_STEP_PANELS))
}

/// `g`: 0 for `x < -1`, 1 for `x > 0`, smooth and increasing in between.
pub fn step_g(x: f64) -> f64 {
    table().normalized_primitive(2.0 * x + 1.0)
}

pub fn step_g_derivative(x: f64) -> f64 {
    2.0 * bump(2.0 * x + 1.0) / table().total()
}

/// `h(x) = g(-x)`: 1 for `x < 0`, 0 for `x > 1`.
pub fn step_h(x: f64) -> f64 {
    step_g(-x)
}

pub fn step_h_derivative(x: f64) -> f64 {
    -step_g_derivative(-x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert_eq!(bump(0.0), (-1.0f64).exp());
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.0), 0.0);
        assert!((bump(0.5) - (-4.0f64 / 3.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        for &x in &[-0.7, -0.2, 0.0, 0.4, 0.9] {
            let h = 1e-6;
            let q = (bump(x + h) - bump(x - h)) / (2.0 * h);
            assert!((q - bump_derivative(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn step_endpoints_and_midpoint() {
        assert_eq!(smooth_step(-2.0, 64), 0.0);
        assert_eq!(smooth_step(1.0, 64), 1.0);
        assert!((smooth_step(-0.5, 256) - 0.5).abs() < 1e-12);
        assert!((step_g(-0.5) - 0.5).abs() < 1e-12);
        let v = smooth_step(-0.25, 1024);
        assert!(v > 0.5 && v < 1.0);
        assert!((v - (1.0 - smooth_step(-0.75, 1024))).abs() < 1e-12);
    }

    #[test]
    fn table_agrees_with_direct_quadrature() {
        for k in 0..41 {
            let x = -1.0 + k as f64 / 40.0;
            assert!((step_g(x) - smooth_step(x, 1 << 14)).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn companion_step_is_reflected() {
        assert_eq!(step_h(-0.3), 1.0);
        assert_eq!(step_h(1.2), 0.0);
        assert_eq!(step_h(0.4), step_g(-0.4));
        let h = 1e-6;
        let q = (step_h(0.3 + h) - step_h(0.3 - h)) / (2.0 * h);
        assert!((q - step_h_derivative(0.3)).abs() < 1e-7);
    }
}
