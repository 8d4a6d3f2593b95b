//! The explicit functions, connections and sections of the counterexamples,
//! and a registry of named scenarios built from them.

mod big_measure;
mod functions;
mod scenarios;

pub use big_measure::{big_measure_obstacle, BigMeasureObstacle};
pub use functions::{
    bump, bump_derivative, smooth_step, step_g, step_g_derivative, step_h, step_h_derivative, SmoothStep,
    DEFAULT_STEP_PANELS,
};
pub use scenarios::*;
