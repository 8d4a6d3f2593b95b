//! Connection forms on trivial bundles over boxes, paths, transport,
//! pullbacks and sampled sections.

mod diffeo;
mod form;
mod path;
mod section;
mod transport;

pub use diffeo::{pullback, Diffeo};
pub use form::{standard_connection, ConnectionForm, FormComponent, Smoothness};
pub use path::PiecewisePath;
pub use section::{covariant_residual, ResidualField, SampledSection};
pub(crate) use section::residual_at;
pub use transport::{parallel_transport, propagate, transport_checked, Transported};
