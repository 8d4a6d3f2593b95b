//! Thin and negligible sets: Cantor-type sets, half-slab obstacles, dyadic
//! cube decompositions and grid connectivity of complements.

mod boxes;
mod cantor;
mod components;
mod dyadic;
mod obstacle;

pub use boxes::{Grid, OpenBox};
pub use cantor::{
    cantor_contains, cantor_function, exact, fat_cantor_build, CantorLikeSet, CantorVariant,
    FatSchedule, DEFAULT_DEPTH,
};
pub use components::{complement_components, label_components, Components};
pub use dyadic::{dyadic_decompose, CubeDecomposition, Domain, DyadicCube, IndicatorDomain};
pub use obstacle::{HalfSlab, ObstacleSet, SideConstraint};
