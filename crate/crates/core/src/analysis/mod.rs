//! Optimization over settings and the comparison diagnostics.

pub mod cglmp;
pub mod entropy;
pub mod optimize;
pub mod simplex;
pub mod squeezing;
pub mod surface;

pub use cglmp::{cglmp_value, default_outcome_map, optimize_cglmp, CglmpResult};
pub use entropy::projected_entropy;
pub use optimize::{optimize_bell, optimize_bell_with, optimize_postselected, OptimizationResult, OptimizeOptions};
pub use squeezing::{squeezing_parameter, squeezing_parameter_along, SpinComponent};
pub use surface::{bell_surface, Surface, SurfaceSpec};
