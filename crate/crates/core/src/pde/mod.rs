//! Heat, Laplace and Poisson solvers on rasterized convex rings.

mod field;
mod heat;
pub mod io;
mod operator;
pub mod radial;
mod supremal;

pub use field::{ScalarField, Scheme, SpaceTimeSolution};
pub use heat::{
    make_initial_poisson, solve_heat, solve_heat_with, solve_laplace, solve_poisson, HeatParams, MAX_CG_ITERATIONS,
};
pub use operator::Operator;
pub use radial::{radial_harmonic, radial_poisson, radial_reference_heat, RadialSolution};
pub use supremal::{supremal_convolution, supremal_convolution_with, DEFAULT_LEVELS};
