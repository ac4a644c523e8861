//! Grid potential theory: scalar/vector fields, measures, Dirichlet Poisson
//! solves, gradients and mollification.

mod field;
mod interp;
mod mollify;
mod poisson;

pub use field::{host_cell, MeasureDensity, ScalarField, VectorField};
pub use interp::{gradient_at_boundary, sample_scalar, sample_vector};
pub use mollify::{mollify_density, mollify_field};
pub use poisson::{gradient, solve_dirichlet_poisson, DirichletLaplacian, PoissonOptions};

#[cfg(test)]
mod tests;
