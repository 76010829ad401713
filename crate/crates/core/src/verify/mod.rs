//! Independent checks of assembled initial data: constraint residuals, mass,
//! decay rates and the tail limit.

mod check;
mod decay;
mod mass;
mod residuals;

pub use check::{check_solution, check_solution_with, CheckTolerances, SolutionCheck};
pub use decay::{decay_exponents, tail_limit_check, DecayReport, DecayWindows, TailLimit};
pub use mass::{
    adm_mass, adm_mass_radial, adm_mass_surface, conventions_from_flux, conventions_from_limit,
    default_radii, sphere_area, surface_flux, MassReport, MassValue, RadialMass, SurfaceMass,
    DIVERGENCE_SLOPE,
};
pub use residuals::{
    default_points, hamiltonian_residual, momentum_residual, refinement_order, residual_report,
    sample_points, ResidualReport, H_SCALE,
};

#[cfg(test)]
mod tests;
