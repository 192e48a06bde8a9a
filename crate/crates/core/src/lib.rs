//! Numerical experiments for the two-dimensional obstacle problem
//! `Δu = χ_{u>0}, u >= 0`: paraboloid solutions built from a normalized
//! Newtonian potential, homogeneous thin-obstacle profiles, a projected SOR
//! solver, monotonicity functionals and blow-down diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowdown;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod potential;
pub mod quadrature;
pub mod solver;
pub mod thin;

pub use blowdown::{
    alpha_estimate, blowdown_report, gamma_match, region_decomposition, rescale, sliding_phi, BlowdownEstimate,
    RegionDecomposition, RescaleKind, ALPHA_1,
};
pub use error::{LabError, Result};
pub use functionals::{
    acf_modified, acf_sector_triple, almgren, almgren_profile, boundary_l2, dirichlet_energy, doubling_ratio,
    hprime_identity_gap, matching_functional, FunctionalConfig, RadialProfile, SectorMode,
};
pub use geometry::{
    bilinear_sample, circle_rule, halfspace_poly, halfspace_poly_grad, paraboloid_contains, CircleRule, FieldSampler,
    FnSampler, GradFnSampler, Grid2, Paraboloid, Point2, ScalarField, Vector2,
};
pub use potential::{
    grad_kernel_g, growth_exponent_fit, kernel_g, potential_gradient, potential_paraboloid, potential_with_gradient,
    tail_bound, u_paraboloid, ParaboloidDeviation, ParaboloidSolution, PotentialConfig, PotentialSampler,
};
pub use solver::{
    coincidence_growth_check, extract_mask, solve_obstacle, solve_obstacle_from, CoincidenceMask, SolverConfig,
    SolverReport,
};
pub use thin::{thin_homogeneous, vhat32, vhat32_grad, ThinKind, ThinProfile, VHat};
