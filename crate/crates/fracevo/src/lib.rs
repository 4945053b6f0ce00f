//! Distributed-order fractional evolution equations in double precision:
//! Laplace symbols, Volterra kernels, contour inversion, and four
//! cross-validating solvers for u' (distributed-order in time) = A u with a
//! finite-dimensional generator A.

pub mod error;
pub mod generators;
pub mod kernels;
pub mod laplace;
mod quad;
pub mod solvers;
pub mod special;
pub mod symbols;

pub use error::{Error, Result};
pub use generators::{
    eigenvalues, hille_yosida_check, resolvent_apply, semigroup_apply, Generator, HyReport,
};
pub use kernels::{
    cm_check, convolution_identity_check, k1_eval, k1_spectral_density,
    k1_spectral_quadrature, k2_eval, CmReport, KernelId,
};
pub use laplace::{invert_scalar, invert_vector, ContourSpec};
pub use solvers::{
    density_contour, h_derivative_apply, postwidder_coeffs, solve_postwidder, solve_resolvent,
    solve_subordination, solve_volterra, subordination_density, subordination_grid, Method,
    PWTable, Trajectory,
};
pub use special::{gamma, mittag_leffler, recip_gamma, MLParams, MlEval};
pub use symbols::{
    g_eval, g_jet, h_eval, sector_angle_check, validate, Diagnostic, Jet, ProblemKind,
    SectorReport, Severity, WeightSpec,
};
