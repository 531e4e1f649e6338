//! One-dimensional nodal discontinuous Galerkin solver for scalar conservation
//! laws with an entropy-rate shock correction, plus a first-order Godunov
//! reference solver and batch experiment drivers.
//!
//! The DG scheme collocates on Gauss–Lobatto nodes with exactly integrated
//! mass and stiffness matrices. Shock robustness comes from a per-cell
//! correction that pushes each cell's rate of change toward the steepest
//! admissible entropy descent: the correction magnitude is calibrated by
//! consistency-error estimators measured against the limit of an ever-finer
//! subcell finite-volume discretization, so it vanishes with the local
//! resolution error in smooth regions but dissipates at shocks. The correction
//! comes in two forms: applied to every right-hand-side evaluation
//! (semidiscrete) or once per completed Runge–Kutta step (fully discrete).

pub mod basis;
pub mod cli;
pub mod correction;
pub mod dg;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod fv;
pub mod law;
pub mod quadrature;
pub mod stepper;

pub use basis::{Basis, ScaledBasis};
pub use correction::{
    cell_entropy_violation, ddg_rhs, descent_direction, epsilon_semidiscrete,
    interface_entropy_fluxes, CorrectedRhs, CorrectionReport, DescentDirection,
};
pub use dg::{cell_mean, dg_rhs, interpolate_ic, total_mass, DgRhs, DgState, Mesh1D};
pub use diagnostics::{
    blowup_scan, burgers_smooth_exact, convergence_study, eoc, error_norms, total_entropy_dg,
    BlowupRow, ConvergenceTable, EntropyTrace,
};
pub use driver::{
    ic_rarefaction, ic_sine_shock, ic_smooth, run_dg, DgRunConfig, DgRunResult, DgScheme,
    ViolationTrace,
};
pub use error::SolverError;
pub use estimator::{
    entropy_interp_gap, estimate_errors, reference_derivative, regular_part,
    singular_projection, ErrorEstimate, RefDerivative,
};
pub use fv::{fv_rhs, fv_solve, fv_total_entropy, FvRunResult, FvState};
pub use law::{max_wave_speed, Burgers, NumericalFlux, ScalarLaw};
pub use quadrature::{gauss_legendre, gauss_lobatto, QuadRule};
pub use stepper::{
    curvature_bound, discrete_delta, drkdg_step, entropy_descent_discrete, ssprk33_step,
    CellCorrection, DescentParams, StageRecord,
};
