//! Error type shared by operator assembly, state handling, and time integration.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("{rule} quadrature needs at least {min} points, got {n}")]
    QuadratureOrder {
        rule: &'static str,
        n: usize,
        min: usize,
    },

    #[error("Newton iteration for {context} did not converge within {max_iter} iterations")]
    NewtonDivergence {
        context: &'static str,
        max_iter: usize,
    },

    #[error("polynomial order must be at least {min}, got {got}")]
    BadOrder { got: usize, min: usize },

    #[error("mass matrix is not positive definite at order {order}")]
    MassNotSpd { order: usize },

    #[error("cell length must be positive and finite, got {0}")]
    BadCellLength(f64),

    #[error("mesh needs x_max > x_min and at least one cell")]
    BadMesh,

    #[error("state has {state} nodes per cell but the basis has {basis}")]
    OrderMismatch { state: usize, basis: usize },

    #[error("state has {state} cells but the mesh has {mesh}")]
    CellCountMismatch { state: usize, mesh: usize },

    #[error("non-finite value produced during {context}")]
    NonFinite { context: &'static str },

    #[error("solution magnitude {max_abs:.3e} exceeds the blow-up threshold {threshold:.3e}")]
    MagnitudeBlowup { max_abs: f64, threshold: f64 },

    #[error("wave-speed scan needs at least one state value")]
    EmptyStates,

    #[error("exact Riemann flux needs the law's sonic state for a transonic wave")]
    SonicStateUnavailable,

    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),

    #[error("exceeded the step limit of {0} before reaching the final time")]
    StepLimit(usize),

    #[error("no classical solution at x = {x}, t = {t}: characteristic equation has no unique root")]
    NoClassicalSolution { x: f64, t: f64 },

    #[error("invalid {name}: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },
}
