//! Per-cell reference derivative and consistency-error estimators.
//!
//! The reference object is the limit, as the subcell count goes to infinity,
//! of projecting a first-order finite-volume discretization of the cell (with
//! the DG interface fluxes frozen at the cell ends) onto the polynomial space.
//! It splits into a *regular* part, `-f'(u(x)) u_x(x)`, evaluated pointwise at
//! the auxiliary quadrature nodes, and a *singular* part: the projection of
//! the Dirac layers created at the cell ends wherever the interface flux
//! disagrees with the flux of the cell's own trace. Distances between the DG
//! time derivative and this reference calibrate the entropy correction.

use nalgebra::DVector;

use crate::basis::ScaledBasis;
use crate::law::ScalarLaw;

/// Reference time derivative of one cell, in split form.
#[derive(Debug, Clone)]
pub struct RefDerivative {
    /// Regular part `-f'(u) u_x` at the auxiliary quadrature nodes.
    pub regular: DVector<f64>,
    /// Nodal coefficients of the projected boundary (singular) part.
    pub singular: DVector<f64>,
    /// Flux mismatch at the left edge, `f*_l - f(u(x_l))`.
    pub mismatch_left: f64,
    /// Flux mismatch at the right edge, `f(u(x_r)) - f*_r`.
    pub mismatch_right: f64,
}

/// Regular part of the reference derivative: `-f'(u(ξ_q)) u_x(ξ_q)` at the
/// auxiliary quadrature nodes, with the physical-space derivative.
pub fn regular_part<L: ScalarLaw>(
    u: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
) -> DVector<f64> {
    let values = sb.values_at_err_nodes(u);
    let slopes = sb.derivs_at_err_nodes(u);
    DVector::from_fn(values.len(), |q, _| {
        -law.wave_speed(values[q]) * slopes[q]
    })
}

/// Projection of the boundary flux-mismatch layers onto the cell space: solves
/// `M c = l (f*_l - f(u(x_l))) + r (f(u(x_r)) - f*_r)` where `l`, `r` extract
/// the boundary traces.
pub fn singular_projection<L: ScalarLaw>(
    u: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
    fstar_left: f64,
    fstar_right: f64,
) -> DVector<f64> {
    let basis = &sb.basis;
    let trace_left = u.dot(&basis.left_vals);
    let trace_right = u.dot(&basis.right_vals);
    let mut b = DVector::zeros(sb.n_nodes());
    b.axpy(fstar_left - law.flux(trace_left), &basis.left_vals, 1.0);
    b.axpy(law.flux(trace_right) - fstar_right, &basis.right_vals, 1.0);
    sb.solve_mass(&b)
}

/// Assembles the full reference derivative of one cell.
pub fn reference_derivative<L: ScalarLaw>(
    u: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
    fstar_left: f64,
    fstar_right: f64,
) -> RefDerivative {
    let basis = &sb.basis;
    let trace_left = u.dot(&basis.left_vals);
    let trace_right = u.dot(&basis.right_vals);
    RefDerivative {
        regular: regular_part(u, sb, law),
        singular: singular_projection(u, sb, law, fstar_left, fstar_right),
        mismatch_left: fstar_left - law.flux(trace_left),
        mismatch_right: law.flux(trace_right) - fstar_right,
    }
}

impl RefDerivative {
    /// L2 distance (by the auxiliary quadrature) between a DG time derivative
    /// and this reference.
    pub fn distance(&self, dudt: &DVector<f64>, sb: &ScaledBasis) -> f64 {
        let dg_vals = sb.values_at_err_nodes(dudt);
        let sing_vals = sb.values_at_err_nodes(&self.singular);
        let mut sum = 0.0;
        for q in 0..dg_vals.len() {
            let r = dg_vals[q] - self.regular[q] - sing_vals[q];
            sum += sb.err_weights[q] * r * r;
        }
        sum.max(0.0).sqrt()
    }

    /// L1 size of the reference derivative: quadrature of `|regular|` plus the
    /// masses of the two boundary layers.
    pub fn l1(&self, sb: &ScaledBasis) -> f64 {
        let volume: f64 = self
            .regular
            .iter()
            .zip(&sb.err_weights)
            .map(|(&r, &w)| w * r.abs())
            .sum();
        volume + self.mismatch_left.abs() + self.mismatch_right.abs()
    }
}

/// Sup-norm gap, sampled at the auxiliary nodes, between the entropy variable
/// of the cell polynomial and the interpolant of the nodal entropy variables.
/// Identically zero whenever `U'` is affine (quadratic entropy).
pub fn entropy_interp_gap<L: ScalarLaw>(
    u: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
) -> f64 {
    let values = sb.values_at_err_nodes(u);
    let w_nodal = u.map(|v| law.entropy_var(v));
    let w_interp = sb.values_at_err_nodes(&w_nodal);
    let mut gap = 0.0_f64;
    for q in 0..values.len() {
        gap = gap.max((law.entropy_var(values[q]) - w_interp[q]).abs());
    }
    gap
}

/// Bundle of the three consistency-error estimators of one cell.
#[derive(Debug, Clone, Copy)]
pub struct ErrorEstimate {
    /// L2 distance between the DG derivative and the reference derivative.
    pub distance: f64,
    /// Entropy-variable interpolation gap (sup-norm sample).
    pub entropy_gap: f64,
    /// L1 size of the reference derivative.
    pub ref_l1: f64,
}

/// Computes all estimators of one cell in one pass.
pub fn estimate_errors<L: ScalarLaw>(
    u: &DVector<f64>,
    dudt: &DVector<f64>,
    refd: &RefDerivative,
    sb: &ScaledBasis,
    law: &L,
) -> ErrorEstimate {
    ErrorEstimate {
        distance: refd.distance(dudt, sb),
        entropy_gap: entropy_interp_gap(u, sb, law),
        ref_l1: refd.l1(sb),
    }
}
