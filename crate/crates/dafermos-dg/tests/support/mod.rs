//! Shared helpers for the integration suites: an independently built
//! finite-subcell discretization of a single DG cell, used to cross-check the
//! closed-form reference derivative against its defining limit.

use dafermos_dg::law::{NumericalFlux, ScalarLaw};
use dafermos_dg::quadrature::gauss_legendre;
use dafermos_dg::{RefDerivative, ScaledBasis};
use nalgebra::DVector;

/// Projects the derivative of a first-order subcell finite-volume scheme onto
/// the cell's polynomial space.
///
/// The cell polynomial `u` is averaged over `n_sub` equal subcells; interior
/// subcell interfaces get the local Lax–Friedrichs flux of the adjacent
/// means, while the two end fluxes stay frozen at the prescribed values
/// `fstar_left` / `fstar_right`. The piecewise-constant rate of change
/// `(F_k - F_{k+1}) / h` is then L2-projected onto degree-`p` polynomials by
/// solving with the physical mass matrix. As `n_sub` grows this converges to
/// the closed-form reference derivative.
pub fn subcell_projected_derivative<L: ScalarLaw>(
    u: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
    fstar_left: f64,
    fstar_right: f64,
    n_sub: usize,
) -> DVector<f64> {
    assert!(n_sub >= 2, "need at least two subcells");
    let n_nodes = sb.n_nodes();
    let quad = gauss_legendre(5).expect("5-point rule");
    let h_ref = 2.0 / n_sub as f64;
    let h_phys = sb.dx / n_sub as f64;

    // Subcell means of the polynomial, via exact quadrature per subcell.
    let mut means = vec![0.0_f64; n_sub];
    // Reference-space integrals of every cardinal over every subcell.
    let mut cardinal_int = vec![vec![0.0_f64; n_nodes]; n_sub];
    for k in 0..n_sub {
        let xi_lo = -1.0 + h_ref * k as f64;
        for (q, &xi_q) in quad.nodes.iter().enumerate() {
            let xi = xi_lo + 0.5 * h_ref * (xi_q + 1.0);
            let cards = sb.basis.eval_cardinals(xi);
            let w = 0.5 * h_ref * quad.weights[q];
            means[k] += w * cards.dot(u);
            for i in 0..n_nodes {
                cardinal_int[k][i] += w * cards[i];
            }
        }
        means[k] /= h_ref;
    }

    // Interface fluxes: frozen ends, Lax-Friedrichs interior.
    let mut fluxes = vec![0.0_f64; n_sub + 1];
    fluxes[0] = fstar_left;
    fluxes[n_sub] = fstar_right;
    for k in 1..n_sub {
        fluxes[k] = NumericalFlux::LocalLaxFriedrichs
            .value(law, means[k - 1], means[k])
            .expect("finite subcell means");
    }

    // Weak load vector b_i = sum_k d_k * integral of cardinal i over subcell k
    // (physical measure), then the mass solve.
    let mut b = DVector::zeros(n_nodes);
    for k in 0..n_sub {
        let d_k = (fluxes[k] - fluxes[k + 1]) / h_phys;
        for i in 0..n_nodes {
            b[i] += d_k * (sb.dx / 2.0) * cardinal_int[k][i];
        }
    }
    sb.solve_mass(&b)
}

/// Nodal coefficients of the full closed-form reference derivative: the mass
/// projection of the regular part plus the already-projected boundary part.
pub fn projected_reference(refd: &RefDerivative, sb: &ScaledBasis) -> DVector<f64> {
    let n_nodes = sb.n_nodes();
    let mut b = DVector::zeros(n_nodes);
    for (q, &w) in sb.err_weights.iter().enumerate() {
        for i in 0..n_nodes {
            b[i] += w * sb.basis.err_vals[(q, i)] * refd.regular[q];
        }
    }
    sb.solve_mass(&b) + &refd.singular
}
