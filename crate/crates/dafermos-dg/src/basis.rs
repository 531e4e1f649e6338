//! Nodal Lagrange basis on Gauss–Lobatto points.
//!
//! The basis bundles everything the solver needs per polynomial order: the
//! collocation nodes, the exactly integrated mass and stiffness matrices (via
//! a Gauss–Legendre rule of matching strength, no lumping), the nodal
//! differentiation matrix, boundary extraction vectors, and tabulations of the
//! cardinal functions on the auxiliary `p + 2`-point Gauss–Legendre rule used
//! by the consistency-error estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::SolverError;
use crate::law::ScalarLaw;
use crate::quadrature::{gauss_legendre, gauss_lobatto, QuadRule};

/// Distance below which an evaluation point is treated as one of the nodes.
const NODE_SNAP_TOL: f64 = 1e-14;

/// Reference-cell operators for the nodal basis of degree `order` on [-1, 1].
#[derive(Debug, Clone)]
pub struct Basis {
    /// Polynomial degree p.
    pub order: usize,
    /// The p + 1 Gauss–Lobatto collocation nodes.
    pub nodes: DVector<f64>,
    /// Gauss–Lobatto quadrature weights attached to the nodes.
    pub node_weights: DVector<f64>,
    /// Mass matrix `M_kl = ∫ φ_k φ_l`, integrated exactly.
    pub mass: DMatrix<f64>,
    /// Stiffness matrix `S_kl = ∫ φ_k' φ_l`, integrated exactly.
    pub stiffness: DMatrix<f64>,
    /// Differentiation matrix `D_ij = φ_j'(x_i)`.
    pub diff: DMatrix<f64>,
    /// Cardinal values at the left endpoint, `φ_k(-1)`.
    pub left_vals: DVector<f64>,
    /// Cardinal values at the right endpoint, `φ_k(+1)`.
    pub right_vals: DVector<f64>,
    /// Auxiliary (p + 2)-point Gauss–Legendre rule for error estimation.
    pub err_quad: QuadRule,
    /// Cardinal values at the auxiliary nodes, shape (p + 2) x (p + 1).
    pub err_vals: DMatrix<f64>,
    /// Cardinal derivatives at the auxiliary nodes (reference coordinates).
    pub err_derivs: DMatrix<f64>,
    /// Barycentric weights of the node set.
    bary: DVector<f64>,
    /// Cholesky factor of the reference mass matrix.
    mass_chol: Cholesky<f64, Dyn>,
}

impl Basis {
    /// Builds the operator bundle for polynomial degree `order >= 1`.
    pub fn new(order: usize) -> Result<Basis, SolverError> {
        if order < 1 {
            return Err(SolverError::BadOrder { got: order, min: 1 });
        }
        let n = order + 1;
        let node_rule = gauss_lobatto(n)?;
        let nodes = DVector::from_vec(node_rule.nodes.clone());
        let node_weights = DVector::from_vec(node_rule.weights.clone());

        let bary = barycentric_weights(&nodes);
        let diff = differentiation_matrix(&nodes, &bary);

        // Volume quadrature: n-point Gauss-Legendre is exact through degree
        // 2n - 1 = 2p + 1, enough for both the mass (2p) and stiffness
        // (2p - 1) integrands.
        let vol_quad = gauss_legendre(n)?;
        let vals = tabulate_cardinals(&nodes, &bary, &vol_quad.nodes);
        let dvals = &vals * &diff;
        let w = DMatrix::from_diagonal(&DVector::from_vec(vol_quad.weights.clone()));
        let mut mass = vals.transpose() * &w * &vals;
        // Symmetrize to remove round-off skew before factorization.
        mass = 0.5 * (&mass + mass.transpose());
        let stiffness = dvals.transpose() * &w * &vals;

        let left_vals = eval_cardinals_impl(&nodes, &bary, -1.0);
        let right_vals = eval_cardinals_impl(&nodes, &bary, 1.0);

        let err_quad = gauss_legendre(n + 1)?;
        let err_vals = tabulate_cardinals(&nodes, &bary, &err_quad.nodes);
        // φ_j' has degree p - 1, so interpolating its nodal values (column j
        // of D) reproduces it exactly at the auxiliary nodes.
        let err_derivs = &err_vals * &diff;

        let mass_chol =
            Cholesky::new(mass.clone()).ok_or(SolverError::MassNotSpd { order })?;

        Ok(Basis {
            order,
            nodes,
            node_weights,
            mass,
            stiffness,
            diff,
            left_vals,
            right_vals,
            err_quad,
            err_vals,
            err_derivs,
            bary,
            mass_chol,
        })
    }

    /// Number of nodes per cell, p + 1.
    pub fn n_nodes(&self) -> usize {
        self.order + 1
    }

    /// Evaluates all cardinal functions at a reference coordinate `xi`.
    pub fn eval_cardinals(&self, xi: f64) -> DVector<f64> {
        eval_cardinals_impl(&self.nodes, &self.bary, xi)
    }

    /// Boundary matrix `B = r r^T - l l^T` appearing in the summation-by-parts
    /// identity `S + S^T = B`.
    pub fn boundary_matrix(&self) -> DMatrix<f64> {
        &self.right_vals * self.right_vals.transpose()
            - &self.left_vals * self.left_vals.transpose()
    }

    /// Maps the reference operators onto a physical cell of length `dx`.
    pub fn scale_to_cell(&self, dx: f64) -> Result<ScaledBasis, SolverError> {
        ScaledBasis::new(self, dx)
    }
}

/// Barycentric weights `b_j = 1 / prod_{k != j} (x_j - x_k)`.
fn barycentric_weights(nodes: &DVector<f64>) -> DVector<f64> {
    let n = nodes.len();
    DVector::from_fn(n, |j, _| {
        let mut prod = 1.0;
        for k in 0..n {
            if k != j {
                prod *= nodes[j] - nodes[k];
            }
        }
        1.0 / prod
    })
}

/// Nodal differentiation matrix in barycentric form with the negative-sum
/// trick on the diagonal, so row sums vanish exactly.
fn differentiation_matrix(nodes: &DVector<f64>, bary: &DVector<f64>) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Evaluates all cardinal functions at `xi` using the second barycentric form,
/// snapping to the exact unit vector when `xi` coincides with a node.
fn eval_cardinals_impl(nodes: &DVector<f64>, bary: &DVector<f64>, xi: f64) -> DVector<f64> {
    let n = nodes.len();
    for j in 0..n {
        if (xi - nodes[j]).abs() < NODE_SNAP_TOL {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            return e;
        }
    }
    let terms = DVector::from_fn(n, |j, _| bary[j] / (xi - nodes[j]));
    let denom: f64 = terms.sum();
    terms / denom
}

/// Tabulates the cardinal functions at a list of points, one row per point.
fn tabulate_cardinals(nodes: &DVector<f64>, bary: &DVector<f64>, points: &[f64]) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(points.len(), nodes.len());
    for (q, &x) in points.iter().enumerate() {
        v.set_row(q, &eval_cardinals_impl(nodes, bary, x).transpose());
    }
    v
}

/// Reference operators mapped onto a physical cell of length `dx`.
///
/// The stiffness matrix is invariant under the affine map; the mass matrix and
/// quadrature weights pick up a factor `dx / 2` and nodal derivatives a factor
/// `2 / dx`.
#[derive(Debug, Clone)]
pub struct ScaledBasis {
    /// The underlying reference basis.
    pub basis: Basis,
    /// Physical cell length.
    pub dx: f64,
    /// Physical mass matrix `(dx / 2) M`.
    pub mass: DMatrix<f64>,
    /// Physical Gauss–Lobatto weights `(dx / 2) w`.
    pub node_weights: DVector<f64>,
    /// Physical differentiation matrix `(2 / dx) D`.
    pub diff: DMatrix<f64>,
    /// Physical weights of the auxiliary error-estimation rule.
    pub err_weights: Vec<f64>,
    /// Row sums of the physical mass matrix, i.e. `∫ φ_k` per cardinal.
    mass_row_sums: DVector<f64>,
}

impl ScaledBasis {
    /// Scales `basis` onto a cell of length `dx`.
    pub fn new(basis: &Basis, dx: f64) -> Result<ScaledBasis, SolverError> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(SolverError::BadCellLength(dx));
        }
        let half = 0.5 * dx;
        let mass = half * &basis.mass;
        let node_weights = half * &basis.node_weights;
        let diff = (2.0 / dx) * &basis.diff;
        let err_weights = basis.err_quad.weights.iter().map(|w| half * w).collect();
        let mass_row_sums = DVector::from_fn(basis.n_nodes(), |k, _| mass.row(k).sum());
        Ok(ScaledBasis {
            basis: basis.clone(),
            dx,
            mass,
            node_weights,
            diff,
            err_weights,
            mass_row_sums,
        })
    }

    /// Polynomial degree p.
    pub fn order(&self) -> usize {
        self.basis.order
    }

    /// Number of nodes per cell.
    pub fn n_nodes(&self) -> usize {
        self.basis.n_nodes()
    }

    /// Cell measure `∫ 1 = dx`.
    pub fn measure(&self) -> f64 {
        self.dx
    }

    /// L2 inner product `u^T M v` of two nodal polynomials over the cell.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.mass * v)[(0, 0)]
    }

    /// L2 norm of a nodal polynomial over the cell.
    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Integral `∫ u` of a nodal polynomial over the cell.
    pub fn integral(&self, u: &DVector<f64>) -> f64 {
        self.mass_row_sums.dot(u)
    }

    /// Cell average of a nodal polynomial.
    pub fn mean(&self, u: &DVector<f64>) -> f64 {
        self.integral(u) / self.dx
    }

    /// Solves `M_phys c = b` through the reference Cholesky factor.
    pub fn solve_mass(&self, b: &DVector<f64>) -> DVector<f64> {
        (2.0 / self.dx) * self.basis.mass_chol.solve(b)
    }

    /// Values of the nodal polynomial at the auxiliary error-quadrature nodes.
    pub fn values_at_err_nodes(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.basis.err_vals * u
    }

    /// Physical-space derivative of the nodal polynomial at the auxiliary nodes.
    pub fn derivs_at_err_nodes(&self, u: &DVector<f64>) -> DVector<f64> {
        (2.0 / self.dx) * (&self.basis.err_derivs * u)
    }

    /// Nodal-quadrature entropy content of a cell: `sum_k w_k U(u_k)` with the
    /// physical Gauss–Lobatto weights.
    pub fn cell_entropy<L: ScalarLaw>(&self, law: &L, u: &DVector<f64>) -> f64 {
        self.node_weights
            .iter()
            .zip(u.iter())
            .map(|(&w, &v)| w * law.entropy(v))
            .sum()
    }

    /// Evaluates the nodal polynomial at a reference coordinate `xi`.
    pub fn eval(&self, u: &DVector<f64>, xi: f64) -> f64 {
        self.basis.eval_cardinals(xi).dot(u)
    }
}
