//! Gauss–Legendre and Gauss–Lobatto quadrature on the reference interval [-1, 1].
//!
//! Nodes are found root by root with Newton's method on the relevant Legendre
//! polynomial (or its derivative) starting from Chebyshev guesses, then the
//! rule is symmetrized so that nodes and weights are exactly mirror-symmetric
//! about the origin.

use crate::error::SolverError;

/// Convergence tolerance for the Newton root searches.
const NEWTON_TOL: f64 = 1e-15;

/// Iteration cap for the Newton root searches; hitting it is reported as an error.
const NEWTON_MAX_ITER: usize = 100;

/// A quadrature rule on [-1, 1]: ascending nodes with matching positive weights.
#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Quadrature nodes in ascending order.
    pub nodes: Vec<f64>,
    /// Quadrature weights; positive and summing to 2.
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Number of points in the rule.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True if the rule has no points (never the case for a constructed rule).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`: `sum_i w_i f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates the Legendre polynomial `P_n` and its derivative at `x`.
///
/// The derivative is carried through the three-term recurrence so the value is
/// well defined at the interval endpoints too.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut d_prev) = (1.0, 0.0);
    let (mut p, mut d) = (x, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = ((2.0 * kf + 1.0) * (p + x * d) - kf * d_prev) / (kf + 1.0);
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// Enforces exact mirror symmetry `x_i = -x_{n-1-i}`.
///
/// The analytic rules are symmetric; this removes the last bits of round-off
/// asymmetry so downstream operators come out bit-symmetric as well.
fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let half = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -half;
        nodes[n - 1 - i] = half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule, SolverError> {
    if n < 1 {
        return Err(SolverError::QuadratureOrder {
            rule: "Gauss-Legendre",
            n,
            min: 1,
        });
    }
    let mut nodes = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root (descending in x).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_deriv(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::NewtonDivergence {
                context: "Gauss-Legendre nodes",
                max_iter: NEWTON_MAX_ITER,
            });
        }
        nodes[n - 1 - i] = x;
    }
    symmetrize(&mut nodes);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, dp) = legendre_with_deriv(n, x);
            2.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(QuadRule { nodes, weights })
}

/// `n`-point Gauss–Lobatto rule (`n >= 2`): both endpoints are nodes and the
/// rule is exact for polynomials of degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Result<QuadRule, SolverError> {
    if n < 2 {
        return Err(SolverError::QuadratureOrder {
            rule: "Gauss-Lobatto",
            n,
            min: 2,
        });
    }
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    // Interior nodes are the roots of P_m'.
    for (i, node) in nodes.iter_mut().enumerate().take(m).skip(1) {
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_deriv(m, x);
            // Second derivative from the Legendre differential equation:
            // (1 - x^2) P_m'' = 2 x P_m' - m (m + 1) P_m.
            let ddp = (2.0 * x * dp - (m as f64) * (m as f64 + 1.0) * p) / (1.0 - x * x);
            let step = dp / ddp;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::NewtonDivergence {
                context: "Gauss-Lobatto nodes",
                max_iter: NEWTON_MAX_ITER,
            });
        }
        *node = x;
    }
    symmetrize(&mut nodes);
    let scale = 2.0 / ((n * m) as f64);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_with_deriv(m, x);
            scale / (p * p)
        })
        .collect();
    Ok(QuadRule { nodes, weights })
}
