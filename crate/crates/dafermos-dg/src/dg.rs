//! Periodic 1D mesh, the nodal DG state, and the baseline DG right-hand side.

use nalgebra::DVector;

use crate::basis::{Basis, ScaledBasis};
use crate::error::SolverError;
use crate::law::{NumericalFlux, ScalarLaw};

/// Uniform periodic mesh on `[x_min, x_max)`.
#[derive(Debug, Clone, Copy)]
pub struct Mesh1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

impl Mesh1D {
    /// Builds a uniform periodic mesh with `n_cells >= 1` cells.
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Mesh1D, SolverError> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) || n_cells == 0 {
            return Err(SolverError::BadMesh);
        }
        Ok(Mesh1D {
            x_min,
            x_max,
            n_cells,
        })
    }

    /// Cell width.
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    /// Left edge of cell `j`.
    pub fn cell_left(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    /// Center of cell `j`.
    pub fn cell_center(&self, j: usize) -> f64 {
        self.cell_left(j) + 0.5 * self.dx()
    }

    /// Physical position of reference coordinate `xi` in cell `j`.
    pub fn map_from_reference(&self, j: usize, xi: f64) -> f64 {
        self.cell_center(j) + 0.5 * self.dx() * xi
    }
}

/// Nodal DG state: one coefficient vector per cell, values at the mapped
/// Gauss–Lobatto nodes.
#[derive(Debug, Clone)]
pub struct DgState {
    pub mesh: Mesh1D,
    pub cells: Vec<DVector<f64>>,
}

impl DgState {
    /// Number of cells.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Polynomial degree per cell.
    pub fn order(&self) -> usize {
        self.cells[0].len() - 1
    }

    /// Largest nodal magnitude over all cells.
    pub fn max_abs(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// True when every nodal value is finite.
    pub fn is_finite(&self) -> bool {
        self.cells.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Iterator over all nodal values.
    pub fn nodal_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().flat_map(|c| c.iter().copied())
    }

    /// Returns `self + sum_i a_i * v_i` cellwise, for Runge–Kutta stages.
    pub fn with_increments(&self, terms: &[(f64, &[DVector<f64>])]) -> DgState {
        let mut cells = self.cells.clone();
        for (a, v) in terms {
            for (c, dv) in cells.iter_mut().zip(v.iter()) {
                c.axpy(*a, dv, 1.0);
            }
        }
        DgState {
            mesh: self.mesh,
            cells,
        }
    }
}

/// Interpolates an initial condition at the mapped collocation nodes.
pub fn interpolate_ic<F: Fn(f64) -> f64>(
    mesh: &Mesh1D,
    basis: &Basis,
    ic: F,
) -> Result<DgState, SolverError> {
    let mut cells = Vec::with_capacity(mesh.n_cells);
    for j in 0..mesh.n_cells {
        let values = DVector::from_fn(basis.n_nodes(), |k, _| {
            ic(mesh.map_from_reference(j, basis.nodes[k]))
        });
        if !values.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite {
                context: "initial-condition sampling",
            });
        }
        cells.push(values);
    }
    Ok(DgState { mesh: *mesh, cells })
}

/// Output of one DG right-hand-side evaluation.
#[derive(Debug, Clone)]
pub struct DgRhs {
    /// Nodal time derivative per cell.
    pub derivative: Vec<DVector<f64>>,
    /// Interface flux values; entry `i` is the flux at the left edge of cell
    /// `i` (periodic, so there are exactly `n_cells` interfaces).
    pub interface_fluxes: Vec<f64>,
}

impl DgRhs {
    /// Flux at the left edge of cell `j`.
    pub fn flux_left(&self, j: usize) -> f64 {
        self.interface_fluxes[j]
    }

    /// Flux at the right edge of cell `j`.
    pub fn flux_right(&self, j: usize) -> f64 {
        self.interface_fluxes[(j + 1) % self.interface_fluxes.len()]
    }
}

/// Checks the state against the scaled basis before an operator application.
pub fn check_state(state: &DgState, sb: &ScaledBasis) -> Result<(), SolverError> {
    if state.cells.is_empty() {
        return Err(SolverError::BadMesh);
    }
    if state.cells[0].len() != sb.n_nodes() {
        return Err(SolverError::OrderMismatch {
            state: state.cells[0].len(),
            basis: sb.n_nodes(),
        });
    }
    if state.n_cells() != state.mesh.n_cells {
        return Err(SolverError::CellCountMismatch {
            state: state.n_cells(),
            mesh: state.mesh.n_cells,
        });
    }
    Ok(())
}

/// Boundary traces `(u_left, u_right)` at each periodic interface; entry `i`
/// is the interface at the left edge of cell `i`, so `u_left` is the right
/// trace of cell `i - 1` and `u_right` the left trace of cell `i`.
pub fn interface_states(state: &DgState, sb: &ScaledBasis) -> Vec<(f64, f64)> {
    let n = state.n_cells();
    let basis = &sb.basis;
    (0..n)
        .map(|i| {
            let ul = state.cells[(i + n - 1) % n].dot(&basis.right_vals);
            let ur = state.cells[i].dot(&basis.left_vals);
            (ul, ur)
        })
        .collect()
}

/// Baseline DG right-hand side with the given interface flux:
/// `M du/dt = S f(u) - (r f*_r - l f*_l)` per cell, periodic coupling.
pub fn dg_rhs<L: ScalarLaw>(
    state: &DgState,
    sb: &ScaledBasis,
    law: &L,
    flux: NumericalFlux,
) -> Result<DgRhs, SolverError> {
    check_state(state, sb)?;
    let n = state.n_cells();
    let basis = &sb.basis;

    let mut interface_fluxes = Vec::with_capacity(n);
    for (ul, ur) in interface_states(state, sb) {
        interface_fluxes.push(flux.value(law, ul, ur)?);
    }

    let mut derivative = Vec::with_capacity(n);
    for j in 0..n {
        let u = &state.cells[j];
        let f_nodal = u.map(|v| law.flux(v));
        let fl = interface_fluxes[j];
        let fr = interface_fluxes[(j + 1) % n];
        let mut rhs = &basis.stiffness * f_nodal;
        rhs.axpy(-fr, &basis.right_vals, 1.0);
        rhs.axpy(fl, &basis.left_vals, 1.0);
        derivative.push(sb.solve_mass(&rhs));
    }

    Ok(DgRhs {
        derivative,
        interface_fluxes,
    })
}

/// Cell average of cell `j`.
pub fn cell_mean(state: &DgState, sb: &ScaledBasis, j: usize) -> f64 {
    sb.mean(&state.cells[j])
}

/// Total integral of the state over the domain.
pub fn total_mass(state: &DgState, sb: &ScaledBasis) -> f64 {
    state.cells.iter().map(|u| sb.integral(u)).sum()
}
