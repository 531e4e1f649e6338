//! Measurement layer: total entropy, error norms and convergence orders,
//! the characteristics-based exact solution for smooth Burgers flow,
//! entropy-violation traces, and blow-up scans.

use crate::basis::{Basis, ScaledBasis};
use crate::dg::{DgState, Mesh1D};
use crate::driver::{run_dg, DgRunConfig, DgScheme, ViolationTrace};
use crate::error::SolverError;
use crate::law::{max_wave_speed, NumericalFlux, ScalarLaw};

/// Total entropy of a DG state: `sum_cells sum_k w_k U(u_k)` with the
/// physical Gauss–Lobatto weights.
pub fn total_entropy_dg<L: ScalarLaw>(state: &DgState, sb: &ScaledBasis, law: &L) -> f64 {
    state.cells.iter().map(|u| sb.cell_entropy(law, u)).sum()
}

/// Global `L1` and `L2` errors of the state against a reference function,
/// accumulated with the per-cell auxiliary Gauss–Legendre rule.
pub fn error_norms<E: Fn(f64) -> f64>(
    state: &DgState,
    sb: &ScaledBasis,
    exact: E,
) -> (f64, f64) {
    try_error_norms(state, sb, |x| Ok(exact(x))).expect("infallible reference")
}

/// `error_norms` with a fallible reference function.
pub fn try_error_norms<E: Fn(f64) -> Result<f64, SolverError>>(
    state: &DgState,
    sb: &ScaledBasis,
    exact: E,
) -> Result<(f64, f64), SolverError> {
    let nodes = &sb.basis.err_quad.nodes;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (j, cell) in state.cells.iter().enumerate() {
        let values = sb.values_at_err_nodes(cell);
        for (q, &xi) in nodes.iter().enumerate() {
            let x = state.mesh.map_from_reference(j, xi);
            let diff = values[q] - exact(x)?;
            l1 += sb.err_weights[q] * diff.abs();
            l2 += sb.err_weights[q] * diff * diff;
        }
    }
    Ok((l1, l2.sqrt()))
}

/// Experimental orders of convergence between consecutive grid levels:
/// `log(e_i / e_{i+1}) / log(N_{i+1} / N_i)`. A vanishing error makes the
/// order undefined and yields a NaN sentinel.
pub fn eoc(errors: &[f64], n_cells: &[usize]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(n_cells.windows(2))
        .map(|(e, n)| {
            if e[0] > 0.0 && e[1] > 0.0 {
                (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln()
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Errors and convergence orders over a sequence of grids.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub n_cells: Vec<usize>,
    pub errors_1norm: Vec<f64>,
    pub errors_2norm: Vec<f64>,
    pub eoc_1: Vec<f64>,
    pub eoc_2: Vec<f64>,
}

impl ConvergenceTable {
    /// Arithmetic mean of the `L1` convergence orders.
    pub fn mean_eoc_1(&self) -> f64 {
        mean(&self.eoc_1)
    }

    /// Arithmetic mean of the `L2` convergence orders.
    pub fn mean_eoc_2(&self) -> f64 {
        mean(&self.eoc_2)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Exact smooth Burgers solution by characteristics: solves the fixed point
/// `u = ic(x - u t)` with a bracketed secant/bisection iteration converging
/// to 1e-14. Fails with a no-classical-solution error when no bracket exists
/// or the iteration stalls (crossed characteristics).
pub fn burgers_smooth_exact<F: Fn(f64) -> f64>(
    ic: &F,
    x: f64,
    t: f64,
) -> Result<f64, SolverError> {
    if t == 0.0 {
        return Ok(ic(x));
    }
    let g = |u: f64| u - ic(x - u * t);

    let guess = ic(x);
    let mut d = 1e-2 * (1.0 + guess.abs());
    let (mut a, mut b) = loop {
        let (lo, hi) = (guess - d, guess + d);
        let (ga, gb) = (g(lo), g(hi));
        if ga == 0.0 {
            return Ok(lo);
        }
        if gb == 0.0 {
            return Ok(hi);
        }
        if ga.signum() != gb.signum() {
            break if ga < 0.0 { (lo, hi) } else { (hi, lo) };
        }
        d *= 2.0;
        if d > 1e8 {
            return Err(SolverError::NoClassicalSolution { x, t });
        }
    };

    // Invariant: g(a) < 0 < g(b). Secant proposals accelerate; bisection
    // guarantees progress.
    let mut ga = g(a);
    let mut gb = g(b);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let secant = b - gb * (b - a) / (gb - ga);
        let u = if (secant - a).signum() != (secant - b).signum() && secant.is_finite() {
            secant
        } else {
            mid
        };
        let gu = g(u);
        if gu == 0.0 || (a - b).abs() <= 1e-14 * (1.0 + u.abs()) {
            return Ok(u);
        }
        if gu < 0.0 {
            a = u;
            ga = gu;
        } else {
            b = u;
            gb = gu;
        }
    }
    Err(SolverError::NoClassicalSolution { x, t })
}

/// Runs one scheme over a grid sequence with the parabolic step rule
/// `dt = lambda * dx^2`, `lambda` fixed by matching the CFL rule on the first
/// grid, and tabulates errors against the exact reference at the final time.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<L, F, E>(
    scheme: DgScheme,
    order: usize,
    n_list: &[usize],
    cfl: f64,
    t_end: f64,
    law: &L,
    flux: NumericalFlux,
    ic: F,
    exact_at_end: E,
) -> Result<ConvergenceTable, SolverError>
where
    L: ScalarLaw,
    F: Fn(f64) -> f64 + Copy,
    E: Fn(f64) -> Result<f64, SolverError>,
{
    if n_list.len() < 2 {
        return Err(SolverError::InvalidParameter {
            name: "n_list",
            message: "a convergence study needs at least two grid levels".to_string(),
        });
    }
    let basis = Basis::new(order)?;

    let mesh0 = Mesh1D::new(0.0, 2.0, n_list[0])?;
    let state0 = crate::dg::interpolate_ic(&mesh0, &basis, ic)?;
    let c_max = max_wave_speed(law, state0.nodal_values())?;
    let p_scale = (order * order + 1) as f64;
    let dt0 = cfl * mesh0.dx() / (p_scale * c_max);
    let lambda = dt0 / (mesh0.dx() * mesh0.dx());

    let mut errors_1norm = Vec::with_capacity(n_list.len());
    let mut errors_2norm = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mesh = Mesh1D::new(0.0, 2.0, n)?;
        let sb = basis.scale_to_cell(mesh.dx())?;
        let mut cfg = DgRunConfig::new(scheme, order, n, cfl, t_end);
        cfg.fixed_dt = Some(lambda * mesh.dx() * mesh.dx());
        let out = run_dg(&mesh, law, flux, ic, &cfg)?;
        if out.blown_up {
            return Err(SolverError::NonFinite {
                context: "convergence-study run",
            });
        }
        let (e1, e2) = try_error_norms(&out.final_state, &sb, &exact_at_end)?;
        errors_1norm.push(e1);
        errors_2norm.push(e2);
    }

    let eoc_1 = eoc(&errors_1norm, n_list);
    let eoc_2 = eoc(&errors_2norm, n_list);
    Ok(ConvergenceTable {
        n_cells: n_list.to_vec(),
        errors_1norm,
        errors_2norm,
        eoc_1,
        eoc_2,
    })
}

/// One configuration of a blow-up scan and the simulation time it reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupRow {
    pub order: usize,
    pub n_cells: usize,
    pub cfl: f64,
    pub achieved_time: f64,
}

/// Runs every `(order, n_cells, cfl)` combination up to `t_max` and records
/// the reached simulation time; blow-up is data here, not an error.
#[allow(clippy::too_many_arguments)]
pub fn blowup_scan<L, F>(
    scheme: DgScheme,
    orders: &[usize],
    n_list: &[usize],
    cfl_list: &[f64],
    t_max: f64,
    law: &L,
    flux: NumericalFlux,
    ic: F,
) -> Result<Vec<BlowupRow>, SolverError>
where
    L: ScalarLaw,
    F: Fn(f64) -> f64 + Copy,
{
    let mut rows = Vec::with_capacity(orders.len() * n_list.len() * cfl_list.len());
    for &order in orders {
        for &n in n_list {
            for &cfl in cfl_list {
                let mesh = Mesh1D::new(0.0, 2.0, n)?;
                let cfg = DgRunConfig::new(scheme, order, n, cfl, t_max);
                let out = run_dg(&mesh, law, flux, ic, &cfg)?;
                rows.push(BlowupRow {
                    order,
                    n_cells: n,
                    cfl,
                    achieved_time: out.achieved_time,
                });
            }
        }
    }
    Ok(rows)
}

/// Floor applied to violation magnitudes before taking decadic logs.
pub const VIOLATION_FLOOR: f64 = 1e-18;

/// Entropy-violation trace in decadic log magnitudes, split into positive
/// and negative parts and floored for plotting-safe output.
#[derive(Debug, Clone)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub positive_log10: Vec<Vec<f64>>,
    pub negative_log10: Vec<Vec<f64>>,
}

impl EntropyTrace {
    /// Converts raw signed violations into floored log magnitudes.
    pub fn from_trace(trace: &ViolationTrace) -> EntropyTrace {
        let log_floor = |m: f64| m.max(VIOLATION_FLOOR).log10();
        EntropyTrace {
            times: trace.times.clone(),
            positive_log10: trace
                .violations
                .iter()
                .map(|row| row.iter().map(|&v| log_floor(v.max(0.0))).collect())
                .collect(),
            negative_log10: trace
                .violations
                .iter()
                .map(|row| row.iter().map(|&v| log_floor((-v).max(0.0))).collect())
                .collect(),
        }
    }
}
