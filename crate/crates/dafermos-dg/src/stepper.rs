//! SSPRK33 time stepping, the Simpson-rule step error estimate, and the
//! bounded per-cell entropy descent applied after each full step.

use nalgebra::DVector;

use crate::basis::ScaledBasis;
use crate::correction::mean_free_neg_gradient;
use crate::dg::{check_state, dg_rhs, DgState};
use crate::error::SolverError;
use crate::estimator::reference_derivative;
use crate::law::{NumericalFlux, ScalarLaw};

/// Snapshots and per-cell diagnostics of the three SSPRK33 stages.
#[derive(Debug, Clone)]
pub struct StageRecord {
    /// State at the start of the step.
    pub u0: DgState,
    /// State after the first (full Euler) stage.
    pub u1: DgState,
    /// State after the second (midpoint-like) stage.
    pub u2: DgState,
    /// Per-cell scalar diagnostics returned by the right-hand side at the
    /// three evaluation states `u0`, `u1`, `u2`, in that order.
    pub stage_deltas: [Vec<f64>; 3],
}

fn ensure_finite(state: &DgState) -> Result<(), SolverError> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(SolverError::NonFinite {
            context: "Runge-Kutta stage",
        })
    }
}

/// One step of the three-stage, third-order strong-stability-preserving
/// Runge–Kutta scheme. The right-hand side returns the nodal derivative per
/// cell together with an arbitrary per-cell scalar diagnostic, which is
/// collected per stage for step-error estimation.
pub fn ssprk33_step<F>(
    state: &DgState,
    dt: f64,
    mut rhs: F,
) -> Result<(DgState, StageRecord), SolverError>
where
    F: FnMut(&DgState) -> Result<(Vec<DVector<f64>>, Vec<f64>), SolverError>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::BadTimeStep(dt));
    }
    let (k0, d0) = rhs(state)?;
    let u1 = state.with_increments(&[(dt, &k0)]);
    ensure_finite(&u1)?;
    let (k1, d1) = rhs(&u1)?;
    let u2 = state.with_increments(&[(0.25 * dt, &k0), (0.25 * dt, &k1)]);
    ensure_finite(&u2)?;
    let (k2, d2) = rhs(&u2)?;
    let out = state.with_increments(&[
        (dt / 6.0, &k0),
        (dt / 6.0, &k1),
        (2.0 * dt / 3.0, &k2),
    ]);
    ensure_finite(&out)?;
    Ok((
        out,
        StageRecord {
            u0: state.clone(),
            u1,
            u2,
            stage_deltas: [d0, d1, d2],
        },
    ))
}

/// Simpson-rule combination of the three stage diagnostics into one step
/// error: `dt * (at_u0 + 4 * at_u2 + at_u1) / 6`. The second stage state is
/// the midpoint-like one, hence its weight 4.
pub fn discrete_delta(dt: f64, at_u0: f64, at_u1: f64, at_u2: f64) -> f64 {
    dt * (at_u0 + 4.0 * at_u2 + at_u1) / 6.0
}

/// Per-cell Simpson step errors for a whole stage record.
pub fn discrete_deltas(dt: f64, record: &StageRecord) -> Vec<f64> {
    let [d0, d1, d2] = &record.stage_deltas;
    d0.iter()
        .zip(d1.iter())
        .zip(d2.iter())
        .map(|((&a, &b), &c)| discrete_delta(dt, a, b, c))
        .collect()
}

/// Parameters of the bounded per-cell entropy descent.
#[derive(Debug, Clone, Copy)]
pub struct DescentParams {
    /// Number of gradient iterations per cell and step.
    pub iterations: usize,
    /// Nodal magnitude above which the run is declared blown up.
    pub blowup_threshold: f64,
}

impl Default for DescentParams {
    fn default() -> Self {
        DescentParams {
            iterations: 3,
            blowup_threshold: 1e6,
        }
    }
}

/// Curvature bound of the nodal-quadrature cell entropy along `h`:
/// `max_k U''(u_k) * sum_k w_k h_k^2` with the physical Gauss–Lobatto
/// weights. This bounds the second derivative of `lambda -> E(u + lambda h)`
/// near `lambda = 0`.
pub fn curvature_bound<L: ScalarLaw>(
    u: &DVector<f64>,
    h: &DVector<f64>,
    sb: &ScaledBasis,
    law: &L,
) -> f64 {
    let max_curv = u
        .iter()
        .fold(0.0_f64, |m, &v| m.max(law.entropy_curvature(v)));
    let h_sq: f64 = sb
        .node_weights
        .iter()
        .zip(h.iter())
        .map(|(&w, &hk)| w * hk * hk)
        .sum();
    max_curv * h_sq
}

/// Audit record of the per-cell descent after one time step.
#[derive(Debug, Clone)]
pub struct CellCorrection {
    /// Step-error estimate used as the displacement budget.
    pub epsilon: f64,
    /// Cell-norm distance between the corrected and the uncorrected state.
    pub displacement: f64,
    /// Cell mean before the descent.
    pub mean_before: f64,
    /// Cell mean after the descent.
    pub mean_after: f64,
    /// Nodal-quadrature cell entropy at every descent iterate, starting with
    /// the uncorrected state.
    pub entropies: Vec<f64>,
}

/// Runs the bounded projected entropy descent on one cell: up to
/// `params.iterations` steps along the mean-free negative entropy gradient,
/// each step sized `min(epsilon / (r * |h|), 3 <U'(u), -h> / (2 L))`, so the
/// total displacement never exceeds `epsilon` and the nodal-quadrature
/// entropy never increases.
pub fn entropy_descent_discrete<L: ScalarLaw>(
    u: &DVector<f64>,
    epsilon: f64,
    sb: &ScaledBasis,
    law: &L,
    params: &DescentParams,
) -> Result<(DVector<f64>, CellCorrection), SolverError> {
    let mean_before = sb.mean(u);
    let mut v = u.clone();
    let mut entropies = vec![sb.cell_entropy(law, &v)];

    if epsilon > 0.0 {
        let r = params.iterations.max(1) as f64;
        for _ in 0..params.iterations {
            let (h, h_norm, tol) = mean_free_neg_gradient(&v, sb, law);
            if h_norm <= tol {
                break;
            }
            let budget = epsilon / (r * h_norm);
            let curvature = curvature_bound(&v, &h, sb, law);
            let w = v.map(|x| law.entropy_var(x));
            let descent_rate = -sb.inner(&w, &h);
            let lambda = if curvature > 0.0 {
                budget.min(1.5 * descent_rate / curvature)
            } else {
                budget
            };
            v.axpy(lambda, &h, 1.0);
            if !v.iter().all(|x| x.is_finite()) {
                return Err(SolverError::NonFinite {
                    context: "entropy descent iterate",
                });
            }
            let max_abs = v.amax();
            if max_abs > params.blowup_threshold {
                return Err(SolverError::MagnitudeBlowup {
                    max_abs,
                    threshold: params.blowup_threshold,
                });
            }
            entropies.push(sb.cell_entropy(law, &v));
        }
    }

    let displacement = sb.norm(&(&v - u));
    let mean_after = sb.mean(&v);
    Ok((
        v,
        CellCorrection {
            epsilon,
            displacement,
            mean_before,
            mean_after,
            entropies,
        },
    ))
}

/// One fully discrete corrected step: an SSPRK33 step with the baseline DG
/// right-hand side, the Simpson step-error estimate per cell, and the bounded
/// entropy descent applied cellwise to the stepped state.
pub fn drkdg_step<L: ScalarLaw>(
    state: &DgState,
    dt: f64,
    sb: &ScaledBasis,
    law: &L,
    flux: NumericalFlux,
    params: &DescentParams,
) -> Result<(DgState, Vec<CellCorrection>), SolverError> {
    check_state(state, sb)?;
    let rhs = |s: &DgState| -> Result<(Vec<DVector<f64>>, Vec<f64>), SolverError> {
        let base = dg_rhs(s, sb, law, flux)?;
        let deltas = (0..s.n_cells())
            .map(|j| {
                let refd = reference_derivative(
                    &s.cells[j],
                    sb,
                    law,
                    base.flux_left(j),
                    base.flux_right(j),
                );
                refd.distance(&base.derivative[j], sb)
            })
            .collect();
        Ok((base.derivative, deltas))
    };
    let (stepped, record) = ssprk33_step(state, dt, rhs)?;
    let epsilons = discrete_deltas(dt, &record);

    let mut cells = Vec::with_capacity(stepped.n_cells());
    let mut reports = Vec::with_capacity(stepped.n_cells());
    for (cell, eps) in stepped.cells.iter().zip(epsilons) {
        let (corrected, report) = entropy_descent_discrete(cell, eps, sb, law, params)?;
        cells.push(corrected);
        reports.push(report);
    }
    Ok((
        DgState {
            mesh: stepped.mesh,
            cells,
        },
        reports,
    ))
}
