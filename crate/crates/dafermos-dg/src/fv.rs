//! First-order Godunov-type finite-volume solver on fine periodic grids,
//! used as the piecewise-constant reference scheme.

use nalgebra::DVector;

use crate::dg::Mesh1D;
use crate::error::SolverError;
use crate::law::{max_wave_speed, NumericalFlux, ScalarLaw};

/// Piecewise-constant state: one mean per cell.
#[derive(Debug, Clone)]
pub struct FvState {
    pub mesh: Mesh1D,
    pub means: DVector<f64>,
}

impl FvState {
    /// Samples the initial condition at cell midpoints.
    pub fn from_ic<F: Fn(f64) -> f64>(
        mesh: &Mesh1D,
        ic: F,
    ) -> Result<FvState, SolverError> {
        let means = DVector::from_fn(mesh.n_cells, |j, _| ic(mesh.cell_center(j)));
        if !means.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite {
                context: "initial-condition sampling",
            });
        }
        Ok(FvState { mesh: *mesh, means })
    }

    /// Total integral of the state.
    pub fn total_mass(&self) -> f64 {
        self.mesh.dx() * self.means.sum()
    }
}

/// Conservative mean derivatives `(F*_j - F*_{j+1}) / dx` with periodic wrap.
pub fn fv_rhs<L: ScalarLaw>(
    state: &FvState,
    law: &L,
    flux: NumericalFlux,
) -> Result<DVector<f64>, SolverError> {
    let n = state.means.len();
    let dx = state.mesh.dx();
    let mut fluxes = Vec::with_capacity(n);
    for i in 0..n {
        let ul = state.means[(i + n - 1) % n];
        let ur = state.means[i];
        fluxes.push(flux.value(law, ul, ur)?);
    }
    Ok(DVector::from_fn(n, |j, _| {
        (fluxes[j] - fluxes[(j + 1) % n]) / dx
    }))
}

/// Total entropy of the piecewise-constant state: `sum_j dx * U(mean_j)`.
pub fn fv_total_entropy<L: ScalarLaw>(state: &FvState, law: &L) -> f64 {
    state.mesh.dx() * state.means.iter().map(|&v| law.entropy(v)).sum::<f64>()
}

/// Result of a finite-volume run.
#[derive(Debug, Clone)]
pub struct FvRunResult {
    /// `(time, means)` at each requested output time that was reached.
    pub snapshots: Vec<(f64, DVector<f64>)>,
    /// `(time, total entropy)` at each requested output time that was reached.
    pub entropy_at_outputs: Vec<(f64, f64)>,
    /// `(time, total entropy)` after every accepted step.
    pub step_entropy: Vec<(f64, f64)>,
    /// Final means (at `achieved_time`).
    pub final_means: DVector<f64>,
    /// Last simulation time reached.
    pub achieved_time: f64,
    /// True when the run stopped on a non-finite or diverging state.
    pub blown_up: bool,
}

const FV_STEP_LIMIT: usize = 200_000_000;

/// Runs the finite-volume scheme with SSPRK33 in time and a CFL-based step
/// `dt = cfl * dx / c_max` recomputed every step, hitting each output time
/// and the final time exactly by shortened steps.
pub fn fv_solve<L: ScalarLaw, F: Fn(f64) -> f64>(
    mesh: &Mesh1D,
    law: &L,
    flux: NumericalFlux,
    ic: F,
    cfl: f64,
    t_end: f64,
    output_times: &[f64],
) -> Result<FvRunResult, SolverError> {
    if !(cfl.is_finite() && cfl > 0.0 && cfl <= 1.0) {
        return Err(SolverError::InvalidParameter {
            name: "cfl",
            message: format!("must lie in (0, 1] for the finite-volume scheme, got {cfl}"),
        });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(SolverError::InvalidParameter {
            name: "t_end",
            message: format!("must be nonnegative and finite, got {t_end}"),
        });
    }

    let mut targets: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= t_end)
        .chain(std::iter::once(t_end))
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();
    let is_output = |t: f64| output_times.contains(&t);

    let mut state = FvState::from_ic(mesh, ic)?;
    let mut result = FvRunResult {
        snapshots: Vec::new(),
        entropy_at_outputs: Vec::new(),
        step_entropy: Vec::new(),
        final_means: state.means.clone(),
        achieved_time: 0.0,
        blown_up: false,
    };
    if is_output(0.0) {
        result.snapshots.push((0.0, state.means.clone()));
        result
            .entropy_at_outputs
            .push((0.0, fv_total_entropy(&state, law)));
    }

    let mut t = 0.0;
    let mut target_idx = 0;
    let mut steps = 0usize;
    while target_idx < targets.len() {
        let target = targets[target_idx];
        if t >= target {
            target_idx += 1;
            continue;
        }
        steps += 1;
        if steps > FV_STEP_LIMIT {
            return Err(SolverError::StepLimit(FV_STEP_LIMIT));
        }

        let c_max = max_wave_speed(law, state.means.iter().copied())?;
        let dt_cfl = if c_max > 0.0 {
            cfl * mesh.dx() / c_max
        } else {
            f64::INFINITY
        };
        let gap = target - t;
        let (dt, hits_target) = if dt_cfl < gap {
            (dt_cfl, false)
        } else {
            (gap, true)
        };

        let stepped = (|| -> Result<FvState, SolverError> {
            let k0 = fv_rhs(&state, law, flux)?;
            let u1 = FvState {
                mesh: state.mesh,
                means: &state.means + dt * &k0,
            };
            let k1 = fv_rhs(&u1, law, flux)?;
            let u2 = FvState {
                mesh: state.mesh,
                means: &state.means + 0.25 * dt * (&k0 + &k1),
            };
            let k2 = fv_rhs(&u2, law, flux)?;
            Ok(FvState {
                mesh: state.mesh,
                means: &state.means + dt / 6.0 * (&k0 + &k1) + 2.0 * dt / 3.0 * &k2,
            })
        })();

        match stepped {
            Ok(next) if next.means.iter().all(|v| v.is_finite()) => state = next,
            Ok(_) | Err(SolverError::NonFinite { .. }) | Err(SolverError::MagnitudeBlowup { .. }) => {
                result.blown_up = true;
                break;
            }
            Err(e) => return Err(e),
        }

        t = if hits_target { target } else { t + dt };
        result
            .step_entropy
            .push((t, fv_total_entropy(&state, law)));
        if hits_target {
            if is_output(target) {
                result.snapshots.push((target, state.means.clone()));
                result
                    .entropy_at_outputs
                    .push((target, fv_total_entropy(&state, law)));
            }
            target_idx += 1;
        }
    }

    result.final_means = state.means;
    result.achieved_time = t;
    Ok(result)
}
