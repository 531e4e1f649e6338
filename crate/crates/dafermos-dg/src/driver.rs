//! Time-loop driver for the DG schemes: CFL-based stepping with exact output
//! hits, optional per-step entropy-violation recording, and blow-up capture.

use nalgebra::DVector;

use crate::basis::{Basis, ScaledBasis};
use crate::correction::{cell_entropy_violation, ddg_rhs, interface_entropy_fluxes};
use crate::dg::{dg_rhs, interpolate_ic, DgState, Mesh1D};
use crate::error::SolverError;
use crate::law::{max_wave_speed, NumericalFlux, ScalarLaw};
use crate::stepper::{drkdg_step, ssprk33_step, DescentParams};

/// Which DG time-marching variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgScheme {
    /// Plain DG with SSPRK33 and no correction.
    Vanilla,
    /// Semidiscrete correction: the entropy-descent step is part of the
    /// right-hand side at every stage.
    RhsCorrected,
    /// Fully discrete correction: a plain SSPRK33 step followed by the
    /// bounded per-cell entropy descent.
    StepCorrected,
}

/// Configuration of one DG run.
#[derive(Debug, Clone)]
pub struct DgRunConfig {
    /// Polynomial order per cell.
    pub order: usize,
    /// Number of mesh cells.
    pub n_cells: usize,
    /// CFL number in `dt = cfl * dx / ((p^2 + 1) * c_max)`.
    pub cfl: f64,
    /// Final time.
    pub t_end: f64,
    /// Times at which snapshots and total entropy are recorded; hit exactly.
    pub output_times: Vec<f64>,
    /// Scheme variant.
    pub scheme: DgScheme,
    /// Record per-cell entropy-inequality residuals at every step start.
    pub record_violations: bool,
    /// Descent parameters (iterations, blow-up threshold).
    pub descent: DescentParams,
    /// When set, overrides the CFL rule with a constant step (still shortened
    /// to hit output times exactly).
    pub fixed_dt: Option<f64>,
    /// Safety bound on the number of accepted steps.
    pub max_steps: usize,
}

impl DgRunConfig {
    /// Baseline configuration for the given scheme, order, and resolution.
    pub fn new(scheme: DgScheme, order: usize, n_cells: usize, cfl: f64, t_end: f64) -> Self {
        DgRunConfig {
            order,
            n_cells,
            cfl,
            t_end,
            output_times: Vec::new(),
            scheme,
            record_violations: false,
            descent: DescentParams::default(),
            fixed_dt: None,
            max_steps: 50_000_000,
        }
    }
}

/// Per-cell entropy-inequality residuals recorded over a run.
#[derive(Debug, Clone, Default)]
pub struct ViolationTrace {
    /// Step-start times at which the residuals were evaluated.
    pub times: Vec<f64>,
    /// Signed residual per cell at each recorded time.
    pub violations: Vec<Vec<f64>>,
}

/// Result of one DG run.
#[derive(Debug, Clone)]
pub struct DgRunResult {
    /// `(time, state)` at each requested output time that was reached.
    pub snapshots: Vec<(f64, DgState)>,
    /// `(time, total entropy)` at each requested output time that was reached.
    pub entropy_at_outputs: Vec<(f64, f64)>,
    /// Entropy-violation trace when recording was requested.
    pub violation_trace: Option<ViolationTrace>,
    /// Last finite state (the solution at `achieved_time`).
    pub final_state: DgState,
    /// Last simulation time with a finite state.
    pub achieved_time: f64,
    /// True when the run stopped on a non-finite or diverging state.
    pub blown_up: bool,
    /// Number of accepted steps.
    pub steps: usize,
}

fn total_entropy<L: ScalarLaw>(state: &DgState, sb: &ScaledBasis, law: &L) -> f64 {
    state.cells.iter().map(|u| sb.cell_entropy(law, u)).sum()
}

fn is_blowup_signal(err: &SolverError) -> bool {
    matches!(
        err,
        SolverError::NonFinite { .. } | SolverError::MagnitudeBlowup { .. }
    )
}

/// Runs one DG scheme from the initial condition to `t_end`, recording
/// snapshots at the requested output times (hit exactly by shortened steps).
/// A non-finite or diverging state ends the run with `blown_up = true` and
/// the last good time in `achieved_time`; all other errors propagate.
pub fn run_dg<L: ScalarLaw, F: Fn(f64) -> f64>(
    mesh: &Mesh1D,
    law: &L,
    flux: NumericalFlux,
    ic: F,
    cfg: &DgRunConfig,
) -> Result<DgRunResult, SolverError> {
    if !(cfg.cfl.is_finite() && cfg.cfl > 0.0) {
        return Err(SolverError::InvalidParameter {
            name: "cfl",
            message: format!("must be positive and finite, got {}", cfg.cfl),
        });
    }
    if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        return Err(SolverError::InvalidParameter {
            name: "t_end",
            message: format!("must be nonnegative and finite, got {}", cfg.t_end),
        });
    }
    if let Some(dt) = cfg.fixed_dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SolverError::BadTimeStep(dt));
        }
    }
    if mesh.n_cells != cfg.n_cells {
        return Err(SolverError::CellCountMismatch {
            state: cfg.n_cells,
            mesh: mesh.n_cells,
        });
    }

    let basis = Basis::new(cfg.order)?;
    let sb = basis.scale_to_cell(mesh.dx())?;
    let mut state = interpolate_ic(mesh, &basis, ic)?;

    let mut targets: Vec<f64> = cfg
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= cfg.t_end)
        .chain(std::iter::once(cfg.t_end))
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();
    let is_output = |t: f64| cfg.output_times.contains(&t);

    let mut result = DgRunResult {
        snapshots: Vec::new(),
        entropy_at_outputs: Vec::new(),
        violation_trace: cfg.record_violations.then(ViolationTrace::default),
        final_state: state.clone(),
        achieved_time: 0.0,
        blown_up: false,
        steps: 0,
    };
    if is_output(0.0) {
        result.snapshots.push((0.0, state.clone()));
        result
            .entropy_at_outputs
            .push((0.0, total_entropy(&state, &sb, law)));
    }

    let p_scale = (cfg.order * cfg.order + 1) as f64;
    let mut t = 0.0;
    let mut target_idx = 0;
    'time_loop: while target_idx < targets.len() {
        let target = targets[target_idx];
        if t >= target {
            target_idx += 1;
            continue;
        }
        if result.steps >= cfg.max_steps {
            return Err(SolverError::StepLimit(cfg.max_steps));
        }

        if let Some(trace) = result.violation_trace.as_mut() {
            let corrected = ddg_rhs(&state, &sb, law, flux)?;
            let entropy_fluxes = interface_entropy_fluxes(&state, &sb, law, flux)?;
            let n = state.n_cells();
            let row: Vec<f64> = (0..n)
                .map(|j| {
                    cell_entropy_violation(
                        &state.cells[j],
                        &corrected.derivative[j],
                        &sb,
                        law,
                        entropy_fluxes[j],
                        entropy_fluxes[(j + 1) % n],
                    )
                })
                .collect();
            trace.times.push(t);
            trace.violations.push(row);
        }

        let dt_rule = match cfg.fixed_dt {
            Some(dt) => dt,
            None => {
                let c_max = max_wave_speed(law, state.nodal_values())?;
                if c_max > 0.0 {
                    cfg.cfl * mesh.dx() / (p_scale * c_max)
                } else {
                    f64::INFINITY
                }
            }
        };
        let gap = target - t;
        let (dt, hits_target) = if dt_rule < gap {
            (dt_rule, false)
        } else {
            (gap, true)
        };

        let stepped = match cfg.scheme {
            DgScheme::Vanilla => ssprk33_step(&state, dt, |s| {
                let base = dg_rhs(s, &sb, law, flux)?;
                Ok((base.derivative, Vec::new()))
            })
            .map(|(next, _)| next),
            DgScheme::RhsCorrected => ssprk33_step(&state, dt, |s| {
                let corrected = ddg_rhs(s, &sb, law, flux)?;
                Ok((corrected.derivative, Vec::new()))
            })
            .map(|(next, _)| next),
            DgScheme::StepCorrected => {
                drkdg_step(&state, dt, &sb, law, flux, &cfg.descent).map(|(next, _)| next)
            }
        };

        let next = match stepped {
            Ok(next) => next,
            Err(e) if is_blowup_signal(&e) => {
                result.blown_up = true;
                break 'time_loop;
            }
            Err(e) => return Err(e),
        };
        if !next.is_finite() || next.max_abs() > cfg.descent.blowup_threshold {
            result.blown_up = true;
            break 'time_loop;
        }

        state = next;
        result.steps += 1;
        t = if hits_target { target } else { t + dt };
        if hits_target {
            if is_output(target) {
                result.snapshots.push((target, state.clone()));
                result
                    .entropy_at_outputs
                    .push((target, total_entropy(&state, &sb, law)));
            }
            target_idx += 1;
        }
    }

    result.final_state = state;
    result.achieved_time = t;
    Ok(result)
}

/// Nodal values of a snapshot flattened to `(x, u)` pairs in mesh order,
/// convenient for serialization.
pub fn snapshot_points(state: &DgState, basis: &Basis) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(state.n_cells() * basis.n_nodes());
    for (j, cell) in state.cells.iter().enumerate() {
        for (k, &v) in cell.iter().enumerate() {
            points.push((state.mesh.map_from_reference(j, basis.nodes[k]), v));
        }
    }
    points
}

/// Interpolates the state onto `samples` equispaced points per cell,
/// convenient for plotting-oriented output.
pub fn sample_state(state: &DgState, sb: &ScaledBasis, samples: usize) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(state.n_cells() * samples);
    for (j, cell) in state.cells.iter().enumerate() {
        for k in 0..samples {
            let xi = -1.0 + 2.0 * (k as f64 + 0.5) / samples as f64;
            let x = state.mesh.map_from_reference(j, xi);
            points.push((x, sb.eval(cell, xi)));
        }
    }
    points
}

/// The shock-forming test profile `sin(pi x) + 1/2`.
pub fn ic_sine_shock(x: f64) -> f64 {
    (std::f64::consts::PI * x).sin() + 0.5
}

/// The rarefaction test profile: `-x` on `[0, 1)`, `2 - x` on `[1, 2)`.
pub fn ic_rarefaction(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y < 1.0 {
        -y
    } else {
        2.0 - y
    }
}

/// The nearly constant smooth profile `1 + sin(pi x) / 50`.
pub fn ic_smooth(x: f64) -> f64 {
    1.0 + (std::f64::consts::PI * x).sin() / 50.0
}

/// Mean of the DG cell `j` reconstructed from nodal values, used by callers
/// that only need conserved quantities.
pub fn cell_means(state: &DgState, sb: &ScaledBasis) -> DVector<f64> {
    DVector::from_fn(state.n_cells(), |j, _| sb.mean(&state.cells[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::total_mass;
    use crate::law::Burgers;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn mesh(n: usize) -> Mesh1D {
        Mesh1D::new(0.0, 2.0, n).unwrap()
    }

    #[test]
    fn constant_state_runs_to_the_end_with_constant_entropy() {
        let m = mesh(8);
        let mut cfg = DgRunConfig::new(DgScheme::RhsCorrected, 3, 8, 0.5, 0.5);
        cfg.output_times = vec![0.0, 0.25, 0.5];
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, |_| 1.1, &cfg).unwrap();
        assert!(!out.blown_up);
        assert_eq!(out.achieved_time, 0.5);
        assert_eq!(out.snapshots.len(), 3);
        for &(_, e) in &out.entropy_at_outputs {
            assert_relative_eq!(e, 2.0 * 1.1 * 1.1, max_relative = 1e-12);
        }
    }

    #[test]
    fn output_times_are_hit_exactly() {
        let m = mesh(10);
        let mut cfg = DgRunConfig::new(DgScheme::RhsCorrected, 2, 10, 0.4, 0.7);
        cfg.output_times = vec![0.3, 0.55];
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_sine_shock, &cfg)
            .unwrap();
        assert_eq!(out.snapshots[0].0, 0.3);
        assert_eq!(out.snapshots[1].0, 0.55);
        assert_eq!(out.achieved_time, 0.7);
    }

    #[test]
    fn corrected_shock_run_stays_bounded_and_conservative() {
        let m = mesh(20);
        let cfg = DgRunConfig::new(DgScheme::RhsCorrected, 3, 20, 0.5, 0.6);
        let basis = Basis::new(3).unwrap();
        let sb = basis.scale_to_cell(m.dx()).unwrap();
        let init = interpolate_ic(&m, &basis, ic_sine_shock).unwrap();
        let mass0 = total_mass(&init, &sb);
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_sine_shock, &cfg)
            .unwrap();
        assert!(!out.blown_up);
        assert!(out.final_state.max_abs() <= 2.0);
        let mass1 = total_mass(&out.final_state, &sb);
        assert_abs_diff_eq!(mass1, mass0, epsilon = 1e-9);
    }

    #[test]
    fn vanilla_scheme_blows_up_on_the_shock_and_reports_the_time() {
        let m = mesh(20);
        let cfg = DgRunConfig::new(DgScheme::Vanilla, 6, 20, 0.5, 1.0);
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_sine_shock, &cfg)
            .unwrap();
        assert!(out.blown_up);
        assert!(out.achieved_time < 0.5, "blew up at {}", out.achieved_time);
        assert!(out.final_state.is_finite());
    }

    #[test]
    fn step_corrected_scheme_completes_the_shock_run() {
        let m = mesh(16);
        let mut cfg = DgRunConfig::new(DgScheme::StepCorrected, 3, 16, 0.5, 0.5);
        cfg.output_times = vec![0.5];
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_sine_shock, &cfg)
            .unwrap();
        assert!(!out.blown_up);
        assert!(out.steps > 0);
        assert_eq!(out.entropy_at_outputs.len(), 1);
    }

    #[test]
    fn fixed_time_step_controls_the_step_count() {
        let m = mesh(4);
        let mut cfg = DgRunConfig::new(DgScheme::Vanilla, 2, 4, 0.5, 0.1);
        cfg.fixed_dt = Some(1e-3);
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_smooth, &cfg)
            .unwrap();
        assert!(!out.blown_up);
        assert_eq!(out.steps, 100);
    }

    #[test]
    fn violation_trace_has_consistent_shape_and_tiny_positive_part() {
        let m = mesh(12);
        let mut cfg = DgRunConfig::new(DgScheme::RhsCorrected, 4, 12, 0.5, 0.02);
        cfg.record_violations = true;
        let out = run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_smooth, &cfg)
            .unwrap();
        let trace = out.violation_trace.unwrap();
        assert_eq!(trace.times.len(), trace.violations.len());
        assert!(!trace.times.is_empty());
        for row in &trace.violations {
            assert_eq!(row.len(), 12);
            for &v in row {
                assert!(v <= 1e-10, "positive violation {v:.3e}");
            }
        }
    }

    #[test]
    fn rarefaction_profile_is_periodic_and_matches_the_pieces() {
        assert_relative_eq!(ic_rarefaction(0.5), -0.5);
        assert_relative_eq!(ic_rarefaction(1.5), 0.5);
        assert_relative_eq!(ic_rarefaction(2.5), -0.5);
        assert_abs_diff_eq!(ic_rarefaction(0.0), 0.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let m = mesh(4);
        let mut cfg = DgRunConfig::new(DgScheme::Vanilla, 2, 4, -1.0, 0.1);
        assert!(matches!(
            run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_smooth, &cfg),
            Err(SolverError::InvalidParameter { name: "cfl", .. })
        ));
        cfg.cfl = 0.5;
        cfg.n_cells = 5;
        assert!(matches!(
            run_dg(&m, &Burgers, NumericalFlux::LocalLaxFriedrichs, ic_smooth, &cfg),
            Err(SolverError::CellCountMismatch { .. })
        ));
    }
}
