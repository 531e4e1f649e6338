//! Scalar conservation laws with entropy pairs, and the interface fluxes used
//! by the DG and finite-volume schemes.

use crate::error::SolverError;

/// A scalar conservation law `u_t + f(u)_x = 0` together with a strictly
/// convex entropy pair `(U, F)` satisfying `F' = U' f'`.
pub trait ScalarLaw {
    /// Flux `f(u)`.
    fn flux(&self, u: f64) -> f64;
    /// Characteristic speed `f'(u)`.
    fn wave_speed(&self, u: f64) -> f64;
    /// Entropy `U(u)`.
    fn entropy(&self, u: f64) -> f64;
    /// Entropy variable `U'(u)`.
    fn entropy_var(&self, u: f64) -> f64;
    /// Entropy curvature `U''(u)`.
    fn entropy_curvature(&self, u: f64) -> f64;
    /// Entropy flux `F(u)`.
    fn entropy_flux(&self, u: f64) -> f64;
    /// State minimizing the flux, if one exists. The exact Riemann flux needs
    /// it to resolve transonic rarefactions.
    fn sonic_state(&self) -> Option<f64> {
        None
    }
}

/// Burgers' equation `f(u) = u^2 / 2` with the entropy pair
/// `U(u) = u^2`, `F(u) = (2/3) u^3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Burgers;

impl ScalarLaw for Burgers {
    fn flux(&self, u: f64) -> f64 {
        0.5 * u * u
    }

    fn wave_speed(&self, u: f64) -> f64 {
        u
    }

    fn entropy(&self, u: f64) -> f64 {
        u * u
    }

    fn entropy_var(&self, u: f64) -> f64 {
        2.0 * u
    }

    fn entropy_curvature(&self, _u: f64) -> f64 {
        2.0
    }

    fn entropy_flux(&self, u: f64) -> f64 {
        2.0 / 3.0 * u * u * u
    }

    fn sonic_state(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Two-point interface flux selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericalFlux {
    /// Local Lax–Friedrichs: central flux plus `c/2` jump dissipation with
    /// `c = max(|f'(u_l)|, |f'(u_r)|)`.
    LocalLaxFriedrichs,
    /// Exact Riemann (Godunov) flux for convex fluxes.
    Godunov,
}

impl NumericalFlux {
    /// Interface flux value `f*(u_l, u_r)`.
    pub fn value<L: ScalarLaw>(&self, law: &L, ul: f64, ur: f64) -> Result<f64, SolverError> {
        check_finite(ul, ur)?;
        match self {
            NumericalFlux::LocalLaxFriedrichs => {
                let c = law.wave_speed(ul).abs().max(law.wave_speed(ur).abs());
                Ok(0.5 * (law.flux(ul) + law.flux(ur)) - 0.5 * c * (ur - ul))
            }
            NumericalFlux::Godunov => Ok(law.flux(riemann_trace(law, ul, ur)?)),
        }
    }

    /// Numerical entropy flux `F*(u_l, u_r)` compatible with the flux value:
    /// the jump-dissipation form for Lax–Friedrichs, the entropy flux of the
    /// Riemann trace for the exact flux.
    pub fn entropy_value<L: ScalarLaw>(
        &self,
        law: &L,
        ul: f64,
        ur: f64,
    ) -> Result<f64, SolverError> {
        check_finite(ul, ur)?;
        match self {
            NumericalFlux::LocalLaxFriedrichs => {
                let c = law.wave_speed(ul).abs().max(law.wave_speed(ur).abs());
                Ok(0.5 * (law.entropy_flux(ul) + law.entropy_flux(ur))
                    - 0.5 * c * (law.entropy(ur) - law.entropy(ul)))
            }
            NumericalFlux::Godunov => Ok(law.entropy_flux(riemann_trace(law, ul, ur)?)),
        }
    }
}

fn check_finite(ul: f64, ur: f64) -> Result<(), SolverError> {
    if ul.is_finite() && ur.is_finite() {
        Ok(())
    } else {
        Err(SolverError::NonFinite {
            context: "interface flux evaluation",
        })
    }
}

/// State traced along `x/t = 0` by the exact Riemann solution of a convex-flux
/// law. For `u_l <= u_r` this is the flux minimizer over `[u_l, u_r]`; for a
/// shock it is the upwind state by the Rankine–Hugoniot speed (left state on a
/// standing shock).
fn riemann_trace<L: ScalarLaw>(law: &L, ul: f64, ur: f64) -> Result<f64, SolverError> {
    if ul <= ur {
        if law.wave_speed(ul) >= 0.0 {
            Ok(ul)
        } else if law.wave_speed(ur) <= 0.0 {
            Ok(ur)
        } else {
            match law.sonic_state() {
                Some(s) => Ok(s.clamp(ul, ur)),
                None => Err(SolverError::SonicStateUnavailable),
            }
        }
    } else {
        let speed = (law.flux(ul) - law.flux(ur)) / (ul - ur);
        Ok(if speed >= 0.0 { ul } else { ur })
    }
}

/// Largest characteristic speed `max |f'(u)|` over a collection of states.
pub fn max_wave_speed<L, I>(law: &L, states: I) -> Result<f64, SolverError>
where
    L: ScalarLaw,
    I: IntoIterator<Item = f64>,
{
    let mut max = f64::NEG_INFINITY;
    let mut seen = false;
    for u in states {
        if !u.is_finite() {
            return Err(SolverError::NonFinite {
                context: "wave-speed scan",
            });
        }
        seen = true;
        max = max.max(law.wave_speed(u).abs());
    }
    if seen {
        Ok(max)
    } else {
        Err(SolverError::EmptyStates)
    }
}
