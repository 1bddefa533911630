//! Position and momentum spreads, and the two uncertainty bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::quadrature::{derivative, trapezoid, trapezoid_complex};
use crate::slit::{derivative_norm, AdmissibilityReport, PreparedState, Slit};
use crate::spectral::{extrapolated_second_moment, tail_asymptote, MomentumSpectrum, TailModel};
use crate::wavefunction::PhysicalUnits;

/// Relative disagreement between the two sigma_p routes that is treated as
/// a discretization failure.
pub const ROUTE_TOLERANCE: f64 = 1e-2;
/// Relative slack below a bound that still counts as satisfying it.
pub const BOUND_SLACK: f64 = 1e-9;
/// Relative distance from the slit bound reported as equality.
pub const EQUALITY_TOLERANCE: f64 = 1e-6;
/// Default tail-fit window as fractions of `p_max`.
pub const TAIL_WINDOW: (f64, f64) = (0.15, 0.9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaRoute {
    Derivative,
    MomentumQuadrature,
    Both,
}

/// Momentum standard deviation: a number, or the tail law that makes it infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaP<T> {
    Finite {
        value: T,
        route: SigmaRoute,
        /// `sqrt(hbar^2 ||phi'||^2 - mean_p^2)`.
        derivative_route: T,
        /// From the extrapolated momentum-space second moment.
        momentum_route: Option<T>,
        relative_difference: Option<T>,
    },
    Divergent { tail: TailModel<T> },
}

impl<T: Real> SigmaP<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Self::Finite { value, .. } => Some(*value),
            Self::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport<T> {
    pub mean_x: T,
    pub sigma_x: T,
    pub mean_p: T,
    pub sigma_p: SigmaP<T>,
    /// `sigma_p sigma_x` when sigma_p is finite.
    pub product_sigma: Option<T>,
    /// `sigma_p dx` when sigma_p is finite.
    pub product_slit: Option<T>,
    pub units: PhysicalUnits<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck<T> {
    pub kennard_lhs: Option<T>,
    pub kennard_rhs: T,
    pub slit_lhs: Option<T>,
    pub slit_rhs: T,
    pub kennard_ok: bool,
    pub slit_ok: bool,
    /// `sigma_p dx` equals `pi hbar` to within `EQUALITY_TOLERANCE`.
    pub slit_equality: bool,
    pub divergent_case: bool,
}

/// Mean and standard deviation of `|phi(x)|^2`.
pub fn sigma_x<T: Real>(prepared: &PreparedState<T>) -> (T, T) {
    let state = &prepared.state;
    let h = state.grid.spacing();
    let density = state.density();
    let xs = state.xs();
    let mass = trapezoid(&density, h);
    let first: Vec<T> = xs.iter().zip(&density).map(|(x, d)| *x * *d).collect();
    let mean = trapezoid(&first, h) / mass;
    let second: Vec<T> = xs.iter().zip(&density).map(|(x, d)| (*x - mean).powi(2) * *d).collect();
    let var = trapezoid(&second, h) / mass;
    (mean, var.max(T::zero()).sqrt())
}

/// `hbar Im int conj(phi) phi' dx` over the open slit.
pub fn mean_momentum<T: Real>(prepared: &PreparedState<T>) -> T {
    let state = &prepared.state;
    let h = state.grid.spacing();
    let d = derivative(&state.values, h);
    let integrand: Vec<_> = state.values.iter().zip(&d).map(|(v, dv)| v.conj() * dv).collect();
    prepared.units.hbar * trapezoid_complex(&integrand, h).im
}

/// `int_{|p| <= cutoff} p^2 |phi_hat(p)|^2 dp`; the cutoff is clamped to the window.
pub fn cutoff_second_moment<T: Real>(spectrum: &MomentumSpectrum<T>, cutoff: T) -> T {
    spectrum.windowed_moment(2, cutoff.max(T::zero()))
}

/// The default tail-fit window for a spectrum.
pub fn default_tail_window<T: Real>(spectrum: &MomentumSpectrum<T>) -> (T, T) {
    let p_max = spectrum.grid.p_max;
    (p_max * T::lit(TAIL_WINDOW.0), p_max * T::lit(TAIL_WINDOW.1))
}

/// Momentum standard deviation of a prepared state.
///
/// Admissible states take the derivative route, `hbar^2 ||phi'||^2 - mean_p^2`,
/// and are cross-checked against the extrapolated momentum-space moment.
/// Inadmissible states are reported as divergent with their fitted tail.
pub fn sigma_p<T: Real>(
    prepared: &PreparedState<T>,
    report: &AdmissibilityReport<T>,
    spectrum: &MomentumSpectrum<T>,
) -> Result<SigmaP<T>> {
    if !report.admissible {
        let tail = tail_asymptote(spectrum, default_tail_window(spectrum))?;
        return Ok(SigmaP::Divergent { tail });
    }
    let hbar = prepared.units.hbar;
    let mean_p = mean_momentum(prepared);
    let kinetic = (hbar * derivative_norm(&prepared.state)).powi(2);
    let derivative_route = (kinetic - mean_p * mean_p).max(T::zero()).sqrt();

    let p_max = spectrum.grid.p_max;
    let mass = spectrum.windowed_moment(0, p_max);
    let spectral_mean = spectrum.windowed_moment(1, p_max) / mass;
    let second = extrapolated_second_moment(spectrum).extrapolated;
    let momentum_route = (second - spectral_mean * spectral_mean).max(T::zero()).sqrt();

    let relative = if derivative_route > T::zero() {
        (derivative_route - momentum_route).abs() / derivative_route
    } else {
        (derivative_route - momentum_route).abs()
    };
    if !(relative <= T::lit(ROUTE_TOLERANCE)) {
        return Err(Error::Inconsistency {
            derivative: derivative_route.to_f64_lossy(),
            momentum: momentum_route.to_f64_lossy(),
            relative: relative.to_f64_lossy(),
        });
    }
    Ok(SigmaP::Finite {
        value: derivative_route,
        route: SigmaRoute::Both,
        derivative_route,
        momentum_route: Some(momentum_route),
        relative_difference: Some(relative),
    })
}

/// Full moment report for a prepared state.
pub fn moment_report<T: Real>(
    prepared: &PreparedState<T>,
    report: &AdmissibilityReport<T>,
    spectrum: &MomentumSpectrum<T>,
) -> Result<MomentReport<T>> {
    let (mean_x, sx) = sigma_x(prepared);
    let sp = sigma_p(prepared, report, spectrum)?;
    let value = sp.value();
    Ok(MomentReport {
        mean_x,
        sigma_x: sx,
        mean_p: mean_momentum(prepared),
        sigma_p: sp,
        product_sigma: value.map(|v| v * sx),
        product_slit: value.map(|v| v * prepared.slit.width),
        units: prepared.units,
    })
}

/// Evaluates `sigma_x sigma_p >= hbar/2` and `sigma_p dx >= pi hbar`.
pub fn check_bounds<T: Real>(report: &MomentReport<T>, slit: &Slit<T>) -> BoundCheck<T> {
    let hbar = report.units.hbar;
    let kennard_rhs = hbar * T::lit(0.5);
    let slit_rhs = T::PI() * hbar;
    let slack = T::one() - T::lit(BOUND_SLACK);
    match report.sigma_p.value() {
        Some(sp) => {
            let kennard_lhs = sp * report.sigma_x;
            let slit_lhs = sp * slit.width;
            BoundCheck {
                kennard_lhs: Some(kennard_lhs),
                kennard_rhs,
                slit_lhs: Some(slit_lhs),
                slit_rhs,
                kennard_ok: kennard_lhs >= kennard_rhs * slack,
                slit_ok: slit_lhs >= slit_rhs * slack,
                slit_equality: (slit_lhs / slit_rhs - T::one()).abs() <= T::lit(EQUALITY_TOLERANCE),
                divergent_case: false,
            }
        }
        None => BoundCheck {
            kennard_lhs: None,
            kennard_rhs,
            slit_lhs: None,
            slit_rhs,
            kennard_ok: true,
            slit_ok: true,
            slit_equality: false,
            divergent_case: true,
        },
    }
}
