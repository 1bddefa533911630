//! Momentum-space representation of prepared states.
//!
//! The transform is evaluated directly over the compact support of the
//! prepared state: the samples are interpolated piecewise linearly and the
//! oscillatory factor `exp(-i p x / hbar)` is integrated exactly on each
//! cell (Filon-type trapezoidal rule). This is exact for states that are
//! constant on the slit and keeps the large-`p` tail free of windowing
//! artifacts.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{sinc, Real};
use crate::quadrature::{derivative as finite_difference, trapezoid_between};
use crate::slit::{boundary_values, classify_admissibility, derivative_norm, AdmissibilityTolerances, PreparedState, Slit};
use crate::wavefunction::{PhysicalUnits, SampledState};

/// Default momentum window half-width, in units of `hbar / dx`.
pub const DEFAULT_P_MAX_SCALE: f64 = 200.0;
/// Default number of momentum samples.
pub const DEFAULT_MOMENTUM_POINTS: usize = 16001;
/// Minimum number of position cells per oscillation of `exp(-i p_max x / hbar)`.
pub const CELLS_PER_OSCILLATION: usize = 16;

/// Symmetric uniform momentum grid on `[-p_max, p_max]` with `p = 0` as a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid<T> {
    pub p_max: T,
    pub n_p: usize,
}

impl<T: Real> MomentumGrid<T> {
    pub fn new(p_max: T, n_p: usize) -> Result<Self> {
        if !(p_max > T::zero() && p_max.is_finite()) {
            return Err(Error::InvalidInput(format!("p_max must be positive, got {p_max}")));
        }
        if n_p < 3 || n_p.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("n_p must be odd and at least 3, got {n_p}")));
        }
        Ok(Self { p_max, n_p })
    }

    /// The default window for a slit: `p_max = 200 hbar / dx`, 16001 points.
    pub fn default_for(slit: &Slit<T>, units: &PhysicalUnits<T>) -> Self {
        Self {
            p_max: T::lit(DEFAULT_P_MAX_SCALE) * units.hbar / slit.width,
            n_p: DEFAULT_MOMENTUM_POINTS,
        }
    }

    pub fn spacing(&self) -> T {
        (self.p_max + self.p_max) / T::from_count(self.n_p - 1)
    }

    /// Node `i`; nodes `i` and `n_p - 1 - i` are exact negatives.
    pub fn node(&self, i: usize) -> T {
        let m = self.n_p - 1;
        let numer = T::from_count(2 * i) - T::from_count(m);
        self.p_max * numer / T::from_count(m)
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.n_p).map(|i| self.node(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSpectrum<T> {
    pub grid: MomentumGrid<T>,
    pub amplitudes: Vec<Complex<T>>,
    pub units: PhysicalUnits<T>,
    pub source_slit: Slit<T>,
}

impl<T: Real> MomentumSpectrum<T> {
    pub fn momenta(&self) -> Vec<T> {
        self.grid.values()
    }

    pub fn density(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `int_{|p| <= cutoff} p^power |phi_hat(p)|^2 dp` by the trapezoidal rule.
    pub fn windowed_moment(&self, power: i32, cutoff: T) -> T {
        let ps = self.momenta();
        let f: Vec<T> = ps
            .iter()
            .zip(&self.amplitudes)
            .map(|(p, a)| p.powi(power) * a.norm_sqr())
            .collect();
        let cutoff = cutoff.min(self.grid.p_max);
        trapezoid_between(&ps, &f, -cutoff, cutoff)
    }

    /// Asymptotic oscillation period `2 pi hbar / dx` of the tail.
    pub fn tail_period(&self) -> T {
        self.units.h() / self.source_slit.width
    }
}

/// Weight of the left end node: `int_0^1 (1 - t) exp(-i theta t) dt`.
fn end_weight<T: Real>(theta: T) -> Complex<T> {
    let half = theta * T::lit(0.5);
    let re = sinc(half).powi(2) * T::lit(0.5);
    let im = if theta.abs() < T::lit(0.1) {
        let t2 = theta * theta;
        // (theta - sin theta) / theta^2 as a series
        theta
            * (T::one() / T::lit(6.0)
                - t2 * (T::one() / T::lit(120.0)
                    - t2 * (T::one() / T::lit(5040.0)
                        - t2 * (T::one() / T::lit(362_880.0) - t2 / T::lit(39_916_800.0)))))
    } else {
        (theta - theta.sin()) / (theta * theta)
    };
    Complex::new(re, -im)
}

const PHASE_RESTART: usize = 64;

/// `(2 pi hbar)^{-1/2} int exp(-i p x / hbar) phi(x) dx` for the piecewise
/// linear interpolant of `state`.
fn transform_at<T: Real>(state: &SampledState<T>, p: T, prefactor: T) -> Complex<T> {
    let grid = &state.grid;
    let n = grid.len();
    let h = grid.spacing();
    let omega = p / state.units.hbar;
    let theta = omega * h;
    let step = Complex::from_polar(T::one(), -theta);

    let mut interior = Complex::new(T::zero(), T::zero());
    let mut phase = Complex::new(T::one(), T::zero());
    for j in 1..n - 1 {
        if (j - 1) % PHASE_RESTART == 0 {
            phase = Complex::from_polar(T::one(), -omega * grid.node(j));
        } else {
            phase = phase * step;
        }
        interior = interior + state.values[j] * phase;
    }
    let first = state.values[0] * Complex::from_polar(T::one(), -omega * grid.start()) * end_weight(theta);
    let last = state.values[n - 1] * Complex::from_polar(T::one(), -omega * grid.end()) * end_weight(-theta);
    (interior * sinc(theta * T::lit(0.5)).powi(2) + first + last) * (h * prefactor)
}

/// Position grid size needed to resolve `exp(-i p_max x / hbar)`.
pub fn required_position_points<T: Real>(slit: &Slit<T>, units: &PhysicalUnits<T>, p_max: T) -> usize {
    let max_spacing = units.h() / p_max / T::from_count(CELLS_PER_OSCILLATION);
    let cells = (slit.width / max_spacing).ceil().to_usize().unwrap_or(usize::MAX);
    cells.max(1) + 1
}

/// Momentum amplitudes of a prepared state on `grid`.
///
/// If the position spacing is coarser than `(2 pi hbar / p_max) / 16`, the
/// state is re-prepared on a refined grid first.
pub fn fourier_transform<T: Real>(prepared: &PreparedState<T>, grid: MomentumGrid<T>) -> MomentumSpectrum<T> {
    let needed = required_position_points(&prepared.slit, &prepared.units, grid.p_max);
    let refined;
    let state = if prepared.points() >= needed {
        &prepared.state
    } else {
        let mut n = prepared.points();
        while n < needed {
            n = 2 * n - 1;
        }
        match prepared.resampled(n) {
            Ok(r) => {
                refined = r;
                &refined.state
            }
            Err(_) => &prepared.state,
        }
    };
    let prefactor = (T::TAU() * prepared.units.hbar).sqrt().recip();
    let amplitudes: Vec<Complex<T>> = (0..grid.n_p)
        .into_par_iter()
        .map(|i| transform_at(state, grid.node(i), prefactor))
        .collect();
    MomentumSpectrum {
        grid,
        amplitudes,
        units: prepared.units,
        source_slit: prepared.slit,
    }
}

/// Formal derivative of a prepared state: the interior derivative plus the
/// coefficients of the delta functions at the two edges.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeState<T> {
    /// `phi'` on the slit nodes, taken from inside the slit.
    pub interior: SampledState<T>,
    /// `(-phi(dx/2), +phi(-dx/2))`, multiplying `delta(x - dx/2)` and `delta(x + dx/2)`.
    pub edge_terms: (Complex<T>, Complex<T>),
}

pub fn derivative<T: Real>(prepared: &PreparedState<T>) -> DerivativeState<T> {
    let state = &prepared.state;
    let values = finite_difference(&state.values, state.grid.spacing());
    let (left, right) = boundary_values(prepared);
    DerivativeState {
        interior: SampledState {
            grid: state.grid,
            values,
            units: state.units,
        },
        edge_terms: (-right, left),
    }
}

/// Richardson estimate of the full second moment from two momentum windows.
///
/// The truncated tail of `p^2 |phi_hat|^2` is modelled as `c / P`; the
/// cutoffs are whole multiples of the tail period so the oscillation
/// contributes only at higher order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentExtrapolation<T> {
    pub inner_cutoff: T,
    pub outer_cutoff: T,
    pub inner_moment: T,
    pub outer_moment: T,
    pub extrapolated: T,
}

pub fn extrapolated_second_moment<T: Real>(spectrum: &MomentumSpectrum<T>) -> SecondMomentExtrapolation<T> {
    let p_max = spectrum.grid.p_max;
    let period = spectrum.tail_period();
    let periods = (p_max / period).floor();
    let (inner, outer) = if periods >= T::lit(4.0) {
        let outer = periods * period;
        (((periods * T::lit(0.5)).round()) * period, outer)
    } else {
        (p_max * T::lit(0.5), p_max)
    };
    let inner_moment = spectrum.windowed_moment(2, inner);
    let outer_moment = spectrum.windowed_moment(2, outer);
    let extrapolated = (outer * outer_moment - inner * inner_moment) / (outer - inner);
    SecondMomentExtrapolation {
        inner_cutoff: inner,
        outer_cutoff: outer,
        inner_moment,
        outer_moment,
        extrapolated,
    }
}

/// Consistency of the spectrum with Plancherel's identity.
///
/// Sum of `|1 - int |phi_hat|^2 dp|` over the window and an estimate of the
/// probability mass outside it. For states with vanishing edges the
/// relative mismatch between `hbar^2 ||phi'||^2` and the extrapolated
/// `||p phi_hat||^2` is added.
pub fn plancherel_residual<T: Real>(prepared: &PreparedState<T>, spectrum: &MomentumSpectrum<T>) -> T {
    let p_max = spectrum.grid.p_max;
    let mass = spectrum.windowed_moment(0, p_max);
    let half_mass = spectrum.windowed_moment(0, p_max * T::lit(0.5));
    let report = classify_admissibility(prepared, AdmissibilityTolerances::default());
    // tail mass falls off as P^-3 with vanishing edges and as P^-1 otherwise
    let growth = if report.boundary_vanishes { T::lit(7.0) } else { T::one() };
    let deficit = (mass - half_mass).abs() / growth;
    let mut residual = (T::one() - mass).abs() + deficit;
    if report.admissible {
        let hbar = prepared.units.hbar;
        let kinetic = (hbar * derivative_norm(&prepared.state)).powi(2);
        let extrapolated = extrapolated_second_moment(spectrum).extrapolated;
        if kinetic > T::zero() {
            residual = residual + (kinetic - extrapolated).abs() / kinetic;
        }
    }
    residual
}

/// Fitted large-`p` law `p^2 |phi_hat|^2 ~ m sin^2(pi (p - p0) / T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel<T> {
    pub period: T,
    /// Average of `p^2 |phi_hat|^2` over an oscillation (`m / 2`).
    pub mean_level: T,
    /// Half the peak-to-peak swing of the fitted oscillation.
    pub amplitude: T,
    /// Phase offset `p0`, in `[0, period)`.
    pub phase: T,
    pub fit_window: (T, T),
    /// Relative RMS misfit over the window.
    pub residual: T,
}

struct LinearFit<T> {
    coefficients: [T; 3],
    sse: T,
}

/// Least squares for `y ~ a + b cos(w p) + c sin(w p)`.
fn fit_at_frequency<T: Real>(ps: &[T], ys: &[T], omega: T) -> Option<LinearFit<T>> {
    let mut ata = [[T::zero(); 3]; 3];
    let mut aty = [T::zero(); 3];
    for (&p, &y) in ps.iter().zip(ys) {
        let row = [T::one(), (omega * p).cos(), (omega * p).sin()];
        for r in 0..3 {
            aty[r] = aty[r] + row[r] * y;
            for c in 0..3 {
                ata[r][c] = ata[r][c] + row[r] * row[c];
            }
        }
    }
    let coefficients = solve3(ata, aty)?;
    let sse = ps
        .iter()
        .zip(ys)
        .map(|(&p, &y)| {
            let model = coefficients[0] + coefficients[1] * (omega * p).cos() + coefficients[2] * (omega * p).sin();
            (y - model).powi(2)
        })
        .sum();
    Some(LinearFit { coefficients, sse })
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (target, source) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *target = *target - f * source;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Frequency with the largest periodogram power of the linearly detrended data.
fn dominant_frequency<T: Real>(ps: &[T], ys: &[T], lo: T, hi: T, step: T) -> T {
    let n = T::from_count(ps.len());
    let mean_p = ps.iter().copied().sum::<T>() / n;
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let sxx: T = ps.iter().map(|&p| (p - mean_p).powi(2)).sum();
    let sxy: T = ps.iter().zip(ys).map(|(&p, &y)| (p - mean_p) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let detrended: Vec<T> = ps.iter().zip(ys).map(|(&p, &y)| y - mean_y - slope * (p - mean_p)).collect();
    let dp = ps[1] - ps[0];

    let count = ((hi - lo) / step).floor().to_usize().unwrap_or(0) + 1;
    let power = |k: usize| {
        let omega = lo + step * T::from_count(k);
        let rot = Complex::from_polar(T::one(), -omega * dp);
        let mut phase = Complex::from_polar(T::one(), -omega * ps[0]);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, &r) in detrended.iter().enumerate() {
            if j > 0 {
                phase = if j % 256 == 0 { Complex::from_polar(T::one(), -omega * ps[j]) } else { phase * rot };
            }
            acc = acc + phase * r;
        }
        acc.norm_sqr()
    };
    let powers: Vec<T> = (0..count).into_par_iter().map(power).collect();
    let best = powers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(k, _)| k)
        .unwrap_or(0);
    lo + step * T::from_count(best)
}

/// Fits the oscillating tail law to `p^2 |phi_hat(p)|^2` on `[p_lo, p_hi]`.
///
/// The period is located by a periodogram scan and refined by golden-section
/// search on the least-squares misfit; level, amplitude and phase are linear
/// parameters at fixed period.
pub fn tail_asymptote<T: Real>(spectrum: &MomentumSpectrum<T>, window: (T, T)) -> Result<TailModel<T>> {
    let (lo, hi) = window;
    let p_max = spectrum.grid.p_max;
    if !(lo >= T::zero() && lo < hi) {
        return Err(Error::InvalidWindow(format!("window [{lo}, {hi}] must satisfy 0 <= p_lo < p_hi")));
    }
    if hi > p_max * (T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidWindow(format!("p_hi = {hi} exceeds p_max = {p_max}")));
    }
    let expected_period = spectrum.tail_period();
    if hi - lo < T::lit(3.0) * expected_period {
        return Err(Error::InvalidWindow(format!(
            "window [{lo}, {hi}] spans fewer than 3 tail periods of {expected_period}"
        )));
    }
    let (ps, ys): (Vec<T>, Vec<T>) = spectrum
        .momenta()
        .into_iter()
        .zip(&spectrum.amplitudes)
        .filter(|(p, _)| *p >= lo && *p <= hi)
        .map(|(p, a)| (p, p * p * a.norm_sqr()))
        .unzip();
    let dp = spectrum.grid.spacing();
    let width = hi - lo;
    let per_period_min = 8;
    if ps.len() < 3 * per_period_min {
        return Err(Error::InvalidWindow(format!("window holds only {} momentum samples", ps.len())));
    }

    // Frequencies of cos(w p): at least two periods in the window, at least
    // eight samples per period.
    let omega_lo = T::lit(2.0) * T::TAU() / width;
    let omega_hi = T::TAU() / (T::from_count(per_period_min) * dp);
    let step = T::PI() / (T::lit(2.0) * width);
    let coarse = dominant_frequency(&ps, &ys, omega_lo, omega_hi, step);

    let misfit = |omega: T| fit_at_frequency(&ps, &ys, omega).map(|f| f.sse).unwrap_or(T::infinity());
    let (mut a, mut b) = ((coarse - step).max(omega_lo * T::lit(0.5)), coarse + step);
    let golden = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (misfit(c), misfit(d));
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * T::lit(16.0) * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = misfit(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = misfit(d);
        }
    }
    let omega = (a + b) * T::lit(0.5);
    let fit = fit_at_frequency(&ps, &ys, omega)
        .ok_or_else(|| Error::InvalidWindow("tail fit is singular".into()))?;
    let [level, cos_c, sin_c] = fit.coefficients;
    let period = T::TAU() / omega;
    let amplitude = cos_c.hypot(sin_c);
    // -R cos(w (p - p0)) = cos_c cos(w p) + sin_c sin(w p)
    let mut phase = (-sin_c).atan2(-cos_c) / omega;
    if phase < T::zero() {
        phase = phase + period;
    }
    if phase >= period {
        phase = phase - period;
    }
    let n = T::from_count(ps.len());
    let rms_y = (ys.iter().map(|y| *y * *y).sum::<T>() / n).sqrt();
    let residual = if rms_y > T::zero() { (fit.sse / n).sqrt() / rms_y } else { T::zero() };
    Ok(TailModel {
        period,
        mean_level: level,
        amplitude,
        phase,
        fit_window: window,
        residual,
    })
}
