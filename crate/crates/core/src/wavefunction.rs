//! Physical units, wavefunction families and sampled states.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::quadrature::{trapezoid, UniformGrid};

/// Unit system: only the reduced Planck constant is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalUnits<T> {
    pub hbar: T,
}

impl<T: Real> PhysicalUnits<T> {
    pub fn new(hbar: T) -> Result<Self> {
        if !(hbar > T::zero() && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// Planck's constant `h = 2 pi hbar`.
    pub fn h(&self) -> T {
        T::TAU() * self.hbar
    }
}

impl<T: Real> Default for PhysicalUnits<T> {
    fn default() -> Self {
        Self { hbar: T::one() }
    }
}

/// A state on the real line, described by family.
///
/// `CosineHump` and `TaperedGaussian` are anchored to the slit they are
/// paired with: they are evaluated in slit-local coordinates and vanish
/// outside `[-dx/2, dx/2]`. The other families live in absolute coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WaveFunction<T> {
    /// `exp(i k x)`.
    PlaneWave { k: T },
    /// Amplitude whose density is a normal law with the given center and
    /// standard deviation `width`.
    Gaussian { center: T, width: T },
    /// `sqrt(2/dx) cos(pi x / dx)` on the slit.
    CosineHump,
    /// `exp(-x^2 / (4 s^2)) cos(pi x / dx)` on the slit; normalized at projection.
    TaperedGaussian { s: T },
    /// Linear interpolation between samples, zero outside the grid.
    Sampled { xs: Vec<T>, values: Vec<Complex<T>> },
}

impl<T: Real> WaveFunction<T> {
    /// Validated constructor for sampled states.
    pub fn sampled(xs: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        let wf = Self::Sampled { xs, values };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PlaneWave { k } if !k.is_finite() => {
                Err(Error::InvalidInput("plane wave k must be finite".into()))
            }
            Self::Gaussian { center, width } if !(center.is_finite() && *width > T::zero() && width.is_finite()) => {
                Err(Error::InvalidInput(format!("gaussian needs finite center and positive width, got {center}, {width}")))
            }
            Self::TaperedGaussian { s } if !(*s > T::zero() && s.is_finite()) => {
                Err(Error::InvalidInput(format!("tapered gaussian s must be positive, got {s}")))
            }
            Self::Sampled { xs, values } => {
                if xs.len() < 2 {
                    return Err(Error::InvalidInput(format!("sampled state needs at least 2 points, got {}", xs.len())));
                }
                if xs.len() != values.len() {
                    return Err(Error::InvalidInput(format!(
                        "sampled state has {} positions but {} values",
                        xs.len(),
                        values.len()
                    )));
                }
                if xs.iter().any(|x| !x.is_finite()) || values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(Error::InvalidInput("sampled state has non-finite entries".into()));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput("sampled grid must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True for families defined relative to the slit they are projected through.
    pub fn is_slit_anchored(&self) -> bool {
        matches!(self, Self::CosineHump | Self::TaperedGaussian { .. })
    }

    /// True when the family is known in closed form (smooth inside any slit).
    pub fn is_analytic(&self) -> bool {
        !matches!(self, Self::Sampled { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PlaneWave { .. } => "plane-wave",
            Self::Gaussian { .. } => "gaussian",
            Self::CosineHump => "cosine-hump",
            Self::TaperedGaussian { .. } => "tapered-gaussian",
            Self::Sampled { .. } => "sampled",
        }
    }
}

/// `cos(pi x / dx)` written so that it is exactly zero at `|x| = dx/2`.
fn hump_cosine<T: Real>(x: T, slit_width: T) -> T {
    let half = slit_width * T::lit(0.5);
    (T::PI() * (half - x.abs()) / slit_width).sin()
}

/// Amplitude of `wf` at `x`.
///
/// `slit_width` is only read by the slit-anchored families.
pub fn evaluate<T: Real>(wf: &WaveFunction<T>, slit_width: T, x: T) -> Result<Complex<T>> {
    let half = slit_width * T::lit(0.5);
    let amp = match wf {
        WaveFunction::PlaneWave { k } => Complex::from_polar(T::one(), *k * x),
        WaveFunction::Gaussian { center, width } => {
            let norm = (T::TAU() * *width * *width).powf(T::lit(-0.25));
            let u = (x - *center) / *width;
            Complex::new(norm * (-u * u * T::lit(0.25)).exp(), T::zero())
        }
        WaveFunction::CosineHump => {
            if x.abs() > half {
                Complex::new(T::zero(), T::zero())
            } else {
                let norm = (T::lit(2.0) / slit_width).sqrt();
                Complex::new(norm * hump_cosine(x, slit_width), T::zero())
            }
        }
        WaveFunction::TaperedGaussian { s } => {
            if x.abs() > half {
                Complex::new(T::zero(), T::zero())
            } else {
                let u = x / *s;
                Complex::new((-u * u * T::lit(0.25)).exp() * hump_cosine(x, slit_width), T::zero())
            }
        }
        WaveFunction::Sampled { xs, values } => interpolate(xs, values, x)?,
    };
    Ok(amp)
}

fn interpolate<T: Real>(xs: &[T], values: &[Complex<T>], x: T) -> Result<Complex<T>> {
    if xs.is_empty() || xs.len() != values.len() {
        return Err(Error::InvalidInput("sampled state has an empty or mismatched grid".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let last = xs.len() - 1;
    if x < xs[0] || x > xs[last] {
        return Ok(zero);
    }
    // first index with xs[i] > x
    let upper = xs.partition_point(|&xi| xi <= x);
    if upper == 0 {
        return Ok(values[0]);
    }
    let i = upper - 1;
    if i == last || xs[i] == x {
        return Ok(values[i]);
    }
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    Ok(values[i] + (values[i + 1] - values[i]) * t)
}

/// Samples of a state on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledState<T> {
    pub grid: UniformGrid<T>,
    pub values: Vec<Complex<T>>,
    pub units: PhysicalUnits<T>,
}

impl<T: Real> SampledState<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<Complex<T>>, units: PhysicalUnits<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(Self { grid, values, units })
    }

    pub fn xs(&self) -> Vec<T> {
        self.grid.nodes().collect()
    }

    /// `|psi|^2` at every node.
    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| *v * factor).collect(),
            units: self.units,
        }
    }

    /// Re-express as an interpolated wavefunction.
    pub fn to_wavefunction(&self) -> WaveFunction<T> {
        WaveFunction::Sampled {
            xs: self.xs(),
            values: self.values.clone(),
        }
    }
}

/// Samples `wf` on `n` uniform points over `[a, b]`.
pub fn sample<T: Real>(
    wf: &WaveFunction<T>,
    slit_width: T,
    interval: (T, T),
    n: usize,
    units: PhysicalUnits<T>,
) -> Result<SampledState<T>> {
    let grid = UniformGrid::new(interval.0, interval.1, n)?;
    let values = grid
        .nodes()
        .map(|x| evaluate(wf, slit_width, x))
        .collect::<Result<Vec<_>>>()?;
    SampledState::new(grid, values, units)
}

/// `sqrt(int |psi|^2 dx)` by the trapezoidal rule.
pub fn l2_norm<T: Real>(state: &SampledState<T>) -> T {
    trapezoid(&state.density(), state.grid.spacing()).sqrt()
}

/// Rescales to unit L2 norm.
pub fn normalize<T: Real>(state: &SampledState<T>) -> Result<SampledState<T>> {
    let norm = l2_norm(state);
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::DegenerateState);
    }
    Ok(state.scaled(Complex::new(norm.recip(), T::zero())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DX: f64 = 0.8;

    fn units() -> PhysicalUnits<f64> {
        PhysicalUnits::default()
    }

    #[test]
    fn cosine_hump_values() {
        let wf = WaveFunction::CosineHump;
        let center = evaluate(&wf, DX, 0.0).unwrap();
        assert!((center.re - (2.0 / DX).sqrt()).abs() < 1e-15);
        assert_eq!(evaluate(&wf, DX, DX / 2.0).unwrap().re, 0.0);
        assert_eq!(evaluate(&wf, DX, -DX / 2.0).unwrap().re, 0.0);
        assert_eq!(evaluate(&wf, DX, DX).unwrap().re, 0.0);
    }

    #[test]
    fn flat_plane_wave_is_one() {
        let v = evaluate(&WaveFunction::PlaneWave { k: 0.0 }, DX, 3.7).unwrap();
        assert_eq!(v, Complex::new(1.0, 0.0));
    }

    #[test]
    fn empty_sampled_grid_is_rejected() {
        let wf = WaveFunction::<f64>::Sampled { xs: vec![], values: vec![] };
        assert!(matches!(evaluate(&wf, DX, 0.0), Err(Error::InvalidInput(_))));
        assert!(WaveFunction::<f64>::sampled(vec![0.0], vec![Complex::new(1.0, 0.0)]).is_err());
        assert!(WaveFunction::<f64>::sampled(vec![1.0, 0.0], vec![Complex::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn sampled_interpolation_is_linear_and_zero_outside() {
        let wf = WaveFunction::sampled(vec![0.0, 1.0, 3.0], vec![
            Complex::new(0.0, 0.0),
            Complex::new(2.0, -2.0),
            Complex::new(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(evaluate(&wf, DX, 0.5).unwrap(), Complex::new(1.0, -1.0));
        assert_eq!(evaluate(&wf, DX, 2.0).unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(evaluate(&wf, DX, 3.0).unwrap(), Complex::new(0.0, 2.0));
        assert_eq!(evaluate(&wf, DX, 3.5).unwrap(), Complex::new(0.0, 0.0));
        assert_eq!(evaluate(&wf, DX, -0.1).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn sample_examples() {
        let hump = sample(&WaveFunction::CosineHump, DX, (-DX / 2.0, DX / 2.0), 3, units()).unwrap();
        assert_eq!(hump.values[0].re, 0.0);
        assert!((hump.values[1].re - (2.0 / DX).sqrt()).abs() < 1e-15);
        assert_eq!(hump.values[2].re, 0.0);

        let flat = sample(&WaveFunction::PlaneWave { k: 0.0 }, DX, (0.0, 1.0), 2, units()).unwrap();
        assert_eq!(flat.values, vec![Complex::new(1.0, 0.0); 2]);

        let sigma = 0.3;
        let g = WaveFunction::Gaussian { center: 0.0, width: sigma };
        let s = sample(&g, DX, (-4.0 * sigma, 4.0 * sigma), 1001, units()).unwrap();
        assert!((l2_norm(&s) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn norms() {
        let zero = sample(&WaveFunction::PlaneWave { k: 0.0 }, DX, (0.0, 1.0), 5, units())
            .unwrap()
            .scaled(Complex::new(0.0, 0.0));
        assert_eq!(l2_norm(&zero), 0.0);
        assert_eq!(normalize(&zero), Err(Error::DegenerateState));

        let hump = sample(&WaveFunction::CosineHump, DX, (-DX / 2.0, DX / 2.0), 4097, units()).unwrap();
        assert!((l2_norm(&hump) - 1.0).abs() < 1e-6);

        let flat = sample(&WaveFunction::PlaneWave { k: 1.3 }, DX, (0.0, 2.0), 4097, units()).unwrap();
        assert!((l2_norm(&flat) - 2.0_f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn normalize_examples() {
        let hump = sample(&WaveFunction::CosineHump, DX, (-DX / 2.0, DX / 2.0), 4097, units()).unwrap();
        let once = normalize(&hump).unwrap();
        let twice = normalize(&once).unwrap();
        for (a, b) in once.values.iter().zip(&twice.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let scaled = normalize(&hump.scaled(Complex::new(5.0, 0.0))).unwrap();
        for (a, b) in once.values.iter().zip(&scaled.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let constant = sample(&WaveFunction::PlaneWave { k: 0.0 }, DX, (0.0, 1.0), 11, units())
            .unwrap()
            .scaled(Complex::new(0.0, 3.0));
        let unit = normalize(&constant).unwrap();
        assert!(unit.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert!((l2_norm(&unit) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_norm_converges_at_second_order() {
        let g = WaveFunction::Gaussian { center: 0.1, width: 0.2 };
        let norm = |n| l2_norm(&sample(&g, DX, (-0.5, 0.5), n, units()).unwrap());
        let (coarse, mid, fine) = (norm(33), norm(65), norm(129));
        let ratio = (coarse - mid) / (mid - fine);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn units_reject_nonpositive_hbar() {
        assert!(PhysicalUnits::new(0.0_f64).is_err());
        assert!((PhysicalUnits::new(2.0_f64).unwrap().h() - 4.0 * std::f64::consts::PI).abs() < 1e-15);
    }
}
