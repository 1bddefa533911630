//! Variational check that `sigma_p dx >= pi hbar` is sharp.
//!
//! On the slit with Dirichlet edges, `hbar^2 ||phi'||^2 / ||phi||^2` is the
//! Rayleigh quotient of the second-derivative form. In the sine basis
//! `u_n(x) = sqrt(2/dx) sin(n pi (x + dx/2) / dx)` the form is diagonal with
//! entries `(n pi hbar / dx)^2`, so the minimum is attained by `u_1`, the
//! cosine hump. The same minimum is recovered from a stiffness matrix
//! assembled by finite differences and trapezoidal quadrature.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{check_bounds, moment_report};
use crate::num::Real;
use crate::quadrature::{derivative, trapezoid, UniformGrid};
use crate::slit::{classify_admissibility, project, AdmissibilityTolerances, PreparedState, Slit, DEFAULT_POSITION_POINTS};
use crate::spectral::{fourier_transform, MomentumGrid};
use crate::wavefunction::{evaluate, PhysicalUnits, WaveFunction};

/// Relative agreement required between the closed-form and assembled minima.
pub const MINIMUM_AGREEMENT: f64 = 1e-8;
/// Default coefficient decay exponent for random admissible states.
pub const DEFAULT_DECAY: f64 = 1.0;
/// Default tapered-Gaussian widths, as fractions of the slit width.
pub const DEFAULT_SCAN_FRACTIONS: [f64; 4] = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
/// Grid points required across `[-2s, 2s]` to resolve a tapered Gaussian.
pub const MIN_POINTS_ACROSS_PEAK: usize = 32;

/// Dirichlet sine modes `n = 1..=n_max` on a slit, sampled on `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineBasis<T> {
    pub n_max: usize,
    pub slit: Slit<T>,
    pub points: usize,
}

impl<T: Real> SineBasis<T> {
    pub fn new(n_max: usize, slit: Slit<T>) -> Result<Self> {
        Self::with_points(n_max, slit, DEFAULT_POSITION_POINTS)
    }

    pub fn with_points(n_max: usize, slit: Slit<T>, points: usize) -> Result<Self> {
        slit.validate()?;
        if n_max == 0 {
            return Err(Error::InvalidInput("sine basis needs n_max >= 1".into()));
        }
        if points < 2 * n_max + 1 {
            return Err(Error::InvalidInput(format!(
                "{points} points cannot resolve {n_max} sine modes"
            )));
        }
        Ok(Self { n_max, slit, points })
    }

    pub fn grid(&self) -> UniformGrid<T> {
        UniformGrid::new(self.slit.left(), self.slit.right(), self.points).expect("validated slit")
    }

    /// Samples of mode `n` (1-based); exactly zero on both edges.
    pub fn mode(&self, n: usize) -> Vec<T> {
        let norm = (T::lit(2.0) / self.slit.width).sqrt();
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 || i == last {
                    T::zero()
                } else {
                    let t = T::from_count(i) / T::from_count(last);
                    norm * (T::from_count(n) * T::PI() * t).sin()
                }
            })
            .collect()
    }

    /// Samples of `sum_n c_n u_n`.
    pub fn combine(&self, coefficients: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.points];
        for (k, &c) in coefficients.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            for (o, u) in out.iter_mut().zip(self.mode(k + 1)) {
                *o = *o + c * u;
            }
        }
        out
    }

    /// Largest deviation of the quadrature Gram matrix from the identity.
    pub fn gram_defect(&self) -> T {
        let h = self.grid().spacing();
        let modes: Vec<Vec<T>> = (1..=self.n_max).map(|n| self.mode(n)).collect();
        let mut worst = T::zero();
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let prod: Vec<T> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((trapezoid(&prod, h) - target).abs());
            }
        }
        worst
    }
}

/// `hbar^2 ||phi'||^2 / ||phi||^2` for `phi = sum c_n u_n`, in closed form.
pub fn rayleigh_quotient<T: Real>(coefficients: &[T], basis: &SineBasis<T>, units: PhysicalUnits<T>) -> Result<T> {
    if coefficients.len() > basis.n_max {
        return Err(Error::InvalidInput(format!(
            "{} coefficients for a basis of {} modes",
            coefficients.len(),
            basis.n_max
        )));
    }
    let norm: T = coefficients.iter().map(|c| *c * *c).sum();
    if !(norm > T::zero()) {
        return Err(Error::InvalidInput("rayleigh quotient of the zero vector".into()));
    }
    let weighted: T = coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| T::from_count((k + 1) * (k + 1)) * *c * *c)
        .sum();
    let scale = units.hbar * T::PI() / basis.slit.width;
    Ok(scale * scale * weighted / norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult<T> {
    /// Minimal Rayleigh quotient (momentum squared).
    pub min_sigma_p_sq: T,
    /// Unit-norm minimizer in the sine basis.
    pub coefficients: Vec<T>,
    /// `sigma_p dx` at the minimizer.
    pub sigma_p_dx: T,
    /// L2 distance between the minimizer and the cosine hump.
    pub l2_error_vs_psi0: T,
    /// Minimum of the diagonal form, `(pi hbar / dx)^2`.
    pub closed_form_minimum: T,
    /// Ascending eigenvalues of the assembled stiffness problem.
    pub assembled_eigenvalues: Vec<T>,
}

/// Stiffness and mass matrices `hbar^2 <u_m'|u_n'>`, `<u_m|u_n>` by quadrature.
pub fn assemble<T: Real>(basis: &SineBasis<T>, units: PhysicalUnits<T>) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = basis.grid().spacing();
    let modes: Vec<Vec<T>> = (1..=basis.n_max).map(|n| basis.mode(n)).collect();
    let slopes: Vec<Vec<T>> = modes
        .iter()
        .map(|m| {
            let as_complex: Vec<Complex<T>> = m.iter().map(|v| Complex::new(*v, T::zero())).collect();
            derivative(&as_complex, h).into_iter().map(|z| z.re).collect()
        })
        .collect();
    let hbar2 = units.hbar * units.hbar;
    let n = basis.n_max;
    let inner = |a: &[T], b: &[T]| {
        let prod: Vec<T> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
        trapezoid(&prod, h)
    };
    let stiffness = DMatrix::from_fn(n, n, |i, j| (hbar2 * inner(&slopes[i], &slopes[j])).to_f64_lossy());
    let mass = DMatrix::from_fn(n, n, |i, j| inner(&modes[i], &modes[j]).to_f64_lossy());
    (stiffness, mass)
}

/// Minimizes the Rayleigh quotient over the basis, in closed form and by a
/// dense symmetric eigensolve of the assembled generalized problem.
pub fn minimize<T: Real>(basis: &SineBasis<T>, units: PhysicalUnits<T>) -> Result<VariationalResult<T>> {
    let scale = units.hbar * T::PI() / basis.slit.width;
    let closed_form = scale * scale;

    let (stiffness, mass) = assemble(basis, units);
    let chol = mass
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("quadrature mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("singular mass factor".into()))?;
    let reduced = &l_inv * &stiffness * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..basis.n_max).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let eigenvalues: Vec<T> = order.iter().map(|&k| T::lit(eigen.eigenvalues[k])).collect();

    let ground = eigen.eigenvectors.column(order[0]).into_owned();
    let mut coefficients: Vec<f64> = (l_inv.transpose() * ground).iter().copied().collect();
    let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
    let pivot = coefficients
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    for c in &mut coefficients {
        *c *= sign / norm;
    }
    let coefficients: Vec<T> = coefficients.into_iter().map(T::lit).collect();

    let assembled_min = eigenvalues[0];
    let relative = ((assembled_min - closed_form) / closed_form).abs();
    if !(relative <= T::lit(MINIMUM_AGREEMENT)) {
        return Err(Error::Inconsistency {
            derivative: assembled_min.to_f64_lossy(),
            momentum: closed_form.to_f64_lossy(),
            relative: relative.to_f64_lossy(),
        });
    }

    let min_sigma_p_sq = rayleigh_quotient(&coefficients, basis, units)?;
    let minimizer = basis.combine(&coefficients);
    let grid = basis.grid();
    let diff: Vec<T> = grid
        .nodes()
        .zip(&minimizer)
        .map(|(x, m)| {
            let psi0 = evaluate(&WaveFunction::CosineHump, basis.slit.width, x - basis.slit.center)
                .map(|z| z.re)
                .unwrap_or(T::zero());
            (*m - psi0).powi(2)
        })
        .collect();
    Ok(VariationalResult {
        min_sigma_p_sq,
        sigma_p_dx: min_sigma_p_sq.sqrt() * basis.slit.width,
        l2_error_vs_psi0: trapezoid(&diff, grid.spacing()).sqrt(),
        coefficients,
        closed_form_minimum: closed_form,
        assembled_eigenvalues: eigenvalues,
    })
}

/// Coefficients `c_n ~ g_n / n^(decay + 1)`, `g_n` standard normal, unit norm.
pub fn random_coefficients(seed: u64, n_max: usize, decay: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<f64> = (1..=n_max)
        .map(|n| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g / (n as f64).powf(decay + 1.0)
        })
        .collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        c.iter_mut().for_each(|x| *x /= norm);
    } else {
        c[0] = 1.0;
    }
    c
}

/// A seeded pseudo-random state in the span of the sine basis.
///
/// The state is handed to the projection as sampled data, so it goes
/// through the same numerical admissibility test as any measured input.
pub fn random_admissible<T: Real>(
    seed: u64,
    basis: &SineBasis<T>,
    decay: T,
    units: PhysicalUnits<T>,
) -> Result<PreparedState<T>> {
    if !(decay > T::lit(0.5)) {
        return Err(Error::InvalidInput(format!("decay must exceed 1/2, got {decay}")));
    }
    let coefficients: Vec<T> = random_coefficients(seed, basis.n_max, decay.to_f64_lossy())
        .into_iter()
        .map(T::lit)
        .collect();
    let values = basis
        .combine(&coefficients)
        .into_iter()
        .map(|v| Complex::new(v, T::zero()))
        .collect();
    let wf = WaveFunction::sampled(basis.grid().nodes().collect(), values)?;
    project(&wf, basis.slit, units, basis.points)
}

/// Grid and momentum window used when scanning a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings<T> {
    pub position_points: usize,
    pub momentum: MomentumGrid<T>,
}

impl<T: Real> ScanSettings<T> {
    pub fn default_for(slit: &Slit<T>, units: &PhysicalUnits<T>) -> Self {
        Self {
            position_points: DEFAULT_POSITION_POINTS,
            momentum: MomentumGrid::default_for(slit, units),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<T> {
    pub s: T,
    pub sigma_x: T,
    pub sigma_p: T,
    pub product_sigma: T,
    pub product_slit: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyScan<T> {
    pub slit: Slit<T>,
    pub units: PhysicalUnits<T>,
    pub points: Vec<ScanPoint<T>>,
}

/// The default widths `dx/4, dx/8, dx/16, dx/32`.
pub fn default_scan_widths<T: Real>(slit: &Slit<T>) -> Vec<T> {
    DEFAULT_SCAN_FRACTIONS.iter().map(|f| slit.width * T::lit(*f)).collect()
}

/// Position points needed to put `MIN_POINTS_ACROSS_PEAK` nodes across `[-2s, 2s]`.
pub fn required_points_for_width<T: Real>(s: T, slit: &Slit<T>) -> usize {
    let cells = (T::from_count(MIN_POINTS_ACROSS_PEAK) * slit.width / (T::lit(4.0) * s)).ceil();
    cells.to_usize().unwrap_or(usize::MAX).saturating_add(1)
}

/// Moments of the tapered Gaussian family for decreasing widths `s`.
pub fn gaussian_limit_scan<T: Real>(
    s_values: &[T],
    slit: Slit<T>,
    units: PhysicalUnits<T>,
    settings: ScanSettings<T>,
) -> Result<FamilyScan<T>> {
    slit.validate()?;
    if s_values.is_empty() {
        return Err(Error::InvalidInput("empty width list".into()));
    }
    if s_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("widths must be strictly decreasing".into()));
    }
    for &s in s_values {
        if !(s > T::zero() && s < slit.half_width()) {
            return Err(Error::InvalidInput(format!("width {s} must lie in (0, dx/2)")));
        }
        let required = required_points_for_width(s, &slit);
        if settings.position_points < required {
            return Err(Error::Resolution {
                s: s.to_f64_lossy(),
                required_points: required,
            });
        }
    }
    let mut points = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let prepared = project(&WaveFunction::TaperedGaussian { s }, slit, units, settings.position_points)?;
        let admissibility = classify_admissibility(&prepared, AdmissibilityTolerances::default());
        if !admissibility.admissible {
            return Err(Error::InvalidInput(format!("tapered gaussian with s = {s} is not admissible")));
        }
        let spectrum = fourier_transform(&prepared, settings.momentum);
        let report = moment_report(&prepared, &admissibility, &spectrum)?;
        let bounds = check_bounds(&report, &slit);
        let sigma_p = report.sigma_p.value().expect("admissible state has finite sigma_p");
        points.push(ScanPoint {
            s,
            sigma_x: report.sigma_x,
            sigma_p,
            product_sigma: bounds.kennard_lhs.unwrap_or(T::nan()),
            product_slit: bounds.slit_lhs.unwrap_or(T::nan()),
        });
    }
    Ok(FamilyScan { slit, units, points })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn basis(n_max: usize) -> SineBasis<f64> {
        SineBasis::new(n_max, Slit::centered(1.0).unwrap()).unwrap()
    }

    #[test]
    fn rayleigh_quotient_examples() {
        let b = basis(4);
        let u = PhysicalUnits::default();
        let pi2 = PI * PI;
        assert!((rayleigh_quotient(&[1.0, 0.0, 0.0], &b, u).unwrap() - pi2).abs() < 1e-12);
        assert!((rayleigh_quotient(&[0.0, 1.0, 0.0], &b, u).unwrap() - 4.0 * pi2).abs() < 1e-12);
        let r = rayleigh_quotient(&[1.0 / 2.0_f64.sqrt(); 2], &b, u).unwrap();
        assert!((r - 2.5 * pi2).abs() < 1e-12);
        assert!(rayleigh_quotient(&[0.0, 0.0], &b, u).is_err());
    }

    #[test]
    fn basis_is_orthonormal_and_vanishes_at_edges() {
        let b = basis(12);
        assert!(b.gram_defect() < 1e-10);
        for n in 1..=12 {
            let m = b.mode(n);
            assert_eq!(m[0], 0.0);
            assert_eq!(m[m.len() - 1], 0.0);
        }
        // u_1 is the cosine hump
        let hump = b.mode(1);
        for (x, v) in b.grid().nodes().zip(&hump) {
            assert!((v - 2.0_f64.sqrt() * (PI * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn minimize_examples() {
        let u = PhysicalUnits::default();
        for n_max in [1, 8] {
            let r = minimize(&basis(n_max), u).unwrap();
            assert!((r.min_sigma_p_sq / (PI * PI) - 1.0).abs() < 1e-8);
            assert!((r.sigma_p_dx - PI).abs() < 1e-8);
            assert!(r.l2_error_vs_psi0 < 1e-6);
        }
        let r = minimize(&basis(4), u).unwrap();
        for (k, ev) in r.assembled_eigenvalues.iter().enumerate() {
            let exact = ((k + 1) * (k + 1)) as f64 * PI * PI;
            assert!((ev / exact - 1.0).abs() < 1e-6, "mode {}: {ev}", k + 1);
        }
    }

    #[test]
    fn random_states_are_deterministic() {
        let b = SineBasis::with_points(16, Slit::centered(1.0).unwrap(), 513).unwrap();
        let u = PhysicalUnits::default();
        let a = random_admissible(42, &b, 1.0, u).unwrap();
        let c = random_admissible(42, &b, 1.0, u).unwrap();
        assert_eq!(a, c);
        let d = random_admissible(43, &b, 1.0, u).unwrap();
        assert_ne!(a.state.values, d.state.values);
        assert!(random_admissible(1, &b, 0.5, u).is_err());
    }

    #[test]
    fn scan_validation() {
        let slit = Slit::centered(1.0).unwrap();
        let u = PhysicalUnits::default();
        let settings = ScanSettings { position_points: 129, momentum: MomentumGrid::new(50.0, 2001).unwrap() };
        assert!(matches!(gaussian_limit_scan(&[0.1, 0.2], slit, u, settings), Err(Error::InvalidInput(_))));
        assert!(matches!(gaussian_limit_scan(&[0.6], slit, u, settings), Err(Error::InvalidInput(_))));
        match gaussian_limit_scan(&[0.25, 0.01], slit, u, settings) {
            Err(Error::Resolution { required_points, .. }) => assert_eq!(required_points, 801),
            other => panic!("{other:?}"),
        }
        assert_eq!(required_points_for_width(0.25, &slit), 33);
    }
}
