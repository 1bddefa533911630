//! Uniform grids, composite trapezoidal quadrature and finite differences.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// `n` equally spaced nodes on `[start, end]`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    start: T,
    end: T,
    n: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(start: T, end: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {n}")));
        }
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidInput(format!(
                "grid interval [{start}, {end}] must be finite with start < end"
            )));
        }
        Ok(Self { start, end, n })
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn end(&self) -> T {
        self.end
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> T {
        (self.end - self.start) / T::from_count(self.n - 1)
    }

    /// Node `i`; the last node is exactly `end`.
    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.end
        } else {
            self.start + (self.end - self.start) * T::from_count(i) / T::from_count(self.n - 1)
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// The grid with every cell halved (`2n - 1` nodes, old nodes kept).
    pub fn refined(&self) -> Self {
        Self {
            start: self.start,
            end: self.end,
            n: 2 * self.n - 1,
        }
    }
}

/// Composite trapezoidal rule for samples `f` on spacing `h`.
pub fn trapezoid<T: Real>(f: &[T], h: T) -> T {
    match f.len() {
        0 | 1 => T::zero(),
        n => {
            let interior: T = f[1..n - 1].iter().copied().sum();
            h * (interior + (f[0] + f[n - 1]) * T::lit(0.5))
        }
    }
}

pub fn trapezoid_complex<T: Real>(f: &[Complex<T>], h: T) -> Complex<T> {
    let re: Vec<T> = f.iter().map(|z| z.re).collect();
    let im: Vec<T> = f.iter().map(|z| z.im).collect();
    Complex::new(trapezoid(&re, h), trapezoid(&im, h))
}

/// Trapezoidal integral of `f(x)` over `[a, b]` where `a`, `b` may fall
/// inside cells of the sample grid `xs`; the integrand is interpolated
/// linearly in the partial cells.
pub fn trapezoid_between<T: Real>(xs: &[T], f: &[T], a: T, b: T) -> T {
    debug_assert_eq!(xs.len(), f.len());
    if xs.len() < 2 || !(a < b) {
        return T::zero();
    }
    let a = a.max(xs[0]);
    let b = b.min(xs[xs.len() - 1]);
    if !(a < b) {
        return T::zero();
    }
    let lerp = |i: usize, x: T| {
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        f[i] + (f[i + 1] - f[i]) * t
    };
    let mut total = T::zero();
    for i in 0..xs.len() - 1 {
        let lo = xs[i].max(a);
        let hi = xs[i + 1].min(b);
        if hi <= lo {
            continue;
        }
        total = total + (hi - lo) * (lerp(i, lo) + lerp(i, hi)) * T::lit(0.5);
    }
    total
}

/// Derivative of uniformly spaced samples.
///
/// Fourth-order central differences in the interior with fourth-order
/// one-sided stencils on the two nodes at each end. Falls back to lower
/// order when fewer than five samples are available.
pub fn derivative<T: Real>(f: &[Complex<T>], h: T) -> Vec<Complex<T>> {
    let n = f.len();
    let zero = Complex::new(T::zero(), T::zero());
    match n {
        0 => return Vec::new(),
        1 => return vec![zero],
        2..=4 => {
            let mut d = vec![zero; n];
            if n == 2 {
                let slope = (f[1] - f[0]) / h;
                return vec![slope, slope];
            }
            let two_h = h + h;
            d[0] = (f[0] * T::lit(-3.0) + f[1] * T::lit(4.0) - f[2]) / two_h;
            d[n - 1] = (f[n - 1] * T::lit(3.0) - f[n - 2] * T::lit(4.0) + f[n - 3]) / two_h;
            for i in 1..n - 1 {
                d[i] = (f[i + 1] - f[i - 1]) / two_h;
            }
            return d;
        }
        _ => {}
    }
    let c = |x: f64| T::lit(x);
    let twelve_h = h * c(12.0);
    let mut d = vec![zero; n];
    d[0] = (f[0] * c(-25.0) + f[1] * c(48.0) - f[2] * c(36.0) + f[3] * c(16.0) - f[4] * c(3.0))
        / twelve_h;
    d[1] = (f[0] * c(-3.0) - f[1] * c(10.0) + f[2] * c(18.0) - f[3] * c(6.0) + f[4]) / twelve_h;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - f[i - 1] * c(8.0) + f[i + 1] * c(8.0) - f[i + 2]) / twelve_h;
    }
    let m = n - 1;
    d[m] = (f[m] * c(25.0) - f[m - 1] * c(48.0) + f[m - 2] * c(36.0) - f[m - 3] * c(16.0)
        + f[m - 4] * c(3.0))
        / twelve_h;
    d[m - 1] = (f[m] * c(3.0) + f[m - 1] * c(10.0) - f[m - 2] * c(18.0) + f[m - 3] * c(6.0)
        - f[m - 4])
        / twelve_h;
    d
}
