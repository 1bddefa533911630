//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sin(u)/u` with the removable singularity filled in.
pub fn sinc<T: Real>(u: T) -> T {
    if u.abs() < T::lit(1e-4) {
        let u2 = u * u;
        T::one() - u2 / T::lit(6.0) + u2 * u2 / T::lit(120.0)
    } else {
        u.sin() / u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_at_the_series_switch() {
        for u in [0.99e-4_f64, -0.5e-4] {
            assert!((sinc(u) - u.sin() / u).abs() < 1e-15);
        }
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-16);
    }
}
