//! Single-slit preparation of quantum states and the position/momentum
//! uncertainty it implies.
//!
//! A state restricted to a slit of width `dx` has a finite momentum spread
//! only when it vanishes at both edges; in that case `sigma_p dx >= pi hbar`,
//! with equality for the cosine hump. The crate prepares states, transforms
//! them to momentum space, classifies `sigma_p` as finite or divergent,
//! checks both uncertainty bounds and verifies sharpness variationally.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod export;
pub mod moments;
pub mod num;
pub mod quadrature;
pub mod slit;
pub mod spectral;
pub mod variational;
pub mod wavefunction;

pub use error::{Error, Result};
pub use num::Real;

pub type PhysicalUnits64 = wavefunction::PhysicalUnits<f64>;
pub type WaveFunction64 = wavefunction::WaveFunction<f64>;
pub type SampledState64 = wavefunction::SampledState<f64>;
pub type Slit64 = slit::Slit<f64>;
pub type PreparedState64 = slit::PreparedState<f64>;
pub type AdmissibilityReport64 = slit::AdmissibilityReport<f64>;
pub type MomentumGrid64 = spectral::MomentumGrid<f64>;
pub type MomentumSpectrum64 = spectral::MomentumSpectrum<f64>;
pub type TailModel64 = spectral::TailModel<f64>;
pub type MomentReport64 = moments::MomentReport<f64>;
pub type BoundCheck64 = moments::BoundCheck<f64>;
pub type SineBasis64 = variational::SineBasis<f64>;
pub type VariationalResult64 = variational::VariationalResult<f64>;
pub type FamilyScan64 = variational::FamilyScan<f64>;

pub type PhysicalUnits32 = wavefunction::PhysicalUnits<f32>;
pub type Slit32 = slit::Slit<f32>;
pub type PreparedState32 = slit::PreparedState<f32>;
