//! Core numerics for long-wave ("homogenized") behavior of one-dimensional
//! mass-spring chains with heterogeneous coefficients.
//!
//! The library models the infinite linear chain
//!
//! ```text
//!   d/dt r(j) = p(j+1) - p(j),
//!   d/dt p(j) = [k(j) r(j) - k(j-1) r(j-1)] / m(j),
//! ```
//!
//! truncated to a finite window `[-J, J]` with zero-fill outside, and provides
//! everything needed to compare the true dynamics against its effective
//! wave-equation description: coefficient samplers and corrector walks,
//! symplectic and Runge-Kutta integrators, the two-scale ansatz with its
//! closed-form residuals, weighted-norm and error analysis, and the
//! low-pass coarse-graining bridge between lattice and continuum fields.
//!
//! All numerical kernels are generic over the scalar type through [`Real`];
//! concrete `f64` aliases are exported at the crate root.

pub mod analysis;
pub mod coarse_grain;
pub mod coefficients;
pub mod experiments;
pub mod homogenization;
pub mod integrators;
pub mod lattice;
pub mod profiles;
pub mod quad;
pub mod scalar;
pub mod seq;
pub mod sums;

mod error;

pub use error::Error;
pub use scalar::Real;

/// Convenience alias used across the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

pub type Window = seq::Window;
pub type Seq64 = seq::LatticeSeq<f64>;
pub type State64 = lattice::LatticeState<f64>;
pub type Field64 = lattice::CoefficientField<f64>;
pub type Walks64 = coefficients::CorrectorWalk<f64>;
pub type Profile64 = profiles::Profile<f64>;
pub type WaveProfiles64 = homogenization::WaveProfiles<f64>;
pub type InitialData64 = profiles::InitialData<f64>;
pub type IntegratorSpec64 = integrators::IntegratorSpec<f64>;
