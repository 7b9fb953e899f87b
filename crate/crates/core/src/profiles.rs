//! Smooth macroscopic profiles: Gaussian mixtures with analytic derivatives
//! up to fourth order, and the validated initial-data pair.

use crate::quad::simpson;
use crate::scalar::Real;
use crate::Error;

/// Derivative orders are capped here; everything downstream needs at most
/// four (two for residuals, up to four for weighted Sobolev norms).
pub const MAX_DERIVATIVE: usize = 4;

/// A single smooth bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    Gaussian { center: T, width: T },
}

impl<T: Real> Kernel<T> {
    /// `d^order/dx^order exp(-u^2)` with `u = (x - center) / width`.
    ///
    /// The polynomial prefactors are the usual Hermite recurrences written
    /// out explicitly, so each call is a handful of multiplications.
    #[inline]
    pub fn eval(&self, order: usize, x: T) -> T {
        let Kernel::Gaussian { center, width } = *self;
        let u = (x - center) / width;
        let g = (-u * u).exp();
        let two = T::from_f64(2.0);
        match order {
            0 => g,
            1 => -(two * u / width) * g,
            2 => (T::from_f64(4.0) * u * u - two) / (width * width) * g,
            3 => {
                let w3 = width * width * width;
                (T::from_f64(12.0) * u - T::from_f64(8.0) * u * u * u) / w3 * g
            }
            4 => {
                let u2 = u * u;
                let w2 = width * width;
                (T::from_f64(16.0) * u2 * u2 - T::from_f64(48.0) * u2 + T::from_f64(12.0))
                    / (w2 * w2)
                    * g
            }
            _ => panic!("derivative order {order} exceeds {MAX_DERIVATIVE}"),
        }
    }

    /// Radius beyond which the kernel and its tracked derivatives are below
    /// f64 round-off relative to their peak.
    pub fn support_radius(&self) -> T {
        let Kernel::Gaussian { center, width } = *self;
        center.abs() + T::from_f64(7.5) * width.abs()
    }
}

/// Finite linear combination of kernels. Closed under the vector-space
/// operations the wave decomposition needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    terms: Vec<(T, Kernel<T>)>,
}

impl<T: Real> Profile<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn gaussian(amplitude: T, center: T, width: T) -> Self {
        assert!(width > T::zero(), "kernel width must be positive");
        Self {
            terms: vec![(amplitude, Kernel::Gaussian { center, width })],
        }
    }

    pub fn from_terms(terms: Vec<(T, Kernel<T>)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(T, Kernel<T>)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == T::zero())
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        self.eval_deriv(0, x)
    }

    #[inline]
    pub fn eval_deriv(&self, order: usize, x: T) -> T {
        assert!(order <= MAX_DERIVATIVE, "derivative order {order} exceeds {MAX_DERIVATIVE}");
        self.terms
            .iter()
            .map(|(c, k)| *c * k.eval(order, x))
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            terms: self.terms.iter().map(|&(c, k)| (factor * c, k)).collect(),
        }
    }

    /// `self + factor * other` flattened into one mixture.
    pub fn add_scaled(&self, factor: T, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(c, k)| (factor * c, k)));
        Self { terms }
    }

    /// Radius containing the supports of every kernel in the mixture.
    pub fn support_radius(&self) -> T {
        self.terms
            .iter()
            .map(|(_, k)| k.support_radius())
            .fold(T::one(), T::max)
    }

    /// Unweighted `L^2(R)` norm of the given derivative.
    pub fn l2_norm_deriv(&self, order: usize) -> T {
        let radius = self.support_radius();
        // Resolution scales with support so narrow bumps stay resolved.
        let n = 800 + (radius.as_f64() * 40.0) as usize;
        simpson(
            |x| {
                let v = self.eval_deriv(order, x);
                v * v
            },
            -radius,
            radius,
            n,
        )
        .max(T::zero())
        .sqrt()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_deriv(0)
    }
}

/// Macroscopic initial data: strain profile `phi`, velocity profile `psi`,
/// and the lattice-to-continuum scale.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData<T> {
    pub phi: Profile<T>,
    pub psi: Profile<T>,
    pub epsilon: T,
}

impl<T: Real> InitialData<T> {
    /// The long-wave regime needs `0 < epsilon < 1/2`.
    pub fn new(phi: Profile<T>, psi: Profile<T>, epsilon: T) -> Result<Self, Error> {
        if !(epsilon > T::zero() && epsilon < T::from_f64(0.5)) {
            return Err(Error::InvalidEpsilon(epsilon.as_f64()));
        }
        Ok(Self { phi, psi, epsilon })
    }
}
