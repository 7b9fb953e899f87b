//! Passage between lattice sequences and continuum fields: the semidiscrete
//! Fourier transform, band-limited (sinc) interpolation, the norm identities
//! that make the rescaled comparison meaningful, and the coarse-grained
//! fields built from a stored run.
//!
//! With `F[f](kappa) = (1/2pi) sum_j e^{-i j kappa} f(j)` on `[-pi, pi]`,
//! cutting at the Nyquist band and transforming back gives exactly the
//! cardinal series `L[f](x) = sum_j f(j) sinc(x - j)` with the normalized
//! `sinc(y) = sin(pi y)/(pi y)`. Its integer translates are orthonormal in
//! `L2(R)`, so sampling inverts it (`L[f](j) = f(j)`) and it preserves the
//! norm (`||L[f]||_{L2(R)} = ||f||_{l2}`); both identities are verified
//! numerically in the tests rather than taken on faith.

use crate::lattice::{CoefficientField, LatticeState};
use crate::homogenization::WaveProfiles;
use crate::quad::{simpson, trapezoid_periodic};
use crate::scalar::Real;
use crate::seq::{LatticeSeq, Window};
use crate::sums::Kahan;
use crate::Error;
use num_complex::Complex;

/// Entries smaller than this fraction of the sup norm are dropped from sinc
/// series; each skipped term perturbs values by at most that fraction.
const TRIM_RELATIVE: f64 = 1e-14;

/// Hard cap on the sampling radius used by [`interp_convergence_error`] for
/// slowly decaying functions.
const MAX_SAMPLE_RADIUS: i64 = 100_000;

/// Semidiscrete Fourier transform `(1/2pi) sum_j e^{-i j kappa} f(j)`.
pub fn sequence_fourier<T: Real>(f: &LatticeSeq<T>, kappa: T) -> Complex<T> {
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for (j, v) in f.iter() {
        let phase = -kappa * T::from_f64(j as f64);
        re.add(v * phase.cos());
        im.add(v * phase.sin());
    }
    let norm = (T::from_f64(2.0) * T::PI()).recip();
    Complex::new(re.value() * norm, im.value() * norm)
}

/// `integral_{-pi}^{pi} |F[f](kappa)|^2 dkappa` by the periodic trapezoid
/// rule, which is exact (to roundoff) once `n` exceeds the spread of the
/// sequence's index differences. Equals `||f||^2 / 2pi`.
pub fn fourier_l2_squared<T: Real>(f: &LatticeSeq<T>, n: usize) -> T {
    trapezoid_periodic(|kappa| sequence_fourier(f, kappa).norm_sqr(), -T::PI(), T::PI(), n)
}

/// Cardinal series of a sequence, trimmed to its numerically alive support.
///
/// Evaluation uses `sin(pi(x - j)) = (-1)^(n - j) sin(pi delta)` with
/// `n = round(x)`, `delta = x - n`, so the sine is computed once per point
/// and integer points reproduce stored entries exactly.
pub struct SincSeries<'a, T> {
    f: &'a LatticeSeq<T>,
    lo: i64,
    hi: i64,
}

impl<'a, T: Real> SincSeries<'a, T> {
    pub fn new(f: &'a LatticeSeq<T>) -> Self {
        let w = f.window();
        let thr = f.linf_norm() * T::from_f64(TRIM_RELATIVE);
        let mut lo = w.radius() + 1;
        let mut hi = -w.radius() - 1;
        for (j, v) in f.iter() {
            if v.abs() >= thr && thr > T::zero() {
                lo = lo.min(j);
                hi = hi.max(j);
            }
        }
        Self { f, lo, hi }
    }

    pub fn eval(&self, x: T) -> T {
        if self.lo > self.hi {
            return T::zero();
        }
        let nearest = x.round();
        let n_int = nearest.as_f64() as i64;
        let delta = x - nearest;
        let sin_pi_delta = (T::PI() * delta).sin();
        let inv_pi = T::PI().recip();
        let mut acc = Kahan::new();
        for j in self.lo..=self.hi {
            let v = self.f.get(j);
            if j == n_int && delta == T::zero() {
                acc.add(v);
            } else {
                let d = x - T::from_f64(j as f64);
                let sign = if (n_int - j) & 1 == 0 { T::one() } else { -T::one() };
                acc.add(v * sign * sin_pi_delta * inv_pi / d);
            }
        }
        acc.value()
    }
}

/// Band-limited interpolant `L[f](x) = sum_j f(j) sinc(x - j)` at one point.
/// For repeated evaluation construct a [`SincSeries`] once instead.
pub fn lowpass_interpolate<T: Real>(f: &LatticeSeq<T>, x: T) -> T {
    SincSeries::new(f).eval(x)
}

/// `L2(R)` norm of the interpolant by Simpson quadrature over the alive
/// support padded by `pad`, at grid step `step`. Used to verify the norm
/// identity against `||f||_{l2}`.
pub fn interpolant_l2_norm<T: Real>(f: &LatticeSeq<T>, pad: T, step: T) -> T {
    let series = SincSeries::new(f);
    let radius = T::from_f64(f.window().radius() as f64) + pad;
    let n = ((T::from_f64(2.0) * radius / step).ceil().as_f64() as usize).max(8);
    simpson(|x| series.eval(x).powi(2), -radius, radius, n)
        .max(T::zero())
        .sqrt()
}

/// `L2(R)` distance between `f`'s rescaled sample interpolant and `f`
/// itself: sample `g(j) = f(eps j)`, interpolate, compare
/// `L[g](x/eps)` with `f(x)` over `|x| <= error_radius`.
///
/// For band-limited `f` (spectrum inside `[-pi/eps, pi/eps]`) the result is
/// zero up to sampling truncation and quadrature; for merely smooth `f` it
/// decays in `eps` at a rate set by the spectral tail. Sampling extends past
/// the numerically alive support of `f`, capped at 100k sites either side,
/// so slowly decaying functions are handled at bounded cost.
pub fn interp_convergence_error<T: Real>(
    f: impl Fn(T) -> T,
    error_radius: T,
    epsilon: T,
) -> Result<T, Error> {
    if !(epsilon > T::zero() && epsilon <= T::from_f64(0.5)) {
        return Err(Error::InvalidEpsilon(epsilon.as_f64()));
    }
    if !(error_radius > T::zero()) {
        return Err(Error::NonPositiveSupport(
            "interpolation error radius must be positive".into(),
        ));
    }
    // scan for the largest |x| where f is numerically alive, capped
    let scan_step = epsilon.max(T::from_f64(0.25));
    let scan_max = epsilon * T::from_f64(MAX_SAMPLE_RADIUS as f64);
    let scan_n = (scan_max / scan_step).ceil().as_f64() as usize;
    let mut sup = T::zero();
    for i in 0..=scan_n {
        let x = scan_step * T::from_f64(i as f64);
        sup = sup.max(f(x).abs()).max(f(-x).abs());
    }
    let thr = sup * T::from_f64(TRIM_RELATIVE);
    let mut alive = error_radius;
    for i in (0..=scan_n).rev() {
        let x = scan_step * T::from_f64(i as f64);
        if f(x).abs() >= thr || f(-x).abs() >= thr {
            alive = alive.max(x + scan_step);
            break;
        }
    }
    let j_max = ((alive / epsilon).ceil().as_f64() as i64 + 2).min(MAX_SAMPLE_RADIUS);
    let w = Window::new(j_max);
    let g = LatticeSeq::from_fn(w, |j| f(epsilon * T::from_f64(j as f64)));
    let series = SincSeries::new(&g);
    // six quadrature points per lattice spacing resolves the difference
    let n = ((T::from_f64(12.0) * error_radius / epsilon).ceil().as_f64() as usize).max(16);
    let err_sq = simpson(
        |x| (series.eval(x / epsilon) - f(x)).powi(2),
        -error_radius,
        error_radius,
        n,
    );
    Ok(err_sq.max(T::zero()).sqrt())
}

/// Macroscopic fields of a stored run: at each recorded time,
/// `Q(X) = L[k r](X/eps)` and `P(X) = L[p](X/eps)`, indexed by the
/// macroscopic time `tau = eps t`.
pub struct CoarseGrained<T> {
    epsilon: T,
    taus: Vec<T>,
    kr: Vec<LatticeSeq<T>>,
    p: Vec<LatticeSeq<T>>,
}

impl<T: Real> CoarseGrained<T> {
    pub fn from_run(
        run: &[(T, LatticeState<T>)],
        coeffs: &CoefficientField<T>,
        epsilon: T,
    ) -> Result<Self, Error> {
        if run.is_empty() {
            return Err(Error::EmptyInput("coarse-graining needs at least one record"));
        }
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::InvalidEpsilon(epsilon.as_f64()));
        }
        let mut taus = Vec::with_capacity(run.len());
        let mut kr = Vec::with_capacity(run.len());
        let mut p = Vec::with_capacity(run.len());
        for (t, state) in run {
            if state.window() != coeffs.window() {
                return Err(Error::WindowMismatch {
                    left: state.window(),
                    right: coeffs.window(),
                    context: "coarse_grain::from_run",
                });
            }
            taus.push(epsilon * *t);
            kr.push(LatticeSeq::from_fn(state.window(), |j| coeffs.k(j) * state.r.get(j)));
            p.push(state.p.clone());
        }
        Ok(Self { epsilon, taus, kr, p })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Macroscopic times of the stored records.
    pub fn taus(&self) -> &[T] {
        &self.taus
    }

    /// Index of the record at macroscopic time `tau` (must match a stored
    /// time up to roundoff).
    pub fn at_tau(&self, tau: T) -> Result<usize, Error> {
        let tol = T::from_f64(1e-9) * T::one().max(tau.abs());
        let mut best = 0usize;
        let mut best_d = T::infinity();
        for (i, &t) in self.taus.iter().enumerate() {
            let d = (t - tau).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        if best_d <= tol {
            Ok(best)
        } else {
            Err(Error::InvalidArgument(format!(
                "tau = {} is not among the stored times (nearest differs by {})",
                tau.as_f64(),
                best_d.as_f64()
            )))
        }
    }

    /// `Q(X)` at record `i`.
    pub fn q(&self, i: usize, x: T) -> T {
        SincSeries::new(&self.kr[i]).eval(x / self.epsilon)
    }

    /// `P(X)` at record `i`.
    pub fn p(&self, i: usize, x: T) -> T {
        SincSeries::new(&self.p[i]).eval(x / self.epsilon)
    }

    /// `L2(R)` distances `(||Q - Q0||, ||P - P0||)` at record `i`, against
    /// the d'Alembert solution of the averaged system, integrated over the
    /// region the wave can have reached.
    pub fn l2_error_vs_effective(&self, i: usize, wp: &WaveProfiles<T>) -> (T, T) {
        let tau = self.taus[i];
        let radius =
            wp.support_radius() + wp.speed() * tau.abs() + T::from_f64(5.0);
        // four quadrature points per lattice spacing
        let n = ((T::from_f64(8.0) * radius / self.epsilon).ceil().as_f64() as usize).max(16);
        let q_series = SincSeries::new(&self.kr[i]);
        let p_series = SincSeries::new(&self.p[i]);
        let q_err = simpson(
            |x| (q_series.eval(x / self.epsilon) - wp.effective(x, tau).0).powi(2),
            -radius,
            radius,
            n,
        );
        let p_err = simpson(
            |x| (p_series.eval(x / self.epsilon) - wp.effective(x, tau).1).powi(2),
            -radius,
            radius,
            n,
        );
        (q_err.max(T::zero()).sqrt(), p_err.max(T::zero()).sqrt())
    }
}
