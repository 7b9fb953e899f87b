//! The truncated mass-spring chain: state, coefficients, vector field,
//! energies, and the definitional residual of an arbitrary candidate
//! solution.
//!
//! The dynamics on the window are
//!
//! ```text
//!   d/dt r(j) = p(j+1) - p(j)
//!   d/dt p(j) = [k(j) r(j) - k(j-1) r(j-1)] / m(j)
//! ```
//!
//! with `r`, `p`, and the product `k r` all read as zero outside the window.

use crate::scalar::Real;
use crate::seq::{LatticeSeq, Window};
use crate::sums::Kahan;
use crate::Error;

/// Exact statistics of the law behind a coefficient field.
///
/// `sigma_m` is the standard deviation of the masses. `sigma_k` is the
/// standard deviation of the *reciprocal* springs `1/k`, which is the i.i.d.
/// quantity in the spring law and the one entering every walk bound;
/// `ktilde = 1 / E[1/k]` is the matching harmonic average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientStats<T> {
    pub mbar: T,
    pub ktilde: T,
    pub sigma_m: T,
    pub sigma_k: T,
    pub a_m: T,
    pub b_m: T,
    pub a_k: T,
    pub b_k: T,
}

impl<T: Real> CoefficientStats<T> {
    /// Standard deviation of one increment of the spring corrector walk,
    /// `ktilde / k(j) - 1`.
    pub fn chi_k_step_sd(&self) -> T {
        self.ktilde * self.sigma_k
    }

    /// Standard deviation of one increment of the mass corrector walk,
    /// `m(j) / mbar - 1`.
    pub fn chi_m_step_sd(&self) -> T {
        self.sigma_m / self.mbar
    }

    /// Composite spring deviation `sigma_k * sqrt(ktilde)` as used by the
    /// averaged error bounds; stored alongside the raw value.
    pub fn sigma_k_weighted(&self) -> T {
        self.sigma_k * self.ktilde.sqrt()
    }

    /// Composite mass deviation `sigma_m / sqrt(mbar)`.
    pub fn sigma_m_weighted(&self) -> T {
        self.sigma_m / self.mbar.sqrt()
    }
}

/// Masses and springs on a window, together with the exact statistics of the
/// law they were drawn from (or the exact window statistics for deterministic
/// and imported fields).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField<T> {
    window: Window,
    m: Vec<T>,
    k: Vec<T>,
    stats: CoefficientStats<T>,
}

impl<T: Real> CoefficientField<T> {
    pub fn new(
        window: Window,
        m: Vec<T>,
        k: Vec<T>,
        stats: CoefficientStats<T>,
    ) -> Result<Self, Error> {
        if m.len() != window.len() || k.len() != window.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient arrays ({}, {}) do not match window {}",
                m.len(),
                k.len(),
                window
            )));
        }
        let tol = T::from_f64(1e-12);
        let lo_m = stats.a_m * (T::one() - tol);
        let hi_m = stats.b_m * (T::one() + tol);
        let lo_k = stats.a_k * (T::one() - tol);
        let hi_k = stats.b_k * (T::one() + tol);
        if !(stats.a_m > T::zero() && stats.a_k > T::zero()) {
            return Err(Error::NonPositiveSupport(
                "coefficient bounds must be positive".into(),
            ));
        }
        for &v in &m {
            if !(v >= lo_m && v <= hi_m) {
                return Err(Error::InvalidArgument(format!(
                    "mass {v} outside [{}, {}]",
                    stats.a_m, stats.b_m
                )));
            }
        }
        for &v in &k {
            if !(v >= lo_k && v <= hi_k) {
                return Err(Error::InvalidArgument(format!(
                    "spring {v} outside [{}, {}]",
                    stats.a_k, stats.b_k
                )));
            }
        }
        if !(stats.mbar >= lo_m && stats.mbar <= hi_m) || !(stats.ktilde >= lo_k && stats.ktilde <= hi_k) {
            return Err(Error::InvalidArgument(
                "field averages fall outside the stated support".into(),
            ));
        }
        Ok(Self { window, m, k, stats })
    }

    #[inline]
    pub fn window(&self) -> Window {
        self.window
    }

    #[inline]
    pub fn stats(&self) -> &CoefficientStats<T> {
        &self.stats
    }

    /// Mass at site `j`; panics outside the window (coefficients have no
    /// zero-fill, only the dynamical fields do).
    #[inline]
    pub fn m(&self, j: i64) -> T {
        self.m[self.window.index_of(j).expect("mass read outside window")]
    }

    #[inline]
    pub fn k(&self, j: i64) -> T {
        self.k[self.window.index_of(j).expect("spring read outside window")]
    }

    #[inline]
    pub fn m_slice(&self) -> &[T] {
        &self.m
    }

    #[inline]
    pub fn k_slice(&self) -> &[T] {
        &self.k
    }

    /// Largest vibration frequency the window can support, `2 sqrt(b_k/a_m)`;
    /// time steps are guarded against it.
    pub fn max_frequency(&self) -> T {
        (self.stats.b_k / self.stats.a_m).sqrt() * T::from_f64(2.0)
    }

    /// Constants `(c_lo, c_hi)` with
    /// `c_lo ||(eta, xi)|| <= sqrt(H(eta, xi)) <= c_hi ||(eta, xi)||`
    /// for the weighted energy of [`energy`].
    pub fn energy_equivalence(&self) -> (T, T) {
        let half = T::from_f64(0.5);
        let lo = (self.stats.b_k.recip().min(self.stats.a_m) * half).sqrt();
        let hi = (self.stats.a_k.recip().max(self.stats.b_m) * half).sqrt();
        (lo, hi)
    }
}

/// Strain / velocity pair on a shared window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T> {
    pub r: LatticeSeq<T>,
    pub p: LatticeSeq<T>,
}

impl<T: Real> LatticeState<T> {
    pub fn new(r: LatticeSeq<T>, p: LatticeSeq<T>) -> Result<Self, Error> {
        if r.window() != p.window() {
            return Err(Error::WindowMismatch {
                left: r.window(),
                right: p.window(),
                context: "LatticeState",
            });
        }
        Ok(Self { r, p })
    }

    pub fn zeros(window: Window) -> Self {
        Self {
            r: LatticeSeq::zeros(window),
            p: LatticeSeq::zeros(window),
        }
    }

    pub fn from_fns(window: Window, r: impl FnMut(i64) -> T, p: impl FnMut(i64) -> T) -> Self {
        Self {
            r: LatticeSeq::from_fn(window, r),
            p: LatticeSeq::from_fn(window, p),
        }
    }

    #[inline]
    pub fn window(&self) -> Window {
        self.r.window()
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.p.is_finite()
    }

    /// Product norm `sqrt(|r|^2 + |p|^2)`.
    pub fn l2_norm(&self) -> T {
        let rr = self.r.l2_norm();
        let pp = self.p.l2_norm();
        (rr * rr + pp * pp).sqrt()
    }
}

fn check_state_field<T: Real>(
    state: &LatticeState<T>,
    coeffs: &CoefficientField<T>,
    context: &'static str,
) -> Result<(), Error> {
    if state.window() != coeffs.window() {
        return Err(Error::WindowMismatch {
            left: state.window(),
            right: coeffs.window(),
            context,
        });
    }
    Ok(())
}

/// Vector field of the truncated chain, written into `out`.
pub fn rhs_into<T: Real>(
    state: &LatticeState<T>,
    coeffs: &CoefficientField<T>,
    out: &mut LatticeState<T>,
) {
    debug_assert_eq!(state.window(), coeffs.window());
    debug_assert_eq!(state.window(), out.window());
    let n = state.window().len();
    let r = state.r.as_slice();
    let p = state.p.as_slice();
    let m = coeffs.m_slice();
    let k = coeffs.k_slice();
    let dr = out.r.as_mut_slice();
    let dp = out.p.as_mut_slice();
    for i in 0..n {
        let p_next = if i + 1 < n { p[i + 1] } else { T::zero() };
        dr[i] = p_next - p[i];
        let kr_prev = if i > 0 { k[i - 1] * r[i - 1] } else { T::zero() };
        dp[i] = (k[i] * r[i] - kr_prev) / m[i];
    }
}

/// Vector field of the truncated chain.
pub fn rhs<T: Real>(
    state: &LatticeState<T>,
    coeffs: &CoefficientField<T>,
) -> Result<LatticeState<T>, Error> {
    check_state_field(state, coeffs, "rhs")?;
    let mut out = LatticeState::zeros(state.window());
    rhs_into(state, coeffs, &mut out);
    Ok(out)
}

/// Weighted error energy `H = 1/2 sum_j [ eta(j)^2 / k(j) + m(j) xi(j)^2 ]`.
pub fn energy<T: Real>(
    eta: &LatticeSeq<T>,
    xi: &LatticeSeq<T>,
    coeffs: &CoefficientField<T>,
) -> Result<T, Error> {
    if eta.window() != coeffs.window() || xi.window() != coeffs.window() {
        return Err(Error::WindowMismatch {
            left: eta.window(),
            right: coeffs.window(),
            context: "energy",
        });
    }
    let mut acc = Kahan::new();
    let (e, x) = (eta.as_slice(), xi.as_slice());
    let (m, k) = (coeffs.m_slice(), coeffs.k_slice());
    for i in 0..e.len() {
        acc.add(e[i] * e[i] / k[i]);
        acc.add(m[i] * x[i] * x[i]);
    }
    Ok(acc.value() * T::from_f64(0.5))
}

/// The chain's conserved quadratic form `1/2 sum_j [ k(j) r(j)^2 + m(j) p(j)^2 ]`.
pub fn invariant_energy<T: Real>(
    state: &LatticeState<T>,
    coeffs: &CoefficientField<T>,
) -> Result<T, Error> {
    check_state_field(state, coeffs, "invariant_energy")?;
    let mut acc = Kahan::new();
    let (r, p) = (state.r.as_slice(), state.p.as_slice());
    let (m, k) = (coeffs.m_slice(), coeffs.k_slice());
    for i in 0..r.len() {
        acc.add(k[i] * r[i] * r[i]);
        acc.add(m[i] * p[i] * p[i]);
    }
    Ok(acc.value() * T::from_f64(0.5))
}

/// Residual of an arbitrary candidate solution, evaluated from its defining
/// equations:
///
/// ```text
///   Res1(j) = p(j+1, t) - p(j, t) - dr_dt(j, t)
///   Res2(j) = [k(j) r(j, t) - k(j-1) r(j-1, t)] / m(j) - dp_dt(j, t)
/// ```
///
/// The candidates are callables, so neighbor reads never truncate; the one
/// exception is `Res2` at the left edge, where `k(-J-1)` does not exist and
/// the product term is taken as zero, matching the truncated dynamics.
pub fn residuals<T: Real>(
    r: impl Fn(i64, T) -> T,
    p: impl Fn(i64, T) -> T,
    dr_dt: impl Fn(i64, T) -> T,
    dp_dt: impl Fn(i64, T) -> T,
    coeffs: &CoefficientField<T>,
    t: T,
) -> (LatticeSeq<T>, LatticeSeq<T>) {
    let w = coeffs.window();
    let res1 = LatticeSeq::from_fn(w, |j| p(j + 1, t) - p(j, t) - dr_dt(j, t));
    let res2 = LatticeSeq::from_fn(w, |j| {
        let kr_prev = if w.contains(j - 1) {
            coeffs.k(j - 1) * r(j - 1, t)
        } else {
            T::zero()
        };
        (coeffs.k(j) * r(j, t) - kr_prev) / coeffs.m(j) - dp_dt(j, t)
    });
    (res1, res2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    fn uniform_stats(m: f64, k: f64) -> CoefficientStats<f64> {
        CoefficientStats {
            mbar: m,
            ktilde: k,
            sigma_m: 0.0,
            sigma_k: 0.0,
            a_m: m,
            b_m: m,
            a_k: k,
            b_k: k,
        }
    }

    fn constant_field(window: Window, m: f64, k: f64) -> CoefficientField<f64> {
        CoefficientField::new(
            window,
            vec![m; window.len()],
            vec![k; window.len()],
            uniform_stats(m, k),
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_maps_to_zero() {
        let w = Window::new(4);
        let coeffs = constant_field(w, 1.0, 1.0);
        let out = rhs(&LatticeState::zeros(w), &coeffs).unwrap();
        assert_eq!(out.r.l2_norm(), 0.0);
        assert_eq!(out.p.l2_norm(), 0.0);
    }

    #[test]
    fn kronecker_strain_drives_two_momenta() {
        let w = Window::new(3);
        let m = vec![2.0; w.len()];
        let mut k = vec![1.5; w.len()];
        k[w.index_of(0).unwrap()] = 3.0;
        let coeffs = CoefficientField::new(
            w,
            m,
            k,
            CoefficientStats {
                mbar: 2.0,
                ktilde: 2.0,
                sigma_m: 0.0,
                sigma_k: 0.0,
                a_m: 2.0,
                b_m: 2.0,
                a_k: 1.5,
                b_k: 3.0,
            },
        )
        .unwrap();
        let state = LatticeState::from_fns(w, |j| if j == 0 { 1.0 } else { 0.0 }, |_| 0.0);
        let out = rhs(&state, &coeffs).unwrap();
        assert_eq!(out.r.l2_norm(), 0.0, "dr vanishes when p vanishes");
        assert_eq!(out.p.get(0), 3.0 / 2.0, "dp(0) = k(0)/m(0)");
        assert_eq!(out.p.get(1), -3.0 / 2.0, "dp(1) = -k(0)/m(1)");
        for j in [-3, -2, -1, 2, 3] {
            assert_eq!(out.p.get(j), 0.0);
        }
    }

    #[test]
    fn invariant_energy_is_orthogonal_to_the_flow() {
        // d/dt E = sum [k r dr + m p dp] telescopes to zero under zero-fill.
        let w = Window::new(12);
        let coeffs = constant_field(w, 1.3, 0.8);
        let state = LatticeState::from_fns(
            w,
            |j| (0.4 * j as f64).sin(),
            |j| (0.3 * j as f64).cos() * 0.5,
        );
        let dot = rhs(&state, &coeffs).unwrap();
        let mut de = 0.0;
        for j in w.iter() {
            de += coeffs.k(j) * state.r.get(j) * dot.r.get(j)
                + coeffs.m(j) * state.p.get(j) * dot.p.get(j);
        }
        assert!(de.abs() <= 1e-13, "dE/dt = {de}");
    }

    #[test]
    fn energy_weights_and_equivalence_bounds() {
        let w = Window::new(5);
        let m: Vec<f64> = w.iter().map(|j| 1.0 + 0.3 * ((j * 7).rem_euclid(5) as f64 / 5.0)).collect();
        let k: Vec<f64> = w.iter().map(|j| 0.7 + 0.2 * ((j * 3).rem_euclid(4) as f64 / 4.0)).collect();
        let stats = CoefficientStats {
            mbar: 1.15,
            ktilde: 0.8,
            sigma_m: 0.1,
            sigma_k: 0.1,
            a_m: 1.0,
            b_m: 1.3,
            a_k: 0.7,
            b_k: 0.9,
        };
        let coeffs = CoefficientField::new(w, m, k, stats).unwrap();
        let eta = seq::LatticeSeq::from_fn(w, |j| (j as f64 * 0.9).sin());
        let xi = seq::LatticeSeq::from_fn(w, |j| (j as f64 * 1.7).cos());
        let h = energy(&eta, &xi, &coeffs).unwrap();

        let mut expected = 0.0;
        for j in w.iter() {
            expected += eta.get(j) * eta.get(j) / coeffs.k(j) + coeffs.m(j) * xi.get(j) * xi.get(j);
        }
        expected *= 0.5;
        assert!((h - expected).abs() <= 1e-14 * expected);

        let (lo, hi) = coeffs.energy_equivalence();
        let norm_sq = eta.l2_norm().powi(2) + xi.l2_norm().powi(2);
        assert!(lo * lo * norm_sq <= h * (1.0 + 1e-14));
        assert!(h <= hi * hi * norm_sq * (1.0 + 1e-14));
    }

    #[test]
    fn exact_plane_wave_has_vanishing_residual() {
        // Constant coefficients k = m = 1; r(j,t) = cos(kap j - om t) and
        // p(j,t) = -cos(kap (j - 1/2) - om t) solve the chain exactly when
        // om = 2 sin(kap / 2).
        let w = Window::new(20);
        let coeffs = constant_field(w, 1.0, 1.0);
        let kap = 0.9_f64;
        let om = 2.0 * (kap / 2.0).sin();
        let r = move |j: i64, t: f64| (kap * j as f64 - om * t).cos();
        let p = move |j: i64, t: f64| -(kap * (j as f64 - 0.5) - om * t).cos();
        let dr = move |j: i64, t: f64| om * (kap * j as f64 - om * t).sin();
        let dp = move |j: i64, t: f64| -om * (kap * (j as f64 - 0.5) - om * t).sin();
        let (res1, res2) = residuals(r, p, dr, dp, &coeffs, 0.37);
        // The interior must vanish to roundoff; the window edges see the
        // truncation (the plane wave does not).
        for j in -19..=19 {
            assert!(res1.get(j).abs() <= 1e-13, "res1({j}) = {}", res1.get(j));
        }
        for j in -19..=20 {
            assert!(res2.get(j).abs() <= 1e-13, "res2({j}) = {}", res2.get(j));
        }
    }

    #[test]
    fn field_validation_rejects_out_of_support_values() {
        let w = Window::new(2);
        let bad = CoefficientField::new(
            w,
            vec![1.0, 1.0, 5.0, 1.0, 1.0],
            vec![1.0; 5],
            uniform_stats(1.0, 1.0),
        );
        assert!(bad.is_err());
    }
}
