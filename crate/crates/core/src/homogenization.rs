//! Effective description of the disordered chain on long waves: the averaged
//! wave system, its d'Alembert splitting, the two-scale lattice ansatz with
//! corrector terms, and the ansatz residual in both definitional and closed
//! form.
//!
//! Conventions. With `ktilde` the harmonic spring average and `mbar` the mean
//! mass, the macroscopic system is
//!
//! ```text
//!   d/dtau Q = ktilde dP/dX,      d/dtau P = (1/mbar) dQ/dX,
//! ```
//!
//! solved by `Q(X, tau) = A(X - c tau) + B(X + c tau)` and
//! `P = (-A + B)/s` with speed `c = sqrt(ktilde/mbar)` and impedance
//! `s = sqrt(ktilde mbar)`. On the lattice the matching two-scale state is
//!
//! ```text
//!   r(j, t) = [A- + B+]/k(j) + eps (chi_m(j)/k(j)) [A'- + B'+]
//!   p(j, t) = [-A- + B+]/s + eps (chi_k(j)/s) [-A'- + B'+]
//! ```
//!
//! where `A-` abbreviates `A(eps(j - c t))`, `B+` abbreviates
//! `B(eps(j + c t))`, and `chi_k`, `chi_m` are the corrector walks.

use crate::coefficients::CorrectorWalk;
use crate::lattice::{self, CoefficientField, CoefficientStats, LatticeState};
use crate::profiles::{InitialData, Profile};
use crate::scalar::Real;
use crate::seq::LatticeSeq;

/// Speed `sqrt(ktilde / mbar)` of the averaged wave system.
pub fn wave_speed<T: Real>(stats: &CoefficientStats<T>) -> T {
    (stats.ktilde / stats.mbar).sqrt()
}

/// The d'Alembert pair of the averaged system together with the medium
/// constants it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfiles<T> {
    /// right-moving component, argument `X - c tau`
    pub a: Profile<T>,
    /// left-moving component, argument `X + c tau`
    pub b: Profile<T>,
    pub ktilde: T,
    pub mbar: T,
}

impl<T: Real> WaveProfiles<T> {
    /// Split initial data `(phi, psi)` into traveling components
    /// `A = (phi - s psi)/2`, `B = (phi + s psi)/2`.
    pub fn from_initial_data(init: &InitialData<T>, stats: &CoefficientStats<T>) -> Self {
        let half = T::from_f64(0.5);
        let s = (stats.ktilde * stats.mbar).sqrt();
        let a = init.phi.scaled(half).add_scaled(-s * half, &init.psi);
        let b = init.phi.scaled(half).add_scaled(s * half, &init.psi);
        Self {
            a,
            b,
            ktilde: stats.ktilde,
            mbar: stats.mbar,
        }
    }

    pub fn speed(&self) -> T {
        (self.ktilde / self.mbar).sqrt()
    }

    pub fn impedance(&self) -> T {
        (self.ktilde * self.mbar).sqrt()
    }

    /// Macroscopic solution `(Q, P)` at `(x, tau)`.
    pub fn effective(&self, x: T, tau: T) -> (T, T) {
        let c = self.speed();
        let a = self.a.eval(x - c * tau);
        let b = self.b.eval(x + c * tau);
        ((a + b), (b - a) / self.impedance())
    }

    /// Radius containing the supports of both components.
    pub fn support_radius(&self) -> T {
        self.a.support_radius().max(self.b.support_radius())
    }
}

/// Derivatives 0..=2 of `A` at `eps(j - ct)` and of `B` at `eps(j + ct)` for
/// `j` in the window extended by one site on each side. Built once per time
/// sample and shared by the effective state, the ansatz, and the residual.
struct ProfileTable<T> {
    radius: i64,
    a: [Vec<T>; 3],
    b: [Vec<T>; 3],
}

impl<T: Real> ProfileTable<T> {
    fn build(wp: &WaveProfiles<T>, radius: i64, epsilon: T, t: T) -> Self {
        let c = wp.speed();
        let n = (2 * radius + 3) as usize;
        let mut a = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
        let mut b = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
        for i in 0..n {
            let j = T::from_f64((i as i64 - radius - 1) as f64);
            let xm = epsilon * (j - c * t);
            let xp = epsilon * (j + c * t);
            for order in 0..3 {
                a[order][i] = wp.a.eval_deriv(order, xm);
                b[order][i] = wp.b.eval_deriv(order, xp);
            }
        }
        Self { radius, a, b }
    }

    #[inline]
    fn idx(&self, j: i64) -> usize {
        (j + self.radius + 1) as usize
    }
}

fn effective_from_table<T: Real>(
    tab: &ProfileTable<T>,
    wp: &WaveProfiles<T>,
    coeffs: &CoefficientField<T>,
) -> LatticeState<T> {
    let inv_s = wp.impedance().recip();
    LatticeState::from_fns(
        coeffs.window(),
        |j| {
            let i = tab.idx(j);
            (tab.a[0][i] + tab.b[0][i]) / coeffs.k(j)
        },
        |j| {
            let i = tab.idx(j);
            (tab.b[0][i] - tab.a[0][i]) * inv_s
        },
    )
}

fn ansatz_from_table<T: Real>(
    tab: &ProfileTable<T>,
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
) -> LatticeState<T> {
    let inv_s = wp.impedance().recip();
    LatticeState::from_fns(
        coeffs.window(),
        |j| {
            let i = tab.idx(j);
            ((tab.a[0][i] + tab.b[0][i])
                + epsilon * walks.chi_m(j) * (tab.a[1][i] + tab.b[1][i]))
                / coeffs.k(j)
        },
        |j| {
            let i = tab.idx(j);
            ((tab.b[0][i] - tab.a[0][i])
                + epsilon * walks.chi_k(j) * (tab.b[1][i] - tab.a[1][i]))
                * inv_s
        },
    )
}

/// The closed residual formulas; see [`residual_closed_form`] for the
/// derivation notes.
fn residual_from_table<T: Real>(
    tab: &ProfileTable<T>,
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
) -> (LatticeSeq<T>, LatticeSeq<T>) {
    let w = coeffs.window();
    let c = wp.speed();
    let inv_s = wp.impedance().recip();
    let e2c = epsilon * epsilon * c;

    let res1 = LatticeSeq::from_fn(w, |j| {
        let i = tab.idx(j);
        let da0 = tab.a[0][i + 1] - tab.a[0][i];
        let db0 = tab.b[0][i + 1] - tab.b[0][i];
        let da1 = tab.a[1][i + 1] - tab.a[1][i];
        let db1 = tab.b[1][i + 1] - tab.b[1][i];
        (epsilon * tab.a[1][i] - da0) * inv_s
            + (db0 - epsilon * tab.b[1][i]) * inv_s
            + epsilon * inv_s * walks.chi_k(j + 1) * (db1 - da1)
            + e2c * walks.chi_m(j) / coeffs.k(j) * (tab.a[2][i] - tab.b[2][i])
    });
    let res2 = LatticeSeq::from_fn(w, |j| {
        let i = tab.idx(j);
        let da0 = tab.a[0][i] - tab.a[0][i - 1];
        let db0 = tab.b[0][i] - tab.b[0][i - 1];
        let da1 = tab.a[1][i] - tab.a[1][i - 1];
        let db1 = tab.b[1][i] - tab.b[1][i - 1];
        let bracket = (da0 - epsilon * tab.a[1][i])
            + (db0 - epsilon * tab.b[1][i])
            + epsilon * walks.chi_m(j - 1) * (da1 + db1);
        bracket / coeffs.m(j) - e2c * walks.chi_k(j) * inv_s * (tab.a[2][i] + tab.b[2][i])
    });
    (res1, res2)
}

/// Sampled macroscopic solution on the lattice, without corrector terms:
/// `r = (A- + B+)/k(j)`, `p = (-A- + B+)/s`. This is the comparator for
/// relative-error measurements and the initial data of the experiments.
pub fn effective_state<T: Real>(
    wp: &WaveProfiles<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> LatticeState<T> {
    let tab = ProfileTable::build(wp, coeffs.window().radius(), epsilon, t);
    effective_from_table(&tab, wp, coeffs)
}

/// Two-scale ansatz with first-order corrector terms, sampled on the window.
pub fn ansatz_state<T: Real>(
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> LatticeState<T> {
    assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
    let tab = ProfileTable::build(wp, coeffs.window().radius(), epsilon, t);
    ansatz_from_table(&tab, wp, walks, coeffs, epsilon)
}

/// Exact time derivative of [`ansatz_state`] at time `t`.
pub fn ansatz_time_derivative<T: Real>(
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> LatticeState<T> {
    assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
    let w = coeffs.window();
    let tab = ProfileTable::build(wp, w.radius(), epsilon, t);
    let c = wp.speed();
    let inv_s = wp.impedance().recip();
    let ec = epsilon * c;
    LatticeState::from_fns(
        w,
        |j| {
            let i = tab.idx(j);
            (ec * (tab.b[1][i] - tab.a[1][i])
                + ec * epsilon * walks.chi_m(j) * (tab.b[2][i] - tab.a[2][i]))
                / coeffs.k(j)
        },
        |j| {
            let i = tab.idx(j);
            (ec * (tab.a[1][i] + tab.b[1][i])
                + ec * epsilon * walks.chi_k(j) * (tab.a[2][i] + tab.b[2][i]))
                * inv_s
        },
    )
}

/// Everything the error analysis needs at one time sample, computed from a
/// single profile-table build: the corrector-free comparator, the full
/// ansatz, and the closed-form residual pair.
#[derive(Debug, Clone)]
pub struct AnsatzSample<T> {
    pub effective: LatticeState<T>,
    pub ansatz: LatticeState<T>,
    pub res1: LatticeSeq<T>,
    pub res2: LatticeSeq<T>,
}

pub fn ansatz_sample<T: Real>(
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> AnsatzSample<T> {
    assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
    let tab = ProfileTable::build(wp, coeffs.window().radius(), epsilon, t);
    let effective = effective_from_table(&tab, wp, coeffs);
    let ansatz = ansatz_from_table(&tab, wp, walks, coeffs, epsilon);
    let (res1, res2) = residual_from_table(&tab, wp, walks, coeffs, epsilon);
    AnsatzSample { effective, ansatz, res1, res2 }
}

/// Ansatz residual straight from the defining equations,
/// `Res1 = delta+ p - dr/dt` and `Res2 = delta- (k r)/m - dp/dt`, with the
/// ansatz and its time derivative evaluated pointwise. The corrector walks
/// carry one extra site on each exposed edge, so the stencil never leaves
/// their range.
pub fn residual_definitional<T: Real>(
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> (LatticeSeq<T>, LatticeSeq<T>) {
    assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
    let c = wp.speed();
    let s = wp.impedance();
    let inv_s = s.recip();
    let point = |j: i64, t: T| {
        let x = T::from_f64(j as f64);
        (epsilon * (x - c * t), epsilon * (x + c * t))
    };
    // r is only ever read inside the window (the left-edge product term is
    // truncated to zero by the residual itself), so k(j) stays legal.
    let r = |j: i64, t: T| {
        let (xm, xp) = point(j, t);
        ((wp.a.eval(xm) + wp.b.eval(xp))
            + epsilon * walks.chi_m(j) * (wp.a.eval_deriv(1, xm) + wp.b.eval_deriv(1, xp)))
            / coeffs.k(j)
    };
    // p is read one site past the right edge, covered by chi_k(J+1).
    let p = |j: i64, t: T| {
        let (xm, xp) = point(j, t);
        ((wp.b.eval(xp) - wp.a.eval(xm))
            + epsilon * walks.chi_k(j) * (wp.b.eval_deriv(1, xp) - wp.a.eval_deriv(1, xm)))
            * inv_s
    };
    let dr = |j: i64, t: T| {
        let (xm, xp) = point(j, t);
        (epsilon * c * (wp.b.eval_deriv(1, xp) - wp.a.eval_deriv(1, xm))
            + epsilon * epsilon * c * walks.chi_m(j)
                * (wp.b.eval_deriv(2, xp) - wp.a.eval_deriv(2, xm)))
            / coeffs.k(j)
    };
    let dp = |j: i64, t: T| {
        let (xm, xp) = point(j, t);
        (epsilon * c * (wp.a.eval_deriv(1, xm) + wp.b.eval_deriv(1, xp))
            + epsilon * epsilon * c * walks.chi_k(j)
                * (wp.a.eval_deriv(2, xm) + wp.b.eval_deriv(2, xp)))
            * inv_s
    };
    lattice::residuals(r, p, dr, dp, coeffs, t)
}

/// Ansatz residual in closed form. Writing `dA` for the forward difference
/// `A(eps(j+1-ct)) - A(eps(j-ct))` (and `d-` for backward ones), the exact
/// cancellation of the order-eps terms leaves
///
/// ```text
///   Res1(j) = [-dA + eps A'- ]/s + [dB - eps B'+]/s
///           + (eps/s) chi_k(j+1) [-dA' + dB']
///           + eps^2 c (chi_m(j)/k(j)) [A''- - B''+]
///
///   Res2(j) = [d-A - eps A'-]/m(j) + [d-B - eps B'+]/m(j)
///           + (eps/m(j)) chi_m(j-1) [d-A' + d-B']
///           - eps^2 c (chi_k(j)/s) [A''- + B''+]
/// ```
///
/// Each bracket is a second-order Taylor remainder, so every term is
/// `O(eps^2)` pointwise. Agreement with [`residual_definitional`] is an
/// exact algebraic identity, checked to roundoff in the tests.
pub fn residual_closed_form<T: Real>(
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t: T,
) -> (LatticeSeq<T>, LatticeSeq<T>) {
    assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
    let tab = ProfileTable::build(wp, coeffs.window().radius(), epsilon, t);
    residual_from_table(&tab, wp, walks, coeffs, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{
        corrector_walks, sample_iid, DistributionKind, DistributionSpec,
    };
    use crate::profiles::Profile;
    use crate::seq::Window;

    fn stats_const(m: f64, k: f64) -> CoefficientStats<f64> {
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

    fn test_data() -> InitialData<f64> {
        let phi = Profile::gaussian(1.0, 0.0, 1.0).add_scaled(0.4, &Profile::gaussian(1.0, 1.0, 0.7));
        let psi = Profile::gaussian(-0.6, -0.5, 1.2);
        InitialData::new(phi, psi, 0.1).unwrap()
    }

    #[test]
    fn splitting_reproduces_the_initial_data() {
        let init = test_data();
        let stats = stats_const(0.9, 1.44);
        let wp = WaveProfiles::from_initial_data(&init, &stats);
        for &x in &[-3.0, -1.0, 0.0, 0.3, 2.0] {
            let (q, p) = wp.effective(x, 0.0);
            assert!((q - init.phi.eval(x)).abs() <= 1e-14);
            assert!((p - init.psi.eval(x)).abs() <= 1e-14);
        }
    }

    #[test]
    fn effective_pair_solves_the_averaged_system() {
        let init = test_data();
        let stats = stats_const(0.9, 1.44);
        let wp = WaveProfiles::from_initial_data(&init, &stats);
        let c = wp.speed();
        let h = 1e-4;
        for &(x, tau) in &[(0.2, 0.5), (-1.0, 1.3), (1.7, -0.8)] {
            let dq_dtau = (wp.effective(x, tau + h).0 - wp.effective(x, tau - h).0) / (2.0 * h);
            let dp_dtau = (wp.effective(x, tau + h).1 - wp.effective(x, tau - h).1) / (2.0 * h);
            let dq_dx = wp.a.eval_deriv(1, x - c * tau) + wp.b.eval_deriv(1, x + c * tau);
            let dp_dx =
                (wp.b.eval_deriv(1, x + c * tau) - wp.a.eval_deriv(1, x - c * tau)) / wp.impedance();
            assert!((dq_dtau - stats.ktilde * dp_dx).abs() <= 1e-7, "first equation at ({x},{tau})");
            assert!((dp_dtau - dq_dx / stats.mbar).abs() <= 1e-7, "second equation at ({x},{tau})");
        }
    }

    #[test]
    fn constant_coefficients_collapse_the_ansatz_to_the_effective_state() {
        let init = test_data();
        let stats = stats_const(1.0, 1.0);
        let wp = WaveProfiles::from_initial_data(&init, &stats);
        let w = Window::new(150);
        let coeffs = CoefficientField::new(w, vec![1.0; w.len()], vec![1.0; w.len()], stats).unwrap();
        let walks = corrector_walks(&coeffs);
        let eps = 0.05;
        let full = ansatz_state(&wp, &walks, &coeffs, eps, 0.0);
        let lead = effective_state(&wp, &coeffs, eps, 0.0);
        for j in w.iter() {
            assert!((full.r.get(j) - lead.r.get(j)).abs() <= 1e-15);
            assert!((full.p.get(j) - lead.p.get(j)).abs() <= 1e-15);
            assert!((full.r.get(j) - init.phi.eval(eps * j as f64)).abs() <= 1e-14);
            assert!((full.p.get(j) - init.psi.eval(eps * j as f64)).abs() <= 1e-14);
        }
    }

    fn random_setup(
        seed: u64,
        radius: i64,
    ) -> (WaveProfiles<f64>, CorrectorWalk<f64>, CoefficientField<f64>) {
        let spec_m = DistributionSpec::new(DistributionKind::Uniform { a: 0.6, b: 1.4 }, seed);
        let spec_k = DistributionSpec::new(
            DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 },
            seed.wrapping_add(1),
        );
        let coeffs: CoefficientField<f64> = sample_iid(&spec_m, &spec_k, radius).unwrap();
        let walks = corrector_walks(&coeffs);
        let wp = WaveProfiles::from_initial_data(&test_data(), coeffs.stats());
        (wp, walks, coeffs)
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let (wp, walks, coeffs) = random_setup(5, 120);
        let eps = 0.08;
        let t = 2.3;
        let h = 1e-4;
        let fwd = ansatz_state(&wp, &walks, &coeffs, eps, t + h);
        let bwd = ansatz_state(&wp, &walks, &coeffs, eps, t - h);
        let exact = ansatz_time_derivative(&wp, &walks, &coeffs, eps, t);
        for j in coeffs.window().iter() {
            let fd_r = (fwd.r.get(j) - bwd.r.get(j)) / (2.0 * h);
            let fd_p = (fwd.p.get(j) - bwd.p.get(j)) / (2.0 * h);
            assert!((fd_r - exact.r.get(j)).abs() <= 1e-7, "dr at {j}");
            assert!((fd_p - exact.p.get(j)).abs() <= 1e-7, "dp at {j}");
        }
    }

    #[test]
    fn closed_form_residual_equals_the_definitional_one() {
        for seed in [1u64, 2, 3] {
            let (wp, walks, coeffs) = random_setup(seed, 400);
            let eps = 0.05;
            let t = 7.0;
            let (d1, d2) = residual_definitional(&wp, &walks, &coeffs, eps, t);
            let (c1, c2) = residual_closed_form(&wp, &walks, &coeffs, eps, t);
            let scale = d1.linf_norm().max(d2.linf_norm());
            assert!(scale > 0.0, "residual should not vanish identically");
            for j in coeffs.window().iter() {
                assert!(
                    (d1.get(j) - c1.get(j)).abs() <= 1e-12 * scale,
                    "res1 mismatch at {j}: {} vs {}",
                    d1.get(j),
                    c1.get(j)
                );
                assert!(
                    (d2.get(j) - c2.get(j)).abs() <= 1e-12 * scale,
                    "res2 mismatch at {j}: {} vs {}",
                    d2.get(j),
                    c2.get(j)
                );
            }
        }
    }

    #[test]
    fn sampled_bundle_matches_the_standalone_evaluations() {
        let (wp, walks, coeffs) = random_setup(9, 80);
        let eps = 0.07;
        let t = 1.9;
        let bundle = ansatz_sample(&wp, &walks, &coeffs, eps, t);
        let eff = effective_state(&wp, &coeffs, eps, t);
        let ans = ansatz_state(&wp, &walks, &coeffs, eps, t);
        let (r1, r2) = residual_closed_form(&wp, &walks, &coeffs, eps, t);
        for j in coeffs.window().iter() {
            assert_eq!(bundle.effective.r.get(j), eff.r.get(j));
            assert_eq!(bundle.ansatz.p.get(j), ans.p.get(j));
            assert_eq!(bundle.res1.get(j), r1.get(j));
            assert_eq!(bundle.res2.get(j), r2.get(j));
        }
    }

    #[test]
    fn constant_coefficient_residual_shrinks_quadratically_in_pointwise_size() {
        let init = test_data();
        let stats = stats_const(1.0, 1.0);
        let wp = WaveProfiles::from_initial_data(&init, &stats);
        let sup_res = |eps: f64| {
            let radius = ((wp.support_radius() + 1.0 * 3.0 + 10.0) / eps).ceil() as i64;
            let w = Window::new(radius);
            let coeffs =
                CoefficientField::new(w, vec![1.0; w.len()], vec![1.0; w.len()], stats).unwrap();
            let walks = corrector_walks(&coeffs);
            let (r1, r2) = residual_closed_form(&wp, &walks, &coeffs, eps, 3.0);
            r1.linf_norm().max(r2.linf_norm())
        };
        let coarse = sup_res(0.1);
        let fine = sup_res(0.05);
        let ratio = coarse / fine;
        assert!(
            (ratio - 4.0).abs() <= 0.8,
            "halving eps should quarter the sup residual, got ratio {ratio}"
        );
    }
}
