//! Measurement side of the harness: weighted profile norms, the sliding
//! average of those weights, log-log slope fits, error reports comparing a
//! simulated run against the long-wave prediction, the a-priori energy bound
//! those errors must satisfy, and the maximal-inequality check for the
//! corrector increments.

use crate::coefficients::{CorrectorWalk, IncrementSampler};
use crate::homogenization::{ansatz_sample, WaveProfiles};
use crate::lattice::{CoefficientField, LatticeState};
use crate::profiles::{Profile, MAX_DERIVATIVE};
use crate::quad::simpson_split;
use crate::scalar::Real;
use crate::seq::l2_distance;
use crate::sums::{sum_of_squares, Kahan};
use crate::Error;
use serde::{Deserialize, Serialize};

/// Spatial weight of the profile norms. The flat weight gives the plain
/// Sobolev-type norm; the other two grow like the square root of the
/// distance, respectively like the square root times an iterated logarithm,
/// matching the almost-sure envelope of the corrector walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormWeight {
    Unweighted,
    SquareRoot,
    IteratedLog,
}

impl NormWeight {
    /// The squared weight `w(x)^2`, the factor multiplying `|F|^2` in the
    /// norm integrals: `1`, `1 + |x|`, or `1 + |x| ln ln(|x| + e)`.
    pub fn squared<T: Real>(&self, x: T) -> T {
        let ax = x.abs();
        match self {
            NormWeight::Unweighted => T::one(),
            NormWeight::SquareRoot => T::one() + ax,
            NormWeight::IteratedLog => T::one() + ax * (ax + T::E()).ln().ln(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormWeight::Unweighted => "unweighted",
            NormWeight::SquareRoot => "square_root",
            NormWeight::IteratedLog => "iterated_log",
        }
    }
}

/// Weighted norm `sum_{i=0}^{s} || w F^(i) ||_{L2}` of a profile, derivatives
/// up to order `s <= 4`.
///
/// The square-root and iterated-log weights do NOT dominate each other
/// pointwise everywhere: `ln ln(|x| + e) < 1` for `|x| < e^e - e ~ 12.4`, so
/// near the origin the iterated-log norm is the smaller one. Away from that
/// ball the expected ordering (flat <= square root <= iterated log) holds;
/// both cases are pinned in the tests.
pub fn weighted_norm<T: Real>(
    profile: &Profile<T>,
    s: usize,
    weight: NormWeight,
) -> Result<T, Error> {
    if s > MAX_DERIVATIVE {
        return Err(Error::DerivativeOrder(s, MAX_DERIVATIVE));
    }
    let radius = profile.support_radius();
    let n = 800 + 40 * radius.as_f64().ceil() as usize;
    let mut total = Kahan::new();
    for order in 0..=s {
        let sq = simpson_split(
            |x| weight.squared(x) * profile.eval_deriv(order, x).powi(2),
            -radius,
            radius,
            &[T::zero()],
            n,
        );
        total.add(sq.max(T::zero()).sqrt());
    }
    Ok(total.value())
}

/// Sup over `s` of the averaged squared weight
/// `b(s) = (1 / (eps w(s)^2)) integral_{s-eps}^{s} w(x)^2 dx`,
/// maximized over a dense grid containing `s = 0`, where the growth of the
/// weights makes the ratio largest. For the flat weight the value is exactly
/// one; for the square-root weight it is `1 + eps/2`, attained at zero.
pub fn averaging_operator_bound<T: Real>(weight: NormWeight, epsilon: T) -> Result<T, Error> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidEpsilon(epsilon.as_f64()));
    }
    let half_span = T::from_f64(4.0) + epsilon;
    let n_grid = 4000usize;
    let zero = T::zero();
    let mut sup = T::zero();
    for i in 0..=n_grid {
        // symmetric grid with an odd point count, so s = 0 is sampled exactly
        let s = half_span * (T::from_f64(2.0 * i as f64 / n_grid as f64) - T::one());
        let integral = simpson_split(|x| weight.squared(x), s - epsilon, s, &[zero], 200);
        let b = integral / (epsilon * weight.squared(s));
        if b > sup {
            sup = b;
        }
    }
    Ok(sup)
}

/// Least-squares power-law fit in log-log coordinates (natural logs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// intercept of the line in log coordinates, i.e. ln of the prefactor
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit, Error> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "slope_fit needs matching lengths, got {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints { expected: 3, got: xs.len() });
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveFitData);
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "slope_fit needs at least two distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        ss_res += (y - (intercept + slope * x)).powi(2);
        ss_tot += (y - my).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(SlopeFit { slope, intercept, r_squared })
}

/// A-priori bound on the modeling error, derived from the energy
/// `H = (1/2) sum [ eta^2/k + m xi^2 ]` of the deviation variables
/// `eta = k (r - r_ansatz)`, `xi = p - p_ansatz`. Along the flow
/// `dH/dt = sum eta Res1 + sum m xi Res2`, the cross terms cancel by
/// summation by parts, so with `c_lo |(eta,xi)| <= sqrt(H) <= c_hi
/// |(eta,xi)|` and `Gamma = sup_t sqrt(|Res1|^2 + |Res2|^2)`,
///
/// ```text
///   |(eta, xi)(t)| <= (c_hi/c_lo) |(eta, xi)(0)|
///                   + max(1, b_m) Gamma t / (2 c_lo^2),   |t| <= T0/eps.
/// ```
///
/// The `max(1, b_m)` factor pays for the mass weight on the second residual
/// term. `horizon` is the macroscopic time `T0`; the lattice time in the
/// bound is `T0/eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallCheck {
    pub bound: f64,
    pub measured: f64,
    /// `bound / measured`; infinite when nothing was measured
    pub margin: f64,
    pub pass: bool,
}

pub fn gronwall_bound_check(
    initial_error_norm: f64,
    gamma_eps: f64,
    epsilon: f64,
    horizon: f64,
    measured_sup_error: f64,
    equivalence: (f64, f64),
    mass_upper: f64,
) -> GronwallCheck {
    let (c_lo, c_hi) = equivalence;
    let lattice_time = horizon / epsilon;
    let bound = (c_hi / c_lo) * initial_error_norm
        + mass_upper.max(1.0) * gamma_eps * lattice_time / (2.0 * c_lo * c_lo);
    let pass = measured_sup_error <= bound * (1.0 + 1e-12);
    let margin = if measured_sup_error > 0.0 {
        bound / measured_sup_error
    } else {
        f64::INFINITY
    };
    GronwallCheck { bound, measured: measured_sup_error, margin, pass }
}

/// Summary of one simulated run measured against the long-wave prediction.
/// The first eight fields are the report proper; the rest record the energy
/// bound so that every run carries its own a-priori consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// sup over sampled times of the l2 distance between `r` and its
    /// corrector-free prediction `(A + B)/k`
    pub sup_abs_error_r: f64,
    /// same for `p` against `(-A + B)/s`
    pub sup_abs_error_p: f64,
    /// sup over sampled times of the relative l2 error of `r`
    pub rho: f64,
    /// sup over sampled times of the l2 norm of the ansatz residual pair
    pub gamma_eps: f64,
    /// sup of `(|chi_k| + |chi_m|) / sqrt(|j| ln ln(|j| + e))` over the window
    #[serde(rename = "C_omega_estimate")]
    pub c_omega_estimate: f64,
    pub epsilon: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub times_sampled: usize,
    /// `|(eta, xi)|` at the first sample
    pub initial_error_norm: f64,
    /// sup over sampled times of `|(eta, xi)|`, the quantity the energy
    /// bound controls
    pub sup_error_norm: f64,
    pub gronwall_bound: f64,
    pub gronwall_pass: bool,
}

/// Streaming accumulator feeding an [`ErrorReport`]; call [`observe`] at each
/// time sample (first call must be the initial state) and [`report`] at the
/// end.
///
/// [`observe`]: ErrorAccumulator::observe
/// [`report`]: ErrorAccumulator::report
pub struct ErrorAccumulator<'a, T> {
    wp: &'a WaveProfiles<T>,
    walks: &'a CorrectorWalk<T>,
    coeffs: &'a CoefficientField<T>,
    epsilon: T,
    t0: T,
    c_omega: T,
    sup_abs_r: T,
    sup_abs_p: T,
    rho: T,
    gamma: T,
    sup_err: T,
    initial_err: Option<T>,
    samples: usize,
}

impl<'a, T: Real> ErrorAccumulator<'a, T> {
    pub fn new(
        wp: &'a WaveProfiles<T>,
        walks: &'a CorrectorWalk<T>,
        coeffs: &'a CoefficientField<T>,
        epsilon: T,
        t0: T,
    ) -> Self {
        assert_eq!(walks.window(), coeffs.window(), "walks and field must share a window");
        Self {
            wp,
            walks,
            coeffs,
            epsilon,
            t0,
            c_omega: walks.envelope_constant(),
            sup_abs_r: T::zero(),
            sup_abs_p: T::zero(),
            rho: T::zero(),
            gamma: T::zero(),
            sup_err: T::zero(),
            initial_err: None,
            samples: 0,
        }
    }

    pub fn observe(&mut self, t: T, state: &LatticeState<T>) {
        assert_eq!(state.window(), self.coeffs.window(), "state window mismatch");
        let sample = ansatz_sample(self.wp, self.walks, self.coeffs, self.epsilon, t);

        let dr = l2_distance(&state.r, &sample.effective.r).expect("windows match");
        let dp = l2_distance(&state.p, &sample.effective.p).expect("windows match");
        self.sup_abs_r = self.sup_abs_r.max(dr);
        self.sup_abs_p = self.sup_abs_p.max(dp);
        let nr = state.r.l2_norm();
        if nr > T::zero() {
            self.rho = self.rho.max(dr / nr);
        }

        let res_norm =
            (sample.res1.l2_norm().powi(2) + sample.res2.l2_norm().powi(2)).sqrt();
        self.gamma = self.gamma.max(res_norm);

        let w = state.window();
        let eta = w
            .iter()
            .map(|j| self.coeffs.k(j) * (state.r.get(j) - sample.ansatz.r.get(j)));
        let xi = w.iter().map(|j| state.p.get(j) - sample.ansatz.p.get(j));
        let err = sum_of_squares(eta.chain(xi)).sqrt();
        self.sup_err = self.sup_err.max(err);
        if self.initial_err.is_none() {
            self.initial_err = Some(err);
        }
        self.samples += 1;
    }

    pub fn report(self) -> Result<ErrorReport, Error> {
        let initial = self.initial_err.ok_or(Error::EmptyInput("error accumulator"))?;
        let (c_lo, c_hi) = self.coeffs.energy_equivalence();
        let check = gronwall_bound_check(
            initial.as_f64(),
            self.gamma.as_f64(),
            self.epsilon.as_f64(),
            self.t0.as_f64(),
            self.sup_err.as_f64(),
            (c_lo.as_f64(), c_hi.as_f64()),
            self.coeffs.stats().b_m.as_f64(),
        );
        Ok(ErrorReport {
            sup_abs_error_r: self.sup_abs_r.as_f64(),
            sup_abs_error_p: self.sup_abs_p.as_f64(),
            rho: self.rho.as_f64(),
            gamma_eps: self.gamma.as_f64(),
            c_omega_estimate: self.c_omega.as_f64(),
            epsilon: self.epsilon.as_f64(),
            t0: self.t0.as_f64(),
            times_sampled: self.samples,
            initial_error_norm: initial.as_f64(),
            sup_error_norm: self.sup_err.as_f64(),
            gronwall_bound: check.bound,
            gronwall_pass: check.pass,
        })
    }
}

/// Measure a stored run (time, state) against the long-wave prediction. The
/// first record must be the initial state; records should cover the intended
/// horizon densely, since all sups are taken over the given samples only.
pub fn error_metrics<T: Real>(
    run: &[(T, LatticeState<T>)],
    wp: &WaveProfiles<T>,
    walks: &CorrectorWalk<T>,
    coeffs: &CoefficientField<T>,
    epsilon: T,
    t0: T,
) -> Result<ErrorReport, Error> {
    if run.is_empty() {
        return Err(Error::EmptyInput("run records"));
    }
    let mut acc = ErrorAccumulator::new(wp, walks, coeffs, epsilon, t0);
    for (t, state) in run {
        acc.observe(*t, state);
    }
    acc.report()
}

/// Empirical mean of `max_{n <= steps} W_n^2` over independent walks with
/// the sampler's increments.
pub fn martingale_max_square_mean(
    sampler: &IncrementSampler,
    steps: usize,
    trials: usize,
) -> f64 {
    let mut acc = Kahan::new();
    for trial in 0..trials {
        let mut w = 0.0f64;
        let mut max_sq = 0.0f64;
        for step in 0..steps {
            w += sampler.draw(trial as u64, step as u64);
            max_sq = max_sq.max(w * w);
        }
        acc.add(max_sq);
    }
    acc.value() / trials as f64
}

/// Doob's maximal inequality for the square of a mean-zero random walk:
/// `E[max_{n <= N} W_n^2] <= 4 N sigma^2`. The empirical mean over finitely
/// many walks gets a `1 + 3/sqrt(trials)` allowance for sampling noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    pub steps: usize,
    pub trials: usize,
    pub mean_max_square: f64,
    pub bound: f64,
    pub slack_factor: f64,
    pub pass: bool,
}

pub fn martingale_check(sampler: &IncrementSampler, steps: usize, trials: usize) -> MartingaleCheck {
    let mean = martingale_max_square_mean(sampler, steps, trials);
    let sd = sampler.step_sd();
    let bound = 4.0 * steps as f64 * sd * sd;
    let slack_factor = 1.0 + 3.0 / (trials as f64).sqrt();
    MartingaleCheck {
        steps,
        trials,
        mean_max_square: mean,
        bound,
        slack_factor,
        pass: mean <= bound * slack_factor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{
        corrector_walks, sample_iid, unit_f64, DistributionKind, DistributionSpec,
    };
    use crate::homogenization::{ansatz_state, effective_state};
    use crate::integrators::{integrate, IntegratorSpec};
    use crate::profiles::InitialData;
    use crate::seq::{LatticeSeq, Window};

    #[test]
    fn slope_fit_recovers_exact_power_laws() {
        let xs = [0.5f64, 1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(1.5)).collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 1.5).abs() <= 1e-12);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);

        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 1.0).abs() <= 1e-12);
        assert!((fit.intercept - 2.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn slope_fit_rejects_degenerate_input() {
        assert!(matches!(
            slope_fit(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            slope_fit(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]),
            Err(Error::NonPositiveFitData)
        ));
        assert!(weighted_norm(&Profile::<f64>::gaussian(1.0, 0.0, 1.0), 5, NormWeight::Unweighted)
            .is_err());
    }

    #[test]
    fn gaussian_norm_matches_the_closed_form() {
        // integral of exp(-2 x^2) = sqrt(pi/2), so the norm is (pi/2)^(1/4).
        let p = Profile::gaussian(1.0, 0.0, 1.0);
        let n = weighted_norm(&p, 0, NormWeight::Unweighted).unwrap();
        let exact = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((n - exact).abs() <= 1e-8, "norm {n} vs {exact}");
    }

    fn random_mixture(seed: u64, center_lo: f64, center_hi: f64) -> Profile<f64> {
        let mut p = Profile::zero();
        for i in 0..4u64 {
            let amp = 2.0 * unit_f64(seed, 3 * i) - 1.0;
            let center = center_lo + (center_hi - center_lo) * unit_f64(seed, 3 * i + 1);
            let width = 0.3 + 0.7 * unit_f64(seed, 3 * i + 2);
            p = p.add_scaled(1.0, &Profile::gaussian(amp, center, width));
        }
        p
    }

    #[test]
    fn weighted_norms_order_as_the_weights_do_away_from_the_origin() {
        // The iterated-log weight exceeds the square-root one only where
        // ln ln(|x| + e) >= 1, i.e. |x| >= e^e - e; keep the mass out there.
        for seed in 0..20u64 {
            let p = random_mixture(seed, 21.0, 29.0);
            if p.is_zero() {
                continue;
            }
            let flat = weighted_norm(&p, 2, NormWeight::Unweighted).unwrap();
            let sqrt_w = weighted_norm(&p, 2, NormWeight::SquareRoot).unwrap();
            let lil_w = weighted_norm(&p, 2, NormWeight::IteratedLog).unwrap();
            assert!(flat <= sqrt_w * (1.0 + 1e-12), "flat {flat} vs sqrt {sqrt_w}");
            assert!(sqrt_w <= lil_w * (1.0 + 1e-12), "sqrt {sqrt_w} vs lil {lil_w}");
        }
    }

    #[test]
    fn iterated_log_weight_is_smaller_near_the_origin() {
        // For mass near zero the ordering of the two growing weights flips;
        // the standard Gaussian witnesses it.
        let p = Profile::gaussian(1.0, 0.0, 1.0);
        let sqrt_w = weighted_norm(&p, 0, NormWeight::SquareRoot).unwrap();
        let lil_w = weighted_norm(&p, 0, NormWeight::IteratedLog).unwrap();
        assert!(
            lil_w < sqrt_w - 0.01,
            "expected a strict reversal near the origin, got sqrt {sqrt_w}, lil {lil_w}"
        );
        // The flat weight is still dominated.
        let flat = weighted_norm(&p, 0, NormWeight::Unweighted).unwrap();
        assert!(flat <= lil_w);
    }

    #[test]
    fn averaging_bound_is_exact_for_flat_weight() {
        let b: f64 = averaging_operator_bound(NormWeight::Unweighted, 0.37).unwrap();
        assert!((b - 1.0).abs() <= 1e-12, "flat average {b}");
    }

    #[test]
    fn averaging_bound_matches_the_square_root_growth_formula() {
        let b: f64 = averaging_operator_bound(NormWeight::SquareRoot, 0.5).unwrap();
        assert!((b - 1.25).abs() <= 1e-10, "square-root average {b}");
        for eps in [0.01, 0.25, 0.75, 0.99] {
            let b: f64 = averaging_operator_bound(NormWeight::SquareRoot, eps).unwrap();
            assert!((b - (1.0 + eps / 2.0)).abs() <= 1e-9, "eps {eps}: {b}");
            assert!(b <= 1.5);
        }
    }

    #[test]
    fn averaging_bound_for_the_iterated_log_weight_stays_below_two() {
        let b = averaging_operator_bound(NormWeight::IteratedLog, 0.5).unwrap();
        assert!(b > 1.0 && b <= 2.0, "iterated-log average {b}");
        assert!(averaging_operator_bound(NormWeight::IteratedLog, 0.0).is_err());
    }

    #[test]
    fn gronwall_check_handles_the_trivial_cases() {
        let eq = (0.5, 1.5);
        let zero = gronwall_bound_check(0.0, 0.0, 0.1, 1.0, 0.0, eq, 1.5);
        assert!(zero.pass);
        assert_eq!(zero.bound, 0.0);
        let forced = gronwall_bound_check(0.0, 0.0, 0.1, 1.0, 1e-9, eq, 1.5);
        assert!(!forced.pass, "zero data and zero forcing admit no error");
        let loose = gronwall_bound_check(1.0, 0.0, 0.1, 1.0, 2.9, eq, 1.5);
        assert!(loose.pass);
        assert!((loose.bound - 3.0).abs() <= 1e-12);
        assert!((loose.margin - 3.0 / 2.9).abs() <= 1e-12);
    }

    #[test]
    fn martingale_bound_holds_for_the_spring_walk() {
        let law = DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 };
        let sampler = IncrementSampler::chi_k(law, 77);
        // harmonic mean 4/3, reciprocal sd 1/4, so the increment sd is 1/3
        assert!((sampler.step_sd() - 1.0 / 3.0).abs() <= 1e-15);
        let check = martingale_check(&sampler, 200, 2000);
        assert!(check.pass, "mean {} vs bound {}", check.mean_max_square, check.bound);
        // the final-step variance alone accounts for a quarter of the bound
        assert!(
            check.mean_max_square >= 0.2 * check.bound,
            "suspiciously small maximum: {}",
            check.mean_max_square
        );
    }

    fn uniform_mass_setup(
        seed: u64,
        epsilon: f64,
        amplitude: f64,
    ) -> (
        WaveProfiles<f64>,
        CorrectorWalk<f64>,
        CoefficientField<f64>,
        InitialData<f64>,
    ) {
        let phi = Profile::gaussian(amplitude, 0.0, 1.0);
        let psi = Profile::gaussian(-amplitude, 0.0, 1.0);
        let init = InitialData::new(phi, psi, epsilon).unwrap();
        let spec_m = DistributionSpec::new(DistributionKind::Uniform { a: 0.5, b: 1.5 }, seed);
        let spec_k = DistributionSpec::new(DistributionKind::Constant { value: 1.0 }, seed + 1);
        let radius = Window::for_long_wave(epsilon, 7.5, 1.0, 1.0).radius();
        let coeffs: CoefficientField<f64> = sample_iid(&spec_m, &spec_k, radius).unwrap();
        let walks = corrector_walks(&coeffs);
        let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());
        (wp, walks, coeffs, init)
    }

    #[test]
    fn ansatz_as_truth_reproduces_the_corrector_norm_at_time_zero() {
        let (wp, walks, coeffs, _) = uniform_mass_setup(11, 0.08, 1.0);
        let eps = 0.08;
        let state = ansatz_state(&wp, &walks, &coeffs, eps, 0.0);
        let run = vec![(0.0, state)];
        let report = error_metrics(&run, &wp, &walks, &coeffs, eps, 0.0).unwrap();

        // distance between ansatz and corrector-free prediction at t = 0
        let expected = LatticeSeq::from_fn(coeffs.window(), |j| {
            let x = eps * j as f64;
            eps * walks.chi_m(j) * (wp.a.eval_deriv(1, x) + wp.b.eval_deriv(1, x)) / coeffs.k(j)
        })
        .l2_norm();
        assert!(expected > 0.0);
        assert!(
            (report.sup_abs_error_r - expected).abs() <= 1e-13 * expected,
            "{} vs {}",
            report.sup_abs_error_r,
            expected
        );
        // the ansatz itself carries no deviation, so the energy variables vanish
        assert_eq!(report.initial_error_norm, 0.0);
        assert!(report.gronwall_pass);
        assert_eq!(report.times_sampled, 1);
    }

    fn integrated_report(seed: u64, amplitude: f64) -> ErrorReport {
        let eps = 0.1;
        let (wp, walks, coeffs, _) = uniform_mass_setup(seed, eps, amplitude);
        let mut state = effective_state(&wp, &coeffs, eps, 0.0);
        let mut acc = ErrorAccumulator::new(&wp, &walks, &coeffs, eps, 1.0);
        let spec = IntegratorSpec::default();
        integrate(&mut state, &coeffs, &spec, 1.0 / eps, |t, s| acc.observe(t, s)).unwrap();
        acc.report().unwrap()
    }

    #[test]
    fn integrated_run_reports_sane_errors_and_passes_the_energy_bound() {
        let report = integrated_report(42, 1.0);
        assert!(report.rho > 0.0 && report.rho < 0.5, "rho {}", report.rho);
        assert!(report.sup_abs_error_r > 0.0);
        assert!(report.sup_abs_error_p > 0.0);
        assert!(report.gamma_eps > 0.0);
        assert!(report.c_omega_estimate > 0.0);
        assert!(report.times_sampled >= 3);
        assert!(report.gronwall_pass, "energy bound violated: {report:?}");
        assert!(report.sup_error_norm <= report.gronwall_bound);
        // the initial state is corrector-free, so it starts at the corrector size
        assert!(report.initial_error_norm > 0.0);
    }

    #[test]
    fn rho_is_invariant_under_profile_scaling() {
        let a = integrated_report(13, 1.0);
        let b = integrated_report(13, 3.7);
        assert!(
            (a.rho - b.rho).abs() <= 1e-12 * a.rho.abs().max(b.rho.abs()),
            "{} vs {}",
            a.rho,
            b.rho
        );
        // absolute errors scale with the data
        assert!((b.sup_abs_error_r / a.sup_abs_error_r - 3.7).abs() <= 1e-9);
    }
}
