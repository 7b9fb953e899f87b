//! Config-driven experiment runner: builds a disordered chain, integrates it
//! over the long-wave horizon, and measures the error against the
//! homogenized prediction. Five stock experiments cover a fixed-realization
//! epsilon sweep, a boxplot ensemble, periodic and square-root-growth mass
//! patterns, and a disorder-strength sweep; a verification suite re-runs the
//! crate's key identities at small scale as named checks.
//!
//! Determinism: a record is a pure function of `(config, epsilon, trial)`.
//! Realizations are keyed by the per-trial derived seed only, never by the
//! window size or by which other runs happened, so sweeps are resumable and
//! order-independent.

use crate::analysis::{
    averaging_operator_bound, martingale_check, slope_fit, weighted_norm, ErrorAccumulator,
    ErrorReport, NormWeight,
};
use crate::coarse_grain::{
    interp_convergence_error, lowpass_interpolate, sequence_fourier, CoarseGrained,
    fourier_l2_squared, SincSeries,
};
use crate::coefficients::{
    corrector_walks, export_csv, import_csv, lil_envelope_stats, pattern_periodic,
    pattern_sqrt_growth, sample_iid, DistributionKind, DistributionSpec, IncrementSampler,
};
use crate::homogenization::{
    effective_state, residual_closed_form, residual_definitional, WaveProfiles,
};
use crate::integrators::{
    composition_weights, integrate, stable_dt, step_composition, step_rk4, step_yoshida6,
    IntegratorSpec, Method, Workspace,
};
use crate::lattice::{energy, invariant_energy, CoefficientField, LatticeState};
use crate::profiles::{InitialData, Profile};
use crate::seq::{LatticeSeq, Window};
use crate::Error;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig1FixedRealization,
    Fig2Boxplots,
    Fig3Periodic,
    Fig4SqrtGrowth,
    Fig5SigmaSweep,
    VerifySuite,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig1FixedRealization => "fig1_fixed_realization",
            Experiment::Fig2Boxplots => "fig2_boxplots",
            Experiment::Fig3Periodic => "fig3_periodic",
            Experiment::Fig4SqrtGrowth => "fig4_sqrt_growth",
            Experiment::Fig5SigmaSweep => "fig5_sigma_sweep",
            Experiment::VerifySuite => "verify_suite",
        }
    }

    pub fn all() -> [Experiment; 6] {
        [
            Experiment::Fig1FixedRealization,
            Experiment::Fig2Boxplots,
            Experiment::Fig3Periodic,
            Experiment::Fig4SqrtGrowth,
            Experiment::Fig5SigmaSweep,
            Experiment::VerifySuite,
        ]
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Experiment::all()
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown experiment '{s}' (expected one of {})",
                    Experiment::all().map(|e| e.name()).join(", ")
                ))
            })
    }
}

/// One Gaussian bump of a macroscopic profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

pub fn build_profile(terms: &[GaussianTerm]) -> Profile<f64> {
    let mut p = Profile::zero();
    for t in terms {
        p = p.add_scaled(1.0, &Profile::gaussian(t.amplitude, t.center, t.width));
    }
    p
}

fn default_seed() -> u64 {
    7
}

fn default_mass_law() -> DistributionKind {
    DistributionKind::Uniform { a: 0.5, b: 1.5 }
}

fn default_spring_law() -> DistributionKind {
    DistributionKind::Constant { value: 1.0 }
}

fn default_phi() -> Vec<GaussianTerm> {
    vec![GaussianTerm { amplitude: 1.0, center: 0.0, width: 1.0 }]
}

fn default_psi() -> Vec<GaussianTerm> {
    vec![GaussianTerm { amplitude: -1.0, center: 0.0, width: 1.0 }]
}

fn default_periodic_masses() -> Vec<f64> {
    vec![0.5, 1.5]
}

fn default_pattern_m1() -> f64 {
    0.5
}

fn default_pattern_m2() -> f64 {
    1.5
}

fn default_sigma_half_widths() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.4, 0.6, 0.8]
}

fn default_output_dir() -> String {
    "out".into()
}

/// `n` log-spaced points from `hi` down to `lo` (largest, hence cheapest,
/// first).
pub fn log_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (la, lb) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Everything a run needs. All fields except `experiment` have defaults, so
/// a minimal config names just the experiment. The epsilon grid, trial
/// count, and horizon default per experiment: leave them out (or empty/zero)
/// and [`ExperimentConfig::normalize`] fills the stock values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// trials per epsilon (per sigma value for the disorder sweep)
    #[serde(default)]
    pub trials: usize,
    /// macroscopic horizon; lattice time runs to T0/epsilon
    #[serde(rename = "T0", default)]
    pub t0: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub integrator: IntegratorSpec<f64>,
    #[serde(default = "default_mass_law")]
    pub mass_law: DistributionKind,
    #[serde(default = "default_spring_law")]
    pub spring_law: DistributionKind,
    #[serde(default = "default_phi")]
    pub phi: Vec<GaussianTerm>,
    #[serde(default = "default_psi")]
    pub psi: Vec<GaussianTerm>,
    /// one period of the mass pattern (periodic-mass experiment)
    #[serde(default = "default_periodic_masses")]
    pub periodic_masses: Vec<f64>,
    /// the two mass values of the square-root-growth pattern
    #[serde(default = "default_pattern_m1")]
    pub pattern_m1: f64,
    #[serde(default = "default_pattern_m2")]
    pub pattern_m2: f64,
    /// half-widths w of the uniform mass law [1-w, 1+w] swept by the
    /// disorder experiment; sigma_m = w/sqrt(3)
    #[serde(default = "default_sigma_half_widths")]
    pub sigma_half_widths: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

/// Disorder-sweep defaults: one fixed epsilon and horizon, chosen so the
/// zero-disorder absolute error sits near the reference value pinned in the
/// acceptance tests (~0.128; the transient shed by initializing momenta at
/// integer sites dominates it, and scales like sqrt(epsilon)).
pub const FIG5_EPSILON: f64 = 0.07;
pub const FIG5_T0: f64 = 10.0;

/// Measured absolute error (sup-in-time l2 distance of r to the effective
/// field) of the disorder-free chain at the sweep configuration above, with
/// the default initial data and integrator. Pinned as a regression value:
/// deterministic to the last bit given the default seed-independent setup.
pub const FIG5_BASELINE_ABS_ERROR: f64 = 0.12782697570671231;

impl ExperimentConfig {
    /// Stock configuration for one of the named experiments.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let mut cfg = Self {
            experiment,
            epsilons: Vec::new(),
            trials: 0,
            t0: 0.0,
            seed: default_seed(),
            integrator: IntegratorSpec::default(),
            mass_law: default_mass_law(),
            spring_law: default_spring_law(),
            phi: default_phi(),
            psi: default_psi(),
            periodic_masses: default_periodic_masses(),
            pattern_m1: default_pattern_m1(),
            pattern_m2: default_pattern_m2(),
            sigma_half_widths: default_sigma_half_widths(),
            output_dir: default_output_dir(),
        };
        cfg.normalize();
        cfg
    }

    /// Fill the experiment-dependent defaults for fields left empty or
    /// zero (the state a minimal parsed config is in): the epsilon grid,
    /// the trial count, and the horizon. Call before [`Self::validate`].
    pub fn normalize(&mut self) {
        if self.epsilons.is_empty() {
            self.epsilons = match self.experiment {
                Experiment::Fig5SigmaSweep => vec![FIG5_EPSILON],
                _ => log_spaced(10, 0.0125, 0.1),
            };
        }
        if self.trials == 0 {
            self.trials = match self.experiment {
                Experiment::Fig2Boxplots | Experiment::Fig5SigmaSweep => 40,
                _ => 1,
            };
        }
        if self.t0 == 0.0 {
            self.t0 = match self.experiment {
                Experiment::Fig5SigmaSweep => FIG5_T0,
                _ => 1.0,
            };
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.epsilons.is_empty() {
            return Err(Error::EmptyInput("epsilons"));
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::InvalidEpsilon(eps));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "T0 must be positive, got {}",
                self.t0
            )));
        }
        self.mass_law.validate()?;
        self.spring_law.validate()?;
        if self.phi.is_empty() && self.psi.is_empty() {
            return Err(Error::EmptyInput("initial profiles"));
        }
        for t in self.phi.iter().chain(&self.psi) {
            if !(t.width > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "profile width must be positive, got {}",
                    t.width
                )));
            }
        }
        match self.experiment {
            Experiment::Fig3Periodic => {
                if self.periodic_masses.is_empty() {
                    return Err(Error::EmptyInput("periodic_masses"));
                }
                if self.periodic_masses.iter().any(|&m| !(m > 0.0)) {
                    return Err(Error::InvalidArgument("periodic masses must be positive".into()));
                }
            }
            Experiment::Fig4SqrtGrowth => {
                if !(self.pattern_m1 > 0.0 && self.pattern_m2 > 0.0) {
                    return Err(Error::InvalidArgument("pattern masses must be positive".into()));
                }
            }
            Experiment::Fig5SigmaSweep => {
                if self.sigma_half_widths.is_empty() {
                    return Err(Error::EmptyInput("sigma_half_widths"));
                }
                for &w in &self.sigma_half_widths {
                    if !(w >= 0.0 && w < 1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "sigma half-width must lie in [0, 1), got {w}"
                        )));
                    }
                }
                if self.epsilons.len() != 1 {
                    return Err(Error::InvalidArgument(
                        "the disorder sweep runs at a single epsilon".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn mass_spec(&self) -> DistributionSpec {
        DistributionSpec::new(self.mass_law, self.seed)
    }

    fn spring_spec(&self) -> DistributionSpec {
        DistributionSpec::new(self.spring_law, self.seed)
    }

    /// The uniform mass law of disorder-sweep group `g`.
    fn sigma_law(&self, g: usize) -> DistributionKind {
        let w = self.sigma_half_widths[g];
        if w == 0.0 {
            // zero disorder; Uniform{1,1} would be a degenerate law
            DistributionKind::Constant { value: 1.0 }
        } else {
            DistributionKind::Uniform { a: 1.0 - w, b: 1.0 + w }
        }
    }
}

/// One finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: Experiment,
    pub epsilon: f64,
    pub trial: usize,
    /// derived seed of this trial's realization
    pub seed: u64,
    /// standard deviation of the mass law actually used
    pub sigma_m: f64,
    #[serde(flatten)]
    pub report: ErrorReport,
    pub window_radius: i64,
    pub dt: f64,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub experiment: Experiment,
    pub epsilon: f64,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<TrialFailure>,
}

/// Canonical (epsilon, trial) keys of a config, in execution order. The
/// disorder sweep flattens (sigma group, trial) into a single trial index,
/// `trial = group * config.trials + t`, keeping keys unique.
pub fn planned_runs(config: &ExperimentConfig) -> Vec<(f64, usize)> {
    let trials_per_eps = match config.experiment {
        Experiment::Fig5SigmaSweep => config.sigma_half_widths.len() * config.trials,
        _ => config.trials,
    };
    let mut keys = Vec::with_capacity(config.epsilons.len() * trials_per_eps);
    for &eps in &config.epsilons {
        for trial in 0..trials_per_eps {
            keys.push((eps, trial));
        }
    }
    keys
}

/// Mass/spring field of one trial. Patterns are deterministic; i.i.d. fields
/// draw from the per-trial derived stream, addressed by site so the same
/// trial yields the same medium at every window size.
fn build_field(
    config: &ExperimentConfig,
    trial: usize,
    radius: i64,
) -> Result<(CoefficientField<f64>, u64), Error> {
    match config.experiment {
        Experiment::Fig3Periodic => {
            let field = pattern_periodic(&config.periodic_masses, radius)?;
            Ok((field, config.seed))
        }
        Experiment::Fig4SqrtGrowth => {
            let field = pattern_sqrt_growth(config.pattern_m1, config.pattern_m2, radius)?;
            Ok((field, config.seed))
        }
        Experiment::Fig5SigmaSweep => {
            let group = trial / config.trials;
            if group >= config.sigma_half_widths.len() {
                return Err(Error::InvalidArgument(format!(
                    "trial {trial} exceeds the sweep plan ({} groups x {} trials)",
                    config.sigma_half_widths.len(),
                    config.trials
                )));
            }
            let mass = DistributionSpec::new(config.sigma_law(group), config.seed)
                .for_trial(trial as u64);
            let spring = config.spring_spec().for_trial(trial as u64);
            let field = sample_iid(&mass, &spring, radius)?;
            Ok((field, mass.seed))
        }
        _ => {
            let mass = config.mass_spec().for_trial(trial as u64);
            let spring = config.spring_spec().for_trial(trial as u64);
            let field = sample_iid(&mass, &spring, radius)?;
            Ok((field, mass.seed))
        }
    }
}

/// Law-level wave speed, used to size the window before sampling the field.
fn planned_speed(config: &ExperimentConfig, trial: usize) -> f64 {
    let (mbar, ktilde) = match config.experiment {
        Experiment::Fig3Periodic => {
            let n = config.periodic_masses.len() as f64;
            (config.periodic_masses.iter().sum::<f64>() / n, 1.0)
        }
        Experiment::Fig4SqrtGrowth => ((config.pattern_m1 + config.pattern_m2) / 2.0, 1.0),
        Experiment::Fig5SigmaSweep => {
            let group = (trial / config.trials).min(config.sigma_half_widths.len() - 1);
            (config.sigma_law(group).mean(), 1.0 / config.spring_law.mean_reciprocal())
        }
        _ => (config.mass_law.mean(), 1.0 / config.spring_law.mean_reciprocal()),
    };
    (ktilde / mbar).sqrt()
}

/// Observation cadence giving roughly 256 samples over the horizon, dense
/// enough for the sup-in-time error metrics at a fraction of the cost of
/// sampling every step.
fn observation_cadence(
    config: &ExperimentConfig,
    coeffs: &CoefficientField<f64>,
    t_end: f64,
) -> usize {
    if config.integrator.observe_every > 0 {
        return config.integrator.observe_every;
    }
    let dt = if config.integrator.dt > 0.0 {
        config.integrator.dt
    } else {
        stable_dt(coeffs)
    };
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    (steps / 256).max(1)
}

/// Run one (epsilon, trial) cell to a record. Pure function of its inputs.
pub fn run_single(
    config: &ExperimentConfig,
    epsilon: f64,
    trial: usize,
) -> Result<ExperimentRecord, Error> {
    if config.experiment == Experiment::VerifySuite {
        return Err(Error::InvalidArgument(
            "verify_suite produces named checks, not records; call verify_suite()".into(),
        ));
    }
    let started = Instant::now();
    let phi = build_profile(&config.phi);
    let psi = build_profile(&config.psi);
    let init = InitialData::new(phi, psi, epsilon)?;
    let support = init.phi.support_radius().max(init.psi.support_radius());

    let speed = planned_speed(config, trial);
    let window = Window::for_long_wave(epsilon, support, speed, config.t0);
    let (coeffs, seed) = build_field(config, trial, window.radius())?;
    let walks = corrector_walks(&coeffs);
    let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());

    let mut state = effective_state(&wp, &coeffs, epsilon, 0.0);
    let t_end = config.t0 / epsilon;
    let mut spec = config.integrator;
    spec.observe_every = observation_cadence(config, &coeffs, t_end);

    let mut acc = ErrorAccumulator::new(&wp, &walks, &coeffs, epsilon, config.t0);
    let stats = integrate(&mut state, &coeffs, &spec, t_end, |t, s| acc.observe(t, s))?;
    let report = acc.report()?;

    Ok(ExperimentRecord {
        experiment: config.experiment,
        epsilon,
        trial,
        seed,
        sigma_m: coeffs.stats().sigma_m,
        report,
        window_radius: window.radius(),
        dt: stats.dt,
        duration_ms: started.elapsed().as_millis() as u64,
    })
}

/// Run every planned (epsilon, trial) cell, capturing per-trial failures
/// without aborting the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, Error> {
    config.validate()?;
    let mut outcome = RunOutcome::default();
    for (eps, trial) in planned_runs(config) {
        match run_single(config, eps, trial) {
            Ok(record) => outcome.records.push(record),
            Err(err) => outcome.failures.push(TrialFailure {
                experiment: config.experiment,
                epsilon: eps,
                trial,
                message: err.to_string(),
            }),
        }
    }
    Ok(outcome)
}

/// One named verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(results: &mut Vec<CheckResult>, name: &'static str, pass: bool, detail: String) {
    results.push(CheckResult { name, pass, detail });
}

fn constant_field(radius: i64, m: f64, k: f64) -> CoefficientField<f64> {
    let w = Window::new(radius);
    CoefficientField::new(
        w,
        vec![m; w.len()],
        vec![k; w.len()],
        crate::lattice::CoefficientStats {
            mbar: m,
            ktilde: k,
            sigma_m: 0.0,
            sigma_k: 0.0,
            a_m: m,
            b_m: m,
            a_k: k,
            b_k: k,
        },
    )
    .expect("constant field is valid")
}

fn gaussian_state(window: Window, eps: f64) -> LatticeState<f64> {
    LatticeState::from_fns(
        window,
        |j| (-(eps * j as f64).powi(2)).exp(),
        |j| -(-(eps * j as f64).powi(2)).exp(),
    )
}

/// Re-run the crate's key identities as small, named checks: integrator
/// conservation and its deliberate-corruption counterpart, residual
/// cross-checks, corrector-walk laws, norm and interpolation identities, the
/// averaging bound, the martingale inequality, and an end-to-end error run
/// with its energy bound. Windows stay at or below a few thousand sites and
/// epsilon at or above 0.05, so the whole suite runs in well under ten
/// minutes.
pub fn verify_suite(config: &ExperimentConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let seed = config.seed;
    let eps = 0.05f64;

    // --- integrator checks ---
    let weights = composition_weights();
    let wsum: f64 = weights.iter().sum();
    let wcubes: f64 = weights.iter().map(|w| w * w * w).sum();
    check(
        &mut out,
        "composition_weights_satisfy_order_conditions",
        (wsum - 1.0).abs() <= 1e-15 && wcubes.abs() <= 1e-14,
        format!("sum-1 = {:.2e}, sum of cubes = {:.2e}", wsum - 1.0, wcubes),
    );

    {
        let coeffs = constant_field(200, 1.0, 1.0);
        let mut state = gaussian_state(coeffs.window(), eps);
        let e0 = invariant_energy(&state, &coeffs).unwrap();
        for _ in 0..2000 {
            step_composition(&mut state, &coeffs, 0.05, &weights);
        }
        let e1 = invariant_energy(&state, &coeffs).unwrap();
        let clean = ((e1 - e0) / e0).abs();
        check(
            &mut out,
            "composition_conserves_energy",
            clean <= 1e-8,
            format!("relative drift {clean:.2e} over 2000 steps"),
        );
    }

    {
        // Corrupting one composition weight must be caught: the scheme drops
        // to first order, so plane-wave tracking degrades by several orders
        // of magnitude. (Energy alone cannot see this on smooth states: the
        // corrupted map is still symplectic and stable.)
        let kap = 0.9f64;
        let om = 2.0 * (kap / 2.0f64).sin();
        let w = Window::new(40);
        let coeffs = constant_field(40, 1.0, 1.0);
        let wave = |t: f64| {
            LatticeState::from_fns(
                w,
                |j| (kap * j as f64 - om * t).cos(),
                |j| -(kap * (j as f64 - 0.5) - om * t).cos(),
            )
        };
        let tracked_error = |weights: &[f64]| {
            let mut state = wave(0.0);
            for _ in 0..50 {
                step_composition(&mut state, &coeffs, 0.1, weights);
            }
            let exact = wave(5.0);
            let mut sup = 0.0f64;
            for j in -17..=17i64 {
                sup = sup
                    .max((state.r.get(j) - exact.r.get(j)).abs())
                    .max((state.p.get(j) - exact.p.get(j)).abs());
            }
            sup
        };
        let clean = tracked_error(&weights);
        let mut corrupted_weights = weights;
        corrupted_weights[1] += 1e-3;
        let corrupted = tracked_error(&corrupted_weights);
        check(
            &mut out,
            "corrupted_composition_weight_is_caught",
            clean <= 1e-6 && corrupted >= 1e-4 && corrupted > 100.0 * clean,
            format!(
                "tracking error {corrupted:.2e} after perturbing one weight by 1e-3 (clean {clean:.2e})"
            ),
        );
    }

    {
        // plane wave on the constant chain, interior error after T = 5
        let kap = 0.9f64;
        let om = 2.0 * (kap / 2.0f64).sin();
        let w = Window::new(40);
        let coeffs = constant_field(40, 1.0, 1.0);
        let wave = |t: f64| {
            LatticeState::from_fns(
                w,
                |j| (kap * j as f64 - om * t).cos(),
                |j| -(kap * (j as f64 - 0.5) - om * t).cos(),
            )
        };
        let mut state = wave(0.0);
        let spec = IntegratorSpec { method: Method::Yoshida6, dt: 0.1, observe_every: usize::MAX };
        integrate(&mut state, &coeffs, &spec, 5.0, |_, _| {}).unwrap();
        // skip sites the window edge influenced: ballistic front (5 sites)
        // plus the dispersive tail (~18 sites to decay under 1e-14)
        let exact = wave(5.0);
        let mut err = 0.0f64;
        for j in -17..=17i64 {
            err = err
                .max((state.r.get(j) - exact.r.get(j)).abs())
                .max((state.p.get(j) - exact.p.get(j)).abs());
        }
        check(
            &mut out,
            "plane_wave_is_tracked",
            err <= 1e-6,
            format!("interior sup error {err:.2e}"),
        );

        let mut back = state.clone();
        integrate(&mut back, &coeffs, &spec, -5.0, |_, _| {}).unwrap();
        let start = wave(0.0);
        let mut rev = 0.0f64;
        for j in w.iter() {
            rev = rev
                .max((back.r.get(j) - start.r.get(j)).abs())
                .max((back.p.get(j) - start.p.get(j)).abs());
        }
        check(
            &mut out,
            "backward_integration_reverses_the_run",
            rev <= 1e-6,
            format!("sup deviation after forward+backward {rev:.2e}"),
        );
    }

    {
        // the two methods agree on a disordered chain
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(1);
        let spring = DistributionSpec::new(default_spring_law(), seed).for_trial(1);
        let coeffs: CoefficientField<f64> = sample_iid(&mass, &spring, 300).unwrap();
        let init = gaussian_state(coeffs.window(), eps);
        let mut a = init.clone();
        let mut b = init.clone();
        let run = |state: &mut LatticeState<f64>, method: Method| {
            let spec = IntegratorSpec { method, dt: 0.0, observe_every: usize::MAX };
            integrate(state, &coeffs, &spec, 10.0, |_, _| {}).unwrap();
        };
        run(&mut a, Method::Yoshida6);
        run(&mut b, Method::Rk4);
        let mut diff = 0.0f64;
        for j in coeffs.window().iter() {
            diff = diff.max((a.r.get(j) - b.r.get(j)).abs()).max((a.p.get(j) - b.p.get(j)).abs());
        }
        check(
            &mut out,
            "integration_methods_agree",
            diff <= 1e-6,
            format!("sup difference between methods {diff:.2e}"),
        );
    }

    // --- residual checks ---
    {
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(2);
        let spring =
            DistributionSpec::new(DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 }, seed)
                .for_trial(2);
        let coeffs: CoefficientField<f64> = sample_iid(&mass, &spring, 300).unwrap();
        let walks = corrector_walks(&coeffs);
        let phi = Profile::gaussian(1.0, 0.0, 1.0);
        let psi = Profile::gaussian(-1.0, 0.0, 1.0);
        let init = InitialData::new(phi, psi, eps).unwrap();
        let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());
        let (d1, d2) = residual_definitional(&wp, &walks, &coeffs, eps, 3.0);
        let (c1, c2) = residual_closed_form(&wp, &walks, &coeffs, eps, 3.0);
        let scale = d1.linf_norm().max(d2.linf_norm());
        let mut worst = 0.0f64;
        for j in coeffs.window().iter() {
            worst = worst.max((d1.get(j) - c1.get(j)).abs()).max((d2.get(j) - c2.get(j)).abs());
        }
        check(
            &mut out,
            "closed_residual_matches_definitional",
            scale > 0.0 && worst <= 1e-10 * scale,
            format!("max deviation {worst:.2e} against scale {scale:.2e}"),
        );
    }

    {
        // constant coefficients: l2 residual scales like eps^(3/2)
        let gamma = |e: f64| {
            let w = Window::for_long_wave(e, 7.5, 1.0, 1.0);
            let coeffs = constant_field(w.radius(), 1.0, 1.0);
            let walks = corrector_walks(&coeffs);
            let phi = Profile::gaussian(1.0, 0.0, 1.0);
            let psi = Profile::gaussian(-1.0, 0.0, 1.0);
            let init = InitialData::new(phi, psi, e).unwrap();
            let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());
            let (r1, r2) = residual_closed_form(&wp, &walks, &coeffs, e, 0.0);
            (r1.l2_norm().powi(2) + r2.l2_norm().powi(2)).sqrt()
        };
        let ratio = gamma(0.1) / gamma(0.05);
        let expected = 2.0f64.powf(1.5);
        check(
            &mut out,
            "residual_norm_scales_three_halves",
            (ratio / expected - 1.0).abs() <= 0.25,
            format!("halving epsilon changed the residual norm by {ratio:.3} (expect ~{expected:.3})"),
        );
    }

    // --- corrector-walk checks ---
    {
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(3);
        let spring =
            DistributionSpec::new(DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 }, seed)
                .for_trial(3);
        let coeffs: CoefficientField<f64> = sample_iid(&mass, &spring, 500).unwrap();
        let walks = corrector_walks(&coeffs);
        let stats = coeffs.stats();
        let mut worst = 0.0f64;
        for j in -499..=499i64 {
            let dk = walks.chi_k(j + 1) - walks.chi_k(j) - (stats.ktilde / coeffs.k(j) - 1.0);
            let dm = walks.chi_m(j) - walks.chi_m(j - 1) - (coeffs.m(j) / stats.mbar - 1.0);
            worst = worst.max(dk.abs()).max(dm.abs());
        }
        check(
            &mut out,
            "corrector_walks_invert_their_increments",
            worst <= 1e-12 && walks.chi_k(0) == 0.0 && walks.chi_m(0) == 0.0,
            format!("max defining-difference defect {worst:.2e}"),
        );
        let c_omega = walks.envelope_constant();
        check(
            &mut out,
            "walk_envelope_constant_is_finite",
            c_omega.is_finite() && c_omega > 0.0,
            format!("C_omega estimate {c_omega:.3}"),
        );
    }

    {
        // long Rademacher walk stays essentially inside the 2-sigma envelope
        let sampler = IncrementSampler::rademacher(seed ^ 0xABCD);
        let n = 100_000usize;
        let mut walk = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        walk.push(0.0);
        for step in 0..n {
            acc += sampler.draw(0, step as u64);
            walk.push(acc);
        }
        let report = lil_envelope_stats(&walk, 1.0);
        let frac = report.exceed_count_2sigma as f64 / report.sites_checked.max(1) as f64;
        check(
            &mut out,
            "iterated_log_envelope_is_rarely_exceeded",
            frac < 0.01 && report.c_omega.is_finite(),
            format!(
                "{} of {} sites beyond twice the envelope ({:.4}%)",
                report.exceed_count_2sigma,
                report.sites_checked,
                100.0 * frac
            ),
        );
    }

    {
        let law = DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 };
        let sampler = IncrementSampler::chi_k(law, seed ^ 0x5EED);
        let mc = martingale_check(&sampler, 1000, 10_000);
        check(
            &mut out,
            "martingale_maximal_inequality",
            mc.mean_max_square <= mc.bound,
            format!(
                "E[max W^2] = {:.4}, bound 4 N sigma^2 = {:.4} (ratio {:.3})",
                mc.mean_max_square,
                mc.bound,
                mc.mean_max_square / mc.bound
            ),
        );
    }

    // --- weighted norms and the averaging operator ---
    {
        let b_flat: f64 = averaging_operator_bound(NormWeight::Unweighted, 0.3).unwrap();
        check(
            &mut out,
            "averaging_flat_weight_is_exact",
            (b_flat - 1.0).abs() <= 1e-12,
            format!("max averaged flat weight {b_flat}"),
        );
        let mut worst: f64 = 0.0;
        let mut all_below = true;
        for eps_b in [0.1, 0.5, 0.9] {
            let b: f64 = averaging_operator_bound(NormWeight::SquareRoot, eps_b).unwrap();
            all_below &= b <= 1.5 && (b - (1.0 + eps_b / 2.0)).abs() <= 1e-9;
            worst = worst.max(b);
        }
        check(
            &mut out,
            "averaging_square_root_weight_stays_below_three_halves",
            all_below,
            format!("largest value {worst:.6}"),
        );
        let b_lil = averaging_operator_bound(NormWeight::IteratedLog, 0.5).unwrap();
        check(
            &mut out,
            "averaging_iterated_log_weight_stays_below_two",
            b_lil > 1.0 && b_lil <= 2.0,
            format!("value at eps = 0.5: {b_lil:.6}"),
        );
    }

    {
        let g = Profile::gaussian(1.0, 0.0, 1.0);
        let n0 = weighted_norm(&g, 0, NormWeight::Unweighted).unwrap();
        let exact = (std::f64::consts::PI / 2.0).powf(0.25);
        check(
            &mut out,
            "gaussian_weighted_norm_value",
            (n0 - exact).abs() <= 1e-8,
            format!("{n0:.10} vs (pi/2)^(1/4) = {exact:.10}"),
        );
        let far = Profile::gaussian(0.8, 25.0, 1.0);
        let flat = weighted_norm(&far, 2, NormWeight::Unweighted).unwrap();
        let sqrt_w = weighted_norm(&far, 2, NormWeight::SquareRoot).unwrap();
        let lil_w = weighted_norm(&far, 2, NormWeight::IteratedLog).unwrap();
        check(
            &mut out,
            "weighted_norms_order_away_from_the_origin",
            flat <= sqrt_w && sqrt_w <= lil_w,
            format!("{flat:.4} <= {sqrt_w:.4} <= {lil_w:.4}"),
        );
    }

    // --- interpolation and Fourier identities ---
    {
        let w = Window::new(2000);
        let f = LatticeSeq::from_fn(w, |j| {
            2.0 * crate::coefficients::unit_f64(seed ^ 0xF00D, (j + 2000) as u64) - 1.0
        });
        let series = SincSeries::new(&f);
        let mut worst = 0.0f64;
        for j in (-2000..=2000i64).step_by(7) {
            worst = worst.max((series.eval(j as f64) - f.get(j)).abs());
        }
        check(
            &mut out,
            "sampling_inverts_interpolation",
            worst <= 1e-13,
            format!("sup sampling defect {worst:.2e} over 4001 sites"),
        );
    }

    {
        let w = Window::new(60);
        let f = LatticeSeq::from_fn(w, |j| (-(j as f64 / 8.0).powi(2)).exp());
        let cont = crate::coarse_grain::interpolant_l2_norm(&f, 40.0, 0.125);
        let rel = (cont - f.l2_norm()).abs() / f.l2_norm();
        check(
            &mut out,
            "interpolant_preserves_the_sequence_norm",
            rel <= 1e-6,
            format!("relative defect {rel:.2e}"),
        );

        let lhs = fourier_l2_squared(&f, 4 * 60 + 8);
        let rhs = f.l2_norm().powi(2) / (2.0 * std::f64::consts::PI);
        check(
            &mut out,
            "parseval_identity",
            (lhs - rhs).abs() <= 1e-10 * rhs,
            format!("spectral energy {lhs:.8} vs {rhs:.8}"),
        );
    }

    {
        let w = Window::new(4);
        let f = LatticeSeq::from_fn(w, |j| if j == 0 { 1.0 } else { 0.0 });
        let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
        let val = sequence_fourier(&f, 1.3);
        let half = lowpass_interpolate(&f, 0.5);
        check(
            &mut out,
            "point_mass_transform_and_half_integer_sinc",
            (val.re - inv_2pi).abs() <= 1e-15
                && val.im.abs() <= 1e-15
                && (half - 2.0 / std::f64::consts::PI).abs() <= 1e-15,
            format!("F[delta](1.3) = {:.8}, L[delta](1/2) = {half:.8}", val.re),
        );
    }

    {
        let gauss = |x: f64| (-x * x).exp();
        let coarse = interp_convergence_error(gauss, 8.0, 0.45).unwrap();
        let fine = interp_convergence_error(gauss, 8.0, 0.35).unwrap();
        check(
            &mut out,
            "interpolation_error_decays_with_sampling_scale",
            coarse > fine && fine > 0.0,
            format!("{coarse:.2e} at 0.45 -> {fine:.2e} at 0.35"),
        );
    }

    // --- homogenization and the end-to-end error run ---
    {
        let phi = Profile::gaussian(1.0, 0.3, 1.1).add_scaled(0.5, &Profile::gaussian(1.0, -1.0, 0.8));
        let psi = Profile::gaussian(-0.7, 0.0, 1.0);
        let init = InitialData::new(phi, psi, eps).unwrap();
        let coeffs = constant_field(10, 0.9, 1.44);
        let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());
        let mut worst_split = 0.0f64;
        for x in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            let (q, p) = wp.effective(x, 0.0);
            worst_split = worst_split
                .max((q - init.phi.eval(x)).abs())
                .max((p - init.psi.eval(x)).abs());
        }
        check(
            &mut out,
            "traveling_wave_splitting_reproduces_initial_data",
            worst_split <= 1e-14,
            format!("sup roundtrip defect {worst_split:.2e}"),
        );

        let c = wp.speed();
        let h = 1e-4;
        let mut worst_pde = 0.0f64;
        for &(x, tau) in &[(0.2, 0.5), (-1.0, 1.3)] {
            let dq_dtau = (wp.effective(x, tau + h).0 - wp.effective(x, tau - h).0) / (2.0 * h);
            let dp_dtau = (wp.effective(x, tau + h).1 - wp.effective(x, tau - h).1) / (2.0 * h);
            let dq_dx = wp.a.eval_deriv(1, x - c * tau) + wp.b.eval_deriv(1, x + c * tau);
            let dp_dx = (wp.b.eval_deriv(1, x + c * tau) - wp.a.eval_deriv(1, x - c * tau))
                / wp.impedance();
            worst_pde = worst_pde
                .max((dq_dtau - wp.ktilde * dp_dx).abs())
                .max((dp_dtau - dq_dx / wp.mbar).abs());
        }
        check(
            &mut out,
            "effective_pair_solves_the_averaged_system",
            worst_pde <= 1e-6,
            format!("finite-difference defect {worst_pde:.2e}"),
        );
    }

    {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig2Boxplots);
        cfg.seed = seed;
        cfg.trials = 1;
        cfg.epsilons = vec![eps];
        let rec = run_single(&cfg, eps, 0).expect("verification run");
        check(
            &mut out,
            "gronwall_bound_on_integrated_run",
            rec.report.gronwall_pass && rec.report.rho > 0.0 && rec.report.rho < 1.0,
            format!(
                "sup error {:.3e} <= bound {:.3e} (margin {:.2}), rho = {:.4}",
                rec.report.sup_error_norm,
                rec.report.gronwall_bound,
                rec.report.gronwall_bound / rec.report.sup_error_norm.max(1e-300),
                rec.report.rho
            ),
        );
        let rec2 = run_single(&cfg, eps, 0).expect("verification rerun");
        check(
            &mut out,
            "repeated_runs_are_bitwise_deterministic",
            rec.report == rec2.report && rec.seed == rec2.seed,
            "two identical runs produced identical reports".into(),
        );
        let mut scaled = cfg.clone();
        scaled.phi = vec![GaussianTerm { amplitude: 3.7, center: 0.0, width: 1.0 }];
        scaled.psi = vec![GaussianTerm { amplitude: -3.7, center: 0.0, width: 1.0 }];
        let rec3 = run_single(&scaled, eps, 0).expect("scaled verification run");
        let rel = (rec.report.rho - rec3.report.rho).abs() / rec.report.rho;
        check(
            &mut out,
            "relative_error_is_scale_invariant",
            rel <= 1e-10,
            format!("rho changed by {rel:.2e} under 3.7x data scaling"),
        );
    }

    {
        // coarse-grained fields track the macroscopic solution at time zero
        let w = Window::for_long_wave(eps, 7.5, 1.0, 1.0);
        let coeffs = constant_field(w.radius(), 1.0, 1.0);
        let phi = Profile::gaussian(1.0, 0.0, 1.0);
        let psi = Profile::gaussian(-1.0, 0.0, 1.0);
        let init = InitialData::new(phi, psi, eps).unwrap();
        let wp = WaveProfiles::from_initial_data(&init, coeffs.stats());
        let state = effective_state(&wp, &coeffs, eps, 0.0);
        let run = vec![(0.0, state)];
        let cg = CoarseGrained::from_run(&run, &coeffs, eps).unwrap();
        let (qe, pe) = cg.l2_error_vs_effective(0, &wp);
        let scale = init.phi.l2_norm();
        check(
            &mut out,
            "coarse_fields_match_the_macroscopic_profile",
            qe <= 0.01 * scale && pe <= 0.01 * scale,
            format!("L2 defects Q: {qe:.2e}, P: {pe:.2e} against scale {scale:.3}"),
        );
    }

    {
        // energy equivalence brackets the deviation norm
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(4);
        let spring =
            DistributionSpec::new(DistributionKind::TwoPoint { v1: 1.0, v2: 2.0, p1: 0.5 }, seed)
                .for_trial(4);
        let coeffs: CoefficientField<f64> = sample_iid(&mass, &spring, 200).unwrap();
        let w = coeffs.window();
        let eta = LatticeSeq::from_fn(w, |j| {
            2.0 * crate::coefficients::unit_f64(seed ^ 0xE7A, (j + 200) as u64) - 1.0
        });
        let xi = LatticeSeq::from_fn(w, |j| {
            2.0 * crate::coefficients::unit_f64(seed ^ 0x21, (j + 200) as u64) - 1.0
        });
        let h = energy(&eta, &xi, &coeffs).unwrap().sqrt();
        let norm = (eta.l2_norm().powi(2) + xi.l2_norm().powi(2)).sqrt();
        let (c_lo, c_hi) = coeffs.energy_equivalence();
        check(
            &mut out,
            "energy_equivalence_brackets_the_deviation_norm",
            c_lo * norm <= h && h <= c_hi * norm,
            format!("{:.4} <= {:.4} <= {:.4}", c_lo * norm, h, c_hi * norm),
        );
    }

    {
        // coefficient CSV roundtrip
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(5);
        let spring = DistributionSpec::new(default_spring_law(), seed).for_trial(5);
        let coeffs: CoefficientField<f64> = sample_iid(&mass, &spring, 50).unwrap();
        let mut buf = Vec::new();
        export_csv(&coeffs, &mut buf).unwrap();
        let back: CoefficientField<f64> = import_csv(&buf[..]).unwrap();
        let mut worst = 0.0f64;
        for j in coeffs.window().iter() {
            worst = worst.max((coeffs.m(j) - back.m(j)).abs()).max((coeffs.k(j) - back.k(j)).abs());
        }
        check(
            &mut out,
            "coefficient_csv_roundtrip",
            back.window() == coeffs.window() && worst <= 1e-12,
            format!("max roundtrip defect {worst:.2e}"),
        );
    }

    {
        // site-addressable sampling: the same seed gives the same medium on
        // nested windows
        let mass = DistributionSpec::new(default_mass_law(), seed).for_trial(6);
        let spring = DistributionSpec::new(default_spring_law(), seed).for_trial(6);
        let small: CoefficientField<f64> = sample_iid(&mass, &spring, 20).unwrap();
        let large: CoefficientField<f64> = sample_iid(&mass, &spring, 200).unwrap();
        let mut same = true;
        for j in -20..=20i64 {
            same &= small.m(j) == large.m(j) && small.k(j) == large.k(j);
        }
        check(
            &mut out,
            "sampling_is_window_independent",
            same,
            "overlapping sites agree bitwise across window sizes".into(),
        );
    }

    {
        // slope fitting on a synthetic power law
        let xs: Vec<f64> = log_spaced(8, 0.01, 0.5);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        check(
            &mut out,
            "slope_fit_recovers_power_laws",
            (fit.slope - 1.5).abs() <= 1e-10 && (fit.r_squared - 1.0).abs() <= 1e-10,
            format!("slope {:.6}, r^2 {:.8}", fit.slope, fit.r_squared),
        );
    }

    {
        // RK4 order on the plane wave (quick version of the convergence test)
        let w = Window::new(40);
        let coeffs = constant_field(40, 1.0, 1.0);
        let kap = 0.9f64;
        let om = 2.0 * (kap / 2.0f64).sin();
        let wave = |t: f64| {
            LatticeState::from_fns(
                w,
                |j| (kap * j as f64 - om * t).cos(),
                |j| -(kap * (j as f64 - 0.5) - om * t).cos(),
            )
        };
        let err_at = |dt: f64| {
            let mut state = wave(0.0);
            let mut ws = Workspace::new(w);
            let n = (5.0 / dt).round() as usize;
            for _ in 0..n {
                step_rk4(&mut state, &coeffs, dt, &mut ws);
            }
            let exact = wave(5.0);
            let mut sup = 0.0f64;
            for j in -17..=17i64 {
                sup = sup.max((state.r.get(j) - exact.r.get(j)).abs());
            }
            sup
        };
        let order = (err_at(0.2) / err_at(0.1)).log2();
        check(
            &mut out,
            "rk4_converges_at_fourth_order",
            (order - 4.0).abs() <= 0.2,
            format!("observed order {order:.3}"),
        );

        let mut state = wave(0.0);
        step_yoshida6(&mut state, &coeffs, 0.3);
        step_yoshida6(&mut state, &coeffs, -0.3);
        let start = wave(0.0);
        let mut diff = 0.0f64;
        for j in w.iter() {
            diff = diff.max((state.r.get(j) - start.r.get(j)).abs());
        }
        check(
            &mut out,
            "composition_step_is_time_reversible",
            diff <= 1e-12,
            format!("reversal defect {diff:.2e}"),
        );
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stock_configs_validate() {
        for exp in Experiment::all() {
            let cfg = ExperimentConfig::for_experiment(exp);
            cfg.validate().unwrap_or_else(|e| panic!("{exp}: {e}"));
        }
    }

    #[test]
    fn experiment_names_roundtrip() {
        for exp in Experiment::all() {
            let parsed: Experiment = exp.name().parse().unwrap();
            assert_eq!(parsed, exp);
        }
        assert!("fig9_nonsense".parse::<Experiment>().is_err());
        // serde uses the same snake_case names
        let json = serde_json::to_string(&Experiment::Fig1FixedRealization).unwrap();
        assert_eq!(json, "\"fig1_fixed_realization\"");
    }

    #[test]
    fn planned_runs_cover_the_grid_uniquely() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig2Boxplots);
        cfg.trials = 3;
        cfg.epsilons = vec![0.1, 0.05];
        let keys = planned_runs(&cfg);
        assert_eq!(keys.len(), 6);
        let mut seen = std::collections::HashSet::new();
        for (e, t) in &keys {
            assert!(seen.insert((e.to_bits(), *t)), "duplicate key ({e}, {t})");
        }

        let mut sweep = ExperimentConfig::for_experiment(Experiment::Fig5SigmaSweep);
        sweep.trials = 2;
        sweep.sigma_half_widths = vec![0.1, 0.4];
        let keys = planned_runs(&sweep);
        assert_eq!(keys.len(), 4);
        assert!(keys.iter().all(|&(e, _)| e == FIG5_EPSILON));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig1FixedRealization);
        cfg.epsilons = vec![0.6];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig1FixedRealization);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig5SigmaSweep);
        cfg.sigma_half_widths = vec![1.2];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig3Periodic);
        cfg.periodic_masses = vec![0.5, -0.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_toml_roundtrips_with_defaults() {
        // minimal document: everything except the experiment is defaulted
        let mut cfg: ExperimentConfig =
            serde_json::from_str(r#"{"experiment": "fig1_fixed_realization"}"#).unwrap();
        cfg.normalize();
        assert_eq!(cfg.experiment, Experiment::Fig1FixedRealization);
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.t0, 1.0);
        assert_eq!(cfg.epsilons.len(), 10);
        assert!((cfg.epsilons[0] - 0.1).abs() <= 1e-15);
        assert!((cfg.epsilons[9] - 0.0125).abs() <= 1e-15);
        assert_eq!(cfg, ExperimentConfig::for_experiment(Experiment::Fig1FixedRealization));
        // T0 serializes under its display name
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"T0\":1.0"), "{text}");

        // a minimal disorder-sweep config gets its own grid and horizon
        let mut sweep: ExperimentConfig =
            serde_json::from_str(r#"{"experiment": "fig5_sigma_sweep"}"#).unwrap();
        sweep.normalize();
        assert_eq!(sweep.epsilons, vec![FIG5_EPSILON]);
        assert_eq!(sweep.t0, FIG5_T0);
        assert_eq!(sweep.trials, 40);
        sweep.validate().unwrap();
    }

    #[test]
    fn single_runs_are_deterministic_and_seed_sensitive() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig2Boxplots);
        cfg.trials = 2;
        cfg.epsilons = vec![0.1];
        let a = run_single(&cfg, 0.1, 1).unwrap();
        let b = run_single(&cfg, 0.1, 1).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.sigma_m, b.sigma_m);

        let other_trial = run_single(&cfg, 0.1, 0).unwrap();
        assert_ne!(a.report.rho, other_trial.report.rho);
        let mut reseeded = cfg.clone();
        reseeded.seed = cfg.seed + 1;
        let c = run_single(&reseeded, 0.1, 1).unwrap();
        assert_ne!(a.report.rho, c.report.rho);
    }

    #[test]
    fn constant_coefficients_give_a_reproducible_baseline() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig1FixedRealization);
        cfg.mass_law = DistributionKind::Constant { value: 1.0 };
        cfg.epsilons = vec![0.1];
        let a = run_single(&cfg, 0.1, 0).unwrap();
        let b = run_single(&cfg, 0.1, 0).unwrap();
        assert_eq!(a.report.rho, b.report.rho);
        assert_eq!(a.sigma_m, 0.0);
        // no disorder: the corrector vanishes and the run passes its bound
        assert_eq!(a.report.c_omega_estimate, 0.0);
        assert!(a.report.gronwall_pass);
    }

    #[test]
    fn sweep_outcome_collects_failures_without_aborting() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig1FixedRealization);
        cfg.epsilons = vec![0.1];
        cfg.integrator.dt = 1e9; // fails the stability guard
        let outcome = run_experiment(&cfg).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.failures.len(), 1);
        assert!(outcome.failures[0].message.contains("dt"), "{}", outcome.failures[0].message);
    }

    #[test]
    fn verification_suite_is_all_green() {
        let cfg = ExperimentConfig::for_experiment(Experiment::VerifySuite);
        let results = verify_suite(&cfg);
        assert!(results.len() >= 25, "only {} checks ran", results.len());
        for r in &results {
            println!("{} {}: {}", if r.pass { "pass" } else { "FAIL" }, r.name, r.detail);
        }
        let failed: Vec<_> = results.iter().filter(|r| !r.pass).map(|r| r.name).collect();
        assert!(failed.is_empty(), "failed checks: {failed:?}");
    }

    #[test]
    fn fig5_trials_map_to_sigma_groups() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Fig5SigmaSweep);
        cfg.trials = 2;
        cfg.sigma_half_widths = vec![0.1, 0.4];
        cfg.t0 = 1.0; // keep the test fast
        let lo = run_single(&cfg, FIG5_EPSILON, 0).unwrap();
        let hi = run_single(&cfg, FIG5_EPSILON, 3).unwrap();
        assert!((lo.sigma_m - 0.1 / 3.0f64.sqrt()).abs() <= 1e-12);
        assert!((hi.sigma_m - 0.4 / 3.0f64.sqrt()).abs() <= 1e-12);
        assert!(run_single(&cfg, FIG5_EPSILON, 4).is_err());
    }
}
