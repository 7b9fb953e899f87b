//! Aggregation of experiment records into `summary.json`: per-epsilon (or
//! per-sigma) quartile statistics and log-log slope fits.

use lattice_homog_core::analysis::{slope_fit, SlopeFit};
use lattice_homog_core::experiments::{Experiment, ExperimentConfig, ExperimentRecord};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let w = pos - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    };
    Some(Quartiles { min: v[0], q1: at(0.25), median: at(0.5), q3: at(0.75), max: v[v.len() - 1] })
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonGroup {
    pub epsilon: f64,
    pub count: usize,
    pub rho: Quartiles,
    pub sup_abs_error_r: Quartiles,
    pub gamma_eps: Quartiles,
    pub gronwall_all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaGroup {
    pub sigma_m: f64,
    pub count: usize,
    pub sup_abs_error_r: Quartiles,
    pub sup_abs_error_p: Quartiles,
    pub gronwall_all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fits {
    /// log-log fit of median rho against epsilon
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_vs_epsilon: Option<SlopeFit>,
    /// same with rho divided by sqrt(loglog(1/epsilon))
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_normalized_vs_epsilon: Option<SlopeFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config_hash: String,
    /// hash of the cell-content-determining config parts; the resume guard
    pub run_identity: String,
    pub experiment: Experiment,
    pub status: String,
    pub records: usize,
    pub failures: usize,
    pub per_epsilon: Vec<EpsilonGroup>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_sigma: Vec<SigmaGroup>,
    pub fits: Fits,
    pub config: ExperimentConfig,
}

/// `sqrt(loglog(1/epsilon))`, the growth envelope the fixed-realization
/// sweep divides out. Finite only for epsilon < 1/e.
pub fn loglog_envelope(epsilon: f64) -> f64 {
    (1.0 / epsilon).ln().ln().sqrt()
}

fn group_by<K: PartialEq + Copy>(
    records: &[ExperimentRecord],
    key: impl Fn(&ExperimentRecord) -> K,
) -> Vec<(K, Vec<&ExperimentRecord>)> {
    let mut groups: Vec<(K, Vec<&ExperimentRecord>)> = Vec::new();
    for rec in records {
        let k = key(rec);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(rec),
            None => groups.push((k, vec![rec])),
        }
    }
    groups
}

pub fn per_epsilon_groups(records: &[ExperimentRecord]) -> Vec<EpsilonGroup> {
    group_by(records, |r| r.epsilon.to_bits())
        .into_iter()
        .map(|(bits, recs)| {
            let get = |f: fn(&ExperimentRecord) -> f64| {
                quartiles(&recs.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap()
            };
            EpsilonGroup {
                epsilon: f64::from_bits(bits),
                count: recs.len(),
                rho: get(|r| r.report.rho),
                sup_abs_error_r: get(|r| r.report.sup_abs_error_r),
                gamma_eps: get(|r| r.report.gamma_eps),
                gronwall_all_pass: recs.iter().all(|r| r.report.gronwall_pass),
            }
        })
        .collect()
}

pub fn per_sigma_groups(records: &[ExperimentRecord]) -> Vec<SigmaGroup> {
    let mut groups: Vec<SigmaGroup> = group_by(records, |r| r.sigma_m.to_bits())
        .into_iter()
        .map(|(bits, recs)| {
            let get = |f: fn(&ExperimentRecord) -> f64| {
                quartiles(&recs.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap()
            };
            SigmaGroup {
                sigma_m: f64::from_bits(bits),
                count: recs.len(),
                sup_abs_error_r: get(|r| r.report.sup_abs_error_r),
                sup_abs_error_p: get(|r| r.report.sup_abs_error_p),
                gronwall_all_pass: recs.iter().all(|r| r.report.gronwall_pass),
            }
        })
        .collect();
    groups.sort_by(|a, b| a.sigma_m.total_cmp(&b.sigma_m));
    groups
}

fn fit_medians(groups: &[EpsilonGroup], normalize: bool) -> Option<SlopeFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for g in groups {
        let y = if normalize { g.rho.median / loglog_envelope(g.epsilon) } else { g.rho.median };
        if y.is_finite() && y > 0.0 {
            xs.push(g.epsilon);
            ys.push(y);
        }
    }
    slope_fit(&xs, &ys).ok()
}

pub fn build_summary(
    config_hash: &str,
    config: &ExperimentConfig,
    records: &[ExperimentRecord],
    failures: usize,
) -> Summary {
    let per_epsilon = per_epsilon_groups(records);
    let per_sigma = if config.experiment == Experiment::Fig5SigmaSweep {
        per_sigma_groups(records)
    } else {
        Vec::new()
    };
    let fits = Fits {
        rho_vs_epsilon: fit_medians(&per_epsilon, false),
        rho_normalized_vs_epsilon: fit_medians(&per_epsilon, true),
    };
    Summary {
        config_hash: config_hash.to_string(),
        run_identity: run_identity_hash(config),
        experiment: config.experiment,
        status: if failures == 0 { "complete".into() } else { "completed_with_failures".into() },
        records: records.len(),
        failures,
        per_epsilon,
        per_sigma,
        fits,
        config: config.clone(),
    }
}

fn fnv1a(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// FNV-1a over the canonical JSON form of the effective configuration.
pub fn config_hash(config: &ExperimentConfig) -> String {
    fnv1a(&serde_json::to_string(config).expect("config serializes"))
}

/// Hash of the parts of the configuration that determine what any single
/// (epsilon, trial) cell computes. The epsilon grid and the output
/// directory only select which cells run, so they are excluded; a stored
/// record can be reused whenever this hash matches. The trial count is
/// likewise neutral except for the disorder sweep, where it is part of the
/// trial-to-sigma-group mapping.
pub fn run_identity_hash(config: &ExperimentConfig) -> String {
    let mut id = config.clone();
    id.epsilons = Vec::new();
    id.output_dir = String::new();
    if id.experiment != Experiment::Fig5SigmaSweep {
        id.trials = 0;
        id.sigma_half_widths = Vec::new();
    }
    if !matches!(id.experiment, Experiment::Fig3Periodic) {
        id.periodic_masses = Vec::new();
    }
    if !matches!(id.experiment, Experiment::Fig4SqrtGrowth) {
        id.pattern_m1 = 0.0;
        id.pattern_m2 = 0.0;
    }
    fnv1a(&serde_json::to_string(&id).expect("config serializes"))
}
