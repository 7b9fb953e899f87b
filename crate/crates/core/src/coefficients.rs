//! Coefficient fields: i.i.d. sampling, deterministic patterns, corrector
//! walks, and their law-of-the-iterated-logarithm diagnostics.
//!
//! Sampling is counter-based: the value at site `j` depends only on
//! `(seed, j)`, never on the window size or the order of draws. A realization
//! is therefore a consistent restriction of one infinite-lattice realization,
//! which is what lets a sweep reuse "the same" draw at every resolution.

use crate::lattice::{CoefficientField, CoefficientStats};
use crate::scalar::Real;
use crate::seq::Window;
use crate::Error;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MASS_TAG: u64 = 0x6d61_7373;
const SPRING_TAG: u64 = 0x7370_7267;

/// Finalizer of the splitmix64 generator; full-avalanche 64-bit mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a tagged stream (per-trial, per-field, ...).
#[inline]
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_mul(GOLDEN) ^ 0xD1B5_4A32_D192_ED03))
}

/// Stateless draw: uniform in `[0, 1)`, indexed by `(seed, counter)`.
/// Walking `counter` sequentially reproduces the splitmix64 stream.
#[inline]
pub fn unit_f64(seed: u64, counter: u64) -> f64 {
    let bits = mix64(seed.wrapping_add(counter.wrapping_mul(GOLDEN)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Supported coefficient laws. Field names double as the config-file schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform { a: f64, b: f64 },
    TwoPoint { v1: f64, v2: f64, p1: f64 },
    Constant { value: f64 },
}

impl DistributionKind {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            DistributionKind::Uniform { a, b } => {
                if !(a > 0.0 && b > a) {
                    return Err(Error::NonPositiveSupport(format!(
                        "uniform law needs 0 < a < b, got a={a}, b={b}"
                    )));
                }
            }
            DistributionKind::TwoPoint { v1, v2, p1 } => {
                if !(v1 > 0.0 && v2 > 0.0) {
                    return Err(Error::NonPositiveSupport(format!(
                        "two-point values must be positive, got {v1}, {v2}"
                    )));
                }
                if !(0.0..=1.0).contains(&p1) {
                    return Err(Error::InvalidDistribution(format!(
                        "two-point probability must lie in [0,1], got {p1}"
                    )));
                }
            }
            DistributionKind::Constant { value } => {
                if !(value > 0.0) {
                    return Err(Error::NonPositiveSupport(format!(
                        "constant coefficient must be positive, got {value}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Inverse CDF; consumes exactly one unit draw per sample.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            DistributionKind::Uniform { a, b } => a + (b - a) * u,
            DistributionKind::TwoPoint { v1, v2, p1 } => {
                if u < p1 {
                    v1
                } else {
                    v2
                }
            }
            DistributionKind::Constant { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionKind::Uniform { a, b } => 0.5 * (a + b),
            DistributionKind::TwoPoint { v1, v2, p1 } => p1 * v1 + (1.0 - p1) * v2,
            DistributionKind::Constant { value } => value,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            DistributionKind::Uniform { a, b } => (b - a) / 12f64.sqrt(),
            DistributionKind::TwoPoint { v1, v2, p1 } => {
                (v2 - v1).abs() * (p1 * (1.0 - p1)).sqrt()
            }
            DistributionKind::Constant { .. } => 0.0,
        }
    }

    pub fn mean_reciprocal(&self) -> f64 {
        match *self {
            DistributionKind::Uniform { a, b } => (b / a).ln() / (b - a),
            DistributionKind::TwoPoint { v1, v2, p1 } => p1 / v1 + (1.0 - p1) / v2,
            DistributionKind::Constant { value } => 1.0 / value,
        }
    }

    pub fn sd_reciprocal(&self) -> f64 {
        match *self {
            DistributionKind::Uniform { a, b } => {
                let mean = self.mean_reciprocal();
                (1.0 / (a * b) - mean * mean).max(0.0).sqrt()
            }
            DistributionKind::TwoPoint { v1, v2, p1 } => {
                let mean = self.mean_reciprocal();
                let second = p1 / (v1 * v1) + (1.0 - p1) / (v2 * v2);
                (second - mean * mean).max(0.0).sqrt()
            }
            DistributionKind::Constant { .. } => 0.0,
        }
    }

    /// Support interval `[min, max]` of the law itself.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            DistributionKind::Uniform { a, b } => (a, b),
            DistributionKind::TwoPoint { v1, v2, p1 } => {
                // A degenerate probability collapses the support.
                if p1 >= 1.0 {
                    (v1, v1)
                } else if p1 <= 0.0 {
                    (v2, v2)
                } else {
                    (v1.min(v2), v1.max(v2))
                }
            }
            DistributionKind::Constant { value } => (value, value),
        }
    }
}

/// A coefficient law plus the seed of its sampling stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub kind: DistributionKind,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// Spec with the stream re-seeded for an independent trial. Trials are
    /// order-independent: each derives its stream from `(seed, trial)` alone.
    pub fn for_trial(&self, trial: u64) -> Self {
        Self {
            kind: self.kind,
            seed: derive_seed(self.seed, trial),
        }
    }
}

/// Draw masses and springs on `[-radius, radius]`.
///
/// The stored statistics are the exact values of the laws (not empirical
/// window statistics): mean mass, harmonic spring average `1/E[1/k]`, the
/// mass deviation, and the reciprocal-spring deviation.
pub fn sample_iid<T: Real>(
    spec_m: &DistributionSpec,
    spec_k: &DistributionSpec,
    radius: i64,
) -> Result<CoefficientField<T>, Error> {
    spec_m.kind.validate()?;
    spec_k.kind.validate()?;
    let window = Window::new(radius);
    let seed_m = derive_seed(spec_m.seed, MASS_TAG);
    let seed_k = derive_seed(spec_k.seed, SPRING_TAG);
    let m: Vec<T> = window
        .iter()
        .map(|j| T::from_f64(spec_m.kind.quantile(unit_f64(seed_m, j as u64))))
        .collect();
    let k: Vec<T> = window
        .iter()
        .map(|j| T::from_f64(spec_k.kind.quantile(unit_f64(seed_k, j as u64))))
        .collect();
    let (a_m, b_m) = spec_m.kind.bounds();
    let (a_k, b_k) = spec_k.kind.bounds();
    let stats = CoefficientStats {
        mbar: T::from_f64(spec_m.kind.mean()),
        ktilde: T::from_f64(1.0 / spec_k.kind.mean_reciprocal()),
        sigma_m: T::from_f64(spec_m.kind.sd()),
        sigma_k: T::from_f64(spec_k.kind.sd_reciprocal()),
        a_m: T::from_f64(a_m),
        b_m: T::from_f64(b_m),
        a_k: T::from_f64(a_k),
        b_k: T::from_f64(b_k),
    };
    CoefficientField::new(window, m, k, stats)
}

fn deterministic_stats<T: Real>(m: &[T], k: &[T], mbar: T, ktilde: T) -> CoefficientStats<T> {
    let n = T::from_f64(m.len() as f64);
    let var_m = m.iter().map(|&v| (v - mbar) * (v - mbar)).fold(T::zero(), |a, b| a + b) / n;
    let nk = T::from_f64(k.len() as f64);
    let mean_rk = k.iter().map(|&v| v.recip()).fold(T::zero(), |a, b| a + b) / nk;
    let var_rk = k
        .iter()
        .map(|&v| (v.recip() - mean_rk) * (v.recip() - mean_rk))
        .fold(T::zero(), |a, b| a + b)
        / nk;
    let fold_min = |s: &[T]| s.iter().copied().fold(s[0], T::min);
    let fold_max = |s: &[T]| s.iter().copied().fold(s[0], T::max);
    CoefficientStats {
        mbar,
        ktilde,
        sigma_m: var_m.sqrt(),
        sigma_k: var_rk.sqrt(),
        a_m: fold_min(m),
        b_m: fold_max(m),
        a_k: fold_min(k),
        b_k: fold_max(k),
    }
}

/// Periodic mass pattern `m(j) = values[j mod len]` (Euclidean modulus, so
/// the pattern truly tiles the whole lattice); springs are constant one.
pub fn pattern_periodic<T: Real>(values: &[f64], radius: i64) -> Result<CoefficientField<T>, Error> {
    pattern_periodic_with_springs(values, &[1.0], radius)
}

/// Periodic masses and springs with independent period vectors.
pub fn pattern_periodic_with_springs<T: Real>(
    values_m: &[f64],
    values_k: &[f64],
    radius: i64,
) -> Result<CoefficientField<T>, Error> {
    for (name, vals) in [("mass", values_m), ("spring", values_k)] {
        if vals.is_empty() {
            return Err(Error::EmptyInput("periodic pattern values"));
        }
        if vals.iter().any(|&v| v <= 0.0) {
            return Err(Error::NonPositiveSupport(format!(
                "{name} pattern values must be positive"
            )));
        }
    }
    let window = Window::new(radius);
    let at = |vals: &[f64], j: i64| vals[j.rem_euclid(vals.len() as i64) as usize];
    let m: Vec<T> = window.iter().map(|j| T::from_f64(at(values_m, j))).collect();
    let k: Vec<T> = window.iter().map(|j| T::from_f64(at(values_k, j))).collect();
    let mbar = T::from_f64(values_m.iter().sum::<f64>() / values_m.len() as f64);
    let mean_recip_k = values_k.iter().map(|&v| 1.0 / v).sum::<f64>() / values_k.len() as f64;
    let period_m: Vec<T> = values_m.iter().map(|&v| T::from_f64(v)).collect();
    let period_k: Vec<T> = values_k.iter().map(|&v| T::from_f64(v)).collect();
    let stats = deterministic_stats(&period_m, &period_k, mbar, T::from_f64(1.0 / mean_recip_k));
    CoefficientField::new(window, m, k, stats)
}

/// Mass pattern with linearly growing run lengths,
/// `m1, m2, m1, m1, m2, m2, m1, m1, m1, ...` (runs of length 1, 1, 2, 2,
/// 3, 3, ...), mirrored about `j = 0`; springs are constant one. Its
/// corrector walk drifts like `sqrt(j)` instead of staying bounded.
pub fn pattern_sqrt_growth<T: Real>(
    m1: f64,
    m2: f64,
    radius: i64,
) -> Result<CoefficientField<T>, Error> {
    if m1 <= 0.0 || m2 <= 0.0 {
        return Err(Error::NonPositiveSupport(
            "pattern masses must be positive".into(),
        ));
    }
    let window = Window::new(radius);
    let mut one_side: Vec<f64> = Vec::with_capacity(radius as usize + 1);
    let mut block = 0usize;
    'fill: loop {
        let len = block / 2 + 1;
        let value = if block % 2 == 0 { m1 } else { m2 };
        for _ in 0..len {
            one_side.push(value);
            if one_side.len() > radius as usize {
                break 'fill;
            }
        }
        block += 1;
    }
    let m: Vec<T> = window
        .iter()
        .map(|j| T::from_f64(one_side[j.unsigned_abs() as usize]))
        .collect();
    let k: Vec<T> = vec![T::one(); window.len()];
    // Runs of each mass occupy equal length asymptotically.
    let mbar = T::from_f64(0.5 * (m1 + m2));
    let stats = CoefficientStats {
        mbar,
        ktilde: T::one(),
        sigma_m: T::from_f64(0.5 * (m2 - m1).abs()),
        sigma_k: T::zero(),
        a_m: T::from_f64(m1.min(m2)),
        b_m: T::from_f64(m1.max(m2)),
        a_k: T::one(),
        b_k: T::one(),
    };
    CoefficientField::new(window, m, k, stats)
}

/// Corrector walks of a coefficient field.
///
/// `chi_k` solves the forward reconstruction
/// `chi_k(j+1) - chi_k(j) = ktilde / k(j) - 1` and `chi_m` the backward one
/// `chi_m(j) - chi_m(j-1) = m(j) / mbar - 1`, both anchored at
/// `chi(0) = 0`. One extra entry is kept on the side each walk's difference
/// direction exposes (`chi_k(J+1)`, `chi_m(-J-1)`), because the residual
/// expansion references them at the window edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorWalk<T> {
    window: Window,
    /// chi_k on -J ..= J+1
    chi_k: Vec<T>,
    /// chi_m on -J-1 ..= J
    chi_m: Vec<T>,
}

impl<T: Real> CorrectorWalk<T> {
    #[inline]
    pub fn window(&self) -> Window {
        self.window
    }

    /// `chi_k(j)` for `j` in `[-J, J+1]`.
    #[inline]
    pub fn chi_k(&self, j: i64) -> T {
        let r = self.window.radius();
        assert!(j >= -r && j <= r + 1, "chi_k index {j} outside [-{r}, {}]", r + 1);
        self.chi_k[(j + r) as usize]
    }

    /// `chi_m(j)` for `j` in `[-J-1, J]`.
    #[inline]
    pub fn chi_m(&self, j: i64) -> T {
        let r = self.window.radius();
        assert!(j >= -r - 1 && j <= r, "chi_m index {j} outside [-{}, {r}]", r + 1);
        self.chi_m[(j + r + 1) as usize]
    }

    /// One-sided view `[chi(0), chi(1), ..., chi(J)]` or
    /// `[chi(0), chi(-1), ..., chi(-J)]` for envelope diagnostics.
    pub fn chi_k_side(&self, negative: bool) -> Vec<T> {
        let r = self.window.radius();
        if negative {
            (0..=r).map(|j| self.chi_k(-j)).collect()
        } else {
            (0..=r).map(|j| self.chi_k(j)).collect()
        }
    }

    pub fn chi_m_side(&self, negative: bool) -> Vec<T> {
        let r = self.window.radius();
        if negative {
            (0..=r).map(|j| self.chi_m(-j)).collect()
        } else {
            (0..=r).map(|j| self.chi_m(j)).collect()
        }
    }

    /// `max_{1 <= |j| <= n} |chi_m(j)|`, used to measure growth exponents.
    pub fn chi_m_sup_up_to(&self, n: i64) -> T {
        let n = n.min(self.window.radius());
        let mut best = T::zero();
        for j in 1..=n {
            best = best.max(self.chi_m(j).abs()).max(self.chi_m(-j).abs());
        }
        best
    }

    /// Largest ratio `(|chi_k(j)| + |chi_m(j)|) / sqrt(|j| loglog(|j| + e))`
    /// over the window; the finite-sample stand-in for the envelope constant.
    pub fn envelope_constant(&self) -> T {
        let r = self.window.radius();
        let mut best = T::zero();
        for j in 1..=r {
            for s in [j, -j] {
                let num = self.chi_k(s).abs() + self.chi_m(s).abs();
                best = best.max(num / envelope_sqrt(T::from_f64(j as f64)));
            }
        }
        best
    }
}

/// `sqrt(x loglog(x + e))`, the envelope scale.
#[inline]
pub fn envelope_sqrt<T: Real>(x: T) -> T {
    (x * (x + T::E()).ln().ln()).sqrt()
}

/// Build both corrector walks of a field by prefix summation.
pub fn corrector_walks<T: Real>(coeffs: &CoefficientField<T>) -> CorrectorWalk<T> {
    let window = coeffs.window();
    let r = window.radius();
    let stats = *coeffs.stats();
    let g = |j: i64| stats.ktilde / coeffs.k(j) - T::one();
    let h = |j: i64| coeffs.m(j) / stats.mbar - T::one();

    // chi_k on [-r, r+1]
    let mut chi_k = vec![T::zero(); (2 * r + 2) as usize];
    let idx_k = |j: i64| (j + r) as usize;
    for j in 0..=r {
        chi_k[idx_k(j + 1)] = chi_k[idx_k(j)] + g(j);
    }
    for j in (-r + 1..=0).rev() {
        chi_k[idx_k(j - 1)] = chi_k[idx_k(j)] - g(j - 1);
    }

    // chi_m on [-r-1, r]
    let mut chi_m = vec![T::zero(); (2 * r + 2) as usize];
    let idx_m = |j: i64| (j + r + 1) as usize;
    for j in 1..=r {
        chi_m[idx_m(j)] = chi_m[idx_m(j - 1)] + h(j);
    }
    for j in (-r..=0).rev() {
        chi_m[idx_m(j - 1)] = chi_m[idx_m(j)] - h(j);
    }

    CorrectorWalk { window, chi_k, chi_m }
}

/// Envelope diagnostics of a one-sided walk `walk[i] = chi(i)`.
#[derive(Debug, Clone, Serialize)]
pub struct LilEnvelopeReport {
    /// `max_i |chi(i)| / sqrt(i loglog(i + e))`
    pub c_omega: f64,
    /// how often `|chi(i)|` leaves the band `2 sigma sqrt(2 i loglog i)`
    /// (counted for `i >= 3`, where the band is defined)
    pub exceed_count_2sigma: usize,
    pub sites_checked: usize,
    /// `(i, |chi(i)| / sqrt(i loglog(i + e)))` at dyadic `i`
    pub ratio_curve: Vec<(u64, f64)>,
}

pub fn lil_envelope_stats<T: Real>(walk: &[T], sigma: T) -> LilEnvelopeReport {
    assert!(walk.len() >= 100, "envelope statistics need at least 100 sites");
    let mut c_omega = 0.0f64;
    let mut exceed = 0usize;
    let mut checked = 0usize;
    let two_sigma = (sigma + sigma).as_f64();
    for (i, &v) in walk.iter().enumerate().skip(1) {
        let x = i as f64;
        let ratio = v.abs().as_f64() / envelope_sqrt(x);
        c_omega = c_omega.max(ratio);
        if i >= 3 {
            checked += 1;
            let band = two_sigma * (2.0 * x * x.ln().ln()).sqrt();
            if v.abs().as_f64() > band {
                exceed += 1;
            }
        }
    }
    let mut ratio_curve = Vec::new();
    let mut i = 1usize;
    while i < walk.len() {
        ratio_curve.push((i as u64, walk[i].abs().as_f64() / envelope_sqrt(i as f64)));
        i *= 2;
    }
    LilEnvelopeReport {
        c_omega,
        exceed_count_2sigma: exceed,
        sites_checked: checked,
        ratio_curve,
    }
}

/// Mean-zero walk increments addressed by `(trial, step)`; used by the
/// martingale verification.
#[derive(Debug, Clone, Copy)]
pub struct IncrementSampler {
    seed: u64,
    kind: IncrementKind,
}

#[derive(Debug, Clone, Copy)]
enum IncrementKind {
    /// `ktilde / k - 1` with `k` drawn from the law
    ChiK(DistributionKind),
    /// `m / mbar - 1` with `m` drawn from the law
    ChiM(DistributionKind),
    /// symmetric +-1 steps
    Rademacher,
}

impl IncrementSampler {
    pub fn chi_k(law: DistributionKind, seed: u64) -> Self {
        Self { seed, kind: IncrementKind::ChiK(law) }
    }

    pub fn chi_m(law: DistributionKind, seed: u64) -> Self {
        Self { seed, kind: IncrementKind::ChiM(law) }
    }

    pub fn rademacher(seed: u64) -> Self {
        Self { seed, kind: IncrementKind::Rademacher }
    }

    /// Exact standard deviation of one increment.
    pub fn step_sd(&self) -> f64 {
        match self.kind {
            IncrementKind::ChiK(law) => law.sd_reciprocal() / law.mean_reciprocal(),
            IncrementKind::ChiM(law) => law.sd() / law.mean(),
            IncrementKind::Rademacher => 1.0,
        }
    }

    #[inline]
    pub fn draw(&self, trial: u64, step: u64) -> f64 {
        let stream = derive_seed(self.seed, trial);
        let u = unit_f64(stream, step);
        match self.kind {
            IncrementKind::ChiK(law) => {
                let ktilde = 1.0 / law.mean_reciprocal();
                ktilde / law.quantile(u) - 1.0
            }
            IncrementKind::ChiM(law) => law.quantile(u) / law.mean() - 1.0,
            IncrementKind::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

/// Write a field as `j,m,k` rows (with header).
pub fn export_csv<T: Real>(coeffs: &CoefficientField<T>, out: &mut impl Write) -> Result<(), Error> {
    writeln!(out, "j,m,k")?;
    for j in coeffs.window().iter() {
        writeln!(out, "{},{},{}", j, coeffs.m(j).as_f64(), coeffs.k(j).as_f64())?;
    }
    Ok(())
}

/// Read a field from `j,m,k` rows. Sites must form a full symmetric window
/// `-J ..= J` in ascending order. The law behind an imported field is
/// unknown, so the stored statistics are the empirical window statistics
/// (window means and deviations, observed bounds).
pub fn import_csv<T: Real>(input: impl BufRead) -> Result<CoefficientField<T>, Error> {
    let mut sites: Vec<i64> = Vec::new();
    let mut m: Vec<T> = Vec::new();
    let mut k: Vec<T> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 0 && trimmed.starts_with('j')) {
            continue;
        }
        let mut parts = trimmed.split(',');
        let parse = |field: Option<&str>, what: &str| -> Result<f64, Error> {
            field
                .map(str::trim)
                .ok_or_else(|| Error::CsvParse {
                    line: lineno + 1,
                    message: format!("missing {what}"),
                })?
                .parse::<f64>()
                .map_err(|e| Error::CsvParse {
                    line: lineno + 1,
                    message: format!("bad {what}: {e}"),
                })
        };
        let j = parse(parts.next(), "site")? as i64;
        let mv = parse(parts.next(), "mass")?;
        let kv = parse(parts.next(), "spring")?;
        if mv <= 0.0 || kv <= 0.0 {
            return Err(Error::NonPositiveSupport(format!(
                "row {}: coefficients must be positive",
                lineno + 1
            )));
        }
        sites.push(j);
        m.push(T::from_f64(mv));
        k.push(T::from_f64(kv));
    }
    if sites.is_empty() {
        return Err(Error::EmptyInput("coefficient csv"));
    }
    let radius = *sites.last().unwrap();
    let window = Window::new(radius.max(0));
    let expected: Vec<i64> = window.iter().collect();
    if sites != expected {
        return Err(Error::InvalidArgument(
            "coefficient csv must list sites -J..=J in ascending order".into(),
        ));
    }
    let n = T::from_f64(m.len() as f64);
    let mbar = m.iter().copied().fold(T::zero(), |a, b| a + b) / n;
    let mean_rk = k.iter().map(|&v| v.recip()).fold(T::zero(), |a, b| a + b) / n;
    let stats = deterministic_stats(&m, &k, mbar, mean_rk.recip());
    CoefficientField::new(window, m, k, stats)
}
