//! Flat-file persistence for experiment records.
//!
//! `records.csv` holds one record per row under a fixed header. Floats are
//! written with Rust's shortest-roundtrip formatting, so parsing a file back
//! reproduces every value bit for bit; `duration_ms` (wall-clock, last
//! column) is the only field that varies between otherwise identical runs.

use lattice_homog_core::analysis::ErrorReport;
use lattice_homog_core::experiments::{Experiment, ExperimentRecord, TrialFailure};
use std::io::{BufRead, Write};

pub const HEADER: &str = "experiment,epsilon,trial,seed,sigma_m,T0,sup_abs_error_r,sup_abs_error_p,rho,gamma_eps,C_omega_estimate,times_sampled,initial_error_norm,sup_error_norm,gronwall_bound,gronwall_pass,window_radius,dt,duration_ms";

pub fn write_header(w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")
}

pub fn write_record(w: &mut impl Write, rec: &ExperimentRecord) -> std::io::Result<()> {
    let r = &rec.report;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        rec.experiment.name(),
        rec.epsilon,
        rec.trial,
        rec.seed,
        rec.sigma_m,
        r.t0,
        r.sup_abs_error_r,
        r.sup_abs_error_p,
        r.rho,
        r.gamma_eps,
        r.c_omega_estimate,
        r.times_sampled,
        r.initial_error_norm,
        r.sup_error_norm,
        r.gronwall_bound,
        r.gronwall_pass,
        rec.window_radius,
        rec.dt,
        rec.duration_ms,
    )
}

fn field<'a>(cols: &'a [&str], idx: usize, line: usize) -> Result<&'a str, String> {
    cols.get(idx)
        .copied()
        .ok_or_else(|| format!("records.csv line {line}: missing column {idx}"))
}

fn num<T: std::str::FromStr>(cols: &[&str], idx: usize, line: usize) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let raw = field(cols, idx, line)?;
    raw.parse()
        .map_err(|e| format!("records.csv line {line}, column {idx}: '{raw}': {e}"))
}

pub fn parse_records(reader: impl BufRead) -> Result<Vec<ExperimentRecord>, String> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(first))) if first.trim_end() == HEADER => {}
        Some((_, Ok(first))) => {
            return Err(format!(
                "records.csv has an unexpected header (found '{}')",
                first.trim_end()
            ))
        }
        Some((_, Err(e))) => return Err(format!("records.csv: {e}")),
        None => return Err("records.csv is empty".into()),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| format!("records.csv line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 19 {
            return Err(format!("records.csv line {n}: expected 19 columns, found {}", cols.len()));
        }
        let experiment: Experiment = field(&cols, 0, n)?
            .parse()
            .map_err(|e| format!("records.csv line {n}: {e}"))?;
        let epsilon: f64 = num(&cols, 1, n)?;
        let report = ErrorReport {
            sup_abs_error_r: num(&cols, 6, n)?,
            sup_abs_error_p: num(&cols, 7, n)?,
            rho: num(&cols, 8, n)?,
            gamma_eps: num(&cols, 9, n)?,
            c_omega_estimate: num(&cols, 10, n)?,
            epsilon,
            t0: num(&cols, 5, n)?,
            times_sampled: num(&cols, 11, n)?,
            initial_error_norm: num(&cols, 12, n)?,
            sup_error_norm: num(&cols, 13, n)?,
            gronwall_bound: num(&cols, 14, n)?,
            gronwall_pass: num(&cols, 15, n)?,
        };
        out.push(ExperimentRecord {
            experiment,
            epsilon,
            trial: num(&cols, 2, n)?,
            seed: num(&cols, 3, n)?,
            sigma_m: num(&cols, 4, n)?,
            report,
            window_radius: num(&cols, 16, n)?,
            dt: num(&cols, 17, n)?,
            duration_ms: num(&cols, 18, n)?,
        });
    }
    Ok(out)
}

/// Escape a free-text CSV field (used only by failures.csv).
pub fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_failures(w: &mut impl Write, failures: &[TrialFailure]) -> std::io::Result<()> {
    writeln!(w, "experiment,epsilon,trial,message")?;
    for f in failures {
        writeln!(w, "{},{},{},{}", f.experiment.name(), f.epsilon, f.trial, csv_quote(&f.message))?;
    }
    Ok(())
}
