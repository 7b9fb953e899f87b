//! Self-contained SVG plots: log-log scatter with fitted slope lines and
//! grouped box plots. No external renderer; every file embeds the config
//! hash so a figure can always be traced back to the run that produced it.

use crate::summary::{loglog_envelope, per_epsilon_groups, per_sigma_groups, quartiles, Quartiles};
use lattice_homog_core::analysis::slope_fit;
use lattice_homog_core::experiments::{Experiment, ExperimentRecord, FIG5_BASELINE_ABS_ERROR};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const W: f64 = 760.0;
const H: f64 = 520.0;
const ML: f64 = 78.0; // margins: left, right, top, bottom
const MR: f64 = 28.0;
const MT: f64 = 54.0;
const MB: f64 = 64.0;

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str, config_hash: &str) -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            "<svg xmlns='http://www.w3.org/2000/svg' width='{W}' height='{H}' viewBox='0 0 {W} {H}'>\n\
             <desc>config_hash={config_hash}</desc>\n\
             <rect width='{W}' height='{H}' fill='white'/>\n\
             <text x='{}' y='26' font-family='sans-serif' font-size='17' text-anchor='middle'>{}</text>\n\
             <text x='{}' y='{}' font-family='monospace' font-size='10' fill='#888' text-anchor='end'>config {config_hash}</text>\n",
            W / 2.0,
            xml_escape(title),
            W - 8.0,
            H - 8.0,
        );
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dash: &str) {
        let dash_attr =
            if dash.is_empty() { String::new() } else { format!(" stroke-dasharray='{dash}'") };
        let _ = write!(
            self.body,
            "<line x1='{x1:.2}' y1='{y1:.2}' x2='{x2:.2}' y2='{y2:.2}' stroke='{stroke}' stroke-width='{width}'{dash_attr}/>\n"
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str, opacity: f64) {
        let _ = write!(
            self.body,
            "<circle cx='{x:.2}' cy='{y:.2}' r='{r}' fill='{fill}' fill-opacity='{opacity}'/>\n"
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = write!(
            self.body,
            "<rect x='{x:.2}' y='{y:.2}' width='{w:.2}' height='{h:.2}' fill='{fill}' stroke='{stroke}'/>\n"
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str, extra: &str) {
        let _ = write!(
            self.body,
            "<text x='{x:.2}' y='{y:.2}' font-family='sans-serif' font-size='{size}' text-anchor='{anchor}'{extra}>{}</text>\n",
            xml_escape(content)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Decimal-decade tick positions covering [lo, hi] in log10 space.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let start = lo.log10().floor() as i32;
    let end = hi.log10().ceil() as i32;
    for d in start..=end {
        for m in [1.0, 2.0, 5.0] {
            let v = m * 10f64.powi(d);
            if v >= lo * 0.999 && v <= hi * 1.001 {
                ticks.push(v);
            }
        }
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v >= 0.01 && v < 10000.0 {
        let s = format!("{v}");
        if s.len() <= 7 {
            return s;
        }
    }
    format!("{v:.0e}")
}

struct LogMap {
    lo: f64,
    hi: f64,
    p0: f64,
    p1: f64,
}

impl LogMap {
    fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        assert!(lo > 0.0 && hi > lo);
        LogMap { lo, hi, p0, p1 }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln());
        self.p0 + t * (self.p1 - self.p0)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() && v > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        return (0.1, 1.0);
    }
    if lo == hi {
        return (lo * 0.5, hi * 2.0);
    }
    (lo / 1.3, hi * 1.3)
}

fn draw_frame(svg: &mut Svg, x_label: &str, y_label: &str) {
    svg.line(ML, H - MB, W - MR, H - MB, "#333", 1.2, "");
    svg.line(ML, MT, ML, H - MB, "#333", 1.2, "");
    svg.text((ML + W - MR) / 2.0, H - 18.0, 13.0, "middle", x_label, "");
    let y_mid = (MT + H - MB) / 2.0;
    svg.text(
        20.0,
        y_mid,
        13.0,
        "middle",
        y_label,
        &format!(" transform='rotate(-90 20 {y_mid:.1})'"),
    );
}

fn draw_log_axes(svg: &mut Svg, xm: &LogMap, ym: &LogMap) {
    for t in log_ticks(xm.lo, xm.hi) {
        let x = xm.map(t);
        svg.line(x, H - MB, x, MT, "#ddd", 0.7, "");
        svg.line(x, H - MB, x, H - MB + 5.0, "#333", 1.0, "");
        svg.text(x, H - MB + 20.0, 11.0, "middle", &fmt_tick(t), "");
    }
    for t in log_ticks(ym.lo, ym.hi) {
        let y = ym.map(t);
        svg.line(ML, y, W - MR, y, "#ddd", 0.7, "");
        svg.line(ML - 5.0, y, ML, y, "#333", 1.0, "");
        svg.text(ML - 8.0, y + 4.0, 11.0, "end", &fmt_tick(t), "");
    }
}

/// Log-log scatter of per-record values with a median trace and a fitted
/// power line whose slope is printed in the legend.
fn scatter_plot(
    records: &[ExperimentRecord],
    value: impl Fn(&ExperimentRecord) -> f64,
    title: &str,
    y_label: &str,
    config_hash: &str,
) -> Option<String> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.epsilon, value(r)))
        .filter(|(x, y)| *x > 0.0 && y.is_finite() && *y > 0.0)
        .collect();
    if pts.is_empty() {
        return None;
    }
    let (xlo, xhi) = padded_range(pts.iter().map(|p| p.0));
    let (ylo, yhi) = padded_range(pts.iter().map(|p| p.1));
    let xm = LogMap::new(xlo, xhi, ML, W - MR);
    let ym = LogMap::new(ylo, yhi, H - MB, MT);

    let mut svg = Svg::new(title, config_hash);
    draw_log_axes(&mut svg, &xm, &ym);
    draw_frame(&mut svg, "epsilon", y_label);

    for &(x, y) in &pts {
        svg.circle(xm.map(x), ym.map(y), 3.0, "#2166ac", 0.55);
    }

    // per-epsilon medians, drawn in epsilon order
    let mut medians: Vec<(f64, f64)> = Vec::new();
    let mut by_eps: Vec<(u64, Vec<f64>)> = Vec::new();
    for &(x, y) in &pts {
        match by_eps.iter_mut().find(|(b, _)| *b == x.to_bits()) {
            Some((_, v)) => v.push(y),
            None => by_eps.push((x.to_bits(), vec![y])),
        }
    }
    for (bits, ys) in by_eps {
        medians.push((f64::from_bits(bits), quartiles(&ys).unwrap().median));
    }
    medians.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in medians.windows(2) {
        svg.line(
            xm.map(pair[0].0),
            ym.map(pair[0].1),
            xm.map(pair[1].0),
            ym.map(pair[1].1),
            "#b2182b",
            1.6,
            "",
        );
    }
    for &(x, y) in &medians {
        svg.circle(xm.map(x), ym.map(y), 4.0, "#b2182b", 0.9);
    }

    let xs: Vec<f64> = medians.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = medians.iter().map(|p| p.1).collect();
    if let Ok(fit) = slope_fit(&xs, &ys) {
        let y_at = |x: f64| (fit.intercept + fit.slope * x.ln()).exp();
        svg.line(
            xm.map(xlo),
            ym.map(y_at(xlo).clamp(ylo, yhi)),
            xm.map(xhi),
            ym.map(y_at(xhi).clamp(ylo, yhi)),
            "#333",
            1.2,
            "6 4",
        );
        svg.text(
            ML + 12.0,
            MT + 18.0,
            12.5,
            "start",
            &format!("fitted slope {:.3} (r^2 {:.4})", fit.slope, fit.r_squared),
            "",
        );
    }
    Some(svg.finish())
}

/// Grouped box plot (quartile boxes, median bar, min/max whiskers) on a
/// log or linear y axis, with an optional horizontal reference line.
fn box_plot(
    groups: &[(String, Quartiles)],
    title: &str,
    x_label: &str,
    y_label: &str,
    log_y: bool,
    reference: Option<(f64, &str)>,
    config_hash: &str,
) -> Option<String> {
    if groups.is_empty() {
        return None;
    }
    let mut vals: Vec<f64> = groups.iter().flat_map(|(_, q)| [q.min, q.max]).collect();
    if let Some((r, _)) = reference {
        vals.push(r);
    }
    let (ylo, yhi) = padded_range(vals.into_iter());
    let ymap: Box<dyn Fn(f64) -> f64> = if log_y {
        let m = LogMap::new(ylo, yhi, H - MB, MT);
        Box::new(move |v| m.map(v))
    } else {
        let lo = if ylo > 0.0 { 0.0 } else { ylo };
        Box::new(move |v| H - MB - (v - lo) / (yhi - lo) * (H - MB - MT))
    };

    let mut svg = Svg::new(title, config_hash);
    // y ticks
    if log_y {
        let m = LogMap::new(ylo, yhi, H - MB, MT);
        for t in log_ticks(ylo, yhi) {
            let y = m.map(t);
            svg.line(ML, y, W - MR, y, "#ddd", 0.7, "");
            svg.text(ML - 8.0, y + 4.0, 11.0, "end", &fmt_tick(t), "");
        }
    } else {
        let lo = if ylo > 0.0 { 0.0 } else { ylo };
        let step = ((yhi - lo) / 6.0).max(f64::MIN_POSITIVE);
        let mag = 10f64.powf(step.log10().floor());
        let step = (step / mag).ceil() * mag;
        let mut t = (lo / step).ceil() * step;
        while t <= yhi {
            let y = ymap(t);
            svg.line(ML, y, W - MR, y, "#ddd", 0.7, "");
            svg.text(ML - 8.0, y + 4.0, 11.0, "end", &format!("{t:.3}"), "");
            t += step;
        }
    }
    draw_frame(&mut svg, x_label, y_label);

    let slot = (W - ML - MR) / groups.len() as f64;
    let box_w = (slot * 0.42).min(48.0);
    for (i, (label, q)) in groups.iter().enumerate() {
        let cx = ML + slot * (i as f64 + 0.5);
        svg.line(cx, ymap(q.min), cx, ymap(q.q1), "#333", 1.0, "");
        svg.line(cx, ymap(q.q3), cx, ymap(q.max), "#333", 1.0, "");
        for v in [q.min, q.max] {
            svg.line(cx - box_w * 0.25, ymap(v), cx + box_w * 0.25, ymap(v), "#333", 1.0, "");
        }
        svg.rect(
            cx - box_w / 2.0,
            ymap(q.q3),
            box_w,
            (ymap(q.q1) - ymap(q.q3)).max(0.5),
            "#d1e5f0",
            "#2166ac",
        );
        svg.line(cx - box_w / 2.0, ymap(q.median), cx + box_w / 2.0, ymap(q.median), "#b2182b", 2.0, "");
        svg.text(cx, H - MB + 20.0, 11.0, "middle", label, "");
    }

    if let Some((val, label)) = reference {
        let y = ymap(val);
        svg.line(ML, y, W - MR, y, "#4d9221", 1.4, "8 5");
        svg.text(W - MR - 6.0, y - 6.0, 11.5, "end", label, " fill='#4d9221'");
    }
    Some(svg.finish())
}

fn write_plot(dir: &Path, name: &str, content: Option<String>, out: &mut Vec<PathBuf>) -> Result<(), String> {
    if let Some(svg) = content {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| format!("writing {}: {e}", path.display()))?;
        out.push(path);
    }
    Ok(())
}

/// Render the plot set for a batch of records into `dir`, returning the
/// files written. Errors on an empty batch; never writes partial files.
pub fn emit_plots(
    records: &[ExperimentRecord],
    config_hash: &str,
    dir: &Path,
) -> Result<Vec<PathBuf>, String> {
    if records.is_empty() {
        return Err("no records to plot".into());
    }
    let experiment = records[0].experiment;
    let name = experiment.name();
    let mut written = Vec::new();

    if experiment == Experiment::Fig5SigmaSweep {
        let groups: Vec<(String, Quartiles)> = per_sigma_groups(records)
            .into_iter()
            .map(|g| (format!("{:.4}", g.sigma_m), g.sup_abs_error_r))
            .collect();
        let plot = box_plot(
            &groups,
            &format!("{name}: absolute error vs mass disorder"),
            "sigma_m",
            "sup-t l2 error of r",
            false,
            Some((FIG5_BASELINE_ABS_ERROR, "constant-coefficient baseline")),
            config_hash,
        );
        write_plot(dir, "abs_error_boxplots.svg", plot, &mut written)?;
        return Ok(written);
    }

    write_plot(
        dir,
        "rho_vs_epsilon.svg",
        scatter_plot(
            records,
            |r| r.report.rho,
            &format!("{name}: relative error vs epsilon"),
            "rho",
            config_hash,
        ),
        &mut written,
    )?;
    write_plot(
        dir,
        "rho_normalized_vs_epsilon.svg",
        scatter_plot(
            records,
            |r| r.report.rho / loglog_envelope(r.epsilon),
            &format!("{name}: normalized relative error vs epsilon"),
            "rho / sqrt(loglog(1/epsilon))",
            config_hash,
        ),
        &mut written,
    )?;
    write_plot(
        dir,
        "residual_vs_epsilon.svg",
        scatter_plot(
            records,
            |r| r.report.gamma_eps,
            &format!("{name}: residual norm vs epsilon"),
            "sup-t l2 residual",
            config_hash,
        ),
        &mut written,
    )?;

    let eps_groups = per_epsilon_groups(records);
    if eps_groups.iter().any(|g| g.count >= 5) {
        let mut groups: Vec<(f64, Quartiles)> =
            eps_groups.iter().map(|g| (g.epsilon, g.rho)).collect();
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        let labeled: Vec<(String, Quartiles)> =
            groups.into_iter().map(|(e, q)| (format!("{e:.4}"), q)).collect();
        let plot = box_plot(
            &labeled,
            &format!("{name}: relative error distribution per epsilon"),
            "epsilon",
            "rho",
            true,
            None,
            config_hash,
        );
        write_plot(dir, "rho_boxplots.svg", plot, &mut written)?;
    }

    Ok(written)
}
