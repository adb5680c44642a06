//! Machine-readable report emission: one CSV per experiment plus a JSON
//! summary. Floats are written with 17 significant digits so every value
//! round-trips losslessly; wall-clock metadata stays out of the CSVs so
//! reruns with the same seed are byte-identical.

use std::io::Write;

use crate::error::Error;
use crate::harness::BoundReport;
use crate::numeric::Real;
use crate::width::WidthProfileRow;

/// Lossless decimal rendering of an f64 (17 significant digits).
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn opt_u32(x: Option<u32>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const REPORT_CSV_HEADER: &str = "experiment,family,name,r_max,n,gamma,width,n0,k0,mean,se,bound_lower,bound_upper,bound_info,slack,violated,vacuous,hits,censored,replications";

/// Render a [`BoundReport`] as CSV.
pub fn report_to_csv(report: &BoundReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let fields = [
            report.experiment.to_string(),
            report.family.clone(),
            row.name.to_string(),
            opt_f64(row.r_max),
            opt_u32(row.n),
            opt_f64(row.gamma),
            opt_f64(row.width),
            opt_f64(row.n0),
            opt_f64(row.k0),
            format_f64(row.mean),
            format_f64(row.se),
            opt_f64(row.bound_lower),
            opt_f64(row.bound_upper),
            opt_f64(row.bound_info),
            format_f64(row.slack),
            row.violated.to_string(),
            row.vacuous.to_string(),
            opt_u64(row.hits),
            opt_u64(row.censored),
            report.replications.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_report_csv<W: Write>(report: &BoundReport, writer: &mut W) -> Result<(), Error> {
    writer.write_all(report_to_csv(report).as_bytes())?;
    Ok(())
}

/// Render a width profile as CSV with columns `gamma,width,f,g,h`.
pub fn width_profile_to_csv<T: Real>(rows: &[WidthProfileRow<T>]) -> String {
    let mut out = String::from("gamma,width,f,g,h\n");
    for row in rows {
        let vals = [row.gamma, row.width, row.f, row.g, row.h];
        let rendered: Vec<String> = vals
            .iter()
            .map(|v| format_f64(v.to_f64().unwrap_or(f64::NAN)))
            .collect();
        out.push_str(&rendered.join(","));
        out.push('\n');
    }
    out
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// JSON summary across experiments: config echo, seed, per-experiment
/// violation flags and wall-clock metadata.
pub fn json_summary(reports: &[&BoundReport], config_echo: &[(String, String)]) -> String {
    let mut out = String::from("{\n");
    if let Some(first) = reports.first() {
        out.push_str(&format!("  \"seed\": {},\n", first.seed));
        out.push_str(&format!("  \"alpha\": {},\n", format_f64(first.alpha)));
    }
    let total: usize = reports
        .iter()
        .map(|r| r.rows.iter().filter(|row| row.violated).count())
        .sum();
    out.push_str(&format!("  \"violations\": {total},\n"));
    out.push_str("  \"experiments\": [\n");
    for (i, r) in reports.iter().enumerate() {
        let violations = r.rows.iter().filter(|row| row.violated).count();
        out.push_str(&format!(
            "    {{\"experiment\": \"{}\", \"family\": \"{}\", \"rows\": {}, \"violations\": {}, \"degenerate_runs\": {}, \"wall_clock_secs\": {}}}{}\n",
            json_escape(r.experiment),
            json_escape(&r.family),
            r.rows.len(),
            violations,
            r.degenerate_runs,
            format_f64(r.wall_clock_secs),
            if i + 1 < reports.len() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"config\": {\n");
    for (i, (k, v)) in config_echo.iter().enumerate() {
        out.push_str(&format!(
            "    \"{}\": \"{}\"{}\n",
            json_escape(k),
            json_escape(v),
            if i + 1 < config_echo.len() { "," } else { "" }
        ));
    }
    out.push_str("  }\n}\n");
    out
}
