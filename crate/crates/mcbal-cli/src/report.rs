//! Report structures and rendering: an aligned text table on stdout and a
//! structured JSON document with full-precision values.
//!
//! Reports deliberately contain no timestamps or absolute paths so that
//! identical inputs produce byte-identical output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub name: String,
    pub role: String,
    pub rect: [u32; 4],
    pub benchmark: [f64; 3],
    pub mean_before: [f64; 3],
    pub mean_after: [f64; 3],
    /// In the report's `angle_unit`; `None` when undefined (non-positive
    /// mean component).
    pub angular_error: Option<f64>,
    pub delta_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectReport {
    pub command: &'static str,
    pub method: String,
    pub input: String,
    pub output: Option<String>,
    pub angle_unit: &'static str,
    pub matrix: [[f64; 3]; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_white: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dest_white: Option<[f64; 3]>,
    pub regions: Vec<RegionRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub name: String,
    pub role: String,
    pub rect: [u32; 4],
    pub benchmark: [f64; 3],
    pub mean: [f64; 3],
    pub angular_error: Option<f64>,
    pub delta_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub command: &'static str,
    pub input: String,
    pub angle_unit: &'static str,
    pub regions: Vec<EvalRow>,
}

/// Differences between corresponding corrected regions of the two images.
#[derive(Debug, Clone, Serialize)]
pub struct CrossRow {
    pub name: String,
    pub angular_error: Option<f64>,
    pub delta_e: f64,
    pub delta_h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub command: &'static str,
    pub angle_unit: &'static str,
    pub images: Vec<CorrectReport>,
    pub cross: Vec<CrossRow>,
}

pub fn angle_unit_name(degrees: bool) -> &'static str {
    if degrees {
        "degrees"
    } else {
        "radians"
    }
}

fn fmt_angular(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.9}"),
        None => "n/a".to_string(),
    }
}

fn print_matrix(out: &mut impl Write, label: &str, m: &[[f64; 3]; 3]) -> Result<()> {
    writeln!(out, "{label}:")?;
    for row in m {
        writeln!(out, "  [ {:>14.9} {:>14.9} {:>14.9} ]", row[0], row[1], row[2])?;
    }
    Ok(())
}

fn region_table(
    out: &mut impl Write,
    unit: &str,
    rows: &[(String, String, Option<f64>, f64)],
) -> Result<()> {
    let name_w = rows
        .iter()
        .map(|r| r.0.len())
        .chain(["region".len()])
        .max()
        .unwrap_or(6);
    let role_w = rows
        .iter()
        .map(|r| r.1.len())
        .chain(["role".len()])
        .max()
        .unwrap_or(4);
    let ang_head = format!("angular error ({unit})");
    writeln!(
        out,
        "{:<name_w$}  {:<role_w$}  {:>24}  {:>14}",
        "region", "role", ang_head, "delta_H"
    )?;
    writeln!(out, "{}", "-".repeat(name_w + role_w + 44))?;
    for (name, role, ang, dh) in rows {
        writeln!(
            out,
            "{name:<name_w$}  {role:<role_w$}  {:>24}  {dh:>14.9}",
            fmt_angular(*ang)
        )?;
    }
    Ok(())
}

pub fn print_correct(out: &mut impl Write, report: &CorrectReport) -> Result<()> {
    writeln!(out, "method: {}", report.method)?;
    writeln!(out, "input:  {}", report.input)?;
    if let Some(output) = &report.output {
        writeln!(out, "output: {output}")?;
    }
    print_matrix(out, "fitted matrix", &report.matrix)?;
    let rows: Vec<_> = report
        .regions
        .iter()
        .map(|r| (r.name.clone(), r.role.clone(), r.angular_error, r.delta_h))
        .collect();
    region_table(out, report.angle_unit, &rows)?;
    Ok(())
}

pub fn print_eval(out: &mut impl Write, report: &EvalReport) -> Result<()> {
    writeln!(out, "input: {}", report.input)?;
    let rows: Vec<_> = report
        .regions
        .iter()
        .map(|r| (r.name.clone(), r.role.clone(), r.angular_error, r.delta_h))
        .collect();
    region_table(out, report.angle_unit, &rows)?;
    Ok(())
}

pub fn print_pair(out: &mut impl Write, report: &PairReport) -> Result<()> {
    for (i, image) in report.images.iter().enumerate() {
        writeln!(out, "== image {} ==", i + 1)?;
        print_correct(out, image)?;
        writeln!(out)?;
    }
    writeln!(out, "== cross-image differences (corrected means) ==")?;
    let name_w = report
        .cross
        .iter()
        .map(|r| r.name.len())
        .chain(["region".len()])
        .max()
        .unwrap_or(6);
    let ang_head = format!("angular error ({})", report.angle_unit);
    writeln!(
        out,
        "{:<name_w$}  {:>24}  {:>14}  {:>14}",
        "region", ang_head, "delta_E", "delta_H"
    )?;
    writeln!(out, "{}", "-".repeat(name_w + 58))?;
    for row in &report.cross {
        writeln!(
            out,
            "{:<name_w$}  {:>24}  {:>14.9}  {:>14.9}",
            row.name,
            fmt_angular(row.angular_error),
            row.delta_e,
            row.delta_h
        )?;
    }
    Ok(())
}

/// Writes the JSON document (pretty, trailing newline) to `path`.
pub fn write_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).context("serializing report")?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing report {}", path.display()))?;
    Ok(())
}
