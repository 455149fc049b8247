use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use bach3_core::catalog::{ResidualReport, ScanRow, ScanSpec, SolutionSpec};
use bach3_core::warped::{fiber_scalar_spread, warped_curvature_check, WarpedProduct, WarpedSpec};
use bach3_core::{DiffConfig, HorizonRoot};
use clap::ValueEnum;
use serde::Serialize;

pub const SCHEMA: &str = "bach3-report/1";

/// CSV columns of `verify`, in output order.
pub const VERIFY_COLUMNS: [&str; 19] = [
    "x1",
    "x2",
    "x3",
    "hessian",
    "laplace",
    "div_e",
    "curl",
    "trace",
    "residual_max",
    "trace_chain",
    "cotton",
    "bach",
    "div_b",
    "div_b_crosscheck",
    "div2_b",
    "fc_minus_v",
    "q",
    "rho",
    "parallel_defect",
];

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize, Debug, Clone)]
pub struct Provenance {
    pub version: &'static str,
    pub diff: DiffConfig,
    pub grid: [usize; 3],
}

impl Provenance {
    pub fn new(diff: DiffConfig, grid: [usize; 3]) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION"),
            diff,
            grid,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'static str,
    provenance: Option<&'a Provenance>,
    #[serde(flatten)]
    body: T,
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(
    command: &'static str,
    provenance: Option<&Provenance>,
    body: T,
    path: Option<&Path>,
) -> anyhow::Result<()> {
    let mut out = sink(path)?;
    let envelope = Envelope {
        schema: SCHEMA,
        command,
        provenance,
        body,
    };
    serde_json::to_writer_pretty(&mut out, &envelope)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct ReportBody<'a> {
    report: &'a ResidualReport,
}

pub fn write_report(
    report: &ResidualReport,
    provenance: &Provenance,
    format: Format,
    path: Option<&Path>,
) -> anyhow::Result<()> {
    match format {
        Format::Json => emit_json("verify", Some(provenance), ReportBody { report }, path)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(path)?);
            w.write_record(VERIFY_COLUMNS)?;
            for r in &report.rows {
                w.write_record([
                    num(r.point[0]),
                    num(r.point[1]),
                    num(r.point[2]),
                    num(r.hessian),
                    num(r.laplace),
                    num(r.div_e),
                    num(r.curl),
                    num(r.trace),
                    num(r.residual_max),
                    num(r.trace_chain),
                    num(r.cotton),
                    num(r.bach),
                    opt(r.div_b),
                    opt(r.div_b_crosscheck),
                    opt(r.div2_b),
                    num(r.fc_minus_v),
                    opt(r.q),
                    opt(r.rho),
                    opt(r.parallel_defect),
                ])?;
            }
            w.flush()?;
        }
    }
    let s = &report.summary;
    eprintln!(
        "{} {}: {} points, residual_max {:e}, trace_max {:e}, cotton_max {:e}, fc_minus_v_max {:e}, q sign {:?}",
        if report.verdict.pass { "PASS" } else { "FAIL" },
        report.solution.kind,
        report.rows.len(),
        s.residual_max,
        s.trace_max,
        s.cotton_max,
        s.fc_minus_v_max,
        s.q_sign,
    );
    for f in &report.verdict.failures {
        eprintln!("  {f}");
    }
    Ok(())
}

#[derive(Serialize)]
struct RootsBody<'a> {
    m: f64,
    q: f64,
    lambda: f64,
    roots: &'a [HorizonRoot],
}

pub fn write_roots(m: f64, q: f64, lambda: f64, roots: &[HorizonRoot], format: Format) -> anyhow::Result<()> {
    match format {
        Format::Json => emit_json("roots", None, RootsBody { m, q, lambda, roots }, None),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["r", "multiplicity"])?;
            for root in roots {
                w.write_record([num(root.r), root.multiplicity.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ScanBody<'a> {
    solution: &'a SolutionSpec,
    scan: &'a ScanSpec,
    rows: &'a [ScanRow],
}

pub fn write_scan(
    solution: &SolutionSpec,
    scan: &ScanSpec,
    rows: &[ScanRow],
    provenance: &Provenance,
    format: Format,
    path: Option<&Path>,
) -> anyhow::Result<()> {
    match format {
        Format::Json => emit_json("scan", Some(provenance), ScanBody { solution, scan, rows }, path),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(path)?);
            w.write_record(["parameter", "value", "valid", "error"])?;
            for r in rows {
                w.write_record([
                    num(r.parameter),
                    opt(r.value),
                    r.valid.to_string(),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// One radial sample of a warped product.
#[derive(Serialize, Debug, Clone)]
pub struct WarpRow {
    pub r: f64,
    pub phi: f64,
    /// Largest Ricci defect over a 3×3 fibre grid.
    pub ricci_defect: Option<f64>,
    pub fiber_scalar: Option<f64>,
    pub fiber_scalar_spread: Option<f64>,
    pub mean_curvature: Option<f64>,
    pub mean_curvature_formula: Option<f64>,
    pub isotropy_defect: Option<f64>,
    pub error: Option<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct WarpReport {
    pub spec: WarpedSpec,
    pub ode_defect: f64,
    pub tolerance: f64,
    pub rows: Vec<WarpRow>,
    pub pass: bool,
}

fn warp_row(w: &WarpedProduct, r: f64) -> WarpRow {
    let mut row = WarpRow {
        r,
        phi: w.warping.value(r),
        ricci_defect: None,
        fiber_scalar: None,
        fiber_scalar_spread: None,
        mean_curvature: None,
        mean_curvature_formula: None,
        isotropy_defect: None,
        error: None,
    };
    let measured = (|| -> bach3_core::Result<()> {
        let mut ricci: f64 = 0.0;
        for p in w.fiber_grid(r, [3, 3]) {
            ricci = ricci.max(warped_curvature_check(w, &p)?.ricci_defect);
        }
        let mid = w.fiber_grid(r, [1, 1]).remove(0);
        let check = warped_curvature_check(w, &mid)?;
        row.ricci_defect = Some(ricci);
        row.fiber_scalar = Some(check.fiber_scalar);
        row.fiber_scalar_spread = Some(fiber_scalar_spread(w, r, [3, 3])?);
        row.mean_curvature = Some(check.level_set.mean_curvature);
        row.mean_curvature_formula = Some(check.mean_curvature_formula);
        row.isotropy_defect = Some(check.level_set.isotropy_defect);
        Ok(())
    })();
    if let Err(e) = measured {
        row.error = Some(e.to_string());
    }
    row
}

/// Samples `radial` interior radii and judges the Ricci defect and fibre
/// scalar spread against `tolerance`.
pub fn warp_report(w: &WarpedProduct, radial: usize, tolerance: f64) -> WarpReport {
    use rayon::prelude::*;
    let radii: Vec<f64> = w.metric.chart.grid([radial, 1, 1]).iter().map(|p| p.0[0]).collect();
    let rows: Vec<WarpRow> = radii.par_iter().map(|&r| warp_row(w, r)).collect();
    let measured: Vec<&WarpRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let pass = !measured.is_empty()
        && measured.iter().all(|r| {
            r.ricci_defect.is_some_and(|d| d <= tolerance) && r.fiber_scalar_spread.is_some_and(|d| d <= tolerance)
        });
    WarpReport {
        spec: w.spec.clone(),
        ode_defect: w.ode_defect(),
        tolerance,
        rows,
        pass,
    }
}

#[derive(Serialize)]
struct WarpBody<'a> {
    warp: &'a WarpReport,
}

pub fn write_warp(report: &WarpReport, provenance: &Provenance, format: Format, path: Option<&Path>) -> anyhow::Result<()> {
    match format {
        Format::Json => emit_json("warp", Some(provenance), WarpBody { warp: report }, path)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(path)?);
            w.write_record([
                "r",
                "phi",
                "ricci_defect",
                "fiber_scalar",
                "fiber_scalar_spread",
                "mean_curvature",
                "mean_curvature_formula",
                "isotropy_defect",
                "error",
            ])?;
            for r in &report.rows {
                w.write_record([
                    num(r.r),
                    num(r.phi),
                    opt(r.ricci_defect),
                    opt(r.fiber_scalar),
                    opt(r.fiber_scalar_spread),
                    opt(r.mean_curvature),
                    opt(r.mean_curvature_formula),
                    opt(r.isotropy_defect),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
    }
    eprintln!(
        "{} warp {}: ode defect {:e}, {} of {} radii measured",
        if report.pass { "PASS" } else { "FAIL" },
        report.spec.profile.family(),
        report.ode_defect,
        report.rows.iter().filter(|r| r.error.is_none()).count(),
        report.rows.len(),
    );
    Ok(())
}
