//! Exact electrostatic solutions with parameter validation, and one-call
//! verification of a solution over a sampling grid.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::cotton_ricci_contraction;
use crate::electrostatic::{fc_minus_v, ElectrostaticSystem, SystemJets};
use crate::error::{Error, Result};
use crate::geom::{Chart, DiffConfig, MetricChart, MetricField, Point, ScalarField, VectorField, POLE_MARGIN};
use crate::jet::Jet;
use crate::kv;
use crate::roots::{rnds_lapse_roots, HorizonRoot};

/// Fraction of `r_c − r_+` kept clear of each RNdS horizon when sampling.
pub const HORIZON_MARGIN: f64 = 1e-2;

/// Radial extent of the cold chart, in units of `1/β`.
pub const COLD_RADIAL_EXTENT: f64 = 5.0;

/// Radial extent of the ultracold chart, in units of `1/√Λ`.
pub const ULTRACOLD_RADIAL_EXTENT: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Nariai,
    Cold,
    Ultracold,
    Rnds,
}

impl SolutionKind {
    pub fn name(self) -> &'static str {
        match self {
            SolutionKind::Nariai => "nariai",
            SolutionKind::Cold => "cold",
            SolutionKind::Ultracold => "ultracold",
            SolutionKind::Rnds => "rnds",
        }
    }

    /// Grid used when the caller does not choose one.
    pub fn default_grid(self) -> [usize; 3] {
        match self {
            SolutionKind::Rnds => [7, 1, 1],
            _ => [5, 3, 3],
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nariai" => Ok(SolutionKind::Nariai),
            "cold" | "coldbh" => Ok(SolutionKind::Cold),
            "ultracold" | "ultracoldbh" => Ok(SolutionKind::Ultracold),
            "rnds" => Ok(SolutionKind::Rnds),
            other => Err(Error::Parse(format!("unknown solution kind `{other}`"))),
        }
    }
}

/// User-facing parameters of a catalog solution. Omitted values are
/// derived where the family determines them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpec {
    pub kind: SolutionKind,
    pub lambda: f64,
    pub phi2: Option<f64>,
    pub q: Option<f64>,
    pub m: Option<f64>,
}

impl SolutionSpec {
    pub fn new(kind: SolutionKind, lambda: f64) -> Self {
        SolutionSpec {
            kind,
            lambda,
            phi2: None,
            q: None,
            m: None,
        }
    }

    pub fn nariai(lambda: f64, phi2: f64) -> Self {
        SolutionSpec::new(SolutionKind::Nariai, lambda).with_phi2(phi2)
    }

    pub fn cold(lambda: f64, phi2: f64) -> Self {
        SolutionSpec::new(SolutionKind::Cold, lambda).with_phi2(phi2)
    }

    pub fn ultracold(lambda: f64) -> Self {
        SolutionSpec::new(SolutionKind::Ultracold, lambda)
    }

    pub fn rnds(m: f64, q: f64, lambda: f64) -> Self {
        SolutionSpec::new(SolutionKind::Rnds, lambda).with_m(m).with_q(q)
    }

    pub fn with_phi2(mut self, phi2: f64) -> Self {
        self.phi2 = Some(phi2);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    /// Reads the `key = value` format with keys `kind`, `lambda`, `phi2`,
    /// `q` and `m`.
    pub fn from_kv(text: &str) -> Result<Self> {
        let pairs = kv::parse(text, &["kind", "lambda", "phi2", "q", "m"])?;
        let get = |k: &str| pairs.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let kind: SolutionKind = get("kind")
            .ok_or_else(|| Error::Parse("missing key `kind`".into()))?
            .parse()?;
        let lambda = kv::number(
            "lambda",
            get("lambda").ok_or_else(|| Error::Parse("missing key `lambda`".into()))?,
        )?;
        let opt = |k: &str| get(k).map(|v| kv::number(k, v)).transpose();
        Ok(SolutionSpec {
            kind,
            lambda,
            phi2: opt("phi2")?,
            q: opt("q")?,
            m: opt("m")?,
        })
    }

    pub fn to_kv(&self) -> String {
        let mut out = format!("kind = {}\nlambda = {:?}\n", self.kind, self.lambda);
        for (k, v) in [("phi2", self.phi2), ("q", self.q), ("m", self.m)] {
            if let Some(v) = v {
                out.push_str(&format!("{k} = {v:?}\n"));
            }
        }
        out
    }
}

/// Quantities fixed by the family once the inputs are validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParameters {
    pub q: f64,
    pub phi2: Option<f64>,
    /// Mass; metadata only for the product families.
    pub m: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub r_plus: Option<f64>,
    pub r_c: Option<f64>,
    pub roots: Vec<HorizonRoot>,
    /// Radial interval sampled by verification.
    pub radial_range: [f64; 2],
}

/// A validated catalog solution.
#[derive(Clone, Debug)]
pub struct Solution {
    pub spec: SolutionSpec,
    pub derived: DerivedParameters,
    pub system: ElectrostaticSystem,
    /// Box the verification grid is drawn from.
    pub sample_chart: Chart,
}

/// Mass of the charged Nariai and cold families as a function of `q` and `Λ`;
/// `None` where the expression is not real.
pub fn product_family_mass(q: f64, lambda: f64) -> Option<f64> {
    let disc = 1.0 - 4.0 * q * q * lambda;
    if disc < 0.0 {
        return None;
    }
    let m2 = (1.0 + 12.0 * q * q * lambda + disc.powi(3).sqrt()) / (18.0 * lambda);
    (m2 > 0.0).then(|| m2.sqrt())
}

fn sphere_chart(name: &str, r: [f64; 2]) -> Result<Chart> {
    Chart::new(name, [r, [POLE_MARGIN, PI - POLE_MARGIN], [0.0, 2.0 * PI]], ["r", "theta", "phi"])
}

/// The product `dr² + φ² g_S²` with lapse `f(r)` and radial field
/// `E = e_r ∂r`, on `r ∈ r_range`.
pub fn product_system(
    name: &str,
    lambda: f64,
    phi2: f64,
    r_range: [f64; 2],
    lapse: impl Fn(Jet) -> Jet + Send + Sync + 'static,
    e_r: f64,
) -> Result<ElectrostaticSystem> {
    let chart = sphere_chart(name, r_range)?;
    let metric = MetricChart::new(
        chart,
        MetricField::diagonal(move |x| [Jet::constant(1.0), Jet::constant(phi2), x[1].sin().square() * phi2]),
    );
    Ok(ElectrostaticSystem::new(
        metric,
        ScalarField::new(move |x| lapse(x[0])),
        VectorField::vector(move |_| [Jet::constant(e_r), Jet::zero(), Jet::zero()]),
        lambda,
    ))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(msg()))
    }
}

/// Validates `spec` and constructs the metric, lapse and field.
pub fn build_solution(spec: &SolutionSpec) -> Result<Solution> {
    let lambda = spec.lambda;
    require(lambda.is_finite() && lambda > 0.0, || format!("Λ = {lambda} must be > 0"))?;
    for (k, v) in [("phi2", spec.phi2), ("q", spec.q), ("m", spec.m)] {
        if let Some(v) = v {
            require(v.is_finite(), || format!("{k} = {v} is not finite"))?;
        }
    }
    match spec.kind {
        SolutionKind::Nariai => build_nariai(spec),
        SolutionKind::Cold => build_cold(spec),
        SolutionKind::Ultracold => build_ultracold(spec),
        SolutionKind::Rnds => build_rnds(spec),
    }
}

fn phi2_of(spec: &SolutionSpec) -> Result<f64> {
    spec.phi2
        .ok_or_else(|| Error::ParameterOutOfRange(format!("{} requires phi2", spec.kind)))
}

fn build_nariai(spec: &SolutionSpec) -> Result<Solution> {
    let lambda = spec.lambda;
    let phi2 = phi2_of(spec)?;
    require(1.0 / (2.0 * lambda) < phi2 && phi2 < 1.0 / lambda, || {
        format!(
            "Nariai needs 1/(2Λ) < φ² < 1/Λ, i.e. {} < φ² < {}, got φ² = {phi2}",
            1.0 / (2.0 * lambda),
            1.0 / lambda
        )
    })?;
    let q = spec.q.unwrap_or_else(|| (phi2 * (1.0 - lambda * phi2)).sqrt());
    let bound = phi2 * lambda.sqrt();
    require(q != 0.0 && q.abs() <= bound, || {
        format!("Nariai needs 0 < |q| ≤ φ²√Λ = {bound}, got q = {q}")
    })?;
    let alpha2 = lambda - q * q / (phi2 * phi2);
    if alpha2 <= 0.0 {
        return Err(Error::NegativeDiscriminant(format!("α² = Λ − q²/φ⁴ = {alpha2}")));
    }
    let alpha = alpha2.sqrt();
    let range = [0.0, PI / alpha];
    let system = product_system("nariai", lambda, phi2, range, move |r| (r * alpha).sin(), q / phi2)?;
    Ok(Solution {
        sample_chart: system.metric.chart.clone(),
        system,
        spec: spec.clone(),
        derived: DerivedParameters {
            q,
            phi2: Some(phi2),
            m: spec.m.or_else(|| product_family_mass(q, lambda)),
            alpha: Some(alpha),
            beta: None,
            r_plus: None,
            r_c: None,
            roots: Vec::new(),
            radial_range: range,
        },
    })
}

fn build_cold(spec: &SolutionSpec) -> Result<Solution> {
    let lambda = spec.lambda;
    let phi2 = phi2_of(spec)?;
    require(0.0 < phi2 && phi2 < 1.0 / (2.0 * lambda), || {
        format!(
            "cold black hole needs 0 < φ² < 1/(2Λ) = {}, got φ² = {phi2}",
            1.0 / (2.0 * lambda)
        )
    })?;
    let q = spec.q.unwrap_or_else(|| (phi2 * (1.0 - lambda * phi2)).sqrt());
    let bound = phi2 * lambda.sqrt();
    require(q.abs() >= bound, || {
        format!("cold black hole needs |q| ≥ φ²√Λ = {bound}, got q = {q}")
    })?;
    let beta2 = q * q / (phi2 * phi2) - lambda;
    if beta2 <= 0.0 {
        return Err(Error::NegativeDiscriminant(format!("β² = q²/φ⁴ − Λ = {beta2}")));
    }
    let beta = beta2.sqrt();
    let range = [0.0, COLD_RADIAL_EXTENT / beta];
    let system = product_system("cold", lambda, phi2, range, move |r| (r * beta).sinh(), q / phi2)?;
    Ok(Solution {
        sample_chart: system.metric.chart.clone(),
        system,
        spec: spec.clone(),
        derived: DerivedParameters {
            q,
            phi2: Some(phi2),
            m: spec.m.or_else(|| product_family_mass(q, lambda)),
            alpha: None,
            beta: Some(beta),
            r_plus: None,
            r_c: None,
            roots: Vec::new(),
            radial_range: range,
        },
    })
}

fn build_ultracold(spec: &SolutionSpec) -> Result<Solution> {
    let lambda = spec.lambda;
    let phi2 = 1.0 / (4.0 * lambda);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    if let Some(p) = spec.phi2 {
        require(close(p, phi2), || format!("ultracold fixes φ² = 1/(4Λ) = {phi2}, got {p}"))?;
    }
    let q = spec.q.unwrap_or_else(|| phi2.sqrt());
    require(close(q * q, phi2), || format!("ultracold fixes q² = 1/(4Λ) = {phi2}, got q = {q}"))?;
    let range = [0.0, ULTRACOLD_RADIAL_EXTENT / lambda.sqrt()];
    let system = product_system("ultracold", lambda, phi2, range, |r| r, lambda.sqrt())?;
    Ok(Solution {
        sample_chart: system.metric.chart.clone(),
        system,
        spec: spec.clone(),
        derived: DerivedParameters {
            q,
            phi2: Some(phi2),
            m: spec.m.or(Some((2.0 / lambda).sqrt() / 3.0)),
            alpha: None,
            beta: None,
            r_plus: None,
            r_c: None,
            roots: Vec::new(),
            radial_range: range,
        },
    })
}

/// `F(r) = 1 − 2m/r + q²/r² − Λr²/3` on jets.
fn rnds_lapse_squared(r: Jet, m: f64, q: f64, lambda: f64) -> Jet {
    let inv = r.recip();
    1.0 - inv * (2.0 * m) + inv.square() * (q * q) - r.square() * (lambda / 3.0)
}

fn build_rnds(spec: &SolutionSpec) -> Result<Solution> {
    let lambda = spec.lambda;
    let m = spec
        .m
        .ok_or_else(|| Error::ParameterOutOfRange("rnds requires m".into()))?;
    let q = spec.q.unwrap_or(0.0);
    let roots = rnds_lapse_roots(m, q, lambda)?;
    require(roots.len() >= 2, || {
        format!("rnds needs two positive horizons, found {roots:?}")
    })?;
    let (r_plus, r_c) = (roots[roots.len() - 2], roots[roots.len() - 1]);
    require(r_plus.multiplicity == 1 && r_c.multiplicity == 1, || {
        format!("rnds needs simple horizons r_+ < r_c, found {roots:?}")
    })?;
    let (r_plus, r_c) = (r_plus.r, r_c.r);
    let range = [r_plus, r_c];
    let chart = sphere_chart("rnds", range)?;
    let eps = HORIZON_MARGIN * (r_c - r_plus);
    let sample_chart = sphere_chart("rnds-sample", [r_plus + eps, r_c - eps])?;
    let metric = MetricChart::new(
        chart,
        MetricField::diagonal(move |x| {
            let r2 = x[0].square();
            [
                rnds_lapse_squared(x[0], m, q, lambda).recip(),
                r2,
                r2 * x[1].sin().square(),
            ]
        }),
    );
    let system = ElectrostaticSystem::new(
        metric,
        ScalarField::new(move |x| rnds_lapse_squared(x[0], m, q, lambda).sqrt()),
        VectorField::vector(move |x| {
            let f = rnds_lapse_squared(x[0], m, q, lambda).sqrt();
            [x[0].square().recip() * f * q, Jet::zero(), Jet::zero()]
        }),
        lambda,
    );
    Ok(Solution {
        system,
        sample_chart,
        spec: spec.clone(),
        derived: DerivedParameters {
            q,
            phi2: None,
            m: Some(m),
            alpha: None,
            beta: None,
            r_plus: Some(r_plus),
            r_c: Some(r_c),
            roots,
            radial_range: range,
        },
    })
}

/// Upper bounds applied to the summary of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub name: String,
    /// Hessian, Laplace, divergence and curl residuals.
    pub residual: f64,
    /// `R − 2(|E|² + Λ)`.
    pub trace: f64,
    pub cotton: f64,
    pub fc_minus_v: f64,
    pub bach: f64,
    pub div_b: f64,
}

impl ToleranceProfile {
    pub fn strict_ad() -> Self {
        ToleranceProfile {
            name: "strict-ad".into(),
            residual: 1e-7,
            trace: 1e-8,
            cotton: 1e-7,
            fc_minus_v: 1e-6,
            bach: 1e-6,
            div_b: 1e-5,
        }
    }

    /// Every strict bound relaxed a hundredfold.
    pub fn loose_fd() -> Self {
        let s = ToleranceProfile::strict_ad();
        ToleranceProfile {
            name: "loose-fd".into(),
            residual: s.residual * 100.0,
            trace: s.trace * 100.0,
            cotton: s.cotton * 100.0,
            fc_minus_v: s.fc_minus_v * 100.0,
            bach: s.bach * 100.0,
            div_b: s.div_b * 100.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "strict-ad" => Ok(ToleranceProfile::strict_ad()),
            "loose-fd" => Ok(ToleranceProfile::loose_fd()),
            other => Err(Error::Parse(format!("unknown tolerance preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [
            self.residual,
            self.trace,
            self.cotton,
            self.fc_minus_v,
            self.bach,
            self.div_b,
        ];
        if bounds.iter().all(|b| *b > 0.0 && b.is_finite()) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(format!(
                "tolerance `{}` has a non-positive bound",
                self.name
            )))
        }
    }
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile::strict_ad()
    }
}

/// Options for [`verify_solution`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Points per axis; `None` uses the family default.
    pub grid: Option<[usize; 3]>,
    pub tolerance: ToleranceProfile,
    pub diff: DiffConfig,
    /// Bach divergence depth, 1 or 2.
    pub depth: u8,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: None,
            tolerance: ToleranceProfile::strict_ad(),
            diff: DiffConfig::automatic(),
            depth: 1,
        }
    }
}

/// Everything measured at one grid point. Tensor quantities are reported as
/// metric norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: [f64; 3],
    pub hessian: f64,
    pub laplace: f64,
    pub div_e: f64,
    pub curl: f64,
    pub trace: f64,
    pub residual_max: f64,
    pub trace_chain: f64,
    pub cotton: f64,
    pub bach: f64,
    pub div_b: Option<f64>,
    /// `‖div B + C_ijk R^jk‖`.
    pub div_b_crosscheck: Option<f64>,
    pub div2_b: Option<f64>,
    pub fc_minus_v: f64,
    /// `None` at critical points of `f`.
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub parallel_defect: Option<f64>,
}

/// Sign of `Q` over the sampled points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QSign {
    Positive,
    Negative,
    Mixed,
    Undefined,
}

impl QSign {
    pub fn of(values: impl IntoIterator<Item = f64>) -> QSign {
        let (mut pos, mut neg, mut any) = (false, false, false);
        for v in values {
            any = true;
            pos |= v > 0.0;
            neg |= v < 0.0;
            if v == 0.0 {
                pos = true;
                neg = true;
            }
        }
        match (any, pos, neg) {
            (false, _, _) => QSign::Undefined,
            (_, true, false) => QSign::Positive,
            (_, false, true) => QSign::Negative,
            _ => QSign::Mixed,
        }
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, QSign::Positive | QSign::Negative)
    }
}

/// Columnwise maxima of the report rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub residual_max: f64,
    pub hessian_max: f64,
    pub laplace_max: f64,
    pub div_e_max: f64,
    pub curl_max: f64,
    pub trace_max: f64,
    pub trace_chain_max: f64,
    pub cotton_max: f64,
    pub bach_max: f64,
    pub div_b_max: Option<f64>,
    pub div_b_crosscheck_max: Option<f64>,
    pub div2_b_max: Option<f64>,
    pub fc_minus_v_max: f64,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_sign: QSign,
}

impl ReportSummary {
    pub fn from_rows(rows: &[ReportRow]) -> ReportSummary {
        let max = |f: &dyn Fn(&ReportRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let max_opt = |f: &dyn Fn(&ReportRow) -> Option<f64>| {
            rows.iter().filter_map(f).reduce(f64::max)
        };
        let qs: Vec<f64> = rows.iter().filter_map(|r| r.q).collect();
        ReportSummary {
            residual_max: max(&|r| r.residual_max),
            hessian_max: max(&|r| r.hessian),
            laplace_max: max(&|r| r.laplace),
            div_e_max: max(&|r| r.div_e),
            curl_max: max(&|r| r.curl),
            trace_max: max(&|r| r.trace),
            trace_chain_max: max(&|r| r.trace_chain),
            cotton_max: max(&|r| r.cotton),
            bach_max: max(&|r| r.bach),
            div_b_max: max_opt(&|r| r.div_b),
            div_b_crosscheck_max: max_opt(&|r| r.div_b_crosscheck),
            div2_b_max: max_opt(&|r| r.div2_b),
            fc_minus_v_max: max(&|r| r.fc_minus_v),
            q_min: qs.iter().copied().reduce(f64::min),
            q_max: qs.iter().copied().reduce(f64::max),
            q_sign: QSign::of(qs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// One line per bound that was exceeded.
    pub failures: Vec<String>,
}

impl Verdict {
    pub fn judge(summary: &ReportSummary, tol: &ToleranceProfile) -> Verdict {
        let mut failures = Vec::new();
        let mut check = |name: &str, value: Option<f64>, bound: f64| {
            if let Some(v) = value {
                if !(v <= bound) {
                    failures.push(format!("{name} = {v:e} exceeds {bound:e}"));
                }
            }
        };
        check("residual_max", Some(summary.residual_max), tol.residual);
        check("trace_max", Some(summary.trace_max), tol.trace);
        check("cotton_max", Some(summary.cotton_max), tol.cotton);
        check("fc_minus_v_max", Some(summary.fc_minus_v_max), tol.fc_minus_v);
        check("bach_max", Some(summary.bach_max), tol.bach);
        check("div_b_max", summary.div_b_max, tol.div_b);
        check("div_b_crosscheck_max", summary.div_b_crosscheck_max, tol.div_b);
        check("div2_b_max", summary.div2_b_max, tol.div_b);
        Verdict {
            pass: failures.is_empty(),
            failures,
        }
    }
}

/// Verification of one solution over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub solution: SolutionSpec,
    pub derived: DerivedParameters,
    pub grid_counts: [usize; 3],
    pub grid: Vec<[f64; 3]>,
    pub tolerance: ToleranceProfile,
    pub diff: DiffConfig,
    pub depth: u8,
    pub rows: Vec<ReportRow>,
    pub summary: ReportSummary,
    pub verdict: Verdict,
}

/// Measures every residual and identity of `sys` at `p`. `depth` selects the
/// Bach divergences: 0 for none, 1 for `div B`, 2 adds `div² B`.
pub fn evaluate_point(sys: &ElectrostaticSystem, p: &Point, depth: u8) -> Result<ReportRow> {
    let order = 4 + depth.min(2) as usize;
    let jets = SystemJets::expand(sys, p, order)?;
    let metric = jets.geo.values.clone();
    let res = jets.residuals();
    let cotton_j = jets.geo.cotton(&jets.ricci, &jets.scalar);
    let bach_j = jets.geo.bach(&cotton_j);
    let cotton = cotton_j.values();
    let (mut div_b, mut div_b_crosscheck, mut div2_b) = (None, None, None);
    if depth >= 1 {
        let d = jets.geo.divergence_last(&bach_j);
        let cross = cotton_ricci_contraction(&cotton, &jets.ricci.values(), &metric);
        let dv = d.values();
        div_b = Some(dv.norm(&metric));
        div_b_crosscheck = Some(dv.sub(&cross).norm(&metric));
        if depth >= 2 {
            let dd = jets.geo.covariant_derivative(&d);
            div2_b = Some(jets.geo.contract(&dd, 0, 1).data[0].value().abs());
        }
    }
    let ld = match jets.ld_profile(p) {
        Ok(ld) => Some(ld),
        Err(Error::GradientVanishes { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ReportRow {
        point: p.0,
        hessian: res.hessian_norm,
        laplace: res.laplace.abs(),
        div_e: res.div_e.abs(),
        curl: res.curl_norm,
        trace: res.trace.abs(),
        residual_max: res.max_residual(),
        trace_chain: res.trace_chain.abs(),
        cotton: cotton.norm(&metric),
        bach: bach_j.values().norm(&metric),
        div_b,
        div_b_crosscheck,
        div2_b,
        fc_minus_v: fc_minus_v(&jets),
        q: ld.as_ref().map(|l| l.q_value),
        rho: ld.as_ref().map(|l| l.rho),
        parallel_defect: ld.as_ref().map(|l| l.parallel_defect),
    })
}

/// Builds the solution and verifies it over the sampling grid.
pub fn verify_solution(spec: &SolutionSpec, opts: &VerifyOptions) -> Result<ResidualReport> {
    opts.tolerance.validate()?;
    opts.diff.validate()?;
    if !(1..=2).contains(&opts.depth) {
        return Err(Error::ParameterOutOfRange(format!(
            "depth must be 1 or 2, got {}",
            opts.depth
        )));
    }
    let mut solution = build_solution(spec)?;
    solution.system.metric.diff = opts.diff;
    let counts = opts.grid.unwrap_or(spec.kind.default_grid());
    let grid = solution.sample_chart.grid(counts);
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let sys = &solution.system;
    let rows = grid
        .par_iter()
        .map(|p| evaluate_point(sys, p, opts.depth))
        .collect::<Result<Vec<_>>>()?;
    let summary = ReportSummary::from_rows(&rows);
    let verdict = Verdict::judge(&summary, &opts.tolerance);
    Ok(ResidualReport {
        solution: solution.spec,
        derived: solution.derived,
        grid_counts: counts,
        grid: grid.iter().map(|p| p.0).collect(),
        tolerance: opts.tolerance.clone(),
        diff: opts.diff,
        depth: opts.depth,
        rows,
        summary,
        verdict,
    })
}

/// Parameter swept by a scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanParameter {
    /// Radial coordinate of the sample point, other coordinates at the
    /// chart midpoint.
    R,
    Q,
    Phi2,
    Lambda,
    M,
}

impl FromStr for ScanParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(ScanParameter::R),
            "q" => Ok(ScanParameter::Q),
            "phi2" => Ok(ScanParameter::Phi2),
            "lambda" => Ok(ScanParameter::Lambda),
            "m" => Ok(ScanParameter::M),
            other => Err(Error::Parse(format!("unknown scan parameter `{other}`"))),
        }
    }
}

/// Quantity recorded at each scan step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    QValue,
    QSign,
    CottonNorm,
    ResidualMax,
    FcMinusV,
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q_value" | "Q" => Ok(Observable::QValue),
            "q_sign" => Ok(Observable::QSign),
            "cotton_norm" => Ok(Observable::CottonNorm),
            "residual_max" => Ok(Observable::ResidualMax),
            "fc_minus_v" => Ok(Observable::FcMinusV),
            other => Err(Error::Parse(format!("unknown observable `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub lo: f64,
    pub hi: f64,
    /// Number of intervals; the scan visits `steps + 1` values.
    pub steps: usize,
    pub observable: Observable,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::ParameterOutOfRange("scan needs steps ≥ 1".into()));
        }
        if !(self.lo < self.hi) {
            return Err(Error::ParameterOutOfRange(format!(
                "scan needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.steps as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub parameter: f64,
    pub value: Option<f64>,
    pub valid: bool,
    pub error: Option<String>,
}

/// Evaluates `scan.observable` at each scan value. Parameter scans rebuild
/// the solution and take the maximum over `grid`; radial scans evaluate a
/// single point. Invalid parameter sets become rows with `valid = false`.
pub fn run_scan(base: &SolutionSpec, scan: &ScanSpec, grid: Option<[usize; 3]>, diff: DiffConfig) -> Result<Vec<ScanRow>> {
    scan.validate()?;
    let observe = |row: &ReportRow| -> Option<f64> {
        match scan.observable {
            Observable::QValue => row.q,
            Observable::QSign => row.q.map(f64::signum),
            Observable::CottonNorm => Some(row.cotton),
            Observable::ResidualMax => Some(row.residual_max),
            Observable::FcMinusV => Some(row.fc_minus_v),
        }
    };
    let radial = if scan.parameter == ScanParameter::R {
        let mut s = build_solution(base)?;
        s.system.metric.diff = diff;
        Some(s)
    } else {
        None
    };
    let rows = scan
        .values()
        .par_iter()
        .map(|&v| {
            let outcome = match &radial {
                Some(sol) => {
                    let mid = |a: usize| {
                        let [lo, hi] = sol.sample_chart.domain()[a];
                        0.5 * (lo + hi)
                    };
                    evaluate_point(&sol.system, &Point::new(v, mid(1), mid(2)), 0)
                        .map(|row| observe(&row))
                }
                None => {
                    let mut spec = base.clone();
                    match scan.parameter {
                        ScanParameter::Q => spec.q = Some(v),
                        ScanParameter::Phi2 => spec.phi2 = Some(v),
                        ScanParameter::Lambda => spec.lambda = v,
                        ScanParameter::M => spec.m = Some(v),
                        ScanParameter::R => unreachable!(),
                    }
                    let opts = VerifyOptions {
                        grid: Some(grid.unwrap_or([3, 1, 1])),
                        diff,
                        depth: 1,
                        ..VerifyOptions::default()
                    };
                    verify_solution(&spec, &opts).map(|rep| {
                        rep.rows.iter().filter_map(observe).reduce(|a, b| {
                            if scan.observable == Observable::QSign || scan.observable == Observable::QValue {
                                if a.abs() <= b.abs() { a } else { b }
                            } else {
                                a.max(b)
                            }
                        })
                    })
                }
            };
            match outcome {
                Ok(value) => ScanRow {
                    parameter: v,
                    valid: value.is_some(),
                    value,
                    error: None,
                },
                Err(e) => ScanRow {
                    parameter: v,
                    value: None,
                    valid: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

/// First pair of consecutive valid rows whose values have opposite signs.
pub fn sign_change(rows: &[ScanRow]) -> Option<(f64, f64)> {
    let valid: Vec<&ScanRow> = rows.iter().filter(|r| r.valid).collect();
    valid.windows(2).find_map(|w| {
        let (a, b) = (w[0].value?, w[1].value?);
        (a * b < 0.0 || (a != 0.0 && b == 0.0)).then_some((w[0].parameter, w[1].parameter))
    })
}
