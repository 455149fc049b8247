//! Warped products `g = dr² + φ(r)² ḡ` over an interval with a
//! constant-curvature surface fibre, built from a lapse profile `f(r)` through
//! `φ(r) = c₁ ∫_{r₀}^r ds/√f(s) + c₂`, and the level-set and Ricci eigenframe
//! analysis of lapse functions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::curvature::GeometryJets;
use crate::electrostatic::EPS_GRAD;
use crate::error::{Error, Result};
use crate::geom::{Chart, MetricChart, MetricField, Point, ScalarField, POLE_MARGIN};
use crate::jet::{Jet, MAX_ORDER};
use crate::kv;
use crate::quadrature::integrate;

/// Absolute tolerance of the warping quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Lapse profiles `f(r)` understood by the warped builder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum LapseProfile {
    /// `a sin(k r)`.
    Sin { a: f64, k: f64 },
    /// `a sinh(k r)`.
    Sinh { a: f64, k: f64 },
    /// `a r + b`.
    Linear { a: f64, b: f64 },
    /// `c`.
    Constant { c: f64 },
}

impl LapseProfile {
    /// Builds a profile from its family name and parameter list.
    pub fn from_parts(family: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "profile `{family}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match family {
            "sin" => need(2).map(|_| LapseProfile::Sin { a: params[0], k: params[1] }),
            "sinh" => need(2).map(|_| LapseProfile::Sinh { a: params[0], k: params[1] }),
            "linear" => need(2).map(|_| LapseProfile::Linear { a: params[0], b: params[1] }),
            "constant" => need(1).map(|_| LapseProfile::Constant { c: params[0] }),
            other => Err(Error::Parse(format!("unknown profile `{other}`"))),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            LapseProfile::Sin { .. } => "sin",
            LapseProfile::Sinh { .. } => "sinh",
            LapseProfile::Linear { .. } => "linear",
            LapseProfile::Constant { .. } => "constant",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match *self {
            LapseProfile::Sin { a, k } | LapseProfile::Sinh { a, k } => vec![a, k],
            LapseProfile::Linear { a, b } => vec![a, b],
            LapseProfile::Constant { c } => vec![c],
        }
    }

    pub fn eval_jet(&self, r: Jet) -> Jet {
        match *self {
            LapseProfile::Sin { a, k } => (r * k).sin() * a,
            LapseProfile::Sinh { a, k } => (r * k).sinh() * a,
            LapseProfile::Linear { a, b } => r * a + b,
            LapseProfile::Constant { c } => r * 0.0 + c,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_jet(Jet::constant(r)).value()
    }

    /// `(f, f', f'')` at `r`.
    pub fn derivatives(&self, r: f64) -> [f64; 3] {
        let j = self.eval_jet(Jet::variable(r, 0, 2));
        [j.value(), j.coefficient([1, 0, 0]), 2.0 * j.coefficient([2, 0, 0])]
    }

    /// The lapse as a field on a chart whose first coordinate is `r`.
    pub fn field(&self) -> ScalarField {
        let p = *self;
        ScalarField::new(move |x| p.eval_jet(x[0]))
    }
}

/// Surface fibre of constant curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fiber {
    UnitSphere,
    /// Constant scalar curvature `R̄₀`, Gauss curvature `R̄₀/2`.
    ConstantCurvature { scalar: f64 },
}

impl Fiber {
    pub fn scalar_curvature(&self) -> f64 {
        match *self {
            Fiber::UnitSphere => 2.0,
            Fiber::ConstantCurvature { scalar } => scalar,
        }
    }

    fn gauss(&self) -> f64 {
        0.5 * self.scalar_curvature()
    }

    /// `sn_K(θ)`, so that `ḡ = dθ² + sn_K(θ)² dϕ²`.
    fn sn(&self, t: Jet) -> Jet {
        let k = self.gauss();
        if k > 0.0 {
            (t * k.sqrt()).sin() * (1.0 / k.sqrt())
        } else if k < 0.0 {
            (t * (-k).sqrt()).sinh() * (1.0 / (-k).sqrt())
        } else {
            t
        }
    }

    fn theta_range(&self) -> [f64; 2] {
        let k = self.gauss();
        if k > 0.0 {
            [POLE_MARGIN / k.sqrt(), (PI - POLE_MARGIN) / k.sqrt()]
        } else {
            [POLE_MARGIN, PI - POLE_MARGIN]
        }
    }
}

/// Inputs of the warped builder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedSpec {
    pub profile: LapseProfile,
    pub c1: f64,
    pub c2: f64,
    pub interval: [f64; 2],
    pub fiber: Fiber,
}

impl WarpedSpec {
    /// Reads the `key = value` format with keys `profile`, `parameters`,
    /// `c1`, `c2`, `interval` and optionally `fiber_scalar` (the fibre's
    /// scalar curvature; absent means the unit sphere).
    pub fn from_kv(text: &str) -> Result<Self> {
        let keys = ["profile", "parameters", "c1", "c2", "interval", "fiber_scalar"];
        let pairs = kv::parse(text, &keys)?;
        let get = |k: &str| pairs.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let req = |k: &str| get(k).ok_or_else(|| Error::Parse(format!("missing key `{k}`")));
        let profile = LapseProfile::from_parts(req("profile")?, &kv::numbers("parameters", req("parameters")?)?)?;
        let interval = kv::numbers("interval", req("interval")?)?;
        if interval.len() != 2 {
            return Err(Error::Parse("`interval` takes two numbers".into()));
        }
        let fiber = match get("fiber_scalar") {
            None => Fiber::UnitSphere,
            Some(v) => Fiber::ConstantCurvature {
                scalar: kv::number("fiber_scalar", v)?,
            },
        };
        Ok(WarpedSpec {
            profile,
            c1: kv::number("c1", req("c1")?)?,
            c2: kv::number("c2", req("c2")?)?,
            interval: [interval[0], interval[1]],
            fiber,
        })
    }

    pub fn to_kv(&self) -> String {
        let params: Vec<String> = self.profile.parameters().iter().map(|p| format!("{p:?}")).collect();
        let mut out = format!(
            "profile = {}\nparameters = {}\nc1 = {:?}\nc2 = {:?}\ninterval = {:?}, {:?}\n",
            self.profile.family(),
            params.join(", "),
            self.c1,
            self.c2,
            self.interval[0],
            self.interval[1]
        );
        if let Fiber::ConstantCurvature { scalar } = self.fiber {
            out.push_str(&format!("fiber_scalar = {scalar:?}\n"));
        }
        out
    }
}

impl FromStr for WarpedSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WarpedSpec::from_kv(s)
    }
}

/// The warping function `φ` on jets of the radial coordinate.
#[derive(Clone)]
pub struct Warping {
    profile: LapseProfile,
    c1: f64,
    c2: f64,
    r0: f64,
}

impl Warping {
    pub fn value(&self, r: f64) -> f64 {
        let c1 = self.c1;
        if c1 == 0.0 {
            return self.c2;
        }
        let p = self.profile;
        c1 * integrate(move |s| p.eval(s).powf(-0.5), self.r0, r, QUADRATURE_TOL) + self.c2
    }

    /// `φ(r)` with its Taylor expansion carried by `r`: the value comes from
    /// quadrature and every higher coefficient from `c₁ f^(−1/2)`.
    pub fn eval_jet(&self, r: Jet) -> Jet {
        let n = MAX_ORDER;
        let seed = Jet::variable(r.value(), 0, n - 1);
        let integrand = self.profile.eval_jet(seed).powf(-0.5) * self.c1;
        let mut taylor = [0.0; MAX_ORDER + 1];
        taylor[0] = self.value(r.value());
        for k in 0..n {
            taylor[k + 1] = integrand.coefficient([k, 0, 0]) / (k + 1) as f64;
        }
        r.compose(&taylor)
    }

    /// `(φ, φ', φ'')` at `r`.
    pub fn derivatives(&self, r: f64) -> [f64; 3] {
        let j = self.eval_jet(Jet::variable(r, 0, 2));
        [j.value(), j.coefficient([1, 0, 0]), 2.0 * j.coefficient([2, 0, 0])]
    }
}

impl fmt::Debug for Warping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Warping(c1 = {}, c2 = {}, r0 = {})", self.c1, self.c2, self.r0)
    }
}

/// A validated warped product.
#[derive(Clone, Debug)]
pub struct WarpedProduct {
    pub spec: WarpedSpec,
    pub warping: Warping,
    pub metric: MetricChart,
    pub lapse: ScalarField,
}

const VALIDATION_SAMPLES: usize = 200;
const ODE_SAMPLES: usize = 10;

/// Builds `dr² + φ²ḡ` on `interval × fibre`, checking `f > 0` and `φ > 0`
/// inside the interval. Either may vanish at an endpoint.
pub fn warp_build(spec: &WarpedSpec) -> Result<WarpedProduct> {
    let [lo, hi] = spec.interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidChart(format!("interval [{lo}, {hi}] is empty")));
    }
    let samples = |n: usize| (1..n).map(move |i| lo + (hi - lo) * i as f64 / n as f64);
    for r in samples(VALIDATION_SAMPLES) {
        if !(spec.profile.eval(r) > 0.0) {
            return Err(Error::LapseVanishes { r });
        }
    }
    let warping = Warping {
        profile: spec.profile,
        c1: spec.c1,
        c2: spec.c2,
        r0: lo,
    };
    for r in samples(VALIDATION_SAMPLES) {
        if !(warping.value(r) > 0.0) {
            return Err(Error::WarpingNonPositive { r });
        }
    }
    let chart = Chart::new(
        "warped",
        [spec.interval, spec.fiber.theta_range(), [0.0, 2.0 * PI]],
        ["r", "theta", "phi"],
    )?;
    let (w, fiber) = (warping.clone(), spec.fiber);
    let metric = MetricChart::new(
        chart,
        MetricField::diagonal(move |x| {
            let phi2 = w.eval_jet(x[0]).square();
            [Jet::constant(1.0), phi2, phi2 * fiber.sn(x[1]).square()]
        }),
    );
    Ok(WarpedProduct {
        spec: spec.clone(),
        lapse: spec.profile.field(),
        warping,
        metric,
    })
}

impl WarpedProduct {
    /// Largest `|φ'√f − c₁|` over evenly spaced points of the interval.
    pub fn ode_defect(&self) -> f64 {
        let [lo, hi] = self.spec.interval;
        (0..ODE_SAMPLES)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / ODE_SAMPLES as f64)
            .map(|r| (self.warping.derivatives(r)[1] * self.spec.profile.eval(r).sqrt() - self.spec.c1).abs())
            .fold(0.0, f64::max)
    }

    /// Grid of a fibre `{r} × Σ`.
    pub fn fiber_grid(&self, r: f64, counts: [usize; 2]) -> Vec<Point> {
        self.metric
            .chart
            .grid([1, counts[0], counts[1]])
            .into_iter()
            .map(|p| Point::new(r, p.0[1], p.0[2]))
            .collect()
    }
}

/// Second fundamental form data of the level set `{r = const}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetData {
    /// `h_ab` in the fibre coordinates `(θ, ϕ)`, for the normal `∇f/|∇f|`.
    pub second_fundamental: [[f64; 2]; 2],
    /// `g^ab h_ab`.
    pub mean_curvature: f64,
    /// `max |h_ab − (H/2) g_ab|`.
    pub isotropy_defect: f64,
}

/// Curvature of a warped product compared with its closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedCurvatureCheck {
    /// Largest difference between the computed Ricci tensor and
    /// `R_rr = −2φ''/φ`, `R_ra = 0`, `R_ab = (R̄/2 − φ'² − φφ'') ḡ_ab`.
    pub ricci_defect: f64,
    /// `φ²R + 2φ'² + 4φφ''` from the computed scalar curvature.
    pub fiber_scalar: f64,
    pub level_set: LevelSetData,
    /// `2 (f/f') (φ''/φ)`.
    pub mean_curvature_formula: f64,
}

fn level_set_from(geo: &GeometryJets, fprime: f64) -> LevelSetData {
    let gamma = geo.gamma.values();
    let g = geo.values.g;
    let sign = fprime.signum();
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = -sign * gamma.get(&[0, a + 1, b + 1]);
        }
    }
    let gf = [[g[1][1], g[1][2]], [g[2][1], g[2][2]]];
    let det = gf[0][0] * gf[1][1] - gf[0][1] * gf[1][0];
    let gi = [[gf[1][1] / det, -gf[0][1] / det], [-gf[1][0] / det, gf[0][0] / det]];
    let mut mean = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            mean += gi[a][b] * h[a][b];
        }
    }
    let mut iso: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            iso = iso.max((h[a][b] - 0.5 * mean * gf[a][b]).abs());
        }
    }
    LevelSetData {
        second_fundamental: h,
        mean_curvature: mean,
        isotropy_defect: iso,
    }
}

/// Level-set data of `{r = p.r}` at `p`.
pub fn level_set_data(w: &WarpedProduct, p: &Point) -> Result<LevelSetData> {
    let geo = GeometryJets::expand(&w.metric, p, 1)?;
    let fprime = w.spec.profile.derivatives(p.0[0])[1];
    if fprime.abs() <= EPS_GRAD {
        return Err(Error::CriticalPoint { r: p.0[0] });
    }
    Ok(level_set_from(&geo, fprime))
}

/// Compares the computed curvature of `w` at `p` with the warped closed forms.
pub fn warped_curvature_check(w: &WarpedProduct, p: &Point) -> Result<WarpedCurvatureCheck> {
    let r = p.0[0];
    let [f, fp, _] = w.spec.profile.derivatives(r);
    if fp.abs() <= EPS_GRAD {
        return Err(Error::CriticalPoint { r });
    }
    let geo = GeometryJets::expand(&w.metric, p, 2)?;
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci).value();
    let ric = ricci.values();
    let [phi, dphi, ddphi] = w.warping.derivatives(r);
    let g = geo.values.g;
    let rbar0 = w.spec.fiber.scalar_curvature();
    let mut ricci_defect: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let model = match (i, j) {
                (0, 0) => -2.0 * ddphi / phi,
                (0, _) | (_, 0) => 0.0,
                _ => (0.5 * rbar0 - dphi * dphi - phi * ddphi) * g[i][j] / (phi * phi),
            };
            ricci_defect = ricci_defect.max((ric.get(&[i, j]) - model).abs());
        }
    }
    Ok(WarpedCurvatureCheck {
        ricci_defect,
        fiber_scalar: phi * phi * scalar + 2.0 * dphi * dphi + 4.0 * phi * ddphi,
        level_set: level_set_from(&geo, fp),
        mean_curvature_formula: 2.0 * (f / fp) * (ddphi / phi),
    })
}

/// `max − min` of the fibre scalar over a fibre grid at radius `r`.
pub fn fiber_scalar_spread(w: &WarpedProduct, r: f64, counts: [usize; 2]) -> Result<f64> {
    let values = w
        .fiber_grid(r, counts)
        .iter()
        .map(|p| warped_curvature_check(w, p).map(|c| c.fiber_scalar))
        .collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// `ρ²` reconstructed from the profile and warping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSquared {
    pub value: f64,
    /// False when `ρ² < 0`: no real field realises the profile.
    pub realizable: bool,
}

/// `ρ² = (1/f'²) [f''/f + 2φ''/φ + Λ]` at `p`.
pub fn rho_squared_reconstruct(w: &WarpedProduct, lambda: f64, p: &Point) -> Result<RhoSquared> {
    let r = p.0[0];
    let [f, fp, fpp] = w.spec.profile.derivatives(r);
    if f <= 0.0 {
        return Err(Error::LapseVanishes { r });
    }
    if fp.abs() <= EPS_GRAD {
        return Err(Error::CriticalPoint { r });
    }
    let [phi, _, ddphi] = w.warping.derivatives(r);
    let value = (fpp / f + 2.0 * ddphi / phi + lambda) / (fp * fp);
    Ok(RhoSquared {
        value,
        realizable: value >= 0.0,
    })
}

/// Spectral data of the Ricci endomorphism against the gradient of `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenframe {
    /// Eigenvalues of `g⁻¹ Ric`, ascending.
    pub eigenvalues: [f64; 3],
    /// Cluster sizes, ascending.
    pub pattern: Vec<usize>,
    /// `Ric(∇f, ∇f)/|∇f|²`.
    pub rayleigh: f64,
    /// `|Ric♯∇f − λ∇f| / |∇f|` with `λ` the Rayleigh quotient.
    pub gradient_alignment_defect: f64,
}

/// Eigenvalues of the Ricci endomorphism at `p` and how well `∇f` aligns
/// with one of its eigenvectors.
pub fn ricci_eigenframe(mc: &MetricChart, f: &ScalarField, p: &Point) -> Result<Eigenframe> {
    let geo = GeometryJets::expand(mc, p, 2)?;
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci).value();
    let ric = Matrix3::from_fn(|i, j| ricci.get(&[i, j]).value());
    let g = Matrix3::from_fn(|i, j| geo.values.g[i][j]);
    let g_inv = Matrix3::from_fn(|i, j| geo.values.g_inv[i][j]);
    let chol = g
        .cholesky()
        .ok_or(Error::MetricNotPositiveDefinite { point: p.0 })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or(Error::MetricNotPositiveDefinite { point: p.0 })?;
    let sym = l_inv * ric * l_inv.transpose();
    let sym = 0.5 * (sym + sym.transpose());
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);

    let tol = 1e-6 * (1.0 + scalar.abs());
    let mut pattern = vec![1usize];
    for w in eigenvalues.windows(2) {
        if (w[1] - w[0]).abs() <= tol {
            *pattern.last_mut().expect("non-empty") += 1;
        } else {
            pattern.push(1);
        }
    }
    pattern.sort_unstable();

    let fj = f.expand(&mc.chart, &mc.diff, p, 1)?;
    let df = nalgebra::Vector3::from_fn(|i, _| fj.gradient()[i].value());
    let grad = g_inv * df;
    let norm2 = df.dot(&grad);
    let norm = norm2.sqrt();
    if norm <= EPS_GRAD {
        return Err(Error::GradientVanishes { point: p.0, norm });
    }
    let ric_grad = g_inv * ric * grad;
    let rayleigh = grad.dot(&(ric * grad)) / norm2;
    let diff = ric_grad - rayleigh * grad;
    let defect = diff.dot(&(g * diff)).max(0.0).sqrt() / norm;
    Ok(Eigenframe {
        eigenvalues: [eigenvalues[0], eigenvalues[1], eigenvalues[2]],
        pattern,
        rayleigh,
        gradient_alignment_defect: defect,
    })
}

/// Spread of `|∇f|` over the points of a level set, for checking that the
/// gradient norm is constant along it.
pub fn gradient_norm_spread(mc: &MetricChart, f: &ScalarField, points: &[Point]) -> Result<f64> {
    let norms = points
        .iter()
        .map(|p| {
            let m = mc.eval_metric(p)?;
            let j = f.expand(&mc.chart, &mc.diff, p, 1)?;
            let d = j.gradient().map(|d| d.value());
            let mut acc = 0.0;
            for i in 0..3 {
                for k in 0..3 {
                    acc += m.g_inv[i][k] * d[i] * d[k];
                }
            }
            Ok(acc.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_spec() -> WarpedSpec {
        WarpedSpec {
            profile: LapseProfile::Linear { a: 1.0, b: 0.0 },
            c1: 1.0,
            c2: 0.0,
            interval: [1.0, 4.0],
            fiber: Fiber::UnitSphere,
        }
    }

    #[test]
    fn square_root_warping() {
        let mut spec = linear_spec();
        spec.c2 = 0.5;
        let w = warp_build(&spec).unwrap();
        for r in [1.5, 2.0, 3.7] {
            assert!((w.warping.value(r) - (2.0 * r.sqrt() - 2.0 + 0.5)).abs() < 1e-12);
        }
        assert!((w.warping.derivatives(2.0)[1] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(w.ode_defect() < 1e-12);
    }

    #[test]
    fn constant_profile_gives_linear_warping() {
        let spec = WarpedSpec {
            profile: LapseProfile::Constant { c: 4.0 },
            c1: 1.0,
            c2: 0.1,
            interval: [0.0, 3.0],
            fiber: Fiber::UnitSphere,
        };
        let w = warp_build(&spec).unwrap();
        assert!((w.warping.value(2.0) - (1.0 + 0.1)).abs() < 1e-13);
        assert!(w.warping.derivatives(2.0)[2].abs() < 1e-14);
    }

    #[test]
    fn build_errors() {
        let mut spec = linear_spec();
        spec.interval = [-1.0, 2.0];
        assert!(matches!(warp_build(&spec), Err(Error::LapseVanishes { .. })));
        let mut spec = linear_spec();
        spec.c2 = -1.0;
        assert!(matches!(warp_build(&spec), Err(Error::WarpingNonPositive { .. })));
    }

    #[test]
    fn kv_round_trip() {
        let mut spec = linear_spec();
        spec.fiber = Fiber::ConstantCurvature { scalar: -2.0 };
        assert_eq!(WarpedSpec::from_kv(&spec.to_kv()).unwrap(), spec);
    }

    #[test]
    fn flat_space_in_polar_form() {
        // φ = r with a unit-sphere fibre is Euclidean space
        let spec = WarpedSpec {
            profile: LapseProfile::Constant { c: 1.0 },
            c1: 1.0,
            c2: 1.0,
            interval: [0.0, 3.0],
            fiber: Fiber::UnitSphere,
        };
        let w = warp_build(&spec).unwrap();
        let p = Point::new(1.3, 1.0, 2.0);
        let pack = crate::curvature::curvature_stack(&w.metric, &p).unwrap();
        assert!(pack.ricci.max_abs() < 1e-12);
        assert!(pack.scalar.abs() < 1e-12);
        let geo = GeometryJets::expand(&w.metric, &p, 2).unwrap();
        let ls = level_set_from(&geo, 1.0);
        assert!((ls.mean_curvature - 2.0 / 2.3).abs() < 1e-12);
        assert!(ls.isotropy_defect < 1e-14);
    }
}
