//! Coordinate charts, field handles and the differentiation engine.
//!
//! Fields are closures over [`Jet`] coordinates. The automatic strategy feeds
//! them seeded coordinate jets and reads every mixed partial off the result;
//! the finite-difference strategy evaluates them at plain points on a
//! stencil and fills the same jet layout from difference quotients, so the
//! rest of the crate is agnostic to how derivatives were obtained.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::jet::{Jet, MAX_ORDER};
use crate::tensor::{MetricValues, TensorComponents, Variance};

/// Coordinates `(x₁, x₂, x₃)` of a point in a chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 3]);

impl Point {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Point([x1, x2, x3])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }
}

/// Default polar margin for spherical fibre charts: `θ ∈ [0.3, π − 0.3]`.
pub const POLE_MARGIN: f64 = 0.3;

/// An axis-aligned coordinate box. Points are accepted when they lie in the
/// box shrunk by `margin · width` on every side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    name: String,
    domain: [[f64; 2]; 3],
    labels: [String; 3],
    margin: f64,
}

impl Chart {
    pub const DEFAULT_MARGIN: f64 = 1e-3;

    pub fn new(name: impl Into<String>, domain: [[f64; 2]; 3], labels: [&str; 3]) -> Result<Self> {
        for (axis, [lo, hi]) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart(format!(
                    "axis {axis} interval [{lo}, {hi}] is degenerate"
                )));
            }
        }
        Ok(Chart {
            name: name.into(),
            domain,
            labels: labels.map(String::from),
            margin: Self::DEFAULT_MARGIN,
        })
    }

    /// Cartesian box `[-half, half]³`.
    pub fn cartesian(half: f64) -> Self {
        Chart::new("cartesian", [[-half, half]; 3], ["x1", "x2", "x3"]).expect("non-degenerate")
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> [[f64; 2]; 3] {
        self.domain
    }

    pub fn labels(&self) -> &[String; 3] {
        &self.labels
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.domain[axis][1] - self.domain[axis][0]
    }

    /// The interval of `axis` after removing the margin.
    pub fn interior(&self, axis: usize) -> [f64; 2] {
        let pad = self.margin * self.width(axis);
        [self.domain[axis][0] + pad, self.domain[axis][1] - pad]
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|a| {
            let [lo, hi] = self.interior(a);
            p.0[a] >= lo && p.0[a] <= hi
        })
    }

    pub(crate) fn in_closed_box(&self, x: &[f64; 3]) -> bool {
        (0..3).all(|a| x[a] >= self.domain[a][0] && x[a] <= self.domain[a][1])
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointOutsideDomain {
                chart: self.name.clone(),
                point: p.0,
            })
        }
    }

    /// Tensor grid of `counts[a]` points per axis placed at the interior
    /// nodes `lo + (i + 1)/(n + 1)·(hi − lo)` of the shrunk box; a single
    /// point sits at the midpoint. Ordered with the last axis fastest.
    pub fn grid(&self, counts: [usize; 3]) -> Vec<Point> {
        let axis_nodes = |a: usize| -> Vec<f64> {
            let [lo, hi] = self.interior(a);
            let n = counts[a];
            (0..n)
                .map(|i| lo + (i + 1) as f64 / (n + 1) as f64 * (hi - lo))
                .collect()
        };
        let (xs, ys, zs) = (axis_nodes(0), axis_nodes(1), axis_nodes(2));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(Point([x, y, z]));
                }
            }
        }
        out
    }
}

/// How partial derivatives of field components are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffStrategy {
    /// Truncated Taylor arithmetic; exact to rounding for closed-form fields.
    Automatic,
    /// Accuracy-8 central stencils on plain evaluations.
    FiniteDifference,
}

/// Differentiation settings.
///
/// Under finite differences the step along an axis for derivatives of total
/// order `k` is `fd_step · width · 2^(k−1)`. With the default relative step
/// of 1e−3 on unit-scale closed-form fields the expected absolute error per
/// order is roughly 1e−10, 1e−8, 1e−6, 1e−4, 1e−3 and 1e−2 for orders 1–6.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub strategy: DiffStrategy,
    pub max_order: usize,
    pub fd_step: f64,
    pub richardson_levels: usize,
}

impl DiffConfig {
    pub fn automatic() -> Self {
        DiffConfig {
            strategy: DiffStrategy::Automatic,
            max_order: MAX_ORDER,
            fd_step: 1e-3,
            richardson_levels: 0,
        }
    }

    /// Finite differences capped at order 5; the order-6 Bach double
    /// divergence is rejected unless `max_order` is raised explicitly.
    pub fn finite_difference() -> Self {
        DiffConfig {
            strategy: DiffStrategy::FiniteDifference,
            max_order: 5,
            fd_step: 1e-3,
            richardson_levels: 0,
        }
    }

    pub fn with_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    pub fn with_richardson(mut self, levels: usize) -> Self {
        self.richardson_levels = levels;
        self
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order > MAX_ORDER {
            return Err(Error::InvalidDiffConfig(format!(
                "max_order {} exceeds {MAX_ORDER}",
                self.max_order
            )));
        }
        if self.strategy == DiffStrategy::FiniteDifference
            && !(self.fd_step > 0.0 && self.fd_step.is_finite())
        {
            return Err(Error::InvalidDiffConfig(format!(
                "fd_step must be positive, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }

    /// Expands `K` field components to Taylor jets of `order` about `p`.
    pub fn expand<const K: usize>(
        &self,
        chart: &Chart,
        p: &Point,
        order: usize,
        eval: &dyn Fn(&[Jet; 3]) -> [Jet; K],
    ) -> Result<[Jet; K]> {
        self.validate()?;
        if order > self.max_order {
            return Err(Error::OrderExceeded {
                requested: order,
                max: self.max_order,
            });
        }
        chart.check(p)?;
        match self.strategy {
            DiffStrategy::Automatic => {
                let seeds = [
                    Jet::variable(p.0[0], 0, order),
                    Jet::variable(p.0[1], 1, order),
                    Jet::variable(p.0[2], 2, order),
                ];
                Ok(eval(&seeds).map(|j| j.truncate(order)))
            }
            DiffStrategy::FiniteDifference => {
                fd::expand(chart, p, order, self.fd_step, self.richardson_levels, eval)
            }
        }
    }
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig::automatic()
    }
}

/// Order-0 coordinate jets at `p`.
pub(crate) fn plain(p: &Point) -> [Jet; 3] {
    std::array::from_fn(|a| Jet::variable(p.0[a], a, 0))
}

type JetFn<T> = dyn Fn(&[Jet; 3]) -> T + Send + Sync;

/// A scalar field given in closed form over jet coordinates.
#[derive(Clone)]
pub struct ScalarField(Arc<JetFn<Jet>>);

impl ScalarField {
    pub fn new(f: impl Fn(&[Jet; 3]) -> Jet + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    /// Value at a point (no domain check).
    pub fn value(&self, p: &Point) -> f64 {
        let x = plain(p);
        (self.0)(&x).value()
    }

    pub fn eval_jet(&self, x: &[Jet; 3]) -> Jet {
        (self.0)(x)
    }

    pub fn expand(&self, chart: &Chart, diff: &DiffConfig, p: &Point, order: usize) -> Result<Jet> {
        let [j] = diff.expand(chart, p, order, &|x| [(self.0)(x)])?;
        Ok(j)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

/// A vector field (`Up`) or one-form field (`Down`) in closed form.
#[derive(Clone)]
pub struct VectorField {
    variance: Variance,
    f: Arc<JetFn<[Jet; 3]>>,
}

impl VectorField {
    pub fn vector(f: impl Fn(&[Jet; 3]) -> [Jet; 3] + Send + Sync + 'static) -> Self {
        VectorField {
            variance: Variance::Up,
            f: Arc::new(f),
        }
    }

    pub fn one_form(f: impl Fn(&[Jet; 3]) -> [Jet; 3] + Send + Sync + 'static) -> Self {
        VectorField {
            variance: Variance::Down,
            f: Arc::new(f),
        }
    }

    /// The differential `du` of a scalar field, computed by jet differentiation.
    pub fn differential(u: ScalarField) -> Self {
        VectorField::one_form(move |x| {
            let order = x.iter().map(Jet::order).min().unwrap_or(0);
            let seeds: [Jet; 3] =
                std::array::from_fn(|a| Jet::variable(x[a].value(), a, (order + 1).min(MAX_ORDER)));
            let g = u.eval_jet(&seeds).gradient();
            g.map(|gi| recompose(&gi, x))
        })
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn eval_jet(&self, x: &[Jet; 3]) -> [Jet; 3] {
        (self.f)(x)
    }

    pub fn value(&self, p: &Point) -> TensorComponents {
        let x = plain(p);
        let v = (self.f)(&x).map(|j| j.value());
        TensorComponents::new(vec![self.variance], v.to_vec())
    }

    pub fn expand(&self, chart: &Chart, diff: &DiffConfig, p: &Point, order: usize) -> Result<[Jet; 3]> {
        diff.expand(chart, p, order, &|x| (self.f)(x))
    }
}

/// Re-expresses a jet about the base value of `x` given as coordinates;
/// when `x` are the plain seeded coordinates this is the identity.
fn recompose(j: &Jet, x: &[Jet; 3]) -> Jet {
    let order = x.iter().map(Jet::order).min().unwrap_or(0).min(j.order());
    let h: [Jet; 3] = std::array::from_fn(|a| x[a] - x[a].value());
    let mut out = Jet::zero();
    for m in crate::jet::multi_indices(order) {
        let c = j.coefficient(m);
        if c == 0.0 {
            continue;
        }
        let mut term = Jet::constant(c);
        for a in 0..3 {
            for _ in 0..m[a] {
                term *= h[a];
            }
        }
        out += term;
    }
    out.truncate(order)
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({:?})", self.variance)
    }
}

/// Closed-form metric components `g_ij(x)`.
#[derive(Clone)]
pub struct MetricField(Arc<JetFn<[[Jet; 3]; 3]>>);

impl MetricField {
    pub fn new(f: impl Fn(&[Jet; 3]) -> [[Jet; 3]; 3] + Send + Sync + 'static) -> Self {
        MetricField(Arc::new(f))
    }

    /// Diagonal metric from three component functions.
    pub fn diagonal(f: impl Fn(&[Jet; 3]) -> [Jet; 3] + Send + Sync + 'static) -> Self {
        MetricField::new(move |x| {
            let d = f(x);
            let z = Jet::zero();
            [[d[0], z, z], [z, d[1], z], [z, z, d[2]]]
        })
    }

    pub fn euclidean() -> Self {
        MetricField::diagonal(|_| [Jet::constant(1.0); 3])
    }

    pub fn eval_jet(&self, x: &[Jet; 3]) -> [[Jet; 3]; 3] {
        (self.0)(x)
    }

    pub fn expand(&self, chart: &Chart, diff: &DiffConfig, p: &Point, order: usize) -> Result<[[Jet; 3]; 3]> {
        let flat: [Jet; 9] = diff.expand(chart, p, order, &|x| {
            let g = (self.0)(x);
            std::array::from_fn(|n| g[n / 3][n % 3])
        })?;
        Ok(std::array::from_fn(|i| std::array::from_fn(|j| flat[3 * i + j])))
    }
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MetricField(..)")
    }
}

/// A chart together with a metric and the differentiation settings used to
/// evaluate its curvature.
#[derive(Clone, Debug)]
pub struct MetricChart {
    pub chart: Chart,
    pub metric: MetricField,
    pub diff: DiffConfig,
}

impl MetricChart {
    pub fn new(chart: Chart, metric: MetricField) -> Self {
        MetricChart {
            chart,
            metric,
            diff: DiffConfig::automatic(),
        }
    }

    pub fn euclidean(half: f64) -> Self {
        MetricChart::new(Chart::cartesian(half), MetricField::euclidean())
    }

    pub fn with_diff(mut self, diff: DiffConfig) -> Self {
        self.diff = diff;
        self
    }

    pub fn eval_metric(&self, p: &Point) -> Result<MetricValues> {
        eval_metric(&self.chart, &self.metric, p)
    }
}

/// Absolute symmetry tolerance for metric components.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-12;

/// Metric, inverse and determinant at `p`, rejecting asymmetric or
/// non-positive-definite components.
pub fn eval_metric(chart: &Chart, metric: &MetricField, p: &Point) -> Result<MetricValues> {
    chart.check(p)?;
    let x = plain(p);
    let gj = metric.eval_jet(&x);
    let g: [[f64; 3]; 3] = gj.map(|row| row.map(|c| c.value()));
    metric_values(g, p)
}

pub(crate) fn metric_values(g: [[f64; 3]; 3], p: &Point) -> Result<MetricValues> {
    let mut defect: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            defect = defect.max((g[i][j] - g[j][i]).abs());
        }
    }
    if defect > METRIC_SYMMETRY_TOL || !defect.is_finite() {
        return Err(Error::MetricNotSymmetric { defect });
    }
    let m = Matrix3::from_fn(|i, j| g[i][j]);
    let chol = m
        .cholesky()
        .ok_or(Error::MetricNotPositiveDefinite { point: p.0 })?;
    let inv = chol.inverse();
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(Error::MetricNotPositiveDefinite { point: p.0 });
    }
    Ok(MetricValues {
        g,
        g_inv: std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])),
        det,
    })
}

/// The mixed partial `∂^multi_index u` of a scalar field at `p`.
pub fn derive_scalar(
    field: &ScalarField,
    chart: &Chart,
    diff: &DiffConfig,
    p: &Point,
    multi_index: [usize; 3],
) -> Result<f64> {
    let order: usize = multi_index.iter().sum();
    let jet = field.expand(chart, diff, p, order)?;
    Ok(jet
        .derivative(multi_index)
        .expect("jet was expanded to the requested order"))
}

/// Exterior derivative `(dω)_ij = ∂_i ω_j − ∂_j ω_i` of a one-form field.
pub fn exterior_derivative_oneform(
    omega: &VectorField,
    chart: &Chart,
    diff: &DiffConfig,
    p: &Point,
) -> Result<TensorComponents> {
    if omega.variance() != Variance::Down {
        return Err(Error::WrongVariance {
            slot: 0,
            expected: "covariant",
        });
    }
    let w = omega.expand(chart, diff, p, 1)?;
    Ok(exterior_derivative_jets(&w))
}

pub(crate) fn exterior_derivative_jets(w: &[Jet; 3]) -> TensorComponents {
    let mut out = TensorComponents::zeros(vec![Variance::Down; 2]);
    for i in 0..3 {
        for j in 0..3 {
            let v = w[j].partial(i).value() - w[i].partial(j).value();
            out.set(&[i, j], v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_rejects_degenerate_interval() {
        let err = Chart::new("bad", [[0.0, 1.0], [2.0, 2.0], [0.0, 1.0]], ["a", "b", "c"]);
        assert!(matches!(err, Err(Error::InvalidChart(_))));
    }

    #[test]
    fn chart_margin_and_grid() {
        let c = Chart::cartesian(1.0);
        assert!(c.contains(&Point::new(0.0, 0.5, -0.99)));
        assert!(!c.contains(&Point::new(0.0, 0.5, -0.9999)));
        let g = c.grid([3, 1, 2]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0].0[1], 0.0);
        assert!(g.iter().all(|p| c.contains(p)));
    }

    #[test]
    fn euclidean_metric_values() {
        let mc = MetricChart::euclidean(1.0);
        let m = mc.eval_metric(&Point::new(0.1, 0.2, 0.3)).unwrap();
        assert_eq!(m.det, 1.0);
        assert_eq!(m.g, m.g_inv);
    }

    #[test]
    fn outside_point_rejected() {
        let mc = MetricChart::euclidean(1.0);
        assert!(matches!(
            mc.eval_metric(&Point::new(2.0, 0.0, 0.0)),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn indefinite_metric_rejected() {
        let chart = Chart::cartesian(1.0);
        let metric = MetricField::diagonal(|_| [Jet::constant(1.0), Jet::constant(-1.0), Jet::constant(1.0)]);
        assert!(matches!(
            eval_metric(&chart, &metric, &Point::new(0.0, 0.0, 0.0)),
            Err(Error::MetricNotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let chart = Chart::cartesian(1.0);
        let metric = MetricField::new(|_| {
            let o = Jet::constant(1.0);
            let z = Jet::zero();
            [[o, Jet::constant(0.1), z], [z, o, z], [z, z, o]]
        });
        assert!(matches!(
            eval_metric(&chart, &metric, &Point::new(0.0, 0.0, 0.0)),
            Err(Error::MetricNotSymmetric { .. })
        ));
    }

    #[test]
    fn order_limit_is_enforced() {
        let chart = Chart::cartesian(1.0);
        let u = ScalarField::new(|x| x[0] * x[0]);
        let diff = DiffConfig::automatic().with_max_order(2);
        let err = derive_scalar(&u, &chart, &diff, &Point::new(0.0, 0.0, 0.0), [3, 0, 0]);
        assert_eq!(err, Err(Error::OrderExceeded { requested: 3, max: 2 }));
    }

    #[test]
    fn fd_stencil_leaving_domain_is_an_error() {
        let chart = Chart::cartesian(1.0);
        let u = ScalarField::new(|x| x[0].sin());
        let diff = DiffConfig::finite_difference();
        let p = Point::new(0.995, 0.0, 0.0);
        assert!(matches!(
            derive_scalar(&u, &chart, &diff, &p, [1, 0, 0]),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn scalar_derivatives() {
        let chart = Chart::cartesian(2.0);
        let diff = DiffConfig::automatic();
        let p = Point::new(1.0, 0.0, 0.0);
        let sq = ScalarField::new(|x| x[0] * x[0]);
        assert_eq!(derive_scalar(&sq, &chart, &diff, &p, [1, 0, 0]).unwrap(), 2.0);
        assert_eq!(derive_scalar(&sq, &chart, &diff, &p, [2, 0, 0]).unwrap(), 2.0);
        assert_eq!(derive_scalar(&sq, &chart, &diff, &p, [3, 0, 0]).unwrap(), 0.0);
        let s = ScalarField::new(|x| (x[0] * 0.5).sin());
        let d = derive_scalar(&s, &chart, &diff, &p, [1, 0, 0]).unwrap();
        assert!((d - 0.5 * 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn exterior_derivative_examples() {
        let chart = Chart::cartesian(2.0);
        let diff = DiffConfig::automatic();
        let p = Point::new(0.3, -0.4, 0.8);
        let omega = VectorField::one_form(|x| [x[1], Jet::zero(), Jet::zero()]);
        let d = exterior_derivative_oneform(&omega, &chart, &diff, &p).unwrap();
        assert_eq!(d.get(&[0, 1]), -1.0);
        assert_eq!(d.get(&[1, 0]), 1.0);
        assert_eq!(d.max_abs(), 1.0);

        let u = ScalarField::new(|x| (x[0] * x[1]).sin() + x[2].exp() * x[0]);
        let du = VectorField::differential(u);
        let dd = exterior_derivative_oneform(&du, &chart, &diff, &p).unwrap();
        assert!(dd.max_abs() <= 1e-12);

        let v = VectorField::vector(|x| [x[1], x[0], x[2]]);
        assert!(matches!(
            exterior_derivative_oneform(&v, &chart, &diff, &p),
            Err(Error::WrongVariance { .. })
        ));
    }
}
