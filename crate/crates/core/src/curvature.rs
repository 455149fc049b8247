//! Levi-Civita connection, Riemann/Ricci curvature, Cotton and Bach tensors.
//!
//! Conventions: `Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, and the
//! all-covariant Riemann tensor is normalised so that the Ricci identity reads
//! `∇_i∇_j∇_k f − ∇_j∇_i∇_k f = R_ijkl ∇^l f`, the Ricci tensor is
//! `R_ik = g^jl R_ijkl`, and a round sphere of curvature `K` has
//! `R_ijkl = K (g_ik g_jl − g_il g_jk)`.
//!
//! The Cotton tensor is `C_ijk = ∇_i R_jk − ∇_j R_ik − ¼(∇_i R g_jk − ∇_j R g_ik)`
//! and the Bach tensor is its divergence `B_ij = ∇^k C_kij`.
//!
//! Everything is evaluated on Taylor jets of the metric, so each derivative
//! level consumes one order: Christoffel symbols need order 1, curvature 2,
//! Cotton 3, Bach 4, `div B` 5 and `div² B` 6.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{metric_values, MetricChart, Point};
use crate::jet::Jet;
use crate::tensor::{flat_index, unflatten, JetTensor, MetricValues, TensorComponents, Variance};

use Variance::{Down, Up};

/// Metric jets about a point together with the connection.
pub(crate) struct GeometryJets {
    pub g: JetTensor,
    pub g_inv: JetTensor,
    pub gamma: JetTensor,
    pub values: MetricValues,
}

impl GeometryJets {
    pub fn expand(mc: &MetricChart, p: &Point, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::OrderExceeded {
                requested: 1,
                max: order,
            });
        }
        let gj = mc.metric.expand(&mc.chart, &mc.diff, p, order)?;
        GeometryJets::from_metric_jets(gj, p)
    }

    pub fn from_metric_jets(gj: [[Jet; 3]; 3], p: &Point) -> Result<Self> {
        let values = metric_values(gj.map(|r| r.map(|c| c.value())), p)?;
        // symmetrise the jets so round-off in the field closure cannot leak
        let g = JetTensor::build(vec![Down, Down], |ix| (gj[ix[0]][ix[1]] + gj[ix[1]][ix[0]]) * 0.5);
        let g_inv = invert(&g);
        let dg: Vec<[Jet; 3]> = g.data.iter().map(Jet::gradient).collect();
        let d = |k: usize, i: usize, j: usize| dg[3 * i + j][k];
        let lowered = JetTensor::build(vec![Down, Down, Down], |ix| {
            let (l, i, j) = (ix[0], ix[1], ix[2]);
            (d(i, j, l) + d(j, i, l) - d(l, i, j)) * 0.5
        });
        let gamma = JetTensor::build(vec![Up, Down, Down], |ix| {
            (0..3)
                .map(|l| g_inv.get(&[ix[0], l]).truncate(lowered.get(&[l, 0, 0]).order()) * lowered.get(&[l, ix[1], ix[2]]))
                .sum()
        });
        Ok(GeometryJets {
            g,
            g_inv,
            gamma,
            values,
        })
    }

    /// `R^l_kij = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.
    fn riemann_mixed(&self) -> JetTensor {
        let dgamma: Vec<[Jet; 3]> = self.gamma.data.iter().map(Jet::gradient).collect();
        let dg = |a: usize, l: usize, i: usize, j: usize| dgamma[flat_index(&[l, i, j])][a];
        let gm = |l: usize, i: usize, j: usize| self.gamma.get(&[l, i, j]);
        JetTensor::build(vec![Up, Down, Down, Down], |ix| {
            let (l, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
            let mut acc = dg(i, l, j, k) - dg(j, l, i, k);
            for m in 0..3 {
                acc += gm(l, i, m) * gm(m, j, k) - gm(l, j, m) * gm(m, i, k);
            }
            acc
        })
    }

    /// All-covariant Riemann tensor in the convention of the module docs.
    pub fn riemann(&self) -> JetTensor {
        let mixed = self.riemann_mixed();
        JetTensor::build(vec![Down; 4], |ix| {
            let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
            (0..3)
                .map(|m| self.g.get(&[k, m]) * mixed.get(&[m, l, i, j]))
                .sum()
        })
    }

    pub fn ricci(&self) -> JetTensor {
        let mixed = self.riemann_mixed();
        JetTensor::build(vec![Down, Down], |ix| {
            let (j, k) = (ix[0], ix[1]);
            (0..3).map(|i| mixed.get(&[i, k, i, j])).sum()
        })
    }

    /// Full metric trace over the two covariant slots of a rank-2 tensor.
    pub fn trace2(&self, t: &JetTensor) -> Jet {
        let mut acc = Jet::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc += self.g_inv.get(&[i, j]) * t.get(&[i, j]);
            }
        }
        acc
    }

    /// `∇T` with the new covariant slot prepended.
    pub fn covariant_derivative(&self, t: &JetTensor) -> JetTensor {
        let rank = t.rank();
        let grads: Vec<[Jet; 3]> = t.data.iter().map(Jet::gradient).collect();
        let mut variance = vec![Down];
        variance.extend_from_slice(&t.variance);
        JetTensor::build(variance, |ix| {
            let a = ix[0];
            let rest = &ix[1..];
            let mut acc = grads[flat_index(rest)][a];
            let mut idx = rest.to_vec();
            for s in 0..rank {
                let orig = idx[s];
                for c in 0..3 {
                    idx[s] = c;
                    let term = match t.variance[s] {
                        Up => self.gamma.get(&[orig, a, c]) * t.get(&idx),
                        Down => -(self.gamma.get(&[c, a, orig]) * t.get(&idx)),
                    };
                    acc += term;
                }
                idx[s] = orig;
            }
            acc
        })
    }

    /// Contracts slot `a` of `t` against slot `b` through `g^{-1}`; both
    /// slots must be covariant.
    pub fn contract(&self, t: &JetTensor, a: usize, b: usize) -> JetTensor {
        debug_assert!(a < b && t.variance[a] == Down && t.variance[b] == Down);
        let rank = t.rank();
        let mut variance = t.variance.clone();
        variance.remove(b);
        variance.remove(a);
        JetTensor::build(variance, |ix| {
            let mut full = vec![0; rank];
            let mut n = 0;
            for (s, slot) in full.iter_mut().enumerate() {
                if s != a && s != b {
                    *slot = ix[n];
                    n += 1;
                }
            }
            let mut acc = Jet::zero();
            for p in 0..3 {
                for q in 0..3 {
                    full[a] = p;
                    full[b] = q;
                    acc += self.g_inv.get(&[p, q]) * t.get(&full);
                }
            }
            acc
        })
    }

    /// Cotton tensor from the Ricci jets and scalar curvature.
    pub fn cotton(&self, ricci: &JetTensor, scalar: &Jet) -> JetTensor {
        let dric = self.covariant_derivative(ricci);
        let dr = scalar.gradient();
        let raw = JetTensor::build(vec![Down; 3], |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            dric.get(&[i, j, k]) - dric.get(&[j, i, k])
                - (dr[i] * self.g.get(&[j, k]) - dr[j] * self.g.get(&[i, k])) * 0.25
        });
        JetTensor::build(vec![Down; 3], |ix| {
            (raw.get(ix) - raw.get(&[ix[1], ix[0], ix[2]])) * 0.5
        })
    }

    /// `B_ij = ∇^k C_kij`.
    pub fn bach(&self, cotton: &JetTensor) -> JetTensor {
        let dc = self.covariant_derivative(cotton);
        self.contract(&dc, 0, 1)
    }

    /// `(div B)_i = ∇^j B_ij`.
    pub fn divergence_last(&self, b: &JetTensor) -> JetTensor {
        let db = self.covariant_derivative(b);
        // (∇B)_{a i j}: contract a with j
        let rank = db.rank();
        self.contract(&db, 0, rank - 1)
    }
}

fn invert(g: &JetTensor) -> JetTensor {
    let m = |i: usize, j: usize| g.get(&[i, j]);
    let cof = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1)
    };
    let det = m(0, 0) * cof(0, 0) + m(0, 1) * cof(0, 1) + m(0, 2) * cof(0, 2);
    let inv_det = det.recip();
    JetTensor::build(vec![Up, Up], |ix| cof(ix[1], ix[0]) * inv_det)
}

/// Christoffel symbols, curvature tensors and scalar curvature at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePack {
    /// `Γ^k_ij` (up, down, down).
    pub christoffel: TensorComponents,
    pub riemann: TensorComponents,
    pub ricci: TensorComponents,
    pub scalar: f64,
}

/// Cotton and Bach tensors at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CottonPack {
    pub cotton: TensorComponents,
    pub bach: TensorComponents,
}

/// Divergences of the Bach tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BachDivergences {
    /// `∇^j B_ij` by direct differentiation.
    pub div_b: TensorComponents,
    /// `∇^i ∇^j B_ij`, present at depth 2.
    pub div2_b: Option<f64>,
    /// `−C_ijk R^jk`, an independent route to `div B`.
    pub crosscheck: TensorComponents,
}

/// Everything the curvature module computes at a point, evaluated once.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSummary {
    pub metric: MetricValues,
    pub pack: CurvaturePack,
    pub cotton: Option<CottonPack>,
    pub divergences: Option<BachDivergences>,
}

/// `Γ^k_ij` at `p`.
pub fn christoffel(mc: &MetricChart, p: &Point) -> Result<TensorComponents> {
    Ok(GeometryJets::expand(mc, p, 1)?.gamma.values())
}

/// Christoffel symbols, Riemann, Ricci and scalar curvature at `p`.
pub fn curvature_stack(mc: &MetricChart, p: &Point) -> Result<CurvaturePack> {
    let geo = GeometryJets::expand(mc, p, 2)?;
    Ok(pack_from(&geo))
}

fn pack_from(geo: &GeometryJets) -> CurvaturePack {
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci);
    CurvaturePack {
        christoffel: geo.gamma.values(),
        riemann: geo.riemann().values(),
        ricci: ricci.values(),
        scalar: scalar.value(),
    }
}

/// Cotton tensor at `p`.
pub fn cotton(mc: &MetricChart, p: &Point) -> Result<TensorComponents> {
    let geo = GeometryJets::expand(mc, p, 3)?;
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci);
    Ok(geo.cotton(&ricci, &scalar).values())
}

/// Bach tensor at `p`.
pub fn bach(mc: &MetricChart, p: &Point) -> Result<TensorComponents> {
    Ok(cotton_pack(mc, p)?.bach)
}

/// Cotton and Bach tensors at `p`.
pub fn cotton_pack(mc: &MetricChart, p: &Point) -> Result<CottonPack> {
    let geo = GeometryJets::expand(mc, p, 4)?;
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci);
    let c = geo.cotton(&ricci, &scalar);
    let b = geo.bach(&c);
    Ok(CottonPack {
        cotton: c.values(),
        bach: b.values(),
    })
}

/// `div B` (depth 1) and optionally `div² B` (depth 2), with the
/// `−C_ijk R^jk` crosscheck.
pub fn bach_divergences(mc: &MetricChart, p: &Point, depth: u8) -> Result<BachDivergences> {
    let s = curvature_summary(mc, p, Some(depth))?;
    Ok(s.divergences.expect("requested"))
}

/// Evaluates the curvature stack once at the order the request needs:
/// `None` stops at curvature, `Some(0)` adds Cotton and Bach, `Some(1|2)`
/// adds the Bach divergences.
pub fn curvature_summary(mc: &MetricChart, p: &Point, depth: Option<u8>) -> Result<CurvatureSummary> {
    let order = match depth {
        None => 2,
        Some(0) => 4,
        Some(1) => 5,
        Some(_) => 6,
    };
    let geo = GeometryJets::expand(mc, p, order)?;
    let ricci = geo.ricci();
    let scalar = geo.trace2(&ricci);
    let pack = CurvaturePack {
        christoffel: geo.gamma.values(),
        riemann: geo.riemann().values(),
        ricci: ricci.values(),
        scalar: scalar.value(),
    };
    let mut cotton_out = None;
    let mut divergences = None;
    if let Some(depth) = depth {
        let c = geo.cotton(&ricci, &scalar);
        let b = geo.bach(&c);
        cotton_out = Some(CottonPack {
            cotton: c.values(),
            bach: b.values(),
        });
        if depth >= 1 {
            let div_b = geo.divergence_last(&b);
            let div2_b = (depth >= 2).then(|| {
                let d = geo.covariant_derivative(&div_b);
                geo.contract(&d, 0, 1).data[0].value()
            });
            divergences = Some(BachDivergences {
                div_b: div_b.values(),
                div2_b,
                crosscheck: cotton_ricci_contraction(&c.values(), &ricci.values(), &geo.values),
            });
        }
    }
    Ok(CurvatureSummary {
        metric: geo.values.clone(),
        pack,
        cotton: cotton_out,
        divergences,
    })
}

/// `−C_ijk R^jk`.
pub fn cotton_ricci_contraction(
    cotton: &TensorComponents,
    ricci: &TensorComponents,
    metric: &MetricValues,
) -> TensorComponents {
    let gi = &metric.g_inv;
    let mut ric_up = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += gi[j][a] * gi[k][b] * ricci.get(&[a, b]);
                }
            }
            ric_up[j][k] = acc;
        }
    }
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                *o -= cotton.get(&[i, j, k]) * ric_up[j][k];
            }
        }
    }
    TensorComponents::covariant(1, out.to_vec())
}

/// Residual of the three-dimensional decomposition
/// `R_ijkl = R_ik g_jl − R_il g_jk + R_jl g_ik − R_jk g_il − (R/2)(g_ik g_jl − g_il g_jk)`,
/// as the largest componentwise difference.
pub fn riemann_decomposition_defect(pack: &CurvaturePack, metric: &MetricValues) -> f64 {
    let g = &metric.g;
    let ric = |i: usize, j: usize| pack.ricci.get(&[i, j]);
    let r = pack.scalar;
    let mut worst: f64 = 0.0;
    for n in 0..81 {
        let ix = unflatten(n, 4);
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let model = ric(i, k) * g[j][l] - ric(i, l) * g[j][k] + ric(j, l) * g[i][k]
            - ric(j, k) * g[i][l]
            - 0.5 * r * (g[i][k] * g[j][l] - g[i][l] * g[j][k]);
        worst = worst.max((pack.riemann.get(&ix) - model).abs());
    }
    worst
}

/// Largest `|C_ijk + C_kij + C_jki|`.
pub fn cyclic_defect(c: &TensorComponents) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 0..27 {
        let ix = unflatten(n, 3);
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let s = c.get(&[i, j, k]) + c.get(&[k, i, j]) + c.get(&[j, k, i]);
        worst = worst.max(s.abs());
    }
    worst
}

/// Largest metric trace of a rank-3 covariant tensor over slot pairs
/// (0,1), (0,2) and (1,2).
pub fn trace_defect(c: &TensorComponents, metric: &MetricValues) -> f64 {
    let gi = &metric.g_inv;
    let mut worst: f64 = 0.0;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for free in 0..3 {
            let mut acc = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    let mut ix = [0; 3];
                    ix[a] = p;
                    ix[b] = q;
                    let other = 3 - a - b;
                    ix[other] = free;
                    acc += gi[p][q] * c.get(&ix);
                }
            }
            worst = worst.max(acc.abs());
        }
    }
    worst
}

type ComponentFn = Arc<dyn Fn(&[Jet; 3]) -> Vec<Jet> + Send + Sync>;

/// A tensor field in closed form, for covariant differentiation.
#[derive(Clone)]
pub struct TensorField {
    variance: Vec<Variance>,
    f: ComponentFn,
}

impl TensorField {
    pub fn new(variance: Vec<Variance>, f: impl Fn(&[Jet; 3]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        assert!(variance.len() <= 3, "tensor fields up to rank 3");
        TensorField {
            variance,
            f: Arc::new(f),
        }
    }

    pub fn scalar(u: crate::geom::ScalarField) -> Self {
        TensorField::new(Vec::new(), move |x| vec![u.eval_jet(x)])
    }

    pub fn from_vector(v: crate::geom::VectorField) -> Self {
        TensorField::new(vec![v.variance()], move |x| v.eval_jet(x).to_vec())
    }

    /// The metric of `mc` itself, as a (down, down) field.
    pub fn metric(mc: &MetricChart) -> Self {
        let m = mc.metric.clone();
        TensorField::new(vec![Down, Down], move |x| {
            m.eval_jet(x).iter().flatten().copied().collect()
        })
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    fn expand(&self, mc: &MetricChart, p: &Point, order: usize) -> Result<JetTensor> {
        let (chart, diff) = (&mc.chart, &mc.diff);
        let f = &self.f;
        let data: Vec<Jet> = match self.variance.len() {
            0 => diff.expand::<1>(chart, p, order, &|x| to_array(f(x)))?.to_vec(),
            1 => diff.expand::<3>(chart, p, order, &|x| to_array(f(x)))?.to_vec(),
            2 => diff.expand::<9>(chart, p, order, &|x| to_array(f(x)))?.to_vec(),
            _ => diff.expand::<27>(chart, p, order, &|x| to_array(f(x)))?.to_vec(),
        };
        Ok(JetTensor::new(self.variance.clone(), data))
    }
}

fn to_array<const K: usize>(v: Vec<Jet>) -> [Jet; K] {
    v.try_into().expect("tensor field returned the wrong number of components")
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField({:?})", self.variance)
    }
}

/// `∇T` at `p`, with the new covariant slot first.
pub fn covariant_derivative(t: &TensorField, mc: &MetricChart, p: &Point) -> Result<TensorComponents> {
    let geo = GeometryJets::expand(mc, p, 1)?;
    let tj = t.expand(mc, p, 1)?;
    Ok(geo.covariant_derivative(&tj).values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Chart, MetricField, ScalarField};

    fn round_sphere_product(phi2: f64) -> MetricChart {
        let chart = Chart::new(
            "product",
            [[0.0, 3.0], [0.3, std::f64::consts::PI - 0.3], [0.0, 6.0]],
            ["r", "theta", "phi"],
        )
        .unwrap();
        MetricChart::new(
            chart,
            MetricField::diagonal(move |x| {
                [Jet::constant(1.0), Jet::constant(phi2), x[1].sin().square() * phi2]
            }),
        )
    }

    #[test]
    fn flat_christoffel_is_exactly_zero() {
        let mc = MetricChart::euclidean(1.0);
        let g = christoffel(&mc, &Point::new(0.1, 0.2, 0.3)).unwrap();
        assert_eq!(g.entries().len(), 27);
        assert!(g.entries().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sphere_christoffel() {
        let mc = round_sphere_product(0.75);
        let p = Point::new(0.3, 1.0, 2.0);
        let g = christoffel(&mc, &p).unwrap();
        assert!((g.get(&[1, 2, 2]) + 1f64.sin() * 1f64.cos()).abs() < 1e-14);
        assert!((g.get(&[2, 1, 2]) - 1f64.cos() / 1f64.sin()).abs() < 1e-14);
        assert!(g.symmetry_defect(1, 2) <= 1e-12);
    }

    #[test]
    fn product_scalar_curvature() {
        let mc = round_sphere_product(0.75);
        let pack = curvature_stack(&mc, &Point::new(0.3, 1.0, 2.0)).unwrap();
        assert!((pack.scalar - 8.0 / 3.0).abs() < 1e-12);
        let m = mc.eval_metric(&Point::new(0.3, 1.0, 2.0)).unwrap();
        assert!(riemann_decomposition_defect(&pack, &m) < 1e-12);
        // sphere factor: R_θϕθϕ = K (g_θθ g_ϕϕ) with K = 1/φ²
        let k = 1.0 / 0.75;
        let expected = k * m.g[1][1] * m.g[2][2];
        assert!((pack.riemann.get(&[1, 2, 1, 2]) - expected).abs() < 1e-12);
    }

    #[test]
    fn metric_compatibility() {
        let mc = round_sphere_product(0.6);
        let g = TensorField::metric(&mc);
        let d = covariant_derivative(&g, &mc, &Point::new(1.0, 1.2, 0.5)).unwrap();
        assert_eq!(d.rank(), 3);
        assert!(d.max_abs() <= 1e-12);
    }

    #[test]
    fn gradient_of_scalar_is_partial() {
        let mc = round_sphere_product(0.6);
        let u = ScalarField::new(|x| x[0] * x[1] + x[2].sin());
        let d = covariant_derivative(&TensorField::scalar(u), &mc, &Point::new(1.0, 1.2, 0.5)).unwrap();
        assert!((d.get(&[0]) - 1.2).abs() < 1e-15);
        assert!((d.get(&[1]) - 1.0).abs() < 1e-15);
        assert!((d.get(&[2]) - 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn product_metric_is_conformally_flat() {
        let mc = round_sphere_product(0.75);
        let s = curvature_summary(&mc, &Point::new(0.3, 1.0, 2.0), Some(1)).unwrap();
        let c = s.cotton.unwrap();
        assert!(c.cotton.max_abs() < 1e-12);
        assert!(c.bach.max_abs() < 1e-11);
        assert!(s.divergences.unwrap().div_b.max_abs() < 1e-10);
    }

    fn generic() -> MetricChart {
        MetricChart::new(
            Chart::cartesian(1.0),
            MetricField::new(|x| {
                let one = Jet::constant(1.0);
                let a = one + x[0].square();
                let b = one + x[1].square() * 0.5 + x[2] * x[0] * 0.3;
                let c = one + x[2].square() + x[0].sin() * 0.2;
                let o = x[0] * x[1] * 0.1;
                let z = Jet::zero();
                [[a, o, z], [o, b, z], [z, z, c]]
            }),
        )
    }

    #[test]
    fn ricci_identity_fixes_the_riemann_convention() {
        let mc = generic();
        let p = Point::new(0.2, -0.3, 0.4);
        let geo = GeometryJets::expand(&mc, &p, 3).unwrap();
        let f = ScalarField::new(|x| x[0].sin() * x[1] + x[2].square() * x[0]);
        let fj = f.expand(&mc.chart, &mc.diff, &p, 3).unwrap();
        let df = JetTensor::covariant(1, fj.gradient().to_vec());
        let hess = geo.covariant_derivative(&df);
        let third = geo.covariant_derivative(&hess).values();
        let riem = geo.riemann().values();
        let grad_up = df.values().index_adjust(0, &geo.values).unwrap();
        for n in 0..27 {
            let ix = unflatten(n, 3);
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let lhs = third.get(&[i, j, k]) - third.get(&[j, i, k]);
            let rhs: f64 = (0..3).map(|l| riem.get(&[i, j, k, l]) * grad_up.get(&[l])).sum();
            assert!((lhs - rhs).abs() < 1e-12, "{ix:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn bach_divergence_matches_cotton_ricci_contraction() {
        let mc = generic();
        let s = curvature_summary(&mc, &Point::new(0.2, -0.3, 0.4), Some(2)).unwrap();
        let c = s.cotton.unwrap();
        assert!(c.cotton.max_abs() > 1e-3);
        assert!(c.bach.symmetry_defect(0, 1) < 1e-12);
        let d = s.divergences.unwrap();
        let diff = d.div_b.sub(&d.crosscheck).max_abs();
        assert!(diff < 1e-10, "{:?} vs {:?}", d.div_b, d.crosscheck);
        assert!(d.div2_b.unwrap().is_finite());
    }
}
