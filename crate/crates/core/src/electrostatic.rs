//! Electrostatic systems `(M³, g, f, E)` with cosmological constant `Λ`:
//! residuals of the field equations, the `V` tensor and the identity
//! `fC = V`, and the linearly dependent case `E = ρ∇f`.
//!
//! The field equations checked here are
//!
//! ```text
//! ∇²f = f (Ric − Λg + 2E♭⊗E♭ − |E|² g)
//! Δf  = (|E|² − Λ) f
//! div E = 0
//! df ∧ E♭ + f dE♭ = 0
//! R = 2(|E|² + Λ)
//! ```
//!
//! and every residual is "left side minus right side".

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curvature::{trace_defect, GeometryJets};
use crate::error::{Error, Result};
use crate::geom::{MetricChart, Point, ScalarField, VectorField};
use crate::jet::Jet;
use crate::tensor::{unflatten, JetTensor, MetricValues, TensorComponents, Variance};

use Variance::{Down, Up};

/// Below this `|∇f|` a point is treated as critical.
pub const EPS_GRAD: f64 = 1e-8;

/// A non-LD profile has `‖E − ρ∇f‖` above this multiple of `‖E‖`.
pub const LD_RELATIVE_TOL: f64 = 1e-6;

/// Metric, lapse `f`, electric field `E` and cosmological constant `Λ`.
#[derive(Clone)]
pub struct ElectrostaticSystem {
    pub metric: MetricChart,
    pub lapse: ScalarField,
    pub field: VectorField,
    pub lambda: f64,
}

impl ElectrostaticSystem {
    /// `field` may be given either as a vector `E` or as the 1-form `E♭`.
    pub fn new(metric: MetricChart, lapse: ScalarField, field: VectorField, lambda: f64) -> Self {
        ElectrostaticSystem {
            metric,
            lapse,
            field,
            lambda,
        }
    }
}

impl fmt::Debug for ElectrostaticSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ElectrostaticSystem")
            .field("chart", &self.metric.chart)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

/// Residuals of the field equations at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualBundle {
    /// `∇²f − f(Ric − Λg + 2E♭⊗E♭ − |E|²g)`.
    pub hessian: TensorComponents,
    pub hessian_norm: f64,
    /// `Δf − (|E|² − Λ)f`.
    pub laplace: f64,
    /// `div E`.
    pub div_e: f64,
    /// `df ∧ E♭ + f dE♭`.
    pub curl: TensorComponents,
    pub curl_norm: f64,
    /// `R − 2(|E|² + Λ)`.
    pub trace: f64,
    /// `g^ij (hessian)_ij − laplace + f·trace`, zero by construction.
    pub trace_chain: f64,
    /// `∇²f − f(Ric + 2E♭⊗E♭ − (R/2)g)`, the Hessian equation with the
    /// scalar-curvature relation substituted.
    pub combined: TensorComponents,
    /// `f(∇_iE♭_j − ∇_jE♭_i) − (E♭_i∇_jf − E♭_j∇_if)`, the curl equation
    /// assembled from covariant derivatives.
    pub curl_covariant: TensorComponents,
    /// The single component of the 3-form `E♭ ∧ dE♭`.
    pub e_wedge_de: f64,
}

impl ResidualBundle {
    /// Largest of the five field-equation residuals.
    pub fn max_residual(&self) -> f64 {
        [
            self.hessian_norm,
            self.laplace.abs(),
            self.div_e.abs(),
            self.curl_norm,
            self.trace.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The lapse/field relation at a point where `E` is tested against `ρ∇f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LDProfile {
    pub rho: f64,
    /// `Q = 2(1 − f²ρ²)`.
    pub q_value: f64,
    /// `‖E − ρ∇f‖`.
    pub parallel_defect: f64,
    pub is_ld: bool,
}

/// Result of comparing the two expressions for `V` in the LD case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdVCheck {
    /// Largest componentwise difference between the LD formula and `V`.
    pub v_defect: f64,
    /// Largest `|∇_iρ ∇_jf − ∇_jρ ∇_if|`.
    pub rho_symmetry_defect: f64,
}

/// Jets of every field of the system about one point.
pub(crate) struct SystemJets {
    pub geo: GeometryJets,
    pub lambda: f64,
    pub f: Jet,
    pub df: JetTensor,
    pub e_up: JetTensor,
    pub e_flat: JetTensor,
    pub ricci: JetTensor,
    pub scalar: Jet,
}

impl SystemJets {
    pub fn expand(sys: &ElectrostaticSystem, p: &Point, order: usize) -> Result<Self> {
        let mc = &sys.metric;
        let geo = GeometryJets::expand(mc, p, order)?;
        let f = sys.lapse.expand(&mc.chart, &mc.diff, p, order)?;
        if f.value() <= 0.0 {
            return Err(Error::LapseNonPositive {
                point: p.0,
                value: f.value(),
            });
        }
        let e = sys.field.expand(&mc.chart, &mc.diff, p, order)?;
        let (e_up, e_flat) = match sys.field.variance() {
            Up => {
                let up = JetTensor::new(vec![Up], e.to_vec());
                let flat = JetTensor::build(vec![Down], |ix| {
                    (0..3).map(|j| geo.g.get(&[ix[0], j]) * e[j]).sum()
                });
                (up, flat)
            }
            Down => {
                let flat = JetTensor::new(vec![Down], e.to_vec());
                let up = JetTensor::build(vec![Up], |ix| {
                    (0..3).map(|j| geo.g_inv.get(&[ix[0], j]) * e[j]).sum()
                });
                (up, flat)
            }
        };
        let ricci = geo.ricci();
        let scalar = geo.trace2(&ricci);
        Ok(SystemJets {
            df: JetTensor::covariant(1, f.gradient().to_vec()),
            geo,
            lambda: sys.lambda,
            f,
            e_up,
            e_flat,
            ricci,
            scalar,
        })
    }

    fn metric(&self) -> &MetricValues {
        &self.geo.values
    }

    fn e_norm2(&self) -> Jet {
        (0..3).map(|i| self.e_up.get(&[i]) * self.e_flat.get(&[i])).sum()
    }

    pub fn residuals(&self) -> ResidualBundle {
        let m = self.metric();
        let g = &self.geo.g;
        let f = self.f;
        let lambda = self.lambda;
        let e2 = self.e_norm2();
        let hess = self.geo.covariant_derivative(&self.df);
        let ef = |i: usize| self.e_flat.get(&[i]);

        let hessian = JetTensor::build(vec![Down, Down], |ix| {
            let (i, j) = (ix[0], ix[1]);
            let gij = g.get(&[i, j]);
            hess.get(&[i, j])
                - f * (self.ricci.get(&[i, j]) - gij * lambda + ef(i) * ef(j) * 2.0 - e2 * gij)
        });
        let combined = JetTensor::build(vec![Down, Down], |ix| {
            let (i, j) = (ix[0], ix[1]);
            hess.get(&[i, j])
                - f * (self.ricci.get(&[i, j]) + ef(i) * ef(j) * 2.0
                    - self.scalar * g.get(&[i, j]) * 0.5)
        });
        let laplace = self.geo.trace2(&hess) - (e2 - lambda) * f;
        let div_e: Jet = (0..3)
            .map(|i| {
                let mut acc = self.e_up.get(&[i]).partial(i);
                for k in 0..3 {
                    acc += self.geo.gamma.get(&[i, i, k]) * self.e_up.get(&[k]);
                }
                acc
            })
            .sum();
        let trace = self.scalar - (e2 + lambda) * 2.0;

        let dfv = self.df.values();
        let e = self.e_flat.values();
        let de: Vec<[f64; 3]> = self.e_flat.data.iter().map(|j| j.gradient().map(|d| d.value())).collect();
        let d_e = |i: usize, j: usize| de[j][i] - de[i][j];
        let curl = TensorComponents::new(
            vec![Down, Down],
            (0..9)
                .map(|n| {
                    let (i, j) = (n / 3, n % 3);
                    dfv.get(&[i]) * e.get(&[j]) - dfv.get(&[j]) * e.get(&[i]) + f.value() * d_e(i, j)
                })
                .collect(),
        );
        let nabla_e = self.geo.covariant_derivative(&self.e_flat).values();
        let curl_covariant = TensorComponents::new(
            vec![Down, Down],
            (0..9)
                .map(|n| {
                    let (i, j) = (n / 3, n % 3);
                    f.value() * (nabla_e.get(&[i, j]) - nabla_e.get(&[j, i]))
                        - (e.get(&[i]) * dfv.get(&[j]) - e.get(&[j]) * dfv.get(&[i]))
                })
                .collect(),
        );
        let e_wedge_de = e.get(&[0]) * d_e(1, 2) + e.get(&[1]) * d_e(2, 0) + e.get(&[2]) * d_e(0, 1);

        let hessian = hessian.values();
        let tr_h: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| m.g_inv[i][j] * hessian.get(&[i, j]))
            .sum();
        let trace_chain = tr_h - laplace.value() + f.value() * trace.value();
        ResidualBundle {
            hessian_norm: hessian.norm(m),
            hessian,
            laplace: laplace.value(),
            div_e: div_e.value(),
            curl_norm: curl.norm(m),
            curl,
            trace: trace.value(),
            trace_chain,
            combined: combined.values(),
            curl_covariant,
            e_wedge_de,
        }
    }

    /// `R_il ∇^l f`.
    fn ricci_grad(&self) -> [f64; 3] {
        let ric = self.ricci.values();
        let grad_up = self.grad_up();
        std::array::from_fn(|i| (0..3).map(|l| ric.get(&[i, l]) * grad_up[l]).sum())
    }

    fn grad_up(&self) -> [f64; 3] {
        let m = self.metric();
        let df = self.df.values();
        std::array::from_fn(|i| (0..3).map(|j| m.g_inv[i][j] * df.get(&[j])).sum())
    }

    /// The terms of `V` that involve only curvature and `∇f`; shared by the
    /// general and the LD expressions.
    fn skew(a: [f64; 3], g: &[[f64; 3]; 3], i: usize, j: usize, k: usize) -> f64 {
        a[i] * g[j][k] - a[j] * g[i][k]
    }

    pub fn v_tensor(&self) -> TensorComponents {
        let g = self.metric().g;
        let f = self.f.value();
        let r = self.scalar.value();
        let dr = self.scalar.gradient().map(|d| d.value());
        let df = self.df.values().as_vector();
        let ric = self.ricci.values();
        let e = self.e_flat.values().as_vector();
        let ne = self.geo.covariant_derivative(&self.e_flat).values();
        let rg = self.ricci_grad();
        let entries = (0..27)
            .map(|n| {
                let ix = unflatten(n, 3);
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                2.0 * f * (e[i] * ne.get(&[j, k]) - e[j] * ne.get(&[i, k]))
                    + 0.25 * f * Self::skew(dr, &g, i, j, k)
                    + r * Self::skew(df, &g, i, j, k)
                    - Self::skew(rg, &g, i, j, k)
                    - 2.0 * (df[i] * ric.get(&[j, k]) - df[j] * ric.get(&[i, k]))
            })
            .collect();
        TensorComponents::covariant(3, entries)
    }

    pub fn cotton(&self) -> TensorComponents {
        self.geo.cotton(&self.ricci, &self.scalar).values()
    }

    fn rho_jet(&self, rho_field: Option<&ScalarField>, sys: &ElectrostaticSystem, p: &Point) -> Result<Jet> {
        match rho_field {
            Some(rho) => rho.expand(&sys.metric.chart, &sys.metric.diff, p, 1),
            None => {
                let gi = &self.geo.g_inv;
                let mut num = Jet::zero();
                let mut den = Jet::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        num += gi.get(&[i, j]) * self.df.get(&[i]) * self.e_flat.get(&[j]);
                        den += gi.get(&[i, j]) * self.df.get(&[i]) * self.df.get(&[j]);
                    }
                }
                Ok(num / den)
            }
        }
    }

    pub fn ld_profile(&self, p: &Point) -> Result<LDProfile> {
        let m = self.metric();
        let df = self.df.values();
        let grad_norm = df.norm(m);
        if grad_norm <= EPS_GRAD {
            return Err(Error::GradientVanishes {
                point: p.0,
                norm: grad_norm,
            });
        }
        let e = self.e_flat.values();
        let rho = e.inner(&df, m) / (grad_norm * grad_norm);
        let parallel_defect = e.sub(&df.scale(rho)).norm(m);
        let f = self.f.value();
        Ok(LDProfile {
            rho,
            q_value: 2.0 * (1.0 - f * f * rho * rho),
            parallel_defect,
            is_ld: parallel_defect <= LD_RELATIVE_TOL * e.norm(m),
        })
    }

    pub fn ld_v_check(
        &self,
        sys: &ElectrostaticSystem,
        rho_field: Option<&ScalarField>,
        p: &Point,
    ) -> Result<LdVCheck> {
        let profile = self.ld_profile(p)?;
        if !profile.is_ld {
            return Err(Error::NotLinearlyDependent {
                point: p.0,
                defect: profile.parallel_defect,
            });
        }
        let rho_j = self.rho_jet(rho_field, sys, p)?;
        let rho = rho_j.value();
        let drho = rho_j.gradient().map(|d| d.value());
        let m = self.metric();
        let g = m.g;
        let f = self.f.value();
        let r = self.scalar.value();
        let lambda = self.lambda;
        let df = self.df.values().as_vector();
        let grad2 = self.df.values().inner(&self.df.values(), m);
        let ric = self.ricci.values();
        let rg = self.ricci_grad();
        let fr2 = f * f * rho * rho;
        let v = self.v_tensor();
        let mut v_defect: f64 = 0.0;
        for n in 0..27 {
            let ix = unflatten(n, 3);
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let ld = f * rho * grad2 * Self::skew(drho, &g, i, j, k)
                + (r - 0.5 * r * fr2 - 2.0 * fr2 * lambda) * Self::skew(df, &g, i, j, k)
                + 2.0 * (fr2 - 1.0) * (df[i] * ric.get(&[j, k]) - df[j] * ric.get(&[i, k]))
                + (fr2 - 1.0) * Self::skew(rg, &g, i, j, k);
            v_defect = v_defect.max((ld - v.get(&ix)).abs());
        }
        let mut rho_symmetry_defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                rho_symmetry_defect = rho_symmetry_defect.max((drho[i] * df[j] - drho[j] * df[i]).abs());
            }
        }
        Ok(LdVCheck {
            v_defect,
            rho_symmetry_defect,
        })
    }
}

/// Residuals of the five field equations at `p`.
pub fn residual_suite(sys: &ElectrostaticSystem, p: &Point) -> Result<ResidualBundle> {
    Ok(SystemJets::expand(sys, p, 3)?.residuals())
}

/// The `V` tensor at `p`.
pub fn v_tensor(sys: &ElectrostaticSystem, p: &Point) -> Result<TensorComponents> {
    Ok(SystemJets::expand(sys, p, 3)?.v_tensor())
}

/// Largest componentwise `|fC − V|` at `p`.
pub fn fc_equals_v_check(sys: &ElectrostaticSystem, p: &Point) -> Result<f64> {
    let jets = SystemJets::expand(sys, p, 3)?;
    Ok(fc_minus_v(&jets))
}

pub(crate) fn fc_minus_v(jets: &SystemJets) -> f64 {
    let f = jets.f.value();
    jets.cotton().scale(f).sub(&jets.v_tensor()).max_abs()
}

/// `ρ`, `Q` and the parallelism defect of `E` against `∇f` at `p`.
pub fn ld_profile(sys: &ElectrostaticSystem, p: &Point) -> Result<LDProfile> {
    SystemJets::expand(sys, p, 2)?.ld_profile(p)
}

/// Compares the LD expression for `V` against the general one. When
/// `rho_field` is `None`, `ρ` is reconstructed by projection.
pub fn ld_v_tensor_check(
    sys: &ElectrostaticSystem,
    rho_field: Option<&ScalarField>,
    p: &Point,
) -> Result<LdVCheck> {
    SystemJets::expand(sys, p, 3)?.ld_v_check(sys, rho_field, p)
}

/// Largest metric trace of `V` over any slot pair.
pub fn v_trace_defect(v: &TensorComponents, metric: &MetricValues) -> f64 {
    trace_defect(v, metric)
}
