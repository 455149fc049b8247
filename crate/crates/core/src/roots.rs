//! Positive roots of the RNdS lapse polynomial `P(r) = q² − 2mr + r² − Λr⁴/3`,
//! so that `f(r)² = P(r)/r²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CELLS: usize = 10_000;
const BISECTION_TOL: f64 = 1e-13;
const MULTIPLE_ROOT_TOL: f64 = 1e-10;

/// A positive root of the lapse polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonRoot {
    pub r: f64,
    pub multiplicity: u8,
}

/// `P(r)` and its derivative.
pub fn lapse_polynomial(m: f64, q: f64, lambda: f64, r: f64) -> (f64, f64) {
    let p = q * q - 2.0 * m * r + r * r - lambda * r.powi(4) / 3.0;
    let dp = -2.0 * m + 2.0 * r - 4.0 * lambda * r.powi(3) / 3.0;
    (p, dp)
}

/// Size of the largest term of `P(r)`, used to judge `|P(r)| ≈ 0`.
pub fn lapse_scale(m: f64, q: f64, lambda: f64, r: f64) -> f64 {
    [1.0, q * q, 2.0 * m * r, r * r, lambda * r.powi(4) / 3.0]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Upper end of the bracketing interval.
pub fn search_bound(m: f64, lambda: f64) -> f64 {
    if lambda > 0.0 {
        2.0 * (3.0 / lambda).sqrt()
    } else {
        10.0 * m
    }
}

fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    while b - a > BISECTION_TOL * b.max(1.0) {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Sorted positive roots of `P` with multiplicity. Simple roots come from
/// sign changes on a uniform mesh; double roots are found as critical points
/// of `P` where `P` itself vanishes.
pub fn rnds_lapse_roots(m: f64, q: f64, lambda: f64) -> Result<Vec<HorizonRoot>> {
    if !(m.is_finite() && q.is_finite() && lambda.is_finite()) {
        return Err(Error::ParameterOutOfRange(
            "m, q and Λ must be finite".into(),
        ));
    }
    if lambda < 0.0 {
        return Err(Error::ParameterOutOfRange(format!("Λ = {lambda} must be ≥ 0")));
    }
    if m <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("m = {m} must be > 0")));
    }
    let p = |r: f64| lapse_polynomial(m, q, lambda, r).0;
    let dp = |r: f64| lapse_polynomial(m, q, lambda, r).1;
    let hi = search_bound(m, lambda);
    let dx = hi / CELLS as f64;
    let mut roots = Vec::new();

    for i in 0..CELLS {
        let a = i as f64 * dx;
        let b = a + dx;
        let (pa, pb) = (p(a), p(b));
        if i > 0 && pa == 0.0 {
            roots.push(HorizonRoot { r: a, multiplicity: 1 });
        } else if pa * pb < 0.0 {
            let mut r = bisect(p, a, b);
            let (v, d) = lapse_polynomial(m, q, lambda, r);
            if d != 0.0 {
                let polished = r - v / d;
                if (a..=b).contains(&polished) && p(polished).abs() <= v.abs() {
                    r = polished;
                }
            }
            roots.push(HorizonRoot { r, multiplicity: 1 });
        }

        let (da, db) = (dp(a), dp(b));
        let critical = if da == 0.0 {
            Some(a)
        } else if da * db < 0.0 {
            Some(bisect(dp, a, b))
        } else {
            None
        };
        if let Some(c) = critical {
            if c > 0.0 && p(c).abs() <= MULTIPLE_ROOT_TOL * lapse_scale(m, q, lambda, c) {
                // merge with a simple root found in the same neighbourhood
                roots.retain(|h: &HorizonRoot| (h.r - c).abs() > 1e-6 * c.max(1.0));
                roots.push(HorizonRoot { r: c, multiplicity: 2 });
            }
        }
    }
    roots.sort_by(|a, b| a.r.total_cmp(&b.r));
    roots.dedup_by(|b, a| {
        if (a.r - b.r).abs() <= 1e-6 * a.r.max(1.0) {
            a.multiplicity = a.multiplicity.max(b.multiplicity);
            true
        } else {
            false
        }
    });
    if roots.is_empty() {
        return Err(Error::NoPositiveRoots);
    }
    Ok(roots)
}
