//! Central finite-difference stencils with Richardson extrapolation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{Chart, Point};
use crate::jet::{coeff_count, multi_indices, Jet};

/// Formal accuracy order of every central stencil.
pub const STENCIL_ACCURACY: usize = 8;

/// Fornberg's recursion: weights of the `deriv`-th derivative at 0 on the
/// nodes `xs`.
pub fn fornberg_weights(xs: &[f64], deriv: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; deriv + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i];
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[deriv]).collect()
}

/// Half-width of the accuracy-8 central stencil for derivative order `d`.
pub fn half_width(d: usize) -> usize {
    if d == 0 {
        0
    } else {
        (2 * d.div_ceil(2) - 1 + STENCIL_ACCURACY - 1) / 2
    }
}

/// Integer offsets and unit-step weights of the central stencil for `d`.
pub fn central_stencil(d: usize) -> Vec<(i32, f64)> {
    let s = half_width(d) as i32;
    let xs: Vec<f64> = (-s..=s).map(|k| k as f64).collect();
    let w = fornberg_weights(&xs, d);
    (-s..=s).zip(w).collect()
}

/// Step used along `axis` for derivatives of total order `order`: the base
/// relative step scaled by the axis width, doubled per order above one.
pub(crate) fn step_for(chart: &Chart, rel_step: f64, axis: usize, order: usize) -> f64 {
    rel_step * chart.width(axis) * 2f64.powi(order as i32 - 1)
}

/// Fills the Taylor coefficients of `K` field components about `p` from
/// tensor-product central differences of order-0 evaluations.
pub(crate) fn expand<const K: usize>(
    chart: &Chart,
    p: &Point,
    order: usize,
    rel_step: f64,
    richardson_levels: usize,
    eval: &dyn Fn(&[Jet; 3]) -> [Jet; K],
) -> Result<[Jet; K]> {
    let stencils: Vec<Vec<(i32, f64)>> = (0..=order).map(central_stencil).collect();
    let n = coeff_count(order);
    let mut coeffs = vec![[0.0; K]; n];
    let sample = |x: [f64; 3]| -> Result<[f64; K]> {
        if !chart.in_closed_box(&x) {
            return Err(Error::PointOutsideDomain {
                chart: chart.name().to_string(),
                point: p.0,
            });
        }
        let seeds = [
            Jet::variable(x[0], 0, 0),
            Jet::variable(x[1], 1, 0),
            Jet::variable(x[2], 2, 0),
        ];
        Ok(eval(&seeds).map(|j| j.value()))
    };

    coeffs[0] = sample(p.0)?;
    for k in 1..=order {
        let mut levels: Vec<Vec<[f64; K]>> = Vec::with_capacity(richardson_levels + 1);
        for level in 0..=richardson_levels {
            let scale = 0.5f64.powi(level as i32);
            let h: [f64; 3] =
                std::array::from_fn(|a| step_for(chart, rel_step, a, k) * scale);
            let mut cache: HashMap<[i32; 3], [f64; K]> = HashMap::new();
            let mut estimates = Vec::new();
            for m in multi_indices(k).filter(|m| m.iter().sum::<usize>() == k) {
                let mut acc = [0.0; K];
                for &(i, wi) in &stencils[m[0]] {
                    for &(j, wj) in &stencils[m[1]] {
                        for &(l, wl) in &stencils[m[2]] {
                            let key = [i, j, l];
                            let vals = match cache.get(&key) {
                                Some(v) => *v,
                                None => {
                                    let x = [
                                        p.0[0] + i as f64 * h[0],
                                        p.0[1] + j as f64 * h[1],
                                        p.0[2] + l as f64 * h[2],
                                    ];
                                    let v = sample(x)?;
                                    cache.insert(key, v);
                                    v
                                }
                            };
                            let w = wi * wj * wl;
                            for c in 0..K {
                                acc[c] += w * vals[c];
                            }
                        }
                    }
                }
                let denom = h[0].powi(m[0] as i32) * h[1].powi(m[1] as i32) * h[2].powi(m[2] as i32);
                let fact: f64 = m.iter().map(|&d| (1..=d).product::<usize>() as f64).product();
                estimates.push(acc.map(|v| v / denom / fact));
            }
            levels.push(estimates);
        }
        let best = richardson(levels);
        let start = coeff_count(k - 1);
        for (slot, est) in best.into_iter().enumerate() {
            coeffs[start + slot] = est;
        }
    }

    Ok(std::array::from_fn(|c| {
        let flat: Vec<f64> = coeffs.iter().map(|row| row[c]).collect();
        Jet::from_coefficients(order, &flat)
    }))
}

/// Richardson tableau for halving steps with an even error expansion that
/// starts at `h^STENCIL_ACCURACY`.
fn richardson<const K: usize>(levels: Vec<Vec<[f64; K]>>) -> Vec<[f64; K]> {
    let mut table = levels;
    let depth = table.len();
    for j in 1..depth {
        let e = (STENCIL_ACCURACY + 2 * (j - 1)) as i32;
        let factor = 2f64.powi(e) - 1.0;
        let mut next = Vec::with_capacity(depth - j);
        for l in 1..table.len() {
            let fine = &table[l];
            let coarse = &table[l - 1];
            next.push(
                fine.iter()
                    .zip(coarse)
                    .map(|(f, c)| std::array::from_fn(|q| f[q] + (f[q] - c[q]) / factor))
                    .collect::<Vec<_>>(),
            );
        }
        table = next;
    }
    table.pop().expect("at least one level")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_three_point() {
        let w = fornberg_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn stencil_sizes() {
        assert_eq!(central_stencil(1).len(), 9);
        assert_eq!(half_width(1), 4);
        assert_eq!(half_width(2), 4);
        assert_eq!(half_width(3), 5);
        assert_eq!(half_width(5), 6);
        assert_eq!(half_width(6), 6);
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        // accuracy 8 ⇒ exact for x^n with n < d + 8
        for d in 1..=6 {
            let st = central_stencil(d);
            for n in 0..(d + 8) {
                let approx: f64 = st.iter().map(|(k, w)| w * (*k as f64).powi(n as i32)).sum();
                let exact = if n == d { (1..=d).product::<usize>() as f64 } else { 0.0 };
                assert!((approx - exact).abs() < 1e-6, "d={d} n={n} {approx}");
            }
        }
    }
}
