#![allow(dead_code)]

use bach3_core::{Chart, Jet, MetricChart, MetricField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `diag(1, 1 + x₁², 1 + x₂²)` on `[-1, 1]³`; not conformally flat.
pub fn generic_metric() -> MetricChart {
    MetricChart::new(
        Chart::cartesian(1.0),
        MetricField::diagonal(|x| {
            let one = Jet::constant(1.0);
            [one, one + x[0].square(), one + x[1].square()]
        }),
    )
}

/// Smooth positive-definite metric `δ_ij + ε a_ij sin(b_ij·x + c_ij)` on
/// `[-1, 1]³` with coefficients drawn from `seed`.
pub fn random_metric(seed: u64) -> MetricChart {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = [[(0.0, [0.0; 3], 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let c = (
                rng.gen_range(-1.0..1.0),
                [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
                rng.gen_range(-3.0..3.0),
            );
            coeffs[i][j] = c;
            coeffs[j][i] = c;
        }
    }
    MetricChart::new(
        Chart::cartesian(1.0),
        MetricField::new(move |x| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let (a, b, c) = coeffs[i][j];
                    let phase = x[0] * b[0] + x[1] * b[1] + x[2] * b[2] + c;
                    let delta = if i == j { 1.0 } else { 0.0 };
                    phase.sin() * (0.2 * a) + delta
                })
            })
        }),
    )
}

/// Sample points well inside `[-1, 1]³`.
pub fn interior_points(seed: u64, n: usize) -> Vec<bach3_core::Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            bach3_core::Point::new(
                rng.gen_range(-0.7..0.7),
                rng.gen_range(-0.7..0.7),
                rng.gen_range(-0.7..0.7),
            )
        })
        .collect()
}
