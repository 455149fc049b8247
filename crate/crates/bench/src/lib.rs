//! Fixtures shared by the benchmarks.

use bach3_core::{Chart, Jet, MetricChart, MetricField, Point};

/// `diag(1, 1 + x₁², 1 + x₂²)` on `[-1, 1]³`, a metric with non-zero Cotton tensor.
pub fn generic_metric() -> MetricChart {
    MetricChart::new(
        Chart::cartesian(1.0),
        MetricField::diagonal(|x| {
            let one = Jet::constant(1.0);
            [one, one + x[0].square(), one + x[1].square()]
        }),
    )
}

pub fn sample_point() -> Point {
    Point::new(0.3, -0.2, 0.5)
}
