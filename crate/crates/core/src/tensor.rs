//! Dense component arrays for tensors on a 3-dimensional chart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Position of a tensor index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    /// Contravariant (upper) index.
    Up,
    /// Covariant (lower) index.
    Down,
}

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

pub(crate) fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 3 + i)
}

pub(crate) fn unflatten(mut n: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for slot in (0..rank).rev() {
        out[slot] = n % 3;
        n /= 3;
    }
    out
}

fn pow3(rank: usize) -> usize {
    3usize.pow(rank as u32)
}

/// Component values of a rank-k tensor at a single point: `3^k` reals stored
/// row-major, with a variance flag per index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorComponents {
    variance: Vec<Variance>,
    entries: Vec<f64>,
}

impl TensorComponents {
    /// # Panics
    /// Panics if `entries.len() != 3^rank` or the rank exceeds 4.
    pub fn new(variance: Vec<Variance>, entries: Vec<f64>) -> Self {
        assert!(variance.len() <= 4, "rank above 4 is not supported");
        assert_eq!(entries.len(), pow3(variance.len()), "entry count must be 3^rank");
        TensorComponents { variance, entries }
    }

    pub fn zeros(variance: Vec<Variance>) -> Self {
        let n = pow3(variance.len());
        TensorComponents::new(variance, vec![0.0; n])
    }

    pub fn scalar(value: f64) -> Self {
        TensorComponents::new(Vec::new(), vec![value])
    }

    pub fn covariant(rank: usize, entries: Vec<f64>) -> Self {
        TensorComponents::new(vec![Variance::Down; rank], entries)
    }

    pub fn contravariant(rank: usize, entries: Vec<f64>) -> Self {
        TensorComponents::new(vec![Variance::Up; rank], entries)
    }

    pub fn from_matrix(variance: [Variance; 2], m: [[f64; 3]; 3]) -> Self {
        TensorComponents::new(variance.to_vec(), m.iter().flatten().copied().collect())
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.entries[flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        debug_assert_eq!(idx.len(), self.rank());
        self.entries[flat_index(idx)] = value;
    }

    /// Rank-2 components as a 3×3 array.
    pub fn as_matrix(&self) -> [[f64; 3]; 3] {
        assert_eq!(self.rank(), 2);
        let mut m = [[0.0; 3]; 3];
        for (n, v) in self.entries.iter().enumerate() {
            m[n / 3][n % 3] = *v;
        }
        m
    }

    /// Rank-1 components as an array.
    pub fn as_vector(&self) -> [f64; 3] {
        assert_eq!(self.rank(), 1);
        [self.entries[0], self.entries[1], self.entries[2]]
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise difference; both tensors must share variance.
    pub fn sub(&self, other: &TensorComponents) -> TensorComponents {
        assert_eq!(self.variance, other.variance);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        TensorComponents::new(self.variance.clone(), entries)
    }

    pub fn scale(&self, s: f64) -> TensorComponents {
        TensorComponents::new(
            self.variance.clone(),
            self.entries.iter().map(|v| v * s).collect(),
        )
    }

    /// Swaps the index slots `a` and `b`.
    pub fn transpose(&self, a: usize, b: usize) -> TensorComponents {
        let rank = self.rank();
        let mut variance = self.variance.clone();
        variance.swap(a, b);
        let mut out = TensorComponents::zeros(variance);
        for n in 0..self.entries.len() {
            let mut idx = unflatten(n, rank);
            idx.swap(a, b);
            out.entries[flat_index(&idx)] = self.entries[n];
        }
        out
    }

    /// Largest `|T(.., i, .., j, ..) − T(.., j, .., i, ..)|` over slots `a`, `b`.
    pub fn symmetry_defect(&self, a: usize, b: usize) -> f64 {
        self.sub(&self.transpose(a, b)).max_abs()
    }

    /// Largest `|T(.., i, .., j, ..) + T(.., j, .., i, ..)|` over slots `a`, `b`.
    pub fn antisymmetry_defect(&self, a: usize, b: usize) -> f64 {
        let t = self.transpose(a, b);
        self.entries
            .iter()
            .zip(&t.entries)
            .fold(0.0, |m, (x, y)| m.max((x + y).abs()))
    }

    /// Raises or lowers the index in `slot` with the supplied metric values.
    pub fn index_adjust(&self, slot: usize, metric: &MetricValues) -> Result<TensorComponents> {
        let rank = self.rank();
        if slot >= rank {
            return Err(Error::SlotOutOfRange { slot, rank });
        }
        let m = match self.variance[slot] {
            Variance::Down => &metric.g_inv,
            Variance::Up => &metric.g,
        };
        let mut variance = self.variance.clone();
        variance[slot] = variance[slot].flipped();
        let mut out = TensorComponents::zeros(variance);
        for n in 0..out.entries.len() {
            let idx = unflatten(n, rank);
            let mut src = idx.clone();
            let mut acc = 0.0;
            for k in 0..3 {
                src[slot] = k;
                acc += m[idx[slot]][k] * self.entries[flat_index(&src)];
            }
            out.entries[n] = acc;
        }
        Ok(out)
    }

    /// Full contraction of `self` with `other` after raising/lowering so
    /// that each index pairs one up with one down: `⟨S, T⟩_g`.
    pub fn inner(&self, other: &TensorComponents, metric: &MetricValues) -> f64 {
        assert_eq!(self.rank(), other.rank());
        let mut other = other.clone();
        for slot in 0..self.rank() {
            if other.variance[slot] == self.variance[slot] {
                other = other
                    .index_adjust(slot, metric)
                    .expect("slot is in range by construction");
            }
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Metric norm `sqrt(⟨T, T⟩_g)`.
    pub fn norm(&self, metric: &MetricValues) -> f64 {
        self.inner(self, metric).max(0.0).sqrt()
    }
}

/// Metric, inverse metric and determinant at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricValues {
    pub g: [[f64; 3]; 3],
    pub g_inv: [[f64; 3]; 3],
    pub det: f64,
}

impl MetricValues {
    pub fn metric(&self) -> TensorComponents {
        TensorComponents::from_matrix([Variance::Down; 2], self.g)
    }

    pub fn inverse(&self) -> TensorComponents {
        TensorComponents::from_matrix([Variance::Up; 2], self.g_inv)
    }
}

/// A tensor whose components are Taylor jets of a field about a point.
#[derive(Clone, Debug)]
pub(crate) struct JetTensor {
    pub variance: Vec<Variance>,
    pub data: Vec<Jet>,
}

impl JetTensor {
    pub fn new(variance: Vec<Variance>, data: Vec<Jet>) -> Self {
        assert_eq!(data.len(), pow3(variance.len()));
        JetTensor { variance, data }
    }

    pub fn covariant(rank: usize, data: Vec<Jet>) -> Self {
        JetTensor::new(vec![Variance::Down; rank], data)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> Jet {
        self.data[flat_index(idx)]
    }

    pub fn values(&self) -> TensorComponents {
        TensorComponents::new(
            self.variance.clone(),
            self.data.iter().map(Jet::value).collect(),
        )
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn build(variance: Vec<Variance>, f: impl Fn(&[usize]) -> Jet) -> JetTensor {
        let rank = variance.len();
        let data = (0..pow3(rank)).map(|n| f(&unflatten(n, rank))).collect();
        JetTensor::new(variance, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_metric() -> MetricValues {
        let g = [[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 1.5]];
        let m = nalgebra::Matrix3::from_row_slice(&g.concat());
        let inv = m.try_inverse().unwrap();
        let mut g_inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g_inv[i][j] = inv[(i, j)];
            }
        }
        MetricValues {
            g,
            g_inv,
            det: m.determinant(),
        }
    }

    #[test]
    fn flat_metric_raising_is_identity() {
        let flat = MetricValues {
            g: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            g_inv: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            det: 1.0,
        };
        let w = TensorComponents::covariant(1, vec![1.0, -2.0, 3.5]);
        let up = w.index_adjust(0, &flat).unwrap();
        assert_eq!(up.entries(), w.entries());
        assert_eq!(up.variance(), &[Variance::Up]);
    }

    #[test]
    fn raise_then_lower_round_trips() {
        let metric = sample_metric();
        let t = TensorComponents::covariant(3, (0..27).map(|k| (k as f64 * 0.37).sin()).collect());
        let back = t
            .index_adjust(1, &metric)
            .unwrap()
            .index_adjust(1, &metric)
            .unwrap();
        assert!(back.sub(&t).max_abs() <= 1e-12);
    }

    #[test]
    fn slot_out_of_range() {
        let metric = sample_metric();
        let t = TensorComponents::covariant(1, vec![0.0; 3]);
        assert_eq!(
            t.index_adjust(1, &metric),
            Err(Error::SlotOutOfRange { slot: 1, rank: 1 })
        );
    }

    #[test]
    #[should_panic(expected = "3^rank")]
    fn entry_count_is_enforced() {
        TensorComponents::covariant(2, vec![0.0; 8]);
    }

    #[test]
    fn transpose_and_symmetry() {
        let t = TensorComponents::from_matrix([Variance::Down; 2], [[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]);
        assert_eq!(t.symmetry_defect(0, 1), 0.0);
        let a = TensorComponents::from_matrix([Variance::Down; 2], [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!(a.antisymmetry_defect(0, 1), 0.0);
        assert_eq!(a.symmetry_defect(0, 1), 2.0);
    }

    #[test]
    fn norm_uses_the_metric() {
        let metric = sample_metric();
        let v = TensorComponents::contravariant(1, vec![1.0, 0.0, 0.0]);
        assert!((v.norm(&metric) - 2f64.sqrt()).abs() < 1e-15);
    }
}
