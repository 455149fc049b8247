//! Truncated multivariate Taylor arithmetic in three variables.
//!
//! A [`Jet`] stores the Taylor coefficients `c_m = ∂^m u / m!` of a scalar
//! quantity `u` about a base point, for every multi-index `m = (a, b, c)` of
//! total degree at most its order (≤ [`MAX_ORDER`]). Arithmetic on jets is
//! exact truncated power-series arithmetic, so evaluating a closed-form field
//! on seeded coordinate jets yields all its mixed partials through the order
//! to machine precision (nested forward-mode differentiation).
//!
//! Coefficients are laid out in graded order: all degree-0 terms, then
//! degree 1, and so on. Within a degree, `a` descends first, then `b`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 6;

/// Number of monomials of degree ≤ [`MAX_ORDER`] in three variables.
pub const NUM_COEFFS: usize = 84;

const NUM_PRODUCTS: usize = 924;

const fn degree_offsets() -> [usize; MAX_ORDER + 2] {
    let mut out = [0usize; MAX_ORDER + 2];
    let mut d = 0;
    while d <= MAX_ORDER {
        out[d + 1] = out[d] + (d + 1) * (d + 2) / 2;
        d += 1;
    }
    out
}

/// `OFFSETS[d]` is the number of monomials of degree `< d`.
const OFFSETS: [usize; MAX_ORDER + 2] = degree_offsets();

const fn build_monomials() -> [[u8; 3]; NUM_COEFFS] {
    let mut out = [[0u8; 3]; NUM_COEFFS];
    let mut n = 0;
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut a = d as i32;
        while a >= 0 {
            let mut b = d as i32 - a;
            while b >= 0 {
                let c = d as i32 - a - b;
                out[n] = [a as u8, b as u8, c as u8];
                n += 1;
                b -= 1;
            }
            a -= 1;
        }
        d += 1;
    }
    out
}

const MONOMIALS: [[u8; 3]; NUM_COEFFS] = build_monomials();

const fn build_index() -> [[[u8; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1] {
    let mut out = [[[u8::MAX; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1];
    let mut n = 0;
    while n < NUM_COEFFS {
        let m = MONOMIALS[n];
        out[m[0] as usize][m[1] as usize][m[2] as usize] = n as u8;
        n += 1;
    }
    out
}

const INDEX: [[[u8; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1] = build_index();

const fn monomial_degree(n: usize) -> usize {
    let m = MONOMIALS[n];
    (m[0] + m[1] + m[2]) as usize
}

/// Product table `(i, j, k)` with `x^i · x^j = x^k`, grouped by degree of `k`.
const fn build_products() -> ([[u8; 3]; NUM_PRODUCTS], [usize; MAX_ORDER + 1]) {
    let mut table = [[0u8; 3]; NUM_PRODUCTS];
    let mut counts = [0usize; MAX_ORDER + 1];
    let mut n = 0;
    let mut s = 0;
    while s <= MAX_ORDER {
        let mut i = 0;
        while i < OFFSETS[s + 1] {
            let di = monomial_degree(i);
            let dj = s - di;
            let mut j = OFFSETS[dj];
            while j < OFFSETS[dj + 1] {
                let a = MONOMIALS[i];
                let b = MONOMIALS[j];
                let k = INDEX[(a[0] + b[0]) as usize][(a[1] + b[1]) as usize]
                    [(a[2] + b[2]) as usize];
                table[n] = [i as u8, j as u8, k];
                n += 1;
                j += 1;
            }
            i += 1;
        }
        counts[s] = n;
        s += 1;
    }
    (table, counts)
}

const PRODUCTS: ([[u8; 3]; NUM_PRODUCTS], [usize; MAX_ORDER + 1]) = build_products();

const FACTORIALS: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Number of coefficients carried by a jet of the given order.
pub fn coeff_count(order: usize) -> usize {
    OFFSETS[order + 1]
}

/// Iterates over the multi-indices of total degree ≤ `order`, in storage order.
pub fn multi_indices(order: usize) -> impl Iterator<Item = [usize; 3]> {
    MONOMIALS[..coeff_count(order)]
        .iter()
        .map(|m| [m[0] as usize, m[1] as usize, m[2] as usize])
}

fn index_of(m: [usize; 3]) -> usize {
    INDEX[m[0]][m[1]][m[2]] as usize
}

/// A truncated Taylor expansion in three variables.
#[derive(Clone, Copy)]
pub struct Jet {
    c: [f64; NUM_COEFFS],
    order: u8,
}

impl Jet {
    /// An exact constant; it combines with jets of any order.
    pub fn constant(value: f64) -> Self {
        let mut c = [0.0; NUM_COEFFS];
        c[0] = value;
        Jet {
            c,
            order: MAX_ORDER as u8,
        }
    }

    /// The coordinate function `x_axis` expanded about `value` to `order`.
    pub fn variable(value: f64, axis: usize, order: usize) -> Self {
        assert!(axis < 3 && order <= MAX_ORDER);
        let mut c = [0.0; NUM_COEFFS];
        c[0] = value;
        if order >= 1 {
            let mut m = [0; 3];
            m[axis] = 1;
            c[index_of(m)] = 1.0;
        }
        Jet {
            c,
            order: order as u8,
        }
    }

    /// Builds a jet from its Taylor coefficients (graded storage order).
    pub fn from_coefficients(order: usize, coeffs: &[f64]) -> Self {
        assert!(order <= MAX_ORDER && coeffs.len() == coeff_count(order));
        let mut c = [0.0; NUM_COEFFS];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet {
            c,
            order: order as u8,
        }
    }

    pub fn zero() -> Self {
        Jet::constant(0.0)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c[..coeff_count(self.order())]
    }

    /// Taylor coefficient `∂^m u / m!`; zero beyond the carried order.
    pub fn coefficient(&self, m: [usize; 3]) -> f64 {
        if m.iter().sum::<usize>() > self.order() {
            return 0.0;
        }
        self.c[index_of(m)]
    }

    /// The mixed partial derivative `∂^m u` at the base point.
    ///
    /// Returns `None` when the total order exceeds what the jet carries.
    pub fn derivative(&self, m: [usize; 3]) -> Option<f64> {
        if m.iter().sum::<usize>() > self.order() {
            return None;
        }
        let scale: f64 = m.iter().map(|&k| FACTORIALS[k]).product();
        Some(self.c[index_of(m)] * scale)
    }

    /// Drops every term above `order`.
    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order());
        for v in &mut self.c[coeff_count(order)..] {
            *v = 0.0;
        }
        self.order = order as u8;
        self
    }

    /// The partial derivative `∂u/∂x_axis` as a jet one order lower.
    ///
    /// # Panics
    /// Panics on an order-0 jet, which carries no derivative information.
    pub fn partial(&self, axis: usize) -> Self {
        let order = self.order();
        assert!(order >= 1, "cannot differentiate an order-0 jet");
        let mut c = [0.0; NUM_COEFFS];
        for (n, m) in MONOMIALS[..coeff_count(order - 1)].iter().enumerate() {
            let mut up = [m[0] as usize, m[1] as usize, m[2] as usize];
            up[axis] += 1;
            c[n] = up[axis] as f64 * self.c[index_of(up)];
        }
        Jet {
            c,
            order: (order - 1) as u8,
        }
    }

    /// Gradient as three jets one order lower.
    pub fn gradient(&self) -> [Jet; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    /// Applies a univariate function given its Taylor coefficients about the
    /// base value: `g(u) = Σ t_k (u − u₀)^k`. Needs `taylor.len() > order`.
    pub fn compose(&self, taylor: &[f64]) -> Self {
        let order = self.order();
        debug_assert!(taylor.len() > order);
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet::constant(taylor[order]);
        out.order = self.order;
        for k in (0..order).rev() {
            out *= h;
            out.c[0] += taylor[k];
        }
        out
    }

    fn taylor_with<F: Fn(usize) -> f64>(&self, coeff: F) -> Self {
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, v) in t.iter_mut().enumerate().take(self.order() + 1) {
            *v = coeff(k);
        }
        self.compose(&t)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.taylor_with(|k| e / FACTORIALS[k])
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        self.taylor_with(|k| {
            if k == 0 {
                a.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign / (k as f64 * a.powi(k as i32))
            }
        })
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.taylor_with(|k| cycle[k % 4] / FACTORIALS[k])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.taylor_with(|k| cycle[k % 4] / FACTORIALS[k])
    }

    pub fn sinh(&self) -> Self {
        let a = self.value();
        let cycle = [a.sinh(), a.cosh()];
        self.taylor_with(|k| cycle[k % 2] / FACTORIALS[k])
    }

    pub fn cosh(&self) -> Self {
        let a = self.value();
        let cycle = [a.cosh(), a.sinh()];
        self.taylor_with(|k| cycle[k % 2] / FACTORIALS[k])
    }

    /// Real power `u^p`; the base value must be positive unless `p` is integral.
    pub fn powf(&self, p: f64) -> Self {
        let a = self.value();
        self.taylor_with(|k| {
            let mut binom = 1.0;
            for i in 0..k {
                binom *= (p - i as f64) / (i + 1) as f64;
            }
            binom * a.powf(p - k as f64)
        })
    }

    pub fn powi(&self, n: i32) -> Self {
        if n >= 0 && (n as usize) <= 4 {
            let mut out = Jet::constant(1.0);
            for _ in 0..n {
                out *= *self;
            }
            return out;
        }
        let a = self.value();
        self.taylor_with(|k| {
            let mut binom = 1.0;
            for i in 0..k {
                binom *= (n as f64 - i as f64) / (i + 1) as f64;
            }
            binom * a.powi(n - k as i32)
        })
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        self.taylor_with(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / a.powi(k as i32 + 1)
        })
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    /// Largest absolute Taylor coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coefficients().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::zero()
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coefficients", &self.coefficients())
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coefficients() == other.coefficients()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        for n in 0..coeff_count(order as usize) {
            self.c[n] += rhs.c[n];
        }
        self.truncate(order as usize)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        for n in 0..coeff_count(order as usize) {
            self.c[n] -= rhs.c[n];
        }
        self.truncate(order as usize)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut c = [0.0; NUM_COEFFS];
        for &[i, j, k] in &PRODUCTS.0[..PRODUCTS.1[order]] {
            c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        Jet {
            c,
            order: order as u8,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in &mut self.c {
            *v = -*v;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for v in &mut self.c {
            *v *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Jet {
        self * rhs.recip()
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        *self = *self * rhs;
    }
}

impl Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(p: [f64; 3], order: usize) -> [Jet; 3] {
        [
            Jet::variable(p[0], 0, order),
            Jet::variable(p[1], 1, order),
            Jet::variable(p[2], 2, order),
        ]
    }

    #[test]
    fn tables_are_consistent() {
        assert_eq!(OFFSETS[MAX_ORDER + 1], NUM_COEFFS);
        assert_eq!(PRODUCTS.1[MAX_ORDER], NUM_PRODUCTS);
        for (n, m) in MONOMIALS.iter().enumerate() {
            assert_eq!(index_of([m[0] as usize, m[1] as usize, m[2] as usize]), n);
        }
    }

    #[test]
    fn polynomial_derivatives() {
        let [x, _, _] = seeds([1.0, 0.0, 0.0], 3);
        let u = x * x;
        assert_eq!(u.derivative([1, 0, 0]), Some(2.0));
        assert_eq!(u.derivative([2, 0, 0]), Some(2.0));
        assert_eq!(u.derivative([3, 0, 0]), Some(0.0));
        assert_eq!(u.derivative([4, 0, 0]), None);
    }

    #[test]
    fn sine_of_scaled_coordinate() {
        let [x, _, _] = seeds([1.0, 0.0, 0.0], 4);
        let u = (x * 0.5).sin();
        assert!((u.derivative([1, 0, 0]).unwrap() - 0.5 * 0.5f64.cos()).abs() < 1e-15);
        assert!((u.derivative([2, 0, 0]).unwrap() + 0.25 * 0.5f64.sin()).abs() < 1e-15);
        assert!((u.derivative([4, 0, 0]).unwrap() - 0.0625 * 0.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn mixed_partials_of_product() {
        // u = x² y³ z at (1, 2, 3): ∂x∂y∂z u = 2x·3y² = 24
        let [x, y, z] = seeds([1.0, 2.0, 3.0], 6);
        let u = x.powi(2) * y.powi(3) * z;
        assert!((u.derivative([1, 1, 1]).unwrap() - 24.0).abs() < 1e-12);
        // ∂x²∂y³∂z u = 2·6 = 12
        assert!((u.derivative([2, 3, 1]).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn transcendental_identities() {
        let [x, y, z] = seeds([0.3, -0.7, 1.1], 6);
        let u = x * y + z.sin() + 2.0;
        let one = u.sin().square() + u.cos().square();
        assert!((one - Jet::constant(1.0)).max_abs() < 1e-13);
        let back = u.exp().ln() - u;
        assert!(back.max_abs() < 1e-12);
        let r = u.sqrt().square() - u;
        assert!(r.max_abs() < 1e-12);
        let q = u * u.recip() - 1.0;
        assert!(q.max_abs() < 1e-13);
        let h = u.cosh().square() - u.sinh().square() - 1.0;
        assert!(h.max_abs() < 1e-10);
        let p = u.powf(1.5) * u.powf(-0.5) - u;
        assert!(p.max_abs() < 1e-12);
        let n = u.powi(-3) * u.powi(3) - 1.0;
        assert!(n.max_abs() < 1e-12);
    }

    #[test]
    fn partial_matches_seeded_derivative() {
        let [x, y, z] = seeds([0.4, 0.2, -0.5], 5);
        let u = (x * y).exp() * (z + 2.0).ln();
        let ux = u.partial(0);
        for m in multi_indices(4) {
            let mut up = m;
            up[0] += 1;
            let a = ux.derivative(m).unwrap();
            let b = u.derivative(up).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{m:?}");
        }
    }

    #[test]
    fn constants_adopt_the_other_order() {
        let x = Jet::variable(2.0, 0, 2);
        let u = Jet::constant(3.0) * x;
        assert_eq!(u.order(), 2);
        assert_eq!(u.derivative([1, 0, 0]), Some(3.0));
    }
}
