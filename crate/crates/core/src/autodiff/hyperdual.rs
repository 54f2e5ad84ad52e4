use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

/// Hyper-dual number `re + e1·ε₁ + e2·ε₂ + e12·ε₁ε₂` with `ε₁² = ε₂² = 0`.
///
/// Seeding `e1` along coordinate `j` and `e2` along coordinate `k` makes `e12`
/// carry `∂²f/∂x_j∂x_k` after evaluation, exactly (no truncation error).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl HyperDual {
    pub const fn new(re: f64, e1: f64, e2: f64, e12: f64) -> Self {
        Self { re, e1, e2, e12 }
    }

    pub const fn constant(re: f64) -> Self {
        Self::new(re, 0.0, 0.0, 0.0)
    }

    /// Seed a point for differentiation along coordinates `dir1` and `dir2`.
    pub fn seed(x: &[f64], dir1: usize, dir2: usize) -> Vec<Self> {
        x.iter()
            .enumerate()
            .map(|(k, &v)| {
                Self::new(
                    v,
                    if k == dir1 { 1.0 } else { 0.0 },
                    if k == dir2 { 1.0 } else { 0.0 },
                    0.0,
                )
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.e1.is_finite() && self.e2.is_finite() && self.e12.is_finite()
    }
}

impl From<f64> for HyperDual {
    fn from(re: f64) -> Self {
        Self::constant(re)
    }
}

impl Add for HyperDual {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        Self::new(self.re + b.re, self.e1 + b.e1, self.e2 + b.e2, self.e12 + b.e12)
    }
}

impl Sub for HyperDual {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        Self::new(self.re - b.re, self.e1 - b.e1, self.e2 - b.e2, self.e12 - b.e12)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        Self::new(
            self.re * b.re,
            self.re * b.e1 + self.e1 * b.re,
            self.re * b.e2 + self.e2 * b.re,
            self.re * b.e12 + self.e1 * b.e2 + self.e2 * b.e1 + self.e12 * b.re,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q = self.re / b.re;
        let e1 = (self.e1 - q * b.e1) / b.re;
        let e2 = (self.e2 - q * b.e2) / b.re;
        let e12 = (self.e12 - q * b.e12 - e1 * b.e2 - e2 * b.e1) / b.re;
        Self::new(q, e1, e2, e12)
    }
}

impl Neg for HyperDual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn add(self, b: f64) -> Self {
        Self::new(self.re + b, self.e1, self.e2, self.e12)
    }
}

impl Sub<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn sub(self, b: f64) -> Self {
        Self::new(self.re - b, self.e1, self.e2, self.e12)
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn mul(self, b: f64) -> Self {
        Self::new(self.re * b, self.e1 * b, self.e2 * b, self.e12 * b)
    }
}

impl Div<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn div(self, b: f64) -> Self {
        Self::new(self.re / b, self.e1 / b, self.e2 / b, self.e12 / b)
    }
}

impl Scalar for HyperDual {
    #[inline]
    fn value(&self) -> f64 {
        self.re
    }

    #[inline]
    fn chain(self, d: [f64; 4]) -> Self {
        Self::new(
            d[0],
            d[1] * self.e1,
            d[1] * self.e2,
            d[1] * self.e12 + d[2] * self.e1 * self.e2,
        )
    }
}
