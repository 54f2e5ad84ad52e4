use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

/// Univariate truncated Taylor polynomial `c0 + c1·ε + c2·ε² + c3·ε³`.
///
/// Used to obtain an activation and its first three derivatives from the same
/// generic definition that the forward pass uses.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet3 {
    pub c: [f64; 4],
}

impl Jet3 {
    /// The identity jet at `x`.
    pub const fn variable(x: f64) -> Self {
        Self { c: [x, 1.0, 0.0, 0.0] }
    }

    /// `[f, f', f'', f''']` at the expansion point.
    pub fn derivatives(&self) -> [f64; 4] {
        [self.c[0], self.c[1], 2.0 * self.c[2], 6.0 * self.c[3]]
    }
}

impl Add for Jet3 {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let a = self.c;
        Self { c: [a[0] + b.c[0], a[1] + b.c[1], a[2] + b.c[2], a[3] + b.c[3]] }
    }
}

impl Sub for Jet3 {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        let a = self.c;
        Self { c: [a[0] - b.c[0], a[1] - b.c[1], a[2] - b.c[2], a[3] - b.c[3]] }
    }
}

impl Mul for Jet3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.c, o.c);
        Self {
            c: [
                a[0] * b[0],
                a[0] * b[1] + a[1] * b[0],
                a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
                a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
            ],
        }
    }
}

impl Div for Jet3 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let (a, b) = (self.c, o.c);
        let q0 = a[0] / b[0];
        let q1 = (a[1] - q0 * b[1]) / b[0];
        let q2 = (a[2] - q0 * b[2] - q1 * b[1]) / b[0];
        let q3 = (a[3] - q0 * b[3] - q1 * b[2] - q2 * b[1]) / b[0];
        Self { c: [q0, q1, q2, q3] }
    }
}

impl Neg for Jet3 {
    type Output = Self;
    fn neg(self) -> Self {
        let a = self.c;
        Self { c: [-a[0], -a[1], -a[2], -a[3]] }
    }
}

impl Add<f64> for Jet3 {
    type Output = Self;
    fn add(mut self, b: f64) -> Self {
        self.c[0] += b;
        self
    }
}

impl Sub<f64> for Jet3 {
    type Output = Self;
    fn sub(mut self, b: f64) -> Self {
        self.c[0] -= b;
        self
    }
}

impl Mul<f64> for Jet3 {
    type Output = Self;
    fn mul(self, b: f64) -> Self {
        let a = self.c;
        Self { c: [a[0] * b, a[1] * b, a[2] * b, a[3] * b] }
    }
}

impl Div<f64> for Jet3 {
    type Output = Self;
    fn div(self, b: f64) -> Self {
        let a = self.c;
        Self { c: [a[0] / b, a[1] / b, a[2] / b, a[3] / b] }
    }
}

impl Scalar for Jet3 {
    fn value(&self) -> f64 {
        self.c[0]
    }

    fn chain(self, g: [f64; 4]) -> Self {
        let [_, c1, c2, c3] = self.c;
        Self {
            c: [
                g[0],
                g[1] * c1,
                g[1] * c2 + 0.5 * g[2] * c1 * c1,
                g[1] * c3 + g[2] * c1 * c2 + g[3] * c1 * c1 * c1 / 6.0,
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_third_derivative() {
        // f(x) = sin(x²): f''' = -12x sin(x²)·... check against closed form.
        let x = 0.7_f64;
        let j = Jet3::variable(x);
        let d = (j * j).sin().derivatives();
        let s = (x * x).sin();
        let c = (x * x).cos();
        let d1 = 2.0 * x * c;
        let d2 = 2.0 * c - 4.0 * x * x * s;
        let d3 = -12.0 * x * s - 8.0 * x * x * x * c;
        assert!((d[1] - d1).abs() < 1e-14);
        assert!((d[2] - d2).abs() < 1e-14);
        assert!((d[3] - d3).abs() < 1e-13);
    }
}
