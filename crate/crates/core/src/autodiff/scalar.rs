use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type that model and operator code is written against.
///
/// Implemented by plain `f64`, [`HyperDual`](super::HyperDual),
/// [`Jet3`](super::Jet3) and tape variables [`Var`](super::Var). Every
/// elementary function is expressed through [`Scalar::chain`], which receives
/// the value and first three derivatives of the outer function at the current
/// real part; each implementor keeps as many as its algebra needs.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Real part.
    fn value(&self) -> f64;

    /// Apply a smooth unary function given `[f, f', f'', f''']` at `self.value()`.
    fn chain(self, derivs: [f64; 4]) -> Self;

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain([e, e, e, e])
    }

    fn ln(self) -> Self {
        let x = self.value();
        self.chain([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.chain([s, c, -s, -c])
    }

    fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.chain([c, -s, -c, s])
    }

    fn sinh(self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.chain([s, c, s, c])
    }

    fn cosh(self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.chain([c, s, c, s])
    }

    fn tanh(self) -> Self {
        let t = self.value().tanh();
        let d1 = 1.0 - t * t;
        let d2 = -2.0 * t * d1;
        let d3 = -2.0 * d1 * d1 + 4.0 * t * t * d1;
        self.chain([t, d1, d2, d3])
    }

    fn sqrt(self) -> Self {
        let x = self.value();
        let s = x.sqrt();
        self.chain([s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)])
    }

    fn recip(self) -> Self {
        let x = self.value();
        let r = 1.0 / x;
        self.chain([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    /// `self^p` for real `p`; requires a positive real part unless `p` is a
    /// non-negative integer, in which case prefer [`Scalar::powi`].
    fn powf(self, p: f64) -> Self {
        let x = self.value();
        let f = x.powf(p);
        self.chain([
            f,
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }

    fn powi(self, n: i32) -> Self {
        let x = self.value();
        let n_f = f64::from(n);
        let term = |k: i32, coeff: f64| {
            if n - k < 0 && x == 0.0 {
                0.0
            } else if coeff == 0.0 {
                0.0
            } else {
                coeff * x.powi(n - k)
            }
        };
        self.chain([
            x.powi(n),
            term(1, n_f),
            term(2, n_f * (n_f - 1.0)),
            term(3, n_f * (n_f - 1.0) * (n_f - 2.0)),
        ])
    }

    /// `max(self, 0)` with derivative 0 at the kink (left limit).
    fn relu(self) -> Self {
        if self.value() > 0.0 {
            self
        } else {
            self * 0.0
        }
    }

    fn sigmoid(self) -> Self {
        ((-self).exp() + 1.0).recip()
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn chain(self, derivs: [f64; 4]) -> Self {
        derivs[0]
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}
