use serde::{Deserialize, Serialize};

use super::{hd_eval_many, AutodiffError, HyperDual};

/// How many derivative orders a [`FieldJet`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetOrder {
    Value,
    Gradient,
    Laplacian,
}

impl JetOrder {
    /// Number of stored channels per output for `dims` differentiated inputs.
    pub fn channels(self, dims: usize) -> usize {
        match self {
            JetOrder::Value => 1,
            JetOrder::Gradient => 1 + dims,
            JetOrder::Laplacian => 1 + 2 * dims,
        }
    }
}

/// Values, gradients and diagonal second derivatives of a vector field at one
/// point, with respect to the leading `dims` input coordinates.
///
/// `grad[o * dims + k]` is `∂f_o/∂x_k`, `diag[o * dims + k]` is `∂²f_o/∂x_k²`.
/// Fields absent at the chosen order are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet<T> {
    pub dims: usize,
    pub order: JetOrder,
    pub value: Vec<T>,
    pub grad: Vec<T>,
    pub diag: Vec<T>,
}

impl<T: Copy> FieldJet<T> {
    pub fn outputs(&self) -> usize {
        self.value.len()
    }

    pub fn d(&self, output: usize, k: usize) -> T {
        self.grad[output * self.dims + k]
    }

    pub fn dd(&self, output: usize, k: usize) -> T {
        self.diag[output * self.dims + k]
    }

    /// Apply `f` to every stored entry.
    pub fn map<U, F: FnMut(T) -> U>(&self, mut f: F) -> FieldJet<U> {
        FieldJet {
            dims: self.dims,
            order: self.order,
            value: self.value.iter().map(|&v| f(v)).collect(),
            grad: self.grad.iter().map(|&v| f(v)).collect(),
            diag: self.diag.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: Copy + std::ops::Add<Output = T>> FieldJet<T> {
    /// Sum of diagonal second derivatives of output `o`.
    pub fn laplacian(&self, o: usize) -> T {
        let row = &self.diag[o * self.dims..(o + 1) * self.dims];
        let mut acc = row[0];
        for &v in &row[1..] {
            acc = acc + v;
        }
        acc
    }
}

impl FieldJet<f64> {
    /// Build a jet of an arbitrary field by hyper-dual passes (one pass per
    /// differentiated coordinate).
    pub fn from_field<F>(f: F, x: &[f64], dims: usize, order: JetOrder) -> Result<Self, AutodiffError>
    where
        F: Fn(&[HyperDual]) -> Vec<HyperDual>,
    {
        let value: Vec<f64> = f(&HyperDual::seed(x, usize::MAX, usize::MAX))
            .iter()
            .map(|h| h.re)
            .collect();
        let n_out = value.len();
        let mut jet = FieldJet {
            dims,
            order,
            value,
            grad: Vec::new(),
            diag: Vec::new(),
        };
        if order == JetOrder::Value {
            return Ok(jet);
        }
        jet.grad = vec![0.0; n_out * dims];
        if order == JetOrder::Laplacian {
            jet.diag = vec![0.0; n_out * dims];
        }
        for k in 0..dims {
            let outs = hd_eval_many(&f, x, k, k)?;
            for (o, h) in outs.iter().enumerate() {
                jet.grad[o * dims + k] = h.d1;
                if order == JetOrder::Laplacian {
                    jet.diag[o * dims + k] = h.d12;
                }
            }
        }
        Ok(jet)
    }
}
