//! Fully connected networks with a linear output layer.
//!
//! Parameters live in one flat vector. For each layer in order, the weight
//! matrix is stored row-major (`W[o * n_in + i]`, one row per output unit)
//! followed immediately by that layer's bias vector.

mod adam;
mod jet;

pub use adam::AdamState;
pub use jet::{JetCache, JetWorkspace};

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Jet3, Scalar, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlpError {
    #[error("layer list is empty")]
    EmptyLayers,
    #[error("network needs at least one hidden layer, got sizes {0:?}")]
    NoHiddenLayer(Vec<usize>),
    #[error("layer sizes must be >= 1, got {0:?}")]
    ZeroLayerSize(Vec<usize>),
    #[error("input has dimension {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter vector has length {got}, network expects {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("non-finite gradient component {index} at optimizer step {step}")]
    NonFiniteGradient { index: usize, step: u64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Hidden-layer nonlinearity.
///
/// `Identity` is not a modelling choice; it exists for linear baselines in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sin,
    Swish,
    Softplus,
    Gelu,
    Relu,
    Identity,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

impl Activation {
    pub const ALL: [Activation; 6] = [
        Activation::Tanh,
        Activation::Sin,
        Activation::Swish,
        Activation::Softplus,
        Activation::Gelu,
        Activation::Relu,
    ];

    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sin => x.sin(),
            Activation::Swish => x * x.sigmoid(),
            Activation::Softplus => {
                if x.value() > 30.0 {
                    x
                } else {
                    (x.exp() + 1.0).ln()
                }
            }
            Activation::Gelu => {
                let inner = (x + x * x * x * GELU_A) * GELU_C;
                x * (inner.tanh() + 1.0) * 0.5
            }
            Activation::Relu => x.relu(),
            Activation::Identity => x,
        }
    }

    /// `[σ, σ', σ'', σ''']` at `z`.
    pub fn derivatives(self, z: f64) -> [f64; 4] {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                let d1 = 1.0 - t * t;
                [t, d1, -2.0 * t * d1, -2.0 * d1 * d1 + 4.0 * t * t * d1]
            }
            Activation::Identity => [z, 1.0, 0.0, 0.0],
            _ => self.apply(Jet3::variable(z)).derivatives(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sin => "sin",
            Activation::Swish => "swish",
            Activation::Softplus => "softplus",
            Activation::Gelu => "gelu",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .chain(std::iter::once(&Activation::Identity))
            .copied()
            .find(|a| a.tag() == s)
            .ok_or_else(|| format!("unknown activation '{s}'"))
    }
}

/// Offsets of one affine layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerView {
    pub n_in: usize,
    pub n_out: usize,
    pub w: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
    pub params: Vec<f64>,
    #[serde(skip)]
    layers: Vec<LayerView>,
}

fn layer_views(sizes: &[usize]) -> Vec<LayerView> {
    let mut off = 0;
    sizes
        .windows(2)
        .map(|w| {
            let v = LayerView { n_in: w[0], n_out: w[1], w: off, b: off + w[0] * w[1] };
            off += w[0] * w[1] + w[1];
            v
        })
        .collect()
}

/// `Σ (n_in·n_out + n_out)` over consecutive layer pairs.
pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn validate_sizes(sizes: &[usize]) -> Result<(), MlpError> {
    if sizes.is_empty() {
        return Err(MlpError::EmptyLayers);
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(MlpError::ZeroLayerSize(sizes.to_vec()));
    }
    if sizes.len() < 3 {
        return Err(MlpError::NoHiddenLayer(sizes.to_vec()));
    }
    Ok(())
}

impl MlpModel {
    /// Xavier-uniform weights (bound `sqrt(6/(n_in+n_out))`), zero biases.
    pub fn init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self, MlpError> {
        validate_sizes(layer_sizes)?;
        let layers = layer_views(layer_sizes);
        let mut params = vec![0.0; param_count(layer_sizes)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &layers {
            let bound = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for w in &mut params[l.w..l.b] {
                *w = dist.sample(&mut rng);
            }
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            seed,
            params,
            layers,
        })
    }

    /// Build from explicit parameters. Unlike [`MlpModel::init`] this accepts a
    /// network without hidden layers (a single affine map).
    pub fn from_params(
        layer_sizes: &[usize],
        activation: Activation,
        params: Vec<f64>,
    ) -> Result<Self, MlpError> {
        if layer_sizes.len() < 2 {
            return Err(MlpError::EmptyLayers);
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(MlpError::ZeroLayerSize(layer_sizes.to_vec()));
        }
        let expected = param_count(layer_sizes);
        if params.len() != expected {
            return Err(MlpError::ParamLength { expected, got: params.len() });
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            seed: 0,
            params,
            layers: layer_views(layer_sizes),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn layers(&self) -> &[LayerView] {
        &self.layers
    }

    fn check_input(&self, got: usize) -> Result<(), MlpError> {
        if got != self.input_dim() {
            return Err(MlpError::DimensionMismatch { expected: self.input_dim(), got });
        }
        Ok(())
    }

    /// Forward pass over any scalar type; parameters enter as constants.
    pub fn forward<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>, MlpError> {
        self.check_input(x.len())?;
        let last = self.layers.len() - 1;
        let mut a: Vec<T> = x.to_vec();
        for (li, l) in self.layers.iter().enumerate() {
            let w = &self.params[l.w..l.b];
            let b = &self.params[l.b..l.b + l.n_out];
            let mut z = Vec::with_capacity(l.n_out);
            for o in 0..l.n_out {
                let row = &w[o * l.n_in..(o + 1) * l.n_in];
                let mut acc = a[0] * row[0];
                for i in 1..l.n_in {
                    acc = acc + a[i] * row[i];
                }
                acc = acc + b[o];
                z.push(if li < last { self.activation.apply(acc) } else { acc });
            }
            a = z;
        }
        Ok(a)
    }

    /// Forward pass with the parameters recorded as tape variables.
    pub fn forward_on_tape<'t>(&self, params: &[Var<'t>], x: &[f64]) -> Result<Vec<Var<'t>>, MlpError> {
        self.check_input(x.len())?;
        if params.len() != self.params.len() {
            return Err(MlpError::ParamLength { expected: self.params.len(), got: params.len() });
        }
        let last = self.layers.len() - 1;
        let mut a: Vec<Var<'t>> = Vec::new();
        for (li, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(l.n_out);
            for o in 0..l.n_out {
                let row = &params[l.w + o * l.n_in..l.w + (o + 1) * l.n_in];
                let mut acc = params[l.b + o];
                for i in 0..l.n_in {
                    let term = if li == 0 { row[i] * x[i] } else { a[i] * row[i] };
                    acc = acc + term;
                }
                z.push(if li < last { self.activation.apply(acc) } else { acc });
            }
            a = z;
        }
        Ok(a)
    }

    /// Plain `f64` evaluation.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        self.forward(x)
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), MlpError> {
        if params.len() != self.params.len() {
            return Err(MlpError::ParamLength { expected: self.params.len(), got: params.len() });
        }
        self.params = params;
        Ok(())
    }

    /// Zero the output layer so the network starts as the zero function.
    pub fn zero_output_layer(&mut self) {
        let l = *self.layers.last().unwrap();
        for p in &mut self.params[l.w..l.b + l.n_out] {
            *p = 0.0;
        }
    }

    /// Checkpoint as JSON text (shortest round-trip float formatting).
    pub fn to_checkpoint(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, MlpError> {
        let mut m: MlpModel =
            serde_json::from_str(text).map_err(|e| MlpError::Checkpoint(e.to_string()))?;
        if m.layer_sizes.len() < 2 || m.layer_sizes.iter().any(|&s| s == 0) {
            return Err(MlpError::Checkpoint(format!("bad layer sizes {:?}", m.layer_sizes)));
        }
        let expected = param_count(&m.layer_sizes);
        if m.params.len() != expected {
            return Err(MlpError::ParamLength { expected, got: m.params.len() });
        }
        m.layers = layer_views(&m.layer_sizes);
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{grad_params, laplacian, HyperDual};

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = MlpModel::init(&[3, 8, 1], Activation::Tanh, 42).unwrap();
        let b = MlpModel::init(&[3, 8, 1], Activation::Tanh, 42).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.param_count(), 3 * 8 + 8 + 8 + 1);
        for l in a.layers() {
            assert!(a.params[l.b..l.b + l.n_out].iter().all(|&v| v == 0.0));
        }
        // First layer (3→8) is bounded by sqrt(6/11); every layer by its own rule.
        let first = a.layers()[0];
        assert!(a.params[first.w..first.b].iter().all(|w| w.abs() <= (6.0_f64 / 11.0).sqrt()));
        for l in a.layers() {
            let bound = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            assert!(a.params[l.w..l.b].iter().all(|w| w.abs() <= bound));
        }
        let c = MlpModel::init(&[3, 8, 1], Activation::Tanh, 43).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn init_rejects_bad_shapes() {
        assert_eq!(MlpModel::init(&[], Activation::Tanh, 0), Err(MlpError::EmptyLayers));
        assert!(matches!(MlpModel::init(&[2, 1], Activation::Tanh, 0), Err(MlpError::NoHiddenLayer(_))));
        assert!(matches!(MlpModel::init(&[2, 0, 1], Activation::Tanh, 0), Err(MlpError::ZeroLayerSize(_))));
    }

    #[test]
    fn zero_params_give_zero_output() {
        let mut m = MlpModel::init(&[2, 5, 1], Activation::Tanh, 1).unwrap();
        m.params.iter_mut().for_each(|p| *p = 0.0);
        assert_eq!(m.predict(&[0.3, -2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn single_affine_layer() {
        let m = MlpModel::from_params(&[1, 1], Activation::Tanh, vec![2.0, 1.0]).unwrap();
        assert_eq!(m.predict(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let m = MlpModel::init(&[2, 4, 1], Activation::Tanh, 1).unwrap();
        assert_eq!(
            m.predict(&[1.0]),
            Err(MlpError::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn hyperdual_real_part_is_bitwise_plain_forward() {
        for act in Activation::ALL {
            let m = MlpModel::init(&[2, 16, 1], act, 9).unwrap();
            for p in [[0.3, -0.8], [1.7, 2.2], [-3.0, 0.01]] {
                let plain = m.predict(&p).unwrap()[0];
                let hd = m.forward(&HyperDual::seed(&p, 0, 1)).unwrap()[0];
                assert_eq!(plain.to_bits(), hd.re.to_bits(), "{act}");
            }
        }
    }

    #[test]
    fn identity_network_is_harmonic() {
        let m = MlpModel::init(&[3, 6, 1], Activation::Identity, 5).unwrap();
        let l = laplacian(|x| m.forward(x).unwrap()[0], &[0.2, -0.4, 0.9]).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn activation_derivatives_match_hyperdual() {
        for act in Activation::ALL {
            for z in [-2.3, -0.4, 0.35, 1.9] {
                let d = act.derivatives(z);
                let h = crate::autodiff::hd_eval(|x| act.apply(x[0]), &[z], 0, 0).unwrap();
                assert!((d[0] - h.value).abs() < 1e-15);
                assert!((d[1] - h.d1).abs() < 1e-14, "{act} d1");
                assert!((d[2] - h.d12).abs() < 1e-13, "{act} d2");
                let fd3 = (act.derivatives(z + 1e-5)[2] - act.derivatives(z - 1e-5)[2]) / 2e-5;
                assert!((d[3] - fd3).abs() < 1e-6 * (1.0 + fd3.abs()), "{act} d3 {} {}", d[3], fd3);
            }
        }
    }

    #[test]
    fn tape_forward_matches_plain() {
        let m = MlpModel::init(&[2, 4, 1], Activation::Gelu, 3).unwrap();
        let x = [0.4, -0.2];
        let (val, _) = grad_params(&m.params, |_, p| m.forward_on_tape(p, &x).unwrap()[0]).unwrap();
        assert!((val - m.predict(&x).unwrap()[0]).abs() < 1e-15);
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let m = MlpModel::init(&[3, 7, 2], Activation::Swish, 11).unwrap();
        let back = MlpModel::from_checkpoint(&m.to_checkpoint()).unwrap();
        assert_eq!(back, m);
        assert!(back.params.iter().zip(&m.params).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn activation_tags_parse() {
        for act in Activation::ALL {
            assert_eq!(act.tag().parse::<Activation>().unwrap(), act);
        }
        assert!("elu".parse::<Activation>().is_err());
    }
}
