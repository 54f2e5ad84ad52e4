//! Batched forward-mode jets through an MLP and their reverse-mode adjoint.
//!
//! A jet carries, per neuron, the value, the first derivatives along the
//! leading `dims` input coordinates and (at Laplacian order) the matching
//! diagonal second derivatives. This is the same arithmetic as `dims`
//! hyper-dual passes seeded with `dir1 = dir2 = k`, sharing the real part.
//!
//! Buffers are channel-major: entry `(c, j)` of a layer with `n` units sits at
//! `c * n + j`, channel 0 being the value, `1..=dims` the gradient and
//! `dims+1..=2·dims` the diagonal curvature.

use super::MlpModel;
use crate::autodiff::{FieldJet, JetOrder};

/// Per-sample activations kept from [`MlpModel::jet_forward`] for the backward pass.
#[derive(Clone, Debug)]
pub struct JetCache {
    dims: usize,
    order: JetOrder,
    channels: usize,
    acts: Vec<Vec<f64>>,
    zs: Vec<Vec<f64>>,
    sd: Vec<Vec<f64>>,
}

impl JetCache {
    pub fn order(&self) -> JetOrder {
        self.order
    }

    pub fn dims(&self) -> usize {
        self.dims
    }
}

/// Scratch buffers for [`MlpModel::jet_backward`].
#[derive(Clone, Debug, Default)]
pub struct JetWorkspace {
    abar: Vec<f64>,
    zbar: Vec<f64>,
}

impl MlpModel {
    pub fn new_jet_cache(&self, dims: usize, order: JetOrder) -> JetCache {
        assert!(dims <= self.input_dim(), "jet dims exceed input dimension");
        let channels = order.channels(dims);
        let layers = self.layers();
        JetCache {
            dims,
            order,
            channels,
            acts: layers.iter().map(|l| vec![0.0; channels * l.n_in]).collect(),
            zs: layers.iter().map(|l| vec![0.0; channels * l.n_out]).collect(),
            sd: layers.iter().map(|l| vec![0.0; 3 * l.n_out]).collect(),
        }
    }

    /// Forward jet at `x`; panics if `x` has the wrong dimension (callers
    /// validate shapes once per dataset).
    pub fn jet_forward(&self, x: &[f64], cache: &mut JetCache) -> FieldJet<f64> {
        assert_eq!(x.len(), self.input_dim(), "jet input dimension");
        let (dims, ch) = (cache.dims, cache.channels);
        let n0 = self.input_dim();
        {
            let a = &mut cache.acts[0];
            a.iter_mut().for_each(|v| *v = 0.0);
            a[..n0].copy_from_slice(x);
            if cache.order >= JetOrder::Gradient {
                for k in 0..dims {
                    a[(1 + k) * n0 + k] = 1.0;
                }
            }
        }
        let n_layers = self.layers().len();
        for (li, l) in self.layers().iter().enumerate() {
            let w = &self.params[l.w..l.b];
            let b = &self.params[l.b..l.b + l.n_out];
            let (n_in, n_out) = (l.n_in, l.n_out);
            {
                let a = &cache.acts[li];
                let z = &mut cache.zs[li];
                for c in 0..ch {
                    let ac = &a[c * n_in..(c + 1) * n_in];
                    for o in 0..n_out {
                        let row = &w[o * n_in..(o + 1) * n_in];
                        let mut acc = 0.0;
                        for i in 0..n_in {
                            acc += row[i] * ac[i];
                        }
                        if c == 0 {
                            acc += b[o];
                        }
                        z[c * n_out + o] = acc;
                    }
                }
            }
            if li + 1 == n_layers {
                break;
            }
            let (head, tail) = cache.acts.split_at_mut(li + 1);
            let _ = head;
            let next = &mut tail[0];
            let z = &cache.zs[li];
            let sd = &mut cache.sd[li];
            for j in 0..n_out {
                let s = self.activation.derivatives(z[j]);
                sd[3 * j] = s[1];
                sd[3 * j + 1] = s[2];
                sd[3 * j + 2] = s[3];
                next[j] = s[0];
                if cache.order >= JetOrder::Gradient {
                    for k in 0..dims {
                        let zk = z[(1 + k) * n_out + j];
                        next[(1 + k) * n_out + j] = s[1] * zk;
                        if cache.order == JetOrder::Laplacian {
                            let zkk = z[(1 + dims + k) * n_out + j];
                            next[(1 + dims + k) * n_out + j] = s[2] * zk * zk + s[1] * zkk;
                        }
                    }
                }
            }
        }
        let z = cache.zs.last().unwrap();
        let n_out = self.output_dim();
        let mut jet = FieldJet {
            dims,
            order: cache.order,
            value: z[..n_out].to_vec(),
            grad: Vec::new(),
            diag: Vec::new(),
        };
        if cache.order >= JetOrder::Gradient {
            jet.grad = vec![0.0; n_out * dims];
            for o in 0..n_out {
                for k in 0..dims {
                    jet.grad[o * dims + k] = z[(1 + k) * n_out + o];
                }
            }
        }
        if cache.order == JetOrder::Laplacian {
            jet.diag = vec![0.0; n_out * dims];
            for o in 0..n_out {
                for k in 0..dims {
                    jet.diag[o * dims + k] = z[(1 + dims + k) * n_out + o];
                }
            }
        }
        jet
    }

    /// Accumulate into `grad` the parameter gradient of a scalar whose
    /// derivatives with respect to the jet entries of the last forward pass
    /// recorded in `cache` are `out_adj`. Entries of `out_adj` absent at the
    /// cache's order are ignored.
    pub fn jet_backward(
        &self,
        cache: &JetCache,
        out_adj: &FieldJet<f64>,
        grad: &mut [f64],
        ws: &mut JetWorkspace,
    ) {
        assert_eq!(grad.len(), self.params.len());
        let (dims, ch, order) = (cache.dims, cache.channels, cache.order);
        let n_out = self.output_dim();
        ws.zbar.clear();
        ws.zbar.resize(ch * n_out, 0.0);
        for o in 0..n_out {
            ws.zbar[o] = out_adj.value[o];
            if order >= JetOrder::Gradient && !out_adj.grad.is_empty() {
                for k in 0..dims {
                    ws.zbar[(1 + k) * n_out + o] = out_adj.grad[o * dims + k];
                }
            }
            if order == JetOrder::Laplacian && !out_adj.diag.is_empty() {
                for k in 0..dims {
                    ws.zbar[(1 + dims + k) * n_out + o] = out_adj.diag[o * dims + k];
                }
            }
        }

        for li in (0..self.layers().len()).rev() {
            let l = self.layers()[li];
            let (n_in, n_out) = (l.n_in, l.n_out);
            let a = &cache.acts[li];
            {
                let (gw, gb) = grad[l.w..l.b + n_out].split_at_mut(n_in * n_out);
                for c in 0..ch {
                    let zc = &ws.zbar[c * n_out..(c + 1) * n_out];
                    let ac = &a[c * n_in..(c + 1) * n_in];
                    for o in 0..n_out {
                        let zb = zc[o];
                        if zb == 0.0 {
                            continue;
                        }
                        let row = &mut gw[o * n_in..(o + 1) * n_in];
                        for i in 0..n_in {
                            row[i] += zb * ac[i];
                        }
                    }
                }
                for o in 0..n_out {
                    gb[o] += ws.zbar[o];
                }
            }
            if li == 0 {
                break;
            }
            let w = &self.params[l.w..l.b];
            ws.abar.clear();
            ws.abar.resize(ch * n_in, 0.0);
            for c in 0..ch {
                let zc = &ws.zbar[c * n_out..(c + 1) * n_out];
                let abar = &mut ws.abar[c * n_in..(c + 1) * n_in];
                for o in 0..n_out {
                    let zb = zc[o];
                    if zb == 0.0 {
                        continue;
                    }
                    let row = &w[o * n_in..(o + 1) * n_in];
                    for i in 0..n_in {
                        abar[i] += zb * row[i];
                    }
                }
            }
            // Through the activation of the previous layer (n_in units).
            let zprev = &cache.zs[li - 1];
            let sd = &cache.sd[li - 1];
            let n = n_in;
            ws.zbar.clear();
            ws.zbar.resize(ch * n, 0.0);
            for j in 0..n {
                let (s1, s2, s3) = (sd[3 * j], sd[3 * j + 1], sd[3 * j + 2]);
                let mut z0bar = ws.abar[j] * s1;
                if order >= JetOrder::Gradient {
                    for k in 0..dims {
                        let zk = zprev[(1 + k) * n + j];
                        let ak = ws.abar[(1 + k) * n + j];
                        let mut zkbar = ak * s1;
                        z0bar += ak * s2 * zk;
                        if order == JetOrder::Laplacian {
                            let zkk = zprev[(1 + dims + k) * n + j];
                            let akk = ws.abar[(1 + dims + k) * n + j];
                            ws.zbar[(1 + dims + k) * n + j] = akk * s1;
                            zkbar += 2.0 * akk * s2 * zk;
                            z0bar += akk * (s3 * zk * zk + s2 * zkk);
                        }
                        ws.zbar[(1 + k) * n + j] = zkbar;
                    }
                }
                ws.zbar[j] = z0bar;
            }
        }
    }
}
