use std::f64::consts::TAU;

use crate::autodiff::JetOrder;
use crate::mlp::MlpModel;
use crate::physics::{exact_bfield, HelicalFieldConfig};
use crate::trefftz::TrefftzExpansion;

/// `B = −∇Φ` of a potential network, periodic in `z` with `period`.
pub fn pinn_bfield(net: &MlpModel, period: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] + Sync + '_ {
    move |p| {
        let mut cache = net.new_jet_cache(3, JetOrder::Gradient);
        let j = net.jet_forward(&[p[0], p[1], p[2].rem_euclid(period)], &mut cache);
        [-j.grad[0], -j.grad[1], -j.grad[2]]
    }
}

pub fn trefftz_bfield(model: &TrefftzExpansion, period: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] + Sync + '_ {
    move |p| match model.jet(&[p[0], p[1], p[2].rem_euclid(period)], 3, JetOrder::Gradient) {
        Ok(j) => [-j.grad[0], -j.grad[1], -j.grad[2]],
        Err(_) => [f64::NAN; 3],
    }
}

/// Exact field; NaN outside the cylinder so traces terminate there.
pub fn exact_bfield_fn(cfg: &HelicalFieldConfig) -> impl Fn(&[f64; 3]) -> [f64; 3] + Sync + '_ {
    move |p| exact_bfield(cfg, p).unwrap_or([f64::NAN; 3])
}

/// `(u, v)` of a Taylor–Green network, evaluated on the periodic box.
pub fn pinn_velocity(net: &MlpModel) -> impl Fn(&[f64; 2]) -> [f64; 2] + Sync + '_ {
    move |p| match net.predict(&[p[0].rem_euclid(TAU), p[1].rem_euclid(TAU)]) {
        Ok(v) => [v[0], v[1]],
        Err(_) => [f64::NAN; 2],
    }
}

pub fn trefftz_velocity(model: &TrefftzExpansion) -> impl Fn(&[f64; 2]) -> [f64; 2] + Sync + '_ {
    move |p| match model.eval(&[p[0].rem_euclid(TAU), p[1].rem_euclid(TAU)]) {
        Ok(v) => [v[0], v[1]],
        Err(_) => [f64::NAN; 2],
    }
}

/// `∂u/∂x + ∂v/∂y` of a Taylor–Green network.
pub fn pinn_divergence(net: &MlpModel, x: f64, y: f64) -> f64 {
    let mut cache = net.new_jet_cache(2, JetOrder::Gradient);
    let j = net.jet_forward(&[x, y], &mut cache);
    j.d(0, 0) + j.d(1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::Activation;

    #[test]
    fn network_divergence_matches_finite_differences() {
        let net = MlpModel::init(&[2, 12, 3], Activation::Tanh, 5).unwrap();
        let u = pinn_velocity(&net);
        let h = 1e-5;
        for &(x, y) in &[(0.3, 1.2), (2.0, 4.0), (5.5, 0.7)] {
            let fd = (u(&[x + h, y])[0] - u(&[x - h, y])[0] + u(&[x, y + h])[1] - u(&[x, y - h])[1]) / (2.0 * h);
            assert!((fd - pinn_divergence(&net, x, y)).abs() < 1e-6);
        }
    }

    #[test]
    fn trefftz_field_of_exact_coefficients_is_exact() {
        let cfg = HelicalFieldConfig::default();
        let model = cfg.expansion();
        let (a, b) = (trefftz_bfield(&model, cfg.period()), exact_bfield_fn(&cfg));
        let p = [0.3, -0.2, 2.0];
        let (x, y) = (a(&p), b(&p));
        for k in 0..3 {
            assert!((x[k] - y[k]).abs() < 1e-10);
        }
    }
}
