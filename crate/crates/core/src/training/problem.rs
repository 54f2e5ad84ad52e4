use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{FieldJet, Scalar};
use crate::physics::{
    advdiff_value, heat_value, potential, tg_fields, AdvDiffConfig, HelicalFieldConfig, PhysicsError,
    TaylorGreenConfig,
};

/// A PDE problem with a known exact solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// Steady heat conduction on the unit square (Laplace, 2D).
    Heat,
    /// Magnetic scalar potential of a helical vacuum field (Laplace, 3D).
    Helical(HelicalFieldConfig),
    /// Taylor–Green velocity at a fixed time (Navier–Stokes, 2D).
    TaylorGreen(TaylorGreenConfig),
    /// Advected, diffusing Gaussian plume over space-time (3D + t).
    AdvDiff(AdvDiffConfig),
}

impl Problem {
    pub fn tag(&self) -> &'static str {
        match self {
            Problem::Heat => "heat",
            Problem::Helical(_) => "helical",
            Problem::TaylorGreen(_) => "taylor-green",
            Problem::AdvDiff(_) => "advdiff",
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        match self {
            Problem::Heat => Ok(()),
            Problem::Helical(c) => c.validate(),
            Problem::TaylorGreen(c) => c.validate(),
            Problem::AdvDiff(c) => c.validate(),
        }
    }

    /// Dimension of model inputs.
    pub fn input_dim(&self) -> usize {
        match self {
            Problem::Heat | Problem::TaylorGreen(_) => 2,
            Problem::Helical(_) => 3,
            Problem::AdvDiff(_) => 4,
        }
    }

    /// Coordinates the residual differentiates along.
    pub fn jet_dims(&self) -> usize {
        self.input_dim()
    }

    /// Outputs of a standard PINN (Taylor–Green adds the pressure).
    pub fn pinn_outputs(&self) -> usize {
        match self {
            Problem::TaylorGreen(_) => 3,
            _ => 1,
        }
    }

    /// Components that are observed as data and scored by the eval MSE.
    pub fn data_outputs(&self) -> usize {
        match self {
            Problem::TaylorGreen(_) => 2,
            _ => 1,
        }
    }

    pub fn residual_count(&self) -> usize {
        match self {
            Problem::TaylorGreen(_) => 3,
            _ => 1,
        }
    }

    /// The exact solution in the PINN output layout, over any scalar type.
    pub fn exact_generic<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        match self {
            Problem::Heat => vec![heat_value(x)],
            Problem::Helical(c) => vec![potential(c, x)],
            Problem::TaylorGreen(c) => {
                let t = x[0] * 0.0 + c.time;
                tg_fields(c, &[x[0], x[1], t]).to_vec()
            }
            Problem::AdvDiff(c) => vec![advdiff_value(c, x)],
        }
    }

    /// Exact observed components at `x`.
    pub fn exact(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.exact_generic(x);
        v.truncate(self.data_outputs());
        v
    }

    /// PDE residual components from a model jet (PINN output layout, Laplacian order).
    ///
    /// Taylor–Green uses one backward-Euler step from the exact field at
    /// `t* − Δt`, so the time derivative needs no time input.
    pub fn residual<T: Scalar>(&self, x: &[f64], jet: &FieldJet<T>) -> Vec<T> {
        match self {
            Problem::Heat | Problem::Helical(_) => vec![jet.laplacian(0)],
            Problem::TaylorGreen(c) => {
                let prev = tg_fields(c, &[x[0], x[1], c.time - c.residual_dt]);
                let (u, v) = (jet.value[0], jet.value[1]);
                let mom = |o: usize| {
                    (jet.value[o] - prev[o]) / c.residual_dt + u * jet.d(o, 0) + v * jet.d(o, 1) + jet.d(2, o)
                        - (jet.dd(o, 0) + jet.dd(o, 1)) * c.viscosity
                };
                vec![mom(0), mom(1), jet.d(0, 0) + jet.d(1, 1)]
            }
            Problem::AdvDiff(c) => {
                let lap = jet.dd(0, 0) + jet.dd(0, 1) + jet.dd(0, 2);
                let mut r = jet.d(0, 3) - lap * c.diffusivity;
                for k in 0..3 {
                    r = r + jet.d(0, k) * c.velocity[k];
                }
                vec![r]
            }
        }
    }

    /// Uniform point in the interior of the domain.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Problem::Heat => vec![rng.gen(), rng.gen()],
            Problem::Helical(c) => {
                let r = c.radius * rng.gen::<f64>().sqrt();
                let th = rng.gen_range(0.0..TAU);
                vec![r * th.cos(), r * th.sin(), rng.gen_range(0.0..c.period())]
            }
            Problem::TaylorGreen(_) => vec![rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)],
            Problem::AdvDiff(c) => {
                let l = c.half_width;
                vec![rng.gen_range(-l..l), rng.gen_range(-l..l), rng.gen_range(-l..l), rng.gen_range(0.0..c.t_max)]
            }
        }
    }

    /// Uniform point on the boundary (falls back to the interior for
    /// problems without Dirichlet data).
    pub fn sample_boundary<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Problem::Heat => {
                let s: f64 = rng.gen();
                match rng.gen_range(0..4) {
                    0 => vec![s, 0.0],
                    1 => vec![s, 1.0],
                    2 => vec![0.0, s],
                    _ => vec![1.0, s],
                }
            }
            Problem::Helical(c) => {
                let th = rng.gen_range(0.0..TAU);
                vec![c.radius * th.cos(), c.radius * th.sin(), rng.gen_range(0.0..c.period())]
            }
            _ => self.sample_interior(rng),
        }
    }

    /// Held-out uniform grid with `n` points per axis.
    pub fn eval_grid(&self, n: usize) -> Vec<Vec<f64>> {
        let n = n.max(2);
        let lin = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let mid = |a: f64, b: f64, i: usize| a + (b - a) * (i as f64 + 0.5) / n as f64;
        let mut pts = Vec::new();
        match self {
            Problem::Heat => {
                for i in 0..n {
                    for j in 0..n {
                        pts.push(vec![lin(0.0, 1.0, i), lin(0.0, 1.0, j)]);
                    }
                }
            }
            Problem::Helical(c) => {
                let r = c.radius;
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let (x, y) = (lin(-r, r, i), lin(-r, r, j));
                            if x.hypot(y) <= r {
                                pts.push(vec![x, y, mid(0.0, c.period(), k)]);
                            }
                        }
                    }
                }
            }
            Problem::TaylorGreen(_) => {
                for i in 0..n {
                    for j in 0..n {
                        pts.push(vec![mid(0.0, TAU, i), mid(0.0, TAU, j)]);
                    }
                }
            }
            Problem::AdvDiff(c) => {
                let l = c.half_width;
                for s in 0..4 {
                    let t = c.t_max * (s as f64 + 0.5) / 4.0;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                pts.push(vec![lin(-l, l, i), lin(-l, l, j), lin(-l, l, k), t]);
                            }
                        }
                    }
                }
            }
        }
        pts
    }
}
