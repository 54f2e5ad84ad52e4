use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::TracingError;

/// Below this field magnitude a trace counts as stalled.
pub const STALL_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    StepsExhausted,
    LeftDomain,
    Stalled,
    NonFinite,
}

/// Polyline of an integral curve with arclength per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<const N: usize> {
    pub seed: [f64; N],
    pub points: Vec<[f64; N]>,
    pub arclength: Vec<f64>,
    pub termination: Termination,
}

impl<const N: usize> Trace<N> {
    pub fn end(&self) -> [f64; N] {
        *self.points.last().expect("trace holds its seed")
    }

    /// CSV with columns `s,x,y` (2D) or `s,x,y,z` (3D).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(if N == 2 { "s,x,y\n" } else { "s,x,y,z\n" });
        for (p, a) in self.points.iter().zip(&self.arclength) {
            write!(s, "{a:?}").unwrap();
            for v in p {
                write!(s, ",{v:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

fn unit<const N: usize>(b: [f64; N]) -> Result<[f64; N], Termination> {
    let m = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !m.is_finite() {
        return Err(Termination::NonFinite);
    }
    if m < STALL_EPS {
        return Err(Termination::Stalled);
    }
    Ok(b.map(|v| v / m))
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, d: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|k| x[k] + a * d[k])
}

/// Classical RK4 on the unit-speed equation `dx/ds = B/|B|`.
///
/// `inside` bounds the domain; a step ending outside it is discarded and
/// the trace terminates with [`Termination::LeftDomain`].
pub fn trace_field_line<const N: usize, F, G>(
    mut field: F,
    inside: G,
    seed: [f64; N],
    step: f64,
    n_steps: usize,
) -> Result<Trace<N>, TracingError>
where
    F: FnMut(&[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> bool,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(TracingError::BadStep(step));
    }
    let b0 = field(&seed);
    let m0 = b0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(m0 >= STALL_EPS) {
        return Err(TracingError::ZeroFieldStart { seed: seed.to_vec(), magnitude: m0 });
    }
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut arclength = Vec::with_capacity(n_steps + 1);
    points.push(seed);
    arclength.push(0.0);
    let mut x = seed;
    let mut termination = Termination::StepsExhausted;
    for _ in 0..n_steps {
        let stage = |f: &mut F, p: &[f64; N]| unit(f(p));
        let next = (|| {
            let k1 = stage(&mut field, &x)?;
            let k2 = stage(&mut field, &axpy(&x, 0.5 * step, &k1))?;
            let k3 = stage(&mut field, &axpy(&x, 0.5 * step, &k2))?;
            let k4 = stage(&mut field, &axpy(&x, step, &k3))?;
            Ok(std::array::from_fn(|k| x[k] + step / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])))
        })();
        match next {
            Ok(p) if !inside(&p) => {
                termination = Termination::LeftDomain;
                break;
            }
            Ok(p) => {
                let ds = (0..N).map(|k| (p[k] - x[k]).powi(2)).sum::<f64>().sqrt();
                arclength.push(arclength.last().unwrap() + ds);
                points.push(p);
                x = p;
            }
            Err(t) => {
                termination = t;
                break;
            }
        }
    }
    Ok(Trace { seed, points, arclength, termination })
}

/// Streamlines of a planar velocity field from each seed. A seed at a
/// stagnation point yields a one-vertex trace terminated as stalled.
pub fn trace_streamlines<F>(field: F, seeds: &[[f64; 2]], step: f64, n_steps: usize) -> Result<Vec<Trace<2>>, TracingError>
where
    F: Fn(&[f64; 2]) -> [f64; 2],
{
    seeds
        .iter()
        .map(|&s| match trace_field_line(&field, |_| true, s, step, n_steps) {
            Err(TracingError::ZeroFieldStart { .. }) => Ok(Trace {
                seed: s,
                points: vec![s],
                arclength: vec![0.0],
                termination: Termination::Stalled,
            }),
            r => r,
        })
        .collect()
}
