use std::f64::consts::TAU;
use std::fmt::Write;

use super::Trace;

/// One crossing of a field line through the helical section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Puncture {
    /// 1-based crossing count along the trace.
    pub transit: usize,
    pub r: f64,
    /// Polar angle in `[0, 2π)`.
    pub theta: f64,
}

impl Puncture {
    pub fn xy(&self) -> [f64; 2] {
        [self.r * self.theta.cos(), self.r * self.theta.sin()]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoincareSection {
    pub punctures: Vec<Puncture>,
}

impl PoincareSection {
    pub fn transits(&self) -> usize {
        self.punctures.len()
    }

    /// Radial extent of the punctures, 0 when fewer than two.
    pub fn annulus_width(&self) -> f64 {
        if self.punctures.len() < 2 {
            return 0.0;
        }
        let (lo, hi) = self.punctures.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.r), b.max(p.r)));
        hi - lo
    }

    /// CSV with columns `transit,r,u`, where `u` is the puncture angle.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("transit,r,u\n");
        for p in &self.punctures {
            writeln!(s, "{},{:?},{:?}", p.transit, p.r, p.theta).unwrap();
        }
        s
    }
}

/// Crossings of `trace` with the helical surface `θ − h·z = u0 (mod 2π)`
/// in the direction of increasing `θ − h·z`, located by linear
/// interpolation between trace vertices.
pub fn poincare(trace: &Trace<3>, pitch: f64, u0: f64) -> PoincareSection {
    let mut punctures = Vec::new();
    let mut prev: Option<([f64; 3], f64, f64)> = None;
    for p in &trace.points {
        let raw = p[1].atan2(p[0]);
        let theta = match prev {
            None => raw,
            Some((_, th, _)) => th + (raw - th + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI,
        };
        let u = theta - pitch * p[2] - u0;
        if let Some((q, _, uq)) = prev {
            let (a, b) = ((uq / TAU).floor(), (u / TAU).floor());
            let mut k = a + 1.0;
            while k <= b {
                let f = (k * TAU - uq) / (u - uq);
                let x = q[0] + f * (p[0] - q[0]);
                let y = q[1] + f * (p[1] - q[1]);
                punctures.push(Puncture {
                    transit: punctures.len() + 1,
                    r: x.hypot(y),
                    theta: y.atan2(x).rem_euclid(TAU),
                });
                k += 1.0;
            }
        }
        prev = Some((*p, theta, u));
    }
    PoincareSection { punctures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracing::trace_field_line;

    #[test]
    fn axial_field_never_crosses_forward() {
        let t = trace_field_line(|_| [0.0, 0.0, 1.0], |_| true, [0.5, 0.0, 0.0], 0.05, 400).unwrap();
        assert_eq!(poincare(&t, 1.0, 0.0).transits(), 0);
    }

    #[test]
    fn descending_axial_field_crosses_once_per_period() {
        let t = trace_field_line(|_| [0.0, 0.0, -1.0], |_| true, [0.5, 0.0, 0.0], 0.01, 1000).unwrap();
        let s = poincare(&t, 1.0, 0.0);
        // z runs to −10, so θ − z passes 2π·k for k = 1
        assert_eq!(s.transits(), 1);
        let p = s.punctures[0];
        assert!((p.r - 0.5).abs() < 1e-12 && p.theta.abs() < 1e-12);
        assert_eq!(s.annulus_width(), 0.0);
    }

    #[test]
    fn rotation_counts_turns() {
        // circles at z = 0: u = θ, one crossing per turn
        let t = trace_field_line(|p: &[f64; 3]| [-p[1], p[0], 0.0], |_| true, [1.0, 0.0, 0.0], TAU / 500.0, 1750).unwrap();
        let s = poincare(&t, 1.0, 1.0);
        assert_eq!(s.transits(), 4);
        for p in &s.punctures {
            assert!((p.theta - 1.0).abs() < 1e-4);
            assert!((p.r - 1.0).abs() < 1e-4);
        }
        assert_eq!(s.to_csv().lines().count(), 5);
    }
}
