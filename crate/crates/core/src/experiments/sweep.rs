use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exact_bfield_fn, f, mean_surface_distance, trefftz_bfield, ExperimentError};
use crate::harness::derive_seed;
use crate::physics::HelicalFieldConfig;
use crate::tracing::{structure_metrics, TraceParams};
use crate::training::{train_trefftz, Problem, TrainConfig};
use crate::trefftz::BasisSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n_b: usize,
    pub seed: u64,
    pub eval_mse: f64,
    pub stop_epoch: Option<usize>,
    pub mean_surface_distance: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepStudy {
    pub records: Vec<SweepRecord>,
    /// Seed-averaged eval MSE per entry of the sweep list.
    pub mean_mse: Vec<(usize, f64)>,
    /// Position in the sweep list of the interior minimum, if any.
    pub minimum: Option<usize>,
}

impl SweepStudy {
    pub fn non_monotonic(&self) -> bool {
        self.minimum.is_some()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_b,seed,eval_mse,stop_epoch,mean_surface_distance,warnings\n");
        for r in &self.records {
            s += &format!(
                "{},{},{},{},{},{}\n",
                r.n_b,
                r.seed,
                f(r.eval_mse),
                r.stop_epoch.map_or("none".to_string(), |e| e.to_string()),
                f(r.mean_surface_distance),
                r.warnings.len()
            );
        }
        s
    }

    pub fn mean_csv(&self) -> String {
        let mut s = String::from("n_b,mean_eval_mse,interior_minimum\n");
        for (k, (n, m)) in self.mean_mse.iter().enumerate() {
            s += &format!("{n},{},{}\n", f(*m), self.minimum == Some(k));
        }
        s
    }
}

/// First interior strict local minimum after merging runs of equal values;
/// the returned index is the start of the minimal run.
pub fn interior_minimum(values: &[f64]) -> Option<usize> {
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if runs.last().is_none_or(|&(_, w)| w != v) {
            runs.push((i, v));
        }
    }
    runs.windows(3).find(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1).map(|w| w[1].0)
}

/// Train one Trefftz-PINN per `(n_b, repeat)` on the helical problem. The
/// residual network size is fixed across `n_b`; each repeat shares its
/// samples across the whole sweep.
pub fn run_nb_sweep(
    cfg: &TrainConfig,
    field: &HelicalFieldConfig,
    nb_list: &[usize],
    repeats: usize,
    seeds: &[[f64; 3]],
    params: &TraceParams,
) -> Result<SweepStudy, ExperimentError> {
    if nb_list.len() < 4 || nb_list.windows(2).any(|w| w[0] >= w[1]) || nb_list[0] == 0 {
        return Err(ExperimentError::InvalidConfig("nb_list must be strictly increasing, start at >= 1 and have >= 4 entries".into()));
    }
    if repeats == 0 {
        return Err(ExperimentError::InvalidConfig("repeats must be >= 1".into()));
    }
    let problem = Problem::Helical(field.clone());
    let base = BasisSpec { pitch: field.pitch, radius: field.radius, ..BasisSpec::default() };
    for &n in nb_list {
        BasisSpec { count: n, ..base.clone() }
            .validate()
            .map_err(|e| ExperimentError::InvalidConfig(format!("n_b = {n}: {e}")))?;
    }
    let cells: Vec<(usize, u64)> =
        nb_list.iter().flat_map(|&n| (0..repeats).map(move |r| (n, derive_seed(cfg.seed, "repeat", r as u64)))).collect();
    let exact = exact_bfield_fn(field);
    let records = cells
        .into_par_iter()
        .map(|(n_b, seed)| {
            let run = TrainConfig { seed, ..cfg.clone() };
            let spec = BasisSpec { count: n_b, ..base.clone() };
            let (model, trace) = train_trefftz(&run, &problem, &spec)?;
            let mean_surface_distance = if seeds.is_empty() {
                f64::NAN
            } else {
                mean_surface_distance(&structure_metrics(trefftz_bfield(&model, field.period()), &exact, seeds, params)?)
            };
            Ok(SweepRecord {
                n_b,
                seed,
                eval_mse: trace.final_mse(),
                stop_epoch: trace.stop_epoch,
                mean_surface_distance,
                warnings: trace.warnings,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mean_mse: Vec<(usize, f64)> = records
        .chunks(repeats)
        .map(|c| (c[0].n_b, c.iter().map(|r| r.eval_mse).sum::<f64>() / repeats as f64))
        .collect();
    let means: Vec<f64> = mean_mse.iter().map(|m| m.1).collect();
    Ok(SweepStudy { records, minimum: interior_minimum(&means), mean_mse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trefftz::fit_coeffs;
    use crate::training::Samples;

    #[test]
    fn detector_on_synthetic_curves() {
        assert_eq!(interior_minimum(&[1.0; 6]), None);
        assert_eq!(interior_minimum(&[5.0, 4.0, 3.0, 2.0]), None);
        assert_eq!(interior_minimum(&[1.0, 2.0, 3.0]), None);
        assert_eq!(interior_minimum(&[3.0, 1.0, 2.0]), Some(1));
        assert_eq!(interior_minimum(&[3.0, 2.0, 2.0, 2.5, 2.6]), Some(1));
        assert_eq!(interior_minimum(&[3.0, 2.0, 2.0]), None);
        assert_eq!(interior_minimum(&[]), None);
    }

    #[test]
    fn cardinality_and_validation() {
        let cfg = TrainConfig { n_data: 30, n_collocation: 5, max_epochs: 2, eval_grid: 4, trefftz_hidden: vec![], ..Default::default() };
        let field = HelicalFieldConfig::default();
        let s = run_nb_sweep(&cfg, &field, &[1, 3, 5, 7], 3, &[], &TraceParams::default()).unwrap();
        assert_eq!(s.records.len(), 12);
        assert_eq!(s.mean_mse.len(), 4);
        assert!(run_nb_sweep(&cfg, &field, &[1, 3, 3, 5], 1, &[], &TraceParams::default()).is_err());
        assert!(run_nb_sweep(&cfg, &field, &[1, 3, 5], 1, &[], &TraceParams::default()).is_err());
    }

    #[test]
    fn mse_drops_once_the_matching_mode_enters() {
        // least-squares residual per n_b, computed directly
        let field = HelicalFieldConfig::default();
        let problem = Problem::Helical(field.clone());
        let cfg = TrainConfig { n_data: 200, eval_grid: 7, ..Default::default() };
        let samples = Samples::generate(&problem, &cfg).unwrap();
        let resid = |n: usize| {
            let spec = BasisSpec { count: n, ..BasisSpec::default() };
            let c = fit_coeffs(&spec, &samples.data.points, &samples.data.values).unwrap();
            let m = crate::trefftz::TrefftzExpansion::new(spec, c, None).unwrap();
            crate::training::expansion_eval_mse(&m, &samples.eval).unwrap()
        };
        let (r7, r9) = (resid(7), resid(9));
        assert!(r7 > 1e-4, "{r7}");
        assert!(r9 < 1e-12, "{r9}");

        let run = TrainConfig { n_data: 200, eval_grid: 7, warm_start: true, trefftz_hidden: vec![], max_epochs: 1, ..Default::default() };
        let s = run_nb_sweep(&run, &field, &[1, 3, 5, 7, 9, 11], 1, &[], &TraceParams::default()).unwrap();
        let m: Vec<f64> = s.mean_mse.iter().map(|x| x.1).collect();
        assert!(m[3] > 1e3 * m[4], "{m:?}");
    }
}
