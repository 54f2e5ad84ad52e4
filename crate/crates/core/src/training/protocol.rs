use super::{
    expansion_eval_mse, mlp_eval_mse, train_pinn_on, train_trefftz_on, Dataset, Problem, Samples, TrainConfig,
    TrainError, TrainTrace,
};
use crate::mlp::MlpModel;
use crate::trefftz::{BasisSpec, TrefftzExpansion};

/// Both models of a matched-MSE comparison with their traces and the
/// fingerprints of the shared sample sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonBundle {
    pub pinn: MlpModel,
    pub trefftz: TrefftzExpansion,
    pub pinn_trace: TrainTrace,
    pub trefftz_trace: TrainTrace,
    /// m*: final eval MSE of the standard PINN.
    pub target_mse: f64,
    /// Trefftz eval MSE at its stop epoch (best epoch when unmatched).
    pub trefftz_stop_mse: f64,
    pub relative_gap: f64,
    /// False when the Trefftz model never reached m*.
    pub matched: bool,
    /// Both models re-evaluated on the finer report grid.
    pub pinn_report_mse: f64,
    pub trefftz_report_mse: f64,
    pub data_hash: String,
    pub colloc_hash: String,
    pub eval_hash: String,
}

/// `|m − m*| / m*`.
pub fn relative_gap(target: f64, achieved: f64) -> f64 {
    (achieved - target).abs() / target
}

pub fn matched_mse_protocol(cfg: &TrainConfig, problem: &Problem, spec: &BasisSpec) -> Result<ComparisonBundle, TrainError> {
    let samples = Samples::generate(problem, cfg)?;
    matched_mse_protocol_on(cfg, problem, spec, &samples)
}

/// Train the PINN to `max_epochs`, then stop the Trefftz-PINN at the first
/// epoch whose eval MSE reaches the PINN's. Both see `samples`. An infinite
/// `cfg.mse_target` disables the stop and runs both to `max_epochs`.
pub fn matched_mse_protocol_on(
    cfg: &TrainConfig,
    problem: &Problem,
    spec: &BasisSpec,
    samples: &Samples,
) -> Result<ComparisonBundle, TrainError> {
    let pinn_cfg = TrainConfig { mse_target: None, ..cfg.clone() };
    let (pinn, pinn_trace) = train_pinn_on(&pinn_cfg, problem, samples)?;
    let target_mse = pinn_trace.final_mse();
    let unlimited = cfg.mse_target.is_some_and(|t| t.is_infinite());
    let tref_cfg = TrainConfig {
        mse_target: Some(if unlimited { f64::INFINITY } else { target_mse }),
        ..cfg.clone()
    };
    let (trefftz, trefftz_trace) = train_trefftz_on(&tref_cfg, problem, spec, samples)?;
    let matched = trefftz_trace.stop_epoch.is_some();
    let trefftz_stop_mse = if matched || unlimited {
        trefftz_trace.final_mse()
    } else {
        trefftz_trace.records.iter().map(|r| r.eval_mse).fold(trefftz_trace.initial_mse, f64::min)
    };
    let report = Dataset::exact(problem, problem.eval_grid(cfg.report_grid));
    Ok(ComparisonBundle {
        pinn_report_mse: mlp_eval_mse(&pinn, problem, &report),
        trefftz_report_mse: expansion_eval_mse(&trefftz, &report)?,
        relative_gap: relative_gap(target_mse, trefftz_stop_mse),
        target_mse,
        trefftz_stop_mse,
        matched,
        pinn,
        trefftz,
        pinn_trace,
        trefftz_trace,
        data_hash: samples.data.hash(),
        colloc_hash: samples.colloc_hash(),
        eval_hash: samples.eval.hash(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::HelicalFieldConfig;

    #[test]
    fn gap_arithmetic() {
        assert!((relative_gap(0.02, 0.019) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn infinite_target_runs_both_to_max_epochs() {
        let cfg = TrainConfig {
            n_data: 30,
            n_collocation: 10,
            max_epochs: 3,
            eval_grid: 5,
            report_grid: 5,
            hidden: vec![4],
            trefftz_hidden: vec![4],
            mse_target: Some(f64::INFINITY),
            ..Default::default()
        };
        let b = matched_mse_protocol(&cfg, &Problem::Helical(HelicalFieldConfig::default()), &BasisSpec::helical(9))
            .unwrap();
        assert_eq!(b.pinn_trace.epochs(), 3);
        assert_eq!(b.trefftz_trace.epochs(), 3);
    }
}
