use std::fmt::Write;

use serde::{Deserialize, Serialize};

/// One optimizer step. Losses are measured before the step, `eval_mse` after it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total_loss: f64,
    pub pde_loss: f64,
    pub data_loss: f64,
    pub eval_mse: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    /// Eval MSE of the model before the first step.
    pub initial_mse: f64,
    /// Epoch at which the MSE target was first met, if one was set and met.
    pub stop_epoch: Option<usize>,
    /// Non-fatal messages (e.g. a rejected warm start).
    pub warnings: Vec<String>,
}

impl TrainTrace {
    pub fn epochs(&self) -> usize {
        self.records.len()
    }

    /// Eval MSE after the last executed epoch (the initial MSE if none ran).
    pub fn final_mse(&self) -> f64 {
        self.records.last().map_or(self.initial_mse, |r| r.eval_mse)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,total_loss,pde_loss,data_loss,eval_mse,grad_norm\n");
        for r in &self.records {
            writeln!(
                s,
                "{},{:?},{:?},{:?},{:?},{:?}",
                r.epoch, r.total_loss, r.pde_loss, r.data_loss, r.eval_mse, r.grad_norm
            )
            .unwrap();
        }
        s
    }
}
