use super::{f, ExperimentError};
use crate::physics::heat_exact;
use crate::training::{mlp_eval_mse, train_pinn_on, Dataset, Problem, Samples, TrainConfig};

/// Exact, data-only and physics-informed fields of the heat problem on the
/// report grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatDemo {
    pub points: Vec<[f64; 2]>,
    pub exact: Vec<f64>,
    pub data_driven: Vec<f64>,
    pub pinn: Vec<f64>,
    pub data_driven_mse: f64,
    pub pinn_mse: f64,
}

impl HeatDemo {
    pub fn fields_csv(&self) -> String {
        let mut s = String::from("x,y,exact,data_driven,pinn\n");
        for (k, p) in self.points.iter().enumerate() {
            s += &format!("{},{},{},{},{}\n", f(p[0]), f(p[1]), f(self.exact[k]), f(self.data_driven[k]), f(self.pinn[k]));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        format!("model,report_mse\ndata_driven,{}\npinn,{}\n", f(self.data_driven_mse), f(self.pinn_mse))
    }
}

/// Train a value-only network and a PINN on the same samples.
pub fn run_heat_demo(cfg: &TrainConfig) -> Result<HeatDemo, ExperimentError> {
    let problem = Problem::Heat;
    let samples = Samples::generate(&problem, cfg)?;
    let data_cfg = TrainConfig { lambda_pde: 0.0, ..cfg.clone() };
    let (dd, _) = train_pinn_on(&data_cfg, &problem, &samples)?;
    let (pinn, _) = train_pinn_on(cfg, &problem, &samples)?;
    let grid = problem.eval_grid(cfg.report_grid);
    let report = Dataset::exact(&problem, grid.clone());
    let predict = |net: &crate::mlp::MlpModel| grid.iter().map(|p| net.predict(p).map(|v| v[0]).unwrap_or(f64::NAN)).collect();
    Ok(HeatDemo {
        points: grid.iter().map(|p| [p[0], p[1]]).collect(),
        exact: grid.iter().map(|p| heat_exact(p[0], p[1])).collect(),
        data_driven: predict(&dd),
        pinn: predict(&pinn),
        data_driven_mse: mlp_eval_mse(&dd, &problem, &report),
        pinn_mse: mlp_eval_mse(&pinn, &problem, &report),
    })
}
