use serde::Serialize;

use super::config::{ExperimentConfig, SharpnessSpec};
use super::report::OutDir;
use super::Model;
use crate::error::{Error, Result};
use crate::variance::{comparison_constants, sharpness_witness};

#[derive(Debug, Clone, Serialize)]
pub struct WitnessFunction {
    pub pair: usize,
    #[serde(rename = "V_D")]
    pub v_d: f64,
    #[serde(rename = "V_R")]
    pub v_r: f64,
    pub ratio: f64,
    /// Row-major values on the grid.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub r: f64,
    pub eta: f64,
    pub k1: f64,
    pub norm_c: f64,
    pub witness: Option<WitnessFunction>,
    /// Why no witness was produced, when none was.
    pub reason: Option<String>,
}

pub fn sharpness_report(model: &Model, spec: &SharpnessSpec) -> Result<SharpnessReport> {
    let Model::Finite { space, dec, .. } = model else {
        return Err(Error::Config("sharpness needs a finite target".into()));
    };
    let (k1, _) = comparison_constants(spec.r);
    let eta = spec.eta_factor * k1;
    let (witness, reason) = match sharpness_witness(dec, spec.r, eta) {
        Ok(w) => {
            let values = space.from_coords(w.coords.clone()).values;
            (Some(WitnessFunction { pair: w.pair, v_d: w.v_d, v_r: w.v_r, ratio: w.ratio, values }), None)
        }
        Err(Error::NoWitness(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(SharpnessReport { r: spec.r, eta, k1, norm_c: dec.norm_c(), witness, reason })
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<()> {
    let model = Model::build(&cfg.target.build()?, cfg.tolerances())?;
    let spec = cfg.sharpness.clone().unwrap_or_default();
    out.write_json("sharpness.json", &sharpness_report(&model, &spec)?)
}
