use clap::ValueEnum;
use growfrag::mellin::{asymp_v_poisson, asymp_v_theta, inverse_mellin_v, AsympTruncation, ContourQuad};
use growfrag::series::eval_u;
use growfrag::Truncation;

use crate::config::RunConfig;
use crate::output::{csv_string, sci};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    Series,
    Mellin,
    AsympTheta,
    AsympPoisson,
}

impl EvalMethod {
    fn name(self) -> &'static str {
        match self {
            EvalMethod::Series => "series",
            EvalMethod::Mellin => "mellin",
            EvalMethod::AsympTheta => "asymp-theta",
            EvalMethod::AsympPoisson => "asymp-poisson",
        }
    }
}

fn value(cfg: &RunConfig, method: EvalMethod, t: f64, x: f64) -> Result<f64> {
    let params = cfg.params()?;
    let p = &cfg.profile;
    let alpha = cfg.alpha;
    // non-series routes evaluate v(bt, x e^{-gt}) and rescale
    let shrink = (-cfg.g * t).exp();
    let (tau, xi) = (cfg.b * t, x * shrink);
    let v = match method {
        EvalMethod::Series => return Ok(eval_u(&params, p, t, x, &Truncation::default())?),
        EvalMethod::Mellin => {
            let cq = ContourQuad::auto(p, alpha, tau, xi, 2.0)?;
            inverse_mellin_v(p, alpha, tau, xi, &cq)?
        }
        EvalMethod::AsympTheta => asymp_v_theta(p, alpha, tau, xi, &AsympTruncation::auto(p, alpha, tau, xi)?)?,
        EvalMethod::AsympPoisson => {
            asymp_v_poisson(p, alpha, tau, xi, &AsympTruncation::auto(p, alpha, tau, xi)?)?
        }
    };
    Ok(shrink * v)
}

/// `u(t, x)` at every pair of `times × sizes`, as CSV.
pub fn evaluate(cfg: &RunConfig, method: EvalMethod, times: &[f64], sizes: &[f64]) -> Result<String> {
    let mut rows = Vec::with_capacity(times.len() * sizes.len());
    for &t in times {
        for &x in sizes {
            let v = value(cfg, method, t, x)?;
            rows.push([sci(t), sci(x), sci(v), method.name().to_string()]);
        }
    }
    csv_string(&["t", "x", "value", "method"], rows)
}
