//! Least-squares decay fits in log coordinates.

use crate::error::{arg, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `value = K * N * (log N)^(-C)`; fits `C`.
    LogPower,
    /// `value = K * N^b`; fits `b`.
    Power,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub n_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `C` for `LogPower`, `b` for `Power`.
    pub parameter: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log coordinates.
    pub residual: f64,
}

pub fn fit_decay(points: &[(f64, f64)], model: DecayModel) -> Result<DecayFit> {
    if points.len() < 3 {
        return arg("fit needs at least three points");
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return arg("N values must be increasing");
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0)) {
        return arg(format!("value {} at N = {} is not positive", p.1, p.0));
    }
    let min_n = if model == DecayModel::LogPower { 1.0 } else { 0.0 };
    if points.iter().any(|p| !(p.0 > min_n) || !p.0.is_finite()) {
        return arg("N values out of range for this model");
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|&(n, v)| match model {
            DecayModel::LogPower => (n.ln().ln(), (v / n).ln()),
            DecayModel::Power => (n.ln(), v.ln()),
        })
        .unzip();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return arg("degenerate N grid");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(DecayFit {
        model,
        n_grid: points.iter().map(|p| p.0).collect(),
        values: points.iter().map(|p| p.1).collect(),
        parameter: match model {
            DecayModel::LogPower => -slope,
            DecayModel::Power => slope,
        },
        intercept,
        residual: (ss / k).sqrt(),
    })
}
