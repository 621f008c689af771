use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `t = a·n + b`
    Linear,
    /// `t = α·n^β`
    Power,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Linear => "linear",
            ModelKind::Power => "power",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "power" => Ok(ModelKind::Power),
            other => Err(Error::InvalidArgument(format!(
                "unknown model '{other}'; expected linear or power"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Linear { a: f64, b: f64 },
    Power { alpha: f64, beta: f64 },
}

/// Fitted scaling model. `rmse` and `r_squared` are measured on the original
/// time axis for both models, so the two are directly comparable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub coefficients: Coefficients,
    pub rmse: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        match self.coefficients {
            Coefficients::Linear { a, b } => a * n + b,
            Coefficients::Power { alpha, beta } => alpha * n.powf(beta),
        }
    }
}

/// Ordinary least squares `y = slope·x + intercept`.
fn ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct qubit counts".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fits `(n, seconds)` points: linear by OLS on `(n, t)`, power by OLS on
/// `(ln n, ln t)` with `α = exp(intercept)`.
pub fn fit_scaling(points: &[(f64, f64)], model: ModelKind) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-positive time {} at n = {}", p.1, p.0)));
    }
    let ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ts: Vec<f64> = points.iter().map(|p| p.1).collect();
    let coefficients = match model {
        ModelKind::Linear => {
            let (a, b) = ols(&ns, &ts)?;
            Coefficients::Linear { a, b }
        }
        ModelKind::Power => {
            if let Some(n) = ns.iter().find(|&&n| !(n > 0.0)) {
                return Err(Error::InvalidArgument(format!("power fit needs positive n, got {n}")));
            }
            let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
            let ly: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let (beta, intercept) = ols(&lx, &ly)?;
            Coefficients::Power {
                alpha: intercept.exp(),
                beta,
            }
        }
    };
    let mut fit = FitResult {
        model,
        coefficients,
        rmse: 0.0,
        r_squared: 0.0,
        residuals: Vec::new(),
    };
    fit.residuals = points.iter().map(|&(n, t)| t - fit.predict(n)).collect();
    let ss_res: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let mean = ts.iter().sum::<f64>() / ts.len() as f64;
    let ss_tot: f64 = ts.iter().map(|t| (t - mean) * (t - mean)).sum();
    fit.rmse = (ss_res / ts.len() as f64).sqrt();
    fit.r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(fit)
}

/// Fits both models and returns `(linear, power, better-R² choice)`.
pub fn fit_best(points: &[(f64, f64)]) -> Result<(FitResult, FitResult, ModelKind)> {
    let linear = fit_scaling(points, ModelKind::Linear)?;
    let power = fit_scaling(points, ModelKind::Power)?;
    let chosen = if power.r_squared > linear.r_squared {
        ModelKind::Power
    } else {
        ModelKind::Linear
    };
    Ok((linear, power, chosen))
}
