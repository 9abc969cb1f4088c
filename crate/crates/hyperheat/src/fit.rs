//! Least-squares rate fitting for convergence series.
//!
//! Decay laws are fitted on log-transformed data: a power law t^s becomes a
//! line of slope s in ln-ln coordinates, and an exponential-times-power law
//! e^{st} t^{-2} becomes a line of slope s after adding 2 ln t to ln(norm).
//! Fits exclude a burn-in window because the asymptotic theorems only hold
//! past an unspecified onset time.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default burn-in: points with t below this are excluded from fits unless
/// the caller provides an explicit window.
pub const DEFAULT_BURN_IN: f64 = 5.0;

/// Decay law being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// norm ~ C t^s: regress ln(norm) on ln(t).
    PowerLaw,
    /// norm ~ C e^{st} t^{-2}: regress ln(norm) + 2 ln(t) on t.
    ExpTimesPower,
    /// norm ~ C e^{st}: regress ln(norm) on t.
    Exponential,
}

/// A fitted convergence-rate series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub model: FitModel,
    pub fit_slope: f64,
    pub fit_stderr: f64,
    /// inclusive time window the fit used, clipped to the data range.
    pub fit_window: (f64, f64),
    /// the exponent the theory predicts, stored so acceptance is always an
    /// explicit |fit_slope - reference_slope| comparison.
    pub reference_slope: f64,
    /// intercept of the regression line in transformed coordinates.
    pub fit_intercept: f64,
}

impl RateReport {
    /// Theoretical reference curve through the fitted intercept: same
    /// transformed intercept, reference slope. Used as the comparison line
    /// in emitted tables and plots.
    pub fn reference_curve(&self, t: f64) -> f64 {
        match self.model {
            FitModel::PowerLaw => (self.fit_intercept + self.reference_slope * t.ln()).exp(),
            FitModel::ExpTimesPower => {
                (self.fit_intercept + self.reference_slope * t - 2.0 * t.ln()).exp()
            }
            FitModel::Exponential => (self.fit_intercept + self.reference_slope * t).exp(),
        }
    }

    /// Fitted curve in original coordinates.
    pub fn fitted_curve(&self, t: f64) -> f64 {
        match self.model {
            FitModel::PowerLaw => (self.fit_intercept + self.fit_slope * t.ln()).exp(),
            FitModel::ExpTimesPower => {
                (self.fit_intercept + self.fit_slope * t - 2.0 * t.ln()).exp()
            }
            FitModel::Exponential => (self.fit_intercept + self.fit_slope * t).exp(),
        }
    }
}

/// Transform one data point into regression coordinates.
fn transform(model: FitModel, t: f64, norm: f64) -> (f64, f64) {
    match model {
        FitModel::PowerLaw => (t.ln(), norm.ln()),
        FitModel::ExpTimesPower => (t, norm.ln() + 2.0 * t.ln()),
        FitModel::Exponential => (t, norm.ln()),
    }
}

/// Fit a decay rate to (t, norm) data inside `window`, storing the
/// theoretical slope alongside for explicit acceptance comparisons.
pub fn fit_rate(
    times: &[f64],
    norms: &[f64],
    model: FitModel,
    window: (f64, f64),
    reference_slope: f64,
) -> Result<RateReport> {
    if times.len() != norms.len() {
        return Err(Error::InvalidInput("times and norms differ in length".into()));
    }
    if times.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 points, got {}",
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidInput("times must be positive and increasing".into()));
    }
    if let Some(&bad) = norms.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::InvalidInput(format!("nonpositive norm {bad}")));
    }
    let lo = window.0.max(times[0]);
    let hi = window.1.min(*times.last().unwrap());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &x)| transform(model, t, x))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!(
            "only {n} points inside the fit window [{lo}, {hi}]"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("zero variance in the regressor".into()));
    }
    let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_resid: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ss_resid / (nf - 2.0) / sxx).sqrt();
    Ok(RateReport {
        times: times.to_vec(),
        norms: norms.to_vec(),
        model,
        fit_slope: slope,
        fit_stderr: stderr,
        fit_window: (lo, hi),
        reference_slope,
        fit_intercept: intercept,
    })
}
