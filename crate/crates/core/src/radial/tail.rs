use serde::{Deserialize, Serialize};

use super::RadialProfile;
use crate::error::{Error, Result};

/// Power-law model `coefficient * r^(-exponent)` fitted on `fit_window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub coefficient: f64,
    pub exponent: f64,
    pub fit_window: (f64, f64),
    /// Relative sup error of the model against the samples on the window.
    pub misfit: f64,
}

impl TailModel {
    /// Identically vanishing tail (a profile that is exactly zero on its window).
    pub fn zero(fit_window: (f64, f64)) -> Self {
        TailModel {
            coefficient: 0.0,
            exponent: 0.0,
            fit_window,
            misfit: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient == 0.0
    }

    pub fn value(&self, r: f64) -> f64 {
        self.coefficient * r.powf(-self.exponent)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        -self.exponent * self.coefficient * r.powf(-self.exponent - 1.0)
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.exponent * (self.exponent + 1.0) * self.coefficient * r.powf(-self.exponent - 2.0)
    }

    /// `∫_r^∞ c s^(-p) ds`; requires `p > 1` unless the tail is zero.
    pub fn integral_from(&self, r: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if !(self.exponent > 1.0) {
            return Err(Error::TailTooSlow {
                exponent: self.exponent,
            });
        }
        Ok(self.coefficient * r.powf(1.0 - self.exponent) / (self.exponent - 1.0))
    }
}

/// Least-squares fit of `ln|p|` against `ln r` over the nodes in `window`.
///
/// Samples of the minority sign (roundoff flips near `r_max`) are dropped when
/// they make up at most a tenth of the window.
pub fn fit_tail(p: &RadialProfile, window: (f64, f64)) -> Result<TailModel> {
    let (xs, ys) = window_samples(p, window)?;
    let sign = ys.iter().sum::<f64>().signum();
    let (xs, ys): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&ys)
        .filter(|(_, &v)| v != 0.0 && v.signum() == sign)
        .unzip();
    let total = p.grid().window_indices(window.0, window.1).len();
    if xs.len() < 3 || 10 * (total - xs.len()) > total {
        return Err(Error::DegenerateFit(format!(
            "profile vanishes or changes sign on [{}, {}]",
            window.0, window.1
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);
    let model = TailModel {
        coefficient: sign * intercept.exp(),
        exponent: -slope,
        fit_window: window,
        misfit: 0.0,
    };
    let misfit = xs
        .iter()
        .zip(&ys)
        .map(|(&r, &v)| (model.value(r) / v - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TailModel { misfit, ..model })
}

/// Like [`fit_tail`], but a profile identically zero on the window yields a zero tail.
pub fn fit_tail_or_zero(p: &RadialProfile, window: (f64, f64)) -> Result<TailModel> {
    let (_, ys) = window_samples(p, window)?;
    if ys.iter().all(|&v| v == 0.0) {
        return Ok(TailModel::zero(window));
    }
    fit_tail(p, window)
}

/// Default tail window: the last two decades of the grid.
pub fn default_tail_window(r_max: f64) -> (f64, f64) {
    (r_max / 100.0, r_max)
}

fn window_samples(p: &RadialProfile, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    let r_max = p.grid().r_max();
    if !(lo > 0.0 && lo < hi && hi <= r_max * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!(
            "tail window [{lo}, {hi}] must lie inside (0, {r_max}]"
        )));
    }
    let idx = p.grid().window_indices(lo, hi);
    if idx.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "window [{lo}, {hi}] holds only {} nodes",
            idx.len()
        )));
    }
    let xs = p.grid().nodes()[idx.clone()].to_vec();
    let ys = p.values()[idx].to_vec();
    Ok((xs, ys))
}

/// Ordinary least squares `y = slope * x + intercept`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
