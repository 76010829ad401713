use serde::Serialize;

use crate::conformal::InitialData;
use crate::error::{Error, Result};
use crate::radial::{differentiate, fit_tail, Dimension, RadialProfile, TailModel};

/// Fit windows for the three decay measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayWindows {
    pub tau: (f64, f64),
    pub metric: (f64, f64),
    pub k: (f64, f64),
}

impl DecayWindows {
    /// `τ` and `k` on the last 1.5 decades; the metric on two decades ending
    /// one decade inside `r_max`, away from the outer boundary closure.
    pub fn for_r_max(r_max: f64) -> Self {
        let outer = (r_max * 10f64.powf(-1.5), r_max);
        DecayWindows {
            tau: outer,
            metric: (r_max / 1000.0, r_max / 10.0),
            k: outer,
        }
    }

    fn validate(&self, r_max: f64) -> Result<()> {
        for (name, (lo, hi)) in [("tau", self.tau), ("metric", self.metric), ("k", self.k)] {
            if !(lo > 0.0 && hi <= r_max * (1.0 + 1e-12) && (hi / lo).log10() >= 1.5 - 1e-12) {
                return Err(Error::invalid(format!(
                    "{name} window [{lo}, {hi}] must span 1.5 decades inside (0, {r_max}]"
                )));
            }
        }
        Ok(())
    }
}

/// Fitted power-law decay rates.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub metric_exponent: f64,
    pub k_exponent: f64,
    pub tau_exponent: f64,
    pub windows: DecayWindows,
    pub tau_fit: TailModel,
    pub metric_fit: TailModel,
    pub k_fit: TailModel,
}

/// Fit `|g − δ| = |φ^(N−2) − 1|`, `|k|` along the first axis and `|τ|`.
pub fn decay_exponents(data: &InitialData, windows: &DecayWindows) -> Result<DecayReport> {
    let sol = &data.solution;
    windows.validate(data.r_max())?;
    let e = data.dim.critical_exponent() - 2.0;
    let metric = sol.phi.map(|_, p| (p.powf(e) - 1.0).abs())?;
    let tau = sol.tau.map(|_, t| t.abs())?;
    let n = data.n();
    let k_values = sol
        .phi
        .nodes()
        .iter()
        .map(|&r| {
            let mut x = vec![0.0; n];
            x[0] = r;
            data.curvature(&x).map(|k| k.norm_sq().sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let k = RadialProfile::new(sol.grid().clone(), k_values)?;
    let tau_fit = fit_tail(&tau, windows.tau)?;
    let metric_fit = fit_tail(&metric, windows.metric)?;
    let k_fit = fit_tail(&k, windows.k)?;
    Ok(DecayReport {
        metric_exponent: metric_fit.exponent,
        k_exponent: k_fit.exponent,
        tau_exponent: tau_fit.exponent,
        windows: *windows,
        tau_fit,
        metric_fit,
        k_fit,
    })
}

/// Measured `lim φ′ r^(2q−1)` against the predicted constant and its printed variant.
#[derive(Clone, Debug, Serialize)]
pub struct TailLimit {
    pub c: f64,
    pub q: f64,
    pub measured: f64,
    /// `(c√(n−2)/(2(n−q)))²`.
    pub predicted: f64,
    /// `c√(n−2)/(2(n−q))`.
    pub printed: f64,
    pub window: (f64, f64),
}

impl TailLimit {
    pub fn relative_error(&self) -> f64 {
        if self.predicted == 0.0 {
            self.measured.abs()
        } else {
            (self.measured / self.predicted - 1.0).abs()
        }
    }
}

/// `φ′ r^(2q−1)` on the last two decades, extrapolated to infinity.
pub fn tail_limit_check(dim: Dimension, phi: &RadialProfile, c: f64, q: f64) -> Result<TailLimit> {
    let n = dim.nf();
    if !(q > 0.0 && q < n) || !c.is_finite() {
        return Err(Error::invalid(format!("need 0 < q < n and finite c, got q = {q}, c = {c}")));
    }
    let grid = phi.grid();
    let r_max = grid.r_max();
    let window = (r_max / 100.0, r_max);
    let idx = grid.window_indices(window.0, window.1);
    if idx.len() < 8 {
        return Err(Error::NoTail(format!("fewer than 8 nodes in [{}, {}]", window.0, window.1)));
    }
    let d = differentiate(phi, 1)?;
    let rs = &grid.nodes()[idx.clone()];
    let ys: Vec<f64> = rs
        .iter()
        .zip(&d.values()[idx])
        .map(|(&r, &v)| v * r.powf(2.0 * q - 1.0))
        .collect();
    let measured = super::mass::extrapolate_limit(rs, &ys);
    let printed = c * (n - 2.0).sqrt() / (2.0 * (n - q));
    Ok(TailLimit {
        c,
        q,
        measured,
        predicted: printed * printed,
        printed,
        window,
    })
}
