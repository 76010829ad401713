use super::ConformalSolution;
use crate::error::{Error, Result};
use crate::radial::{EDGE_SLACK, 
    default_tail_window, differentiate, fit_tail_or_zero, Dimension, RadialProfile, TailModel,
};

/// Dense symmetric `n×n` tensor in Cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(n: usize) -> Self {
        SymTensor {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Set both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `Σ_ij t_ij²`.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows as nested vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Radial quantities at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValues {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub tau: f64,
    pub a: f64,
}

/// Evaluator for the physical data `g = φ^(N−2) δ` and `k` at Cartesian points.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub dim: Dimension,
    pub solution: ConformalSolution,
    dphi: RadialProfile,
    ddphi: RadialProfile,
    phi_tail: Option<TailModel>,
    tau_tail: Option<TailModel>,
    a_rate_tail: Option<TailModel>,
}

/// Wrap a solution in a Cartesian evaluator; tails are fitted for use beyond `r_max`.
pub fn assemble_initial_data(sol: &ConformalSolution) -> Result<InitialData> {
    let dphi = differentiate(&sol.phi, 1)?;
    let ddphi = differentiate(&sol.phi, 2)?;
    let window = default_tail_window(sol.grid().r_max());
    let n = sol.dim.n() as i32;
    let big_n = sol.dim.critical_exponent();
    let fit = |p: RadialProfile| fit_tail_or_zero(&p, window).ok();
    let phi_tail = fit(sol.phi.map(|_, v| v - 1.0)?);
    let tau_tail = fit(sol.tau.clone());
    let dtau = differentiate(&sol.tau, 1)?;
    let rate = sol
        .phi
        .zip_map(&dtau, |r, p, dt| r.powi(n) * p.powf(big_n) * dt)?;
    let a_rate_tail = fit(rate);
    Ok(InitialData {
        dim: sol.dim,
        solution: sol.clone(),
        dphi,
        ddphi,
        phi_tail,
        tau_tail,
        a_rate_tail,
    })
}

impl InitialData {
    pub fn n(&self) -> usize {
        self.dim.n()
    }

    pub fn r_max(&self) -> f64 {
        self.solution.grid().r_max()
    }

    /// Largest radius at which the evaluator is defined.
    pub fn reach(&self) -> f64 {
        if self.phi_tail.is_some() && self.tau_tail.is_some() && self.a_rate_tail.is_some() {
            f64::INFINITY
        } else {
            self.r_max()
        }
    }

    /// Interpolated radial values, with tail models beyond `r_max`.
    pub fn radial(&self, r: f64) -> Result<PointValues> {
        let r_max = self.r_max();
        if !(r >= 0.0) {
            return Err(Error::EvaluationOutOfRange { radius: r, r_max });
        }
        let sol = &self.solution;
        if r <= r_max * EDGE_SLACK {
            let r = r.min(r_max);
            return Ok(PointValues {
                phi: sol.phi.evaluate(r)?,
                dphi: self.dphi.evaluate(r)?,
                ddphi: self.ddphi.evaluate(r)?,
                tau: sol.tau.evaluate(r)?,
                a: sol.a.evaluate(r)?,
            });
        }
        let out = || Error::EvaluationOutOfRange { radius: r, r_max };
        let (pt, tt, at) = match (&self.phi_tail, &self.tau_tail, &self.a_rate_tail) {
            (Some(p), Some(t), Some(a)) => (p, t, a),
            _ => return Err(out()),
        };
        let a_edge = *sol.a.values().last().expect("grid is never empty");
        let grown = if at.is_zero() {
            0.0
        } else if (at.exponent - 1.0).abs() < 1e-12 {
            at.coefficient * (r / r_max).ln()
        } else {
            let e = 1.0 - at.exponent;
            at.coefficient * (r.powf(e) - r_max.powf(e)) / e
        };
        Ok(PointValues {
            phi: 1.0 + pt.value(r),
            dphi: pt.derivative(r),
            ddphi: pt.second_derivative(r),
            tau: tt.value(r),
            a: a_edge + grown,
        })
    }

    fn radius(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::invalid(format!(
                "point has {} components, expected {}",
                x.len(),
                self.n()
            )));
        }
        Ok(x.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// `ψ = φ^(N−2)` and its radial derivative.
    pub fn conformal_power(&self, v: &PointValues) -> (f64, f64) {
        let e = self.dim.critical_exponent() - 2.0;
        let psi = v.phi.powf(e);
        (psi, e * v.phi.powf(e - 1.0) * v.dphi)
    }

    pub fn metric(&self, x: &[f64]) -> Result<SymTensor> {
        let r = self.radius(x)?;
        let v = self.radial(r)?;
        let (psi, _) = self.conformal_power(&v);
        let mut g = SymTensor::zeros(self.n());
        for i in 0..self.n() {
            g.set(i, i, psi);
        }
        Ok(g)
    }

    /// `∂_k g_ij = ψ′ (x_k/r) δ_ij`, indexed by `k`.
    pub fn metric_derivative(&self, x: &[f64]) -> Result<Vec<SymTensor>> {
        let r = self.radius(x)?;
        let v = self.radial(r)?;
        let (_, dpsi) = self.conformal_power(&v);
        let n = self.n();
        Ok((0..n)
            .map(|k| {
                let mut t = SymTensor::zeros(n);
                let s = if r == 0.0 { 0.0 } else { dpsi * x[k] / r };
                for i in 0..n {
                    t.set(i, i, s);
                }
                t
            })
            .collect())
    }

    /// `k_ij = (τ/n) ψ δ_ij − φ^(−2) (δ_ij/(n r^n) − x_i x_j/r^(n+2)) A`.
    pub fn curvature(&self, x: &[f64]) -> Result<SymTensor> {
        let r = self.radius(x)?;
        let v = self.radial(r)?;
        Ok(self.curvature_from(x, r, &v))
    }

    /// Metric and extrinsic curvature at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<(SymTensor, SymTensor)> {
        let r = self.radius(x)?;
        let v = self.radial(r)?;
        let (psi, _) = self.conformal_power(&v);
        let mut g = SymTensor::zeros(self.n());
        for i in 0..self.n() {
            g.set(i, i, psi);
        }
        Ok((g, self.curvature_from(x, r, &v)))
    }

    fn curvature_from(&self, x: &[f64], r: f64, v: &PointValues) -> SymTensor {
        let n = self.n();
        let nf = n as f64;
        let (psi, _) = self.conformal_power(v);
        let iso = v.tau / nf * psi;
        let mut k = SymTensor::zeros(n);
        if r == 0.0 {
            for i in 0..n {
                k.set(i, i, iso);
            }
            return k;
        }
        let scale = v.a / (v.phi * v.phi);
        let rn = r.powi(n as i32);
        let a_diag = 1.0 / (nf * rn);
        let a_off = 1.0 / (rn * r * r);
        for i in 0..n {
            for j in i..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let tf = delta * a_diag - x[i] * x[j] * a_off;
                k.set(i, j, delta * iso - scale * tf);
            }
        }
        k
    }
}
