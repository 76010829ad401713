use serde::Serialize;

use crate::conformal::{InitialData, SymTensor};
use crate::error::{Error, Result};

/// Default relative finite-difference step: `h(x) = H_SCALE·(1 + |x|)`.
pub const H_SCALE: f64 = 1e-3;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn check_reach(data: &InitialData, x: &[f64], h: f64) -> Result<f64> {
    let r = norm(x);
    let reach = data.reach();
    if r + 2.0 * h > reach {
        return Err(Error::EvaluationOutOfRange {
            radius: r + 2.0 * h,
            r_max: reach,
        });
    }
    Ok(r)
}

/// `R_g − |k|²_g + (tr_g k)²` at each point, with the scalar curvature of the
/// conformally flat metric in closed form.
pub fn hamiltonian_residual(data: &InitialData, points: &[Vec<f64>], h_scale: f64) -> Result<Vec<f64>> {
    hamiltonian_terms(data, points, h_scale).map(|v| v.into_iter().map(|(r, _)| r).collect())
}

/// Residual and the sum of absolute values of its three terms.
fn hamiltonian_terms(data: &InitialData, points: &[Vec<f64>], h_scale: f64) -> Result<Vec<(f64, f64)>> {
    let n = data.n() as f64;
    let big_n = data.dim.critical_exponent();
    points
        .iter()
        .map(|x| {
            let r = check_reach(data, x, h_scale * (1.0 + norm(x)))?;
            let v = data.radial(r)?;
            let lap = if r == 0.0 {
                n * v.ddphi
            } else {
                v.ddphi + (n - 1.0) * v.dphi / r
            };
            let scalar = -4.0 * (n - 1.0) / (n - 2.0) * v.phi.powf(1.0 - big_n) * lap;
            let k = data.curvature(x)?;
            let (psi, _) = data.conformal_power(&v);
            let k_sq = k.norm_sq() / (psi * psi);
            let tr = k.trace() / psi;
            Ok((scalar - k_sq + tr * tr, scalar.abs() + k_sq + tr * tr))
        })
        .collect()
}

/// `P = k − (tr_g k) g`.
fn momentum_tensor(data: &InitialData, x: &[f64]) -> Result<SymTensor> {
    let (g, k) = data.evaluate(x)?;
    let psi = g.get(0, 0);
    let tr = k.trace() / psi;
    let n = data.n();
    let mut p = k.clone();
    for i in 0..n {
        p.set(i, i, k.get(i, i) - tr * psi);
    }
    Ok(p)
}

/// Euclidean magnitude of `div_g(k − (tr_g k) g)` at each point, by centered
/// 4th-order differences of the evaluator plus Christoffel terms of `g`.
pub fn momentum_residual(data: &InitialData, points: &[Vec<f64>], h_scale: f64) -> Result<Vec<f64>> {
    momentum_terms(data, points, h_scale).map(|v| v.into_iter().map(|(r, _)| r).collect())
}

/// Residual magnitude and the magnitude of the sum of absolute term values.
fn momentum_terms(data: &InitialData, points: &[Vec<f64>], h_scale: f64) -> Result<Vec<(f64, f64)>> {
    let n = data.n();
    points
        .iter()
        .map(|x| {
            let h = h_scale * (1.0 + norm(x));
            let r = check_reach(data, x, h)?;
            let v = data.radial(r)?;
            let (psi, dpsi) = data.conformal_power(&v);
            let grad: Vec<f64> = x
                .iter()
                .map(|&c| if r == 0.0 { 0.0 } else { dpsi * c / r })
                .collect();
            let p = momentum_tensor(data, x)?;
            // ∂_i P_ij for each j, with the absolute size of each contribution
            let mut dp = vec![0.0; n];
            let mut mag = vec![0.0; n];
            for i in 0..n {
                let shifted = |s: f64| -> Result<SymTensor> {
                    let mut y = x.clone();
                    y[i] += s;
                    momentum_tensor(data, &y)
                };
                let (pm2, pm1, pp1, pp2) = (shifted(-2.0 * h)?, shifted(-h)?, shifted(h)?, shifted(2.0 * h)?);
                for j in 0..n {
                    let d = (pm2.get(i, j) - 8.0 * pm1.get(i, j) + 8.0 * pp1.get(i, j) - pp2.get(i, j))
                        / (12.0 * h);
                    dp[j] += d;
                    mag[j] += d.abs();
                }
            }
            // Γ^m_ij = (δ_mi ∂_jψ + δ_mj ∂_iψ − δ_ij ∂_mψ) / (2ψ)
            let gamma = |m: usize, i: usize, j: usize| -> f64 {
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                (d(m, i) * grad[j] + d(m, j) * grad[i] - d(i, j) * grad[m]) / (2.0 * psi)
            };
            let mut div = vec![0.0; n];
            for j in 0..n {
                let mut acc = dp[j];
                for i in 0..n {
                    for m in 0..n {
                        let t = gamma(m, i, i) * p.get(m, j) + gamma(m, i, j) * p.get(i, m);
                        acc -= t;
                        mag[j] += t.abs();
                    }
                }
                div[j] = acc / psi;
                mag[j] /= psi;
            }
            Ok((norm(&div), norm(&mag)))
        })
        .collect()
}

/// Pointwise constraint residuals at two finite-difference steps.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub points: Vec<Vec<f64>>,
    pub hamiltonian: Vec<f64>,
    pub momentum: Vec<f64>,
    pub stencil_h: f64,
    pub hamiltonian_sup: f64,
    pub momentum_sup: f64,
    /// `hamiltonian_sup` over the largest sum of absolute term values.
    pub hamiltonian_relative: f64,
    /// `momentum_sup` over the largest magnitude of the summed terms.
    pub momentum_relative: f64,
    /// Momentum residual sup at `stencil_h / 2`.
    pub momentum_sup_half: Option<f64>,
    /// `log2` of the momentum sup ratio between the two steps.
    pub convergence_order: Option<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

/// Residuals at `h_scale`, plus the momentum residual at `h_scale/2` for an order estimate.
pub fn residual_report(data: &InitialData, points: &[Vec<f64>], h_scale: f64) -> Result<ResidualReport> {
    if !(h_scale > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h_scale}")));
    }
    let (hamiltonian, h_mag): (Vec<f64>, Vec<f64>) =
        hamiltonian_terms(data, points, h_scale)?.into_iter().unzip();
    let (momentum, m_mag): (Vec<f64>, Vec<f64>) =
        momentum_terms(data, points, h_scale)?.into_iter().unzip();
    let half = momentum_residual(data, points, h_scale / 2.0)?;
    let (hs, ms, mh) = (sup(&hamiltonian), sup(&momentum), sup(&half));
    let order = if ms > 0.0 && mh > 0.0 {
        Some((ms / mh).log2())
    } else {
        None
    };
    Ok(ResidualReport {
        points: points.to_vec(),
        hamiltonian_sup: hs,
        momentum_sup: ms,
        hamiltonian_relative: ratio(hs, sup(&h_mag)),
        momentum_relative: ratio(ms, sup(&m_mag)),
        hamiltonian,
        momentum,
        stencil_h: h_scale,
        momentum_sup_half: Some(mh),
        convergence_order: order,
    })
}

/// Observed order between a coarse and a 2× refined run: `(hamiltonian, momentum)`.
pub fn refinement_order(coarse: &ResidualReport, fine: &ResidualReport) -> (f64, f64) {
    (
        (coarse.hamiltonian_sup / fine.hamiltonian_sup).log2(),
        (coarse.momentum_sup / fine.momentum_sup).log2(),
    )
}

/// `count` deterministic points with radii log-spaced on `[r_lo, r_hi]` and
/// quasi-random directions.
pub fn sample_points(n: usize, count: usize, r_lo: f64, r_hi: f64) -> Vec<Vec<f64>> {
    // additive recurrence on the generalized golden ratio in n dimensions
    let alpha = {
        let mut g = 2.0_f64;
        for _ in 0..64 {
            g = (1.0 + g).powf(1.0 / (n as f64 + 1.0));
        }
        g
    };
    let steps: Vec<f64> = (1..=n).map(|j| alpha.powi(-(j as i32))).collect();
    (0..count)
        .map(|k| {
            let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let r = r_lo * (r_hi / r_lo).powf(t);
            let dir: Vec<f64> = steps
                .iter()
                .map(|s| {
                    let u = (0.5 + s * (k + 1) as f64).fract();
                    2.0 * u - 1.0
                })
                .collect();
            let len = norm(&dir).max(1e-12);
            dir.iter().map(|d| r * d / len).collect()
        })
        .collect()
}

/// The 64 default verification points, `|x| ∈ [0.1, 50]`.
pub fn default_points(n: usize) -> Vec<Vec<f64>> {
    sample_points(n, 64, 0.1, 50.0)
}
