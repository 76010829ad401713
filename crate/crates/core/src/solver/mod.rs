//! Radial elliptic solves: Helmholtz, Lichnerowicz, the Picard fixed point
//! for freely specified mean curvature, and the smoothed Schwarzschild factor.

mod banded;
mod schwarzschild;

pub use schwarzschild::{smooth_schwarzschild_phi, SchwarzschildSmoothing};

use serde::{Deserialize, Serialize};

use crate::conformal::{lw_norm, momentum_potential, tau_from_phi, ConformalSolution};
use crate::error::{Error, Result};
use crate::radial::{Dimension, RadialGrid, RadialProfile};
use banded::BandMatrix;

/// Iteration controls for the nonlinear solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveControls {
    /// Relative sup-norm tolerance on the Picard update.
    pub tol: f64,
    pub max_outer: usize,
    pub max_newton: usize,
    /// Picard relaxation weight in `(0, 1]`.
    pub damping: f64,
    /// Number of stages `t = s/S` in the continuation `τ ↦ t^N τ`.
    pub continuation_steps: usize,
}

impl Default for SolveControls {
    fn default() -> Self {
        SolveControls {
            tol: 1e-10,
            max_outer: 200,
            max_newton: 50,
            damping: 0.7,
            continuation_steps: 1,
        }
    }
}

impl SolveControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_outer < 1 || self.max_newton < 1 {
            return Err(Error::invalid("iteration limits must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.continuation_steps < 1 {
            return Err(Error::invalid("continuation_steps must be at least 1"));
        }
        Ok(())
    }

    fn newton_tol(&self) -> f64 {
        (1e-3 * self.tol).max(1e-15)
    }
}

/// Convergence history of a fixed-point solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Relative sup-norm Picard updates, one per outer iteration.
    pub outer_iterates: Vec<f64>,
    /// Final sup-norm Newton residual of each inner solve.
    pub newton_residuals: Vec<f64>,
    pub converged: bool,
    /// `sup | |τ_φ| − |τ| |` on `[0, r_max/100]`.
    #[serde(rename = "identity_residual")]
    pub final_identity_residual: f64,
    /// Outer iterations whose iterate exceeded `1 + tol`.
    pub bound_violations: usize,
    /// Largest `sup φ` over all iterates.
    pub max_iterate: f64,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.outer_iterates.len()
    }
}

/// Assemble `Δu − V u` (rows `0..m−1`) and the Robin row `u′ + (n−2)u/r = 0`.
fn helmholtz_matrix(dim: Dimension, grid: &RadialGrid, v: &[f64]) -> BandMatrix {
    let n = dim.nf();
    let m = grid.len();
    let st = grid.operator_stencil();
    let (jac, hess, r) = (grid.jacobian(), grid.hessian(), grid.nodes());
    let mut a = BandMatrix::zeros(m, 4, 2);
    for i in 0..m {
        let (j1, j2) = (jac[i], jac[i] * jac[i]);
        for k in 0..st.width {
            let (node, _) = st.resolve(st.start[i] + k);
            let d1 = st.d1[i][k] / j1;
            let d2 = (st.d2[i][k] - hess[i] * d1) / j2;
            let c = if i == m - 1 {
                d1
            } else if i == 0 {
                n * d2
            } else {
                d2 + (n - 1.0) * d1 / r[i]
            };
            a.add(i, node, c);
        }
        if i == m - 1 {
            a.add(i, i, (n - 2.0) / r[i]);
        } else {
            a.add(i, i, -v[i]);
        }
    }
    a
}

/// `Δu` with the even extension at the origin and the Robin expression in the last entry.
fn apply_laplacian(dim: Dimension, grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let n = dim.nf();
    let m = grid.len();
    let st = grid.operator_stencil();
    let (jac, hess, r) = (grid.jacobian(), grid.hessian(), grid.nodes());
    (0..m)
        .map(|i| {
            let center = u[i];
            let (mut f1, mut f2) = (0.0, 0.0);
            for k in 0..st.width {
                let (node, _) = st.resolve(st.start[i] + k);
                f1 += st.d1[i][k] * (u[node] - center);
                f2 += st.d2[i][k] * (u[node] - center);
            }
            let d1 = f1 / jac[i];
            let d2 = (f2 - hess[i] * d1) / (jac[i] * jac[i]);
            if i == m - 1 {
                d1 + (n - 2.0) * u[i] / r[i]
            } else if i == 0 {
                n * d2
            } else {
                d2 + (n - 1.0) * d1 / r[i]
            }
        })
        .collect()
}

/// Solve `u″ + (n−1)u′/r − V u = rhs`, `u′(0) = 0`, `u′ + (n−2)u/r = 0` at `r_max`.
pub fn solve_radial_helmholtz(
    dim: Dimension,
    v: &RadialProfile,
    rhs: &RadialProfile,
) -> Result<RadialProfile> {
    v.ensure_same_grid(rhs)?;
    if let Some(i) = v.values().iter().position(|&x| x < 0.0) {
        return Err(Error::invalid(format!(
            "potential must be nonnegative, got {} at r = {}",
            v.values()[i],
            v.nodes()[i]
        )));
    }
    let grid = v.grid();
    let a = helmholtz_matrix(dim, grid, v.values());
    let mut b = rhs.values().to_vec();
    *b.last_mut().expect("grid is never empty") = 0.0;
    let u = a.solve(b)?;
    RadialProfile::new(grid.clone(), u)
}

/// `κ = (n−2)/(4(n−1))`.
fn kappa(dim: Dimension) -> f64 {
    let n = dim.nf();
    (n - 2.0) / (4.0 * (n - 1.0))
}

/// Result of an inner Newton solve.
#[derive(Clone, Debug)]
pub struct LichnerowiczSolve {
    pub phi: RadialProfile,
    /// Sup-norm residual after each Newton step.
    pub residuals: Vec<f64>,
}

/// Solve the radial Lichnerowicz equation from the initial guess `φ ≡ 1`.
pub fn solve_lichnerowicz(
    dim: Dimension,
    tau: &RadialProfile,
    lw: &RadialProfile,
    controls: &SolveControls,
) -> Result<RadialProfile> {
    let guess = RadialProfile::constant(tau.grid(), 1.0);
    solve_lichnerowicz_from(dim, tau, lw, &guess, controls).map(|s| s.phi)
}

/// Damped Newton for `Δφ = κ((n−1)/n τ² φ^(N−1) − |LW|² φ^(−N−1))` from a given guess.
pub fn solve_lichnerowicz_from(
    dim: Dimension,
    tau: &RadialProfile,
    lw: &RadialProfile,
    guess: &RadialProfile,
    controls: &SolveControls,
) -> Result<LichnerowiczSolve> {
    controls.validate()?;
    tau.ensure_same_grid(lw)?;
    tau.ensure_same_grid(guess)?;
    let grid = tau.grid();
    let m = grid.len();
    let n = dim.nf();
    let big_n = dim.critical_exponent();
    let kap = kappa(dim);
    let t2: Vec<f64> = tau.values().iter().map(|t| (n - 1.0) / n * t * t).collect();
    let l2: Vec<f64> = lw.values().iter().map(|l| l * l).collect();
    let mut phi = guess.values().to_vec();
    if let Some(i) = phi.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::NonpositiveIterate {
            radius: grid.nodes()[i],
        });
    }
    let residual = |phi: &[f64]| -> Vec<f64> {
        let u: Vec<f64> = phi.iter().map(|p| p - 1.0).collect();
        let mut f = apply_laplacian(dim, grid, &u);
        for i in 0..m - 1 {
            let p = phi[i];
            f[i] -= kap * (t2[i] * p.powf(big_n - 1.0) - l2[i] * p.powf(-big_n - 1.0));
        }
        f
    };
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut residuals = Vec::new();
    let mut f = residual(&phi);
    for _ in 0..controls.max_newton {
        let v: Vec<f64> = phi
            .iter()
            .zip(t2.iter().zip(&l2))
            .map(|(&p, (&t, &l))| {
                kap * ((big_n - 1.0) * t * p.powf(big_n - 2.0) + (big_n + 1.0) * l * p.powf(-big_n - 2.0))
            })
            .collect();
        let a = helmholtz_matrix(dim, grid, &v);
        let delta = a.solve(f.iter().map(|x| -x).collect())?;
        let mut step = 1.0;
        let mut trial: Vec<f64>;
        loop {
            trial = phi.iter().zip(&delta).map(|(p, d)| p + step * d).collect();
            match trial.iter().position(|&p| !(p > 0.0)) {
                None => break,
                Some(i) => {
                    step *= 0.5;
                    if step < 1e-6 {
                        return Err(Error::NonpositiveIterate {
                            radius: grid.nodes()[i],
                        });
                    }
                }
            }
        }
        let size = step * sup(&delta);
        phi = trial;
        f = residual(&phi);
        residuals.push(sup(&f));
        if size <= controls.newton_tol() * sup(&phi) && step == 1.0 {
            return Ok(LichnerowiczSolve {
                phi: RadialProfile::new(grid.clone(), phi)?,
                residuals,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: controls.max_newton,
        last_update: residuals.last().copied().unwrap_or(f64::NAN),
        trace: None,
    })
}

/// Sup of `| |τ_φ| − |τ| |` over nodes with `r ≤ r_max/100`.
pub fn identity_residual(tau_phi: &RadialProfile, tau: &RadialProfile) -> f64 {
    let limit = tau.grid().r_max() / 100.0;
    tau.nodes()
        .iter()
        .zip(tau_phi.values().iter().zip(tau.values()))
        .filter(|(&r, _)| r <= limit)
        .fold(0.0, |acc, (_, (a, b))| acc.max((a.abs() - b.abs()).abs()))
}

/// Damped Picard iteration for freely specified `τ`, with optional continuation.
pub fn fixed_point_solve(
    dim: Dimension,
    tau: &RadialProfile,
    controls: &SolveControls,
) -> Result<(ConformalSolution, SolveTrace)> {
    let guess = RadialProfile::constant(tau.grid(), 1.0);
    fixed_point_solve_from(dim, tau, &guess, controls)
}

/// [`fixed_point_solve`] from a given initial conformal factor.
pub fn fixed_point_solve_from(
    dim: Dimension,
    tau: &RadialProfile,
    guess: &RadialProfile,
    controls: &SolveControls,
) -> Result<(ConformalSolution, SolveTrace)> {
    controls.validate()?;
    tau.ensure_same_grid(guess)?;
    let big_n = dim.critical_exponent();
    let mut trace = SolveTrace {
        max_iterate: f64::MIN,
        ..SolveTrace::default()
    };
    let mut phi = guess.clone();
    let stages = controls.continuation_steps;
    let nontrivial = tau.max_abs() > 0.0;
    for s in 1..=stages {
        let t = s as f64 / stages as f64;
        let scale = t.powf(big_n);
        let tau_t = tau.map(|_, v| scale * v)?;
        let mut stage_converged = false;
        for _ in 0..controls.max_outer {
            let a = momentum_potential(dim, &phi, &tau_t)?;
            let lw = lw_norm(dim, &a);
            let inner = solve_lichnerowicz_from(dim, &tau_t, &lw, &phi, controls)?;
            trace
                .newton_residuals
                .push(inner.residuals.last().copied().unwrap_or(0.0));
            let new = inner.phi;
            let diff = new
                .values()
                .iter()
                .zip(phi.values())
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
            let update = diff / new.max_abs();
            let d = controls.damping;
            phi = phi.zip_map(&new, |_, old, nv| (1.0 - d) * old + d * nv)?;
            trace.outer_iterates.push(update);
            let top = phi.values().iter().fold(f64::MIN, |a, &p| a.max(p));
            trace.max_iterate = trace.max_iterate.max(top);
            if nontrivial && top > 1.0 + controls.tol {
                trace.bound_violations += 1;
            }
            if update < controls.tol {
                stage_converged = true;
                break;
            }
        }
        if !stage_converged {
            return Err(Error::NoConvergence {
                iterations: trace.iterations(),
                last_update: trace.outer_iterates.last().copied().unwrap_or(f64::NAN),
                trace: Some(Box::new(trace)),
            });
        }
    }
    trace.converged = true;
    let tau_phi = tau_from_phi(dim, &phi)?;
    trace.final_identity_residual = identity_residual(&tau_phi, tau);
    let sol = ConformalSolution::from_phi_tau(dim, phi, tau.clone())?;
    Ok((sol, trace))
}
