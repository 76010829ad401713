use serde::Serialize;

use crate::conformal::{
    divergence_of_w, lichnerowicz_terms, monotonicity_condition, tau_from_phi, vector_potential_parts,
    ConformalSolution,
};
use crate::radial::RadialProfile;

/// Thresholds used by [`check_solution`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckTolerances {
    /// Relative slack in `φ′(2nφ + Nrφ′) ≥ 0`.
    pub monotone: f64,
    pub identity: f64,
    pub lw_identity: f64,
    pub div_w: f64,
    pub lichnerowicz: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            monotone: 1e-10,
            identity: 1e-6,
            lw_identity: 1e-12,
            div_w: 1e-6,
            lichnerowicz: 1e-6,
        }
    }
}

/// Consolidated pass/fail record for one solution.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionCheck {
    pub monotone: bool,
    /// Smallest value of `φ′(2nφ + Nrφ′)`.
    pub monotone_min: f64,
    pub identity_residual: f64,
    pub lw_identity: f64,
    pub div_w_identity: f64,
    pub lichnerowicz_residual: f64,
    pub tolerances: CheckTolerances,
    pub failures: Vec<String>,
}

impl SolutionCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Relative sup of `a − b` over nodes with `r ≤ r_hi`, scaled by `scale` unless it vanishes.
fn relative_sup(p: &RadialProfile, r_hi: f64, scale: f64, f: impl Fn(usize) -> f64) -> f64 {
    let sup = p
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, &r)| r <= r_hi)
        .fold(0.0_f64, |m, (i, _)| m.max(f(i).abs()));
    if scale > 0.0 {
        sup / scale
    } else {
        sup
    }
}

fn windowed_max(p: &RadialProfile, r_hi: f64) -> f64 {
    p.nodes()
        .iter()
        .zip(p.values())
        .filter(|(&r, _)| r <= r_hi)
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
}

/// Run every consistency check with default tolerances.
pub fn check_solution(sol: &ConformalSolution) -> SolutionCheck {
    check_solution_with(sol, CheckTolerances::default())
}

/// Run every consistency check; failures are recorded, never raised.
pub fn check_solution_with(sol: &ConformalSolution, tol: CheckTolerances) -> SolutionCheck {
    let dim = sol.dim;
    let r_max = sol.grid().r_max();
    let inner = r_max / 100.0;
    let mut failures = Vec::new();

    let cond = monotonicity_condition(dim, &sol.phi);
    let monotone_min = cond.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = monotone_min >= -tol.monotone * cond.max_abs();
    if !monotone {
        failures.push(format!("monotone: min condition {monotone_min:e}"));
    }

    let tau_scale = windowed_max(&sol.tau, inner);
    let identity_residual = match tau_from_phi(dim, &sol.phi) {
        Ok(t) => relative_sup(&t, inner, tau_scale, |i| t.values()[i].abs() - sol.tau.values()[i].abs()),
        Err(_) => f64::INFINITY,
    };
    if !(identity_residual <= tol.identity) {
        failures.push(format!("identity: residual {identity_residual:e}"));
    }

    let n = dim.nf();
    let k = (n / (n - 1.0)).sqrt();
    let a_scale = sol.a.max_abs();
    let ni = dim.n() as i32;
    let lw_identity = relative_sup(&sol.a, f64::INFINITY, a_scale, |i| {
        let r = sol.a.nodes()[i];
        k * sol.lw.values()[i] * r.powi(ni) - sol.a.values()[i].abs()
    });
    if !(lw_identity <= tol.lw_identity) {
        failures.push(format!("lw identity: residual {lw_identity:e}"));
    }

    let div_w_identity = vector_potential_parts(dim, &sol.phi, &sol.tau)
        .and_then(|vp| {
            let div = divergence_of_w(dim, &sol.w)?;
            let scale = windowed_max(&vp.f, inner);
            Ok(relative_sup(&div, inner, scale, |i| {
                div.values()[i] - 0.5 * vp.f.values()[i]
            }))
        })
        .unwrap_or(f64::INFINITY);
    if !(div_w_identity <= tol.div_w) {
        failures.push(format!("divW identity: residual {div_w_identity:e}"));
    }

    let lichnerowicz_residual = lichnerowicz_terms(dim, &sol.phi, &sol.tau, &sol.lw)
        .map(|t| {
            let hi = r_max / 10.0;
            let nodes = t.residual.nodes();
            let scale = nodes
                .iter()
                .zip(&t.magnitude)
                .filter(|(&r, _)| r <= hi)
                .fold(0.0_f64, |m, (_, v)| m.max(*v));
            relative_sup(&t.residual, hi, scale, |i| t.residual.values()[i])
        })
        .unwrap_or(f64::INFINITY);
    if !(lichnerowicz_residual <= tol.lichnerowicz) {
        failures.push(format!("lichnerowicz: residual {lichnerowicz_residual:e}"));
    }

    SolutionCheck {
        monotone,
        monotone_min,
        identity_residual,
        lw_identity,
        div_w_identity,
        lichnerowicz_residual,
        tolerances: tol,
        failures,
    }
}
