//! Closed-form radial conformal-method formulas and assembly of `(g, k)`.

mod initial_data;
mod solution;

pub use initial_data::{assemble_initial_data, InitialData, PointValues, SymTensor};
pub use solution::{read_bundle_csv, write_bundle_csv, ConformalSolution, SeedData};

use crate::error::{Error, Result};
use crate::radial::{
    default_tail_window, derivative_pair, fit_tail_or_zero, integrate_from_zero,
    integrate_to_infinity, Dimension, Parity, RadialProfile,
};

/// Relative threshold on `φ′` below which the flat branch of the identity is used.
pub const BRANCH_EPS: f64 = 1e-12;

/// Relative tolerance for roundoff-level negative `φ′` and radicands.
const SIGN_TOL: f64 = 1e-9;

/// Roundoff amplification of the derivative stencils, in units of `ε φ / Δr^k`.
const STENCIL_ROUNDOFF: f64 = 64.0;

/// Which branch of the master identity produced `τ` at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `φ′ = 0`: `τ = √(2nN φ^(1−N) φ″)`.
    Flat,
    /// `φ′ > 0`: the general quotient form.
    Increasing,
}

/// `τ` together with the branch used at every node.
#[derive(Clone, Debug)]
pub struct TauBranches {
    pub tau: RadialProfile,
    pub branches: Vec<Branch>,
}

/// Nonnegative mean curvature `τ` for which `φ` solves the radial conformal equations.
pub fn tau_from_phi(dim: Dimension, phi: &RadialProfile) -> Result<RadialProfile> {
    tau_from_phi_detailed(dim, phi).map(|t| t.tau)
}

/// [`tau_from_phi`] with the per-node branch map.
pub fn tau_from_phi_detailed(dim: Dimension, phi: &RadialProfile) -> Result<TauBranches> {
    let n = dim.nf();
    let big_n = dim.critical_exponent();
    let r = phi.nodes();
    let v = phi.values();
    if let Some(i) = v.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::invalid(format!(
            "conformal factor must be positive, got {} at r = {}",
            v[i], r[i]
        )));
    }
    let (d1, d2) = derivative_pair(phi, Parity::Even);
    let scale = d1.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for (i, &dp) in d1.iter().enumerate() {
        if dp < -SIGN_TOL * scale {
            return Err(Error::NotMonotone {
                radius: r[i],
                derivative: dp,
            });
        }
    }
    // below the roundoff floor of the derivative stencil the second branch is 0/0
    let half_spacing = |i: usize| {
        let lo = if i > 0 { r[i - 1] } else { r[i] };
        let hi = if i + 1 < r.len() { r[i + 1] } else { r[i] };
        0.5 * (hi - lo)
    };
    let threshold = |i: usize| (BRANCH_EPS * scale).min(16.0 * f64::EPSILON * v[i] / half_spacing(i));
    let mut tau = Vec::with_capacity(r.len());
    let mut noise = vec![0.0; r.len()];
    let mut branches = Vec::with_capacity(r.len());
    let curvature_scale = d2.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for i in 0..r.len() {
        let (p, dp, ddp) = (v[i], d1[i], d2[i]);
        if i == 0 || dp <= threshold(i) {
            let rad = 2.0 * n * big_n * p.powf(1.0 - big_n) * ddp;
            if ddp < -SIGN_TOL * curvature_scale {
                return Err(Error::NegativeRadicand {
                    radius: r[i],
                    value: rad,
                });
            }
            tau.push(rad.max(0.0).sqrt());
            branches.push(Branch::Flat);
        } else {
            let ri = r[i];
            let h = big_n / 2.0;
            let num = (2.0 * n - 1.0) * p.powf(h) * dp / ri
                + h * p.powf(h - 1.0) * dp * dp
                + p.powf(h) * ddp;
            let rad = dp * dp + (n - 2.0) * p * dp / ri;
            let value = num / (p.powf(big_n - 1.0) * rad.sqrt());
            // roundoff carried by the stencils into φ′ and φ″ where φ is nearly constant
            let dr = half_spacing(i);
            let d_noise = STENCIL_ROUNDOFF * f64::EPSILON * p / dr;
            let num_noise = p.powf(h) * (d_noise / dr + (2.0 * n - 1.0) * d_noise / ri);
            noise[i] = num_noise / (p.powf(big_n - 1.0) * rad.sqrt());
            tau.push(value);
            branches.push(Branch::Increasing);
        }
    }
    let peak = tau.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for (i, t) in tau.iter_mut().enumerate() {
        if *t < 0.0 {
            if *t < -(SIGN_TOL * peak).max(noise[i]) {
                return Err(Error::NegativeRadicand {
                    radius: r[i],
                    value: *t,
                });
            }
            *t = 0.0;
        }
    }
    Ok(TauBranches {
        tau: RadialProfile::new(phi.grid().clone(), tau)?,
        branches,
    })
}

/// `φ^N τ′`, the radial source of the vector equation.
fn source_density(dim: Dimension, phi: &RadialProfile, tau: &RadialProfile) -> Result<RadialProfile> {
    phi.ensure_same_grid(tau)?;
    let big_n = dim.critical_exponent();
    let (dtau, _) = derivative_pair(tau, Parity::Even);
    let values = phi
        .values()
        .iter()
        .zip(&dtau)
        .map(|(p, dt)| p.powf(big_n) * dt)
        .collect();
    RadialProfile::new(phi.grid().clone(), values)
}

/// `A(r) = ∫_0^r s^n φ^N τ′ ds`.
pub fn momentum_potential(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
) -> Result<RadialProfile> {
    let n = dim.n() as i32;
    let density = source_density(dim, phi, tau)?.map(|r, v| r.powi(n) * v)?;
    Ok(integrate_from_zero(&density))
}

/// `f(r) = −∫_r^∞ φ^N τ′ ds`.
pub fn source_integral(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
) -> Result<RadialProfile> {
    let density = source_density(dim, phi, tau)?;
    let tail = fit_tail_or_zero(&density, default_tail_window(phi.grid().r_max()))?;
    let j = integrate_to_infinity(&density.with_tail_model(tail))?;
    j.map(|_, v| -v)
}

/// The radial vector potential and the source integral it was built from.
#[derive(Clone, Debug)]
pub struct VectorPotential {
    /// `w` with `W_i = x_i w(|x|)`.
    pub w: RadialProfile,
    /// `f(r) = −∫_r^∞ φ^N τ′ ds`.
    pub f: RadialProfile,
}

/// `w(r) = (1/(2r^n)) ∫_0^r s^(n−1) f(s) ds`, with `w(0) = f(0)/(2n)`.
pub fn vector_potential(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
) -> Result<RadialProfile> {
    vector_potential_parts(dim, phi, tau).map(|p| p.w)
}

/// [`vector_potential`] also returning `f`.
pub fn vector_potential_parts(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
) -> Result<VectorPotential> {
    let n = dim.n() as i32;
    let f = source_integral(dim, phi, tau)?;
    let moment = integrate_from_zero(&f.map(|r, v| r.powi(n - 1) * v)?);
    let f0 = f.values()[0];
    let w = moment.map(|r, m| {
        if r == 0.0 {
            f0 / (2.0 * dim.nf())
        } else {
            m / (2.0 * r.powi(n))
        }
    })?;
    Ok(VectorPotential { w, f })
}

/// `div W = n·w + r·w′`.
pub fn divergence_of_w(dim: Dimension, w: &RadialProfile) -> Result<RadialProfile> {
    let n = dim.nf();
    let (dw, _) = derivative_pair(w, Parity::Even);
    let values = w
        .nodes()
        .iter()
        .zip(w.values().iter().zip(&dw))
        .map(|(&r, (&wv, &dwv))| n * wv + r * dwv)
        .collect();
    RadialProfile::new(w.grid().clone(), values)
}

/// Euclidean norm `|LW| = √((n−1)/n)·|A|/r^n`; zero at the origin.
pub fn lw_norm(dim: Dimension, a: &RadialProfile) -> RadialProfile {
    let n = dim.nf();
    let k = ((n - 1.0) / n).sqrt();
    let ni = dim.n() as i32;
    a.map(|r, v| if r == 0.0 { 0.0 } else { k * v.abs() / r.powi(ni) })
        .expect("finite input yields finite output")
}

/// Residual of the reduced radial equation
/// `−(4n/(n−2))(φ″ + (n−1)φ′/r) + τ²φ^(N−1) − (n/(n−1))|LW|²φ^(−N−1)`.
pub fn lichnerowicz_residual(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
    lw: &RadialProfile,
) -> Result<RadialProfile> {
    lichnerowicz_terms(dim, phi, tau, lw).map(|t| t.residual)
}

pub(crate) struct LichnerowiczTerms {
    pub residual: RadialProfile,
    /// Pointwise sum of the absolute values of the three terms.
    pub magnitude: Vec<f64>,
}

pub(crate) fn lichnerowicz_terms(
    dim: Dimension,
    phi: &RadialProfile,
    tau: &RadialProfile,
    lw: &RadialProfile,
) -> Result<LichnerowiczTerms> {
    phi.ensure_same_grid(tau)?;
    phi.ensure_same_grid(lw)?;
    let n = dim.nf();
    let big_n = dim.critical_exponent();
    let (d1, d2) = derivative_pair(phi, Parity::Even);
    let r = phi.nodes();
    let mut res = Vec::with_capacity(r.len());
    let mut mag = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let p = phi.values()[i];
        let lap = if r[i] == 0.0 {
            n * d2[i]
        } else {
            d2[i] + (n - 1.0) * d1[i] / r[i]
        };
        let t1 = -4.0 * n / (n - 2.0) * lap;
        let t2 = tau.values()[i].powi(2) * p.powf(big_n - 1.0);
        let t3 = n / (n - 1.0) * lw.values()[i].powi(2) * p.powf(-big_n - 1.0);
        res.push(t1 + t2 - t3);
        mag.push(t1.abs() + t2.abs() + t3.abs());
    }
    Ok(LichnerowiczTerms {
        residual: RadialProfile::new(phi.grid().clone(), res)?,
        magnitude: mag,
    })
}

/// `φ′·(2nφ + N r φ′)`, nonnegative exactly when the data are admissible.
pub fn monotonicity_condition(dim: Dimension, phi: &RadialProfile) -> RadialProfile {
    let n = dim.nf();
    let big_n = dim.critical_exponent();
    let (d1, _) = derivative_pair(phi, Parity::Even);
    let values = phi
        .nodes()
        .iter()
        .zip(phi.values().iter().zip(&d1))
        .map(|(&r, (&p, &dp))| dp * (2.0 * n * p + big_n * r * dp))
        .collect();
    RadialProfile::new(phi.grid().clone(), values).expect("finite input yields finite output")
}
