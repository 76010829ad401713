use serde::{Serialize, Serializer};

use crate::conformal::InitialData;
use crate::error::{Error, Result};
use crate::radial::stencil::gauss_legendre;
use crate::radial::{differentiate, Dimension, RadialProfile};

/// Fewest tail-window nodes accepted by the radial estimator.
const MIN_TAIL_NODES: usize = 8;
/// Log-log growth slope over the last decade that counts as divergence.
pub const DIVERGENCE_SLOPE: f64 = 0.1;
const POLAR_NODES: usize = 32;
const AZIMUTH_NODES: usize = 64;

/// A mass value; divergent values serialize as `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassValue {
    Finite(f64),
    NegInfinity,
    PosInfinity,
}

impl MassValue {
    pub fn value(self) -> f64 {
        match self {
            MassValue::Finite(v) => v,
            MassValue::NegInfinity => f64::NEG_INFINITY,
            MassValue::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, MassValue::Finite(_))
    }

    fn divergent(sign: f64) -> Self {
        if sign < 0.0 {
            MassValue::NegInfinity
        } else {
            MassValue::PosInfinity
        }
    }

    /// `-1`, `0` or `1`, treating `|m| < zero_band` as zero.
    pub fn sign_class(self, zero_band: f64) -> i8 {
        match self {
            MassValue::Finite(v) if v.abs() < zero_band => 0,
            MassValue::Finite(v) if v < 0.0 => -1,
            MassValue::Finite(_) => 1,
            MassValue::NegInfinity => -1,
            MassValue::PosInfinity => 1,
        }
    }
}

impl Serialize for MassValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MassValue::Finite(v) => s.serialize_f64(*v),
            _ => s.serialize_none(),
        }
    }
}

/// The three normalizations of one underlying estimate, in the order
/// `(standard, paper_radial, paper_surface)`.
pub fn conventions_from_limit(dim: Dimension, limit: f64) -> [f64; 3] {
    let n = dim.nf();
    [
        -2.0 / (n - 2.0) * limit,
        -(n - 1.0) / (2.0 * (n - 2.0)) * limit,
        -2.0 * (n - 1.0) / ((n - 2.0) * (n - 2.0)) * limit,
    ]
}

/// Same as [`conventions_from_limit`] for a sphere flux `∮ (g_ij,i − g_ii,j) ν^j dS`.
pub fn conventions_from_flux(dim: Dimension, flux: f64) -> [f64; 3] {
    let n = dim.nf();
    let omega = sphere_area(dim.n());
    let standard = flux / (2.0 * (n - 1.0) * omega);
    [
        standard,
        standard * (n - 1.0) / 4.0,
        flux / (2.0 * (n - 2.0) * omega),
    ]
}

fn as_values(v: [f64; 3]) -> [MassValue; 3] {
    v.map(MassValue::Finite)
}

/// Area of the unit sphere in `ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    // ω_{n−1} = 2π^{n/2}/Γ(n/2), with Γ(n/2) by recurrence
    let half = n as f64 / 2.0;
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(half) / gamma
}

/// Least squares `y ≈ c0 + c1 (r0/r) + c2 (r0/r)²`; returns `c0`.
pub(crate) fn extrapolate_limit(rs: &[f64], ys: &[f64]) -> f64 {
    let r0 = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    let cols = if rs.len() >= 6 { 3 } else if rs.len() >= 3 { 2 } else { 1 };
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&r, &y) in rs.iter().zip(ys) {
        let t = r0 / r;
        let basis = [1.0, t, t * t];
        for i in 0..cols {
            atb[i] += basis[i] * y;
            for j in 0..cols {
                ata[i][j] += basis[i] * basis[j];
            }
        }
    }
    // Gaussian elimination on the small normal system
    for k in 0..cols {
        for i in k + 1..cols {
            let l = ata[i][k] / ata[k][k];
            for j in k..cols {
                ata[i][j] -= l * ata[k][j];
            }
            atb[i] -= l * atb[k];
        }
    }
    let mut c = [0.0; 3];
    for k in (0..cols).rev() {
        let s: f64 = (k + 1..cols).map(|j| ata[k][j] * c[j]).sum();
        c[k] = (atb[k] - s) / ata[k][k];
    }
    c[0]
}

/// Growth of `|y|` over the samples: `(monotone, log-log slope)`.
fn growth(rs: &[f64], ys: &[f64]) -> (bool, f64) {
    let mags: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
    let monotone = mags.windows(2).all(|w| w[1] >= w[0]);
    let (first, last) = (mags[0], mags[mags.len() - 1]);
    if !(first > 0.0) || rs.len() < 2 {
        return (false, 0.0);
    }
    let slope = (last / first).ln() / (rs[rs.len() - 1] / rs[0]).ln();
    (monotone, slope)
}

/// Radial estimate of `L = lim r^(n−1) φ′`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialMass {
    /// Extrapolated limit; `None` when the samples diverge.
    pub limit: Option<f64>,
    pub window: (f64, f64),
    /// `|r^(n−1)φ′|` ratio across the last decade.
    pub growth_factor: f64,
    pub growth_slope: f64,
    pub diverges: bool,
    /// `(standard, paper_radial, paper_surface)`.
    pub conventions: [MassValue; 3],
}

/// Surface-integral estimate over spheres `|x| = R`.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceMass {
    pub radii: Vec<f64>,
    pub flux: Vec<f64>,
    pub extrapolated_flux: Option<f64>,
    pub diverges: bool,
    /// `(standard, paper_radial, paper_surface)`.
    pub conventions: [MassValue; 3],
}

/// ADM mass under the standard and two alternative normalizations.
#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    pub mass_standard: MassValue,
    pub mass_paper_radial: MassValue,
    pub mass_paper_surface: Option<MassValue>,
    pub radii_used: Vec<f64>,
    pub extrapolated: bool,
    pub diverges: bool,
    pub radial: RadialMass,
    pub surface: Option<SurfaceMass>,
}

impl MassReport {
    /// Attach a surface estimate.
    pub fn with_surface(mut self, s: SurfaceMass) -> Self {
        self.mass_paper_surface = Some(s.conventions[2]);
        self.radii_used = s.radii.clone();
        self.extrapolated = self.extrapolated && s.extrapolated_flux.is_some();
        self.surface = Some(s);
        self
    }
}

/// Radial estimator on the last two decades of the grid.
pub fn adm_mass_radial(dim: Dimension, phi: &RadialProfile) -> Result<MassReport> {
    let grid = phi.grid();
    let r_max = grid.r_max();
    let window = (r_max / 100.0, r_max);
    let idx = grid.window_indices(window.0, window.1);
    if idx.len() < MIN_TAIL_NODES {
        return Err(Error::NoTail(format!("fewer than 8 nodes in [{}, {}]", window.0, window.1)));
    }
    let d = differentiate(phi, 1)?;
    let p = dim.n() as i32 - 1;
    let rs = &grid.nodes()[idx.clone()];
    let ys: Vec<f64> = rs
        .iter()
        .zip(&d.values()[idx])
        .map(|(&r, &v)| r.powi(p) * v)
        .collect();
    let decade = rs.iter().position(|&r| r >= r_max / 10.0).unwrap_or(0);
    let (monotone, slope) = growth(&rs[decade..], &ys[decade..]);
    let growth_factor = {
        let (a, b) = (ys[decade].abs(), ys[ys.len() - 1].abs());
        if a > 0.0 {
            b / a
        } else {
            1.0
        }
    };
    let diverges = monotone && slope >= DIVERGENCE_SLOPE;
    let (limit, conventions) = if diverges {
        let m = MassValue::divergent(-ys[ys.len() - 1].signum());
        (None, [m; 3])
    } else {
        let l = extrapolate_limit(rs, &ys);
        (Some(l), as_values(conventions_from_limit(dim, l)))
    };
    let radial = RadialMass {
        limit,
        window,
        growth_factor,
        growth_slope: slope,
        diverges,
        conventions,
    };
    Ok(MassReport {
        mass_standard: conventions[0],
        mass_paper_radial: conventions[1],
        mass_paper_surface: None,
        radii_used: Vec::new(),
        extrapolated: !diverges,
        diverges,
        radial,
        surface: None,
    })
}

/// Flux `∮_{|x|=R} Σ (∂_i g_ij − ∂_j g_ii) x_j/R dS` by a product Gauss rule.
pub fn surface_flux(data: &InitialData, radius: f64) -> Result<f64> {
    let n = data.n();
    let (gx, gw) = gauss_legendre(POLAR_NODES);
    let polar: Vec<(f64, f64)> = gx
        .iter()
        .zip(&gw)
        .map(|(x, w)| (std::f64::consts::FRAC_PI_2 * (x + 1.0), std::f64::consts::FRAC_PI_2 * w))
        .collect();
    let azimuth: Vec<f64> = (0..AZIMUTH_NODES)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / AZIMUTH_NODES as f64)
        .collect();
    let dphi_w = 2.0 * std::f64::consts::PI / AZIMUTH_NODES as f64;
    let mut total = 0.0;
    let mut idx = vec![0usize; n - 2];
    loop {
        // angles θ_1..θ_{n−2} from the Gauss rule, θ_{n−1} uniform
        let mut weight = radius.powi(n as i32 - 1) * dphi_w;
        let mut dir = vec![0.0; n];
        let mut prod_sin = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            let (theta, w) = polar[i];
            weight *= w * theta.sin().powi((n - 2 - k) as i32);
            dir[k] = prod_sin * theta.cos();
            prod_sin *= theta.sin();
        }
        for &az in &azimuth {
            dir[n - 2] = prod_sin * az.cos();
            dir[n - 1] = prod_sin * az.sin();
            let x: Vec<f64> = dir.iter().map(|d| radius * d).collect();
            let dg = data.metric_derivative(&x)?;
            let mut integrand = 0.0;
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += dg[i].get(i, j) - dg[j].get(i, i);
                }
                integrand += s * dir[j];
            }
            total += weight * integrand;
        }
        // advance the multi-index
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < POLAR_NODES {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    Ok(total)
}

/// Default sphere radii: quarter-decade spacing on `[r_max/100, r_max]`.
pub fn default_radii(r_max: f64) -> Vec<f64> {
    (0..=8).map(|k| r_max / 100.0 * 10f64.powf(k as f64 / 4.0)).collect()
}

/// Surface estimator, extrapolated in `R` unless the flux diverges.
pub fn adm_mass_surface(data: &InitialData, radii: &[f64]) -> Result<SurfaceMass> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("radii must be positive and nonempty"));
    }
    let reach = data.reach();
    if let Some(&r) = radii.iter().find(|&&r| r > reach) {
        return Err(Error::EvaluationOutOfRange { radius: r, r_max: reach });
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let flux = radii
        .iter()
        .map(|&r| surface_flux(data, r))
        .collect::<Result<Vec<_>>>()?;
    let r_last = radii[radii.len() - 1];
    let decade = radii.iter().position(|&r| r >= r_last / 10.0).unwrap_or(0);
    let (monotone, slope) = growth(&radii[decade..], &flux[decade..]);
    let diverges = radii.len() - decade >= 3 && monotone && slope >= DIVERGENCE_SLOPE;
    let dim = data.dim;
    let (extrapolated_flux, conventions) = if diverges {
        (None, [MassValue::divergent(flux[flux.len() - 1].signum()); 3])
    } else {
        let f = extrapolate_limit(&radii, &flux);
        (Some(f), as_values(conventions_from_flux(dim, f)))
    };
    Ok(SurfaceMass {
        radii,
        flux,
        extrapolated_flux,
        diverges,
        conventions,
    })
}

/// Radial and surface estimates combined.
pub fn adm_mass(data: &InitialData) -> Result<MassReport> {
    let radial = adm_mass_radial(data.dim, &data.solution.phi)?;
    let surface = adm_mass_surface(data, &default_radii(data.r_max()))?;
    Ok(radial.with_surface(surface))
}
