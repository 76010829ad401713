use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::stencil::gauss_legendre;
use crate::radial::{Dimension, RadialGrid, RadialProfile};

/// Order of contact between the interior and the exterior at `R`.
const CONTACT_ORDER: usize = 6;
/// Scale of the interior correction; any value in `(0, 1)` keeps `φ` increasing.
const GAIN: f64 = 0.9;
/// Smallest admissible central value `φ(0)`.
const MIN_CENTER: f64 = 0.05;
/// Largest number of series terms tried.
const MAX_TERMS: usize = 64;

/// Smooth increasing conformal factor equal to `1 − m/(2 r^(n−2))` for `r ≥ R = m^(1/(n−2))`.
///
/// Inside `R`, `φ = 1 − (m/2) ρ^(−(n−2)/2)` with `ρ = R² P(r²/R²)` and
/// `P(t) = t + ∫_t^1 (1−u)^K G(u) du`, where `G` is `GAIN` times the first
/// `terms + 1` terms of the binomial series of `(1−u)^(−K)`.
#[derive(Clone, Debug, Serialize)]
pub struct SchwarzschildSmoothing {
    pub n: usize,
    pub mass: f64,
    pub radius: f64,
    pub terms: usize,
    pub center_value: f64,
    #[serde(skip)]
    series: Vec<f64>,
    #[serde(skip)]
    quad: (Vec<f64>, Vec<f64>),
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl SchwarzschildSmoothing {
    pub fn new(dim: Dimension, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        let k = CONTACT_ORDER;
        let e = (dim.nf() - 2.0) / 2.0;
        for terms in 0..=MAX_TERMS {
            // P(0) = GAIN (J+1)/(J+K+1)
            let rho0 = GAIN * (terms + 1) as f64 / (terms + k + 1) as f64;
            let center = 1.0 - 0.5 * rho0.powf(-e);
            if center >= MIN_CENTER {
                let series = (0..=terms)
                    .map(|j| GAIN * binomial(k + j - 1, j))
                    .collect();
                let s = SchwarzschildSmoothing {
                    n: dim.n(),
                    mass,
                    radius: mass.powf(1.0 / (dim.nf() - 2.0)),
                    terms,
                    center_value: center,
                    series,
                    quad: gauss_legendre((k + terms) / 2 + 2),
                };
                return Ok(s);
            }
        }
        Err(Error::ConstructionFailed(format!(
            "no interior profile with phi(0) >= {MIN_CENTER} within {MAX_TERMS} terms"
        )))
    }

    fn g(&self, u: f64) -> f64 {
        self.series.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    fn dg(&self, u: f64) -> f64 {
        self.series
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * u + j as f64 * c)
    }

    /// `P(t)`, `P′(t)`, `P″(t)` on `[0, 1]`.
    fn profile(&self, t: f64) -> (f64, f64, f64) {
        let k = CONTACT_ORDER as i32;
        let (x, w) = &self.quad;
        let half = 0.5 * (1.0 - t);
        let integral: f64 = x
            .iter()
            .zip(w)
            .map(|(xi, wi)| {
                let u = t + half * (xi + 1.0);
                wi * (1.0 - u).powi(k) * self.g(u)
            })
            .sum::<f64>()
            * half;
        let s = 1.0 - t;
        let p1 = 1.0 - s.powi(k) * self.g(t);
        let p2 = k as f64 * s.powi(k - 1) * self.g(t) - s.powi(k) * self.dg(t);
        (t + integral, p1, p2)
    }

    /// `φ(r)`, `φ′(r)`, `φ″(r)` in closed form.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let nf = self.n as f64;
        let m = self.mass;
        if r >= self.radius {
            let p = self.n as i32 - 2;
            return (
                1.0 - m / (2.0 * r.powi(p)),
                m * (nf - 2.0) / (2.0 * r.powi(p + 1)),
                -m * (nf - 2.0) * (nf - 1.0) / (2.0 * r.powi(p + 2)),
            );
        }
        let big_r2 = self.radius * self.radius;
        let t = r * r / big_r2;
        let (p, dp, ddp) = self.profile(t);
        let rho = big_r2 * p;
        let drho = 2.0 * r * dp;
        let ddrho = 2.0 * dp + 4.0 * r * r * ddp / big_r2;
        let e = (nf - 2.0) / 2.0;
        let phi = 1.0 - 0.5 * m * rho.powf(-e);
        let dphi = 0.5 * m * e * rho.powf(-e - 1.0) * drho;
        let ddphi =
            0.5 * m * e * (-(e + 1.0) * rho.powf(-e - 2.0) * drho * drho + rho.powf(-e - 1.0) * ddrho);
        (phi, dphi, ddphi)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// Sample on a grid, checking positivity and monotonicity at every node.
    pub fn sample(&self, grid: &RadialGrid) -> Result<RadialProfile> {
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.nodes() {
            let (p, dp, _) = self.eval(r);
            if !(p > 0.0) || dp < 0.0 {
                return Err(Error::ConstructionFailed(format!(
                    "interior profile not positive increasing at r = {r}"
                )));
            }
            values.push(p);
        }
        RadialProfile::new(grid.clone(), values)
    }
}

/// Smoothed negative-mass Schwarzschild conformal factor sampled on `grid`.
pub fn smooth_schwarzschild_phi(dim: Dimension, m: f64, grid: &RadialGrid) -> Result<RadialProfile> {
    SchwarzschildSmoothing::new(dim, m)?.sample(grid)
}
