//! Radial function calculus: grids, interpolation, differentiation,
//! cumulative and improper quadrature, and power-law tails.

mod csv;
mod grid;
pub mod stencil;
mod tail;

pub use csv::{read_profile_csv, write_profile_csv};
pub(crate) use csv::{read_table, write_table};
pub use grid::{build_grid, GridMap, RadialGrid, MIN_NODES};
pub use tail::{default_tail_window, fit_tail, fit_tail_or_zero, TailModel};

use crate::error::{Error, Result};

/// Radii within a few ulps beyond `r_max` count as the last node.
pub(crate) const EDGE_SLACK: f64 = 1.0 + 4.0 * f64::EPSILON;

/// Spatial dimension `n >= 3` together with the critical exponent `N = 2n/(n-2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("dimension must be >= 3, got {n}")));
        }
        Ok(Dimension(n))
    }

    pub fn n(self) -> usize {
        self.0
    }

    pub fn nf(self) -> f64 {
        self.0 as f64
    }

    /// `N = 2n/(n-2)`.
    pub fn critical_exponent(self) -> f64 {
        2.0 * self.nf() / (self.nf() - 2.0)
    }

    /// `N` as a reduced fraction `(numerator, denominator)`.
    pub fn critical_exponent_ratio(self) -> (usize, usize) {
        let (p, q) = (2 * self.0, self.0 - 2);
        let g = gcd(p, q);
        (p / g, q / g)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Symmetry used to fill ghost nodes across `r = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// A sampled radial function on a fixed grid, optionally with a tail model.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    tail: Option<TailModel>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at r = {}",
                grid.nodes()[i]
            )));
        }
        Ok(RadialProfile {
            grid,
            values,
            tail: None,
        })
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &RadialGrid, value: f64) -> Self {
        RadialProfile {
            grid: grid.clone(),
            values: vec![value; grid.len()],
            tail: None,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// Attach a fitted tail model; the fit must succeed.
    pub fn with_tail(mut self, window: (f64, f64)) -> Result<Self> {
        self.tail = Some(fit_tail(&self, window)?);
        Ok(self)
    }

    /// Attach an already-known tail model.
    pub fn with_tail_model(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Fit a tail on the default window, accepting an identically zero tail.
    pub fn with_default_tail(self) -> Result<Self> {
        let window = default_tail_window(self.grid.r_max());
        let model = fit_tail_or_zero(&self, window)?;
        Ok(self.with_tail_model(model))
    }

    /// Pointwise transform `(r, value) -> value`. Drops the tail.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Pointwise combination of two profiles on the same grid. Drops tails.
    pub fn zip_map(&self, other: &RadialProfile, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self
            .nodes()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&r, (&a, &b))| f(r, a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub(crate) fn ensure_same_grid(&self, other: &RadialProfile) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("profiles live on different grids"));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic interpolation inside the grid; the tail model beyond `r_max`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        let r_max = self.grid.r_max();
        if !(r >= 0.0) {
            return Err(Error::EvaluationOutOfRange { radius: r, r_max });
        }
        if r <= r_max * EDGE_SLACK {
            let (s, w) = self.grid.cubic_weights(r.min(r_max));
            let base = self.values[s];
            return Ok(base + (1..4).map(|k| w[k] * (self.values[s + k] - base)).sum::<f64>());
        }
        match &self.tail {
            Some(t) => Ok(t.value(r)),
            None => Err(Error::EvaluationOutOfRange { radius: r, r_max }),
        }
    }
}

/// Derivative of order 1 or 2 with even parity across the origin.
pub fn differentiate(p: &RadialProfile, order: usize) -> Result<RadialProfile> {
    differentiate_with_parity(p, order, Parity::Even)
}

/// Derivative of order 1 or 2 using the given parity for ghost values at `r < 0`.
///
/// Centered 7-point stencils in the computational coordinate (6th order),
/// one-sided at `r_max`. Odd-order derivatives of even profiles (and
/// even-order derivatives of odd profiles) are pinned to zero at the origin.
pub fn differentiate_with_parity(
    p: &RadialProfile,
    order: usize,
    parity: Parity,
) -> Result<RadialProfile> {
    let (d1, d2) = derivative_pair(p, parity);
    let values = match order {
        1 => d1,
        2 => d2,
        _ => return Err(Error::invalid(format!("derivative order {order} not supported"))),
    };
    RadialProfile::new(p.grid.clone(), values)
}

/// First and second radial derivatives in one pass.
pub(crate) fn derivative_pair(p: &RadialProfile, parity: Parity) -> (Vec<f64>, Vec<f64>) {
    let grid = &p.grid;
    let st = grid.derivative_stencil();
    let (jac, hess) = (grid.jacobian(), grid.hessian());
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let m = grid.len();
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for i in 0..m {
        // differences against the center make constants differentiate to exactly zero
        let center = p.values[i];
        let (mut f1, mut f2) = (0.0, 0.0);
        for k in 0..st.width {
            let (node, ghost) = st.resolve(st.start[i] + k);
            let v = if ghost { sign * p.values[node] } else { p.values[node] };
            f1 += st.d1[i][k] * (v - center);
            f2 += st.d2[i][k] * (v - center);
        }
        let dr = f1 / jac[i];
        d1[i] = dr;
        d2[i] = (f2 - hess[i] * dr) / (jac[i] * jac[i]);
    }
    match parity {
        Parity::Even => d1[0] = 0.0,
        Parity::Odd => d2[0] = 0.0,
    }
    (d1, d2)
}

/// Cumulative integral `I(r) = ∫_0^r p ds`, exact for local quintics.
pub fn integrate_from_zero(p: &RadialProfile) -> RadialProfile {
    let values = cumulative(p);
    RadialProfile {
        grid: p.grid.clone(),
        values,
        tail: None,
    }
}

fn cumulative(p: &RadialProfile) -> Vec<f64> {
    let rule = p.grid.interval_rule();
    let mut out = Vec::with_capacity(p.values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for (s, w) in rule.start.iter().zip(&rule.weights) {
        acc += (0..6).map(|k| w[k] * p.values[s + k]).sum::<f64>();
        out.push(acc);
    }
    out
}

/// `J(r) = ∫_r^∞ p ds`: grid quadrature to `r_max` plus the analytic tail remainder.
pub fn integrate_to_infinity(p: &RadialProfile) -> Result<RadialProfile> {
    let tail = p.tail.ok_or_else(|| {
        Error::NoTail("integrate_to_infinity needs a fitted tail model".into())
    })?;
    let remainder = tail.integral_from(p.grid.r_max())?;
    let cum = cumulative(p);
    let total = *cum.last().expect("grid is never empty");
    let values = cum.iter().map(|c| (total - c) + remainder).collect();
    RadialProfile::new(p.grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        build_grid(2000, 1e4, 1.01).unwrap()
    }

    #[test]
    fn dimension_exponent() {
        let d = Dimension::new(3).unwrap();
        assert_eq!(d.critical_exponent(), 6.0);
        assert_eq!(d.critical_exponent_ratio(), (6, 1));
        assert_eq!(Dimension::new(5).unwrap().critical_exponent_ratio(), (10, 3));
        assert_eq!(Dimension::new(4).unwrap().critical_exponent(), 4.0);
        assert!(Dimension::new(2).is_err());
    }

    #[test]
    fn differentiate_quadratic_is_exact() {
        let g = build_grid(64, 10.0, 1.0).unwrap();
        let p = RadialProfile::from_fn(&g, |r| r * r).unwrap();
        let d = differentiate(&p, 1).unwrap();
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * r).abs() < 1e-10, "r={r} v={v}");
        }
        let d2 = differentiate(&p, 2).unwrap();
        assert!(d2.values().iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn constant_has_zero_derivative() {
        let p = RadialProfile::constant(&grid(), 3.5);
        assert_eq!(differentiate(&p, 1).unwrap().max_abs(), 0.0);
        assert_eq!(differentiate(&p, 2).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn smooth_profile_derivative_converges() {
        // closed-form oracle: d/dr (1+r^2)^{-1/2} = -r (1+r^2)^{-3/2}
        let err = |m: usize| {
            let g = build_grid(m, 100.0, 1.2).unwrap();
            let p = RadialProfile::from_fn(&g, |r| (1.0 + r * r).powf(-0.5)).unwrap();
            let d = differentiate(&p, 1).unwrap();
            g.nodes()
                .iter()
                .zip(d.values())
                .map(|(&r, v)| (v + r * (1.0 + r * r).powf(-1.5)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(200), err(400));
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "order {order} ({e1:e} -> {e2:e})");
    }

    #[test]
    fn cubic_integral_is_exact() {
        // unit spacing puts a node at r = 1
        let g = build_grid(64, 63.0, 1.0).unwrap();
        let p = RadialProfile::from_fn(&g, |s| s.powi(3)).unwrap();
        let i = integrate_from_zero(&p);
        let v = i.values()[1];
        assert!((v - 0.25).abs() < 1e-12, "{v}");
        assert_eq!(i.values()[0], 0.0);
    }

    #[test]
    fn zero_integrates_to_zero() {
        let p = RadialProfile::constant(&grid(), 0.0);
        assert!(integrate_from_zero(&p).max_abs() == 0.0);
    }

    #[test]
    fn exponential_moment_integral() {
        let g = build_grid(1000, 50.0, 1.05).unwrap();
        let p = RadialProfile::from_fn(&g, |s| s * (-s).exp()).unwrap();
        let i = integrate_from_zero(&p);
        for (&r, v) in g.nodes().iter().zip(i.values()) {
            let exact = 1.0 - (1.0 + r) * (-r).exp();
            assert!((v - exact).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn improper_integral_of_inverse_square() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |s| (1.0 + s.powi(6)).powf(-1.0 / 3.0))
            .unwrap()
            .with_tail((100.0, 1e4))
            .unwrap();
        let j = integrate_to_infinity(&p).unwrap();
        for (&r, v) in g.nodes().iter().zip(j.values()) {
            if r >= 10.0 {
                assert!((v - 1.0 / r).abs() < 1e-8, "r={r} J={v}");
            }
        }
    }

    #[test]
    fn improper_integral_of_inverse_cube() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |s| (1.0 + s.powi(6)).powf(-0.5))
            .unwrap()
            .with_tail((100.0, 1e4))
            .unwrap();
        let j = integrate_to_infinity(&p).unwrap();
        for (&r, v) in g.nodes().iter().zip(j.values()) {
            if r >= 10.0 {
                let exact = 0.5 / (r * r);
                assert!((v / exact - 1.0).abs() < 1e-6, "r={r}");
            }
        }
    }

    #[test]
    fn slow_tail_rejected() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |s| (1.0 + s).powf(-0.9))
            .unwrap()
            .with_tail((100.0, 1e4))
            .unwrap();
        assert!(matches!(
            integrate_to_infinity(&p),
            Err(Error::TailTooSlow { .. })
        ));
    }

    #[test]
    fn exact_power_law_fit() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |r| 2.0 * r.max(1.0).powf(-1.5)).unwrap();
        let t = fit_tail(&p, (100.0, 1e4)).unwrap();
        assert!((t.coefficient - 2.0).abs() < 1e-10);
        assert!((t.exponent - 1.5).abs() < 1e-12);
        assert!(t.misfit < 1e-10);
    }

    #[test]
    fn perturbed_power_law_fit() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |r| {
            let r = r.max(1.0);
            r.powi(-2) * (1.0 + 1.0 / r)
        }).unwrap();
        let t = fit_tail(&p, (1e3, 1e4)).unwrap();
        assert!((t.exponent - 2.0).abs() < 0.01);
    }

    #[test]
    fn zero_profile_fit_is_degenerate() {
        let p = RadialProfile::constant(&grid(), 0.0);
        assert!(matches!(fit_tail(&p, (100.0, 1e4)), Err(Error::DegenerateFit(_))));
        assert!(fit_tail_or_zero(&p, (100.0, 1e4)).unwrap().is_zero());
    }

    #[test]
    fn evaluate_beyond_grid_needs_tail() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |r| (1.0 + r * r).recip()).unwrap();
        assert!(matches!(
            p.evaluate(2e4),
            Err(Error::EvaluationOutOfRange { .. })
        ));
        let p = p.with_default_tail().unwrap();
        assert!((p.evaluate(2e4).unwrap() * 4e8 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn evaluate_tolerates_roundoff_past_last_node() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |r| (1.0 + r * r).recip()).unwrap();
        let edge = g.r_max() * (1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.evaluate(edge).unwrap(), *p.values().last().unwrap());
        assert!(p.evaluate(g.r_max() * (1.0 + 1e-9)).is_err());
    }

    #[test]
    fn interpolation_is_accurate_between_nodes() {
        let g = grid();
        let p = RadialProfile::from_fn(&g, |r| (-(r - 3.0).powi(2)).exp()).unwrap();
        for k in 0..500 {
            let r = 0.013 * k as f64 + 0.001;
            let v = p.evaluate(r).unwrap();
            assert!((v - (-(r - 3.0).powi(2)).exp()).abs() < 1e-7, "r={r} v={v}");
        }
    }
}
