use std::sync::{Arc, OnceLock};

use super::stencil::{fornberg_weights, gauss_legendre, lagrange_weights};
use crate::error::{Error, Result};

/// Minimum number of nodes on any grid.
pub const MIN_NODES: usize = 64;

/// Radius below which the sinh map is essentially linear.
const CORE_SCALE: f64 = 1.0;

/// How node radii relate to the uniform computational coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridMap {
    /// `r = r_max * xi`.
    Linear { r_max: f64 },
    /// `r = scale * sinh(rate * xi)`.
    Sinh { scale: f64, rate: f64 },
    /// Arbitrary increasing nodes; the computational coordinate is `r` itself.
    Tabulated,
}

impl GridMap {
    fn radius(&self, xi: f64) -> f64 {
        match *self {
            GridMap::Linear { r_max } => r_max * xi,
            GridMap::Sinh { scale, rate } => scale * (rate * xi).sinh(),
            GridMap::Tabulated => xi,
        }
    }

    fn jacobian(&self, xi: f64) -> (f64, f64) {
        match *self {
            GridMap::Linear { r_max } => (r_max, 0.0),
            GridMap::Sinh { scale, rate } => (
                scale * rate * (rate * xi).cosh(),
                scale * rate * rate * (rate * xi).sinh(),
            ),
            GridMap::Tabulated => (1.0, 0.0),
        }
    }
}

/// Per-node derivative weights with ghost-node bookkeeping for the origin.
#[derive(Debug)]
pub(crate) struct Stencil {
    pub width: usize,
    /// Index of the first stencil point in the ghost-extended array.
    pub start: Vec<usize>,
    /// First-derivative weights in the computational coordinate.
    pub d1: Vec<Vec<f64>>,
    /// Second-derivative weights in the computational coordinate.
    pub d2: Vec<Vec<f64>>,
}

impl Stencil {
    pub fn ghosts(&self) -> usize {
        (self.width - 1) / 2
    }

    /// Node index and sign factor (for odd parity) of an extended-array slot.
    #[inline]
    pub fn resolve(&self, slot: usize) -> (usize, bool) {
        let g = self.ghosts();
        if slot < g {
            (g - slot, true)
        } else {
            (slot - g, false)
        }
    }
}

/// Cumulative quadrature: for each interval `[r_i, r_{i+1}]`, weights on
/// six consecutive nodes starting at `start[i]`.
#[derive(Debug)]
pub(crate) struct IntervalRule {
    pub start: Vec<usize>,
    pub weights: Vec<[f64; 6]>,
}

#[derive(Debug)]
struct GridData {
    nodes: Vec<f64>,
    coords: Vec<f64>,
    jac: Vec<f64>,
    hess: Vec<f64>,
    map: GridMap,
    stretch: f64,
    derivative_stencil: OnceLock<Stencil>,
    operator_stencil: OnceLock<Stencil>,
    interval_rule: OnceLock<IntervalRule>,
}

/// Radial grid: `nodes[0] = 0`, strictly increasing, at least 64 nodes.
///
/// Cloning is cheap; all clones share node data and cached weights.
#[derive(Clone, Debug)]
pub struct RadialGrid(Arc<GridData>);

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.nodes == other.0.nodes
    }
}

/// Graded grid on `[0, r_max]`: linear in the core, logarithmic toward `r_max`,
/// with every ratio of adjacent spacings at most `stretch`.
pub fn build_grid(n_points: usize, r_max: f64, stretch: f64) -> Result<RadialGrid> {
    if n_points < MIN_NODES {
        return Err(Error::invalid(format!(
            "grid needs at least {MIN_NODES} points, got {n_points}"
        )));
    }
    if !(r_max > 1.0) || !r_max.is_finite() {
        return Err(Error::invalid(format!("r_max must exceed 1, got {r_max}")));
    }
    if !(stretch >= 1.0) || !stretch.is_finite() {
        return Err(Error::invalid(format!("stretch must be >= 1, got {stretch}")));
    }
    let intervals = (n_points - 1) as f64;
    let rate = (r_max / CORE_SCALE).asinh().min(intervals * stretch.ln());
    let map = if rate < 1e-6 {
        GridMap::Linear { r_max }
    } else {
        GridMap::Sinh {
            scale: r_max / rate.sinh(),
            rate,
        }
    };
    let coords: Vec<f64> = (0..n_points).map(|i| i as f64 / intervals).collect();
    let mut nodes: Vec<f64> = coords.iter().map(|&xi| map.radius(xi)).collect();
    nodes[0] = 0.0;
    nodes[n_points - 1] = r_max;
    Ok(RadialGrid::assemble(nodes, coords, map, stretch))
}

impl RadialGrid {
    fn assemble(nodes: Vec<f64>, coords: Vec<f64>, map: GridMap, stretch: f64) -> Self {
        let (jac, hess) = coords.iter().map(|&xi| map.jacobian(xi)).unzip();
        RadialGrid(Arc::new(GridData {
            nodes,
            coords,
            jac,
            hess,
            map,
            stretch,
            derivative_stencil: OnceLock::new(),
            operator_stencil: OnceLock::new(),
            interval_rule: OnceLock::new(),
        }))
    }

    /// Rebuild a grid from stored node radii (e.g. read from CSV).
    ///
    /// Grids produced by [`build_grid`] are recognised and get their analytic
    /// map back; anything else falls back to a tabulated grid.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let m = nodes.len();
        if m < MIN_NODES {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_NODES} points, got {m}"
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid("first node must be r = 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("nodes must be finite and strictly increasing"));
        }
        let intervals = (m - 1) as f64;
        let coords: Vec<f64> = (0..m).map(|i| i as f64 / intervals).collect();
        let r_max = nodes[m - 1];
        let candidate = recover_map(&nodes);
        let matches = |map: &GridMap| {
            coords
                .iter()
                .zip(&nodes)
                .all(|(&xi, &r)| (map.radius(xi) - r).abs() <= 1e-12 * r_max)
        };
        let stretch = max_spacing_ratio(&nodes);
        match candidate {
            Some(map) if matches(&map) => Ok(Self::assemble(nodes, coords, map, stretch)),
            _ => {
                let coords = nodes.clone();
                Ok(Self::assemble(nodes, coords, GridMap::Tabulated, stretch))
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    pub fn len(&self) -> usize {
        self.0.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.0.nodes.last().expect("grid is never empty")
    }

    pub fn stretch(&self) -> f64 {
        self.0.stretch
    }

    pub fn map(&self) -> GridMap {
        self.0.map
    }

    /// `dr/dxi` at each node.
    pub fn jacobian(&self) -> &[f64] {
        &self.0.jac
    }

    /// `d²r/dxi²` at each node.
    pub fn hessian(&self) -> &[f64] {
        &self.0.hess
    }

    /// Smallest spacing between adjacent nodes.
    pub fn min_spacing(&self) -> f64 {
        self.0
            .nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Indices of nodes inside `[lo, hi]`.
    pub fn window_indices(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let nodes = &self.0.nodes;
        let start = nodes.partition_point(|&r| r < lo);
        let end = nodes.partition_point(|&r| r <= hi);
        start..end.max(start)
    }

    /// Computational coordinate of an arbitrary radius inside the grid.
    pub(crate) fn coord_of(&self, r: f64) -> f64 {
        match self.0.map {
            GridMap::Linear { r_max } => r / r_max,
            GridMap::Sinh { scale, rate } => (r / scale).asinh() / rate,
            GridMap::Tabulated => r,
        }
    }

    /// Cubic Lagrange weights for evaluating at `r`: returns the first node and four weights.
    pub(crate) fn cubic_weights(&self, r: f64) -> (usize, [f64; 4]) {
        let m = self.len();
        let xi = self.coord_of(r);
        let coords = &self.0.coords;
        let j = coords.partition_point(|&c| c <= xi).saturating_sub(1);
        let start = j.saturating_sub(1).min(m - 4);
        let w = lagrange_weights(xi, &coords[start..start + 4]);
        (start, [w[0], w[1], w[2], w[3]])
    }

    /// 7-point stencil used by [`differentiate`](super::differentiate).
    pub(crate) fn derivative_stencil(&self) -> &Stencil {
        self.0
            .derivative_stencil
            .get_or_init(|| Stencil::build(&self.0.coords, 7))
    }

    /// 5-point stencil used by the elliptic operators.
    pub(crate) fn operator_stencil(&self) -> &Stencil {
        self.0
            .operator_stencil
            .get_or_init(|| Stencil::build(&self.0.coords, 5))
    }

    pub(crate) fn interval_rule(&self) -> &IntervalRule {
        self.0.interval_rule.get_or_init(|| {
            let coords = &self.0.coords;
            let jac = &self.0.jac;
            let m = coords.len();
            let (gx, gw) = gauss_legendre(3);
            let mut start = Vec::with_capacity(m - 1);
            let mut weights = Vec::with_capacity(m - 1);
            for i in 0..m - 1 {
                let s = i.saturating_sub(2).min(m - 6);
                let xs = &coords[s..s + 6];
                let (a, b) = (coords[i], coords[i + 1]);
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                let mut w = [0.0; 6];
                for (x, wq) in gx.iter().zip(&gw) {
                    let l = lagrange_weights(mid + half * x, xs);
                    for k in 0..6 {
                        w[k] += half * wq * l[k];
                    }
                }
                for k in 0..6 {
                    w[k] *= jac[s + k];
                }
                start.push(s);
                weights.push(w);
            }
            IntervalRule { start, weights }
        })
    }
}

impl Stencil {
    fn build(coords: &[f64], width: usize) -> Self {
        let m = coords.len();
        let g = (width - 1) / 2;
        // ghost slots mirror the first interior nodes through the origin
        let mut ext = Vec::with_capacity(m + g);
        for k in (1..=g).rev() {
            ext.push(-coords[k]);
        }
        ext.extend_from_slice(coords);
        let mut start = Vec::with_capacity(m);
        let mut d1 = Vec::with_capacity(m);
        let mut d2 = Vec::with_capacity(m);
        for i in 0..m {
            let slot = i + g;
            let s = slot.saturating_sub(g).min(ext.len() - width);
            let w = fornberg_weights(ext[slot], &ext[s..s + width], 2);
            start.push(s);
            d1.push(w[1].clone());
            d2.push(w[2].clone());
        }
        Stencil {
            width,
            start,
            d1,
            d2,
        }
    }
}

fn max_spacing_ratio(nodes: &[f64]) -> f64 {
    nodes
        .windows(3)
        .map(|w| {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            (b / a).max(a / b)
        })
        .fold(1.0, f64::max)
}

fn recover_map(nodes: &[f64]) -> Option<GridMap> {
    let m = nodes.len();
    let r_max = nodes[m - 1];
    let intervals = (m - 1) as f64;
    let target = nodes[1] / r_max;
    let linear = 1.0 / intervals;
    if (target - linear).abs() <= 1e-12 * linear {
        return Some(GridMap::Linear { r_max });
    }
    if target >= linear {
        return None;
    }
    // sinh(rate / intervals) / sinh(rate) decreases monotonically in rate
    let ratio = |rate: f64| (rate / intervals).sinh() / rate.sinh();
    let (mut lo, mut hi) = (1e-9, 1.0);
    while ratio(hi) > target {
        hi *= 2.0;
        if hi > 700.0 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rate = 0.5 * (lo + hi);
    Some(GridMap::Sinh {
        scale: r_max / rate.sinh(),
        rate,
    })
}
