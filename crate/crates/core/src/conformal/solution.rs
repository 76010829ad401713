use std::io::{Read, Write};

use super::{lw_norm, momentum_potential, tau_from_phi, vector_potential};
use crate::error::{Error, Result};
use crate::radial::{differentiate, read_table, write_table, Dimension, RadialGrid, RadialProfile};

/// Freely specified data: a radial mean curvature with vanishing TT part.
#[derive(Clone, Debug)]
pub struct SeedData {
    pub dim: Dimension,
    pub tau: RadialProfile,
    sigma_is_zero: bool,
}

impl SeedData {
    pub fn new(dim: Dimension, tau: RadialProfile) -> Result<Self> {
        differentiate(&tau, 1)?;
        Ok(SeedData {
            dim,
            tau,
            sigma_is_zero: true,
        })
    }

    pub fn sigma_is_zero(&self) -> bool {
        self.sigma_is_zero
    }
}

/// A consistent radial solution `(φ, τ, A, w, |LW|)` of the conformal equations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalSolution {
    pub dim: Dimension,
    pub phi: RadialProfile,
    pub tau: RadialProfile,
    /// `A(r) = ∫_0^r s^n φ^N τ′ ds`.
    pub a: RadialProfile,
    /// `W_i = x_i w(|x|)`.
    pub w: RadialProfile,
    /// Euclidean `|LW|`.
    pub lw: RadialProfile,
}

impl ConformalSolution {
    /// Build `τ` from `φ` through the master identity, then the potentials.
    pub fn from_phi(dim: Dimension, phi: RadialProfile) -> Result<Self> {
        let tau = tau_from_phi(dim, &phi)?;
        Self::from_phi_tau(dim, phi, tau)
    }

    /// Compute the potentials for a given pair `(φ, τ)`.
    pub fn from_phi_tau(dim: Dimension, phi: RadialProfile, tau: RadialProfile) -> Result<Self> {
        let a = momentum_potential(dim, &phi, &tau)?;
        let w = vector_potential(dim, &phi, &tau)?;
        let lw = lw_norm(dim, &a);
        Self::from_parts(dim, phi, tau, a, w, lw)
    }

    /// Assemble from precomputed profiles on a common grid.
    pub fn from_parts(
        dim: Dimension,
        phi: RadialProfile,
        tau: RadialProfile,
        a: RadialProfile,
        w: RadialProfile,
        lw: RadialProfile,
    ) -> Result<Self> {
        for p in [&tau, &a, &w, &lw] {
            phi.ensure_same_grid(p)?;
        }
        if let Some(i) = phi.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::invalid(format!(
                "conformal factor must be positive, got {} at r = {}",
                phi.values()[i],
                phi.nodes()[i]
            )));
        }
        Ok(ConformalSolution {
            dim,
            phi,
            tau,
            a,
            w,
            lw,
        })
    }

    /// Flat data `φ ≡ 1`, `τ ≡ 0`.
    pub fn flat(dim: Dimension, grid: &RadialGrid) -> Self {
        let one = RadialProfile::constant(grid, 1.0);
        let zero = RadialProfile::constant(grid, 0.0);
        ConformalSolution {
            dim,
            phi: one,
            tau: zero.clone(),
            a: zero.clone(),
            w: zero.clone(),
            lw: zero,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        self.phi.grid()
    }
}

const BUNDLE_COLUMNS: [&str; 7] = ["r", "phi", "dphi", "tau", "A", "w", "lw"];

/// Write the `r,phi,dphi,tau,A,w,lw` bundle.
pub fn write_bundle_csv<W: Write>(sol: &ConformalSolution, out: W) -> Result<()> {
    let dphi = differentiate(&sol.phi, 1)?;
    write_table(
        out,
        &BUNDLE_COLUMNS,
        &[
            sol.phi.nodes(),
            sol.phi.values(),
            dphi.values(),
            sol.tau.values(),
            sol.a.values(),
            sol.w.values(),
            sol.lw.values(),
        ],
    )
}

/// Read a bundle back; `dphi` is informational and recomputed when needed.
pub fn read_bundle_csv<R: Read>(dim: Dimension, input: R) -> Result<ConformalSolution> {
    let cols = read_table(input, &BUNDLE_COLUMNS)?;
    let mut cols = cols.into_iter();
    let nodes = cols.next().expect("seven columns");
    let grid = RadialGrid::from_nodes(nodes)?;
    let mut next = |name: &str| -> Result<RadialProfile> {
        let v = cols.next().expect("seven columns");
        RadialProfile::new(grid.clone(), v).map_err(|e| Error::Schema(format!("column `{name}`: {e}")))
    };
    let phi = next("phi")?;
    let _dphi = next("dphi")?;
    let tau = next("tau")?;
    let a = next("A")?;
    let w = next("w")?;
    let lw = next("lw")?;
    ConformalSolution::from_parts(dim, phi, tau, a, w, lw)
}
