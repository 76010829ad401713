use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::solver::SolveTrace;
use crate::verify::{DecayReport, DecayWindows, MassReport, MassValue, ResidualReport, SolutionCheck, TailLimit};

use super::ScenarioConfig;

/// Input parameters echoed into the report.
#[derive(Clone, Debug, Serialize)]
pub struct Params {
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub grid_points: usize,
    pub grid_max: f64,
    pub stretch: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub continuation: usize,
    pub points: usize,
    pub h: f64,
    pub residual_tol: f64,
}

impl From<&ScenarioConfig> for Params {
    fn from(c: &ScenarioConfig) -> Self {
        Params {
            m: c.m,
            c: c.c,
            q: c.q,
            grid_points: c.grid.points,
            grid_max: c.grid.r_max,
            stretch: c.grid.stretch,
            tol: c.controls.tol,
            max_iter: c.controls.max_outer,
            damping: c.controls.damping,
            continuation: c.controls.continuation_steps,
            points: c.points,
            h: c.h,
            residual_tol: c.residual_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MassBlock {
    pub standard: MassValue,
    pub paper_radial: MassValue,
    pub paper_surface: Option<MassValue>,
    pub diverges: bool,
    /// Standard normalization of the surface estimate.
    pub surface_standard: Option<MassValue>,
    /// Extrapolated `lim r^(n−1) φ′`.
    pub radial_limit: Option<f64>,
    /// `|r^(n−1) φ′|` ratio across the last decade.
    pub growth_factor: f64,
    pub radii: Vec<f64>,
}

impl From<&MassReport> for MassBlock {
    fn from(m: &MassReport) -> Self {
        MassBlock {
            standard: m.mass_standard,
            paper_radial: m.mass_paper_radial,
            paper_surface: m.mass_paper_surface,
            diverges: m.diverges,
            surface_standard: m.surface.as_ref().map(|s| s.conventions[0]),
            radial_limit: m.radial.limit,
            growth_factor: m.radial.growth_factor,
            radii: m.radii_used.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualBlock {
    pub hamiltonian_sup: f64,
    pub momentum_sup: f64,
    /// Smaller of the two grid-refinement orders.
    pub order: Option<f64>,
    /// Observed `(hamiltonian, momentum)` order under 2× grid refinement.
    pub refinement_order: Option<(f64, f64)>,
    /// Observed momentum order when the stencil step is halved.
    pub stencil_order: Option<f64>,
    pub hamiltonian_relative: f64,
    pub momentum_relative: f64,
    pub points: usize,
    pub h: f64,
}

impl From<&ResidualReport> for ResidualBlock {
    fn from(r: &ResidualReport) -> Self {
        ResidualBlock {
            hamiltonian_sup: r.hamiltonian_sup,
            momentum_sup: r.momentum_sup,
            order: None,
            refinement_order: None,
            stencil_order: r.convergence_order,
            hamiltonian_relative: r.hamiltonian_relative,
            momentum_relative: r.momentum_relative,
            points: r.points.len(),
            h: r.stencil_h,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayBlock {
    pub tau: f64,
    pub metric: f64,
    pub k: f64,
    pub tau_coefficient: f64,
    pub windows: DecayWindows,
}

impl From<&DecayReport> for DecayBlock {
    fn from(d: &DecayReport) -> Self {
        DecayBlock {
            tau: d.tau_exponent,
            metric: d.metric_exponent,
            k: d.k_exponent,
            tau_coefficient: d.tau_fit.coefficient,
            windows: d.windows,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChecksBlock {
    pub monotone: bool,
    pub identity_residual: f64,
    pub lw_identity: f64,
    #[serde(rename = "divW_identity")]
    pub div_w_identity: f64,
    pub lichnerowicz_residual: f64,
    pub passed: bool,
}

impl From<&SolutionCheck> for ChecksBlock {
    fn from(c: &SolutionCheck) -> Self {
        ChecksBlock {
            monotone: c.monotone,
            identity_residual: c.identity_residual,
            lw_identity: c.lw_identity,
            div_w_identity: c.div_w_identity,
            lichnerowicz_residual: c.lichnerowicz_residual,
            passed: c.passed(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
}

/// The JSON report of one scenario run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: &'static str,
    pub n: usize,
    pub params: Params,
    pub mass: Option<MassBlock>,
    pub residuals: Option<ResidualBlock>,
    pub decay: Option<DecayBlock>,
    pub checks: Option<ChecksBlock>,
    pub iterations: Option<usize>,
    pub classification: Option<&'static str>,
    pub tail_limit: Option<TailLimit>,
    pub solver: Option<SolveTrace>,
    pub passed: bool,
    pub failures: Vec<String>,
    pub error: Option<ErrorRecord>,
}

impl Report {
    pub(crate) fn new(cfg: &ScenarioConfig) -> Self {
        Report {
            scenario: cfg.command.name(),
            n: cfg.n,
            params: Params::from(cfg),
            mass: None,
            residuals: None,
            decay: None,
            checks: None,
            iterations: None,
            classification: None,
            tail_limit: None,
            solver: None,
            passed: false,
            failures: Vec::new(),
            error: None,
        }
    }

    /// Serialize with every float written at 17 significant digits.
    pub fn to_json(&self) -> String {
        to_json_17(self)
    }
}

/// Compact JSON with `{:.16e}` floats; non-finite values become `null`.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serialize any value with the 17-digit float format.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, Digits17);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization of plain data cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}
