//! End-to-end scenarios: build or load a solution, verify it, and report.

mod report;

pub use report::{
    to_json_17, ChecksBlock, DecayBlock, ErrorRecord, MassBlock, Params, Report, ResidualBlock,
};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::conformal::{assemble_initial_data, read_bundle_csv, write_bundle_csv, ConformalSolution};
use crate::error::{Error, Result};
use crate::radial::{build_grid, Dimension, RadialProfile};
use crate::solver::{fixed_point_solve, smooth_schwarzschild_phi, SolveControls, SolveTrace};
use crate::verify::{
    adm_mass, check_solution, decay_exponents, refinement_order, residual_report, sample_points,
    tail_limit_check,
    DecayWindows, MassValue,
};

/// `|m|` below this counts as zero mass.
pub const ZERO_MASS_BAND: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SmoothSchwarzschild,
    FreeTau,
    Verify,
    Mass,
    Decay,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SmoothSchwarzschild => "smooth-schwarzschild",
            Command::FreeTau => "free-tau",
            Command::Verify => "verify",
            Command::Mass => "mass",
            Command::Decay => "decay",
        }
    }

    /// Commands that build a solution rather than read one.
    pub fn builds(self) -> bool {
        matches!(self, Command::SmoothSchwarzschild | Command::FreeTau)
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::SmoothSchwarzschild,
            Command::FreeTau,
            Command::Verify,
            Command::Mass,
            Command::Decay,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub r_max: f64,
    pub stretch: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 4000,
            r_max: 1e4,
            stretch: 1.01,
        }
    }
}

/// Everything needed to run one scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub command: Command,
    pub n: usize,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub grid: GridSpec,
    pub controls: SolveControls,
    pub out_json: Option<PathBuf>,
    /// Output bundle for building commands, input bundle otherwise.
    pub profiles: Option<PathBuf>,
    /// Number of Cartesian sample points.
    pub points: usize,
    /// Relative finite-difference step scale.
    pub h: f64,
    /// Bound on the relative constraint residuals.
    pub residual_tol: f64,
}

impl ScenarioConfig {
    pub fn new(command: Command) -> Self {
        ScenarioConfig {
            command,
            n: 3,
            m: None,
            c: None,
            q: None,
            grid: GridSpec::default(),
            controls: SolveControls::default(),
            out_json: None,
            profiles: None,
            points: 64,
            h: crate::verify::H_SCALE,
            residual_tol: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<Dimension> {
        let dim = Dimension::new(self.n)?;
        let nf = dim.nf();
        self.controls.validate()?;
        if self.points == 0 || !(self.h > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::invalid("points, h and residual tolerance must be positive"));
        }
        match self.command {
            Command::SmoothSchwarzschild => {
                let m = self.m.ok_or_else(|| Error::invalid("smooth-schwarzschild needs --m"))?;
                if !(m > 0.0) || !m.is_finite() {
                    return Err(Error::invalid(format!("m must be positive, got {m}")));
                }
            }
            Command::FreeTau => {
                let (c, q) = match (self.c, self.q) {
                    (Some(c), Some(q)) => (c, q),
                    _ => return Err(Error::invalid("free-tau needs --c and --q")),
                };
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::invalid(format!("c must be positive, got {c}")));
                }
                let lo = (nf + 2.0) / 4.0;
                if !(q > lo && q < nf) {
                    return Err(Error::invalid(format!("q must lie in ({lo}, {nf}), got {q}")));
                }
            }
            Command::Verify | Command::Mass | Command::Decay => {
                if self.profiles.is_none() {
                    return Err(Error::invalid(format!("{} needs --profiles", self.command.name())));
                }
            }
        }
        Ok(dim)
    }
}

/// A finished run: the report and, for building commands, the solution.
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub report: Report,
    pub solution: Option<ConformalSolution>,
}

impl ScenarioOutcome {
    /// 0 when every check passed, 1 on check failures, 2 on errors.
    pub fn exit_code(&self) -> i32 {
        if self.report.error.is_some() {
            2
        } else if self.report.passed {
            0
        } else {
            1
        }
    }

    /// Write the CSV bundle (building commands) and the JSON report where configured.
    pub fn write_artifacts(&self, cfg: &ScenarioConfig) -> Result<()> {
        if let (true, Some(path), Some(sol)) = (cfg.command.builds(), &cfg.profiles, &self.solution) {
            let mut w = BufWriter::new(File::create(path)?);
            write_bundle_csv(sol, &mut w)?;
            w.flush()?;
        }
        if let Some(path) = &cfg.out_json {
            let mut f = File::create(path)?;
            writeln!(f, "{}", self.report.to_json())?;
        }
        Ok(())
    }
}

/// Run a scenario; errors are folded into the report.
pub fn run_scenario(cfg: &ScenarioConfig) -> ScenarioOutcome {
    let mut report = Report::new(cfg);
    let mut solution = None;
    if let Err(e) = run_into(cfg, &mut report, &mut solution) {
        if let Error::NoConvergence { trace: Some(t), .. } = &e {
            report.iterations = Some(t.iterations());
            report.solver = Some((**t).clone());
        }
        report.passed = false;
        report.failures.push(e.to_string());
        report.error = Some(ErrorRecord {
            kind: e.kind(),
            message: e.to_string(),
        });
    }
    ScenarioOutcome { report, solution }
}

fn run_into(cfg: &ScenarioConfig, report: &mut Report, out: &mut Option<ConformalSolution>) -> Result<()> {
    let dim = cfg.validate()?;
    let sol = match cfg.command {
        Command::Verify | Command::Mass | Command::Decay => {
            let path = cfg.profiles.as_ref().expect("validated");
            read_bundle_csv(dim, BufReader::new(File::open(path)?))?
        }
        _ => {
            let (sol, trace) = build_solution(cfg, dim, cfg.grid.points)?;
            if let Some(trace) = trace {
                report.iterations = Some(trace.iterations());
                report.solver = Some(trace);
            }
            sol
        }
    };
    let data = assemble_initial_data(&sol)?;
    let mut failures = Vec::new();

    if matches!(cfg.command, Command::SmoothSchwarzschild | Command::FreeTau | Command::Verify) {
        let check = check_solution(&sol);
        failures.extend(check.failures.iter().cloned());
        report.checks = Some(ChecksBlock::from(&check));
        let r_hi = 50f64.min(0.5 * sol.grid().r_max());
        let points = sample_points(dim.n(), cfg.points, 0.1f64.min(0.1 * r_hi), r_hi);
        let res = residual_report(&data, &points, cfg.h)?;
        let mut block = ResidualBlock::from(&res);
        if cfg.command.builds() {
            let (fine, _) = build_solution(cfg, dim, 2 * cfg.grid.points)?;
            let fine_res = residual_report(&assemble_initial_data(&fine)?, &points, cfg.h)?;
            let (oh, om) = refinement_order(&res, &fine_res);
            block.order = Some(oh.min(om));
            block.refinement_order = Some((oh, om));
        }
        if !(res.hamiltonian_relative <= cfg.residual_tol) {
            failures.push(format!("hamiltonian: relative residual {:e}", res.hamiltonian_relative));
        }
        if !(res.momentum_relative <= cfg.residual_tol) {
            failures.push(format!("momentum: relative residual {:e}", res.momentum_relative));
        }
        report.residuals = Some(block);
    }
    if matches!(cfg.command, Command::SmoothSchwarzschild | Command::FreeTau | Command::Mass) {
        let mass = adm_mass(&data)?;
        if cfg.command == Command::FreeTau {
            report.classification = Some(classify(mass.mass_standard));
        }
        report.mass = Some(MassBlock::from(&mass));
    }
    if matches!(cfg.command, Command::SmoothSchwarzschild | Command::FreeTau | Command::Decay) {
        let decay = decay_exponents(&data, &DecayWindows::for_r_max(sol.grid().r_max()))?;
        report.decay = Some(DecayBlock::from(&decay));
    }
    let tail = match cfg.command {
        Command::SmoothSchwarzschild => {
            // τ ∼ n √(m/2) r^(−n/2) for the exterior factor 1 − m/(2 r^(n−2))
            let nf = dim.nf();
            let c = nf * (cfg.m.expect("validated") / 2.0).sqrt();
            Some(tail_limit_check(dim, &sol.phi, c, nf / 2.0)?)
        }
        Command::FreeTau => Some(tail_limit_check(
            dim,
            &sol.phi,
            cfg.c.expect("validated"),
            cfg.q.expect("validated"),
        )?),
        _ => None,
    };
    report.tail_limit = tail;
    report.passed = failures.is_empty();
    report.failures = failures;
    *out = Some(sol);
    Ok(())
}

/// Construct the solution of a building command on a grid with `points` nodes.
fn build_solution(
    cfg: &ScenarioConfig,
    dim: Dimension,
    points: usize,
) -> Result<(ConformalSolution, Option<SolveTrace>)> {
    let grid = build_grid(points, cfg.grid.r_max, cfg.grid.stretch)?;
    match cfg.command {
        Command::SmoothSchwarzschild => {
            let phi = smooth_schwarzschild_phi(dim, cfg.m.expect("validated"), &grid)?;
            Ok((ConformalSolution::from_phi(dim, phi)?, None))
        }
        Command::FreeTau => {
            let (c, q) = (cfg.c.expect("validated"), cfg.q.expect("validated"));
            let tau = RadialProfile::from_fn(&grid, |r| c * (1.0 + r * r).powf(-q / 2.0))?;
            let (sol, trace) = fixed_point_solve(dim, &tau, &cfg.controls)?;
            Ok((sol, Some(trace)))
        }
        _ => Err(Error::invalid(format!("{} reads its solution", cfg.command.name()))),
    }
}

/// Sign class of a mass value under the zero band.
pub fn classify(m: MassValue) -> &'static str {
    match m {
        MassValue::NegInfinity => "negative-infinite",
        MassValue::PosInfinity => "positive-infinite",
        _ => match m.sign_class(ZERO_MASS_BAND) {
            0 => "zero",
            s if s < 0 => "negative",
            _ => "positive",
        },
    }
}
