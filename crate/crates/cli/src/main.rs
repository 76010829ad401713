//! `radconf`: build, solve and verify radial conformal initial data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use radial_conformal::scenario::{run_scenario, Command, GridSpec, ScenarioConfig};
use radial_conformal::solver::SolveControls;

#[derive(Parser)]
#[command(name = "radconf", version, about = "Radial conformal initial data toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smooth the negative-mass Schwarzschild exterior and verify it.
    SmoothSchwarzschild(Opts),
    /// Solve for φ with τ = c(1+r²)^(−q/2) and classify the mass.
    FreeTau(Opts),
    /// Re-verify a CSV profile bundle.
    Verify(Opts),
    /// ADM mass of a CSV profile bundle.
    Mass(Opts),
    /// Decay exponents of a CSV profile bundle.
    Decay(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, default_value_t = GridSpec::default().points)]
    grid_points: usize,
    #[arg(long, default_value_t = GridSpec::default().r_max)]
    grid_max: f64,
    #[arg(long, default_value_t = GridSpec::default().stretch)]
    stretch: f64,
    #[arg(long, default_value_t = SolveControls::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolveControls::default().max_outer)]
    max_iter: usize,
    #[arg(long, default_value_t = SolveControls::default().damping)]
    damping: f64,
    #[arg(long, default_value_t = SolveControls::default().continuation_steps)]
    continuation: usize,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV bundle: written by building commands, read by the others.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Number of Cartesian verification points.
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Relative finite-difference step for the constraint residuals.
    #[arg(long, default_value_t = radial_conformal::verify::H_SCALE)]
    h: f64,
    /// Bound on the relative constraint residuals.
    #[arg(long, default_value_t = 1e-4)]
    residual_tol: f64,
}

impl Cmd {
    fn into_config(self) -> ScenarioConfig {
        let (command, o) = match self {
            Cmd::SmoothSchwarzschild(o) => (Command::SmoothSchwarzschild, o),
            Cmd::FreeTau(o) => (Command::FreeTau, o),
            Cmd::Verify(o) => (Command::Verify, o),
            Cmd::Mass(o) => (Command::Mass, o),
            Cmd::Decay(o) => (Command::Decay, o),
        };
        let mut cfg = ScenarioConfig::new(command);
        cfg.n = o.n;
        cfg.m = o.m;
        cfg.c = o.c;
        cfg.q = o.q;
        cfg.grid = GridSpec {
            points: o.grid_points,
            r_max: o.grid_max,
            stretch: o.stretch,
        };
        cfg.controls.tol = o.tol;
        cfg.controls.max_outer = o.max_iter;
        cfg.controls.damping = o.damping;
        cfg.controls.continuation_steps = o.continuation;
        cfg.out_json = o.out;
        cfg.profiles = o.profiles;
        cfg.points = o.points;
        cfg.h = o.h;
        cfg.residual_tol = o.residual_tol;
        cfg
    }
}

fn main() -> ExitCode {
    let cfg = Cli::parse().command.into_config();
    let outcome = run_scenario(&cfg);
    if cfg.out_json.is_none() {
        println!("{}", outcome.report.to_json());
    }
    if let Err(e) = outcome.write_artifacts(&cfg) {
        eprintln!("radconf: {e}");
        return ExitCode::from(2);
    }
    for f in &outcome.report.failures {
        eprintln!("radconf: {f}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}
