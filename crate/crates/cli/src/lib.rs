//! Command-line front end: read a [`RunConfig`], run one command, write a
//! CSV trajectory or a JSON report.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracreg::charpoly::{
    eval_fracpoly, find_roots, Method, RootFindConfig, StabilityReport, Verdict,
};
use fracreg::design::{design_pd_fractional, design_pd_integer, design_pi};
use fracreg::model::{build_pd_model, build_pi_model, char_poly, Controller, FracPoly};
use fracreg::simulate::{simulate_state_space, Trajectory};
use fracreg::Error;
use serde::{Deserialize, Serialize};

pub use config::{ConfigError, ControllerBlock, RunConfig};

pub const DEFAULT_TRAJECTORY: &str = "trajectory.csv";
pub const DEFAULT_DESIGN_REPORT: &str = "design.json";
pub const DEFAULT_POLES_REPORT: &str = "poles.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 2,
    Diverged = 3,
    Unstable = 4,
    Solver = 5,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// What a command produced. `diagnostic` is meant for the error stream.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub written: Vec<PathBuf>,
    pub diagnostic: Option<String>,
}

impl Outcome {
    fn fail(exit: Exit, diagnostic: impl ToString) -> Self {
        Self {
            exit,
            written: Vec::new(),
            diagnostic: Some(diagnostic.to_string()),
        }
    }
}

impl From<ConfigError> for Outcome {
    fn from(e: ConfigError) -> Self {
        Outcome::fail(Exit::Config, format!("config error: {e}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_ms: Option<f64>,
    pub roots_ms: f64,
}

/// JSON report written by `design` and `poles`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub controller: ControllerBlock,
    /// Largest `|F(p)|` over the requested poles, for designs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_residual: Option<f64>,
    pub char_poly: Vec<TermReport>,
    pub roots: Vec<RootReport>,
    pub method: Method,
    pub verdict: Verdict,
    pub coverage_caveat: bool,
    pub timings: Timings,
}

impl Report {
    fn new(
        command: &str,
        config: &RunConfig,
        controller: Controller,
        poly: &FracPoly,
        stability: &StabilityReport,
        timings: Timings,
    ) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            controller: controller.into(),
            design_residual: None,
            char_poly: poly
                .terms()
                .iter()
                .map(|&(coeff, exponent)| TermReport { coeff, exponent })
                .collect(),
            roots: stability
                .roots
                .iter()
                .map(|r| RootReport {
                    re: r.value.re,
                    im: r.value.im,
                    residual: r.residual,
                })
                .collect(),
            method: stability.method,
            verdict: stability.verdict,
            coverage_caveat: stability.coverage_caveat,
            timings,
        }
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn prepare_dir(dir: &Path) -> Result<(), ConfigError> {
    fs::create_dir_all(dir).map_err(|e| {
        ConfigError::new(
            "output.dir",
            format!("cannot create {}: {e}", dir.display()),
        )
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Outcome> {
    fs::write(path, contents).map_err(|e| {
        Outcome::from(ConfigError::new(
            "output.dir",
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

/// CSV with header `t,w,y,x1,..`; every number carries 13 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,w,y");
    for i in 1..=traj.states.len() {
        write!(out, ",x{i}").unwrap();
    }
    out.push('\n');
    for k in 0..traj.len() {
        write!(
            out,
            "{:.12e},{:.12e},{:.12e}",
            traj.time(k),
            traj.input[k],
            traj.output[k]
        )
        .unwrap();
        for x in &traj.states {
            write!(out, ",{:.12e}", x[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn load(config_path: &Path) -> Result<RunConfig, Outcome> {
    RunConfig::load(config_path).map_err(Outcome::from)
}

/// Lets command bodies bail out early with `?`.
fn run_with(f: impl FnOnce() -> Result<Outcome, Outcome>) -> Outcome {
    f().unwrap_or_else(|o| o)
}

pub fn cmd_simulate(config_path: &Path, out_dir: Option<&Path>) -> Outcome {
    run_with(|| {
        let cfg = load(config_path)?;
        let plant = cfg.plant()?;
        let controller = cfg.controller()?;
        let sim = cfg.sim_config()?;
        let model = match controller {
            Controller::Pd(c) => build_pd_model(&plant, &c),
            Controller::Pi(c) => build_pi_model(&plant, &c),
        }
        .map_err(|e| ConfigError::new("controller", e))?;
        let dir = cfg.output_dir(out_dir);
        prepare_dir(&dir)?;
        let path = dir.join(
            cfg.output
                .trajectory
                .as_deref()
                .unwrap_or(DEFAULT_TRAJECTORY),
        );
        match simulate_state_space(&model, &sim) {
            Ok(traj) => {
                write_file(&path, &trajectory_csv(&traj))?;
                Ok(Outcome {
                    exit: Exit::Ok,
                    written: vec![path],
                    diagnostic: None,
                })
            }
            Err(Error::Diverged {
                index,
                time,
                partial,
            }) => {
                write_file(&path, &trajectory_csv(&partial))?;
                Ok(Outcome {
                    exit: Exit::Diverged,
                    written: vec![path],
                    diagnostic: Some(format!(
                        "simulation diverged at step {index} (t = {time}); \
                         {} samples kept in the trajectory file",
                        partial.len()
                    )),
                })
            }
            Err(e @ Error::ResourceLimit { .. }) => Err(ConfigError::new("sim", e).into()),
            Err(e) => Err(Outcome::fail(
                Exit::Solver,
                format!("simulation failed: {e}"),
            )),
        }
    })
}

fn exit_for(verdict: Verdict, unstable: Exit) -> Exit {
    match verdict {
        Verdict::Stable => Exit::Ok,
        Verdict::Unstable => unstable,
        Verdict::Inconclusive => Exit::Solver,
    }
}

fn verdict_diagnostic(report: &Report) -> Option<String> {
    match report.verdict {
        Verdict::Stable if report.coverage_caveat => Some(
            "closed loop looks stable; the root search is not exhaustive for these orders".into(),
        ),
        Verdict::Stable => None,
        Verdict::Unstable => {
            let bad: Vec<String> = report
                .roots
                .iter()
                .filter(|r| r.re >= 0.0)
                .map(|r| format!("{:.6}{:+.6}i", r.re, r.im))
                .collect();
            Some(format!(
                "closed loop is unstable; right-half-plane roots: {}",
                bad.join(", ")
            ))
        }
        Verdict::Inconclusive => {
            Some("root search found no roots; stability is inconclusive".into())
        }
    }
}

fn search(poly: &FracPoly, cfg: &RootFindConfig) -> Result<(StabilityReport, f64), Outcome> {
    let start = Instant::now();
    let report = find_roots(poly, cfg)
        .map_err(|e| Outcome::fail(Exit::Solver, format!("root search failed: {e}")))?;
    Ok((report, millis(start)))
}

pub fn cmd_design(config_path: &Path, out_dir: Option<&Path>) -> Outcome {
    run_with(|| {
        let cfg = load(config_path)?;
        let plant = cfg.plant()?;
        let block = cfg.design()?;
        let request = block.request(plant)?;
        let dir = cfg.output_dir(out_dir);
        prepare_dir(&dir)?;

        let start = Instant::now();
        let designed = match request {
            config::DesignRequest::PdFractional(spec) => {
                design_pd_fractional(&spec).map(Controller::Pd)
            }
            config::DesignRequest::PdInteger(spec) => design_pd_integer(&spec).map(Controller::Pd),
            config::DesignRequest::Pi(spec) => design_pi(&spec).map(Controller::Pi),
        };
        let design_ms = millis(start);
        let controller =
            designed.map_err(|e| Outcome::fail(Exit::Solver, format!("design failed: {e}")))?;

        let poles = block.poles();
        let poly = char_poly(&plant, &controller);
        let (stability, roots_ms) = search(&poly, &RootFindConfig::around_poles(&poles))?;
        let mut report = Report::new(
            "design",
            &cfg,
            controller,
            &poly,
            &stability,
            Timings {
                design_ms: Some(design_ms),
                roots_ms,
            },
        );
        let residual = poles
            .iter()
            .map(|&p| eval_fracpoly(&poly, p).map(|v| v.norm()))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
            .map_err(|e| Outcome::fail(Exit::Solver, format!("residual check failed: {e}")))?;
        report.design_residual = Some(residual);

        let path = dir.join(
            cfg.output
                .report
                .as_deref()
                .unwrap_or(DEFAULT_DESIGN_REPORT),
        );
        write_file(
            &path,
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        Ok(Outcome {
            exit: exit_for(report.verdict, Exit::Unstable),
            written: vec![path],
            diagnostic: verdict_diagnostic(&report),
        })
    })
}

pub fn cmd_poles(config_path: &Path, out_dir: Option<&Path>) -> Outcome {
    run_with(|| {
        let cfg = load(config_path)?;
        let plant = cfg.plant()?;
        let controller = cfg.controller()?;
        let dir = cfg.output_dir(out_dir);
        prepare_dir(&dir)?;
        let poly = char_poly(&plant, &controller);
        let (stability, roots_ms) = search(&poly, &RootFindConfig::default())?;
        let report = Report::new(
            "poles",
            &cfg,
            controller,
            &poly,
            &stability,
            Timings {
                design_ms: None,
                roots_ms,
            },
        );
        let path = dir.join(cfg.output.report.as_deref().unwrap_or(DEFAULT_POLES_REPORT));
        write_file(
            &path,
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        // an unstable loop is still a successful search here
        Ok(Outcome {
            exit: exit_for(report.verdict, Exit::Ok),
            written: vec![path],
            diagnostic: verdict_diagnostic(&report),
        })
    })
}
