//! Run configuration: the JSON document every command reads.

use std::path::{Path, PathBuf};

use fracreg::design::{DesignSpecPd, DesignSpecPi, GainSpec};
use fracreg::model::{Controller, PdController, PiController, Plant};
use fracreg::simulate::{InputSpec, SimConfig, DEFAULT_MAX_STEPS};
use fracreg::Complex64;
use serde::{Deserialize, Serialize};

/// Environment variable overriding the simulation step cap.
pub const MAX_STEPS_ENV: &str = "FRACREG_MAX_STEPS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
    #[serde(default, skip_serializing_if = "OutputBlock::is_default")]
    pub output: OutputBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantBlock {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ControllerBlock {
    Pd { k: f64, td: f64, delta: f64 },
    Pi { k: f64, ti: f64, lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Pd,
    Pi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    #[serde(rename = "type")]
    pub kind: DesignKind,
    pub poles: Vec<PoleBlock>,
    /// Steady-state error in percent; fixes `K` of a fractional PD design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ess: Option<f64>,
    /// Fixed proportional gain, as an alternative to `ess`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Classical PD with `delta = 1`; `K` and `Td` both come from the pole.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub integer: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleBlock {
    pub re: f64,
    pub im: f64,
}

impl From<PoleBlock> for Complex64 {
    fn from(p: PoleBlock) -> Self {
        Complex64::new(p.re, p.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub h: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_len: Option<f64>,
    #[serde(default)]
    pub input: InputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputBlock {
    Step { amplitude: f64 },
    Samples { values: Vec<f64> },
}

impl Default for InputBlock {
    fn default() -> Self {
        InputBlock::Step { amplitude: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File name of the trajectory CSV inside `dir`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    /// File name of the JSON report inside `dir`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

impl OutputBlock {
    fn is_default(&self) -> bool {
        *self == OutputBlock::default()
    }
}

/// A configuration problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl ToString) -> Self {
        Self {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { String::new() } else { key };
            ConfigError::new(key, e.into_inner())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that do not depend on the command.
    fn check(&self) -> Result<(), ConfigError> {
        self.plant()?;
        match (&self.controller, &self.design) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "controller",
                    "give either a controller or a design block, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::new(
                    "controller",
                    "missing; give a controller or a design block",
                ))
            }
            _ => {}
        }
        if self.controller.is_some() {
            self.controller()?;
        }
        if let Some(design) = &self.design {
            design.check()?;
        }
        Ok(())
    }

    pub fn plant(&self) -> Result<Plant, ConfigError> {
        let p = &self.plant;
        Plant::new(p.a0, p.a1, p.a2, p.alpha, p.beta).map_err(|e| ConfigError::new("plant", e))
    }

    pub fn controller(&self) -> Result<Controller, ConfigError> {
        match self.controller {
            Some(block) => block.to_controller(),
            None => Err(ConfigError::new(
                "controller",
                "this command needs a concrete controller block",
            )),
        }
    }

    pub fn design(&self) -> Result<&DesignBlock, ConfigError> {
        self.design
            .as_ref()
            .ok_or_else(|| ConfigError::new("design", "this command needs a design block"))
    }

    /// Simulation settings, with the step cap taken from the environment.
    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let sim = self
            .sim
            .as_ref()
            .ok_or_else(|| ConfigError::new("sim", "missing; simulate needs a sim block"))?;
        let input = match &sim.input {
            InputBlock::Step { amplitude } => InputSpec::Step {
                amplitude: *amplitude,
            },
            InputBlock::Samples { values } => InputSpec::Samples(values.clone()),
        };
        let cfg = SimConfig {
            step: sim.h,
            t_end: sim.t_end,
            memory_len: sim.memory_len,
            input,
            max_steps: max_steps()?,
        };
        cfg.validate().map_err(|e| ConfigError::new("sim", e))?;
        Ok(cfg)
    }

    /// Output directory: the command-line override, then `output.dir`,
    /// then the working directory.
    pub fn output_dir(&self, overridden: Option<&Path>) -> PathBuf {
        overridden
            .map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

fn max_steps() -> Result<usize, ConfigError> {
    match std::env::var(MAX_STEPS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                ConfigError::new(
                    MAX_STEPS_ENV,
                    format!("expected a positive integer, got {v:?}"),
                )
            }),
        Err(_) => Ok(DEFAULT_MAX_STEPS),
    }
}

impl ControllerBlock {
    pub fn to_controller(self) -> Result<Controller, ConfigError> {
        match self {
            ControllerBlock::Pd { k, td, delta } => {
                if ![k, td, delta].iter().all(|v| v.is_finite()) {
                    return Err(ConfigError::new("controller", "parameters must be finite"));
                }
                Ok(Controller::Pd(PdController::new(k, td, delta)))
            }
            ControllerBlock::Pi { k, ti, lambda } => PiController::new(k, ti, lambda)
                .map(Controller::Pi)
                .map_err(|e| ConfigError::new("controller", e)),
        }
    }
}

impl From<Controller> for ControllerBlock {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Pd(c) => ControllerBlock::Pd {
                k: c.k,
                td: c.td,
                delta: c.delta,
            },
            Controller::Pi(c) => ControllerBlock::Pi {
                k: c.k(),
                ti: c.ti(),
                lambda: c.lambda(),
            },
        }
    }
}

/// A design request resolved against the plant.
#[derive(Clone, Copy, Debug)]
pub enum DesignRequest {
    PdFractional(DesignSpecPd),
    PdInteger(DesignSpecPd),
    Pi(DesignSpecPi),
}

impl DesignBlock {
    fn check(&self) -> Result<(), ConfigError> {
        if self
            .poles
            .iter()
            .any(|p| !(p.re.is_finite() && p.im.is_finite()))
        {
            return Err(ConfigError::new("design.poles", "poles must be finite"));
        }
        match self.kind {
            DesignKind::Pd => {
                match self.poles.as_slice() {
                    [p] if p.im == 0.0 => {
                        return Err(ConfigError::new(
                            "design.poles",
                            "PD design needs a complex pole",
                        ))
                    }
                    [_] => {}
                    [p, q] if p.re == q.re && p.im == -q.im && p.im != 0.0 => {}
                    [_, _] => {
                        return Err(ConfigError::new(
                            "design.poles",
                            "two poles must form a conjugate pair",
                        ))
                    }
                    _ => {
                        return Err(ConfigError::new(
                            "design.poles",
                            "PD design takes one complex pole or its conjugate pair",
                        ))
                    }
                }
                match (self.integer, self.ess, self.k) {
                    (true, Some(_), _) => Err(ConfigError::new(
                        "design.ess",
                        "integer design solves for K; drop ess",
                    )),
                    (true, _, Some(_)) => Err(ConfigError::new(
                        "design.k",
                        "integer design solves for K; drop k",
                    )),
                    (false, Some(_), Some(_)) => Err(ConfigError::new(
                        "design.k",
                        "give either ess or k, not both",
                    )),
                    (false, None, None) => Err(ConfigError::new(
                        "design.ess",
                        "fractional PD design needs ess or k",
                    )),
                    _ => Ok(()),
                }
            }
            DesignKind::Pi => {
                if self.poles.len() != 3 {
                    return Err(ConfigError::new(
                        "design.poles",
                        format!("PI design takes three poles, got {}", self.poles.len()),
                    ));
                }
                for (key, set) in [
                    ("design.ess", self.ess.is_some()),
                    ("design.k", self.k.is_some()),
                    ("design.integer", self.integer),
                ] {
                    if set {
                        return Err(ConfigError::new(key, "not used by a PI design"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.poles.iter().map(|&p| p.into()).collect()
    }

    pub fn request(&self, plant: Plant) -> Result<DesignRequest, ConfigError> {
        let poles = self.poles();
        match self.kind {
            DesignKind::Pd => {
                let gain = match (self.ess, self.k) {
                    (Some(e), _) => {
                        // surface a bad percentage as a config problem
                        fracreg::design::gain_from_ss_error(plant.a0(), e)
                            .map_err(|err| ConfigError::new("design.ess", err))?;
                        Some(GainSpec::SteadyStateErrorPercent(e))
                    }
                    (None, Some(k)) => Some(GainSpec::Fixed(k)),
                    (None, None) => None,
                };
                let spec = DesignSpecPd::new(plant, poles[0], gain)
                    .map_err(|e| ConfigError::new("design.poles", e))?;
                Ok(if self.integer {
                    DesignRequest::PdInteger(spec)
                } else {
                    DesignRequest::PdFractional(spec)
                })
            }
            DesignKind::Pi => DesignSpecPi::new(plant, [poles[0], poles[1], poles[2]])
                .map(DesignRequest::Pi)
                .map_err(|e| ConfigError::new("design.poles", e)),
        }
    }
}
