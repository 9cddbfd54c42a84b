//! Time-domain solvers for the closed loop.
//!
//! [`simulate_state_space`] advances a [`StateModel`] with explicit Euler
//! steps, every fractional term on the right evaluated as a GL sum over the
//! state history. [`simulate_direct`] discretizes the scalar loop equation
//! in `y` instead and solves for `y_k` at each step; it is built straight
//! from the plant and controller parameters and serves as an independent
//! check on the state-space path.

use crate::glcalc::{memory_terms, GlTable};
use crate::model::{Controller, Plant, Source, StateModel};
use crate::{Error, Result};

/// States or outputs above this magnitude abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    /// `w(t) = amplitude` for `t >= 0`, zero before.
    Step { amplitude: f64 },
    /// `w(k h) = samples[k]`; must cover the whole run.
    Samples(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub step: f64,
    pub t_end: f64,
    pub memory_len: Option<f64>,
    pub input: InputSpec,
    pub max_steps: usize,
}

impl SimConfig {
    pub fn step_input(step: f64, t_end: f64, amplitude: f64) -> Self {
        Self {
            step,
            t_end,
            memory_len: None,
            input: InputSpec::Step { amplitude },
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_memory(mut self, memory_len: f64) -> Self {
        self.memory_len = Some(memory_len);
        self
    }

    /// Number of steps after `t = 0`; the run has `steps() + 1` samples.
    pub fn steps(&self) -> usize {
        (self.t_end / self.step * (1.0 + 1e-12)).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.1) {
            return Err(Error::InvalidArgument(format!(
                "step must lie in (0, 0.1], got {}",
                self.step
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 10.0 * self.step * (1.0 - 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "t_end must cover at least 10 steps, got {}",
                self.t_end
            )));
        }
        let requested = self.t_end / self.step;
        if requested > self.max_steps as f64 {
            return Err(Error::ResourceLimit {
                requested: requested.ceil() as usize,
                limit: self.max_steps,
            });
        }
        memory_terms(self.step, self.memory_len)?;
        match &self.input {
            InputSpec::Step { amplitude } if !amplitude.is_finite() => Err(Error::InvalidArgument(
                "step amplitude must be finite".into(),
            )),
            InputSpec::Samples(s) if s.len() < self.steps() + 1 => {
                Err(Error::InvalidArgument(format!(
                    "input has {} samples, run needs {}",
                    s.len(),
                    self.steps() + 1
                )))
            }
            InputSpec::Samples(s) if s.iter().any(|v| !v.is_finite()) => Err(
                Error::InvalidArgument("input samples must be finite".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Input samples `w_0..=w_steps`.
    pub fn input_samples(&self) -> Vec<f64> {
        let n = self.steps() + 1;
        match &self.input {
            InputSpec::Step { amplitude } => vec![*amplitude; n],
            InputSpec::Samples(s) => s[..n].to_vec(),
        }
    }
}

/// Sampled run: `states[i][k]`, `output[k]`, `input[k]` at `t = k * step`.
/// Direct-solver runs carry no states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub states: Vec<Vec<f64>>,
    pub output: Vec<f64>,
    pub input: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn duration(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }
}

/// One fractional term with its GL table and `gain * h^-order` prefactor.
struct Discretized {
    source: Source,
    table: GlTable,
    scale: f64,
}

impl Discretized {
    fn new(source: Source, order: f64, gain: f64, h: f64, count: usize) -> Result<Self> {
        Ok(Self {
            source,
            table: GlTable::new(order, count)?,
            scale: gain * h.powf(-order),
        })
    }

    fn eval(&self, states: &[Vec<f64>], input: &[f64], k: usize, terms: usize) -> f64 {
        let history = match self.source {
            Source::State(i) => &states[i][..=k],
            Source::Input => &input[..=k],
        };
        self.scale * self.table.weighted_sum(history, terms)
    }
}

fn diverged(value: f64) -> bool {
    !value.is_finite() || value.abs() > DIVERGENCE_LIMIT
}

/// Explicit Euler integration of a state model from rest:
/// `x_{i,k+1} = x_{i,k} + h * rhs_i(k)` with every right-hand term
/// `gain * h^-q * sum_j b_j src_{k-j}`. The output is evaluated from the
/// same history at every sample.
pub fn simulate_state_space(model: &StateModel, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let h = cfg.step;
    let n = cfg.steps();
    let terms = memory_terms(h, cfg.memory_len)?;
    let count = n.min(terms - 1);
    let input = cfg.input_samples();

    let discretize = |ts: &[crate::model::Term]| -> Result<Vec<Discretized>> {
        ts.iter()
            .map(|t| Discretized::new(t.source, t.order, t.gain, h, count))
            .collect()
    };
    let equations: Vec<Vec<Discretized>> = model
        .equations()
        .iter()
        .map(|eq| discretize(eq))
        .collect::<Result<_>>()?;
    let output_terms = discretize(model.output_terms())?;

    let dim = model.dim();
    let mut states: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(0.0);
            v
        })
        .collect();
    let mut output = Vec::with_capacity(n + 1);
    let mut rates = vec![0.0; dim];

    let partial = |states: &[Vec<f64>], output: &[f64], len: usize| Trajectory {
        step: h,
        states: states.iter().map(|s| s[..len].to_vec()).collect(),
        output: output[..len].to_vec(),
        input: input[..len].to_vec(),
    };

    for k in 0..=n {
        let y: f64 = output_terms
            .iter()
            .map(|t| t.eval(&states, &input, k, terms))
            .sum();
        output.push(y);
        if diverged(y) {
            return Err(Error::Diverged {
                index: k,
                time: k as f64 * h,
                partial: Box::new(partial(&states, &output, k)),
            });
        }
        if k == n {
            break;
        }
        for (rate, eq) in rates.iter_mut().zip(&equations) {
            *rate = eq.iter().map(|t| t.eval(&states, &input, k, terms)).sum();
        }
        let mut bad = false;
        for (x, rate) in states.iter_mut().zip(&rates) {
            let next = x[k] + h * rate;
            bad |= diverged(next);
            x.push(next);
        }
        if bad {
            return Err(Error::Diverged {
                index: k + 1,
                time: (k + 1) as f64 * h,
                partial: Box::new(partial(&states, &output, k + 1)),
            });
        }
    }

    Ok(Trajectory {
        step: h,
        states,
        output,
        input,
    })
}

/// Direct GL solution of the scalar closed-loop equation
/// `sum_i c_i D^{q_i} y = sum_r d_r D^{p_r} w`:
///
/// - `PD^delta`: `a2 D^alpha y + a1 D^beta y + Td D^delta y + (a0+K) y = K w + Td D^delta w`
/// - `PI^lambda`: `a2 D^(alpha+lambda) y + a1 D^(beta+lambda) y + (a0+K) D^lambda y + Ti y = K D^lambda w + Ti w`
///
/// Each step isolates `y_k` through the `j = 0` weights of the left-hand
/// sums. Only the output is produced.
pub fn simulate_direct(plant: &Plant, ctrl: &Controller, cfg: &SimConfig) -> Result<Trajectory> {
    plant.validate()?;
    cfg.validate()?;
    let (a0, a1, a2, alpha, beta) = (
        plant.a0(),
        plant.a1(),
        plant.a2(),
        plant.alpha(),
        plant.beta(),
    );
    // (coefficient, order) pairs of each side
    let (lhs, rhs): (Vec<_>, Vec<_>) = match *ctrl {
        Controller::Pd(c) => (
            vec![(a2, alpha), (a1, beta), (c.td, c.delta), (a0 + c.k, 0.0)],
            vec![(c.k, 0.0), (c.td, c.delta)],
        ),
        Controller::Pi(c) => {
            let lambda = c.lambda();
            (
                vec![
                    (a2, alpha + lambda),
                    (a1, beta + lambda),
                    (a0 + c.k(), lambda),
                    (c.ti(), 0.0),
                ],
                vec![(c.k(), lambda), (c.ti(), 0.0)],
            )
        }
    };

    let h = cfg.step;
    let n = cfg.steps();
    let terms = memory_terms(h, cfg.memory_len)?;
    let count = n.min(terms - 1);
    let input = cfg.input_samples();

    let build = |ts: &[(f64, f64)], source: Source| -> Result<Vec<Discretized>> {
        ts.iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|&(c, q)| Discretized::new(source, q, c, h, count))
            .collect()
    };
    let lhs = build(&lhs, Source::State(0))?;
    let rhs = build(&rhs, Source::Input)?;

    let pivot: f64 = lhs.iter().map(|t| t.scale).sum();
    let magnitude: f64 = lhs.iter().map(|t| t.scale.abs()).sum();
    if !(pivot.abs() > f64::EPSILON * magnitude) || !pivot.is_finite() {
        return Err(Error::SingularStep { pivot });
    }

    // y history lives in a one-state buffer so the shared term evaluator
    // applies; slot k holds 0 while y_k is being solved for.
    let mut y = vec![Vec::with_capacity(n + 1)];
    for k in 0..=n {
        y[0].push(0.0);
        let forcing: f64 = rhs.iter().map(|t| t.eval(&[], &input, k, terms)).sum();
        let memory: f64 = lhs.iter().map(|t| t.eval(&y, &input, k, terms)).sum();
        let value = (forcing - memory) / pivot;
        if diverged(value) {
            y[0].pop();
            return Err(Error::Diverged {
                index: k,
                time: k as f64 * h,
                partial: Box::new(Trajectory {
                    step: h,
                    states: Vec::new(),
                    output: y.pop().unwrap_or_default(),
                    input: input[..k].to_vec(),
                }),
            });
        }
        y[0][k] = value;
    }

    Ok(Trajectory {
        step: h,
        states: Vec::new(),
        output: y.pop().unwrap_or_default(),
        input,
    })
}

/// Mean and max-min spread of the output over the trailing `window`
/// seconds.
pub fn steady_state_estimate(traj: &Trajectory, window: f64) -> Result<(f64, f64)> {
    if traj.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    if !(window >= 0.0) || window > traj.duration() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "window {window} s exceeds trajectory duration {} s",
            traj.duration()
        )));
    }
    let span = ((window / traj.step) * (1.0 + 1e-12)).floor() as usize;
    let tail = &traj.output[traj.len() - 1 - span.min(traj.len() - 1)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok((mean, hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_pd_model, build_pi_model, PdController, PiController};

    fn reference_plant() -> Plant {
        Plant::new(1.0, 0.5, 0.8, 2.2, 0.9).unwrap()
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::step_input(0.01, 1.0, 1.0);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.steps(), 100);
        assert!(SimConfig::step_input(0.2, 10.0, 1.0).validate().is_err());
        assert!(SimConfig::step_input(0.01, 0.05, 1.0).validate().is_err());
        let big = SimConfig::step_input(1e-5, 20.0, 1.0);
        assert!(matches!(big.validate(), Err(Error::ResourceLimit { .. })));
        let short = SimConfig {
            input: InputSpec::Samples(vec![1.0; 10]),
            ..SimConfig::step_input(0.01, 1.0, 1.0)
        };
        assert!(short.validate().is_err());
        assert!(SimConfig::step_input(0.01, 1.0, 1.0)
            .with_memory(0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn golden_row_count() {
        assert_eq!(SimConfig::step_input(0.001, 12.0, 1.0).steps(), 12_000);
        assert_eq!(SimConfig::step_input(0.1, 1.0, 1.0).steps(), 10);
    }

    #[test]
    fn zero_input_zero_trajectory() {
        let model = build_pd_model(
            &reference_plant(),
            &PdController::new(24.0, 6.9407, 0.71859),
        )
        .unwrap();
        let cfg = SimConfig::step_input(0.01, 2.0, 0.0);
        let traj = simulate_state_space(&model, &cfg).unwrap();
        assert!(traj.states.iter().flatten().all(|&v| v == 0.0));
        assert!(traj.output.iter().all(|&v| v == 0.0));
        let ctrl = Controller::Pd(PdController::new(24.0, 6.9407, 0.71859));
        let direct = simulate_direct(&reference_plant(), &ctrl, &cfg).unwrap();
        assert!(direct.output.iter().all(|&v| v == 0.0));
        let pi = build_pi_model(
            &reference_plant(),
            &PiController::new(2.0, 1.0, 0.8).unwrap(),
        )
        .unwrap();
        let traj = simulate_state_space(&pi, &cfg).unwrap();
        assert!(traj.states.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn trajectory_shape() {
        let model = build_pd_model(&reference_plant(), &PdController::new(5.0, 1.0, 0.5)).unwrap();
        let traj = simulate_state_space(&model, &SimConfig::step_input(0.01, 1.0, 1.0)).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(traj.states.len(), 2);
        assert!(traj.states.iter().all(|s| s.len() == 101));
        assert_eq!(traj.input.len(), 101);
    }

    #[test]
    fn deterministic_runs() {
        let model = build_pd_model(
            &reference_plant(),
            &PdController::new(24.0, 6.9407, 0.71859),
        )
        .unwrap();
        let cfg = SimConfig::step_input(0.005, 3.0, 1.0);
        let a = simulate_state_space(&model, &cfg).unwrap();
        let b = simulate_state_space(&model, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_memory_equals_full_memory() {
        let model = build_pd_model(
            &reference_plant(),
            &PdController::new(24.0, 6.9407, 0.71859),
        )
        .unwrap();
        let cfg = SimConfig::step_input(0.01, 3.0, 1.0);
        let full = simulate_state_space(&model, &cfg).unwrap();
        let long = simulate_state_space(&model, &cfg.clone().with_memory(3.0)).unwrap();
        assert_eq!(full, long);
        let short = simulate_state_space(&model, &cfg.with_memory(0.5)).unwrap();
        assert_ne!(full.output, short.output);
    }

    #[test]
    fn steady_state_of_constant() {
        let traj = Trajectory {
            step: 0.1,
            states: vec![],
            output: vec![2.5; 50],
            input: vec![1.0; 50],
        };
        assert_eq!(steady_state_estimate(&traj, 2.0).unwrap(), (2.5, 0.0));
        assert!(steady_state_estimate(&traj, 10.0).is_err());
    }

    #[test]
    fn steady_state_window_selection() {
        let traj = Trajectory {
            step: 1.0,
            states: vec![],
            output: vec![0.0, 10.0, 1.0, 3.0],
            input: vec![1.0; 4],
        };
        // trailing 1 s covers the last two samples
        assert_eq!(steady_state_estimate(&traj, 1.0).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn unstable_design_blows_up() {
        let model = build_pd_model(
            &reference_plant(),
            &PdController::new(49.0, -79.74427, -0.55194),
        )
        .unwrap();
        match simulate_state_space(&model, &SimConfig::step_input(0.001, 12.0, 1.0)) {
            Err(Error::Diverged { index, partial, .. }) => {
                assert_eq!(partial.len(), index.min(partial.len()));
                assert!(partial.output.iter().any(|y| y.abs() > 1e3));
            }
            Ok(traj) => assert!(traj.output.iter().any(|y| y.abs() > 1e3)),
            Err(e) => panic!("{e}"),
        }
    }
}
