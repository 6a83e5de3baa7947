use serde::{Deserialize, Serialize};

use super::gradient::{gradient_drive, gradient_field, DriveSynthesis};
use super::{objective, Mixture};
use crate::cavity::PztDrive;
use crate::error::{ensure, Error, Result};
use crate::numerics::sup_norm;
use crate::quantum::ControlField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    /// Initial (or fixed) step `ε`.
    pub step_size: f64,
    pub max_iterations: usize,
    /// Stop once the gradient sup-norm drops below this value.
    pub gradient_tolerance: f64,
    /// Backtracking: halve `ε` until the objective increases.
    pub line_search: bool,
    pub max_halvings: u32,
    /// Factor applied to an accepted `ε` before the next iteration.
    pub step_growth: f64,
    /// Relative step of the drive-chain finite differences.
    pub fd_epsilon: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            line_search: true,
            max_halvings: 30,
            step_growth: 2.0,
            fd_epsilon: 1e-6,
            seed: 0,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.step_size > 0.0 && self.step_size.is_finite(), Config, "step_size must be > 0");
        ensure!(self.gradient_tolerance > 0.0, Config, "gradient_tolerance must be > 0");
        ensure!(self.fd_epsilon > 0.0, Config, "fd_epsilon must be > 0");
        ensure!(self.step_growth >= 1.0, Config, "step_growth must be >= 1");
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentReport {
    /// Objective at the start and after every accepted update.
    pub objective_history: Vec<f64>,
    /// Gradient sup-norm at the same points.
    pub gradient_norm_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub final_field: ControlField,
    pub final_drive: Option<PztDrive>,
    pub iterations_used: usize,
    pub stop_reason: StopReason,
}

impl AscentReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_history.last().expect("history holds the start point")
    }
}

struct Trace {
    objective: Vec<f64>,
    gradient_norm: Vec<f64>,
    steps: Vec<f64>,
    iterations: usize,
    stop: StopReason,
}

fn diverged(iteration: usize, e: Error) -> Error {
    Error::Numeric(format!("ascent diverged at iteration {iteration}: {e}"))
}

/// Shared ascent loop over a parameter vector.
fn run(
    x: &mut Vec<f64>,
    config: &AscentConfig,
    eval: impl Fn(&[f64]) -> Result<f64>,
    grad: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Trace> {
    config.validate()?;
    let mut f = eval(x)?;
    let mut g = grad(x)?;
    let mut trace = Trace {
        objective: vec![f],
        gradient_norm: vec![sup_norm(&g)],
        steps: Vec::new(),
        iterations: 0,
        stop: StopReason::MaxIterations,
    };
    let mut eps = config.step_size;
    for it in 1..=config.max_iterations {
        if sup_norm(&g) < config.gradient_tolerance {
            trace.stop = StopReason::GradientTolerance;
            return Ok(trace);
        }
        let step = |e: f64| -> Vec<f64> { x.iter().zip(&g).map(|(a, b)| a + e * b).collect() };
        let accepted = if config.line_search {
            let mut found = None;
            for _ in 0..=config.max_halvings {
                let candidate = step(eps);
                match eval(&candidate) {
                    Ok(v) if v.is_nan() => return Err(diverged(it, Error::Numeric("NaN".into()))),
                    Ok(v) if v > f => {
                        found = Some((candidate, v));
                        break;
                    }
                    Ok(_) | Err(Error::Validation(_) | Error::Domain(_)) => eps *= 0.5,
                    Err(e) => return Err(diverged(it, e)),
                }
            }
            found
        } else {
            let candidate = step(eps);
            let v = eval(&candidate).map_err(|e| diverged(it, e))?;
            Some((candidate, v))
        };
        let Some((candidate, v)) = accepted else {
            trace.stop = StopReason::LineSearchStalled;
            return Ok(trace);
        };
        if !v.is_finite() {
            return Err(diverged(it, Error::Numeric(format!("objective {v}"))));
        }
        *x = candidate;
        f = v;
        g = grad(x).map_err(|e| diverged(it, e))?;
        trace.objective.push(f);
        trace.gradient_norm.push(sup_norm(&g));
        trace.steps.push(eps);
        trace.iterations = it;
        if config.line_search {
            eps *= config.step_growth;
        }
    }
    if sup_norm(&g) < config.gradient_tolerance {
        trace.stop = StopReason::GradientTolerance;
    }
    Ok(trace)
}

/// Gradient ascent directly on the field samples: `E ← E + ε·δF/δE`.
pub fn ascend(mixture: &Mixture, initial: &ControlField, config: &AscentConfig) -> Result<AscentReport> {
    mixture.validate()?;
    initial.validate()?;
    let dt = initial.dt;
    let as_field = |x: &[f64]| ControlField { dt, samples: x.to_vec() };
    let mut x = initial.samples.clone();
    let trace = run(&mut x, config, |x| objective(mixture, &as_field(x)), |x| gradient_field(mixture, &as_field(x)))?;
    Ok(AscentReport {
        objective_history: trace.objective,
        gradient_norm_history: trace.gradient_norm,
        step_history: trace.steps,
        final_field: as_field(&x),
        final_drive: None,
        iterations_used: trace.iterations,
        stop_reason: trace.stop,
    })
}

/// Gradient ascent on the PZT drive parameters through the synthesis map.
pub fn ascend_drive(
    mixture: &Mixture,
    initial: &PztDrive,
    synthesis: &DriveSynthesis,
    config: &AscentConfig,
) -> Result<AscentReport> {
    mixture.validate()?;
    let mut x = initial.parameters();
    let trace = run(
        &mut x,
        config,
        |x| objective(mixture, &synthesis.field(&initial.with_parameters(x)?)?),
        |x| gradient_drive(mixture, &initial.with_parameters(x)?, synthesis, config),
    )?;
    let drive = initial.with_parameters(&x)?;
    Ok(AscentReport {
        objective_history: trace.objective,
        gradient_norm_history: trace.gradient_norm,
        step_history: trace.steps,
        final_field: synthesis.field(&drive)?,
        final_drive: Some(drive),
        iterations_used: trace.iterations,
        stop_reason: trace.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{excitation_probability, QuantumComponent};

    #[test]
    fn stationary_start_returns_immediately() {
        let m = Mixture::new(vec![QuantumComponent::two_level("a", 1.0, 1.0, 1.0)], 0).unwrap();
        let f = ControlField::zeros(0.1, 20).unwrap();
        let r = ascend(&m, &f, &AscentConfig::default()).unwrap();
        assert_eq!(r.iterations_used, 0);
        assert_eq!(r.stop_reason, StopReason::GradientTolerance);
        assert_eq!(r.objective_history, vec![0.0]);
    }

    #[test]
    fn rabi_instance_converges() {
        let c = QuantumComponent::two_level("a", 1.0, 1.0, 1.0);
        let m = Mixture::new(vec![c.clone()], 0).unwrap();
        let f = ControlField::from_fn(0.1, 300, |t| 0.02 * t.cos()).unwrap();
        let cfg = AscentConfig { step_size: 0.05, ..Default::default() };
        let r = ascend(&m, &f, &cfg).unwrap();
        assert!(r.objective_history.windows(2).all(|w| w[1] >= w[0]));
        assert!(excitation_probability(&c, &r.final_field).unwrap() >= 0.99);
        assert!(r.iterations_used <= 500);
    }

    #[test]
    fn divergence_reports_iteration() {
        let eval = |x: &[f64]| Ok(if x[0] > 2.5 { f64::NAN } else { x[0] });
        let grad = |_: &[f64]| Ok(vec![1.0]);
        for line_search in [false, true] {
            let cfg = AscentConfig { step_size: 1.0, step_growth: 1.0, line_search, ..Default::default() };
            let err = run(&mut vec![0.0], &cfg, eval, grad).err().unwrap();
            assert!(matches!(err, Error::Numeric(ref s) if s.contains("iteration 3")), "{err}");
        }
    }

    #[test]
    fn line_search_history_is_monotone() {
        let eval = |x: &[f64]| Ok(-(x[0] - 1.0).powi(2));
        let grad = |x: &[f64]| Ok(vec![-2.0 * (x[0] - 1.0)]);
        let cfg = AscentConfig { step_size: 10.0, gradient_tolerance: 1e-10, ..Default::default() };
        let mut x = vec![-3.0];
        let t = run(&mut x, &cfg, eval, grad).unwrap();
        assert!(t.objective.windows(2).all(|w| w[1] >= w[0]));
        assert!((x[0] - 1.0).abs() < 1e-9);
    }
}
