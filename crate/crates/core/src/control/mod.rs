//! Discrimination objective, its exact gradient with respect to the field
//! samples, the chained gradient with respect to the PZT drive, and
//! gradient ascent over either control.

mod ascent;
mod gradient;

pub use ascent::{ascend, ascend_drive, AscentConfig, AscentReport, StopReason};
pub use gradient::{finite_difference_gradient, gradient_drive, gradient_field, DriveSynthesis};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::quantum::{excitation_probability, ControlField, QuantumComponent};

/// Components sharing one control field; `target` is the species to excite.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub components: Vec<QuantumComponent>,
    pub target: usize,
}

impl Mixture {
    pub fn new(components: Vec<QuantumComponent>, target: usize) -> Result<Self> {
        let m = Self { components, target };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.components.is_empty(), Config, "mixture has no components");
        ensure!(
            self.target < self.components.len(),
            Config,
            "target index {} outside {} components",
            self.target,
            self.components.len()
        );
        for (k, c) in self.components.iter().enumerate() {
            c.validate()?;
            if k != self.target {
                ensure!(
                    c.weight > 0.0 && c.weight.is_finite(),
                    Validation,
                    "penalty weight of '{}' must be > 0, got {}",
                    c.label,
                    c.weight
                );
            }
        }
        Ok(())
    }

    /// `+1` for the target, `−α_k` for competitors.
    pub fn sign(&self, k: usize) -> f64 {
        if k == self.target {
            1.0
        } else {
            -self.components[k].weight
        }
    }

    /// Objective range `[−Σα_k, 1]`.
    pub fn bounds(&self) -> (f64, f64) {
        let penalty: f64 =
            (0..self.components.len()).filter(|&k| k != self.target).map(|k| self.components[k].weight).sum();
        (-penalty, 1.0)
    }
}

/// Excitation probability of every component.
pub fn populations(mixture: &Mixture, field: &ControlField) -> Result<Vec<f64>> {
    mixture.validate()?;
    mixture.components.par_iter().map(|c| excitation_probability(c, field)).collect()
}

/// `F = P_j − Σ_{k≠j} α_k P_k`.
pub fn objective(mixture: &Mixture, field: &ControlField) -> Result<f64> {
    let p = populations(mixture, field)?;
    let f: f64 = p.iter().enumerate().map(|(k, pk)| mixture.sign(k) * pk).sum();
    if !f.is_finite() {
        return Err(Error::Numeric("objective is not finite".into()));
    }
    Ok(f)
}

/// Field with samples uniform in `[−amplitude, amplitude]`.
pub fn random_field(dt: f64, len: usize, amplitude: f64, seed: u64) -> Result<ControlField> {
    ensure!(amplitude >= 0.0, Validation, "amplitude must be >= 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-amplitude, amplitude).map_err(|e| Error::Validation(e.to_string()))?;
    ControlField::new(dt, (0..len).map(|_| dist.sample(&mut rng)).collect())
}
