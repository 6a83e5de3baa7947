use num_complex::Complex64;
use rayon::prelude::*;

use super::{objective, AscentConfig, Mixture};
use crate::cavity::{synthesize_field, Absorber, CavityConfig, PztDrive, SynthesisOptions, TimeGrid};
use crate::error::{ensure, Error, Result};
use crate::quantum::{step_eigen, step_propagator, CMatrix, ControlField, QuantumComponent, StepEigen};

/// `(e^{ix} − 1)/(ix)`, the step average of a phase rotating by `x`.
fn phase_average(x: f64) -> Complex64 {
    if x.abs() < 1e-8 {
        return Complex64::new(1.0 - x * x / 6.0, 0.5 * x);
    }
    let half = 0.5 * x;
    Complex64::new(x.sin() / x, 2.0 * half.sin() * half.sin() / x)
}

/// `∂P/∂E_n / dt` for one component, exact for the piecewise-constant field.
fn component_gradient(c: &QuantumComponent, field: &ControlField) -> Vec<f64> {
    let dt = field.dt;
    let eigs: Vec<StepEigen> = field.samples.iter().map(|&e| step_eigen(c.generator(e))).collect();
    let steps: Vec<CMatrix> = eigs.iter().map(|e| step_propagator(e, dt)).collect();
    let d = c.dim();
    let u = steps.iter().fold(CMatrix::identity(d, d), |acc, s| s * acc);

    let rho0 = c.initial.density();
    let heisenberg = u.adjoint() * c.projector() * &u;
    let mut m = &rho0 * &heisenberg - &heisenberg * &rho0;
    let scale = Complex64::new(0.0, -c.coupling_scale());

    let mut out = Vec::with_capacity(field.len());
    for (eig, step) in eigs.iter().zip(&steps) {
        let v = &eig.vectors;
        let vh = v.adjoint();
        let mt = &vh * &m * v;
        let mu = &vh * &c.dipole * v;
        let mut trace = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                let k = phase_average((eig.values[a] - eig.values[b]) * dt);
                trace += mt[(b, a)] * mu[(a, b)] * k;
            }
        }
        out.push((scale * trace).re);
        m = step * m * step.adjoint();
    }
    out
}

/// Functional derivative `δF/δE(t_n)` of the objective, one value per
/// field sample. Moving sample `n` by `h` changes `F` by `h·dt·g_n`.
pub fn gradient_field(mixture: &Mixture, field: &ControlField) -> Result<Vec<f64>> {
    mixture.validate()?;
    field.validate()?;
    let parts: Vec<Vec<f64>> = mixture.components.par_iter().map(|c| component_gradient(c, field)).collect();
    let mut g = vec![0.0; field.len()];
    for (k, part) in parts.iter().enumerate() {
        let s = mixture.sign(k);
        g.iter_mut().zip(part).for_each(|(a, b)| *a += s * b);
    }
    if let Some(n) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("gradient sample {n} is not finite")));
    }
    Ok(g)
}

/// Central-difference estimate of [`gradient_field`] with absolute step `h`.
pub fn finite_difference_gradient(mixture: &Mixture, field: &ControlField, h: f64) -> Result<Vec<f64>> {
    ensure!(h > 0.0, Usage, "finite-difference step must be > 0");
    (0..field.len())
        .into_par_iter()
        .map(|n| {
            let mut plus = field.clone();
            let mut minus = field.clone();
            plus.samples[n] += h;
            minus.samples[n] -= h;
            Ok((objective(mixture, &plus)? - objective(mixture, &minus)?) / (2.0 * h * field.dt))
        })
        .collect()
}

/// Everything needed to map a PZT drive to a control field.
#[derive(Debug, Clone)]
pub struct DriveSynthesis {
    pub cavity: CavityConfig,
    pub time_grid: TimeGrid,
    pub absorber: Absorber,
    pub options: SynthesisOptions,
}

impl DriveSynthesis {
    pub fn field(&self, drive: &PztDrive) -> Result<ControlField> {
        let s = synthesize_field(&self.cavity, drive, self.time_grid, &self.absorber, &self.options)?;
        if let Some(n) = s.width_averaged_field.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("synthesized field sample {n} is not finite")));
        }
        s.to_control_field()
    }
}

fn fd_step(value: f64, eps: f64) -> f64 {
    if value == 0.0 {
        eps
    } else {
        eps * value.abs()
    }
}

/// `∂F/∂u_m = Σ_n dt·g_n·∂E_n/∂u_m`, with the field sensitivity taken by
/// central differences of the synthesis map. The step for parameter `u_m`
/// is `fd_epsilon·|u_m|` (or `fd_epsilon` when `u_m = 0`).
pub fn gradient_drive(
    mixture: &Mixture,
    drive: &PztDrive,
    synthesis: &DriveSynthesis,
    config: &AscentConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let field = synthesis.field(drive)?;
    let g = gradient_field(mixture, &field)?;
    let params = drive.parameters();
    (0..params.len())
        .into_par_iter()
        .map(|m| {
            let h = fd_step(params[m], config.fd_epsilon);
            let mut p = params.clone();
            p[m] = params[m] + h;
            let plus = synthesis.field(&drive.with_parameters(&p)?)?;
            p[m] = params[m] - h;
            let minus = synthesis.field(&drive.with_parameters(&p)?)?;
            let dot: f64 = g.iter().zip(plus.samples.iter().zip(&minus.samples)).map(|(gn, (a, b))| gn * (a - b)).sum();
            let value = dot * field.dt / (2.0 * h);
            ensure!(value.is_finite(), Numeric, "drive gradient component {m} is not finite");
            Ok(value)
        })
        .collect()
}
