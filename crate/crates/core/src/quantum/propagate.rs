use num_complex::Complex64;

use super::{CMatrix, CVector, ControlField, InitialState, QuantumComponent};
use crate::error::{Error, Result};

/// Eigendecomposition `H = V diag(λ) V†` of one step generator.
#[derive(Debug, Clone)]
pub struct StepEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub(crate) fn step_eigen(h: CMatrix) -> StepEigen {
    let eig = h.symmetric_eigen();
    StepEigen { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
}

/// `exp(-i H dt)` from a precomputed eigendecomposition.
pub(crate) fn step_propagator(eig: &StepEigen, dt: f64) -> CMatrix {
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * dt);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * v.adjoint()
}

fn check(component: &QuantumComponent, field: &ControlField) -> Result<()> {
    component.validate()?;
    field.validate()
}

/// Wave function on every grid point, optionally with the step propagators.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub dt: f64,
    pub states: Vec<CVector>,
    pub unitaries: Option<Vec<CMatrix>>,
}

impl StateTrajectory {
    pub fn final_state(&self) -> &CVector {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Largest `| ‖ψ_n‖ − 1 |` along the trajectory.
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Propagates an arbitrary starting vector (not necessarily the component's
/// own initial state) through `field`.
pub fn propagate_state(
    component: &QuantumComponent,
    psi0: &CVector,
    field: &ControlField,
    keep_unitaries: bool,
) -> Result<StateTrajectory> {
    check(component, field)?;
    if psi0.len() != component.dim() {
        return Err(Error::Config(format!(
            "state has dimension {}, component '{}' has {}",
            psi0.len(),
            component.label,
            component.dim()
        )));
    }
    let mut states = Vec::with_capacity(field.len() + 1);
    let mut unitaries = keep_unitaries.then(|| Vec::with_capacity(field.len()));
    states.push(psi0.clone());
    for &e in &field.samples {
        let step = step_propagator(&step_eigen(component.generator(e)), field.dt);
        let next = &step * states.last().expect("non-empty");
        states.push(next);
        if let Some(u) = unitaries.as_mut() {
            u.push(step);
        }
    }
    Ok(StateTrajectory { dt: field.dt, states, unitaries })
}

/// Solves `i dψ/dt = (H0 + μE(t))ψ` for a pure-state component.
pub fn propagate(component: &QuantumComponent, field: &ControlField) -> Result<StateTrajectory> {
    match &component.initial {
        InitialState::Pure(psi0) => propagate_state(component, psi0, field, false),
        InitialState::Density(_) => Err(Error::Usage(format!(
            "component '{}' starts from a density matrix; use evolution_operator",
            component.label
        ))),
    }
}

/// Full evolution operator `U(τ_p)`.
pub fn evolution_operator(component: &QuantumComponent, field: &ControlField) -> Result<CMatrix> {
    check(component, field)?;
    let d = component.dim();
    let mut u = CMatrix::identity(d, d);
    for &e in &field.samples {
        u = step_propagator(&step_eigen(component.generator(e)), field.dt) * u;
    }
    Ok(u)
}

pub(crate) fn final_density(component: &QuantumComponent, u: &CMatrix) -> CMatrix {
    match &component.initial {
        InitialState::Pure(psi0) => {
            let psi = u * psi0;
            &psi * psi.adjoint()
        }
        InitialState::Density(rho) => u * rho * u.adjoint(),
    }
}

pub(crate) fn projected_population(component: &QuantumComponent, rho: &CMatrix) -> f64 {
    component.excited_indices.iter().map(|&i| rho[(i, i)].re).sum::<f64>().clamp(0.0, 1.0)
}

/// `⟨Ψ(τ_p)|𝒫|Ψ(τ_p)⟩`, or `Tr(𝒫 ρ(τ_p))` for a mixed initial state.
pub fn excitation_probability(component: &QuantumComponent, field: &ControlField) -> Result<f64> {
    let u = evolution_operator(component, field)?;
    Ok(projected_population(component, &final_density(component, &u)))
}

/// Interaction-picture dipole `U†(t_n) μ U(t_n)` at grid point
/// `t_n = n·dt`, `n ∈ 0..=len`.
pub fn interaction_dipole(component: &QuantumComponent, field: &ControlField, step_index: usize) -> Result<CMatrix> {
    check(component, field)?;
    if step_index > field.len() {
        return Err(Error::Usage(format!("step index {step_index} outside grid 0..={}", field.len())));
    }
    let (head, _) = field.split_at(step_index);
    let d = component.dim();
    let mut u = CMatrix::identity(d, d);
    for &e in &head.samples {
        u = step_propagator(&step_eigen(component.generator(e)), field.dt) * u;
    }
    Ok(u.adjoint() * &component.dipole * u)
}
