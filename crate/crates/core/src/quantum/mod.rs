//! Closed-system dynamics of the mixture components under a sampled scalar
//! control field.
//!
//! The field is piecewise constant on a uniform grid, so each step is
//! propagated exactly with `exp(-i (H0 + c·μ·E_n) dt)` obtained from the
//! Hermitian eigendecomposition of the step generator. `c` is the coupling
//! scale fixed by [`DipoleUnits`].

mod propagate;

pub use propagate::{
    evolution_operator, excitation_probability, interaction_dipole, propagate, propagate_state, StateTrajectory,
    StepEigen,
};
pub(crate) use propagate::{step_eigen, step_propagator};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{ensure, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

/// How the dipole·field product enters the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipoleUnits {
    /// Dipole given in rad/s per (V/m): `μ·E` is already an angular frequency.
    #[default]
    Scaled,
    /// Dipole given in C·m with energies in rad/s: coupling is `μ·E/ħ`.
    Si,
}

impl DipoleUnits {
    pub fn coupling_scale(self) -> f64 {
        match self {
            DipoleUnits::Scaled => 1.0,
            DipoleUnits::Si => 1.0 / HBAR,
        }
    }
}

/// Initial condition of one component: a pure state or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(CVector),
    Density(CMatrix),
}

impl InitialState {
    /// Basis state `|index⟩` of a `dim`-level system.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        InitialState::Pure(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialState::Pure(v) => v.len(),
            InitialState::Density(r) => r.nrows(),
        }
    }

    /// `ρ₀`, formed as `|ψ⟩⟨ψ|` for a pure state.
    pub fn density(&self) -> CMatrix {
        match self {
            InitialState::Pure(v) => v * v.adjoint(),
            InitialState::Density(r) => r.clone(),
        }
    }

    /// Basis indices carrying population.
    pub fn support(&self) -> Vec<usize> {
        let diag: Vec<f64> = match self {
            InitialState::Pure(v) => v.iter().map(|c| c.norm_sqr()).collect(),
            InitialState::Density(r) => (0..r.nrows()).map(|i| r[(i, i)].re).collect(),
        };
        diag.iter().enumerate().filter(|(_, p)| **p > 1e-14).map(|(i, _)| i).collect()
    }
}

/// One species of the mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumComponent {
    pub label: String,
    /// Diagonal of the free Hamiltonian [rad/s].
    pub energies: Vec<f64>,
    pub dipole: CMatrix,
    pub initial: InitialState,
    pub excited_indices: Vec<usize>,
    /// Penalty weight when this component is not the target.
    pub weight: f64,
    pub units: DipoleUnits,
}

impl QuantumComponent {
    /// Two-level system `|0⟩, |1⟩` with transition frequency `omega` and a
    /// real off-diagonal dipole element, starting in `|0⟩`.
    pub fn two_level(label: impl Into<String>, omega: f64, dipole: f64, weight: f64) -> Self {
        let mut mu = CMatrix::zeros(2, 2);
        mu[(0, 1)] = Complex64::new(dipole, 0.0);
        mu[(1, 0)] = Complex64::new(dipole, 0.0);
        Self {
            label: label.into(),
            energies: vec![0.0, omega],
            dipole: mu,
            initial: InitialState::basis(2, 0),
            excited_indices: vec![1],
            weight,
            units: DipoleUnits::Scaled,
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn coupling_scale(&self) -> f64 {
        self.units.coupling_scale()
    }

    /// Checks shapes, hermiticity, normalization and index ranges.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        ensure!(d >= 1, Config, "component '{}' has no levels", self.label);
        ensure!(
            self.dipole.nrows() == d && self.dipole.ncols() == d,
            Config,
            "component '{}': dipole is {}x{}, expected {d}x{d}",
            self.label,
            self.dipole.nrows(),
            self.dipole.ncols()
        );
        ensure!(
            self.initial.dim() == d,
            Config,
            "component '{}': initial state has dimension {}, expected {d}",
            self.label,
            self.initial.dim()
        );
        ensure!(
            self.energies.iter().all(|e| e.is_finite()),
            Validation,
            "component '{}': non-finite energy",
            self.label
        );
        if !is_hermitian(&self.dipole) {
            return Err(Error::Validation(format!("component '{}': dipole matrix is not Hermitian", self.label)));
        }
        match &self.initial {
            InitialState::Pure(v) => {
                let n = v.norm();
                ensure!(
                    (n - 1.0).abs() <= NORM_TOL,
                    Validation,
                    "component '{}': initial state norm {n} != 1",
                    self.label
                );
            }
            InitialState::Density(r) => {
                ensure!(r.ncols() == d, Config, "component '{}': density matrix is not square", self.label);
                ensure!(is_hermitian(r), Validation, "component '{}': density matrix is not Hermitian", self.label);
                let tr = r.trace();
                ensure!(
                    (tr.re - 1.0).abs() <= NORM_TOL && tr.im.abs() <= NORM_TOL,
                    Validation,
                    "component '{}': density matrix trace {tr} != 1",
                    self.label
                );
                let min_eig = r.clone().symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
                ensure!(
                    min_eig >= -1e-12,
                    Validation,
                    "component '{}': density matrix has negative eigenvalue {min_eig}",
                    self.label
                );
            }
        }
        ensure!(!self.excited_indices.is_empty(), Validation, "component '{}': excited_indices is empty", self.label);
        if let Some(bad) = self.excited_indices.iter().find(|i| **i >= d) {
            return Err(Error::Validation(format!(
                "component '{}': excited index {bad} out of range 0..{d}",
                self.label
            )));
        }
        ensure!(
            self.weight.is_finite() && self.weight >= 0.0,
            Validation,
            "component '{}': weight must be finite and >= 0",
            self.label
        );
        Ok(())
    }

    /// Excited indices that also carry initial population. Overlap is legal
    /// (a full-space projector is a valid observable) but usually a config slip.
    pub fn initial_support_overlap(&self) -> Vec<usize> {
        let support = self.initial.support();
        self.excited_indices.iter().copied().filter(|i| support.contains(i)).collect()
    }

    /// Excited-space projector as a dense matrix.
    pub fn projector(&self) -> CMatrix {
        let d = self.dim();
        let mut p = CMatrix::zeros(d, d);
        for &i in &self.excited_indices {
            p[(i, i)] = Complex64::new(1.0, 0.0);
        }
        p
    }

    /// Step generator `H0 + c·μ·E`.
    pub fn generator(&self, field: f64) -> CMatrix {
        let mut h = &self.dipole * Complex64::new(self.coupling_scale() * field, 0.0);
        for (i, e) in self.energies.iter().enumerate() {
            h[(i, i)] += Complex64::new(*e, 0.0);
        }
        h
    }
}

pub(crate) fn is_hermitian(m: &CMatrix) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.norm().max(1.0);
    (m - m.adjoint()).norm() <= HERMITIAN_TOL * scale
}

/// Piecewise-constant field: sample `n` holds on `[n·dt, (n+1)·dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl ControlField {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        let f = Self { dt, samples };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(dt: f64, len: usize) -> Result<Self> {
        Self::new(dt, vec![0.0; len])
    }

    /// Samples `f` at step midpoints.
    pub fn from_fn(dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..len).map(|n| f((n as f64 + 0.5) * dt)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.dt.is_finite() && self.dt > 0.0, Validation, "field dt must be finite and > 0, got {}", self.dt);
        ensure!(!self.samples.is_empty(), Validation, "field has no samples");
        if let Some(n) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Validation(format!("field sample {n} is not finite")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pulse duration `len·dt`.
    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Time of grid point `n` (start of step `n`).
    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }

    /// Splits into `[0, n)` and `[n, len)`.
    pub fn split_at(&self, n: usize) -> (ControlField, ControlField) {
        let (a, b) = self.samples.split_at(n);
        (ControlField { dt: self.dt, samples: a.to_vec() }, ControlField { dt: self.dt, samples: b.to_vec() })
    }
}
