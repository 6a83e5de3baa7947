//! Scenario configuration: a single TOML document whose physical fields
//! carry their unit in the key name.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use selex_core::cavity::{sample_grid, CavityConfig, JitterMode, PztDrive, SynthesisOptions, TimeGrid};
use selex_core::control::{AscentConfig, Mixture};
use selex_core::kinetics::{IntegratorOptions, TransportRates, TransportState};
use selex_core::num_complex::Complex64;
use selex_core::quantum::{CMatrix, DipoleUnits, InitialState, QuantumComponent};
use selex_core::spectroscopy::{CrossSectionOptions, GasConditions, MolecularSpecies};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    /// Laser beam radius `R_L`.
    pub beam_radius_m: f64,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub cavity: CavityConfig,
    pub drive: PztDrive,
    pub grids: Grids,
    #[serde(default)]
    pub synthesis: SynthesisOptions,
    pub mixture: MixtureSpec,
    pub species: Vec<MolecularSpecies>,
    pub conditions: GasConditions,
    #[serde(default)]
    pub spectroscopy: CrossSectionOptions,
    #[serde(default)]
    pub ascent: AscentConfig,
    #[serde(default)]
    pub optimize: OptimizeSpec,
    pub rates: TransportRates,
    #[serde(default)]
    pub kinetics: KineticsSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub time_step_s: f64,
    pub time_horizon_s: f64,
    pub wavenumber_min_cm: f64,
    pub wavenumber_max_cm: f64,
    pub wavenumber_step_cm: f64,
}

impl Grids {
    pub fn time_grid(&self) -> selex_core::Result<TimeGrid> {
        TimeGrid::new(self.time_step_s, self.time_steps())
    }

    pub fn time_steps(&self) -> usize {
        (self.time_horizon_s / self.time_step_s).round().max(0.0) as usize
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = ((self.wavenumber_max_cm - self.wavenumber_min_cm) / self.wavenumber_step_cm).round() as usize;
        (0..=n).map(|i| self.wavenumber_min_cm + i as f64 * self.wavenumber_step_cm).collect()
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.time_step_s > 0.0 && self.time_horizon_s > 0.0) {
            v.push("grids.time_step_s and grids.time_horizon_s must be > 0".into());
        } else {
            let n = self.time_steps();
            if n == 0 || ((n as f64 * self.time_step_s - self.time_horizon_s) / self.time_horizon_s).abs() > 1e-9 {
                v.push(format!(
                    "grids.time_horizon_s = {:e} is not a whole number of time_step_s = {:e}",
                    self.time_horizon_s, self.time_step_s
                ));
            }
        }
        if !(self.wavenumber_step_cm > 0.0 && self.wavenumber_max_cm > self.wavenumber_min_cm) {
            v.push("grids needs wavenumber_step_cm > 0 and wavenumber_max_cm > wavenumber_min_cm".into());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    /// Label of the component to excite; must also name a species.
    pub target: String,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub label: String,
    /// Diagonal of the free Hamiltonian.
    pub energies_rad_s: Vec<f64>,
    /// Real part of the dipole matrix, one row per level.
    pub dipole: Vec<Vec<f64>>,
    #[serde(default)]
    pub dipole_imag: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dipole_units: DipoleUnits,
    #[serde(default)]
    pub initial_level: usize,
    pub excited_levels: Vec<usize>,
    /// Penalty weight `α_k` when not the target.
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl ComponentSpec {
    pub fn to_component(&self) -> selex_core::Result<QuantumComponent> {
        let d = self.energies_rad_s.len();
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !shape_ok(&self.dipole) || !self.dipole_imag.as_ref().is_none_or(shape_ok) {
            return Err(selex_core::Error::Config(format!("component '{}': dipole must be {d}x{d}", self.label)));
        }
        if self.initial_level >= d {
            return Err(selex_core::Error::Config(format!(
                "component '{}': initial_level {} out of range 0..{d}",
                self.label, self.initial_level
            )));
        }
        let dipole = CMatrix::from_fn(d, d, |i, j| {
            let im = self.dipole_imag.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.dipole[i][j], im)
        });
        let c = QuantumComponent {
            label: self.label.clone(),
            energies: self.energies_rad_s.clone(),
            dipole,
            initial: InitialState::basis(d, self.initial_level),
            excited_indices: self.excited_levels.clone(),
            weight: self.weight,
            units: self.dipole_units,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// Optimize the PZT drive parameters through the field synthesis.
    #[default]
    Drive,
    /// Optimize the field samples directly.
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialField {
    #[default]
    Synthesized,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSpec {
    pub control: Control,
    /// Starting field for `control = "field"`.
    pub initial_field: InitialField,
    pub random_amplitude_v_per_m: f64,
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        Self { control: Control::Drive, initial_field: InitialField::Synthesized, random_amplitude_v_per_m: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFractions {
    pub f_star: f64,
    pub f_epi: f64,
    pub f_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticsSpec {
    /// Defaults to the field time horizon.
    pub horizon_s: Option<f64>,
    /// Output step; defaults to the field time step.
    pub step_s: Option<f64>,
    pub integrator: IntegratorOptions,
    /// Starting fractions; all molecules start as ground-state monomers when absent.
    pub initial: Option<InitialFractions>,
}

impl ScenarioConfig {
    pub fn time_grid(&self) -> selex_core::Result<TimeGrid> {
        self.grids.time_grid()
    }

    /// Seed-dependent settings with `seed` applied.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.ascent.seed = seed;
        if let JitterMode::Sampled { .. } = self.synthesis.jitter {
            self.synthesis.jitter = JitterMode::Sampled { seed };
        }
        self
    }

    pub fn components(&self) -> selex_core::Result<Vec<QuantumComponent>> {
        self.mixture.components.iter().map(ComponentSpec::to_component).collect()
    }

    pub fn target_index(&self) -> Option<usize> {
        self.mixture.components.iter().position(|c| c.label == self.mixture.target)
    }

    pub fn mixture(&self) -> selex_core::Result<Mixture> {
        let target = self.target_index().ok_or_else(|| {
            selex_core::Error::Config(format!("target '{}' is not a mixture component", self.mixture.target))
        })?;
        Mixture::new(self.components()?, target)
    }

    /// Synthesis options with the absorber density taken from the gas conditions.
    pub fn absorbing_synthesis(&self) -> SynthesisOptions {
        SynthesisOptions { absorber_density_m3: self.conditions.absorber_density(), ..self.synthesis.clone() }
    }

    pub fn kinetics_horizon(&self) -> f64 {
        self.kinetics.horizon_s.unwrap_or(self.grids.time_horizon_s)
    }

    pub fn kinetics_step(&self) -> f64 {
        self.kinetics.step_s.unwrap_or(self.grids.time_step_s)
    }

    pub fn initial_fractions(&self) -> TransportState {
        match self.kinetics.initial {
            Some(f) => TransportState::from_excited(f.f_star, f.f_epi, f.f_d),
            None => TransportState::ground(),
        }
    }

    /// Soft issues that do not block a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.drive.check(self.cavity.rest_gap_m).unwrap_or_default();
        for c in self.components().unwrap_or_default() {
            let overlap = c.initial_support_overlap();
            if !overlap.is_empty() {
                w.push(format!(
                    "mixture: component '{}' starts with population in excited levels {overlap:?}",
                    c.label
                ));
            }
        }
        w
    }

    /// Every violated bound and unresolved cross-reference.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut push = |prefix: &str, msgs: Vec<String>| v.extend(msgs.into_iter().map(|m| format!("{prefix}{m}")));

        if !(self.beam_radius_m > 0.0 && self.beam_radius_m.is_finite()) {
            push("", vec![format!("beam_radius_m must be finite and > 0, got {}", self.beam_radius_m)]);
        }
        push("cavity: ", self.cavity.violations());
        if let Err(e) = self.drive.check(self.cavity.rest_gap_m) {
            push("drive: ", vec![e.to_string()]);
        }
        let grid_issues = self.grids.violations();
        let grids_ok = grid_issues.is_empty();
        push("", grid_issues);
        if let Err(e) = self.synthesis.validate() {
            push("synthesis: ", vec![e.to_string()]);
        }
        if self.synthesis.absorber_density_m3 != 0.0 {
            push("synthesis: ", vec!["absorber_density_m3 is derived from [conditions] and must not be set".into()]);
        }

        let mut labels = Vec::new();
        for c in &self.mixture.components {
            if labels.contains(&c.label) {
                push("mixture: ", vec![format!("duplicate component label '{}'", c.label)]);
            }
            labels.push(c.label.clone());
            if let Err(e) = c.to_component() {
                push("mixture: ", vec![e.to_string()]);
            }
        }
        if self.mixture.components.is_empty() {
            push("mixture: ", vec!["no components".into()]);
        }
        if self.target_index().is_none() {
            push("mixture: ", vec![format!("target '{}' is not a mixture component", self.mixture.target)]);
        }
        for (k, c) in self.mixture.components.iter().enumerate() {
            if Some(k) != self.target_index() && !(c.weight > 0.0) {
                push("mixture: ", vec![format!("penalty weight of '{}' must be > 0", c.label)]);
            }
        }

        if self.species.is_empty() {
            push("species: ", vec!["no species configured".into()]);
        }
        for s in &self.species {
            push("", s.violations());
        }
        if !self.species.iter().any(|s| s.label == self.mixture.target) {
            push("species: ", vec![format!("target '{}' has no species entry", self.mixture.target)]);
        }
        let total: f64 = self.species.iter().map(|s| s.abundance).sum();
        if !self.species.is_empty() && (total - 1.0).abs() > 1e-9 {
            push("species: ", vec![format!("abundances sum to {total}, expected 1")]);
        }
        push("conditions: ", self.conditions.violations());
        if let Err(e) = self.spectroscopy.validate() {
            push("spectroscopy: ", vec![e.to_string()]);
        }
        if let Err(e) = self.ascent.validate() {
            push("ascent: ", vec![e.to_string()]);
        }
        if !(self.optimize.random_amplitude_v_per_m >= 0.0) {
            push("optimize: ", vec!["random_amplitude_v_per_m must be >= 0".into()]);
        }
        push("rates: ", self.rates.violations());
        if let Some(f) = self.kinetics.initial {
            if let Err(e) = TransportState::from_excited(f.f_star, f.f_epi, f.f_d).validate() {
                push("kinetics.initial: ", vec![e.to_string()]);
            }
        }
        if !(self.kinetics_horizon() > 0.0 && self.kinetics_step() > 0.0) {
            push("kinetics: ", vec!["horizon_s and step_s must be > 0".into()]);
        }

        if grids_ok && self.cavity.violations().is_empty() && self.synthesis.validate().is_ok() {
            push("", self.grid_coverage());
        }
        v
    }

    /// Cross-checks the per-sample ω grids against the cavity guards and the
    /// wavenumber grid of the cross section.
    fn grid_coverage(&self) -> Vec<String> {
        let Ok(time_grid) = self.time_grid() else { return Vec::new() };
        let infos = match sample_grid(&self.cavity, &self.drive, time_grid, &self.synthesis) {
            Ok(i) => i,
            Err(e) => return vec![format!("grids: {e}")],
        };
        let lo = infos.iter().map(|i| i.omega_range().0).fold(f64::INFINITY, f64::min);
        let hi = infos.iter().map(|i| i.omega_range().1).fold(f64::NEG_INFINITY, f64::max);
        let to_cm = |w: f64| w / (2.0 * std::f64::consts::PI * selex_core::constants::HZ_PER_WAVENUMBER);
        let (k_lo, k_hi) = (to_cm(lo), to_cm(hi));
        let grid = self.grids.wavenumbers();
        let (g_lo, g_hi) = (grid[0], grid[grid.len() - 1]);
        if k_lo < g_lo || k_hi > g_hi {
            vec![format!(
                "grids: field ω grids span [{k_lo:.6e}, {k_hi:.6e}] cm⁻¹ but the wavenumber grid covers only [{g_lo:.6e}, {g_hi:.6e}] cm⁻¹"
            )]
        } else {
            Vec::new()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(v))
        }
    }
}

/// Parses and validates a configuration held in memory.
pub fn parse_config(text: &str, origin: &Path) -> CliResult<ScenarioConfig> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

/// Loaded configuration plus the SHA-256 of its source bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub hash: String,
}

pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = parse_config(&text, path)?;
    Ok(LoadedConfig { config, hash: hex::encode(Sha256::digest(text.as_bytes())) })
}
