//! Photo-absorption cross section of a multi-species gas: Boltzmann band
//! populations, rotational branch envelopes, collisional and Doppler widths
//! and Voigt line shapes, with intensity saturation.
//!
//! Line positions and widths are handled in wavenumbers [cm⁻¹]
//! (1 cm⁻¹ = 2.997 924 58 × 10¹⁰ Hz); species constants enter in SI.

mod cross_section;
mod lines;
mod voigt;

pub use cross_section::{cross_section, hot_bands, species_contribution, CrossSectionOptions};
pub use lines::{
    band_origin, branch_envelope, collisional_fwhm, doppler_fwhm, hot_band_shift, line_center, rotational_spacing,
    stretch_coefficient, vibrational_weight, Branch, CollisionalWidth, DopplerWidth,
};
pub use voigt::{faddeeva, voigt, voigt_quadrature};

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HZ_PER_WAVENUMBER};
use crate::error::{ensure, Error, Result};
use crate::numerics::interp_linear;

/// One fundamental vibrational mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibrationalMode {
    pub frequency_hz: f64,
    /// Degeneracy `d_β ∈ {1, 2, 3}`.
    pub degeneracy: u8,
    /// Dimensionless anharmonicity `x_α` (shift per quantum `2ν_α x_α`).
    #[serde(default)]
    pub anharmonicity: f64,
}

/// Integrated band intensity per branch (`I_IR`), supplied as constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchIntensity {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl BranchIntensity {
    pub fn get(&self, branch: Branch) -> f64 {
        match branch {
            Branch::P => self.p,
            Branch::Q => self.q,
            Branch::R => self.r,
        }
    }
}

/// Spectroscopic constants of one absorbing species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MolecularSpecies {
    pub label: String,
    /// Relative abundance `x_k`.
    pub abundance: f64,
    pub modes: Vec<VibrationalMode>,
    /// Quanta added per mode by the pumped transition (`v_m − v_n`).
    pub transition: Vec<u32>,
    /// Rotational constant `ν_B` (`B = hν_B`).
    pub rotational_constant_hz: f64,
    pub coriolis_xi: f64,
    /// R-branch high-frequency edge `ν_max`.
    pub nu_max_hz: f64,
    /// Explicit stretch coefficient `ξ_B`; approximated from `ν_max` when absent.
    #[serde(default)]
    pub stretch_xi_b: Option<f64>,
    pub molar_mass_kg_mol: f64,
    pub reduced_mass_qq_kg_mol: f64,
    pub reduced_mass_qg_kg_mol: f64,
    pub band_intensity: BranchIntensity,
    pub saturation_intensity_w_m2: f64,
}

impl MolecularSpecies {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let l = &self.label;
        if !(0.0..=1.0).contains(&self.abundance) {
            v.push(format!("species '{l}': abundance must lie in [0, 1]"));
        }
        if self.modes.is_empty() {
            v.push(format!("species '{l}': no vibrational modes"));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !(1..=3).contains(&m.degeneracy) {
                v.push(format!("species '{l}': mode {i} degeneracy must be 1, 2 or 3"));
            }
            if !(m.frequency_hz > 0.0) {
                v.push(format!("species '{l}': mode {i} frequency must be > 0"));
            }
            if !(m.anharmonicity >= 0.0) {
                v.push(format!("species '{l}': mode {i} anharmonicity must be >= 0"));
            }
        }
        if self.transition.len() != self.modes.len() {
            v.push(format!(
                "species '{l}': transition has {} entries for {} modes",
                self.transition.len(),
                self.modes.len()
            ));
        } else if self.transition.iter().all(|q| *q == 0) {
            v.push(format!("species '{l}': transition adds no quanta"));
        }
        if !(self.rotational_constant_hz > 0.0) {
            v.push(format!("species '{l}': rotational_constant_hz must be > 0"));
        }
        for (name, x) in [
            ("molar_mass_kg_mol", self.molar_mass_kg_mol),
            ("reduced_mass_qq_kg_mol", self.reduced_mass_qq_kg_mol),
            ("reduced_mass_qg_kg_mol", self.reduced_mass_qg_kg_mol),
            ("saturation_intensity_w_m2", self.saturation_intensity_w_m2),
        ] {
            if !(x > 0.0) {
                v.push(format!("species '{l}': {name} must be > 0"));
            }
        }
        let bi = self.band_intensity;
        if !(bi.p >= 0.0 && bi.q >= 0.0 && bi.r >= 0.0) {
            v.push(format!("species '{l}': band intensities must be >= 0"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v.join("; ")))
        }
    }
}

/// Ambient state of the gas flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConditions {
    pub pressure_pa: f64,
    pub temperature_k: f64,
    /// Molar fraction `μ` of the target gas in the carrier.
    pub molar_fraction: f64,
    pub collision_qq_m2: f64,
    pub collision_qg_m2: f64,
}

impl GasConditions {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.pressure_pa > 0.0) {
            v.push("pressure_pa must be > 0".into());
        }
        if !(self.temperature_k > 0.0) {
            v.push("temperature_k must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.molar_fraction) {
            v.push("molar_fraction must lie in [0, 1]".into());
        }
        if !(self.collision_qq_m2 >= 0.0 && self.collision_qg_m2 >= 0.0) {
            v.push("collision cross sections must be >= 0".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v.join("; ")))
        }
    }

    /// Total number density `P/(k_B T)` [m⁻³].
    pub fn number_density(&self) -> f64 {
        self.pressure_pa / (BOLTZMANN * self.temperature_k)
    }

    /// Absorber density `μP/(k_B T)` [m⁻³].
    pub fn absorber_density(&self) -> f64 {
        self.molar_fraction * self.number_density()
    }
}

/// Lorentz half-width and Gaussian standard deviation of one line [cm⁻¹].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineShapeWidths {
    pub gamma: f64,
    pub sigma0: f64,
}

/// `σ_A` [m²] tabulated on an increasing wavenumber grid [cm⁻¹].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpectrum {
    pub wavenumbers_cm: Vec<f64>,
    pub sigma_m2: Vec<f64>,
}

impl CrossSectionSpectrum {
    pub fn new(wavenumbers_cm: Vec<f64>, sigma_m2: Vec<f64>) -> Result<Self> {
        let s = Self { wavenumbers_cm, sigma_m2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.wavenumbers_cm.len() == self.sigma_m2.len() && !self.sigma_m2.is_empty(),
            Config,
            "cross-section table needs matching, non-empty columns"
        );
        ensure!(
            self.wavenumbers_cm.windows(2).all(|w| w[1] > w[0]),
            Config,
            "cross-section wavenumbers must be strictly increasing"
        );
        ensure!(
            self.sigma_m2.iter().all(|s| *s >= 0.0 && s.is_finite()),
            Validation,
            "cross-section values must be finite and >= 0"
        );
        Ok(())
    }

    pub fn at_wavenumber(&self, k: f64) -> Result<f64> {
        interp_linear(&self.wavenumbers_cm, &self.sigma_m2, k).ok_or_else(|| {
            Error::Config(format!(
                "wavenumber {k} cm⁻¹ outside σ_A grid [{}, {}]",
                self.wavenumbers_cm[0],
                self.wavenumbers_cm[self.wavenumbers_cm.len() - 1]
            ))
        })
    }

    /// `σ_A(ω)` with `ω` in rad/s.
    pub fn at_omega(&self, omega: f64) -> Result<f64> {
        self.at_wavenumber(omega / (2.0 * std::f64::consts::PI) / HZ_PER_WAVENUMBER)
    }
}
