use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GasConditions, MolecularSpecies};
use crate::constants::{BOLTZMANN, GAS_CONSTANT, PLANCK, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Rotational branch: `ΔJ = −1` (P), `0` (Q), `+1` (R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    P,
    Q,
    R,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::P, Branch::Q, Branch::R];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionalWidth {
    pub delta_nu_hz: f64,
    /// FWHM `Δλ̃_c` [cm⁻¹].
    pub fwhm_cm: f64,
    /// Lorentz half-width `γ = Δλ̃_c/2` [cm⁻¹].
    pub gamma_cm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerWidth {
    pub delta_nu_hz: f64,
    pub fwhm_cm: f64,
    /// Gaussian standard deviation `σ₀ = Δλ̃_D/√(8 ln 2)` [cm⁻¹].
    pub sigma0_cm: f64,
}

fn hz_to_cm(nu: f64) -> f64 {
    1e-2 * nu / SPEED_OF_LIGHT
}

pub fn collisional_fwhm(species: &MolecularSpecies, cond: &GasConditions) -> CollisionalWidth {
    let rt = GAS_CONSTANT * cond.temperature_k;
    let speed = |m: f64| (8.0 * rt / (PI * m)).sqrt();
    let mu = cond.molar_fraction;
    let delta_nu_hz = 2.0
        * cond.number_density()
        * (cond.collision_qg_m2 * (1.0 - mu) * speed(species.reduced_mass_qg_kg_mol)
            + cond.collision_qq_m2 * mu * speed(species.reduced_mass_qq_kg_mol));
    let fwhm_cm = hz_to_cm(delta_nu_hz);
    CollisionalWidth { delta_nu_hz, fwhm_cm, gamma_cm: 0.5 * fwhm_cm }
}

pub fn doppler_fwhm(species: &MolecularSpecies, line_center_hz: f64, temperature_k: f64) -> DopplerWidth {
    let ln2x8 = 8.0 * 2f64.ln();
    let delta_nu_hz =
        line_center_hz / SPEED_OF_LIGHT * (ln2x8 * GAS_CONSTANT * temperature_k / species.molar_mass_kg_mol).sqrt();
    let fwhm_cm = hz_to_cm(delta_nu_hz);
    DopplerWidth { delta_nu_hz, fwhm_cm, sigma0_cm: fwhm_cm / ln2x8.sqrt() }
}

fn degeneracy_weight(degeneracy: u8, v: u32) -> f64 {
    let v = v as f64;
    match degeneracy {
        1 => 1.0,
        2 => v + 1.0,
        _ => 0.5 * (v + 1.0) * (v + 2.0),
    }
}

/// Boltzmann population factor `f_vib` of hot band `hot_band` for the
/// species' pumped transition.
pub fn vibrational_weight(species: &MolecularSpecies, hot_band: &[u32], temperature_k: f64) -> Result<f64> {
    if hot_band.len() != species.modes.len() {
        return Err(Error::Validation(format!(
            "hot band has {} quanta for {} modes",
            hot_band.len(),
            species.modes.len()
        )));
    }
    let kt = BOLTZMANN * temperature_k;
    let mut weight = 1.0;
    for ((mode, &vh), &dv) in species.modes.iter().zip(hot_band).zip(&species.transition) {
        let x = PLANCK * mode.frequency_hz / kt;
        let ratio = degeneracy_weight(mode.degeneracy, vh + dv) / degeneracy_weight(mode.degeneracy, vh);
        let boltzmann = if vh == 0 { 1.0 } else { (-(vh as f64) * x).exp() };
        weight *= ratio * boltzmann * -(-x).exp_m1();
    }
    Ok(weight)
}

/// Pumped band origin `ν_mn = Σ_β (v_βm − v_βn) ν_β` [Hz].
pub fn band_origin(species: &MolecularSpecies) -> f64 {
    species.modes.iter().zip(&species.transition).map(|(m, &dv)| dv as f64 * m.frequency_hz).sum()
}

/// Vibrational stretch coefficient `ξ_B`, supplied or approximated as
/// `ν_B(1−ξ)²/(ν_max − ν_mn)`.
pub fn stretch_coefficient(species: &MolecularSpecies) -> Result<f64> {
    if let Some(xi_b) = species.stretch_xi_b {
        return Ok(xi_b);
    }
    let gap = species.nu_max_hz - band_origin(species);
    if !(gap > 0.0) {
        return Err(Error::Domain(format!(
            "species '{}': R-branch edge ν_max must exceed the band origin to estimate ξ_B",
            species.label
        )));
    }
    Ok(species.rotational_constant_hz / gap * (1.0 - species.coriolis_xi).powi(2))
}

/// Rotational line spacing `Δλ̃_mn = 2(1−ξ)√(B k_B T)/(hc)` [cm⁻¹].
pub fn rotational_spacing(species: &MolecularSpecies, temperature_k: f64) -> f64 {
    let b = PLANCK * species.rotational_constant_hz;
    let per_m = 2.0 * (1.0 - species.coriolis_xi) * (b * BOLTZMANN * temperature_k).sqrt() / (PLANCK * SPEED_OF_LIGHT);
    1e-2 * per_m
}

/// Rotational population envelope `g_v^a(J)` [1/J].
pub fn branch_envelope(branch: Branch, j: u32, species: &MolecularSpecies, temperature_k: f64) -> Result<f64> {
    let kt = BOLTZMANN * temperature_k;
    let b = PLANCK * species.rotational_constant_hz;
    let xi = species.coriolis_xi;
    let jf = j as f64;
    let common = (b / (PI * kt)).sqrt() / (6.0 * kt);
    match branch {
        Branch::P | Branch::R => {
            if xi == 1.0 {
                return Err(Error::Domain("Coriolis constant ξ = 1 makes the P/R envelope singular".into()));
            }
            let (lead, energy) = if branch == Branch::P {
                ((2.0 * jf + 3.0).powi(2), (jf + 1.0) * (jf + 2.0 * xi))
            } else {
                ((2.0 * jf - 1.0).powi(2), (jf + 1.0 - 2.0 * xi) * jf)
            };
            Ok(lead * common / (1.0 - xi) * (-b * energy / kt).exp())
        }
        Branch::Q => {
            let xi_b = stretch_coefficient(species)?;
            if xi_b == 0.0 {
                return Err(Error::Domain("stretch coefficient ξ_B = 0 makes the Q envelope singular".into()));
            }
            let lead = (2.0 * jf + 1.0).powi(2);
            Ok(lead * common / (xi_b * (jf + 1.0)) * (-b * (jf + 1.0) * jf / kt).exp())
        }
    }
}

/// Anharmonic hot-band shift `Δ_h` [Hz].
pub fn hot_band_shift(species: &MolecularSpecies, hot_band: &[u32]) -> f64 {
    let mut shift = 0.0;
    for (ma, &dva) in species.modes.iter().zip(&species.transition) {
        if dva == 0 {
            continue;
        }
        for (mb, &vbh) in species.modes.iter().zip(hot_band) {
            if vbh == 0 {
                continue;
            }
            let root = (ma.frequency_hz * mb.frequency_hz * ma.anharmonicity * mb.anharmonicity).sqrt();
            shift += root * dva as f64 * vbh as f64;
        }
    }
    2.0 * shift
}

/// Line center `ν_{mn;h}^a(J)` [Hz].
pub fn line_center(branch: Branch, j: u32, hot_band: &[u32], species: &MolecularSpecies) -> Result<f64> {
    let origin = band_origin(species) - hot_band_shift(species, hot_band);
    let nu_b = species.rotational_constant_hz;
    let xi = species.coriolis_xi;
    let jf = j as f64;
    let xi_b = stretch_coefficient(species)?;
    Ok(match branch {
        Branch::P => origin - nu_b * (2.0 * (1.0 - xi) * jf + xi_b * jf * jf),
        Branch::Q => origin - nu_b * xi_b * (jf * jf - jf),
        Branch::R => origin + nu_b * (2.0 * (1.0 - xi) * jf - xi_b * jf * jf),
    })
}
