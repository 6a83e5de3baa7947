use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lines::{
    branch_envelope, collisional_fwhm, doppler_fwhm, line_center, rotational_spacing, vibrational_weight, Branch,
};
use super::voigt::{check_widths, voigt_unchecked};
use super::{CrossSectionSpectrum, GasConditions, MolecularSpecies};
use crate::constants::{BOLTZMANN, PLANCK, SPEED_OF_LIGHT};
use crate::error::{ensure, Error, Result};

/// Truncation controls for the band and rotational sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossSectionOptions {
    /// Highest `J` summed before the sum is declared non-convergent.
    pub j_cap: u32,
    /// Stop once every envelope falls below this fraction of its running maximum.
    pub envelope_tolerance: f64,
    /// Highest total number of hot-band quanta.
    pub hot_band_quanta_cap: u32,
    /// Smallest Boltzmann factor of an included hot band.
    pub hot_band_min_weight: f64,
    /// Sum the P branch over all `J ≥ 0` instead of the single `J = 0` term.
    pub p_branch_all_j: bool,
}

impl Default for CrossSectionOptions {
    fn default() -> Self {
        Self {
            j_cap: 400,
            envelope_tolerance: 1e-8,
            hot_band_quanta_cap: 2,
            hot_band_min_weight: 1e-6,
            p_branch_all_j: false,
        }
    }
}

impl CrossSectionOptions {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.j_cap >= 1, Config, "j_cap must be >= 1");
        ensure!(
            self.envelope_tolerance > 0.0 && self.envelope_tolerance < 1.0,
            Config,
            "envelope_tolerance must lie in (0, 1)"
        );
        ensure!((0.0..1.0).contains(&self.hot_band_min_weight), Config, "hot_band_min_weight must lie in [0, 1)");
        Ok(())
    }
}

/// Hot bands (quanta per mode) with total quanta within the cap and
/// Boltzmann factor `Π exp(−v_β hν_β/k_BT)` at or above the threshold.
pub fn hot_bands(species: &MolecularSpecies, temperature_k: f64, options: &CrossSectionOptions) -> Vec<Vec<u32>> {
    let kt = BOLTZMANN * temperature_k;
    let energies: Vec<f64> = species.modes.iter().map(|m| PLANCK * m.frequency_hz / kt).collect();
    let mut out = Vec::new();
    let mut current = vec![0u32; energies.len()];
    fn walk(
        mode: usize,
        left: u32,
        exponent: f64,
        energies: &[f64],
        min_weight: f64,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if mode == energies.len() {
            if (-exponent).exp() >= min_weight {
                out.push(current.clone());
            }
            return;
        }
        for v in 0..=left {
            current[mode] = v;
            walk(mode + 1, left - v, exponent + v as f64 * energies[mode], energies, min_weight, current, out);
        }
        current[mode] = 0;
    }
    walk(0, options.hot_band_quanta_cap, 0.0, &energies, options.hot_band_min_weight, &mut current, &mut out);
    out
}

struct Line {
    center_cm: f64,
    amplitude: f64,
    sigma0: f64,
}

fn push_line(
    lines: &mut Vec<Line>,
    species: &MolecularSpecies,
    branch: Branch,
    j: u32,
    band: &[u32],
    temperature_k: f64,
    amplitude: f64,
) -> Result<()> {
    let nu = line_center(branch, j, band, species)?;
    ensure!(nu > 0.0, Domain, "species '{}': non-positive line center at J = {j}", species.label);
    lines.push(Line {
        center_cm: 1e-2 * nu / SPEED_OF_LIGHT,
        amplitude,
        sigma0: doppler_fwhm(species, nu, temperature_k).sigma0_cm,
    });
    Ok(())
}

fn species_lines(species: &MolecularSpecies, cond: &GasConditions, options: &CrossSectionOptions) -> Result<Vec<Line>> {
    let t = cond.temperature_k;
    let spacing = rotational_spacing(species, t);
    let bi = species.band_intensity;
    let mut lines = Vec::new();
    for band in hot_bands(species, t, options) {
        let fvib = vibrational_weight(species, &band, t)?;
        let scale = fvib * spacing;
        let p0 = bi.p * branch_envelope(Branch::P, 0, species, t)?;
        push_line(&mut lines, species, Branch::P, 0, &band, t, scale * p0)?;

        let mut running_max = p0.max(0.0);
        let mut converged = false;
        for j in 1..=options.j_cap {
            let mut branches = vec![Branch::Q, Branch::R];
            if options.p_branch_all_j {
                branches.push(Branch::P);
            }
            let mut step_max: f64 = 0.0;
            for b in branches {
                let g = branch_envelope(b, j, species, t)?;
                step_max = step_max.max(g);
                running_max = running_max.max(g);
                push_line(&mut lines, species, b, j, &band, t, scale * bi.get(b) * g)?;
            }
            if step_max < options.envelope_tolerance * running_max {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "species '{}': rotational sum not converged at J cap {}",
                species.label, options.j_cap
            )));
        }
    }
    Ok(lines)
}

fn saturation(species: &MolecularSpecies, intensity: f64) -> f64 {
    1.0 / (1.0 + intensity / species.saturation_intensity_w_m2).sqrt()
}

/// Additive contribution `(1+I/I_sat)^{−1/2} x_k Σ_h f_vib g^(k)` of one
/// species on the wavenumber grid [cm⁻¹].
pub fn species_contribution(
    species: &MolecularSpecies,
    cond: &GasConditions,
    wavenumbers_cm: &[f64],
    intensity: f64,
    options: &CrossSectionOptions,
) -> Result<Vec<f64>> {
    species.validate()?;
    cond.validate()?;
    options.validate()?;
    ensure!(intensity >= 0.0, Validation, "intensity must be >= 0, got {intensity}");
    ensure!(wavenumbers_cm.iter().all(|k| k.is_finite()), Config, "wavenumber grid must be finite");
    let gamma = collisional_fwhm(species, cond).gamma_cm;
    let lines = species_lines(species, cond, options)?;
    for l in &lines {
        check_widths(gamma, l.sigma0)?;
    }
    let prefactor = saturation(species, intensity) * species.abundance;
    let out: Vec<f64> = wavenumbers_cm
        .par_iter()
        .map(|&k| {
            prefactor
                * lines.iter().map(|l| l.amplitude * voigt_unchecked(k - l.center_cm, gamma, l.sigma0)).sum::<f64>()
        })
        .collect();
    ensure!(out.iter().all(|v| v.is_finite()), Numeric, "species '{}': non-finite cross section", species.label);
    Ok(out)
}

/// Photo-absorption cross section `σ_A` [m²] of a gas mixture on the given
/// wavenumber grid [cm⁻¹], saturated by `intensity` [W/m²].
pub fn cross_section(
    species: &[MolecularSpecies],
    cond: &GasConditions,
    wavenumbers_cm: &[f64],
    intensity: f64,
    options: &CrossSectionOptions,
) -> Result<CrossSectionSpectrum> {
    ensure!(!species.is_empty(), Config, "no species configured");
    let total: f64 = species.iter().map(|s| s.abundance).sum();
    ensure!((total - 1.0).abs() <= 1e-9, Validation, "species abundances sum to {total}, expected 1");
    let mut sigma = vec![0.0; wavenumbers_cm.len()];
    for s in species {
        let part = species_contribution(s, cond, wavenumbers_cm, intensity, options)?;
        sigma.iter_mut().zip(part).for_each(|(a, b)| *a += b);
    }
    CrossSectionSpectrum::new(wavenumbers_cm.to_vec(), sigma)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{conditions, heavy_species};
    use super::super::voigt;
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Vec<f64> {
        (0..200).map(|i| 940.0 + 0.1 * i as f64).collect()
    }

    #[test]
    fn hot_band_enumeration() {
        let s = heavy_species();
        let bands = hot_bands(&s, 300.0, &CrossSectionOptions::default());
        assert_eq!(bands.len(), 6);
        assert!(bands.contains(&vec![0, 0]));
        assert!(bands.iter().all(|b| b.iter().sum::<u32>() <= 2));
        let cold = hot_bands(&s, 30.0, &CrossSectionOptions::default());
        assert_eq!(cold, vec![vec![0, 0]]);
    }

    #[test]
    fn non_negative_and_peaked_near_origin() {
        let s = heavy_species();
        let sp = cross_section(&[s], &conditions(), &grid(), 0.0, &CrossSectionOptions::default()).unwrap();
        assert!(sp.sigma_m2.iter().all(|v| *v >= 0.0));
        assert!(sp.sigma_m2.iter().any(|v| *v > 0.0));
    }

    #[test]
    fn strong_saturation_limit() {
        let s = heavy_species();
        let g = grid();
        let opts = CrossSectionOptions::default();
        let base = cross_section(std::slice::from_ref(&s), &conditions(), &g, 0.0, &opts).unwrap();
        let i = 1e8 * s.saturation_intensity_w_m2;
        let sat = cross_section(std::slice::from_ref(&s), &conditions(), &g, i, &opts).unwrap();
        let expected = (s.saturation_intensity_w_m2 / i).sqrt();
        for (a, b) in base.sigma_m2.iter().zip(&sat.sigma_m2) {
            if *a > 0.0 {
                assert_relative_eq!(b / a, expected, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn single_cold_band_reduces_to_printed_terms() {
        let mut s = heavy_species();
        s.modes.truncate(1);
        s.transition.truncate(1);
        let cond = conditions();
        let opts = CrossSectionOptions { j_cap: 400, ..Default::default() };
        let t = 20.0;
        let cold = GasConditions { temperature_k: t, ..cond };
        assert_eq!(hot_bands(&s, t, &opts), vec![vec![0]]);
        let k = 947.9;
        let got = cross_section(std::slice::from_ref(&s), &cold, &[k], 0.0, &opts).unwrap().sigma_m2[0];

        let gamma = collisional_fwhm(&s, &cold).gamma_cm;
        let line = |b: Branch, j: u32| {
            let nu = line_center(b, j, &[0], &s).unwrap();
            let sig = doppler_fwhm(&s, nu, t).sigma0_cm;
            voigt(k - 1e-2 * nu / SPEED_OF_LIGHT, gamma, sig).unwrap()
                * branch_envelope(b, j, &s, t).unwrap()
                * s.band_intensity.get(b)
        };
        let mut sum = line(Branch::P, 0);
        for j in 1..=400 {
            sum += line(Branch::Q, j) + line(Branch::R, j);
        }
        let expected = vibrational_weight(&s, &[0], t).unwrap() * rotational_spacing(&s, t) * sum;
        assert_relative_eq!(got, expected, max_relative = 1e-7);
    }

    #[test]
    fn doubling_cap_is_converged() {
        let s = heavy_species();
        let g = grid();
        let a =
            cross_section(std::slice::from_ref(&s), &conditions(), &g, 0.0, &CrossSectionOptions::default()).unwrap();
        let opts = CrossSectionOptions { j_cap: 800, ..Default::default() };
        let b = cross_section(&[s], &conditions(), &g, 0.0, &opts).unwrap();
        for (x, y) in a.sigma_m2.iter().zip(&b.sigma_m2) {
            assert!((x - y).abs() <= 1e-6 * y.abs());
        }
    }

    #[test]
    fn cap_too_small_names_cap() {
        let s = heavy_species();
        let opts = CrossSectionOptions { j_cap: 5, ..Default::default() };
        let err = cross_section(&[s], &conditions(), &grid(), 0.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Numeric(ref m) if m.contains("cap 5")), "{err}");
    }

    #[test]
    fn abundances_must_sum_to_one() {
        let mut s = heavy_species();
        s.abundance = 0.5;
        let err = cross_section(&[s], &conditions(), &grid(), 0.0, &CrossSectionOptions::default());
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn mixture_is_sum_of_contributions() {
        let mut a = heavy_species();
        a.abundance = 0.3;
        let mut b = heavy_species();
        b.label = "light".into();
        b.abundance = 0.7;
        b.modes[0].frequency_hz = 2.845e13;
        b.molar_mass_kg_mol = 0.145;
        let g = grid();
        let opts = CrossSectionOptions::default();
        let cond = conditions();
        let mix = cross_section(&[a.clone(), b.clone()], &cond, &g, 5.0, &opts).unwrap();
        let pa = species_contribution(&a, &cond, &g, 5.0, &opts).unwrap();
        let pb = species_contribution(&b, &cond, &g, 5.0, &opts).unwrap();
        for i in 0..g.len() {
            assert_relative_eq!(mix.sigma_m2[i], pa[i] + pb[i], max_relative = 1e-14);
        }
    }
}
