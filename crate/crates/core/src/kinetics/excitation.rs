use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KaSeries;
use crate::cavity::{build_sample_spectrum, Absorber, BracketSum, CavityConfig, SynthesizedField};
use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{ensure, Result};

/// Laser excitation rate `k_A(t)` on the synthesis time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationRate {
    pub times: Vec<f64>,
    /// Real part, clamped at zero [1/s].
    pub rate: Vec<f64>,
    /// Largest `|Im k_A|` relative to the largest `|k_A|` on the grid.
    pub max_imaginary_ratio: f64,
    /// Samples whose real part was negative before clamping.
    pub clamped_samples: usize,
}

impl ExcitationRate {
    pub fn to_series(&self) -> Result<KaSeries> {
        KaSeries::new(self.times.clone(), self.rate.clone())
    }
}

/// `k_A(t) = (1/πR_L²)·F⁻¹[σ_A/(ℏω)·(cε₀n/2)E₀²⟨ℵ ℸ*⟩_x]`, evaluated with the
/// same ω grids, flow nodes and frozen delays that produced `field`.
///
/// `sigma` is the absorbing species' cross section; attenuation inside the
/// cell stays that of the absorber used for the synthesis. A tabulated
/// `sigma` must cover every ω grid of the field.
pub fn excitation_rate(
    cavity: &CavityConfig,
    field: &SynthesizedField,
    sigma: &Absorber,
    beam_radius_m: f64,
) -> Result<ExcitationRate> {
    sigma.validate()?;
    ensure!(
        beam_radius_m > 0.0 && beam_radius_m.is_finite(),
        Validation,
        "beam radius must be finite and > 0, got {beam_radius_m}"
    );
    let e0 = cavity.field_amplitude_v_per_m;
    let scale = 0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * cavity.refraction_index * e0 * e0
        / (std::f64::consts::PI * beam_radius_m * beam_radius_m);

    let raw: Vec<Complex64> = field
        .info
        .par_iter()
        .zip(&field.aleph)
        .map(|(info, row)| {
            let spec = build_sample_spectrum(cavity, info, &field.absorber, &field.options, &field.delays)?;
            let weights: Vec<f64> =
                spec.omegas.iter().map(|w| Ok(sigma.at_omega(*w)? / (HBAR * w))).collect::<Result<_>>()?;
            let weighted = spec
                .omegas
                .iter()
                .zip(&spec.base)
                .zip(&weights)
                .map(|((w, b), s)| b * Complex64::from_polar(*s, w * info.time));
            let daleth = BracketSum::new(cavity, &spec.omegas, &spec.attenuation, weighted);
            let total: Complex64 = field
                .flow_nodes
                .iter()
                .zip(&field.flow_weights)
                .zip(row)
                .map(|((x, w), aleph)| aleph * daleth.at(*x).conj() * *w)
                .sum();
            Ok(total * scale)
        })
        .collect::<Result<_>>()?;

    let peak = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imaginary_ratio = if peak > 0.0 { raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / peak } else { 0.0 };
    ensure!(raw.iter().all(|z| z.re.is_finite() && z.im.is_finite()), Numeric, "excitation rate is not finite");
    let clamped_samples = raw.iter().filter(|z| z.re < 0.0).count();
    Ok(ExcitationRate {
        times: field.times(),
        rate: raw.iter().map(|z| z.re.max(0.0)).collect(),
        max_imaginary_ratio,
        clamped_samples,
    })
}
