use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optics::BracketSum;
use super::optics::{gaussian_envelope, geometric_prefactor, pulse_bandwidth, pulse_count, train_factor, wavelength};
use super::{jitter_sequence, Absorber, CavityConfig, PztDrive};
use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{ensure, Error, Result};
use crate::numerics::gauss_legendre;
use crate::quantum::ControlField;

/// Uniform grid whose samples sit at step midpoints `t_n = (n + ½)·dt`,
/// matching the piecewise-constant [`ControlField`] convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, len: usize) -> Result<Self> {
        ensure!(dt > 0.0 && dt.is_finite(), Validation, "time grid dt must be > 0");
        ensure!(len >= 1, Validation, "time grid needs at least one sample");
        Ok(Self { dt, len })
    }

    pub fn time(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|n| self.time(n)).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.len as f64
    }
}

/// How pulse-to-pulse build-up delays enter the train sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JitterMode {
    /// Every pulse delayed by the mean `τ_j`; closed-form train factor.
    Mean,
    /// Per-pulse delays drawn once from the seeded jitter distribution and
    /// summed directly.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisOptions {
    /// Half-width of the ω grid in units of `Δω_p`.
    pub half_width_factor: f64,
    /// Minimum number of ω points per `Δω_p`.
    pub points_per_bandwidth: f64,
    /// Factor by which the ω-grid alias period exceeds the train extent.
    pub alias_oversample: f64,
    /// Fixed ω step [rad/s]; derived per sample when absent.
    pub omega_step: Option<f64>,
    /// Gauss–Legendre nodes across the gas flow.
    pub flow_nodes: usize,
    /// Number density `n_g = μP/(k_B T)` of the absorbing species [m⁻³].
    pub absorber_density_m3: f64,
    pub jitter: JitterMode,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            half_width_factor: 8.0,
            points_per_bandwidth: 16.0,
            alias_oversample: 2.0,
            omega_step: None,
            flow_nodes: 16,
            absorber_density_m3: 0.0,
            jitter: JitterMode::Mean,
        }
    }
}

impl SynthesisOptions {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.half_width_factor >= 1.0, Validation, "half_width_factor must be >= 1");
        ensure!(self.points_per_bandwidth >= 1.0, Validation, "points_per_bandwidth must be >= 1");
        ensure!(self.alias_oversample >= 1.0, Validation, "alias_oversample must be >= 1");
        ensure!(self.flow_nodes >= 1, Validation, "flow_nodes must be >= 1");
        ensure!(
            self.absorber_density_m3 >= 0.0 && self.absorber_density_m3.is_finite(),
            Validation,
            "absorber_density_m3 must be finite and >= 0"
        );
        if let Some(s) = self.omega_step {
            ensure!(s > 0.0, Validation, "omega_step must be > 0");
        }
        Ok(())
    }
}

/// Per-sample quantities fixed by the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub time: f64,
    pub wavelength: f64,
    pub omega_center: f64,
    pub bandwidth: f64,
    pub n_pulses: u64,
    pub omega_step: f64,
    pub n_omega: usize,
}

impl SampleInfo {
    pub fn omega(&self, k: usize) -> f64 {
        let half = (self.n_omega / 2) as f64;
        self.omega_center + (k as f64 - half) * self.omega_step
    }

    /// Lowest and highest ω on the sample's grid.
    pub fn omega_range(&self) -> (f64, f64) {
        (self.omega(0), self.omega(self.n_omega - 1))
    }
}

/// Width-averaged field and intensity on a time grid.
#[derive(Debug, Clone)]
pub struct SynthesizedField {
    pub time_grid: TimeGrid,
    /// `E₀·Re⟨ℵ⟩_x` [V/m].
    pub width_averaged_field: Vec<f64>,
    /// `Ī(t) = (cε₀n/2)·E₀²·⟨|ℵ|²⟩_x` [W/m²].
    pub width_averaged_intensity: Vec<f64>,
    pub info: Vec<SampleInfo>,
    pub flow_nodes: Vec<f64>,
    /// Quadrature weights normalised to sum to one.
    pub flow_weights: Vec<f64>,
    /// `ℵ(x_i, t_n)` indexed `[n][i]`.
    pub aleph: Vec<Vec<Complex64>>,
    /// Frozen per-pulse delays (empty in [`JitterMode::Mean`]).
    pub delays: Vec<f64>,
    pub options: SynthesisOptions,
    pub absorber: Absorber,
}

impl SynthesizedField {
    pub fn times(&self) -> Vec<f64> {
        self.time_grid.times()
    }

    pub fn to_control_field(&self) -> Result<ControlField> {
        ControlField::new(self.time_grid.dt, self.width_averaged_field.clone())
    }

    /// Intensity at the last sample, used as the saturation argument `I(τ_p)`.
    pub fn final_intensity(&self) -> f64 {
        *self.width_averaged_intensity.last().expect("non-empty grid")
    }
}

/// x-independent part of the integrand of one time sample.
pub(crate) struct SampleSpectrum {
    pub omegas: Vec<f64>,
    /// `ℶ·ℱ·i𝒯·geom·e^{−iωτ}` times the quadrature weight `dω/2π`.
    pub base: Vec<Complex64>,
    /// `σ_A(ω)·n_g` [1/m].
    pub attenuation: Vec<f64>,
}

fn field_sigma(bandwidth: f64) -> f64 {
    (8.0 * LN_2).sqrt() / bandwidth
}

pub(crate) fn build_sample_spectrum(
    cavity: &CavityConfig,
    info: &SampleInfo,
    absorber: &Absorber,
    options: &SynthesisOptions,
    delays: &[f64],
) -> Result<SampleSpectrum> {
    let n = info.n_omega;
    let mut omegas = Vec::with_capacity(n);
    let mut base = Vec::with_capacity(n);
    let mut attenuation = Vec::with_capacity(n);
    let weight = info.omega_step / (2.0 * PI);
    for k in 0..n {
        let w = info.omega(k);
        let s = absorber.at_omega(w)?;
        let att = s * options.absorber_density_m3;
        let lambda = 2.0 * PI * SPEED_OF_LIGHT / w;
        let rho_w = cavity.window_reflectivity_power.at(lambda)?.sqrt();
        let train = match options.jitter {
            JitterMode::Mean => {
                train_factor(w, info.n_pulses, cavity.pulse_period_s)
                    * Complex64::from_polar(1.0, -w * cavity.jitter_mean_s)
            }
            JitterMode::Sampled { .. } => (0..=info.n_pulses as usize)
                .map(|j| Complex64::from_polar(1.0, -w * (j as f64 * cavity.pulse_period_s + delays[j])))
                .sum(),
        };
        let env = gaussian_envelope(w, info.omega_center, info.bandwidth);
        let pref = geometric_prefactor(cavity, info.time, att, rho_w);
        omegas.push(w);
        base.push(train * env * pref * weight);
        attenuation.push(att);
    }
    Ok(SampleSpectrum { omegas, base, attenuation })
}

/// `ℵ(x, t) = F⁻¹[ℶ·ℱ·Q·e^{−iωτ}](t)` as a function of the flow position.
pub(crate) fn aleph_kernel(cavity: &CavityConfig, spectrum: &SampleSpectrum, t: f64) -> BracketSum {
    let phased = spectrum.omegas.iter().zip(&spectrum.base).map(|(w, b)| b * Complex64::from_polar(1.0, w * t));
    BracketSum::new(cavity, &spectrum.omegas, &spectrum.attenuation, phased)
}

fn sample_info(cavity: &CavityConfig, drive: &PztDrive, t: f64, options: &SynthesisOptions) -> Result<SampleInfo> {
    let lambda = wavelength(drive, cavity, t);
    let omega_center = 2.0 * PI * SPEED_OF_LIGHT / lambda;
    let bandwidth = pulse_bandwidth(drive, cavity, t)?;
    if bandwidth <= 0.0 {
        return Err(Error::Domain(format!("pulse bandwidth is zero at t = {t:e} s (lasing threshold)")));
    }
    let n_pulses = pulse_count(t, cavity.pulse_period_s).max(1);
    let train_extent = n_pulses as f64 * cavity.pulse_period_s;
    let spread = cavity.jitter_mean_s.abs()
        + match options.jitter {
            JitterMode::Mean => 0.0,
            JitterMode::Sampled { .. } => 6.0 * cavity.jitter_std_s,
        };
    let extent = train_extent + spread + 12.0 * field_sigma(bandwidth);
    let alias_step = 2.0 * PI / (options.alias_oversample * extent);
    let resolution_step = bandwidth / options.points_per_bandwidth;
    let comb_guard = 2.0 * PI / train_extent;
    let omega_step = match options.omega_step {
        Some(step) => {
            ensure!(
                step < comb_guard,
                Config,
                "ω-grid spacing {step:e} rad/s violates the comb guard dω < 2π/(N_p·T_p) = {comb_guard:e} at t = {t:e} s"
            );
            ensure!(
                step <= bandwidth,
                Config,
                "ω-grid spacing {step:e} rad/s does not resolve the pulse bandwidth {bandwidth:e} rad/s at t = {t:e} s"
            );
            step
        }
        None => alias_step.min(resolution_step),
    };
    let half_points = (options.half_width_factor * bandwidth / omega_step).ceil() as usize;
    Ok(SampleInfo {
        time: t,
        wavelength: lambda,
        omega_center,
        bandwidth,
        n_pulses,
        omega_step,
        n_omega: 2 * half_points + 1,
    })
}

/// Carrier, bandwidth and ω grid of every time sample, without the field.
pub fn sample_grid(
    cavity: &CavityConfig,
    drive: &PztDrive,
    time_grid: TimeGrid,
    options: &SynthesisOptions,
) -> Result<Vec<SampleInfo>> {
    options.validate()?;
    (0..time_grid.len).map(|n| sample_info(cavity, drive, time_grid.time(n), options)).collect()
}

/// Width-averaged intracavity field and intensity driven by the PZT.
pub fn synthesize_field(
    cavity: &CavityConfig,
    drive: &PztDrive,
    time_grid: TimeGrid,
    absorber: &Absorber,
    options: &SynthesisOptions,
) -> Result<SynthesizedField> {
    cavity.validate()?;
    drive.check(cavity.rest_gap_m)?;
    absorber.validate()?;
    options.validate()?;
    TimeGrid::new(time_grid.dt, time_grid.len)?;

    let infos = sample_grid(cavity, drive, time_grid, options)?;

    let delays = match options.jitter {
        JitterMode::Mean => Vec::new(),
        JitterMode::Sampled { seed } => {
            let max_pulses = infos.iter().map(|i| i.n_pulses).max().unwrap_or(0) as usize;
            jitter_sequence(cavity, seed, max_pulses + 1)?
        }
    };

    let lo = cavity.flow_offset_m;
    let (nodes, mut weights) = gauss_legendre(options.flow_nodes, lo, lo + cavity.flow_width_m);
    weights.iter_mut().for_each(|w| *w /= cavity.flow_width_m);

    let aleph: Vec<Vec<Complex64>> = infos
        .par_iter()
        .map(|info| {
            let spec = build_sample_spectrum(cavity, info, absorber, options, &delays)?;
            let kernel = aleph_kernel(cavity, &spec, info.time);
            Ok(nodes.iter().map(|x| kernel.at(*x)).collect())
        })
        .collect::<Result<_>>()?;

    let e0 = cavity.field_amplitude_v_per_m;
    let intensity_scale = 0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * cavity.refraction_index * e0 * e0;
    let mut field = Vec::with_capacity(time_grid.len);
    let mut intensity = Vec::with_capacity(time_grid.len);
    for row in &aleph {
        let mean: Complex64 = row.iter().zip(&weights).map(|(a, w)| a * *w).sum();
        let power: f64 = row.iter().zip(&weights).map(|(a, w)| a.norm_sqr() * w).sum();
        field.push(e0 * mean.re);
        intensity.push(intensity_scale * power);
    }
    if field.iter().chain(&intensity).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("synthesized field is not finite".into()));
    }

    Ok(SynthesizedField {
        time_grid,
        width_averaged_field: field,
        width_averaged_intensity: intensity,
        info: infos,
        flow_nodes: nodes,
        flow_weights: weights,
        aleph,
        delays,
        options: options.clone(),
        absorber: absorber.clone(),
    })
}
