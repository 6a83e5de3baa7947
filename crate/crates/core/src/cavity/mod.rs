//! Intracavity field model: PZT-tuned resonance, gain and bandwidth,
//! Gaussian pulse spectrum, pulse-train superposition and the multi-pass
//! amplification factor, assembled into a width-averaged field and
//! intensity on a time grid.

mod jitter;
mod optics;
mod synthesis;

pub use jitter::jitter_sequence;
#[cfg(test)]
pub(crate) use optics::gaussian_envelope;
pub(crate) use optics::BracketSum;
pub use optics::{
    amplification, bandwidth_from_loop_gain, envelope_spectrum, gain_lineshape, pulse_bandwidth, pulse_count,
    single_pass_gain, train_factor, wavelength, FieldSpectrum,
};
pub(crate) use synthesis::build_sample_spectrum;
pub use synthesis::{
    sample_grid, synthesize_field, JitterMode, SampleInfo, SynthesisOptions, SynthesizedField, TimeGrid,
};

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{ensure, Error, Result};
use crate::numerics::interp_linear;
use crate::spectroscopy::CrossSectionSpectrum;

/// Window power reflectivity `R_W`, constant or tabulated against
/// wavelength and linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowReflectivity {
    Constant(f64),
    /// `(wavelength [m], R_W)` pairs sorted by wavelength.
    Table(Vec<(f64, f64)>),
}

impl WindowReflectivity {
    /// Parses a two-column whitespace- or comma-separated table
    /// (`λ [m]`, `R_W`). Blank lines and `#` comments are skipped.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Config(format!(
                    "reflectivity table line {}: expected 2 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Config(format!("reflectivity table line {}: {e}", lineno + 1)))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?));
        }
        let table = WindowReflectivity::Table(rows);
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WindowReflectivity::Constant(r) => {
                ensure!((0.0..=1.0).contains(r), Validation, "window_reflectivity_power must lie in [0, 1], got {r}");
            }
            WindowReflectivity::Table(rows) => {
                ensure!(!rows.is_empty(), Validation, "window reflectivity table is empty");
                ensure!(
                    rows.windows(2).all(|w| w[1].0 > w[0].0),
                    Validation,
                    "window reflectivity table wavelengths must be strictly increasing"
                );
                ensure!(
                    rows.iter().all(|(l, r)| *l > 0.0 && (0.0..=1.0).contains(r)),
                    Validation,
                    "window reflectivity table needs λ > 0 and R_W in [0, 1]"
                );
            }
        }
        Ok(())
    }

    /// `R_W(λ)`.
    pub fn at(&self, wavelength: f64) -> Result<f64> {
        match self {
            WindowReflectivity::Constant(r) => Ok(*r),
            WindowReflectivity::Table(rows) => {
                let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
                interp_linear(&xs, &ys, wavelength).ok_or_else(|| {
                    Error::Config(format!(
                        "wavelength {wavelength:e} m outside window reflectivity table [{:e}, {:e}]",
                        xs[0],
                        xs[xs.len() - 1]
                    ))
                })
            }
        }
    }
}

/// Resonator geometry, optics and laser constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    /// Number of half-wavelengths `N` on the optical path.
    pub mode_index: u32,
    pub refraction_index: f64,
    pub cell_width_m: f64,
    /// Rest gap `x₀` between PZT surface and the window.
    pub rest_gap_m: f64,
    /// Optional declared rest wavelength, checked against the resonance condition.
    #[serde(default)]
    pub rest_wavelength_m: Option<f64>,
    pub retro_reflectivity_power: f64,
    pub window_reflectivity_power: WindowReflectivity,
    pub strip_reflectivity_field: f64,
    pub window_transmission_field: f64,
    pub gain_length_m: f64,
    /// `γ₀(ν₀)`; the Lorentzian evaluates to `γ₀(ν₀)·2/Δν` on resonance.
    pub gain_peak_per_m: f64,
    pub gain_center_hz: f64,
    pub gain_fwhm_hz: f64,
    pub pulse_period_s: f64,
    pub jitter_mean_s: f64,
    pub jitter_std_s: f64,
    pub field_amplitude_v_per_m: f64,
    pub flow_offset_m: f64,
    pub flow_width_m: f64,
}

impl CavityConfig {
    /// Collects every violated bound instead of stopping at the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut unit = |name: &str, x: f64| {
            if !(0.0..=1.0).contains(&x) {
                v.push(format!("{name} must lie in [0, 1], got {x}"));
            }
        };
        unit("retro_reflectivity_power", self.retro_reflectivity_power);
        unit("strip_reflectivity_field", self.strip_reflectivity_field);
        unit("window_transmission_field", self.window_transmission_field);
        if let Err(e) = self.window_reflectivity_power.validate() {
            v.push(e.to_string());
        }
        if self.mode_index < 1 {
            v.push("mode_index must be >= 1".into());
        }
        if !(self.refraction_index >= 1.0) {
            v.push(format!("refraction_index must be >= 1, got {}", self.refraction_index));
        }
        for (name, x) in [
            ("cell_width_m", self.cell_width_m),
            ("rest_gap_m", self.rest_gap_m),
            ("gain_length_m", self.gain_length_m),
            ("gain_center_hz", self.gain_center_hz),
            ("pulse_period_s", self.pulse_period_s),
            ("flow_width_m", self.flow_width_m),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} must be finite and > 0, got {x}"));
            }
        }
        if !(self.gain_fwhm_hz > 0.0) {
            v.push(format!("gain_fwhm_hz must be > 0, got {}", self.gain_fwhm_hz));
        }
        if !(self.gain_peak_per_m >= 0.0 && self.gain_peak_per_m.is_finite()) {
            v.push("gain_peak_per_m must be finite and >= 0".into());
        }
        if !(self.flow_offset_m >= 0.0) {
            v.push("flow_offset_m must be >= 0".into());
        }
        if self.flow_offset_m + self.flow_width_m > self.cell_width_m {
            v.push(format!(
                "flow_offset_m + flow_width_m = {} exceeds cell_width_m = {}",
                self.flow_offset_m + self.flow_width_m,
                self.cell_width_m
            ));
        }
        if !(self.jitter_std_s >= 0.0) {
            v.push("jitter_std_s must be >= 0".into());
        }
        if !self.field_amplitude_v_per_m.is_finite() {
            v.push("field_amplitude_v_per_m must be finite".into());
        }
        if let Some(l0) = self.rest_wavelength_m {
            let derived = self.rest_wavelength();
            if ((l0 - derived) / derived).abs() > 1e-9 {
                v.push(format!(
                    "rest_wavelength_m = {l0:e} violates resonance N·λ⁰/2 = n·W_IC + x₀ (expected {derived:e})"
                ));
            }
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

    /// `λ⁰ = 2(n·W_IC + x₀)/N`.
    pub fn rest_wavelength(&self) -> f64 {
        2.0 * (self.refraction_index * self.cell_width_m + self.rest_gap_m) / self.mode_index as f64
    }

    /// Single transit time `Δt = W_IC / c`.
    pub fn transit_time(&self) -> f64 {
        self.cell_width_m / SPEED_OF_LIGHT
    }
}

/// PZT deformation `u(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PztDrive {
    /// `u(t) = A cos(Ω t)`.
    Harmonic { amplitude_m: f64, angular_frequency_rad_s: f64 },
    /// Samples at `t_m = m·dt`, linearly interpolated and held flat outside.
    Sampled { dt_s: f64, samples_m: Vec<f64> },
}

impl PztDrive {
    pub fn displacement(&self, t: f64) -> f64 {
        match self {
            PztDrive::Harmonic { amplitude_m, angular_frequency_rad_s } => {
                amplitude_m * (angular_frequency_rad_s * t).cos()
            }
            PztDrive::Sampled { dt_s, samples_m } => {
                let n = samples_m.len();
                if n == 1 {
                    return samples_m[0];
                }
                let pos = (t / dt_s).max(0.0);
                let k = pos.floor() as usize;
                if k + 1 >= n {
                    return samples_m[n - 1];
                }
                let frac = pos - k as f64;
                samples_m[k] + frac * (samples_m[k + 1] - samples_m[k])
            }
        }
    }

    pub fn max_displacement(&self) -> f64 {
        match self {
            PztDrive::Harmonic { amplitude_m, .. } => amplitude_m.abs(),
            PztDrive::Sampled { samples_m, .. } => samples_m.iter().fold(0.0_f64, |m, u| m.max(u.abs())),
        }
    }

    /// Free parameters seen by the optimizer: `(A, Ω)` or the samples.
    pub fn parameters(&self) -> Vec<f64> {
        match self {
            PztDrive::Harmonic { amplitude_m, angular_frequency_rad_s } => {
                vec![*amplitude_m, *angular_frequency_rad_s]
            }
            PztDrive::Sampled { samples_m, .. } => samples_m.clone(),
        }
    }

    pub fn with_parameters(&self, p: &[f64]) -> Result<Self> {
        let expected = self.parameters().len();
        ensure!(p.len() == expected, Usage, "drive has {expected} parameters, got {}", p.len());
        Ok(match self {
            PztDrive::Harmonic { .. } => PztDrive::Harmonic { amplitude_m: p[0], angular_frequency_rad_s: p[1] },
            PztDrive::Sampled { dt_s, .. } => PztDrive::Sampled { dt_s: *dt_s, samples_m: p.to_vec() },
        })
    }

    /// Hard errors for unusable drives; returns soft warnings when
    /// `max|u|` is no longer small against `x₀`.
    pub fn check(&self, rest_gap: f64) -> Result<Vec<String>> {
        match self {
            PztDrive::Harmonic { amplitude_m, angular_frequency_rad_s } => {
                ensure!(
                    amplitude_m.is_finite() && angular_frequency_rad_s.is_finite(),
                    Validation,
                    "harmonic drive parameters must be finite"
                );
            }
            PztDrive::Sampled { dt_s, samples_m } => {
                ensure!(*dt_s > 0.0, Validation, "drive dt_s must be > 0");
                ensure!(!samples_m.is_empty(), Validation, "drive has no samples");
                ensure!(samples_m.iter().all(|u| u.is_finite()), Validation, "drive samples must be finite");
            }
        }
        let umax = self.max_displacement();
        ensure!(umax < rest_gap, Validation, "max |u| = {umax:e} m reaches the rest gap x₀ = {rest_gap:e} m");
        let mut warnings = Vec::new();
        if umax >= 0.01 * rest_gap {
            warnings.push(format!(
                "max |u| = {umax:e} m exceeds 1% of x₀ = {rest_gap:e} m; small-deformation assumption is weak"
            ));
        }
        Ok(warnings)
    }
}

/// Photo-absorption cross section seen by the cavity, as a function of
/// angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Absorber {
    /// Same `σ_A` [m²] at every frequency.
    Constant(f64),
    /// Tabulated spectrum on a wavenumber grid.
    Spectrum(CrossSectionSpectrum),
}

impl Absorber {
    pub fn none() -> Self {
        Absorber::Constant(0.0)
    }

    /// `σ_A(ω)` [m²].
    pub fn at_omega(&self, omega: f64) -> Result<f64> {
        match self {
            Absorber::Constant(s) => Ok(*s),
            Absorber::Spectrum(spec) => spec.at_omega(omega),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Absorber::Constant(s) => {
                ensure!(*s >= 0.0 && s.is_finite(), Validation, "σ_A must be finite and >= 0, got {s}");
                Ok(())
            }
            Absorber::Spectrum(spec) => spec.validate(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::demo_cavity;
    use super::*;

    #[test]
    fn collects_all_violations() {
        let mut c = demo_cavity();
        c.retro_reflectivity_power = 1.5;
        c.flow_width_m = 1.0;
        c.gain_fwhm_hz = 0.0;
        let v = c.violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v[0].contains("retro_reflectivity_power"));
    }

    #[test]
    fn declared_rest_wavelength_checked() {
        let mut c = demo_cavity();
        c.rest_wavelength_m = Some(0.3);
        assert!(c.validate().is_ok());
        c.rest_wavelength_m = Some(0.31);
        assert!(c.validate().is_err());
    }

    #[test]
    fn reflectivity_table_parse_and_interpolate() {
        let t = WindowReflectivity::from_table_str("# lambda R\n0.2 0.8\n0.4, 0.9\n\n").unwrap();
        assert!((t.at(0.3).unwrap() - 0.85).abs() < 1e-15);
        assert!(matches!(t.at(0.5), Err(Error::Config(_))));
        assert!(WindowReflectivity::from_table_str("0.2 0.8 1").is_err());
        assert!(WindowReflectivity::from_table_str("0.2 1.8").is_err());
    }

    #[test]
    fn drive_interpolation_and_checks() {
        let d = PztDrive::Sampled { dt_s: 1.0, samples_m: vec![0.0, 2e-6, 0.0] };
        assert!((d.displacement(0.5) - 1e-6).abs() < 1e-20);
        assert_eq!(d.displacement(10.0), 0.0);
        assert!(d.check(0.1).unwrap().is_empty());
        assert_eq!(d.check(1e-4).unwrap().len(), 1);
        assert!(d.check(1e-6).is_err());
        let h = PztDrive::Harmonic { amplitude_m: 1e-6, angular_frequency_rad_s: 2.0 };
        assert_eq!(h.parameters(), vec![1e-6, 2.0]);
        let h2 = h.with_parameters(&[2e-6, 3.0]).unwrap();
        assert_eq!(h2.max_displacement(), 2e-6);
        assert!(h.with_parameters(&[1.0]).is_err());
    }
}
