use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use super::{CavityConfig, PztDrive};
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{ensure, Error, Result};

/// Laser wavelength tracking the PZT: `λ(t) = λ⁰ + 2u(t)/N`.
pub fn wavelength(drive: &PztDrive, cavity: &CavityConfig, t: f64) -> f64 {
    cavity.rest_wavelength() + 2.0 * drive.displacement(t) / cavity.mode_index as f64
}

/// Lorentzian gain line as printed:
/// `γ₀(ν₀)·(Δν/2)/((ν−ν₀)² + (Δν/2)²)`, i.e. `γ₀(ν₀)·2/Δν` at line centre.
pub fn gain_lineshape(cavity: &CavityConfig, nu_las: f64) -> Result<f64> {
    let fwhm = cavity.gain_fwhm_hz;
    ensure!(fwhm > 0.0, Validation, "gain_fwhm_hz must be > 0, got {fwhm}");
    let hw = 0.5 * fwhm;
    let d = nu_las - cavity.gain_center_hz;
    Ok(cavity.gain_peak_per_m * hw / (d * d + hw * hw))
}

/// `G₀ = exp(γ₀(t)·L)` at the instantaneous laser frequency.
pub fn single_pass_gain(drive: &PztDrive, cavity: &CavityConfig, t: f64) -> Result<f64> {
    let nu = SPEED_OF_LIGHT / wavelength(drive, cavity, t);
    let exponent = gain_lineshape(cavity, nu)? * cavity.gain_length_m;
    if !(exponent <= 700.0) {
        return Err(Error::Numeric(format!("single-pass gain exponent γ₀L = {exponent:e} overflows")));
    }
    Ok(exponent.exp())
}

/// `Δω_p = (c/x)(1 − g)/(π√g)` for round-trip loop gain `g = √(R·R_W)·G₀`.
pub fn bandwidth_from_loop_gain(gap: f64, loop_gain: f64) -> Result<f64> {
    ensure!(gap > 0.0, Validation, "optical gap x(t) = {gap:e} must be > 0");
    if !(loop_gain > 0.0) {
        return Err(Error::Domain(format!("loop gain √(R·R_W)·G₀ = {loop_gain} must be > 0")));
    }
    if loop_gain > 1.0 {
        return Err(Error::Domain(format!("loop gain √(R·R_W)·G₀ = {loop_gain} is above lasing threshold 1")));
    }
    Ok(SPEED_OF_LIGHT / gap * (1.0 - loop_gain) / (PI * loop_gain.sqrt()))
}

/// Pulse bandwidth at time `t` [rad/s].
pub fn pulse_bandwidth(drive: &PztDrive, cavity: &CavityConfig, t: f64) -> Result<f64> {
    let lambda = wavelength(drive, cavity, t);
    let r_w = cavity.window_reflectivity_power.at(lambda)?;
    let g0 = single_pass_gain(drive, cavity, t)?;
    let loop_gain = (cavity.retro_reflectivity_power * r_w).sqrt() * g0;
    bandwidth_from_loop_gain(cavity.rest_gap_m + drive.displacement(t), loop_gain)
}

/// Complex spectrum on a uniform angular-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpectrum {
    pub omega_start: f64,
    pub omega_step: f64,
    pub amplitudes: Vec<Complex64>,
}

impl FieldSpectrum {
    pub fn omega(&self, k: usize) -> f64 {
        self.omega_start + self.omega_step * k as f64
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        (0..self.amplitudes.len()).map(|k| self.omega(k)).collect()
    }
}

/// Gaussian envelope `ℱ(ω) = (4√(π ln 2)/Δω)·exp(−4 ln 2 ((ω−ω_c)/Δω)²)`
/// whose inverse transform has unit peak.
pub(crate) fn gaussian_envelope(omega: f64, center: f64, bandwidth: f64) -> f64 {
    let z = (omega - center) / bandwidth;
    4.0 * (PI * LN_2).sqrt() / bandwidth * (-4.0 * LN_2 * z * z).exp()
}

/// Samples `ℱ(ω, t)` on `omega_grid` (must be uniform).
pub fn envelope_spectrum(cavity: &CavityConfig, drive: &PztDrive, t: f64, omega_grid: &[f64]) -> Result<FieldSpectrum> {
    ensure!(omega_grid.len() >= 2, Config, "omega grid needs at least 2 points");
    let step = omega_grid[1] - omega_grid[0];
    let uniform = omega_grid.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs());
    ensure!(step > 0.0 && uniform, Config, "omega grid must be uniform and increasing");
    let bw = pulse_bandwidth(drive, cavity, t)?;
    if bw <= 0.0 {
        return Err(Error::Domain("zero pulse bandwidth: envelope is a delta function".into()));
    }
    let center = 2.0 * PI * SPEED_OF_LIGHT / wavelength(drive, cavity, t);
    Ok(FieldSpectrum {
        omega_start: omega_grid[0],
        omega_step: step,
        amplitudes: omega_grid.iter().map(|w| Complex64::new(gaussian_envelope(*w, center, bw), 0.0)).collect(),
    })
}

/// Pulse-train factor over `N_p + 1` pulses `k = 0..=N_p`:
/// `Σ e^{−ikωT_p} = (1 − e^{−i(N_p+1)ωT_p})/(1 − e^{−iωT_p})`.
pub fn train_factor(omega: f64, n_pulses: u64, period: f64) -> Complex64 {
    let x = omega * period;
    let terms = (n_pulses + 1) as f64;
    let half = 0.5 * x;
    let s = half.sin();
    if s.abs() < 1e-14 {
        // removable singularity at ωT_p = 2πm
        return Complex64::new(terms, 0.0);
    }
    // Dirichlet-kernel form of the geometric sum; avoids 1 − e^{−ix} cancellation.
    let magnitude = (terms * half).sin() / s;
    Complex64::from_polar(1.0, -(n_pulses as f64) * half) * magnitude
}

/// `N_p(t) = ⌈t/T_p⌉`.
pub fn pulse_count(t: f64, period: f64) -> u64 {
    (t / period).ceil().max(0.0) as u64
}

/// Multi-pass amplification factor `Q_las(ω, x, t)` for absorber density
/// `n_g` [m⁻³] and cross section `σ_A(ω)` [m²].
pub fn amplification(
    cavity: &CavityConfig,
    omega: f64,
    x: f64,
    t: f64,
    sigma_a: f64,
    absorber_density: f64,
) -> Result<Complex64> {
    ensure!(sigma_a >= 0.0, Validation, "σ_A must be >= 0, got {sigma_a}");
    ensure!(absorber_density >= 0.0, Validation, "absorber density must be >= 0");
    let lambda = 2.0 * PI * SPEED_OF_LIGHT / omega;
    let rho_w = cavity.window_reflectivity_power.at(lambda)?.sqrt();
    Ok(amplification_with(cavity, omega, x, t, sigma_a * absorber_density, rho_w))
}

/// Core of [`amplification`] with the attenuation coefficient `σ_A·n_g` and
/// field reflectivity `ρ_W` already resolved.
pub(crate) fn amplification_with(
    cavity: &CavityConfig,
    omega: f64,
    x: f64,
    t: f64,
    attenuation: f64,
    rho_w: f64,
) -> Complex64 {
    let prefactor = geometric_prefactor(cavity, t, attenuation, rho_w);
    prefactor * bracket(cavity, omega, x, attenuation)
}

/// `i𝒯·(1 − q^{t/Δt})/(1 − q)` with `q = ρ̃ρ̃_W`.
pub(crate) fn geometric_prefactor(cavity: &CavityConfig, t: f64, attenuation: f64, rho_w: f64) -> Complex64 {
    let d = (-0.5 * attenuation * cavity.flow_width_m).exp();
    let q = cavity.strip_reflectivity_field * d * rho_w * d;
    let passes = t / cavity.transit_time();
    let geom = if (1.0 - q).abs() < 1e-15 { passes } else { (1.0 - q.powf(passes)) / (1.0 - q) };
    Complex64::new(0.0, cavity.window_transmission_field * geom)
}

/// `ρ̃·e^{iα⁽¹⁾(x)}·𝒟 + e^{iα⁽⁰⁾(x)}`, with the phases exactly as printed
/// (α⁽¹⁾ carries an imaginary, i.e. attenuating, part).
pub(crate) fn bracket(cavity: &CavityConfig, omega: f64, x: f64, attenuation: f64) -> Complex64 {
    let k = omega / SPEED_OF_LIGHT;
    let delta = cavity.flow_offset_m;
    let w = cavity.cell_width_m;
    let d = (-0.5 * attenuation * cavity.flow_width_m).exp();
    let rho_tilde = cavity.strip_reflectivity_field * d;
    let alpha0 = k * x + 0.5 * attenuation * (x - delta);
    let alpha1 = Complex64::new(k * (2.0 * w - x), 0.5 * attenuation * (w - x - delta));
    let i = Complex64::i();
    (i * alpha1).exp() * (rho_tilde * d) + Complex64::from_polar(1.0, alpha0)
}

/// `Σ_k c_k·bracket(ω_k, x, a_k)` for fixed coefficients `c_k`, with every
/// factor that does not depend on `x` computed once.
pub(crate) struct BracketSum {
    wavenumber: Vec<f64>,
    half_att: Vec<f64>,
    /// `W − δ`, the depth at which the reflected attenuation exponent vanishes.
    far_edge: f64,
    reflected: Vec<Complex64>,
    direct: Vec<Complex64>,
}

impl BracketSum {
    pub(crate) fn new(
        cavity: &CavityConfig,
        omegas: &[f64],
        attenuation: &[f64],
        coefficients: impl IntoIterator<Item = Complex64>,
    ) -> Self {
        let (w, delta) = (cavity.cell_width_m, cavity.flow_offset_m);
        let n = omegas.len();
        let mut out = Self {
            wavenumber: Vec::with_capacity(n),
            half_att: Vec::with_capacity(n),
            far_edge: w - delta,
            reflected: Vec::with_capacity(n),
            direct: Vec::with_capacity(n),
        };
        for ((omega, att), c) in omegas.iter().zip(attenuation).zip(coefficients) {
            let k = omega / SPEED_OF_LIGHT;
            let h = 0.5 * att;
            let d = (-h * cavity.flow_width_m).exp();
            let strip = cavity.strip_reflectivity_field * d * d;
            out.wavenumber.push(k);
            out.half_att.push(h);
            out.reflected.push(c * Complex64::from_polar(strip, 2.0 * k * w));
            out.direct.push(c * Complex64::from_polar(1.0, -h * delta));
        }
        out
    }

    pub(crate) fn at(&self, x: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..self.wavenumber.len() {
            let h = self.half_att[k];
            let u = Complex64::from_polar(1.0, self.wavenumber[k] * x);
            total += if h == 0.0 {
                self.reflected[k] * u.conj() + self.direct[k] * u
            } else {
                self.reflected[k] * u.conj() * (h * (x - self.far_edge)).exp()
                    + self.direct[k] * u * Complex64::from_polar(1.0, h * x)
            };
        }
        total
    }
}
