use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::integrate;

const TERMS: usize = 32;

struct Weideman {
    scale: f64,
    coeffs: [f64; TERMS],
}

// Weideman (1994) rational expansion of the Faddeeva function.
fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TERMS;
        let m = 2 * n;
        let scale = (n as f64 / 2f64.sqrt()).sqrt();
        let mut coeffs = [0.0; TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let order = (j + 1) as f64;
            let mut acc = 0.0;
            for k in (1 - m as i64)..(m as i64) {
                let theta = k as f64 * PI / m as f64;
                let t = scale * (0.5 * theta).tan();
                let f = (-t * t).exp() * (scale * scale + t * t);
                acc += f * (order * theta).cos();
            }
            *c = acc / (2 * m) as f64;
        }
        Weideman { scale, coeffs }
    })
}

/// Faddeeva function `w(z) = e^{−z²} erfc(−iz)` for `Im z ≥ 0`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    let table = weideman();
    let l = Complex64::new(table.scale, 0.0);
    let iz = Complex64::i() * z;
    let denom = l - iz;
    let zz = (l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for c in table.coeffs.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + 1.0 / (PI.sqrt() * denom)
}

pub(crate) fn check_widths(gamma: f64, sigma0: f64) -> Result<()> {
    if !(gamma >= 0.0 && sigma0 >= 0.0) {
        return Err(Error::Validation(format!("Voigt widths must be >= 0, got γ = {gamma}, σ₀ = {sigma0}")));
    }
    if gamma == 0.0 && sigma0 == 0.0 {
        return Err(Error::Domain("Voigt profile with both widths zero is a delta function".into()));
    }
    Ok(())
}

/// Voigt line shape as printed, normalised to total area 2:
/// `(2γ/(π√(2π)σ₀))∫exp(−λ′²/2σ₀²)/((Δ−λ′)² + γ²) dλ′`.
pub fn voigt(detuning: f64, gamma: f64, sigma0: f64) -> Result<f64> {
    check_widths(gamma, sigma0)?;
    Ok(voigt_unchecked(detuning, gamma, sigma0))
}

pub(crate) fn voigt_unchecked(detuning: f64, gamma: f64, sigma0: f64) -> f64 {
    let d = detuning.abs();
    if sigma0 == 0.0 {
        return 2.0 * gamma / (PI * (d * d + gamma * gamma));
    }
    if gamma == 0.0 {
        let u = d / sigma0;
        return 2.0 / ((2.0 * PI).sqrt() * sigma0) * (-0.5 * u * u).exp();
    }
    let s = sigma0 * 2f64.sqrt();
    let w = faddeeva(Complex64::new(d / s, gamma / s));
    2.0 * w.re / ((2.0 * PI).sqrt() * sigma0)
}

/// Direct adaptive quadrature of the convolution integral; slow reference
/// path with relative tolerance `1e-8`.
pub fn voigt_quadrature(detuning: f64, gamma: f64, sigma0: f64) -> Result<f64> {
    check_widths(gamma, sigma0)?;
    if sigma0 == 0.0 || gamma == 0.0 {
        return voigt(detuning, gamma, sigma0);
    }
    let d = detuning.abs();
    let half = 40.0 * sigma0;
    let integrand = |x: f64| {
        let g = (-0.5 * (x / sigma0).powi(2)).exp();
        g / ((d - x).powi(2) + gamma * gamma)
    };
    let mut breaks = vec![0.0, d, d - 10.0 * gamma, d + 10.0 * gamma];
    breaks.extend((1..8).map(|k| -half + k as f64 * half / 4.0));
    let val = integrate(integrand, -half, half, &breaks, 1e-10, 0.0)?;
    Ok(2.0 * gamma / (PI * (2.0 * PI).sqrt() * sigma0) * val)
}
