use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::CavityConfig;
use crate::error::{Error, Result};

/// Pulse build-up delays `τ_r^(j)`, Gaussian with the cavity's jitter mean
/// and standard deviation. Deterministic for a fixed seed.
pub fn jitter_sequence(cavity: &CavityConfig, seed: u64, count: usize) -> Result<Vec<f64>> {
    let mean = cavity.jitter_mean_s;
    let std = cavity.jitter_std_s;
    if !(std >= 0.0) || !mean.is_finite() {
        return Err(Error::Validation(format!("jitter needs finite mean and std >= 0, got mean {mean}, std {std}")));
    }
    if std == 0.0 {
        return Ok(vec![mean; count]);
    }
    let normal = Normal::new(mean, std).map_err(|e| Error::Validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::super::test_support::demo_cavity;
    use super::*;

    #[test]
    fn degenerate_distribution() {
        let c = demo_cavity();
        let s = jitter_sequence(&c, 7, 10).unwrap();
        assert!(s.iter().all(|v| *v == c.jitter_mean_s));
    }

    #[test]
    fn deterministic_per_seed() {
        let mut c = demo_cavity();
        c.jitter_std_s = 1e-9;
        let a = jitter_sequence(&c, 42, 100).unwrap();
        let b = jitter_sequence(&c, 42, 100).unwrap();
        let other = jitter_sequence(&c, 43, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn long_run_mean() {
        let mut c = demo_cavity();
        c.jitter_std_s = 5e-9;
        let n = 100_000;
        let s = jitter_sequence(&c, 1, n).unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        let bound = 3.0 * c.jitter_std_s / (n as f64).sqrt();
        assert!((mean - c.jitter_mean_s).abs() < bound, "mean {mean}");
    }

    #[test]
    fn negative_std_rejected() {
        let mut c = demo_cavity();
        c.jitter_std_s = -1.0;
        assert!(matches!(jitter_sequence(&c, 0, 3), Err(Error::Validation(_))));
    }
}
