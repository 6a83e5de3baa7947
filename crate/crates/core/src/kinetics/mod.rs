//! Four-fraction excitation/condensation kinetics under a time-dependent
//! laser excitation rate, the excitation rate itself, and the enrichment
//! factor of the escaped stream.

mod excitation;
mod integrate;

pub use excitation::{excitation_rate, ExcitationRate};
pub use integrate::{integrate, IntegratorOptions, KaSeries, Method, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

const BALANCE_TOL: f64 = 1e-8;

/// Transport and relaxation rates [1/s] and wall survival probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportRates {
    /// Dimer formation.
    #[serde(rename = "k_df_per_s")]
    pub k_df: f64,
    /// Dimer dissociation.
    #[serde(rename = "k_dd_per_s")]
    pub k_dd: f64,
    #[serde(rename = "k_vt_per_s")]
    pub k_vt: f64,
    #[serde(rename = "k_vv_per_s")]
    pub k_vv: f64,
    /// Spontaneous emission.
    #[serde(rename = "k_se_per_s")]
    pub k_se: f64,
    /// Thermalization of epithermal molecules.
    #[serde(rename = "k_th_per_s")]
    pub k_th: f64,
    #[serde(rename = "k_w_per_s")]
    pub k_w: f64,
    #[serde(rename = "k_w1_per_s")]
    pub k_w1: f64,
    /// Survival probability of excited monomers on the way to the wall.
    pub e_star: f64,
    /// Survival probability of epithermal molecules.
    pub e_1: f64,
}

impl TransportRates {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, k) in [
            ("k_df_per_s", self.k_df),
            ("k_dd_per_s", self.k_dd),
            ("k_vt_per_s", self.k_vt),
            ("k_vv_per_s", self.k_vv),
            ("k_se_per_s", self.k_se),
            ("k_th_per_s", self.k_th),
            ("k_w_per_s", self.k_w),
            ("k_w1_per_s", self.k_w1),
        ] {
            if !(k.is_finite() && k >= 0.0) {
                v.push(format!("{name} must be finite and >= 0, got {k}"));
            }
        }
        for (name, e) in [("e_star", self.e_star), ("e_1", self.e_1)] {
            if !(0.0..=1.0).contains(&e) {
                v.push(format!("{name} must lie in [0, 1], got {e}"));
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

    /// Total first-order loss rate of excited monomers.
    pub fn excited_loss(&self) -> f64 {
        (1.0 - self.e_star) * (self.k_df + self.k_vv + self.k_vt + self.k_se) + self.e_star * self.k_w
    }

    /// Total first-order loss rate of epithermal molecules.
    pub fn epithermal_loss(&self) -> f64 {
        (1.0 - self.e_1) * self.k_th + self.e_1 * self.k_w1
    }

    /// Largest rate entering the system, excluding the laser term.
    pub fn max_rate(&self) -> f64 {
        [
            self.k_df,
            self.k_dd,
            self.k_vt,
            self.k_vv,
            self.k_se,
            self.k_th,
            self.k_w,
            self.k_w1,
            self.excited_loss(),
            self.epithermal_loss(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Molar fractions of monomers, excited monomers, epithermals and dimers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportState {
    pub f_m: f64,
    pub f_star: f64,
    pub f_epi: f64,
    pub f_d: f64,
}

impl TransportState {
    /// Builds a state with `f_m` closed by the material balance.
    pub fn from_excited(f_star: f64, f_epi: f64, f_d: f64) -> Self {
        Self { f_m: 1.0 - f_star - f_epi - f_d, f_star, f_epi, f_d }
    }

    pub fn ground() -> Self {
        Self::from_excited(0.0, 0.0, 0.0)
    }

    pub fn balance_error(&self) -> f64 {
        (self.f_m + self.f_star + self.f_epi + self.f_d - 1.0).abs()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("f_m", self.f_m), ("f_star", self.f_star), ("f_epi", self.f_epi), ("f_d", self.f_d)] {
            ensure!((-BALANCE_TOL..=1.0 + BALANCE_TOL).contains(&f), Validation, "{name} = {f} outside [0, 1]");
        }
        ensure!(
            self.balance_error() <= BALANCE_TOL,
            Validation,
            "fractions sum to {}, material balance violated",
            self.f_m + self.f_star + self.f_epi + self.f_d
        );
        Ok(())
    }
}

/// Time derivatives `(df*/dt, df!/dt, df_d/dt)`; `f_m` is held by the balance.
pub fn kinetics_rhs(state: &TransportState, rates: &TransportRates, ka: f64) -> Result<[f64; 3]> {
    state.validate()?;
    rates.validate()?;
    ensure!(ka >= 0.0 && ka.is_finite(), Validation, "excitation rate k_A must be finite and >= 0, got {ka}");
    Ok(rhs_unchecked(state.f_star, state.f_epi, state.f_d, rates, ka))
}

pub(crate) fn rhs_unchecked(f_star: f64, f_epi: f64, f_d: f64, r: &TransportRates, ka: f64) -> [f64; 3] {
    let f_m = 1.0 - f_star - f_epi - f_d;
    [
        ka * f_m - f_star * r.excited_loss(),
        (1.0 - r.e_star) * (r.k_df + r.k_vt) * f_star - r.epithermal_loss() * f_epi,
        r.k_df * f_m - r.k_dd * f_d,
    ]
}

/// Fixed point of the kinetics under constant `k_A`.
///
/// With `q = k_df/k_dd`, `b = 1 + (1−e_*)(k_df+k_VT)/L_!` and `L_*`, `L_!` the
/// excited and epithermal loss rates, `f* = k_A/(L_*(1+q) + k_A·b)`.
pub fn steady_state(rates: &TransportRates, ka: f64) -> Result<TransportState> {
    rates.validate()?;
    ensure!(ka >= 0.0 && ka.is_finite(), Validation, "excitation rate k_A must be finite and >= 0, got {ka}");
    let l_epi = rates.epithermal_loss();
    ensure!(rates.k_dd > 0.0, Domain, "steady state needs k_dd > 0");
    ensure!(l_epi > 0.0, Domain, "steady state needs a nonzero epithermal loss rate");
    let q = rates.k_df / rates.k_dd;
    let ratio = (1.0 - rates.e_star) * (rates.k_df + rates.k_vt) / l_epi;
    let denom = rates.excited_loss() * (1.0 + q) + ka * (1.0 + ratio);
    ensure!(denom > 0.0, Domain, "steady state is not unique without excitation or excited-state losses");
    let f_star = ka / denom;
    let f_m = (1.0 - f_star * (1.0 + ratio)) / (1.0 + q);
    Ok(TransportState { f_m, f_star, f_epi: ratio * f_star, f_d: q * f_m })
}

/// Target and total flows of the feed and escaped streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrichmentInput {
    pub feed_target: f64,
    pub feed_total: f64,
    pub escaped_target: f64,
    pub escaped_total: f64,
}

/// `β = (Q_esc,target/Q_esc)/(Q_feed,target/Q_feed)`.
pub fn enrichment(input: &EnrichmentInput) -> Result<f64> {
    let EnrichmentInput { feed_target, feed_total, escaped_target, escaped_total } = *input;
    for (name, q) in [
        ("feed_target", feed_target),
        ("feed_total", feed_total),
        ("escaped_target", escaped_target),
        ("escaped_total", escaped_total),
    ] {
        ensure!(q > 0.0 && q.is_finite(), Validation, "{name} must be finite and > 0, got {q}");
    }
    ensure!(feed_target <= feed_total && escaped_target <= escaped_total, Validation, "target flow exceeds total flow");
    Ok((escaped_target * feed_total) / (escaped_total * feed_target))
}
