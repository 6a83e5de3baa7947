use serde::{Deserialize, Serialize};

use super::{rhs_unchecked, TransportRates, TransportState, BALANCE_TOL};
use crate::error::{ensure, Error, Result};

/// `k_A(t)` samples, linearly interpolated and held flat outside the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl KaSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            !self.times.is_empty() && self.times.len() == self.values.len(),
            Config,
            "k_A series needs matching, non-empty time and value columns"
        );
        ensure!(self.times.windows(2).all(|w| w[1] > w[0]), Config, "k_A times must be strictly increasing");
        if let Some(i) = self.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!("k_A sample {i} must be finite and >= 0")));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|x| *x <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        v0 + (t - t0) / (t1 - t0) * (v1 - v0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Dormand–Prince 5(4) with embedded error control inside each output step.
    Adaptive { rel_tol: f64, abs_tol: f64 },
    /// One Dormand–Prince fifth-order step per output step.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Upper bound on `dt·max_rate`.
    pub stiffness_guard: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { method: Method::Adaptive { rel_tol: 1e-10, abs_tol: 1e-13 }, stiffness_guard: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TransportState>,
    pub ka: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &TransportState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn max_balance_error(&self) -> f64 {
        self.states.iter().map(TransportState::balance_error).fold(0.0, f64::max)
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

type Y = [f64; 3];

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dp_step(y: &Y, t: f64, h: f64, rates: &TransportRates, ka: &KaSeries) -> (Y, Y) {
    let f = |t: f64, y: &Y| rhs_unchecked(y[0], y[1], y[2], rates, ka.at(t));
    let mut k = [[0.0; 3]; 7];
    k[0] = f(t, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..3 {
                ys[i] += h * A[s - 1][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 3];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..3 {
            y5[i] += h * B5[s] * ks[i];
            err[i] += h * (B5[s] - B4[s]) * ks[i];
        }
    }
    (y5, err)
}

fn advance(y: Y, t0: f64, t1: f64, rates: &TransportRates, ka: &KaSeries, method: Method) -> Result<Y> {
    let span = t1 - t0;
    let (rel_tol, abs_tol) = match method {
        Method::Fixed => return Ok(dp_step(&y, t0, span, rates, ka).0),
        Method::Adaptive { rel_tol, abs_tol } => (rel_tol, abs_tol),
    };
    let mut y = y;
    let mut t = t0;
    let mut h = span;
    let mut rejected = 0usize;
    while t < t1 {
        h = h.min(t1 - t);
        let (y_new, err) = dp_step(&y, t, h, rates, ka);
        let ratio =
            (0..3).map(|i| err[i].abs() / (abs_tol + rel_tol * y[i].abs().max(y_new[i].abs()))).fold(0.0, f64::max);
        if ratio <= 1.0 {
            t = if t1 - (t + h) <= 1e-12 * span { t1 } else { t + h };
            y = y_new;
        } else {
            rejected += 1;
            if rejected > 100_000 {
                return Err(Error::Numeric(format!("step size control failed near t = {t:e} s")));
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(span);
    }
    Ok(y)
}

/// Integrates the three kinetic equations from `initial` to `horizon` with
/// output every `dt`; `f_m` follows from the material balance.
pub fn integrate(
    initial: &TransportState,
    rates: &TransportRates,
    ka: &KaSeries,
    horizon: f64,
    dt: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    initial.validate()?;
    rates.validate()?;
    ka.validate()?;
    ensure!(horizon > 0.0 && horizon.is_finite(), Config, "horizon must be > 0");
    ensure!(dt > 0.0 && dt <= horizon, Config, "dt must lie in (0, horizon]");
    let max_rate = rates.max_rate().max(ka.max());
    ensure!(
        dt * max_rate < options.stiffness_guard,
        Config,
        "dt·max_rate = {:e} violates the stiffness guard {} (dt = {dt:e} s, max rate {max_rate:e} 1/s)",
        dt * max_rate,
        options.stiffness_guard
    );

    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut kas = Vec::with_capacity(steps + 1);
    let mut y = [initial.f_star, initial.f_epi, initial.f_d];
    times.push(0.0);
    states.push(TransportState::from_excited(y[0], y[1], y[2]));
    kas.push(ka.at(0.0));
    for n in 1..=steps {
        let t0 = times[n - 1];
        let t1 = if n == steps { horizon } else { n as f64 * dt };
        y = advance(y, t0, t1, rates, ka, options.method)?;
        let state = TransportState::from_excited(y[0], y[1], y[2]);
        if let Err(e) = state.validate() {
            return Err(Error::Numeric(format!("at t = {t1:e} s: {e}")));
        }
        times.push(t1);
        states.push(state);
        kas.push(ka.at(t1));
    }
    debug_assert!(states.iter().all(|s| s.balance_error() <= BALANCE_TOL));
    Ok(Trajectory { times, states, ka: kas })
}
