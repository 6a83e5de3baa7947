//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selex_cli::{load_config, run_scenario, RunRequest, Stage};
use selex_core::cavity::{
    bandwidth_from_loop_gain, pulse_bandwidth, synthesize_field, train_factor, Absorber, CavityConfig, PztDrive,
    SynthesisOptions, TimeGrid, WindowReflectivity,
};
use selex_core::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use selex_core::control::{ascend, finite_difference_gradient, gradient_field, objective, AscentConfig, Mixture};
use selex_core::kinetics::{
    enrichment, integrate, EnrichmentInput, IntegratorOptions, KaSeries, TransportRates, TransportState,
};
use selex_core::num_complex::Complex64;
use selex_core::numerics::{integrate as quad, l2_norm};
use selex_core::quantum::{
    excitation_probability, propagate, CMatrix, CVector, ControlField, DipoleUnits, InitialState, QuantumComponent,
};
use selex_core::spectroscopy::voigt;
use selex_core::Error;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    ensure(e <= limit, || format!("took {e:.1?}, limit {limit:?}"))
}

fn core<T>(r: selex_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_component(rng: &mut ChaCha8Rng, label: &str, dim: usize) -> QuantumComponent {
    let energies: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut dipole = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        dipole[(i, i)] = Complex64::new(rng.random_range(-0.5..0.5), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            dipole[(i, j)] = z;
            dipole[(j, i)] = z.conj();
        }
    }
    let initial = if rng.random_bool(0.5) {
        let v = CVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        InitialState::Pure(v.unscale(v.norm()))
    } else {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = p.iter().sum();
        InitialState::Density(CMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(if i == j { p[i] / total } else { 0.0 }, 0.0)
        }))
    };
    let mut excited: Vec<usize> = (1..dim).filter(|_| rng.random_bool(0.5)).collect();
    if excited.is_empty() {
        excited.push(dim - 1);
    }
    QuantumComponent {
        label: label.into(),
        energies,
        dipole,
        initial,
        excited_indices: excited,
        weight: rng.random_range(0.5..2.0),
        units: DipoleUnits::Scaled,
    }
}

fn gradient_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let instances = 24;
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let k = rng.random_range(1..=3);
        let components: Vec<QuantumComponent> = (0..k)
            .map(|i| {
                let dim = rng.random_range(2..=4);
                random_component(&mut rng, &format!("c{i}"), dim)
            })
            .collect();
        let target = rng.random_range(0..k);
        let mixture = core(Mixture::new(components, target))?;
        let steps = rng.random_range(20..=200);
        let field = core(ControlField::new(0.05, (0..steps).map(|_| rng.random_range(-1.0..1.0)).collect()))?;
        let exact = core(gradient_field(&mixture, &field))?;
        let fd = core(finite_difference_gradient(&mixture, &field, 1e-4))?;
        let diff: Vec<f64> = exact.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let err = l2_norm(&diff) / l2_norm(&fd);
        ensure(err < 1e-5, || format!("instance {seed}: relative L2 error {err:e}"))?;
        worst = worst.max(err);
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{instances} instances, worst relative L2 error {worst:.2e}"))
}

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = random_component(&mut rng, "u", 4);
    c.initial = InitialState::basis(4, 0);
    let field = core(ControlField::new(0.05, (0..10_000).map(|_| rng.random_range(-2.0..2.0)).collect()))?;
    let drift = core(propagate(&c, &field))?.max_norm_drift();
    ensure(drift < 1e-10, || format!("norm drift {drift:e}"))?;
    Ok(format!("10^4 steps, max norm drift {drift:.2e}"))
}

fn rabi_oracle() -> Outcome {
    let start = Instant::now();
    let c = QuantumComponent::two_level("rabi", 1.0, 1.0, 1.0);
    let (amp, dt) = (2e-3, 0.05);
    let steps = (PI / amp / dt).round() as usize;
    let duration = steps as f64 * dt;
    let a = PI / duration;
    let pi_pulse = core(ControlField::from_fn(dt, steps, |t| a * t.cos()))?;
    let p = core(excitation_probability(&c, &pi_pulse))?;
    ensure((p - 1.0).abs() <= 1e-6, || format!("π-pulse P_ex = {p}"))?;

    let m = core(Mixture::new(vec![c.clone()], 0))?;
    let weak = core(ControlField::from_fn(dt, steps, |t| 0.3 * a * t.cos()))?;
    let cfg = AscentConfig { step_size: 1e-3, max_iterations: 500, ..Default::default() };
    let r = core(ascend(&m, &weak, &cfg))?;
    let p_opt = core(excitation_probability(&c, &r.final_field))?;
    ensure(p_opt >= 0.99, || format!("ascent P_ex = {p_opt} after {} iterations", r.iterations_used))?;
    ensure(r.iterations_used <= 500, || format!("{} iterations", r.iterations_used))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "π-pulse |P_ex − 1| = {:.1e}; ascent P_ex = {p_opt:.4} in {} iterations",
        (p - 1.0).abs(),
        r.iterations_used
    ))
}

fn discrimination() -> Outcome {
    let start = Instant::now();
    let (dt, steps) = (0.1, 1150);
    let target = QuantumComponent::two_level("target", 1.0, 1.0, 1.0);
    let other = QuantumComponent::two_level("other", 1.05, 1.0, 1.0);
    let m = core(Mixture::new(vec![target, other], 0))?;

    let initial = core(ControlField::from_fn(dt, steps, |t| 0.005 * t.cos()))?;
    let cfg = AscentConfig { step_size: 1e-3, max_iterations: 500, ..Default::default() };
    let r = core(ascend(&m, &initial, &cfg))?;
    let f_ascent = r.final_objective();
    ensure(f_ascent >= 0.8, || format!("ascent F = {f_ascent}"))?;

    let mut best = f64::NEG_INFINITY;
    for i in 0..=50 {
        let omega = 0.9 + 0.25 * i as f64 / 50.0;
        for j in 1..=40 {
            let amp = 0.08 * j as f64 / 40.0;
            let f = core(ControlField::from_fn(dt, steps, |t| amp * (omega * t).cos()))?;
            best = best.max(core(objective(&m, &f))?);
        }
    }
    ensure(best <= f_ascent + 0.05, || format!("grid search F = {best} beats ascent F = {f_ascent}"))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("ascent F = {f_ascent:.4}, sinusoid grid best F = {best:.4}"))
}

fn train_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for i in 0..1000 {
        let period = 1.0;
        let n: u64 = rng.random_range(0..=200);
        let omega =
            if i % 10 == 0 { 2.0 * PI * rng.random_range(-3..=3) as f64 } else { rng.random_range(-20.0..20.0) };
        let direct: Complex64 = (0..=n).map(|k| Complex64::from_polar(1.0, -(k as f64) * omega * period)).sum();
        let closed = train_factor(omega, n, period);
        let err = (closed - direct).norm() / (n + 1) as f64;
        ensure(err <= 1e-12, || format!("ω = {omega}, N_p = {n}: error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("10^3 pairs, worst error per term {worst:.2e}"))
}

fn oracle_cavity() -> CavityConfig {
    CavityConfig {
        mode_index: 4,
        refraction_index: 1.0,
        cell_width_m: 0.5,
        rest_gap_m: 0.1,
        rest_wavelength_m: None,
        retro_reflectivity_power: 0.6,
        window_reflectivity_power: WindowReflectivity::Constant(0.5),
        strip_reflectivity_field: 0.5,
        window_transmission_field: 0.8,
        gain_length_m: 0.2,
        gain_peak_per_m: 1.0,
        gain_center_hz: 1e9,
        gain_fwhm_hz: 2e9,
        pulse_period_s: 1e-6,
        jitter_mean_s: 15e-9,
        jitter_std_s: 0.0,
        field_amplitude_v_per_m: 1.0,
        flow_offset_m: 0.1,
        flow_width_m: 0.05,
    }
}

fn still() -> PztDrive {
    PztDrive::Harmonic { amplitude_m: 0.0, angular_frequency_rad_s: 0.0 }
}

fn synthesis_oracle() -> Outcome {
    let c = oracle_cavity();
    let grid = core(TimeGrid::new(5e-10, 60))?;
    let coarse = core(synthesize_field(&c, &still(), grid, &Absorber::none(), &SynthesisOptions::default()))?;

    let strip = c.strip_reflectivity_field;
    let q = strip * 0.5_f64.sqrt();
    let (w, delta, width) = (c.cell_width_m, c.flow_offset_m, c.flow_width_m);
    let mut oracle_field = Vec::new();
    let mut oracle_intensity = Vec::new();
    for info in &coarse.info {
        let t = info.time;
        let (wc, bw) = (info.omega_center, info.bandwidth);
        let pulse = |s: f64| Complex64::from_polar((-s * s * bw * bw / (16.0 * LN_2)).exp(), wc * s);
        let geom = (1.0 - q.powf(t / c.transit_time())) / (1.0 - q);
        let pref = Complex64::new(0.0, c.window_transmission_field * geom);
        let aleph = |x: f64| {
            pref * (0..=info.n_pulses)
                .map(|j| {
                    let s = t - c.jitter_mean_s - j as f64 * c.pulse_period_s;
                    pulse(s + (2.0 * w - x) / SPEED_OF_LIGHT) * strip + pulse(s + x / SPEED_OF_LIGHT)
                })
                .sum::<Complex64>()
        };
        let avg = |f: &dyn Fn(f64) -> f64| core(quad(f, delta, delta + width, &[], 1e-13, 1e-300)).map(|v| v / width);
        oracle_field.push(c.field_amplitude_v_per_m * avg(&|x| aleph(x).re)?);
        let scale = 0.5 * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY * c.refraction_index;
        oracle_intensity.push(scale * avg(&|x| aleph(x).norm_sqr())?);
    }
    let rel = |a: &[f64], b: &[f64]| {
        let peak = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak
    };
    let e_field = rel(&coarse.width_averaged_field, &oracle_field);
    let e_int = rel(&coarse.width_averaged_intensity, &oracle_intensity);
    ensure(e_field < 1e-6 && e_int < 1e-6, || format!("field error {e_field:e}, intensity error {e_int:e}"))?;

    let fine_opts = SynthesisOptions {
        points_per_bandwidth: 32.0,
        alias_oversample: 4.0,
        half_width_factor: 10.0,
        flow_nodes: 32,
        ..Default::default()
    };
    let fine = core(synthesize_field(&c, &still(), grid, &Absorber::none(), &fine_opts))?;
    let e_ref = rel(&coarse.width_averaged_field, &fine.width_averaged_field)
        .max(rel(&coarse.width_averaged_intensity, &fine.width_averaged_intensity));
    ensure(e_ref < 1e-6, || format!("refinement changes output by {e_ref:e}"))?;
    Ok(format!("vs closed form: field {e_field:.1e}, intensity {e_int:.1e}; refinement {e_ref:.1e}"))
}

fn bandwidth_threshold() -> Outcome {
    let mut c = oracle_cavity();
    c.retro_reflectivity_power = 1.0;
    c.window_reflectivity_power = WindowReflectivity::Constant(1.0);
    c.gain_peak_per_m = 0.0;
    let bw = core(pulse_bandwidth(&still(), &c, 0.0))?;
    ensure(bw == 0.0, || format!("bandwidth at threshold = {bw:e}"))?;
    let direct = core(bandwidth_from_loop_gain(0.1, 1.0))?;
    ensure(direct == 0.0, || format!("bandwidth_from_loop_gain(·, 1) = {direct:e}"))?;
    c.gain_peak_per_m = 0.1;
    match pulse_bandwidth(&still(), &c, 0.0) {
        Err(Error::Domain(_)) => {}
        other => return Err(format!("above threshold: expected domain error, got {other:?}")),
    }
    match bandwidth_from_loop_gain(0.1, 1.0 + 1e-12) {
        Err(Error::Domain(_)) => {}
        other => return Err(format!("loop gain 1 + 1e-12: expected domain error, got {other:?}")),
    }
    Ok("Δω_p = 0 exactly at loop gain 1; domain error above".into())
}

fn voigt_limits() -> Outcome {
    let lorentz = |d: f64, g: f64| 2.0 * g / (PI * (d * d + g * g));
    let gauss = |d: f64, s: f64| 2.0 * (-d * d / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
    let mut worst = 0.0_f64;
    for &d in &[0.0, 0.3, 1.0, 2.5, 5.0] {
        for sigma0 in [0.0, 1e-9] {
            let v = core(voigt(d, 1.0, sigma0))?;
            worst = worst.max((v - lorentz(d, 1.0)).abs() / lorentz(d, 1.0));
        }
    }
    for &d in &[0.0, 0.5, 1.0, 2.0, 3.0] {
        for gamma in [0.0, 1e-9] {
            let v = core(voigt(d, gamma, 1.0))?;
            worst = worst.max((v - gauss(d, 1.0)).abs() / gauss(d, 1.0));
        }
    }
    ensure(worst < 1e-6, || format!("limit error {worst:e}"))?;

    let (gamma, sigma0) = (0.4, 0.7);
    let f = |d: f64| voigt(d, gamma, sigma0).unwrap();
    let span = 1e5;
    let area = core(quad(f, -span, span, &[0.0], 1e-10, 1e-14))?;
    let tail = 2.0 * 2.0 * gamma / (PI * span);
    ensure((area + tail - 2.0).abs() <= 1e-3, || format!("area {area} (+ tail {tail:e})"))?;

    for &d in &[0.1, 0.77, 3.0, 42.0] {
        let (a, b) = (core(voigt(d, gamma, sigma0))?, core(voigt(-d, gamma, sigma0))?);
        ensure(a.to_bits() == b.to_bits(), || format!("voigt({d}) = {a} but voigt(−{d}) = {b}"))?;
    }
    Ok(format!("worst limit error {worst:.1e}; area {:.6}; evenness bitwise", area + tail))
}

fn kinetics_analytic() -> Outcome {
    let zero = TransportRates::default();
    let tr = core(integrate(
        &TransportState::ground(),
        &zero,
        &core(KaSeries::constant(1.0))?,
        1.0,
        0.01,
        &IntegratorOptions::default(),
    ))?;
    let f = tr.final_state().f_star;
    let expected = 1.0 - (-1.0_f64).exp();
    ensure((f - expected).abs() <= 1e-6, || format!("f_star(1) = {f}"))?;

    let mut worst = tr.max_balance_error();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let mut r = || rng.random_range(0.0..4.0);
        let rates = TransportRates {
            k_df: r(),
            k_dd: r(),
            k_vt: r(),
            k_vv: r(),
            k_se: r(),
            k_th: r(),
            k_w: r(),
            k_w1: r(),
            e_star: rng.random_range(0.0..=1.0),
            e_1: rng.random_range(0.0..=1.0),
        };
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let values: Vec<f64> = times.iter().map(|_| rng.random_range(0.0..5.0)).collect();
        let ka = core(KaSeries::new(times, values))?;
        let tr = core(integrate(&TransportState::ground(), &rates, &ka, 5.0, 0.005, &IntegratorOptions::default()))?;
        worst = worst.max(tr.max_balance_error());
    }
    ensure(worst < 1e-8, || format!("balance drift {worst:e}"))?;
    Ok(format!("f_star(1) = {f:.9}; worst balance drift {worst:.1e} over 51 trajectories"))
}

fn enrichment_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let total: f64 = rng.random_range(0.1..10.0);
        let target = total * rng.random_range(0.01..1.0);
        let scale = 2f64.powi(rng.random_range(-8..8));
        let same = EnrichmentInput {
            feed_target: target,
            feed_total: total,
            escaped_target: target * scale,
            escaped_total: total * scale,
        };
        let b = core(enrichment(&same))?;
        ensure(b == 1.0, || format!("equal abundances: β = {b:e}"))?;

        let esc_total: f64 = rng.random_range(0.1..10.0);
        let esc_target = esc_total * rng.random_range(0.01..1.0);
        let fwd = EnrichmentInput {
            feed_target: target,
            feed_total: total,
            escaped_target: esc_target,
            escaped_total: esc_total,
        };
        let swapped = EnrichmentInput {
            feed_target: esc_target,
            feed_total: esc_total,
            escaped_target: target,
            escaped_total: total,
        };
        let (b1, b2) = (core(enrichment(&fwd))?, core(enrichment(&swapped))?);
        let (num, den) = (esc_target * total, esc_total * target);
        ensure(b1 == num / den && b2 == den / num, || format!("swap: β = {b1}, swapped β = {b2}"))?;
    }
    Ok("β = 1 for equal abundances; swap exchanges numerator and denominator exactly".into())
}

fn demo_config() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/demo.toml")
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name != "manifest.json" {
            out.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn end_to_end_determinism() -> Outcome {
    let start = Instant::now();
    let loaded = load_config(&demo_config()).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    let mut manifests = Vec::new();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for i in 0..2 {
        let out = tmp.path().join(format!("run{i}"));
        let m = run_scenario(&RunRequest {
            loaded: &loaded,
            config_path: None,
            stage: Stage::Full,
            out_dir: &out,
            stage_input: &[],
        })
        .map_err(|e| e.to_string())?;
        manifests.push(m);
        runs.push(snapshot(&out)?);
    }
    for name in ["field", "spectrum", "ascent", "ka", "kinetics", "summary"] {
        ensure(manifests[0].outputs.contains_key(name), || format!("no '{name}' output"))?;
    }
    ensure(runs[0].keys().eq(runs[1].keys()), || "output file sets differ".into())?;
    for (name, bytes) in &runs[0] {
        ensure(runs[1][name] == *bytes, || format!("{name} differs between runs"))?;
    }
    let (a, b) = (&manifests[0], &manifests[1]);
    ensure(a.outputs == b.outputs && a.config_hash == b.config_hash && a.seed == b.seed, || {
        "manifests differ outside timestamps".into()
    })?;
    within(start, Duration::from_secs(600))?;
    Ok(format!("{} files byte-identical across two runs ({:.0?})", runs[0].len(), start.elapsed()))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("gradient exactness", gradient_exactness),
        ("unitarity", unitarity),
        ("Rabi oracle", rabi_oracle),
        ("discrimination demo", discrimination),
        ("pulse-train algebra", train_algebra),
        ("synthesis oracle", synthesis_oracle),
        ("bandwidth threshold", bandwidth_threshold),
        ("Voigt limits", voigt_limits),
        ("kinetics analytic case", kinetics_analytic),
        ("enrichment identities", enrichment_identities),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
