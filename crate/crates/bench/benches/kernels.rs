use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use selex_core::cavity::{
    synthesize_field, Absorber, CavityConfig, PztDrive, SynthesisOptions, TimeGrid, WindowReflectivity,
};
use selex_core::control::{gradient_field, random_field, Mixture};
use selex_core::kinetics::{integrate, IntegratorOptions, KaSeries, TransportRates, TransportState};
use selex_core::quantum::{propagate, QuantumComponent};
use selex_core::spectroscopy::{
    species_contribution, voigt, BranchIntensity, CrossSectionOptions, GasConditions, MolecularSpecies, VibrationalMode,
};

fn cavity() -> CavityConfig {
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
        pulse_period_s: 1e-7,
        jitter_mean_s: 15e-9,
        jitter_std_s: 0.0,
        field_amplitude_v_per_m: 100.0,
        flow_offset_m: 0.1,
        flow_width_m: 0.05,
    }
}

fn quantum(c: &mut Criterion) {
    let comp = QuantumComponent::two_level("a", 1.0, 1.0, 1.0);
    let field = random_field(0.05, 2000, 0.5, 1).unwrap();
    c.bench_function("propagate/2-level/2000", |b| b.iter(|| propagate(black_box(&comp), black_box(&field))));

    let mixture = Mixture::new(
        vec![QuantumComponent::two_level("a", 1.0, 1.0, 1.0), QuantumComponent::two_level("b", 1.1, 0.9, 1.0)],
        0,
    )
    .unwrap();
    let field = random_field(0.05, 500, 0.5, 2).unwrap();
    c.bench_function("gradient_field/2x2-level/500", |b| {
        b.iter(|| gradient_field(black_box(&mixture), black_box(&field)))
    });
}

fn cavity_field(c: &mut Criterion) {
    let cav = cavity();
    let drive = PztDrive::Harmonic { amplitude_m: 1e-3, angular_frequency_rad_s: 2e7 };
    let grid = TimeGrid::new(1e-9, 40).unwrap();
    let opts = SynthesisOptions::default();
    c.bench_function("synthesize_field/40", |b| {
        b.iter(|| synthesize_field(black_box(&cav), &drive, grid, &Absorber::none(), &opts))
    });
}

fn spectroscopy(c: &mut Criterion) {
    c.bench_function("voigt", |b| b.iter(|| voigt(black_box(0.7), black_box(0.3), black_box(1.1))));

    let species = MolecularSpecies {
        label: "a".into(),
        abundance: 1.0,
        modes: vec![
            VibrationalMode { frequency_hz: 1.0e9, degeneracy: 3, anharmonicity: 1e-3 },
            VibrationalMode { frequency_hz: 3.0e9, degeneracy: 1, anharmonicity: 2e-3 },
        ],
        transition: vec![1, 0],
        rotational_constant_hz: 1e6,
        coriolis_xi: 0.5,
        nu_max_hz: 1.5e9,
        stretch_xi_b: None,
        molar_mass_kg_mol: 0.349,
        reduced_mass_qq_kg_mol: 0.175,
        reduced_mass_qg_kg_mol: 0.0038,
        band_intensity: BranchIntensity { p: 2e-53, q: 2e-53, r: 2e-53 },
        saturation_intensity_w_m2: 1e3,
    };
    let cond = GasConditions {
        pressure_pa: 10.0,
        temperature_k: 0.05,
        molar_fraction: 0.05,
        collision_qq_m2: 8e-19,
        collision_qg_m2: 5e-19,
    };
    let grid: Vec<f64> = (0..400).map(|i| 0.001 + i as f64 * 2.5e-4).collect();
    let opts = CrossSectionOptions::default();
    c.bench_function("species_contribution/400", |b| {
        b.iter(|| species_contribution(black_box(&species), &cond, &grid, 10.0, &opts))
    });
}

fn kinetics(c: &mut Criterion) {
    let rates = TransportRates {
        k_df: 1.0,
        k_dd: 2.0,
        k_vt: 1.0,
        k_vv: 0.5,
        k_se: 0.1,
        k_th: 2.0,
        k_w: 1.0,
        k_w1: 1.0,
        e_star: 0.5,
        e_1: 0.8,
    };
    let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
    let values: Vec<f64> = times.iter().map(|t| 1.0 + (3.0 * t).sin().abs()).collect();
    let ka = KaSeries::new(times, values).unwrap();
    c.bench_function("integrate/1000", |b| {
        b.iter_batched(
            TransportState::ground,
            |s| integrate(&s, &rates, &ka, 10.0, 0.01, &IntegratorOptions::default()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, quantum, cavity_field, spectroscopy, kinetics);
criterion_main!(benches);
