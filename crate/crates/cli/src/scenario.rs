//! Stage orchestration: synthesis → spectrum → optimization → kinetics.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use selex_core::cavity::{synthesize_field, Absorber, PztDrive, SynthesizedField};
use selex_core::control::{ascend, ascend_drive, populations, random_field, AscentReport, DriveSynthesis};
use selex_core::kinetics::{enrichment, excitation_rate, integrate, EnrichmentInput, Trajectory};
use selex_core::spectroscopy::{species_contribution, CrossSectionSpectrum, MolecularSpecies};

use crate::config::{Control, InitialField, LoadedConfig, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, read_json, write_json, Scalars, Table};
use crate::plot::{emit_plot_data, PlotKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Synthesize,
    Spectrum,
    Optimize,
    Kinetics,
    Full,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Synthesize => "synthesize",
            Stage::Spectrum => "spectrum",
            Stage::Optimize => "optimize",
            Stage::Kinetics => "kinetics",
            Stage::Full => "full",
        }
    }
}

/// Everything needed to reproduce a run, written last as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub stage: Stage,
    pub config_path: Option<String>,
    /// SHA-256 of the configuration bytes.
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub stages_completed: Vec<Stage>,
    /// Output name → file name inside the output directory.
    pub outputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn output_path(&self, dir: &Path, name: &str) -> Option<PathBuf> {
        self.outputs.get(name).map(|f| dir.join(f))
    }
}

/// Deterministic run results, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub stop_reason: Option<String>,
    pub scalars: Scalars,
    pub warnings: Vec<String>,
}

pub struct RunRequest<'a> {
    pub loaded: &'a LoadedConfig,
    pub config_path: Option<&'a Path>,
    pub stage: Stage,
    pub out_dir: &'a Path,
    /// Directories holding outputs of earlier runs, searched in order.
    pub stage_input: &'a [PathBuf],
}

/// Cross section on the configured wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumArtifact {
    pub wavenumbers_cm: Vec<f64>,
    pub total_m2: Vec<f64>,
    /// Per-molecule cross section of each species, `contribution/x_k`.
    pub per_species: Vec<(String, Vec<f64>)>,
}

impl SpectrumArtifact {
    pub fn total(&self) -> CliResult<CrossSectionSpectrum> {
        Ok(CrossSectionSpectrum::new(self.wavenumbers_cm.clone(), self.total_m2.clone())?)
    }

    fn table(&self) -> Table {
        let mut header = vec!["wavenumber_cm".to_string(), "sigma_m2".to_string()];
        header.extend(self.per_species.iter().map(|(l, _)| format!("sigma_{l}_m2")));
        let mut t = Table::new(header);
        for (i, k) in self.wavenumbers_cm.iter().enumerate() {
            let mut row = vec![*k, self.total_m2[i]];
            row.extend(self.per_species.iter().map(|(_, s)| s[i]));
            t.push_numeric(&row);
        }
        t
    }

    fn read(path: &Path, config: &ScenarioConfig) -> CliResult<Self> {
        let t = Table::read(path)?;
        let per_species = config
            .species
            .iter()
            .map(|s| Ok((s.label.clone(), t.column(&format!("sigma_{}_m2", s.label), path)?)))
            .collect::<CliResult<_>>()?;
        Ok(Self {
            wavenumbers_cm: t.column("wavenumber_cm", path)?,
            total_m2: t.column("sigma_m2", path)?,
            per_species,
        })
    }
}

fn compute_spectrum(c: &ScenarioConfig, intensity: f64) -> CliResult<SpectrumArtifact> {
    let grid = c.grids.wavenumbers();
    let mut total = vec![0.0; grid.len()];
    let mut per_species = Vec::new();
    for s in &c.species {
        let single = MolecularSpecies { abundance: 1.0, ..s.clone() };
        let per_molecule = species_contribution(&single, &c.conditions, &grid, intensity, &c.spectroscopy)?;
        total.iter_mut().zip(&per_molecule).for_each(|(a, b)| *a += s.abundance * b);
        per_species.push((s.label.clone(), per_molecule));
    }
    Ok(SpectrumArtifact { wavenumbers_cm: grid, total_m2: total, per_species })
}

struct Run<'a> {
    config: &'a ScenarioConfig,
    out_dir: &'a Path,
    stage_input: &'a [PathBuf],
    outputs: BTreeMap<String, String>,
    summary: Summary,
    completed: Vec<Stage>,
    field: Option<SynthesizedField>,
    spectrum: Option<SpectrumArtifact>,
    optimized_drive: Option<PztDrive>,
}

impl Run<'_> {
    fn write_table(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let file = format!("{name}.csv");
        table.write(&self.out_dir.join(&file))?;
        self.outputs.insert(name.to_string(), file);
        Ok(())
    }

    fn find_upstream(&self, file: &str) -> Option<PathBuf> {
        self.stage_input.iter().map(|d| d.join(file)).find(|p| p.is_file())
    }

    /// A persisted upstream artifact; `None` when no stage input was given.
    fn upstream(&self, file: &str) -> CliResult<Option<PathBuf>> {
        if self.stage_input.is_empty() {
            return Ok(None);
        }
        self.find_upstream(file)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("no stage input directory contains {file}")))
    }

    fn synthesize(&mut self) -> CliResult<()> {
        let c = self.config;
        let field = synthesize_field(&c.cavity, &c.drive, c.time_grid()?, &Absorber::none(), &c.synthesis)?;
        let mut t = Table::new(["t_s", "field_v_per_m", "intensity_w_m2", "wavelength_m", "bandwidth_rad_s"]);
        for (n, info) in field.info.iter().enumerate() {
            t.push_numeric(&[
                info.time,
                field.width_averaged_field[n],
                field.width_averaged_intensity[n],
                info.wavelength,
                info.bandwidth,
            ]);
        }
        self.write_table("field", &t)?;
        let peak = field.width_averaged_intensity.iter().copied().fold(0.0, f64::max);
        self.summary.scalars.insert("field_peak_intensity_w_m2".into(), peak);
        self.summary.scalars.insert("field_final_intensity_w_m2".into(), field.final_intensity());
        self.field = Some(field);
        self.completed.push(Stage::Synthesize);
        Ok(())
    }

    /// `I(τ_p)` from the field of this run, a persisted `field.csv`, or a fresh synthesis.
    fn saturation_intensity(&mut self) -> CliResult<f64> {
        if let Some(f) = &self.field {
            return Ok(f.final_intensity());
        }
        if let Some(p) = self.upstream("field.csv")? {
            let col = Table::read(&p)?.column("intensity_w_m2", &p)?;
            return col.last().copied().ok_or_else(|| CliError::Usage(format!("{} is empty", p.display())));
        }
        let c = self.config;
        let field = synthesize_field(&c.cavity, &c.drive, c.time_grid()?, &Absorber::none(), &c.synthesis)?;
        Ok(field.final_intensity())
    }

    fn spectrum(&mut self) -> CliResult<()> {
        let intensity = self.saturation_intensity()?;
        let art = compute_spectrum(self.config, intensity)?;
        self.write_table("spectrum", &art.table())?;
        let peak = art.total_m2.iter().copied().fold(0.0, f64::max);
        self.summary.scalars.insert("spectrum_peak_sigma_m2".into(), peak);
        self.summary.scalars.insert("spectrum_saturation_input_w_m2".into(), intensity);
        self.spectrum = Some(art);
        self.completed.push(Stage::Spectrum);
        Ok(())
    }

    fn spectrum_artifact(&mut self) -> CliResult<SpectrumArtifact> {
        if let Some(s) = &self.spectrum {
            return Ok(s.clone());
        }
        if let Some(p) = self.upstream("spectrum.csv")? {
            return SpectrumArtifact::read(&p, self.config);
        }
        let intensity = self.saturation_intensity()?;
        compute_spectrum(self.config, intensity)
    }

    fn drive_synthesis(&mut self) -> CliResult<DriveSynthesis> {
        let spectrum = self.spectrum_artifact()?;
        let c = self.config;
        Ok(DriveSynthesis {
            cavity: c.cavity.clone(),
            time_grid: c.time_grid()?,
            absorber: Absorber::Spectrum(spectrum.total()?),
            options: c.absorbing_synthesis(),
        })
    }

    fn optimize(&mut self) -> CliResult<()> {
        let c = self.config;
        let mixture = c.mixture()?;
        let synthesis = self.drive_synthesis()?;
        let report: AscentReport = match c.optimize.control {
            Control::Drive => ascend_drive(&mixture, &c.drive, &synthesis, &c.ascent)?,
            Control::Field => {
                let start = match c.optimize.initial_field {
                    InitialField::Synthesized => synthesis.field(&c.drive)?,
                    InitialField::Random => {
                        let g = c.time_grid()?;
                        random_field(g.dt, g.len, c.optimize.random_amplitude_v_per_m, c.ascent.seed)?
                    }
                };
                ascend(&mixture, &start, &c.ascent)?
            }
        };

        let mut t = Table::new(["iteration", "objective", "gradient_sup_norm", "step_size"]);
        for (i, f) in report.objective_history.iter().enumerate() {
            let step = if i == 0 { String::new() } else { fmt_f64(report.step_history[i - 1]) };
            t.push(vec![i.to_string(), fmt_f64(*f), fmt_f64(report.gradient_norm_history[i]), step]);
        }
        self.write_table("ascent", &t)?;

        let mut t = Table::new(["t_s", "field_v_per_m"]);
        for (n, e) in report.final_field.samples.iter().enumerate() {
            t.push_numeric(&[report.final_field.time(n), *e]);
        }
        self.write_table("optimized_field", &t)?;
        if let Some(drive) = &report.final_drive {
            write_json(&self.out_dir.join("optimized_drive.json"), drive)?;
            self.outputs.insert("optimized_drive".into(), "optimized_drive.json".into());
        }

        let s = &mut self.summary.scalars;
        s.insert("objective_initial".into(), report.objective_history[0]);
        s.insert("objective_final".into(), report.final_objective());
        s.insert("ascent_iterations".into(), report.iterations_used as f64);
        let (lo, hi) = mixture.bounds();
        s.insert("objective_lower_bound".into(), lo);
        s.insert("objective_upper_bound".into(), hi);
        for (comp, p) in mixture.components.iter().zip(populations(&mixture, &report.final_field)?) {
            s.insert(format!("population_{}", comp.label), p);
        }
        self.summary.stop_reason = Some(
            serde_json::to_value(report.stop_reason)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        );
        self.optimized_drive = report.final_drive;
        self.completed.push(Stage::Optimize);
        Ok(())
    }

    fn kinetics_drive(&self) -> CliResult<PztDrive> {
        if let Some(d) = &self.optimized_drive {
            return Ok(d.clone());
        }
        if let Some(p) = self.find_upstream("optimized_drive.json") {
            return read_json(&p);
        }
        Ok(self.config.drive.clone())
    }

    fn kinetics(&mut self) -> CliResult<()> {
        let c = self.config;
        let spectrum = self.spectrum_artifact()?;
        let drive = self.kinetics_drive()?;
        let field = synthesize_field(
            &c.cavity,
            &drive,
            c.time_grid()?,
            &Absorber::Spectrum(spectrum.total()?),
            &c.absorbing_synthesis(),
        )?;
        let initial = c.initial_fractions();
        let mut runs: Vec<(String, f64, Trajectory)> = Vec::new();
        let mut ka_table_cols = Vec::new();
        for ((label, sigma), s) in spectrum.per_species.iter().zip(&c.species) {
            let absorber =
                Absorber::Spectrum(CrossSectionSpectrum::new(spectrum.wavenumbers_cm.clone(), sigma.clone())?);
            let ka = excitation_rate(&c.cavity, &field, &absorber, c.beam_radius_m)?;
            let scalars = &mut self.summary.scalars;
            scalars.insert(format!("ka_peak_{label}_per_s"), ka.rate.iter().copied().fold(0.0, f64::max));
            scalars.insert(format!("ka_imaginary_ratio_{label}"), ka.max_imaginary_ratio);
            scalars.insert(format!("ka_clamped_samples_{label}"), ka.clamped_samples as f64);
            let tr = integrate(
                &initial,
                &c.rates,
                &ka.to_series()?,
                c.kinetics_horizon(),
                c.kinetics_step(),
                &c.kinetics.integrator,
            )?;
            ka_table_cols.push((label.clone(), ka));
            runs.push((label.clone(), s.abundance, tr));
        }

        let mut header = vec!["t_s".to_string()];
        header.extend(ka_table_cols.iter().map(|(l, _)| format!("ka_{l}_per_s")));
        let mut t = Table::new(header);
        for (n, time) in ka_table_cols[0].1.times.iter().enumerate() {
            let mut row = vec![*time];
            row.extend(ka_table_cols.iter().map(|(_, k)| k.rate[n]));
            t.push_numeric(&row);
        }
        self.write_table("ka", &t)?;

        let mut t = Table::new(["species", "t_s", "f_m", "f_star", "f_epi", "f_d", "ka_per_s"]);
        for (label, _, tr) in &runs {
            for (i, s) in tr.states.iter().enumerate() {
                let mut row = vec![label.clone()];
                row.extend([tr.times[i], s.f_m, s.f_star, s.f_epi, s.f_d, tr.ka[i]].map(fmt_f64));
                t.push(row);
            }
        }
        self.write_table("kinetics", &t)?;

        let target = &c.mixture.target;
        let escaped = |x: f64, tr: &Trajectory| x * (1.0 - tr.final_state().f_d);
        let (_, x_t, tr_t) = runs.iter().find(|(l, _, _)| l == target).expect("target species validated");
        let beta = enrichment(&EnrichmentInput {
            feed_target: *x_t,
            feed_total: runs.iter().map(|r| r.1).sum(),
            escaped_target: escaped(*x_t, tr_t),
            escaped_total: runs.iter().map(|(_, x, tr)| escaped(*x, tr)).sum(),
        })?;
        let s = &mut self.summary.scalars;
        s.insert("beta".into(), beta);
        s.insert("max_balance_error".into(), runs.iter().map(|r| r.2.max_balance_error()).fold(0.0, f64::max));
        for (label, _, tr) in &runs {
            let f = tr.final_state();
            s.insert(format!("final_f_star_{label}"), f.f_star);
            s.insert(format!("final_f_d_{label}"), f.f_d);
        }
        self.completed.push(Stage::Kinetics);
        Ok(())
    }

    fn execute(&mut self, stage: Stage) -> CliResult<()> {
        match stage {
            Stage::Synthesize => self.synthesize(),
            Stage::Spectrum => self.spectrum(),
            Stage::Optimize => self.optimize(),
            Stage::Kinetics => self.kinetics(),
            Stage::Full => {
                for s in [Stage::Synthesize, Stage::Spectrum, Stage::Optimize, Stage::Kinetics] {
                    self.execute(s).map_err(|e| self.wrap(s, e))?;
                }
                Ok(())
            }
        }
    }

    fn wrap(&self, stage: Stage, e: CliError) -> CliError {
        match e {
            CliError::Stage { .. } => e,
            e => CliError::Stage {
                stage: stage.name(),
                config_hash: self.summary.config_hash.clone(),
                source: Box::new(e),
            },
        }
    }
}

/// Exclusive claim on an output directory, released on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> CliResult<Self> {
        let path = dir.join(".selex.lock");
        OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                CliError::Usage(format!("output directory {} is in use ({} exists)", dir.display(), path.display()))
            } else {
                CliError::io(&path, e)
            }
        })?;
        Ok(Self(path))
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs `stage`, writes its CSV outputs, plot tables, `summary.json` and
/// finally `manifest.json`.
pub fn run_scenario(req: &RunRequest<'_>) -> CliResult<RunManifest> {
    let started_at = timestamp();
    let config = &req.loaded.config;
    fs::create_dir_all(req.out_dir).map_err(|e| CliError::io(req.out_dir, e))?;
    let _lock = DirLock::acquire(req.out_dir)?;

    let warnings = config.warnings();
    let mut run = Run {
        config,
        out_dir: req.out_dir,
        stage_input: req.stage_input,
        outputs: BTreeMap::new(),
        summary: Summary {
            stage: req.stage.name().into(),
            config_hash: req.loaded.hash.clone(),
            seed: config.seed,
            warnings: warnings.clone(),
            ..Default::default()
        },
        completed: Vec::new(),
        field: None,
        spectrum: None,
        optimized_drive: None,
    };
    run.execute(req.stage).map_err(|e| run.wrap(req.stage, e))?;

    write_json(&req.out_dir.join("summary.json"), &run.summary)?;
    run.outputs.insert("summary".into(), "summary.json".into());

    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        stage: req.stage,
        config_path: req.config_path.map(|p| p.display().to_string()),
        config_hash: req.loaded.hash.clone(),
        seed: config.seed,
        started_at,
        finished_at: String::new(),
        stages_completed: run.completed.clone(),
        outputs: run.outputs.clone(),
        warnings,
    };
    for kind in PlotKind::ALL {
        if let Ok(table) = emit_plot_data(&manifest, req.out_dir, kind) {
            let file = format!("plot_{}.csv", kind.name());
            table.write(&req.out_dir.join(&file))?;
            manifest.outputs.insert(format!("plot_{}", kind.name()), file);
        }
    }
    manifest.finished_at = timestamp();
    write_json(&req.out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
