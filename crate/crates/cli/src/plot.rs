//! Long-format `series,x,y` tables for plotting, rebuilt from the CSV
//! outputs listed in a manifest.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Table};
use crate::scenario::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Width-averaged intensity against time.
    Intensity,
    /// Total and per-species cross sections against wavenumber.
    CrossSection,
    /// Objective against iteration.
    Objective,
    /// Kinetic fractions against time, four series per species.
    Fractions,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] =
        [PlotKind::Intensity, PlotKind::CrossSection, PlotKind::Objective, PlotKind::Fractions];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Intensity => "intensity",
            PlotKind::CrossSection => "cross_section",
            PlotKind::Objective => "objective",
            PlotKind::Fractions => "fractions",
        }
    }

    fn source(self) -> &'static str {
        match self {
            PlotKind::Intensity => "field",
            PlotKind::CrossSection => "spectrum",
            PlotKind::Objective => "ascent",
            PlotKind::Fractions => "kinetics",
        }
    }
}

fn push(out: &mut Table, series: &str, xs: &[f64], ys: &[f64]) {
    for (x, y) in xs.iter().zip(ys) {
        out.push(vec![series.to_string(), fmt_f64(*x), fmt_f64(*y)]);
    }
}

/// Builds the plot table for `kind` from the outputs of a finished run in `dir`.
pub fn emit_plot_data(manifest: &RunManifest, dir: &Path, kind: PlotKind) -> CliResult<Table> {
    let path = manifest.output_path(dir, kind.source()).ok_or_else(|| {
        CliError::Usage(format!("run has no '{}' output for the {} plot", kind.source(), kind.name()))
    })?;
    let src = Table::read(&path)?;
    let mut out = Table::new(["series", "x", "y"]);
    match kind {
        PlotKind::Intensity => {
            push(&mut out, "intensity_w_m2", &src.column("t_s", &path)?, &src.column("intensity_w_m2", &path)?);
        }
        PlotKind::CrossSection => {
            let x = src.column("wavenumber_cm", &path)?;
            for name in src.header.iter().skip(1) {
                push(&mut out, name, &x, &src.column(name, &path)?);
            }
        }
        PlotKind::Objective => {
            push(&mut out, "objective", &src.column("iteration", &path)?, &src.column("objective", &path)?);
        }
        PlotKind::Fractions => {
            let k = src
                .column_index("species")
                .ok_or_else(|| CliError::Parse { path: path.clone(), message: "missing column 'species'".into() })?;
            let mut labels: Vec<String> = Vec::new();
            for r in &src.rows {
                if !labels.contains(&r[k]) {
                    labels.push(r[k].clone());
                }
            }
            for label in labels {
                let rows: Vec<Vec<String>> = src.rows.iter().filter(|r| r[k] == label).cloned().collect();
                let part = Table { header: src.header.clone(), rows };
                let t = part.column("t_s", &path)?;
                for f in ["f_m", "f_star", "f_epi", "f_d"] {
                    push(&mut out, &format!("{label}/{f}"), &t, &part.column(f, &path)?);
                }
            }
        }
    }
    Ok(out)
}
