#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use selex_cli::{parse_config, run_scenario, CliResult, LoadedConfig, RunManifest, RunRequest, Stage};

pub fn demo_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/demo.toml")
}

pub fn demo_table() -> toml::Table {
    fs::read_to_string(demo_path()).unwrap().parse().unwrap()
}

pub fn set(table: &mut toml::Table, path: &str, value: impl Into<toml::Value>) {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().unwrap();
    let mut t = table;
    for k in keys {
        t = t
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .unwrap_or_else(|| panic!("{k} is not a table"));
    }
    t.insert(last.into(), value.into());
}

pub fn remove(table: &mut toml::Table, key: &str) {
    table.remove(key);
}

/// The demo scenario shortened to 10 ns and two ascent iterations.
pub fn fast_table() -> toml::Table {
    let mut t = demo_table();
    set(&mut t, "grids.time_horizon_s", 1.0e-8);
    set(&mut t, "ascent.max_iterations", 2);
    t
}

pub fn write_config(dir: &Path, table: &toml::Table) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, toml::to_string(table).unwrap()).unwrap();
    path
}

pub fn loaded(table: &toml::Table) -> CliResult<LoadedConfig> {
    let text = toml::to_string(table).unwrap();
    let config = parse_config(&text, Path::new("<test>"))?;
    Ok(LoadedConfig { config, hash: "test".into() })
}

pub fn run(loaded: &LoadedConfig, stage: Stage, out: &Path, inputs: &[PathBuf]) -> CliResult<RunManifest> {
    run_scenario(&RunRequest { loaded, config_path: None, stage, out_dir: out, stage_input: inputs })
}
