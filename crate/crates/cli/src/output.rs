use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    S(&'static str),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::S(v)
    }
}

fn push_cell(out: &mut String, c: &Cell) {
    match c {
        // 17 significant digits
        Cell::F(v) => write!(out, "{v:.16e}").unwrap(),
        Cell::I(v) => write!(out, "{v}").unwrap(),
        Cell::S(v) => out.push_str(v),
    }
}

pub fn csv_row(cells: &[Cell]) -> String {
    let mut s = String::new();
    for (k, c) in cells.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        push_cell(&mut s, c);
    }
    s.push('\n');
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r);
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Provenance record written next to every output as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: Option<PathBuf>,
    pub subcommand: String,
    pub parameters: Value,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    /// Not part of the reproducible output.
    pub wall_clock_seconds: f64,
}

pub struct Run {
    pub config: Option<PathBuf>,
    pub subcommand: &'static str,
    pub parameters: Value,
    started: Instant,
}

impl Run {
    pub fn new(subcommand: &'static str, config: Option<&Path>, parameters: Value) -> Self {
        Self {
            config: config.map(Path::to_path_buf),
            subcommand,
            parameters,
            started: Instant::now(),
        }
    }

    pub fn finish(&self, outputs: &[&Path]) -> Result<()> {
        let manifest = RunManifest {
            config: self.config.clone(),
            subcommand: self.subcommand.to_string(),
            parameters: self.parameters.clone(),
            outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        for out in outputs {
            write_json(&manifest_path(out), &manifest)?;
        }
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Companion gnuplot script `<out>.gp` plotting columns `x:y` of a CSV.
pub fn write_gnuplot(out: &Path, title: &str, x: usize, y: usize, xlabel: &str, ylabel: &str) -> Result<PathBuf> {
    let mut s = out.as_os_str().to_owned();
    s.push(".gp");
    let path = PathBuf::from(s);
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let script = format!(
        "set datafile separator ','\nset key off\nset title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nplot '{name}' every ::1 using {x}:{y} with points pt 7 ps 0.3\n"
    );
    fs::write(&path, script).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
