//! Output directory handling: atomic file writes, field encodings and the
//! run manifest that lists every file with its SHA-256.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use spectral_basis::mesh::write_ply;
use spectral_basis::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ply,
    Json,
    Pgm,
}

#[derive(Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub mesh: Option<String>,
    pub scheme: String,
    pub mass: String,
    pub parameters: BTreeMap<String, Value>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub files: Vec<FileRecord>,
}

/// Collects the files of one run in an output directory.
pub struct Output {
    dir: PathBuf,
    formats: BTreeSet<Format>,
    pub manifest: Manifest,
}

impl Output {
    pub fn new(dir: &Path, formats: BTreeSet<Format>, manifest: Manifest) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats,
            manifest,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameter serialises");
        self.manifest.parameters.insert(key.to_string(), v);
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.manifest.residuals.insert(key.to_string(), value);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.manifest.warnings.push(msg);
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.manifest.timings.entry(stage.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
        out
    }

    /// Writes `name` via a temporary file in the same directory and a rename,
    /// so readers never see a partial file.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir, name, bytes)?;
        self.manifest.files.push(FileRecord {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Writes one field in every requested encoding; CSV when none applies.
    pub fn field(&mut self, stem: &str, values: &[f64], mesh: &TriangleMesh) -> Result<()> {
        let any = [Format::Csv, Format::Ply, Format::Json].iter().any(|f| self.wants(*f));
        if self.wants(Format::Csv) || !any {
            self.write(&format!("{stem}.csv"), field_csv(values).as_bytes())?;
        }
        if self.wants(Format::Ply) {
            let colors = ramp(values);
            let mut buf = Vec::new();
            write_ply(mesh, Some(&colors), &mut buf)?;
            self.write(&format!("{stem}.ply"), &buf)?;
        }
        if self.wants(Format::Json) {
            self.write_json(&format!("{stem}.json"), &values)?;
        }
        Ok(())
    }

    /// Writes `manifest.json`. The manifest is not listed in itself.
    pub fn finish(self) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(&self.manifest)?;
        text.push(b'\n');
        write_atomic(&self.dir, "manifest.json", &text)?;
        Ok(self.dir.join("manifest.json"))
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).context("creating temporary file")?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", target.display()))?;
    Ok(())
}

/// `vertex_id,value` with shortest round-trip formatting.
pub fn field_csv(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    s.push_str("vertex_id,value\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(s, "{i},{v}").expect("writing to a string");
    }
    s
}

/// Maps `[min, max]` affinely onto a blue-to-red ramp.
pub fn ramp(values: &[f64]) -> Vec<[u8; 3]> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            let u = if span > 0.0 { (v - lo) / span } else { 0.5 };
            let r = (255.0 * u).round() as u8;
            [r, 0, 255 - r]
        })
        .collect()
}

/// Reads a `vertex_id,value` CSV back into values ordered by vertex id.
pub fn read_field_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line.starts_with("vertex_id")) {
            continue;
        }
        let (i, v) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected 'vertex_id,value'", path.display(), k + 1))?;
        let i: usize = i.trim().parse().with_context(|| format!("{}:{}: bad vertex id", path.display(), k + 1))?;
        let v: f64 = v.trim().parse().with_context(|| format!("{}:{}: bad value", path.display(), k + 1))?;
        pairs.push((i, v));
    }
    pairs.sort_by_key(|p| p.0);
    if pairs.iter().enumerate().any(|(k, p)| p.0 != k) {
        anyhow::bail!("{}: vertex ids must be 0..n without gaps", path.display());
    }
    Ok(pairs.into_iter().map(|p| p.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let values = vec![0.1, -1e-300, 1.0 / 3.0, 12345.678];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, field_csv(&values)).unwrap();
        assert_eq!(read_field_csv(&p).unwrap(), values);
    }

    #[test]
    fn ramp_runs_blue_to_red() {
        let c = ramp(&[0.0, 0.5, 1.0]);
        assert_eq!(c[0], [0, 0, 255]);
        assert_eq!(c[2], [255, 0, 0]);
        assert_eq!(c[1][0] as u16 + c[1][2] as u16, 255);
    }
}
