//! CSV and JSON writers for curves, constellation snapshots and run
//! manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytic::CoverageCurve;
use crate::constellation::Constellation;
use crate::error::Result;

/// Writes `rows` as CSV with a header taken from the field names.
pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// One line of a coverage curve file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub threshold_db: f64,
    pub value: f64,
    /// Empty for exact curves.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

pub fn curve_rows(curve: &CoverageCurve) -> Vec<CurveRow> {
    curve
        .thresholds
        .iter()
        .zip(&curve.values)
        .enumerate()
        .map(|(i, (&t, &value))| {
            let ci = curve.intervals.as_ref().map(|ci| ci[i]);
            CurveRow {
                threshold_db: crate::linear_to_db(t),
                value,
                ci_low: ci.map(|c| c.0),
                ci_high: ci.map(|c| c.1),
            }
        })
        .collect()
}

/// Writes `threshold_db,value,ci_low,ci_high`.
pub fn write_curve<W: Write>(w: W, curve: &CoverageCurve) -> Result<()> {
    write_rows(w, &curve_rows(curve))
}

pub fn write_curve_csv(path: &Path, curve: &CoverageCurve) -> Result<()> {
    write_curve(fs::File::create(path)?, curve)
}

/// One satellite of a constellation snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub orbit_id: usize,
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub omega_rad: f64,
    pub x_km: f64,
    pub y_km: f64,
    pub z_km: f64,
}

pub fn snapshot_rows(c: &Constellation) -> Vec<SnapshotRow> {
    c.positions()
        .map(|(i, omega, p)| {
            let o = &c.orbits()[i];
            SnapshotRow { orbit_id: i, theta_rad: o.theta, phi_rad: o.phi, omega_rad: omega, x_km: p.x, y_km: p.y, z_km: p.z }
        })
        .collect()
}

/// Writes `orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km`, one row
/// per satellite. An empty constellation gives the header alone.
pub fn write_snapshot<W: Write>(mut w: W, c: &Constellation) -> Result<()> {
    let rows = snapshot_rows(c);
    if rows.is_empty() {
        writeln!(w, "orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km")?;
        return Ok(());
    }
    write_rows(w, &rows)
}

pub fn write_snapshot_csv(path: &Path, c: &Constellation) -> Result<()> {
    write_snapshot(fs::File::create(path)?, c)
}

/// What is needed to rerun the command that produced an output file.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub replicates: u64,
    pub wall_time_s: f64,
    pub config: C,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: impl Into<String>, seed: u64, replicates: u64, wall_time_s: f64, config: C) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            replicates,
            wall_time_s,
            config,
        }
    }
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the manifest next to `output`, returning its path.
pub fn write_manifest<C: Serialize>(output: &Path, manifest: &Manifest<C>) -> Result<PathBuf> {
    let path = manifest_path(output);
    let mut f = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    writeln!(f)?;
    Ok(path)
}
