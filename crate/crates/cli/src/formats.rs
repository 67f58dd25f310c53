//! Persistence formats.
//!
//! Snapshot binary layout (little-endian throughout):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ASFD"
//! 4       1     version (1)
//! 5       1     manifold kind (0 = torus1d, 1 = torus2d, 2 = sphere2d)
//! 6       1     dimension n
//! 7       4     resolution (u32)
//! 11      8     time (f64)
//! 19      8·m   nodal values, row-major grid order
//! ```
//!
//! A JSON sidecar repeats the header human-readably. The diagnostics CSV
//! has a fixed column order and one row per accepted step; floats are
//! written as full-precision scientific literals so reruns are
//! byte-identical.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use asq_core::dynamics::{DiagnosticsRecord, Snapshot, TerminationStatus};
use asq_core::{ManifoldKind, ManifoldSpec, NodalField};

use crate::error::{CliError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"ASFD";
pub const SNAPSHOT_VERSION: u8 = 1;

fn kind_to_byte(kind: ManifoldKind) -> u8 {
    match kind {
        ManifoldKind::Torus1D => 0,
        ManifoldKind::Torus2D => 1,
        ManifoldKind::Sphere2D => 2,
    }
}

fn kind_from_byte(b: u8) -> Result<ManifoldKind> {
    match b {
        0 => Ok(ManifoldKind::Torus1D),
        1 => Ok(ManifoldKind::Torus2D),
        2 => Ok(ManifoldKind::Sphere2D),
        other => Err(CliError::Config(format!("unknown manifold kind byte {other}"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub magic: String,
    pub version: u8,
    pub kind: ManifoldKind,
    pub dimension: u8,
    pub resolution: u32,
    pub time: f64,
    pub values_len: usize,
}

pub fn write_snapshot(path: &Path, field: &NodalField, time: f64) -> Result<()> {
    let m = field.manifold();
    let mut buf = Vec::with_capacity(19 + 8 * field.values().len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.push(SNAPSHOT_VERSION);
    buf.push(kind_to_byte(m.kind));
    buf.push(m.dimension() as u8);
    buf.extend_from_slice(&(m.resolution as u32).to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;

    let sidecar = SnapshotHeader {
        magic: "ASFD".into(),
        version: SNAPSHOT_VERSION,
        kind: m.kind,
        dimension: m.dimension() as u8,
        resolution: m.resolution as u32,
        time,
        values_len: field.values().len(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("header serializes");
    std::fs::write(path.with_extension("json"), json)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(f64, NodalField)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 19 || &bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(CliError::Config(format!("{} is not a snapshot file", path.display())));
    }
    if bytes[4] != SNAPSHOT_VERSION {
        return Err(CliError::Config(format!("unsupported snapshot version {}", bytes[4])));
    }
    let kind = kind_from_byte(bytes[5])?;
    let dim = bytes[6];
    let resolution = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let time = f64::from_le_bytes(bytes[11..19].try_into().unwrap());
    let m = ManifoldSpec::new(kind, resolution)?;
    if dim as usize != m.dimension() {
        return Err(CliError::Config("snapshot dimension disagrees with kind".into()));
    }
    let want = m.grid_len();
    let payload = &bytes[19..];
    if payload.len() != 8 * want {
        return Err(CliError::Config(format!(
            "snapshot payload holds {} values, grid needs {want}",
            payload.len() / 8
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((time, NodalField::new(m, values)?))
}

pub const DIAGNOSTICS_HEADER: &str = "t,l1,l2,linf,min_val,hdot,grad_sup,hs_norm,tail_fraction";

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 64);
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.l1),
            fmt(r.l2),
            fmt(r.linf),
            fmt(r.min_val),
            fmt(r.hdot_half_alpha),
            fmt(r.grad_sup),
            fmt(r.hs_norm),
            fmt(r.tail_fraction)
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DIAGNOSTICS_HEADER => {}
        _ => return Err(CliError::Config(format!("{} is not a diagnostics CSV", path.display()))),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CliError::Config(format!("row {}: {e}", i + 2)))?;
        if cols.len() != 9 {
            return Err(CliError::Config(format!("row {} has {} columns", i + 2, cols.len())));
        }
        records.push(DiagnosticsRecord {
            t: cols[0],
            l1: cols[1],
            l2: cols[2],
            linf: cols[3],
            min_val: cols[4],
            hdot_half_alpha: cols[5],
            grad_sup: cols[6],
            hs_norm: cols[7],
            tail_fraction: cols[8],
        });
    }
    Ok(records)
}

/// Run manifest: content-addressed config, environment, outcome, and the
/// exact output inventory. Every referenced file exists on success.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub manifold: ManifoldSpec,
    pub code_version: String,
    pub wall_clock_seconds: f64,
    pub termination: TerminationStatus,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub config: crate::config::RunConfig,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Load every snapshot of a run directory, sorted by time, re-expanded
/// into spectral form.
pub fn load_snapshots(run_dir: &Path) -> Result<Vec<Snapshot>> {
    let snap_dir = run_dir.join("snapshots");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&snap_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "bin").unwrap_or(false))
        .collect();
    paths.sort();
    let mut snaps = Vec::with_capacity(paths.len());
    for p in paths {
        let (t, field) = read_snapshot(&p)?;
        snaps.push(Snapshot {
            t,
            theta: field.analyze().map_err(CliError::from)?,
        });
    }
    snaps.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite times"));
    Ok(snaps)
}
