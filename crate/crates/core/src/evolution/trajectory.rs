use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::spectral::{Grid, SpectralField};

pub const DIAGNOSTICS_CSV_HEADER: &str = "t,mean,l2,hs,i2";
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"ILWSNAP1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mean: f64,
    pub l2: f64,
    pub hs: f64,
    pub i2: Option<f64>,
    pub i2_corrected: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowUp {
    pub time: f64,
    pub last_healthy: f64,
}

/// Time-ordered snapshots with per-snapshot diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    diagnostics: Vec<Diagnostics>,
    hs_order: f64,
    pub blow_up: Option<BlowUp>,
}

impl Trajectory {
    pub(crate) fn new(hs_order: f64) -> Self {
        Self {
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            hs_order,
            blow_up: None,
        }
    }

    pub(crate) fn push(&mut self, snapshot: Snapshot, diagnostics: Diagnostics) {
        debug_assert!(self.snapshots.last().is_none_or(|s| s.time < snapshot.time));
        self.snapshots.push(snapshot);
        self.diagnostics.push(diagnostics);
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn diagnostics(&self) -> &[Diagnostics] {
        &self.diagnostics
    }

    pub fn hs_order(&self) -> f64 {
        self.hs_order
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.time)
    }

    pub fn initial_state(&self) -> &SpectralField {
        &self.snapshots[0].field
    }

    pub fn final_state(&self) -> &SpectralField {
        &self.snapshots[self.snapshots.len() - 1].field
    }

    /// Snapshot whose time is within `tol` (relative to max(1, |t|)) of `t`.
    pub fn at_time(&self, t: f64, tol: f64) -> Option<&SpectralField> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= tol * t.abs().max(1.0))
            .map(|s| &s.field)
    }

    /// Error if the run blew up.
    pub fn healthy(self) -> Result<Self> {
        match self.blow_up {
            Some(b) => Err(Error::BlowUp {
                time: b.time,
                last_healthy: b.last_healthy,
            }),
            None => Ok(self),
        }
    }

    /// max_t |mean(t) − mean(0)|.
    pub fn mean_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mean;
        self.diagnostics.iter().map(|d| (d.mean - m0).abs()).fold(0.0, f64::max)
    }

    /// max_t |‖u(t)‖ − ‖u(0)‖| / ‖u(0)‖ in L².
    pub fn l2_drift(&self) -> f64 {
        let l0 = self.diagnostics[0].l2;
        self.diagnostics
            .iter()
            .map(|d| (d.l2 - l0).abs() / l0)
            .fold(0.0, f64::max)
    }

    /// |I₂(T) − I₂(0)| for the printed and the sign-corrected invariant.
    pub fn i2_drift(&self) -> Option<(f64, f64)> {
        let (first, last) = (self.diagnostics.first()?, self.diagnostics.last()?);
        Some((
            (last.i2? - first.i2?).abs(),
            (last.i2_corrected? - first.i2_corrected?).abs(),
        ))
    }

    /// max over snapshots of ‖self − other‖_{H^s}; the snapshot times must match.
    pub fn max_difference(&self, other: &Trajectory, s: f64) -> Result<f64> {
        if self.snapshots.len() != other.snapshots.len() {
            return Err(Error::SizeMismatch {
                expected: self.snapshots.len(),
                got: other.snapshots.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            if (a.time - b.time).abs() > 1e-12 * a.time.abs().max(1.0) {
                return Err(Error::MissingSnapshot(a.time));
            }
            worst = worst.max(a.field.sub(&b.field)?.sobolev_norm(s));
        }
        Ok(worst)
    }

    pub(crate) fn map_snapshots(&self, time: impl Fn(f64) -> f64, field: impl Fn(&SpectralField) -> SpectralField, diag: impl Fn(&Diagnostics, f64, &SpectralField) -> Diagnostics) -> Self {
        let mut out = Trajectory::new(self.hs_order);
        for (s, d) in self.snapshots.iter().zip(&self.diagnostics) {
            let t = time(s.time);
            let f = field(&s.field);
            let nd = diag(d, t, &f);
            out.push(Snapshot { time: t, field: f }, nd);
        }
        out.blow_up = self.blow_up.map(|b| BlowUp {
            time: time(b.time),
            last_healthy: time(b.last_healthy),
        });
        out
    }

    /// CSV `t,mean,l2,hs,i2`; i2 is empty where it does not apply.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{DIAGNOSTICS_CSV_HEADER}")?;
        for d in &self.diagnostics {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(d.t),
                fmt_float(d.mean),
                fmt_float(d.l2),
                fmt_float(d.hs),
                d.i2.map(fmt_float).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    /// One binary file per snapshot, `<prefix>.snap.NNNN.bin`.
    pub fn write_snapshots(&self, prefix: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::with_capacity(self.snapshots.len());
        for (i, s) in self.snapshots.iter().enumerate() {
            let mut name = prefix.as_os_str().to_owned();
            name.push(format!(".snap.{i:04}.bin"));
            let path = PathBuf::from(name);
            std::fs::write(&path, encode_snapshot(&s.field))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// 16-byte header (`ILWSNAP1`, M as u32 LE, 4 zero bytes) followed by
/// re/im pairs as f64 LE for modes −M/2+1, …, M/2.
pub fn encode_snapshot(field: &SpectralField) -> Vec<u8> {
    let grid = field.grid();
    let mut bytes = Vec::with_capacity(16 + 16 * grid.modes());
    bytes.extend_from_slice(SNAPSHOT_MAGIC);
    bytes.extend_from_slice(&(grid.modes() as u32).to_le_bytes());
    bytes.extend_from_slice(&[0u8; 4]);
    for m in grid.mode_indices() {
        let c = field.coeff(m);
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    bytes
}

/// Inverse of [`encode_snapshot`] for a grid of the given period.
pub fn decode_snapshot(bytes: &[u8], period: f64) -> Result<SpectralField> {
    let bad = |msg: &str| Error::param("snapshot", msg.to_string());
    if bytes.len() < 16 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("missing ILWSNAP1 header"));
    }
    let modes = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let grid = Grid::new(modes, period)?;
    if bytes.len() != 16 + 16 * modes {
        return Err(Error::SizeMismatch {
            expected: 16 + 16 * modes,
            got: bytes.len(),
        });
    }
    let read = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let mut field = SpectralField::zeros(grid);
    for (j, m) in grid.mode_indices().enumerate() {
        if m >= 0 {
            let at = 16 + 16 * j;
            field.set_coeff(m, Complex64::new(read(at), read(at + 8)));
        }
    }
    Ok(field)
}
