//! State snapshots (binary frames and CSV), reports and run manifests.
//!
//! Binary frame layout, little endian: magic `SVV1`, `n: u64`, `L: f64`, `t: f64`,
//! then `rho[n]` and `m[n]` as `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Grid, GridState, RunStats, Trajectory};

pub const FRAME_MAGIC: &[u8; 4] = b"SVV1";

pub fn write_frame<W: Write>(mut w: W, grid: &Grid, state: &GridState) -> Result<()> {
    w.write_all(FRAME_MAGIC)?;
    w.write_all(&(grid.n as u64).to_le_bytes())?;
    w.write_all(&grid.half_width.to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    for v in state.rho.iter().chain(&state.mom) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_frame<R: Read>(mut r: R) -> Result<(Grid, GridState)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FRAME_MAGIC {
        return Err(Error::config("not an SVV1 frame"));
    }
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    let mut f = || -> Result<f64> {
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let half_width = f()?;
    let t = f()?;
    let grid = Grid::new(half_width, n)?;
    let rho = (0..n).map(|_| f()).collect::<Result<Vec<_>>>()?;
    let mom = (0..n).map(|_| f()).collect::<Result<Vec<_>>>()?;
    Ok((grid, GridState { t, rho, mom }))
}

pub fn write_frame_file(path: &Path, grid: &Grid, state: &GridState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_frame(&mut w, grid, state)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame_file(path: &Path) -> Result<(Grid, GridState)> {
    read_frame(BufReader::new(File::open(path)?))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct StateRow {
    x: f64,
    rho: f64,
    m: f64,
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::from(e),
        other => Error::config(format!("CSV: {other:?}")),
    }
}

pub fn write_state_csv(path: &Path, grid: &Grid, state: &GridState) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for i in 0..grid.n {
        w.serialize(StateRow { x: grid.x(i), rho: state.rho[i], m: state.mom[i] })
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x, rho, m` rows that must match the cell centres of `grid`.
pub fn read_state_csv(path: &Path, grid: &Grid) -> Result<GridState> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let rows = r
        .deserialize::<StateRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    if rows.len() != grid.n {
        return Err(Error::config(format!(
            "{} has {} rows but the grid has {} cells",
            path.display(),
            rows.len(),
            grid.n
        )));
    }
    let tol = 1e-9 * grid.dx();
    if let Some((i, row)) = rows.iter().enumerate().find(|(i, row)| (row.x - grid.x(*i)).abs() > tol) {
        return Err(Error::config(format!(
            "{}: row {i} has x = {} but the cell centre is {}",
            path.display(),
            row.x,
            grid.x(i)
        )));
    }
    Ok(GridState {
        t: 0.0,
        rho: rows.iter().map(|r| r.rho).collect(),
        mom: rows.iter().map(|r| r.m).collect(),
    })
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::config(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Describes one command invocation and the files it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub files: Vec<String>,
}

/// One trajectory stored as a sequence of frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub epsilon: f64,
    pub sample: u64,
    /// Frame paths relative to the manifest directory, in time order.
    pub frames: Vec<String>,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub grid: Grid,
    pub seed: u64,
    pub entries: Vec<TrajectoryEntry>,
}

impl TrajectoryManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }
}

/// Writes the saves of `traj` as `<prefix>_<k>.svv` under `dir`; returns the entry.
pub fn write_trajectory_frames(dir: &Path, prefix: &str, sample: u64, traj: &Trajectory) -> Result<TrajectoryEntry> {
    let mut frames = Vec::with_capacity(traj.saves.len());
    for (k, s) in traj.saves.iter().enumerate() {
        let name = format!("{prefix}_{k:04}.svv");
        write_frame_file(&dir.join(&name), &traj.grid, s)?;
        frames.push(name);
    }
    Ok(TrajectoryEntry { epsilon: traj.epsilon, sample, frames, stats: traj.stats })
}

/// Rebuilds a trajectory from the frames of `entry`, resolved against `dir`.
pub fn read_trajectory(dir: &Path, entry: &TrajectoryEntry) -> Result<Trajectory> {
    let mut grid = None;
    let mut saves = Vec::with_capacity(entry.frames.len());
    for f in &entry.frames {
        let (g, s) = read_frame_file(&dir.join(f))?;
        if grid.is_some_and(|g0| g0 != g) {
            return Err(Error::config(format!("frame {f} uses a different grid")));
        }
        grid = Some(g);
        saves.push(s);
    }
    let grid = grid.ok_or_else(|| Error::config("trajectory entry lists no frames"))?;
    Ok(Trajectory { grid, epsilon: entry.epsilon, saves, stats: entry.stats })
}
