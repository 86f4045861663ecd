//! CSV and manifest writers, plus readers for round-trip checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupler::{Outcome, State, Trajectory};
use crate::error::{Error, Result};
use crate::monitor::format_flags;
use crate::physical::back_transform;

pub const SCALARS_FILE: &str = "scalars.csv";
pub const PHYSICAL_FILE: &str = "physical_scalars.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCALARS_HEADER: &str = "t,R,v1,energy,picard_iters,residual,flags";
pub const PHYSICAL_HEADER: &str = "t_phys,L,u1";

/// Seventeen significant digits, enough to round-trip any `f64`.
#[inline]
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub steps: usize,
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index}.csv")
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::io(path, e))
}

pub fn scalars_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.reports.len() + 1));
    out.push_str(SCALARS_HEADER);
    out.push('\n');
    for r in &traj.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.r),
            fmt_f64(r.v1),
            fmt_f64(r.energy),
            r.picard_iterations,
            fmt_f64(r.final_residual()),
            format_flags(&r.invariant_flags)
        );
    }
    out
}

pub fn snapshot_csv(state: &State) -> String {
    let (n, m) = (state.y.len(), state.c.len());
    let mut out = String::from("z");
    for i in 1..=n {
        let _ = write!(out, ",Y{i}");
    }
    for j in 1..=m {
        let _ = write!(out, ",C{j}");
    }
    out.push_str(",v\n");
    for (k, z) in state.grid().nodes().enumerate() {
        out.push_str(&fmt_f64(z));
        for p in state.y.iter().chain(&state.c) {
            out.push(',');
            out.push_str(&fmt_f64(p.values()[k]));
        }
        out.push(',');
        out.push_str(&fmt_f64(state.v.values()[k]));
        out.push('\n');
    }
    out
}

/// Writes every output of a run into `dir`, creating it if needed.
pub fn write_timeseries(traj: &Trajectory, dir: &Path, config_hash: Option<&str>) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();

    write_file(dir, SCALARS_FILE, &scalars_csv(traj))?;
    files.push(SCALARS_FILE.to_string());

    for (index, snap) in traj.states.iter().enumerate() {
        let name = snapshot_name(index);
        write_file(dir, &name, &snapshot_csv(&snap.state))?;
        files.push(name);
    }

    if !traj.states.is_empty() {
        let phys = back_transform(traj)?;
        let mut body = String::from(PHYSICAL_HEADER);
        body.push('\n');
        for row in &phys.scalars {
            let _ = writeln!(body, "{},{},{}", fmt_f64(row.t_phys), fmt_f64(row.l), fmt_f64(row.u1));
        }
        write_file(dir, PHYSICAL_FILE, &body)?;
        files.push(PHYSICAL_FILE.to_string());
    }

    files.push(MANIFEST_FILE.to_string());
    let manifest = Manifest {
        files,
        config_hash: config_hash.map(str::to_string),
        outcome: traj.outcome.as_str().to_string(),
        message: traj.message.clone(),
        steps: traj.steps(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(dir, MANIFEST_FILE, &json)?;
    Ok(manifest)
}

/// Parsed `scalars.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRow {
    pub t: f64,
    pub r: f64,
    pub v1: f64,
    pub energy: f64,
    pub picard_iters: usize,
    pub residual: f64,
    pub flags: Vec<String>,
}

fn bad_csv(path: &Path, line: usize, what: &str) -> Error {
    Error::Parse {
        line,
        message: format!("{}: {what}", path.display()),
    }
}

fn num(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| bad_csv(path, line, &format!("not a number: `{s}`")))
}

pub fn read_scalars(path: &Path) -> Result<Vec<ScalarRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SCALARS_HEADER) {
        return Err(bad_csv(path, 1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let ln = k + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(bad_csv(path, ln, "expected 7 columns"));
            }
            Ok(ScalarRow {
                t: num(path, ln, cols[0])?,
                r: num(path, ln, cols[1])?,
                v1: num(path, ln, cols[2])?,
                energy: num(path, ln, cols[3])?,
                picard_iters: cols[4].parse().map_err(|_| bad_csv(path, ln, "bad iteration count"))?,
                residual: num(path, ln, cols[5])?,
                flags: cols[6].split('|').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            })
        })
        .collect()
}

/// Parsed snapshot: column names and one vector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl SnapshotTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|k| self.data[k].as_slice())
    }
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad_csv(path, 1, "empty file"))?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut data = vec![Vec::new(); columns.len()];
    for (k, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != columns.len() {
            return Err(bad_csv(path, k + 2, "ragged row"));
        }
        for (col, s) in data.iter_mut().zip(cols) {
            col.push(num(path, k + 2, s)?);
        }
    }
    Ok(SnapshotTable { columns, data })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path: PathBuf = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

impl Outcome {
    /// Inverse of [`Outcome::as_str`].
    pub fn parse(s: &str) -> Option<Self> {
        [
            Outcome::Completed,
            Outcome::Washout,
            Outcome::ContinuationTripped,
            Outcome::PicardDiverged,
            Outcome::PositivityViolated,
            Outcome::NumericalFailure,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupler::{run_simulation, SolverConfig};
    use crate::grid::{trapz_values, Grid, Profile};
    use crate::model::{constant_fn, scalar_fn, KineticsModel, ProblemData};
    use crate::monitor::{energy, EnergyWeights};
    use approx::assert_abs_diff_eq;

    fn run(steps: usize, stride: usize) -> Trajectory {
        let data = ProblemData {
            phi: vec![scalar_fn(|z| 1.0 + z)],
            theta: vec![scalar_fn(|z| 1.0 - z * z)],
            psi: vec![constant_fn(0.0)],
            diffusivity: vec![1.0],
            lambda: 0.5,
            r0: 1.0,
        };
        let cfg = SolverConfig {
            grid_cells: 16,
            dt: 0.01,
            snapshot_stride: stride,
            ..SolverConfig::default()
        };
        run_simulation(&data, &KineticsModel::zero(1, 1).unwrap(), &cfg, steps as f64 * 0.01)
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn empty_trajectory_writes_header_only() {
        let mut traj = run(1, 1);
        traj.reports.clear();
        assert_eq!(scalars_csv(&traj), format!("{SCALARS_HEADER}\n"));
    }

    #[test]
    fn stride_five_over_ten_steps_gives_three_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let traj = run(10, 5);
        let manifest = write_timeseries(&traj, dir.path(), Some("abc")).unwrap();
        let snaps: Vec<_> = manifest.files.iter().filter(|f| f.starts_with("snapshot_")).collect();
        assert_eq!(snaps, ["snapshot_0.csv", "snapshot_1.csv", "snapshot_2.csv"]);
        assert_eq!(read_manifest(dir.path()).unwrap(), manifest);
        assert_eq!(manifest.outcome, "completed");
        let rows = read_scalars(&dir.path().join(SCALARS_FILE)).unwrap();
        assert_eq!(rows.len(), 10);
        let text = fs::read_to_string(dir.path().join(SCALARS_FILE)).unwrap();
        assert!(!text.contains('\r'));
        let phys = fs::read_to_string(dir.path().join(PHYSICAL_FILE)).unwrap();
        assert_eq!(phys.lines().count(), 12);
    }

    #[test]
    fn energy_recomputed_from_snapshot_matches() {
        let dir = tempfile::tempdir().unwrap();
        let traj = run(10, 5);
        write_timeseries(&traj, dir.path(), None).unwrap();
        let rows = read_scalars(&dir.path().join(SCALARS_FILE)).unwrap();
        let table = read_snapshot(&dir.path().join(snapshot_name(2))).unwrap();
        assert_eq!(table.columns, ["z", "Y1", "C1", "v"]);
        let dz = 1.0 / 16.0;
        let sq = |col: &[f64]| col.iter().map(|x| x * x).collect::<Vec<_>>();
        let e = 0.5 * (trapz_values(&sq(table.column("Y1").unwrap()), dz) + trapz_values(&sq(table.column("C1").unwrap()), dz));
        assert_abs_diff_eq!(e, rows[9].energy, epsilon = 1e-12);

        let g = Grid::new(16).unwrap();
        let state = State {
            t: rows[9].t,
            y: vec![Profile::new(g, table.column("Y1").unwrap().to_vec()).unwrap()],
            c: vec![Profile::new(g, table.column("C1").unwrap().to_vec()).unwrap()],
            r: rows[9].r,
            v: Profile::new(g, table.column("v").unwrap().to_vec()).unwrap(),
        };
        let w = EnergyWeights::default().resolve(1, 1);
        assert_abs_diff_eq!(energy(&state, &w), rows[9].energy, epsilon = 1e-12);
    }

    #[test]
    fn outcome_names_round_trip() {
        for o in ["completed", "washout", "continuation_tripped", "picard_diverged"] {
            assert_eq!(Outcome::parse(o).unwrap().as_str(), o);
        }
        assert!(Outcome::parse("fine").is_none());
    }
}
