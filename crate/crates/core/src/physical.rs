//! Map from the rescaled frame back to physical variables.
//!
//! Physical time accumulates as `dt_phys = R²·dt̃`, the thickness is
//! `L = R`, positions are `x = z·L` and velocities `u = v/L`.

use serde::{Deserialize, Serialize};

use crate::coupler::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScalar {
    pub t: f64,
    pub t_phys: f64,
    pub l: f64,
    pub u1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSnapshot {
    pub step: usize,
    pub t_phys: f64,
    pub l: f64,
    pub x: Vec<f64>,
    pub biomass: Vec<Vec<f64>>,
    pub substrate: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTrajectory {
    /// One row for the initial state and one per step.
    pub scalars: Vec<PhysicalScalar>,
    pub snapshots: Vec<PhysicalSnapshot>,
}

impl PhysicalTrajectory {
    /// Thickness at a physical time, linear between stored rows.
    pub fn thickness_at(&self, t_phys: f64) -> Option<f64> {
        let rows = &self.scalars;
        let k = rows.partition_point(|r| r.t_phys < t_phys);
        if k == 0 {
            return rows.first().filter(|r| r.t_phys == t_phys).map(|r| r.l);
        }
        let b = rows.get(k)?;
        let a = &rows[k - 1];
        let w = (t_phys - a.t_phys) / (b.t_phys - a.t_phys);
        Some(a.l + w * (b.l - a.l))
    }
}

pub fn back_transform(traj: &Trajectory) -> Result<PhysicalTrajectory> {
    let series = traj.boundary_series();
    if series.is_empty() {
        return Err(Error::Schema {
            key: "trajectory".into(),
            message: "no states recorded".into(),
        });
    }
    if let Some(&(_, r, _)) = series.iter().find(|&&(_, r, _)| !(r > 0.0)) {
        return Err(Error::NonpositiveThickness(r));
    }

    let mut scalars = Vec::with_capacity(series.len());
    let mut t_phys = 0.0;
    for (k, &(t, r, v1)) in series.iter().enumerate() {
        if k > 0 {
            let (t0, r0, _) = series[k - 1];
            t_phys += 0.5 * (t - t0) * (r0 * r0 + r * r);
        }
        scalars.push(PhysicalScalar {
            t,
            t_phys,
            l: r,
            u1: v1 / r,
        });
    }

    let snapshots = traj
        .states
        .iter()
        .map(|snap| {
            let s = &snap.state;
            let l = s.r;
            PhysicalSnapshot {
                step: snap.step,
                t_phys: scalars[snap.step].t_phys,
                l,
                x: s.grid().nodes().map(|z| z * l).collect(),
                biomass: s.y.iter().map(|p| p.values().to_vec()).collect(),
                substrate: s.c.iter().map(|p| p.values().to_vec()).collect(),
                u: s.v.values().iter().map(|v| v / l).collect(),
            }
        })
        .collect();

    Ok(PhysicalTrajectory { scalars, snapshots })
}
