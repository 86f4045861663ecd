//! Manufactured-solution convergence study.
//!
//! The manufactured fields are
//!
//! ```text
//! Y*(z, t) = e^{-t}(1 + z²)
//! C*(z, t) = e^{-t}cos(πz/2) + ψ*(t),   ψ*(t) = 1 + ½ sin t
//! R*(t)    = 1 + ½e^{-t}
//! v1*(t)   = (R*' + λR*⁴) / R*²
//! ```
//!
//! and the forcings that make them exact are derived in `docs/mms.md`.
//! Each solver stage is exercised on its own so that a regression points at
//! one component.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_step_with, DEFAULT_R_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::parabolic::{substrate_step, StepInputs};
use crate::transport::{transport_step, Stage, V1Segment};

/// Manufactured solution and forcings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub lambda: f64,
    pub diffusivity: f64,
}

impl Default for Manufactured {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            diffusivity: 1.0,
        }
    }
}

impl Manufactured {
    pub fn y(&self, z: f64, t: f64) -> f64 {
        (-t).exp() * (1.0 + z * z)
    }

    pub fn psi(&self, t: f64) -> f64 {
        1.0 + 0.5 * t.sin()
    }

    fn psi_dot(&self, t: f64) -> f64 {
        0.5 * t.cos()
    }

    pub fn c(&self, z: f64, t: f64) -> f64 {
        (-t).exp() * (FRAC_PI_2 * z).cos() + self.psi(t)
    }

    pub fn r(&self, t: f64) -> f64 {
        1.0 + 0.5 * (-t).exp()
    }

    fn r_dot(&self, t: f64) -> f64 {
        -0.5 * (-t).exp()
    }

    pub fn v1(&self, t: f64) -> f64 {
        let r = self.r(t);
        (self.r_dot(t) + self.lambda * r.powi(4)) / (r * r)
    }

    /// Biomass forcing for `∂_tY − z·v1·∂_zY = F`.
    pub fn f(&self, z: f64, t: f64, v1: f64) -> f64 {
        -(-t).exp() * (1.0 + z * z + 2.0 * v1 * z * z)
    }

    /// Substrate forcing for `∂_tC − z·v1·∂_zC − D·∂_zzC = H`.
    pub fn h(&self, z: f64, t: f64, v1: f64) -> f64 {
        let e = (-t).exp();
        let k = FRAC_PI_2;
        e * (k * z).cos() * (self.diffusivity * k * k - 1.0)
            + self.psi_dot(t)
            + z * v1 * k * e * (k * z).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmsCase {
    /// Substrate equation with `v1 = 0`.
    Diffusion,
    /// Substrate equation with the manufactured `v1*(t)`.
    AdvectionDiffusion,
    /// Biomass characteristics with the manufactured `v1*(t)`.
    Transport,
    /// Thickness ODE driven by the exact `v1*(t)`.
    BoundaryOde,
}

impl MmsCase {
    pub const ALL: [MmsCase; 4] = [
        MmsCase::Diffusion,
        MmsCase::AdvectionDiffusion,
        MmsCase::Transport,
        MmsCase::BoundaryOde,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MmsCase::Diffusion => "diffusion",
            MmsCase::AdvectionDiffusion => "advection_diffusion",
            MmsCase::Transport => "transport",
            MmsCase::BoundaryOde => "boundary_ode",
        }
    }

    /// Minimum acceptable observed order.
    pub fn floor(&self) -> f64 {
        match self {
            MmsCase::Diffusion | MmsCase::AdvectionDiffusion => 1.8,
            MmsCase::Transport => 0.9,
            MmsCase::BoundaryOde => 3.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsConfig {
    pub grids: Vec<usize>,
    pub t_end: f64,
    /// `dt = courant·dz` for the PDE cases.
    pub courant: f64,
    /// `dt = ode_courant·dz` for the ODE case, large enough to stay clear of
    /// round-off on the finest grid.
    pub ode_courant: f64,
    pub theta: f64,
    pub lambda: f64,
    pub diffusivity: f64,
}

impl Default for MmsConfig {
    fn default() -> Self {
        Self {
            grids: vec![25, 50, 100, 200],
            t_end: 1.0,
            courant: 1.0,
            ode_courant: 5.0,
            theta: 0.5,
            lambda: 0.05,
            diffusivity: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: MmsCase,
    pub grids: Vec<usize>,
    pub dz: Vec<f64>,
    /// Sup-norm error at `t_end`.
    pub errors: Vec<f64>,
    pub order: f64,
    pub floor: f64,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.order >= self.floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cases: Vec<CaseReport>,
}

impl ConvergenceReport {
    pub fn case(&self, case: MmsCase) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.case == case)
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(CaseReport::passed)
    }
}

/// Least-squares slope of `log e` against `log dz`.
pub fn observed_order(dz: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = dz.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn steps_for(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = (t_end / dt).round().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

fn substrate_error(ms: &Manufactured, cfg: &MmsConfig, cells: usize, advect: bool) -> Result<f64> {
    let grid = Grid::new(cells)?;
    let (steps, dt) = steps_for(cfg.t_end, cfg.courant * grid.dz());
    let v1 = |t: f64| if advect { ms.v1(t) } else { 0.0 };
    let forcing = |t: f64| Profile::from_fn(grid, |z| ms.h(z, t, v1(t)));
    let mut c = Profile::from_fn(grid, |z| ms.c(z, 0.0))?;
    let mut h_old = forcing(0.0)?;
    for k in 0..steps {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        let h_new = forcing(t1)?;
        c = substrate_step(&StepInputs {
            c: &c,
            v1_old: v1(t0),
            v1_new: v1(t1),
            h_old: &h_old,
            h_new: &h_new,
            diffusivity: ms.diffusivity,
            psi_end: ms.psi(t1),
            dt,
            theta: cfg.theta,
        })?;
        h_old = h_new;
    }
    let exact = Profile::from_fn(grid, |z| ms.c(z, cfg.t_end))?;
    Ok(c.sup_distance(&exact))
}

fn transport_error(ms: &Manufactured, cfg: &MmsConfig, cells: usize) -> Result<f64> {
    let grid = Grid::new(cells)?;
    let (steps, dt) = steps_for(cfg.t_end, cfg.courant * grid.dz());
    let mut y = vec![Profile::from_fn(grid, |z| ms.y(z, 0.0))?];
    for k in 0..steps {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        let (va, vb) = (ms.v1(t0), ms.v1(t1));
        let seg = V1Segment::new(va, vb, dt)?;
        let mut sources = |z: f64, stage: Stage, out: &mut [f64]| {
            out[0] = match stage {
                Stage::Start => ms.f(z, t0, va),
                Stage::End => ms.f(z, t1, vb),
            };
        };
        y = transport_step(&y, &mut sources, &seg)?.0;
    }
    let exact = Profile::from_fn(grid, |z| ms.y(z, cfg.t_end))?;
    Ok(y[0].sup_distance(&exact))
}

fn ode_error(ms: &Manufactured, cfg: &MmsConfig, cells: usize) -> Result<f64> {
    let dz = 1.0 / cells as f64;
    let (steps, dt) = steps_for(cfg.t_end, cfg.ode_courant * dz);
    let mut r = ms.r(0.0);
    for k in 0..steps {
        let t0 = k as f64 * dt;
        r = boundary_step_with(r, |s| ms.v1(t0 + s), ms.lambda, dt, DEFAULT_R_FLOOR)?;
    }
    Ok((r - ms.r(cfg.t_end)).abs())
}

/// Runs one case on every grid without checking the floor.
pub fn run_case(case: MmsCase, cfg: &MmsConfig) -> Result<CaseReport> {
    let ms = Manufactured {
        lambda: cfg.lambda,
        diffusivity: cfg.diffusivity,
    };
    let errors = cfg
        .grids
        .iter()
        .map(|&n| match case {
            MmsCase::Diffusion => substrate_error(&ms, cfg, n, false),
            MmsCase::AdvectionDiffusion => substrate_error(&ms, cfg, n, true),
            MmsCase::Transport => transport_error(&ms, cfg, n),
            MmsCase::BoundaryOde => ode_error(&ms, cfg, n),
        })
        .collect::<Result<Vec<_>>>()?;
    let dz: Vec<f64> = cfg.grids.iter().map(|&n| 1.0 / n as f64).collect();
    Ok(CaseReport {
        case,
        grids: cfg.grids.clone(),
        order: observed_order(&dz, &errors),
        dz,
        errors,
        floor: case.floor(),
    })
}

/// Runs every case and fails with the first order below its floor.
pub fn mms_study(cfg: &MmsConfig) -> Result<ConvergenceReport> {
    if cfg.grids.len() < 2 {
        return Err(Error::dims("mms grids (at least)", 2, cfg.grids.len()));
    }
    let cases = MmsCase::ALL
        .iter()
        .map(|&c| run_case(c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let report = ConvergenceReport { cases };
    if let Some(bad) = report.cases.iter().find(|c| !c.passed()) {
        return Err(Error::OrderRegression {
            case: bad.case.name().to_string(),
            observed: bad.order,
            floor: bad.floor,
            report: Box::new(report.clone()),
        });
    }
    Ok(report)
}
