//! Velocity reconstruction and the thickness equation
//! `Ṙ = R²·v(1, t) − λR⁴`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumtrapz, Profile};
use crate::model::KineticsModel;
use crate::parabolic::gather;
use crate::transport::V1Segment;

/// Below this thickness a run is classified as washout.
pub const DEFAULT_R_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub r: f64,
    pub v1: f64,
}

/// `v(z) = R²·∫_0^z g(Y, C)`, composite trapezoid.
pub fn velocity_profile(y: &[Profile], c: &[Profile], r: f64, kin: &KineticsModel) -> Result<Profile> {
    let grid = c[0].grid();
    let (n, m) = (kin.n(), kin.m());
    let (mut yk, mut ck) = (vec![0.0; n], vec![0.0; m]);
    let (mut f, mut h) = (vec![0.0; n], vec![0.0; m]);
    let mut g = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        gather(y, k, &mut yk);
        gather(c, k, &mut ck);
        g.push(kin.eval_into(&yk, &ck, &mut f, &mut h));
    }
    let g = Profile::new(grid, g).map_err(|_| Error::NonFinite("velocity source g"))?;
    let r2 = r * r;
    let mut v = cumtrapz(&g);
    v.values_mut().iter_mut().for_each(|x| *x *= r2);
    if !v.is_finite() {
        return Err(Error::NonFinite("velocity profile"));
    }
    Ok(v)
}

#[inline]
pub fn detachment_rhs(r: f64, v1: f64, lambda: f64) -> f64 {
    let r2 = r * r;
    r2 * v1 - lambda * r2 * r2
}

/// Classical RK4 for the thickness over one step. `v1` is evaluated at
/// step-local times in `[0, dt]`.
pub fn boundary_step_with(
    r: f64,
    v1: impl Fn(f64) -> f64,
    lambda: f64,
    dt: f64,
    r_floor: f64,
) -> Result<f64> {
    if dt == 0.0 {
        return Ok(r);
    }
    let half = 0.5 * dt;
    let (va, vm, vb) = (v1(0.0), v1(half), v1(dt));
    let k1 = detachment_rhs(r, va, lambda);
    let k2 = detachment_rhs(r + half * k1, vm, lambda);
    let k3 = detachment_rhs(r + half * k2, vm, lambda);
    let k4 = detachment_rhs(r + dt * k3, vb, lambda);
    let r_new = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !r_new.is_finite() {
        return Err(Error::NonFinite("thickness update"));
    }
    if r_new <= r_floor {
        return Err(Error::ThicknessCollapse { r: r_new, floor: r_floor });
    }
    Ok(r_new)
}

/// RK4 step with `v1` linear between the segment endpoints.
pub fn boundary_step(state: BoundaryState, seg: &V1Segment, lambda: f64, r_floor: f64) -> Result<f64> {
    boundary_step_with(state.r, |s| seg.at(s), lambda, seg.dt, r_floor)
}

/// Thickness level that bounds every trajectory from `R0` while
/// `|v1| ≤ v1_max`: above `sqrt(v1_max/λ)` the right-hand side is negative.
pub fn r_max_bound(r0: f64, lambda: f64, v1_max: f64) -> f64 {
    r0.max((v1_max.max(0.0) / lambda).sqrt())
}
