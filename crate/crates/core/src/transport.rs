//! One step of the biomass transport equations
//! `∂_t Y − a(z, t) ∂_z Y = F` by backward characteristics.
//!
//! With the scaled coefficient `a = z·v1(t)` the characteristic through
//! `(z, t + dt)` satisfies `dZ/ds = −Z·v1(s)`, so its foot at time `t` is
//! `z·exp(∫ v1)`. The source is integrated along the characteristic with
//! the trapezoid rule, using the foot at the step start and the node at the
//! step end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interp_unchecked, Profile};

/// Which advection coefficient multiplies `∂_z Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportCoefficient {
    /// `z·v1(t)`, the coefficient of the front-fixed model.
    #[default]
    Scaled,
    /// `v1(t)` with no `z` factor.
    Unscaled,
}

/// Boundary velocity `v(1, ·)` over one step, linear in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V1Segment {
    pub v1_old: f64,
    pub v1_new: f64,
    pub dt: f64,
}

impl V1Segment {
    pub fn new(v1_old: f64, v1_new: f64, dt: f64) -> Result<Self> {
        if !(v1_old.is_finite() && v1_new.is_finite() && dt.is_finite()) {
            return Err(Error::NonFinite("v1 segment"));
        }
        if dt <= 0.0 {
            return Err(Error::NonpositiveParam {
                name: "dt".into(),
                value: dt,
            });
        }
        Ok(Self { v1_old, v1_new, dt })
    }

    /// `∫ v1` over the step (exact for the linear profile).
    #[inline]
    pub fn integral(&self) -> f64 {
        0.5 * self.dt * (self.v1_old + self.v1_new)
    }

    /// Value at step-local time `s ∈ [0, dt]`.
    #[inline]
    pub fn at(&self, s: f64) -> f64 {
        self.v1_old + (self.v1_new - self.v1_old) * (s / self.dt)
    }
}

/// Foot of the backward characteristic through node position `z`, clamped
/// into [0, 1]. The flag is set when clamping was needed.
pub fn characteristic_foot(z: f64, seg: &V1Segment) -> Result<(f64, bool)> {
    characteristic_foot_with(z, seg, TransportCoefficient::Scaled)
}

pub fn characteristic_foot_with(
    z: f64,
    seg: &V1Segment,
    coefficient: TransportCoefficient,
) -> Result<(f64, bool)> {
    let foot = match coefficient {
        TransportCoefficient::Scaled => z * seg.integral().exp(),
        TransportCoefficient::Unscaled => z + seg.integral(),
    };
    if !foot.is_finite() {
        return Err(Error::NonFinite("characteristic foot"));
    }
    if foot > 1.0 {
        Ok((1.0, true))
    } else if foot < 0.0 {
        Ok((0.0, true))
    } else {
        Ok((foot, false))
    }
}

/// Where a source is sampled along a characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Foot of the characteristic, at the step start.
    Start,
    /// The arrival node, at the step end.
    End,
}

/// Supplies the already `R²`-scaled biomass sources `F`.
pub trait SourceSampler {
    fn sample(&mut self, z: f64, stage: Stage, out: &mut [f64]);
}

impl<F> SourceSampler for F
where
    F: FnMut(f64, Stage, &mut [f64]),
{
    fn sample(&mut self, z: f64, stage: Stage, out: &mut [f64]) {
        self(z, stage, out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportDiagnostics {
    pub clamped_feet: usize,
}

pub fn transport_step(
    y: &[Profile],
    sources: &mut impl SourceSampler,
    seg: &V1Segment,
) -> Result<(Vec<Profile>, TransportDiagnostics)> {
    transport_step_with(y, sources, seg, TransportCoefficient::Scaled)
}

pub fn transport_step_with(
    y: &[Profile],
    sources: &mut impl SourceSampler,
    seg: &V1Segment,
    coefficient: TransportCoefficient,
) -> Result<(Vec<Profile>, TransportDiagnostics)> {
    let n = y.len();
    let Some(first) = y.first() else {
        return Ok((Vec::new(), TransportDiagnostics::default()));
    };
    let grid = first.grid();
    if y.iter().any(|p| p.grid() != grid) {
        return Err(Error::dims("biomass profile grids", grid.len(), 0));
    }
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; n];
    let mut f_start = vec![0.0; n];
    let mut f_end = vec![0.0; n];
    let mut diag = TransportDiagnostics::default();
    let half_dt = 0.5 * seg.dt;

    for (k, z) in grid.nodes().enumerate() {
        let (foot, clamped) = characteristic_foot_with(z, seg, coefficient)?;
        diag.clamped_feet += usize::from(clamped);
        sources.sample(foot, Stage::Start, &mut f_start);
        sources.sample(z, Stage::End, &mut f_end);
        for i in 0..n {
            let carried = interp_unchecked(y[i].values(), grid.cells(), foot);
            out[i][k] = carried + half_dt * (f_start[i] + f_end[i]);
        }
    }

    let profiles = out
        .into_iter()
        .map(|values| Profile::new(grid, values))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::NonFinite("transport step"))?;
    Ok((profiles, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Grid};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn no_source(_: f64, _: Stage, out: &mut [f64]) {
        out.fill(0.0);
    }

    #[test]
    fn stationary_characteristics() {
        let seg = V1Segment::new(0.0, 0.0, 0.1).unwrap();
        assert_eq!(characteristic_foot(0.37, &seg).unwrap(), (0.37, false));
    }

    #[test]
    fn foot_follows_exponential_stretch() {
        let seg = V1Segment::new(1.0, 1.0, 0.1).unwrap();
        let (z, clamped) = characteristic_foot(0.5, &seg).unwrap();
        assert_abs_diff_eq!(z, 0.5 * 0.1_f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(z, 0.552585, epsilon = 1e-6);
        assert!(!clamped);
    }

    #[test]
    fn foot_beyond_one_is_clamped() {
        let seg = V1Segment::new(1.0, 1.0, 0.1).unwrap();
        // 0.99·e^0.1 ≈ 1.0941
        assert_abs_diff_eq!(0.99 * 0.1_f64.exp(), 1.0941, epsilon = 1e-4);
        assert_eq!(characteristic_foot(0.99, &seg).unwrap(), (1.0, true));
    }

    #[test]
    fn foot_uses_mean_of_linear_v1() {
        let seg = V1Segment::new(0.0, 2.0, 0.1).unwrap();
        let (z, _) = characteristic_foot(0.5, &seg).unwrap();
        assert_abs_diff_eq!(z, 0.5 * 0.1_f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn unscaled_foot_is_a_shift() {
        let seg = V1Segment::new(-1.0, -1.0, 0.1).unwrap();
        let (z, clamped) =
            characteristic_foot_with(0.5, &seg, TransportCoefficient::Unscaled).unwrap();
        assert_abs_diff_eq!(z, 0.4, epsilon = 1e-15);
        assert!(!clamped);
        let (z, clamped) =
            characteristic_foot_with(0.05, &seg, TransportCoefficient::Unscaled).unwrap();
        assert_eq!((z, clamped), (0.0, true));
    }

    #[test]
    fn segment_validation() {
        assert!(V1Segment::new(f64::NAN, 0.0, 0.1).is_err());
        assert!(V1Segment::new(0.0, 0.0, 0.0).is_err());
    }

    fn profile(grid: Grid, f: impl Fn(f64) -> f64) -> Profile {
        Profile::from_fn(grid, f).unwrap()
    }

    #[test]
    fn identity_without_source_or_flow() {
        let g = build_grid(16).unwrap();
        let y = vec![profile(g, |z| (4.0 * z).sin() + 2.0)];
        let seg = V1Segment::new(0.0, 0.0, 0.05).unwrap();
        let (out, diag) = transport_step(&y, &mut no_source, &seg).unwrap();
        assert_eq!(out[0], y[0]);
        assert_eq!(diag.clamped_feet, 0);
    }

    #[test]
    fn constant_source_adds_c_dt() {
        let g = build_grid(16).unwrap();
        let y = vec![profile(g, |z| z * z), profile(g, |_| 1.0)];
        let seg = V1Segment::new(0.0, 0.0, 0.05).unwrap();
        let mut src = |_: f64, _: Stage, out: &mut [f64]| {
            out[0] = 3.0;
            out[1] = -1.0;
        };
        let (out, _) = transport_step(&y, &mut src, &seg).unwrap();
        for k in 0..g.len() {
            assert_abs_diff_eq!(out[0].values()[k], y[0].values()[k] + 0.15, epsilon = 1e-15);
            assert_abs_diff_eq!(out[1].values()[k], 0.95, epsilon = 1e-15);
        }
    }

    #[test]
    fn affine_data_advected_exactly() {
        let g = build_grid(20).unwrap();
        let y = vec![profile(g, |z| z)];
        let seg = V1Segment::new(1.0, 1.0, 0.1).unwrap();
        let (out, diag) = transport_step(&y, &mut no_source, &seg).unwrap();
        for (k, z) in g.nodes().enumerate() {
            let expect = (z * 0.1_f64.exp()).min(1.0);
            assert_abs_diff_eq!(out[0].values()[k], expect, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(out[0].values()[10], 0.552585, epsilon = 1e-6);
        // Nodes with z·e^0.1 > 1: z > 0.9048 → k = 19, 20.
        assert_eq!(diag.clamped_feet, 2);
    }

    #[test]
    fn gronwall_bound_for_linear_growth() {
        // F = L·Y + c0 with repeated stepping stays under e^{Lt}(|φ| + t·c0)·1.1.
        let g = build_grid(32).unwrap();
        let (l, c0, dt) = (0.8, 0.3, 0.01);
        let mut y = vec![profile(g, |z| 1.0 + 0.5 * (3.0 * z).cos())];
        let phi_max = y[0].max_abs();
        let seg = V1Segment::new(0.4, 0.4, dt).unwrap();
        for step in 1..=200 {
            let prev = y[0].clone();
            let mut src = |z: f64, stage: Stage, out: &mut [f64]| {
                // End-stage sources are lagged at the previous iterate.
                let _ = stage;
                out[0] = l * interp_unchecked(prev.values(), g.cells(), z) + c0;
            };
            y = transport_step(&y, &mut src, &seg).unwrap().0;
            let t = step as f64 * dt;
            let bound = (l * t).exp() * (phi_max + t * c0);
            assert!(y[0].max_abs() <= 1.1 * bound, "step {step}");
        }
    }

    proptest! {
        #[test]
        fn nonnegative_data_and_sources_stay_nonnegative(
            values in proptest::collection::vec(0.0f64..5.0, 9..80),
            v1_old in -3.0f64..3.0,
            v1_new in -3.0f64..3.0,
            dt in 1e-4f64..0.5,
            rate in 0.0f64..4.0,
        ) {
            let g = build_grid(values.len() - 1).unwrap();
            let y = vec![Profile::new(g, values).unwrap()];
            let seg = V1Segment::new(v1_old, v1_new, dt).unwrap();
            let snapshot = y[0].clone();
            let mut src = |z: f64, _: Stage, out: &mut [f64]| {
                out[0] = rate * interp_unchecked(snapshot.values(), g.cells(), z);
            };
            for coefficient in [TransportCoefficient::Scaled, TransportCoefficient::Unscaled] {
                let (out, _) = transport_step_with(&y, &mut src, &seg, coefficient).unwrap();
                prop_assert!(out[0].values().iter().all(|&v| v >= 0.0));
            }
        }

        #[test]
        fn pure_advection_obeys_maximum_principle(
            values in proptest::collection::vec(-5.0f64..5.0, 9..80),
            v1_old in -3.0f64..3.0,
            v1_new in -3.0f64..3.0,
            dt in 1e-4f64..0.5,
        ) {
            let g = build_grid(values.len() - 1).unwrap();
            let y = vec![Profile::new(g, values).unwrap()];
            let seg = V1Segment::new(v1_old, v1_new, dt).unwrap();
            let (out, _) = transport_step(&y, &mut no_source, &seg).unwrap();
            let (lo, hi) = (y[0].min(), y[0].max());
            prop_assert!(out[0].values().iter().all(|&v| v >= lo - 1e-15 && v <= hi + 1e-15));
        }
    }
}
