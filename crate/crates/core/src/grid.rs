//! Uniform grid on the rescaled interval [0, 1], nodal profiles and the
//! quadrature / interpolation primitives every solver stage shares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when a query point sits just outside [0, 1].
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Uniform grid with `cells` intervals; node `k` is at `k / cells`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    cells: usize,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(cells: usize) -> Result<Self> {
        if cells < Self::MIN_CELLS {
            return Err(Error::TooCoarse(cells));
        }
        Ok(Self { cells })
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        1.0 / self.cells as f64
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.cells);
        k as f64 / self.cells as f64
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.cells + 1).map(move |k| self.node(k))
    }
}

/// `build_grid` entry point.
pub fn build_grid(cells: usize) -> Result<Grid> {
    Grid::new(cells)
}

/// Nodal values of one field at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dims("profile length", grid.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("profile"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm distance to another profile on the same grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest one-sided difference quotient, a discrete ‖∂_z p‖_∞.
    pub fn max_abs_gradient(&self) -> f64 {
        let inv_dz = self.grid.cells() as f64;
        self.values
            .windows(2)
            .fold(0.0_f64, |m, w| m.max(((w[1] - w[0]) * inv_dz).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Composite-trapezoid integral over [0, 1].
pub fn trapz(p: &Profile) -> f64 {
    trapz_values(p.values(), p.grid().dz())
}

pub(crate) fn trapz_values(values: &[f64], dz: f64) -> f64 {
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    dz * (0.5 * (values[0] + values[n - 1]) + interior)
}

/// Cumulative composite-trapezoid integral, `out[k] = ∫_0^{z_k} p`.
pub fn cumtrapz(p: &Profile) -> Profile {
    let dz = p.grid().dz();
    let v = p.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * dz * (w[0] + w[1]);
        out.push(acc);
    }
    Profile {
        grid: p.grid(),
        values: out,
    }
}

/// Piecewise-linear interpolation, exact at nodes.
///
/// Points within [`DOMAIN_SLACK`] of the interval are snapped onto it;
/// anything further out is rejected.
pub fn interp_linear(p: &Profile, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("interpolation point"));
    }
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&z) {
        return Err(Error::OutOfDomain(z));
    }
    Ok(interp_unchecked(p.values(), p.grid().cells(), z.clamp(0.0, 1.0)))
}

/// Interpolation for a point already known to lie in [0, 1].
pub(crate) fn interp_unchecked(values: &[f64], cells: usize, z: f64) -> f64 {
    let s = z * cells as f64;
    let nearest = s.round();
    if (s - nearest).abs() <= 1e-10 {
        return values[nearest as usize];
    }
    let k = (s.floor() as usize).min(cells - 1);
    let w = s - k as f64;
    (1.0 - w) * values[k] + w * values[k + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn nodes_of_four_cell_grid() {
        let g = build_grid(4).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn too_coarse_grid_rejected() {
        assert!(matches!(build_grid(3), Err(Error::TooCoarse(3))));
    }

    #[test]
    fn spacing_times_cells_is_one() {
        let g = build_grid(10).unwrap();
        assert_eq!(g.dz() * 10.0, 1.0);
        assert_eq!(g.node(10), 1.0);
    }

    #[test]
    fn cumtrapz_of_one_is_z() {
        let g = build_grid(10).unwrap();
        let c = cumtrapz(&Profile::constant(g, 1.0));
        for (k, v) in c.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, k as f64 / 10.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cumtrapz_exact_for_linear_integrand() {
        for n in [4, 7, 10, 33, 128] {
            let g = build_grid(n).unwrap();
            let p = Profile::from_fn(g, |z| z).unwrap();
            assert_abs_diff_eq!(cumtrapz(&p).last(), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn cumtrapz_of_zero_is_zero() {
        let g = build_grid(8).unwrap();
        assert!(cumtrapz(&Profile::zeros(g))
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn trapezoid_converges_at_second_order_on_z_squared() {
        let err = |n: usize| {
            let g = build_grid(n).unwrap();
            (trapz(&Profile::from_fn(g, |z| z * z).unwrap()) - 1.0 / 3.0).abs()
        };
        // The composite rule error for z^2 is exactly dz^2 / 6.
        for n in [8, 16, 32, 64] {
            assert_abs_diff_eq!(err(n), 1.0 / (6.0 * (n * n) as f64), epsilon = 1e-15);
        }
        let order = (err(32) / err(64)).log2();
        assert_abs_diff_eq!(order, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn interp_reproduces_affine_data() {
        for n in [4, 5, 10, 37] {
            let g = build_grid(n).unwrap();
            let p = Profile::from_fn(g, |z| 2.0 * z).unwrap();
            assert_abs_diff_eq!(interp_linear(&p, 0.3).unwrap(), 0.6, epsilon = 1e-14);
        }
    }

    #[test]
    fn interp_at_midpoint_node() {
        let g = build_grid(10).unwrap();
        let p = Profile::from_fn(g, |z| (3.0 * z).sin()).unwrap();
        assert_eq!(interp_linear(&p, 0.5).unwrap(), p.values()[5]);
    }

    #[test]
    fn interp_outside_domain_rejected() {
        let g = build_grid(10).unwrap();
        let p = Profile::zeros(g);
        assert!(matches!(interp_linear(&p, 1.5), Err(Error::OutOfDomain(_))));
        assert!(interp_linear(&p, 1.0 + 1e-13).is_ok());
        assert!(interp_linear(&p, -1e-9).is_err());
    }

    #[test]
    fn profile_rejects_wrong_length_and_nan() {
        let g = build_grid(4).unwrap();
        assert!(Profile::new(g, vec![0.0; 4]).is_err());
        assert!(Profile::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn interp_exact_at_every_node(n in 4usize..200, seed in any::<u64>()) {
            let g = build_grid(n).unwrap();
            let p = Profile::from_fn(g, |z| ((seed % 97) as f64 * z).sin() + z).unwrap();
            for k in 0..=n {
                prop_assert_eq!(interp_linear(&p, g.node(k)).unwrap(), p.values()[k]);
            }
        }

        #[test]
        fn cumtrapz_is_linear(
            n in 4usize..64,
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            xs in proptest::collection::vec(-10.0f64..10.0, 65),
            ys in proptest::collection::vec(-10.0f64..10.0, 65),
        ) {
            let g = build_grid(n).unwrap();
            let p = Profile::new(g, xs[..=n].to_vec()).unwrap();
            let q = Profile::new(g, ys[..=n].to_vec()).unwrap();
            let combo = Profile::new(
                g,
                p.values().iter().zip(q.values()).map(|(x, y)| a * x + b * y).collect(),
            ).unwrap();
            let lhs = cumtrapz(&combo);
            let (cp, cq) = (cumtrapz(&p), cumtrapz(&q));
            for k in 0..=n {
                let rhs = a * cp.values()[k] + b * cq.values()[k];
                prop_assert!((lhs.values()[k] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn cumtrapz_of_nonnegative_is_nondecreasing(
            xs in proptest::collection::vec(0.0f64..10.0, 5..100),
        ) {
            let g = build_grid(xs.len() - 1).unwrap();
            let c = cumtrapz(&Profile::new(g, xs).unwrap());
            prop_assert!(c.values().windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
