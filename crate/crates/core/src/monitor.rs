//! Energy, invariant flags and the a-priori dissipation envelope.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::boundary::r_max_bound;
use crate::coupler::{SolverConfig, State, StepReport, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{trapz_values, Profile};

/// Values below this are reported as negative.
pub const NEGATIVITY_TOL: f64 = -1e-12;
/// Absolute slack on the thickness bound.
pub const R_BOUND_SLACK: f64 = 1e-8;

/// Energy weights `μ_i` and `ν_j`; missing vectors mean all ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyWeights {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedWeights {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl ResolvedWeights {
    /// Smallest weight, `C*` in the envelope rate.
    pub fn c_star(&self) -> f64 {
        self.mu.iter().chain(&self.nu).copied().fold(f64::INFINITY, f64::min)
    }
}

impl EnergyWeights {
    pub fn explicit(mu: Vec<f64>, nu: Vec<f64>) -> Self {
        Self {
            mu: Some(mu),
            nu: Some(nu),
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, w) in [("energy_weights.mu", &self.mu), ("energy_weights.nu", &self.nu)] {
            if let Some(&bad) = w.iter().flatten().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::NonpositiveParam {
                    name: name.into(),
                    value: bad,
                });
            }
        }
        Ok(())
    }

    /// Fills missing vectors with ones. Given vectors are truncated or
    /// padded with ones to the species counts; callers validate lengths.
    pub fn resolve(&self, n: usize, m: usize) -> ResolvedWeights {
        let fit = |w: &Option<Vec<f64>>, len: usize| {
            let mut v = w.clone().unwrap_or_default();
            v.resize(len, 1.0);
            v
        };
        ResolvedWeights {
            mu: fit(&self.mu, n),
            nu: fit(&self.nu, m),
        }
    }

    pub fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        if let Some(mu) = &self.mu {
            if mu.len() != n {
                return Err(Error::dims("energy_weights.mu", n, mu.len()));
            }
        }
        if let Some(nu) = &self.nu {
            if nu.len() != m {
                return Err(Error::dims("energy_weights.nu", m, nu.len()));
            }
        }
        Ok(())
    }
}

/// `E = ½ Σ μ_i ∫ Y_i² + ½ Σ ν_j ∫ C_j²` by the trapezoid rule.
pub fn energy(state: &State, weights: &ResolvedWeights) -> f64 {
    let dz = state.grid().dz();
    let part = |profiles: &[Profile], w: &[f64]| -> f64 {
        profiles
            .iter()
            .zip(w)
            .map(|(p, wi)| {
                let sq: Vec<f64> = p.values().iter().map(|x| x * x).collect();
                wi * trapz_values(&sq, dz)
            })
            .sum()
    };
    0.5 * (part(&state.y, &weights.mu) + part(&state.c, &weights.nu))
}

fn trace_gradient(p: &Profile) -> f64 {
    let v = p.values();
    let n = v.len() - 1;
    (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * p.grid().dz())
}

/// `Σ ν_j |v1·½C_j(1)² + D_j·C_j(1)·∂_zC_j(1)|`, the magnitude of the
/// energy exchanged through the Dirichlet boundary.
pub fn boundary_energy_flux(state: &State, diffusivity: &[f64], weights: &ResolvedWeights) -> f64 {
    let v1 = state.v1();
    state
        .c
        .iter()
        .zip(diffusivity)
        .zip(&weights.nu)
        .map(|((c, d), nu)| {
            let c1 = c.last();
            nu * (0.5 * v1 * c1 * c1 + d * c1 * trace_gradient(c)).abs()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InvariantFlag {
    NegativeY,
    NegativeC,
    RBoundExceeded,
    Continuation,
}

impl InvariantFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvariantFlag::NegativeY => "NEGATIVE_Y",
            InvariantFlag::NegativeC => "NEGATIVE_C",
            InvariantFlag::RBoundExceeded => "R_BOUND_EXCEEDED",
            InvariantFlag::Continuation => "CONTINUATION",
        }
    }
}

impl fmt::Display for InvariantFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Joins flags with `|` for tabular output.
pub fn format_flags(flags: &BTreeSet<InvariantFlag>) -> String {
    flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join("|")
}

/// Inputs for the thickness bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundContext {
    pub r0: f64,
    pub lambda: f64,
    /// Running maximum of `|v1|` up to and including the current state.
    pub v1_max: f64,
}

/// Sup norm used by the continuation test.
pub fn continuation_norm(state: &State) -> f64 {
    let sup = |ps: &[Profile]| ps.iter().fold(0.0_f64, |m, p| m.max(p.max_abs()));
    let grad = state.y.iter().fold(0.0_f64, |m, p| m.max(p.max_abs_gradient()));
    sup(&state.y).max(sup(&state.c)).max(state.r.abs()).max(grad)
}

pub fn check_invariants(
    state: &State,
    _report: &StepReport,
    cfg: &SolverConfig,
    ctx: &BoundContext,
) -> BTreeSet<InvariantFlag> {
    let mut flags = BTreeSet::new();
    if state.y.iter().any(|p| p.min() < NEGATIVITY_TOL) {
        flags.insert(InvariantFlag::NegativeY);
    }
    if state.c.iter().any(|p| p.min() < NEGATIVITY_TOL) {
        flags.insert(InvariantFlag::NegativeC);
    }
    if state.r > r_max_bound(ctx.r0, ctx.lambda, ctx.v1_max) + R_BOUND_SLACK {
        flags.insert(InvariantFlag::RBoundExceeded);
    }
    let norm = continuation_norm(state);
    if !norm.is_finite() || norm > cfg.continuation_threshold {
        flags.insert(InvariantFlag::Continuation);
    }
    flags
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Relative slack on the comparison.
    pub tol: f64,
    /// Adds the accumulated boundary energy flux to the bound.
    pub include_boundary_flux: bool,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            include_boundary_flux: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub t: f64,
    pub energy: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub gamma: f64,
    pub m_r: f64,
    pub c_star: f64,
    pub points: Vec<EnvelopePoint>,
}

impl EnvelopeReport {
    /// Smallest `envelope − energy` over the run.
    pub fn min_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.envelope - p.energy)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks `E(t) ≤ e^{−γt}E(0) + M_R(β + M0)/γ` with `γ = 2αM_R/C*` and
/// `M_R = max R²` along the run.
pub fn dissipation_envelope_check(
    traj: &Trajectory,
    alpha: f64,
    beta_m0: f64,
    weights: &ResolvedWeights,
    opts: EnvelopeOptions,
) -> Result<EnvelopeReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonpositiveParam {
            name: "alpha".into(),
            value: alpha,
        });
    }
    if !(beta_m0 >= 0.0 && beta_m0.is_finite()) {
        return Err(Error::NonpositiveParam {
            name: "beta_m0".into(),
            value: beta_m0,
        });
    }
    if weights.mu != traj.weights.0 || weights.nu != traj.weights.1 {
        return Err(Error::Schema {
            key: "energy_weights".into(),
            message: "weights differ from the ones used for the run".into(),
        });
    }
    let series = traj.energy_series();
    let Some(&(t0, e0)) = series.first() else {
        return Err(Error::Schema {
            key: "trajectory".into(),
            message: "no states recorded".into(),
        });
    };
    let m_r = traj
        .boundary_series()
        .iter()
        .map(|&(_, r, _)| r * r)
        .fold(0.0_f64, f64::max);
    let c_star = weights.c_star();
    let gamma = 2.0 * alpha * m_r / c_star;
    let plateau = m_r * beta_m0 / gamma;

    let mut fluxes = Vec::with_capacity(series.len());
    if let Some(s) = traj.initial() {
        fluxes.push(boundary_energy_flux(s, &traj.diffusivity, weights));
    }
    fluxes.extend(traj.reports.iter().map(|r| r.boundary_energy_flux));

    let mut points = Vec::with_capacity(series.len());
    let mut flux_integral = 0.0;
    for (k, &(t, e)) in series.iter().enumerate() {
        if k > 0 && opts.include_boundary_flux {
            let dt = t - series[k - 1].0;
            flux_integral += 0.5 * dt * (fluxes[k - 1] + fluxes[k]);
        }
        let envelope = (-gamma * (t - t0)).exp() * e0 + plateau + flux_integral;
        if !(e <= envelope * (1.0 + opts.tol)) {
            return Err(Error::EnvelopeViolated {
                t,
                energy: e,
                bound: envelope,
            });
        }
        points.push(EnvelopePoint { t, energy: e, envelope });
    }
    Ok(EnvelopeReport {
        gamma,
        m_r,
        c_star,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupler::{run_simulation, SolverConfig};
    use crate::grid::Grid;
    use crate::model::{constant_fn, scalar_fn, KineticsModel, ProblemData};
    use approx::assert_abs_diff_eq;

    fn state_with(y: f64, c: f64, r: f64) -> State {
        let g = Grid::new(10).unwrap();
        State {
            t: 0.0,
            y: vec![Profile::constant(g, y)],
            c: vec![Profile::constant(g, c)],
            r,
            v: Profile::zeros(g),
        }
    }

    #[test]
    fn energy_of_constants() {
        let s = state_with(2.0, 3.0, 1.0);
        let w = EnergyWeights::default().resolve(1, 1);
        assert_abs_diff_eq!(energy(&s, &w), 0.5 * (4.0 + 9.0), epsilon = 1e-14);
        let w = EnergyWeights::explicit(vec![2.0], vec![0.5]).resolve(1, 1);
        assert_abs_diff_eq!(energy(&s, &w), 0.5 * (8.0 + 4.5), epsilon = 1e-14);
        assert_eq!(w.c_star(), 0.5);
    }

    #[test]
    fn weights_validation() {
        assert!(EnergyWeights::explicit(vec![1.0, 0.0], vec![]).check().is_err());
        assert!(EnergyWeights::explicit(vec![1.0], vec![2.0]).check_dims(1, 2).is_err());
        assert_eq!(EnergyWeights::default().resolve(2, 3).nu, vec![1.0; 3]);
    }

    #[test]
    fn flags_are_raised() {
        let cfg = SolverConfig {
            continuation_threshold: 10.0,
            ..SolverConfig::default()
        };
        let ctx = BoundContext {
            r0: 1.0,
            lambda: 1.0,
            v1_max: 0.0,
        };
        let report = StepReport::default();
        assert!(check_invariants(&state_with(1.0, 1.0, 1.0), &report, &cfg, &ctx).is_empty());
        let f = check_invariants(&state_with(-1e-6, 1.0, 1.0), &report, &cfg, &ctx);
        assert_eq!(format_flags(&f), "NEGATIVE_Y");
        let f = check_invariants(&state_with(1.0, -1.0, 1.5), &report, &cfg, &ctx);
        assert_eq!(format_flags(&f), "NEGATIVE_C|R_BOUND_EXCEEDED");
        let f = check_invariants(&state_with(11.0, 1.0, 1.0), &report, &cfg, &ctx);
        assert!(f.contains(&InvariantFlag::Continuation));
        // Round-off below the tolerance is not flagged.
        assert!(check_invariants(&state_with(-1e-13, 0.0, 1.0), &report, &cfg, &ctx).is_empty());
    }

    #[test]
    fn flux_of_pure_diffusion_profile() {
        let g = Grid::new(200).unwrap();
        let mut s = state_with(0.0, 0.0, 1.0);
        s.c = vec![Profile::from_fn(g, |z| 1.0 + z * z).unwrap()];
        s.v = Profile::zeros(g);
        s.y = vec![Profile::zeros(g)];
        let w = EnergyWeights::default().resolve(1, 1);
        // D·C(1)·C'(1) = 2·2·2.
        assert_abs_diff_eq!(boundary_energy_flux(&s, &[2.0], &w), 8.0, epsilon = 1e-10);
    }

    #[test]
    fn diffusive_decay_sits_inside_envelope() {
        let data = ProblemData {
            phi: vec![constant_fn(0.0)],
            theta: vec![scalar_fn(|z| (std::f64::consts::FRAC_PI_2 * z).cos())],
            psi: vec![constant_fn(0.0)],
            diffusivity: vec![1.0],
            lambda: 0.5,
            r0: 1.0,
        };
        let kin = KineticsModel::zero(1, 1).unwrap();
        let cfg = SolverConfig {
            grid_cells: 40,
            dt: 1e-2,
            ..SolverConfig::default()
        };
        let traj = run_simulation(&data, &kin, &cfg, 1.0);
        let w = cfg.energy_weights.resolve(1, 1);
        let report = dissipation_envelope_check(&traj, 1.0, 0.0, &w, EnvelopeOptions::default()).unwrap();
        assert_eq!(report.points.len(), traj.steps() + 1);
        assert!(report.min_margin() >= 0.0);
        assert_abs_diff_eq!(report.m_r, 1.0, epsilon = 1e-12);

        // An absurd decay rate must be caught.
        let err = dissipation_envelope_check(&traj, 1e3, 0.0, &w, EnvelopeOptions::default());
        assert!(matches!(err, Err(Error::EnvelopeViolated { .. })));
    }
}
