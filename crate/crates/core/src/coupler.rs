//! Per-step Picard coupling of the four stages and the time-marching driver.
//!
//! Each sweep runs, in order: substrate solve with lagged sources, velocity
//! reconstruction, biomass transport along characteristics, thickness
//! update. The sweep is repeated until successive iterates agree in the
//! sup norm over `(Y, C, R, v1)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::boundary::{boundary_step, velocity_profile, BoundaryState, DEFAULT_R_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{interp_unchecked, Grid, Profile};
use crate::model::{KineticsModel, ProblemData};
use crate::monitor::{
    boundary_energy_flux, check_invariants, energy, BoundContext, EnergyWeights, InvariantFlag,
};
use crate::parabolic::{parabolic_step, scaled_substrate_sources, ParabolicStage};
use crate::transport::{transport_step_with, Stage, TransportCoefficient, V1Segment};

/// Number of consecutive residual increases treated as divergence.
const DIVERGENCE_STREAK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositivityMode {
    #[default]
    Monitor,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid_cells: usize,
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub theta_scheme: f64,
    pub transport_coefficient: TransportCoefficient,
    pub positivity_mode: PositivityMode,
    pub continuation_threshold: f64,
    pub energy_weights: EnergyWeights,
    pub r_floor: f64,
    /// Keep every `snapshot_stride`-th state (plus the first and last).
    pub snapshot_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_cells: 100,
            dt: 1e-3,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            theta_scheme: 0.5,
            transport_coefficient: TransportCoefficient::Scaled,
            positivity_mode: PositivityMode::Monitor,
            continuation_threshold: 1e6,
            energy_weights: EnergyWeights::default(),
            r_floor: DEFAULT_R_FLOOR,
            snapshot_stride: 1,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonpositiveParam {
                    name: name.into(),
                    value: v,
                })
            }
        };
        Grid::new(self.grid_cells)?;
        positive("dt", self.dt)?;
        positive("picard_tol", self.picard_tol)?;
        positive("continuation_threshold", self.continuation_threshold)?;
        positive("r_floor", self.r_floor)?;
        if self.picard_max_iter == 0 {
            return Err(Error::NonpositiveParam {
                name: "picard_max_iter".into(),
                value: 0.0,
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::NonpositiveParam {
                name: "snapshot_stride".into(),
                value: 0.0,
            });
        }
        if !(0.5..=1.0).contains(&self.theta_scheme) {
            return Err(Error::Schema {
                key: "theta_scheme".into(),
                message: format!("{} is outside [0.5, 1]", self.theta_scheme),
            });
        }
        self.energy_weights.check()
    }
}

/// Solution at one rescaled time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub y: Vec<Profile>,
    pub c: Vec<Profile>,
    pub r: f64,
    pub v: Profile,
}

impl State {
    /// Samples the initial data and reconstructs the matching velocity.
    pub fn initial(data: &ProblemData, kin: &KineticsModel, grid: Grid) -> Result<Self> {
        let sample = |f: &crate::model::ScalarFn| {
            Profile::from_fn(grid, |z| f(z)).map_err(|_| Error::NonFinite("initial data"))
        };
        let y = data.phi.iter().map(sample).collect::<Result<Vec<_>>>()?;
        let mut c = data.theta.iter().map(sample).collect::<Result<Vec<_>>>()?;
        // Pin the Dirichlet trace to ψ(0).
        for (cj, psi) in c.iter_mut().zip(&data.psi) {
            let last = grid.cells();
            cj.values_mut()[last] = psi(0.0);
        }
        if y.len() != kin.n() || c.len() != kin.m() {
            return Err(Error::dims("initial data species", kin.n() + kin.m(), y.len() + c.len()));
        }
        let v = velocity_profile(&y, &c, data.r0, kin)?;
        Ok(Self {
            t: 0.0,
            y,
            c,
            r: data.r0,
            v,
        })
    }

    #[inline]
    pub fn v1(&self) -> f64 {
        self.v.last()
    }

    pub fn grid(&self) -> Grid {
        self.v.grid()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepReport {
    /// Time, thickness and boundary velocity of the new state.
    pub t: f64,
    pub r: f64,
    pub v1: f64,
    pub picard_iterations: usize,
    pub residual_history: Vec<f64>,
    pub contraction_ratio: f64,
    pub clamped_feet: usize,
    pub energy: f64,
    pub boundary_energy_flux: f64,
    pub invariant_flags: BTreeSet<InvariantFlag>,
}

impl StepReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Median of successive residual ratios, skipping exact zeros. The median
/// discards the start-up ratio of the first sweep and round-off at the tail.
pub fn contraction_ratio(residuals: &[f64]) -> f64 {
    let mut ratios: Vec<f64> = residuals
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return 0.0;
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    }
}

struct Iterate {
    y: Vec<Profile>,
    c: Vec<Profile>,
    r: f64,
    v1: f64,
}

impl Iterate {
    fn distance(&self, other: &Iterate) -> f64 {
        let field = |a: &[Profile], b: &[Profile]| {
            a.iter()
                .zip(b)
                .fold(0.0_f64, |m, (p, q)| m.max(p.sup_distance(q)))
        };
        field(&self.y, &other.y)
            .max(field(&self.c, &other.c))
            .max((self.r - other.r).abs())
            .max((self.v1 - other.v1).abs())
    }
}

fn diverged(reason: impl Into<String>, residuals: &[f64]) -> Error {
    Error::PicardDiverged {
        reason: reason.into(),
        residuals: residuals.to_vec(),
    }
}

/// Advances `s` by `dt` with the Picard fixed-point loop.
pub fn picard_step(
    s: &State,
    data: &ProblemData,
    kin: &KineticsModel,
    cfg: &SolverConfig,
    dt: f64,
) -> Result<(State, StepReport)> {
    let grid = s.grid();
    let cells = grid.cells();
    let (n, m) = (kin.n(), kin.m());
    let t_new = s.t + dt;
    let v1_old = s.v1();
    let r_old2 = s.r * s.r;
    let h_old = scaled_substrate_sources(&s.y, &s.c, s.r, kin)?;

    let mut current = Iterate {
        y: s.y.clone(),
        c: s.c.clone(),
        r: s.r,
        v1: v1_old,
    };
    let mut residuals = Vec::new();
    let mut streak = 0;
    let mut clamped;

    let (mut yb, mut cb) = (vec![0.0; n], vec![0.0; m]);
    let mut hb = vec![0.0; m];

    for _ in 0..cfg.picard_max_iter {
        let c_next = parabolic_step(
            &ParabolicStage {
                c_old: &s.c,
                h_old: &h_old,
                y_iter: &current.y,
                c_iter: &current.c,
                r_iter: current.r,
                v1_old,
                v1_new: current.v1,
                t_new,
                dt,
                theta: cfg.theta_scheme,
            },
            kin,
            data,
        )
        .map_err(|e| match e {
            Error::NonFinite(_) => diverged(e.to_string(), &residuals),
            other => other,
        })?;

        let v_next = velocity_profile(&current.y, &c_next, current.r, kin)
            .map_err(|e| diverged(e.to_string(), &residuals))?;
        let v1_next = v_next.last();
        let seg = V1Segment::new(v1_old, v1_next, dt).map_err(|e| diverged(e.to_string(), &residuals))?;

        let r_end2 = current.r * current.r;
        let y_iter = &current.y;
        let mut sampler = |z: f64, stage: Stage, out: &mut [f64]| {
            let (ys, cs, scale) = match stage {
                Stage::Start => (&s.y, &s.c, r_old2),
                Stage::End => (y_iter, &c_next, r_end2),
            };
            for (b, p) in yb.iter_mut().zip(ys) {
                *b = interp_unchecked(p.values(), cells, z);
            }
            for (b, p) in cb.iter_mut().zip(cs) {
                *b = interp_unchecked(p.values(), cells, z);
            }
            kin.eval_into(&yb, &cb, out, &mut hb);
            out.iter_mut().for_each(|v| *v *= scale);
        };
        let (y_next, diag) = transport_step_with(&s.y, &mut sampler, &seg, cfg.transport_coefficient)
            .map_err(|e| diverged(e.to_string(), &residuals))?;
        clamped = diag.clamped_feet;

        let r_next = match boundary_step(BoundaryState { r: s.r, v1: v1_old }, &seg, data.lambda, cfg.r_floor) {
            Err(Error::NonFinite(what)) => return Err(diverged(what, &residuals)),
            // The exact thickness never changes sign, so this is step-size blow-up.
            Err(Error::ThicknessCollapse { r, .. }) if r <= 0.0 => {
                return Err(diverged(format!("thickness update overshot to R = {r:.3e}"), &residuals))
            }
            other => other?,
        };

        let next = Iterate {
            y: y_next,
            c: c_next,
            r: r_next,
            v1: v1_next,
        };
        let residual = next.distance(&current);
        if !residual.is_finite() {
            residuals.push(residual);
            return Err(diverged("non-finite residual", &residuals));
        }
        if residuals.last().is_some_and(|&prev| residual > prev) {
            streak += 1;
        } else {
            streak = 0;
        }
        residuals.push(residual);
        current = next;

        if residual <= cfg.picard_tol {
            let v = velocity_profile(&current.y, &current.c, current.r, kin)?;
            let state = State {
                t: t_new,
                y: current.y,
                c: current.c,
                r: current.r,
                v,
            };
            let weights = cfg.energy_weights.resolve(n, m);
            let report = StepReport {
                t: t_new,
                r: state.r,
                v1: state.v1(),
                picard_iterations: residuals.len(),
                contraction_ratio: contraction_ratio(&residuals),
                residual_history: residuals,
                clamped_feet: clamped,
                energy: energy(&state, &weights),
                boundary_energy_flux: boundary_energy_flux(&state, &data.diffusivity, &weights),
                invariant_flags: BTreeSet::new(),
            };
            return Ok((state, report));
        }
        if streak >= DIVERGENCE_STREAK {
            return Err(diverged("residual increased on consecutive sweeps", &residuals));
        }
    }
    Err(diverged(
        format!("no convergence to {:e} within {} sweeps", cfg.picard_tol, cfg.picard_max_iter),
        &residuals,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Washout,
    ContinuationTripped,
    PicardDiverged,
    PositivityViolated,
    NumericalFailure,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::Washout => "washout",
            Outcome::ContinuationTripped => "continuation_tripped",
            Outcome::PicardDiverged => "picard_diverged",
            Outcome::PositivityViolated => "positivity_violated",
            Outcome::NumericalFailure => "numerical_failure",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Completed)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Step index; 0 is the initial state.
    pub step: usize,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
    pub outcome: Outcome,
    /// Why the run stopped early, when it did.
    pub message: Option<String>,
    pub lambda: f64,
    pub diffusivity: Vec<f64>,
    pub weights: (Vec<f64>, Vec<f64>),
}

impl Trajectory {
    pub fn initial(&self) -> Option<&State> {
        self.states.first().map(|s| &s.state)
    }

    pub fn last_state(&self) -> Option<&State> {
        self.states.last().map(|s| &s.state)
    }

    pub fn steps(&self) -> usize {
        self.reports.len()
    }

    /// `(t, R, v1)` at the initial state and after every step.
    pub fn boundary_series(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.reports.len() + 1);
        if let Some(s) = self.initial() {
            out.push((s.t, s.r, s.v1()));
        }
        out.extend(self.reports.iter().map(|r| (r.t, r.r, r.v1)));
        out
    }

    /// Energy at the initial state and after every step.
    pub fn energy_series(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.reports.len() + 1);
        if let Some(s) = self.initial() {
            let w = EnergyWeights::explicit(self.weights.0.clone(), self.weights.1.clone());
            out.push((s.t, energy(s, &w.resolve(s.y.len(), s.c.len()))));
        }
        out.extend(self.reports.iter().map(|r| (r.t, r.energy)));
        out
    }
}

fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Marches from the initial data to `t_end`, classifying early stops.
pub fn run_simulation(data: &ProblemData, kin: &KineticsModel, cfg: &SolverConfig, t_end: f64) -> Trajectory {
    let weights = cfg.energy_weights.resolve(kin.n(), kin.m());
    let mut traj = Trajectory {
        states: Vec::new(),
        reports: Vec::new(),
        outcome: Outcome::Completed,
        message: None,
        lambda: data.lambda,
        diffusivity: data.diffusivity.clone(),
        weights: (weights.mu.clone(), weights.nu.clone()),
    };
    let fail = |mut traj: Trajectory, outcome: Outcome, msg: String| {
        traj.outcome = outcome;
        traj.message = Some(msg);
        traj
    };
    if let Err(e) = cfg.check() {
        return fail(traj, Outcome::NumericalFailure, e.to_string());
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return fail(traj, Outcome::NumericalFailure, format!("t_end = {t_end} must be positive"));
    }
    let grid = match Grid::new(cfg.grid_cells) {
        Ok(g) => g,
        Err(e) => return fail(traj, Outcome::NumericalFailure, e.to_string()),
    };
    let mut state = match State::initial(data, kin, grid) {
        Ok(s) => s,
        Err(e) => return fail(traj, Outcome::NumericalFailure, e.to_string()),
    };
    let mut ctx = BoundContext {
        r0: data.r0,
        lambda: data.lambda,
        v1_max: state.v1().abs(),
    };
    traj.states.push(Snapshot {
        step: 0,
        state: state.clone(),
    });

    let steps = step_count(t_end, cfg.dt);
    for step in 1..=steps {
        let t_target = if step == steps { t_end } else { step as f64 * cfg.dt };
        let dt = t_target - state.t;
        let (mut next, mut report) = match picard_step(&state, data, kin, cfg, dt) {
            Ok(ok) => ok,
            Err(e) => {
                let outcome = match e {
                    Error::ThicknessCollapse { .. } => Outcome::Washout,
                    Error::PicardDiverged { .. } => Outcome::PicardDiverged,
                    _ => Outcome::NumericalFailure,
                };
                if traj.states.last().map(|s| s.step) != Some(step - 1) {
                    traj.states.push(Snapshot {
                        step: step - 1,
                        state: state.clone(),
                    });
                }
                return fail(traj, outcome, format!("step {step} (t = {:.6}): {e}", state.t));
            }
        };
        // Land exactly on the grid time.
        next.t = t_target;
        report.t = t_target;
        ctx.v1_max = ctx.v1_max.max(next.v1().abs());
        report.invariant_flags = check_invariants(&next, &report, cfg, &ctx);

        let stop = if report.invariant_flags.contains(&InvariantFlag::Continuation) {
            Some((Outcome::ContinuationTripped, "continuation norms exceeded the threshold"))
        } else if cfg.positivity_mode == PositivityMode::Fail
            && (report.invariant_flags.contains(&InvariantFlag::NegativeY)
                || report.invariant_flags.contains(&InvariantFlag::NegativeC))
        {
            Some((Outcome::PositivityViolated, "negative biomass or substrate"))
        } else {
            None
        };

        traj.reports.push(report);
        if stop.is_some() || step == steps || step % cfg.snapshot_stride == 0 {
            traj.states.push(Snapshot {
                step,
                state: next.clone(),
            });
        }
        if let Some((outcome, why)) = stop {
            return fail(traj, outcome, format!("step {step} (t = {t_target:.6}): {why}"));
        }
        state = next;
    }
    traj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{constant_fn, linear_preset, scalar_fn};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn zero_problem() -> (ProblemData, KineticsModel) {
        let data = ProblemData {
            phi: vec![scalar_fn(|z| 1.0 + z)],
            theta: vec![scalar_fn(|z| (FRAC_PI_2 * z).cos())],
            psi: vec![constant_fn(0.0)],
            diffusivity: vec![1.0],
            lambda: 0.5,
            r0: 1.0,
        };
        (data, KineticsModel::zero(1, 1).unwrap())
    }

    #[test]
    fn contraction_ratio_is_median_of_ratios() {
        assert_abs_diff_eq!(contraction_ratio(&[1.0, 0.1, 0.01]), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(contraction_ratio(&[1.0, 0.5, 0.05]), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(contraction_ratio(&[1.0, 0.2, 0.002, 2e-5, 2e-7, 1e-7]), 0.01, epsilon = 1e-15);
        assert_eq!(contraction_ratio(&[1.0, 0.0]), 0.0);
        assert_eq!(contraction_ratio(&[1.0]), 0.0);
    }

    #[test]
    fn step_count_handles_round_off() {
        assert_eq!(step_count(1.0, 1e-3), 1000);
        assert_eq!(step_count(0.3, 0.1), 3);
        assert_eq!(step_count(0.35, 0.1), 4);
    }

    #[test]
    fn zero_kinetics_decouples() {
        let (data, kin) = zero_problem();
        let cfg = SolverConfig {
            grid_cells: 40,
            dt: 1e-2,
            ..SolverConfig::default()
        };
        let s0 = State::initial(&data, &kin, Grid::new(40).unwrap()).unwrap();
        let (s1, report) = picard_step(&s0, &data, &kin, &cfg, cfg.dt).unwrap();
        assert!(report.picard_iterations <= 2, "{report:?}");
        assert_eq!(s1.y, s0.y);
        assert!(s1.c[0].values()[0] < s0.c[0].values()[0]);
        let exact = (1.0 + 1.5 * 0.01_f64).powf(-1.0 / 3.0);
        assert_abs_diff_eq!(s1.r, exact, epsilon = 1e-10);
        assert!(s1.v.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn huge_step_on_stiff_monod_diverges() {
        use crate::model::{monod_preset, MonodParams, MonodSpecies};
        let kin = monod_preset(&MonodParams {
            substrates: 1,
            species: vec![MonodSpecies {
                mu_max: 5.0,
                half_saturation: 0.05,
                decay: 1.0,
                limiting: 0,
                yields: vec![0.1],
                consumes: None,
            }],
        })
        .unwrap();
        let data = ProblemData {
            phi: vec![constant_fn(1.0)],
            theta: vec![constant_fn(1.0)],
            psi: vec![constant_fn(1.0)],
            diffusivity: vec![10.0],
            lambda: 1.0,
            r0: 1.0,
        };
        let cfg = SolverConfig {
            grid_cells: 20,
            dt: 0.1,
            theta_scheme: 1.0,
            ..SolverConfig::default()
        };
        let s0 = State::initial(&data, &kin, Grid::new(20).unwrap()).unwrap();
        assert!(picard_step(&s0, &data, &kin, &cfg, 0.01).is_ok());
        match picard_step(&s0, &data, &kin, &cfg, cfg.dt) {
            Err(Error::PicardDiverged { residuals, .. }) => {
                let n = residuals.len();
                assert!(n >= 4);
                assert!(residuals[n - 3..].windows(2).all(|w| w[1] > w[0]), "{residuals:?}");
            }
            other => panic!("expected divergence, got {other:?}"),
        }
        let traj = run_simulation(&data, &kin, &cfg, 2.0);
        assert_eq!(traj.outcome, Outcome::PicardDiverged);
        assert!(traj.message.is_some());
    }

    #[test]
    fn run_reaches_t_end_with_snapshots() {
        let (data, kin) = zero_problem();
        let cfg = SolverConfig {
            grid_cells: 20,
            dt: 0.1,
            snapshot_stride: 5,
            ..SolverConfig::default()
        };
        let traj = run_simulation(&data, &kin, &cfg, 1.0);
        assert_eq!(traj.outcome, Outcome::Completed);
        assert_eq!(traj.steps(), 10);
        let steps: Vec<usize> = traj.states.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 5, 10]);
        assert_eq!(traj.reports.last().unwrap().t, 1.0);
        assert!(traj.reports.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn continuation_threshold_trips() {
        let kin = linear_preset(vec![vec![2.0]], vec![vec![0.0]], vec![0.0], vec![0.0]).unwrap();
        let data = ProblemData {
            phi: vec![constant_fn(0.5)],
            theta: vec![constant_fn(0.1)],
            psi: vec![constant_fn(0.1)],
            diffusivity: vec![1.0],
            lambda: 5.0,
            r0: 0.9,
        };
        let cfg = SolverConfig {
            grid_cells: 20,
            dt: 0.01,
            continuation_threshold: 1.0,
            ..SolverConfig::default()
        };
        let traj = run_simulation(&data, &kin, &cfg, 5.0);
        assert_eq!(traj.outcome, Outcome::ContinuationTripped);
        let last = traj.reports.last().unwrap();
        assert!(last.invariant_flags.contains(&InvariantFlag::Continuation));
        // Every earlier step stayed below the threshold.
        for r in &traj.reports[..traj.reports.len() - 1] {
            assert!(!r.invariant_flags.contains(&InvariantFlag::Continuation));
        }
        assert_eq!(traj.last_state().unwrap().t, last.t);
    }

    #[test]
    fn bad_config_is_a_classified_failure() {
        let (data, kin) = zero_problem();
        let cfg = SolverConfig {
            grid_cells: 2,
            ..SolverConfig::default()
        };
        let traj = run_simulation(&data, &kin, &cfg, 1.0);
        assert_eq!(traj.outcome, Outcome::NumericalFailure);
        assert!(traj.states.is_empty());
    }

    #[test]
    fn washout_is_classified() {
        let kin = linear_preset(vec![vec![-1.0]], vec![vec![0.0]], vec![0.0], vec![0.0]).unwrap();
        let data = ProblemData {
            phi: vec![constant_fn(1.0)],
            theta: vec![constant_fn(1.0)],
            psi: vec![constant_fn(1.0)],
            diffusivity: vec![1.0],
            lambda: 1.0,
            r0: 1.0,
        };
        let cfg = SolverConfig {
            grid_cells: 10,
            dt: 0.01,
            r_floor: 0.9,
            ..SolverConfig::default()
        };
        let traj = run_simulation(&data, &kin, &cfg, 10.0);
        assert_eq!(traj.outcome, Outcome::Washout);
        assert!(traj.last_state().unwrap().r > 0.9);
    }
}
