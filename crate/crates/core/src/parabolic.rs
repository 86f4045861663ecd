//! Implicit θ-scheme for the substrate equations
//!
//! ```text
//! ∂_t C − z·v1(t)·∂_z C − D ∂_zz C = H,   ∂_z C(0) = 0,   C(1) = ψ(t)
//! ```
//!
//! Centred differences in space, a ghost node `C_{−1} = C_1` for the
//! Neumann end and an identity row for the Dirichlet end. The resulting
//! tridiagonal system is solved with the Thomas algorithm.

use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::model::{KineticsModel, ProblemData};

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    /// Sub-diagonal; `sub[0]` is unused.
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal; the last entry is unused.
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A·x`, for residual checks.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * x[k];
                if k > 0 {
                    v += self.sub[k] * x[k - 1];
                }
                if k + 1 < n {
                    v += self.sup[k] * x[k + 1];
                }
                v
            })
            .collect()
    }
}

/// Everything needed to assemble one substrate's step.
#[derive(Debug, Clone, Copy)]
pub struct StepInputs<'a> {
    pub c: &'a Profile,
    pub v1_old: f64,
    pub v1_new: f64,
    /// `R²h` at the step start.
    pub h_old: &'a Profile,
    /// `R²h` at the step end (lagged iterate inside a Picard sweep).
    pub h_new: &'a Profile,
    pub diffusivity: f64,
    pub psi_end: f64,
    pub dt: f64,
    /// 0.5 is Crank–Nicolson, 1.0 backward Euler.
    pub theta: f64,
}

pub fn assemble_step(inp: &StepInputs<'_>) -> Result<TridiagonalSystem> {
    let grid = inp.c.grid();
    if inp.h_old.grid() != grid || inp.h_new.grid() != grid {
        return Err(Error::dims("source profile length", grid.len(), inp.h_new.values().len()));
    }
    if !(0.5..=1.0).contains(&inp.theta) {
        return Err(Error::Schema {
            key: "theta_scheme".into(),
            message: format!("{} is outside [0.5, 1]", inp.theta),
        });
    }
    if !(inp.dt >= 0.0 && inp.dt.is_finite()) {
        return Err(Error::NonpositiveParam {
            name: "dt".into(),
            value: inp.dt,
        });
    }
    let scalars = [inp.v1_old, inp.v1_new, inp.diffusivity, inp.psi_end];
    if scalars.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("parabolic step inputs"));
    }

    let len = grid.len();
    let last = grid.cells();
    let dz = grid.dz();
    let diff = inp.diffusivity / (dz * dz);
    let adv = 1.0 / (2.0 * dz);
    let implicit = inp.theta * inp.dt;
    let explicit = (1.0 - inp.theta) * inp.dt;
    let c = inp.c.values();
    let (h_old, h_new) = (inp.h_old.values(), inp.h_new.values());

    let mut sys = TridiagonalSystem {
        sub: vec![0.0; len],
        diag: vec![0.0; len],
        sup: vec![0.0; len],
        rhs: vec![0.0; len],
    };
    let source = |k: usize| inp.dt * (inp.theta * h_new[k] + (1.0 - inp.theta) * h_old[k]);

    // z = 0: the advection coefficient vanishes and the ghost node mirrors C_1.
    sys.diag[0] = 1.0 + 2.0 * implicit * diff;
    sys.sup[0] = -2.0 * implicit * diff;
    sys.rhs[0] = c[0] + explicit * 2.0 * diff * (c[1] - c[0]) + source(0);

    for k in 1..last {
        let z = grid.node(k);
        let a_new = z * inp.v1_new * adv;
        let a_old = z * inp.v1_old * adv;
        sys.sub[k] = -implicit * (diff - a_new);
        sys.diag[k] = 1.0 + 2.0 * implicit * diff;
        sys.sup[k] = -implicit * (diff + a_new);
        let lap = diff * (c[k + 1] - 2.0 * c[k] + c[k - 1]);
        let conv = a_old * (c[k + 1] - c[k - 1]);
        sys.rhs[k] = c[k] + explicit * (lap + conv) + source(k);
    }

    sys.diag[last] = 1.0;
    sys.rhs[last] = inp.psi_end;

    for k in 0..len {
        let off = sys.sub[k].abs() + sys.sup[k].abs();
        if !(sys.diag[k].abs() > off) {
            return Err(Error::UnstableAssembly {
                row: k,
                diag: sys.diag[k],
                off,
            });
        }
    }
    if sys.rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("parabolic right-hand side"));
    }
    Ok(sys)
}

/// Thomas algorithm: forward elimination then back substitution.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if sys.sub.len() != n || sys.sup.len() != n || sys.rhs.len() != n {
        return Err(Error::dims("tridiagonal bands", n, sys.rhs.len()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];

    let pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot(0));
    }
    c_prime[0] = sys.sup[0] / pivot;
    d_prime[0] = sys.rhs[0] / pivot;
    for k in 1..n {
        let pivot = sys.diag[k] - sys.sub[k] * c_prime[k - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot(k));
        }
        if k + 1 < n {
            c_prime[k] = sys.sup[k] / pivot;
        }
        d_prime[k] = (sys.rhs[k] - sys.sub[k] * d_prime[k - 1]) / pivot;
    }

    let mut x = d_prime;
    for k in (0..n - 1).rev() {
        x[k] -= c_prime[k] * x[k + 1];
    }
    Ok(x)
}

/// One step of a single substrate.
pub fn substrate_step(inp: &StepInputs<'_>) -> Result<Profile> {
    let sys = assemble_step(inp)?;
    let mut x = solve_tridiagonal(&sys)?;
    // The Dirichlet row is the identity; keep the trace bitwise.
    let last = x.len() - 1;
    x[last] = inp.psi_end;
    Profile::new(inp.c.grid(), x).map_err(|_| Error::NonFinite("parabolic solve"))
}

/// Scaled sources `R²·h(Y, C)` for every substrate at every node.
pub fn scaled_substrate_sources(
    y: &[Profile],
    c: &[Profile],
    r: f64,
    kin: &KineticsModel,
) -> Result<Vec<Profile>> {
    let grid = c[0].grid();
    let (n, m) = (kin.n(), kin.m());
    let r2 = r * r;
    let mut out = vec![vec![0.0; grid.len()]; m];
    let (mut yk, mut ck) = (vec![0.0; n], vec![0.0; m]);
    let (mut f, mut h) = (vec![0.0; n], vec![0.0; m]);
    for k in 0..grid.len() {
        gather(y, k, &mut yk);
        gather(c, k, &mut ck);
        kin.eval_into(&yk, &ck, &mut f, &mut h);
        for j in 0..m {
            out[j][k] = r2 * h[j];
        }
    }
    to_profiles(grid, out, "substrate sources")
}

pub(crate) fn gather(profiles: &[Profile], k: usize, out: &mut [f64]) {
    for (o, p) in out.iter_mut().zip(profiles) {
        *o = p.values()[k];
    }
}

pub(crate) fn to_profiles(
    grid: Grid,
    columns: Vec<Vec<f64>>,
    what: &'static str,
) -> Result<Vec<Profile>> {
    columns
        .into_iter()
        .map(|v| Profile::new(grid, v).map_err(|_| Error::NonFinite(what)))
        .collect()
}

/// Arguments of [`parabolic_step`] that change between Picard sweeps.
#[derive(Debug, Clone, Copy)]
pub struct ParabolicStage<'a> {
    pub c_old: &'a [Profile],
    /// Converged `R²h` at the step start.
    pub h_old: &'a [Profile],
    /// Iterates used for the lagged end-of-step source.
    pub y_iter: &'a [Profile],
    pub c_iter: &'a [Profile],
    pub r_iter: f64,
    pub v1_old: f64,
    pub v1_new: f64,
    pub t_new: f64,
    pub dt: f64,
    pub theta: f64,
}

/// Advances every substrate independently; coupling enters only through the
/// lagged source.
pub fn parabolic_step(
    stage: &ParabolicStage<'_>,
    kin: &KineticsModel,
    data: &ProblemData,
) -> Result<Vec<Profile>> {
    let h_new = scaled_substrate_sources(stage.y_iter, stage.c_iter, stage.r_iter, kin)?;
    (0..kin.m())
        .map(|j| {
            substrate_step(&StepInputs {
                c: &stage.c_old[j],
                v1_old: stage.v1_old,
                v1_new: stage.v1_new,
                h_old: &stage.h_old[j],
                h_new: &h_new[j],
                diffusivity: data.diffusivity[j],
                psi_end: (data.psi[j])(stage.t_new),
                dt: stage.dt,
                theta: stage.theta,
            })
        })
        .collect()
}
