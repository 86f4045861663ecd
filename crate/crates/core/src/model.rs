//! The continuous problem: reaction kinetics, initial/boundary data and
//! the well-posedness checks run before any numerics.
//!
//! Kinetics are evaluated pointwise and *unscaled*; the coupler applies the
//! `R²` factor that turns `f`, `h` into the rescaled sources `F = R²f`,
//! `H = R²h`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interp_unchecked, Grid};

/// Pointwise reaction laws.
///
/// Implementors write `f(Y, C)` into `f`, `h(Y, C)` into `h` and return the
/// velocity source `g(Y, C)`. Implementations must be deterministic.
pub trait Kinetics: Send + Sync {
    fn eval(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64;
}

impl<F> Kinetics for F
where
    F: Fn(&[f64], &[f64], &mut [f64], &mut [f64]) -> f64 + Send + Sync,
{
    fn eval(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64 {
        self(y, c, f, h)
    }
}

/// Result of one kinetics evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticsEval {
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub g: f64,
}

/// Reaction laws plus their metadata.
#[derive(Clone)]
pub struct KineticsModel {
    n: usize,
    m: usize,
    law: Arc<dyn Kinetics>,
    quasi_positive: bool,
    lipschitz_hint: Option<f64>,
    label: String,
}

impl fmt::Debug for KineticsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KineticsModel")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("quasi_positive", &self.quasi_positive)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .finish()
    }
}

impl KineticsModel {
    /// Wraps a user-supplied law.
    pub fn custom(n: usize, m: usize, law: impl Kinetics + 'static) -> Result<Self> {
        if n == 0 {
            return Err(Error::dims("biomass species count", 1, 0));
        }
        if m == 0 {
            return Err(Error::dims("substrate count", 1, 0));
        }
        Ok(Self {
            n,
            m,
            law: Arc::new(law),
            quasi_positive: false,
            lipschitz_hint: None,
            label: "custom".to_owned(),
        })
    }

    /// Marks the law as nonnegative on the nonnegative orthant.
    pub fn with_quasi_positive(mut self, flag: bool) -> Self {
        self.quasi_positive = flag;
        self
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz_hint = Some(l.abs());
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// No reactions at all: `f = 0`, `h = 0`, `g = 0`.
    pub fn zero(n: usize, m: usize) -> Result<Self> {
        Ok(Self::custom(n, m, |_: &[f64], _: &[f64], f: &mut [f64], h: &mut [f64]| {
            f.fill(0.0);
            h.fill(0.0);
            0.0
        })?
        .with_quasi_positive(true)
        .with_lipschitz_hint(0.0)
        .with_label("zero"))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn quasi_positive(&self) -> bool {
        self.quasi_positive
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// In-place evaluation without the finiteness check; hot-loop path.
    #[inline]
    pub fn eval_into(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64 {
        debug_assert_eq!(y.len(), self.n);
        debug_assert_eq!(c.len(), self.m);
        self.law.eval(y, c, f, h)
    }

    /// The `eval_kinetics` entry point.
    pub fn eval(&self, y: &[f64], c: &[f64]) -> Result<KineticsEval> {
        if y.len() != self.n {
            return Err(Error::dims("biomass vector", self.n, y.len()));
        }
        if c.len() != self.m {
            return Err(Error::dims("substrate vector", self.m, c.len()));
        }
        if y.iter().chain(c).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mut f = vec![0.0; self.n];
        let mut h = vec![0.0; self.m];
        let g = self.law.eval(y, c, &mut f, &mut h);
        Ok(KineticsEval { f, h, g })
    }
}

/// Free-function spelling of [`KineticsModel::eval`].
pub fn eval_kinetics(kin: &KineticsModel, y: &[f64], c: &[f64]) -> Result<KineticsEval> {
    kin.eval(y, c)
}

/// One biomass species with Monod growth on a limiting substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodSpecies {
    /// Maximum specific growth rate.
    pub mu_max: f64,
    pub half_saturation: f64,
    #[serde(default)]
    pub decay: f64,
    /// Index of the limiting substrate (0-based).
    pub limiting: usize,
    /// Yield per substrate; length `m`.
    pub yields: Vec<f64>,
    /// Substrates this species consumes (0-based). `None` means just the
    /// limiting one; an empty list means no consumption.
    #[serde(default)]
    pub consumes: Option<Vec<usize>>,
}

impl MonodSpecies {
    fn consumed(&self) -> Vec<usize> {
        self.consumes.clone().unwrap_or_else(|| vec![self.limiting])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodParams {
    pub substrates: usize,
    pub species: Vec<MonodSpecies>,
}

struct MonodLaw {
    species: Vec<MonodSpecies>,
    /// (species, substrate, 1 / yield) consumption triples.
    consumption: Vec<(usize, usize, f64)>,
}

impl Kinetics for MonodLaw {
    fn eval(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64 {
        let mut g = 0.0;
        for (i, sp) in self.species.iter().enumerate() {
            let s = c[sp.limiting];
            let rate = (sp.mu_max * s / (sp.half_saturation + s) - sp.decay) * y[i];
            f[i] = rate;
            g += rate;
        }
        h.fill(0.0);
        for &(i, j, inv_yield) in &self.consumption {
            let sp = &self.species[i];
            h[j] -= inv_yield * sp.mu_max * c[j] / (sp.half_saturation + c[j]) * y[i];
        }
        g
    }
}

/// Monod growth with first-order decay; `g = Σ f_i`.
pub fn monod_preset(params: &MonodParams) -> Result<KineticsModel> {
    let m = params.substrates;
    let n = params.species.len();
    let positive = |name: String, value: f64| {
        if value > 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(Error::NonpositiveParam { name, value })
        }
    };
    let mut consumption = Vec::new();
    let mut lipschitz = 0.0_f64;
    let mut quasi_positive = true;
    for (i, sp) in params.species.iter().enumerate() {
        positive(format!("species[{i}].mu_max"), sp.mu_max)?;
        positive(format!("species[{i}].half_saturation"), sp.half_saturation)?;
        if !(sp.decay >= 0.0 && sp.decay.is_finite()) {
            return Err(Error::NonpositiveParam {
                name: format!("species[{i}].decay"),
                value: sp.decay,
            });
        }
        if sp.yields.len() != m {
            return Err(Error::dims(format!("species[{i}].yields"), m, sp.yields.len()));
        }
        for (j, &yj) in sp.yields.iter().enumerate() {
            positive(format!("species[{i}].yields[{j}]"), yj)?;
        }
        if sp.limiting >= m {
            return Err(Error::dims(format!("species[{i}].limiting (< m)"), m, sp.limiting));
        }
        for j in sp.consumed() {
            if j >= m {
                return Err(Error::dims(format!("species[{i}].consumes (< m)"), m, j));
            }
            consumption.push((i, j, 1.0 / sp.yields[j]));
            quasi_positive = false;
            lipschitz = lipschitz.max(sp.mu_max / sp.yields[j] * (1.0 + 1.0 / sp.half_saturation));
        }
        if sp.decay > 0.0 {
            quasi_positive = false;
        }
        lipschitz = lipschitz.max(sp.mu_max * (1.0 + 1.0 / sp.half_saturation) + sp.decay);
    }
    let law = MonodLaw {
        species: params.species.clone(),
        consumption,
    };
    Ok(KineticsModel::custom(n, m, law)?
        .with_quasi_positive(quasi_positive)
        .with_lipschitz_hint(lipschitz)
        .with_label("monod"))
}

struct LinearLaw {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Kinetics for LinearLaw {
    fn eval(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64 {
        let mut g = 0.0;
        for (i, row) in self.a.iter().enumerate() {
            f[i] = row.iter().zip(y).map(|(a, y)| a * y).sum::<f64>() + self.c[i];
            g += f[i];
        }
        for (j, row) in self.b.iter().enumerate() {
            h[j] = row.iter().zip(c).map(|(b, c)| b * c).sum::<f64>() + self.d[j];
        }
        g
    }
}

/// Affine kinetics `f = A·Y + c`, `h = B·C + d`, `g = Σ f_i`.
pub fn linear_preset(
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<f64>,
    d: Vec<f64>,
) -> Result<KineticsModel> {
    let n = a.len();
    let m = b.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::dims(format!("A row {i}"), n, row.len()));
        }
    }
    for (j, row) in b.iter().enumerate() {
        if row.len() != m {
            return Err(Error::dims(format!("B row {j}"), m, row.len()));
        }
    }
    if c.len() != n {
        return Err(Error::dims("c", n, c.len()));
    }
    if d.len() != m {
        return Err(Error::dims("d", m, d.len()));
    }
    let all = a.iter().flatten().chain(b.iter().flatten()).chain(&c).chain(&d);
    if all.clone().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear kinetics coefficients"));
    }
    let quasi_positive = all.clone().all(|&v| v >= 0.0);
    let row_sum = |rows: &[Vec<f64>]| {
        rows.iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    let lipschitz = row_sum(&a).max(row_sum(&b));
    Ok(KineticsModel::custom(n, m, LinearLaw { a, b, c, d })?
        .with_quasi_positive(quasi_positive)
        .with_lipschitz_hint(lipschitz)
        .with_label("linear"))
}

/// A scalar function of one variable (`z` for profiles, `t` for boundary data).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn scalar_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

pub fn constant_fn(value: f64) -> ScalarFn {
    Arc::new(move |_| value)
}

/// Linear interpolant through values given on a uniform grid of [0, 1].
pub fn nodal_fn(values: Vec<f64>) -> Result<ScalarFn> {
    if values.len() < 2 {
        return Err(Error::dims("nodal profile (at least)", 2, values.len()));
    }
    let cells = values.len() - 1;
    Ok(Arc::new(move |z: f64| {
        interp_unchecked(&values, cells, z.clamp(0.0, 1.0))
    }))
}

/// Initial and boundary data of one problem instance.
#[derive(Clone)]
pub struct ProblemData {
    /// Initial biomass fractions, one per species.
    pub phi: Vec<ScalarFn>,
    /// Initial substrate concentrations, one per substrate.
    pub theta: Vec<ScalarFn>,
    /// Substrate values imposed at `z = 1`, functions of rescaled time.
    pub psi: Vec<ScalarFn>,
    pub diffusivity: Vec<f64>,
    /// Detachment coefficient.
    pub lambda: f64,
    /// Initial thickness.
    pub r0: f64,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("n", &self.phi.len())
            .field("m", &self.theta.len())
            .field("diffusivity", &self.diffusivity)
            .field("lambda", &self.lambda)
            .field("r0", &self.r0)
            .finish()
    }
}

impl ProblemData {
    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
}

/// Absolute tolerance of the `θ(1) = ψ(0)` compatibility check.
pub const COMPAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DimensionMismatch,
    NonpositiveDiffusivity,
    NonpositiveLambda,
    NonpositiveR0,
    CompatMismatch,
    NonfiniteData,
    SecondOrderCompat,
    NegativeInitialData,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationCode::DimensionMismatch => "DIMENSION_MISMATCH",
            ViolationCode::NonpositiveDiffusivity => "NONPOSITIVE_DIFFUSIVITY",
            ViolationCode::NonpositiveLambda => "NONPOSITIVE_LAMBDA",
            ViolationCode::NonpositiveR0 => "NONPOSITIVE_R0",
            ViolationCode::CompatMismatch => "COMPAT_MISMATCH",
            ViolationCode::NonfiniteData => "NONFINITE_DATA",
            ViolationCode::SecondOrderCompat => "SECOND_ORDER_COMPAT",
            ViolationCode::NegativeInitialData => "NEGATIVE_INITIAL_DATA",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_violation(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn has_warning(&self, code: ViolationCode) -> bool {
        self.warnings.iter().any(|v| v.code == code)
    }

    fn violation(&mut self, code: ViolationCode, message: String) {
        self.violations.push(Finding { code, message });
    }

    fn warning(&mut self, code: ViolationCode, message: String) {
        self.warnings.push(Finding { code, message });
    }
}

/// Cells of the sampling grid used by [`validate_problem`].
const VALIDATION_CELLS: usize = 256;

/// Checks every precondition the solver relies on. Never fails; problems are
/// reported as violations (blocking) or warnings.
pub fn validate_problem(data: &ProblemData, kin: &KineticsModel) -> ValidationReport {
    use ViolationCode::*;
    let mut report = ValidationReport::default();
    let (n, m) = (kin.n(), kin.m());

    let dims = [
        ("phi", n, data.phi.len()),
        ("theta", m, data.theta.len()),
        ("psi", m, data.psi.len()),
        ("diffusivity", m, data.diffusivity.len()),
    ];
    for (what, expected, got) in dims {
        if expected != got {
            report.violation(
                DimensionMismatch,
                format!("{what}: expected {expected} entries, got {got}"),
            );
        }
    }
    if !report.ok() {
        return report;
    }

    for (j, &d) in data.diffusivity.iter().enumerate() {
        if !(d > 0.0 && d.is_finite()) {
            report.violation(NonpositiveDiffusivity, format!("D[{j}] = {d} must be > 0"));
        }
    }
    if !(data.lambda > 0.0 && data.lambda.is_finite()) {
        report.violation(NonpositiveLambda, format!("lambda = {} must be > 0", data.lambda));
    }
    if !(data.r0 > 0.0 && data.r0.is_finite()) {
        report.violation(NonpositiveR0, format!("R0 = {} must be > 0", data.r0));
    }

    let grid = Grid::new(VALIDATION_CELLS).expect("validation grid");
    let sample = |f: &ScalarFn| grid.nodes().map(|z| f(z)).collect::<Vec<f64>>();
    let phi: Vec<Vec<f64>> = data.phi.iter().map(sample).collect();
    let theta: Vec<Vec<f64>> = data.theta.iter().map(sample).collect();
    for (name, set) in [("phi", &phi), ("theta", &theta)] {
        for (i, values) in set.iter().enumerate() {
            if values.iter().any(|v| !v.is_finite()) {
                report.violation(NonfiniteData, format!("{name}[{i}] has non-finite samples"));
            } else if kin.quasi_positive() && values.iter().any(|&v| v < 0.0) {
                report.warning(
                    NegativeInitialData,
                    format!("{name}[{i}] is negative somewhere; positivity is not guaranteed"),
                );
            }
        }
    }
    if report.has_violation(NonfiniteData) {
        return report;
    }

    for j in 0..m {
        let t1 = (data.theta[j])(1.0);
        let p0 = (data.psi[j])(0.0);
        if !p0.is_finite() {
            report.violation(NonfiniteData, format!("psi[{j}](0) is not finite"));
        } else if (t1 - p0).abs() > COMPAT_TOL {
            report.violation(
                CompatMismatch,
                format!("theta[{j}](1) = {t1} differs from psi[{j}](0) = {p0}"),
            );
        }
    }

    if report.ok() {
        second_order_compatibility(data, kin, &phi, &theta, grid, &mut report);
    }
    report
}

/// Warns when `θ''(1) + v1(0)·θ'(1) + R0²·h(φ(1), θ(1)) ≠ ψ'(0)`.
fn second_order_compatibility(
    data: &ProblemData,
    kin: &KineticsModel,
    phi: &[Vec<f64>],
    theta: &[Vec<f64>],
    grid: Grid,
    report: &mut ValidationReport,
) {
    let (n, m) = (kin.n(), kin.m());
    let mut f = vec![0.0; n];
    let mut h = vec![0.0; m];
    let mut y = vec![0.0; n];
    let mut c = vec![0.0; m];
    let mut g_nodes = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        y.iter_mut().zip(phi).for_each(|(y, p)| *y = p[k]);
        c.iter_mut().zip(theta).for_each(|(c, t)| *c = t[k]);
        g_nodes.push(kin.eval_into(&y, &c, &mut f, &mut h));
    }
    let v1 = data.r0 * data.r0 * crate::grid::trapz_values(&g_nodes, grid.dz());
    // h at z = 1 is still in the buffer from the last node.
    let delta = 1e-3;
    for j in 0..m {
        let th = &data.theta[j];
        let (a, b, cc, d) = (th(1.0), th(1.0 - delta), th(1.0 - 2.0 * delta), th(1.0 - 3.0 * delta));
        let dtheta = (3.0 * a - 4.0 * b + cc) / (2.0 * delta);
        let d2theta = (2.0 * a - 5.0 * b + 4.0 * cc - d) / (delta * delta);
        let ps = &data.psi[j];
        let dpsi = (-3.0 * ps(0.0) + 4.0 * ps(delta) - ps(2.0 * delta)) / (2.0 * delta);
        let lhs = d2theta * data.diffusivity[j] + v1 * dtheta + data.r0 * data.r0 * h[j];
        let scale = 1.0 + lhs.abs().max(dpsi.abs());
        if (lhs - dpsi).abs() > 1e-3 * scale || !lhs.is_finite() {
            report.warning(
                ViolationCode::SecondOrderCompat,
                format!(
                    "substrate {j}: D·θ''(1) + v1·θ'(1) + H(1,0) = {lhs:.4e} but ψ'(0) = {dpsi:.4e} \
                     (reduced regularity near t = 0)"
                ),
            );
        }
    }
}
