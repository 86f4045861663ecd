//! TOML run configuration.
//!
//! The schema is documented in `docs/config.md`. Parsing is strict: unknown
//! keys are rejected and every value is validated before a [`RunSpec`] is
//! handed out.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::coupler::{PositivityMode, SolverConfig};
use crate::error::{Error, Result};
use crate::expr::{Expr, Vars};
use crate::model::{
    constant_fn, linear_preset, monod_preset, nodal_fn, validate_problem, Kinetics, KineticsModel, MonodParams,
    MonodSpecies, ProblemData, ScalarFn, ValidationReport, ViolationCode,
};
use crate::monitor::EnergyWeights;
use crate::transport::TransportCoefficient;

/// Top-level file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

/// A profile given as an expression, a constant or nodal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Number(f64),
    Expression(String),
    Nodal(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub lambda: f64,
    pub r0: f64,
    pub diffusivity: Vec<f64>,
    pub phi: Vec<Spanned<DataSpec>>,
    pub theta: Vec<Spanned<DataSpec>>,
    pub psi: Vec<Spanned<DataSpec>>,
    pub kinetics: KineticsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodSpeciesSpec {
    pub mu_max: f64,
    pub half_saturation: f64,
    #[serde(default)]
    pub decay: f64,
    /// 1-based substrate index.
    #[serde(default = "one")]
    pub limiting: usize,
    pub yields: Vec<f64>,
    /// 1-based substrate indices; defaults to the limiting substrate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumes: Option<Vec<usize>>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Zero,
    Monod,
    Linear,
    Expr,
}

/// Kinetics block. Which optional keys are allowed depends on `preset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsSection {
    pub preset: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<Vec<MonodSpeciesSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Spanned<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Spanned<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasi_positive: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub grid_n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "defaults::picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "defaults::picard_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "defaults::theta_scheme")]
    pub theta_scheme: f64,
    #[serde(default)]
    pub transport_coefficient: TransportCoefficient,
    #[serde(default)]
    pub positivity_mode: PositivityMode,
    #[serde(default = "defaults::continuation_threshold")]
    pub continuation_threshold: f64,
    #[serde(default = "defaults::r_floor")]
    pub r_floor: f64,
    #[serde(default)]
    pub energy_weights: EnergyWeights,
}

mod defaults {
    pub fn picard_tol() -> f64 {
        1e-10
    }
    pub fn picard_max_iter() -> usize {
        50
    }
    pub fn theta_scheme() -> f64 {
        0.5
    }
    pub fn continuation_threshold() -> f64 {
        1e6
    }
    pub fn r_floor() -> f64 {
        crate::boundary::DEFAULT_R_FLOOR
    }
    pub fn stride() -> usize {
        1
    }
    pub fn formats() -> Vec<super::OutputFormat> {
        vec![super::OutputFormat::Csv]
    }
    pub fn envelope_tol() -> f64 {
        1e-3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "defaults::stride")]
    pub stride: usize,
    #[serde(default = "defaults::formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            stride: defaults::stride(),
            formats: defaults::formats(),
        }
    }
}

/// Constants for the energy envelope check run by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub alpha: f64,
    #[serde(default)]
    pub beta_m0: f64,
    #[serde(default)]
    pub include_boundary_flux: bool,
    #[serde(default = "defaults::envelope_tol")]
    pub envelope_tol: f64,
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub data: ProblemData,
    pub kinetics: KineticsModel,
    pub solver: SolverConfig,
    pub t_end: f64,
    pub output: OutputSection,
    pub verify: Option<VerifySection>,
    pub validation: ValidationReport,
    /// Hex SHA-256 of the configuration text.
    pub config_hash: String,
    pub file: ConfigFile,
}

impl RunSpec {
    /// Re-validates after an override such as a sweep value.
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonpositiveParam {
                name: "lambda".into(),
                value: lambda,
            });
        }
        self.data.lambda = lambda;
        self.file.problem.lambda = lambda;
        Ok(self)
    }
}

pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn toml_error(text: &str, err: toml::de::Error) -> Error {
    let line = err.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    let message = err.message().to_string();
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return Error::UnknownKey { key, line };
    }
    if let Some(rest) = message.strip_prefix("unknown variant `") {
        let value = rest.split('`').next().unwrap_or_default();
        return Error::Schema {
            key: format!("line {line}"),
            message: format!("unsupported value `{value}`: {message}"),
        };
    }
    if let Some(rest) = message.strip_prefix("missing field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return Error::Schema {
            key,
            message: format!("required key is missing (table ending near line {line})"),
        };
    }
    Error::Parse { line, message }
}

fn schema(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        key: key.into(),
        message: message.into(),
    }
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn expr(&self, spanned: &Spanned<String>, key: &str) -> Result<Expr> {
        Expr::parse(spanned.get_ref()).map_err(|e| Error::Parse {
            line: line_of(self.text, spanned.span().start),
            message: format!("{key}: {e}"),
        })
    }

    fn profile(&self, spec: &Spanned<DataSpec>, key: &str, var: char) -> Result<ScalarFn> {
        let line = line_of(self.text, spec.span().start);
        match spec.get_ref() {
            DataSpec::Number(x) => Ok(constant_fn(*x)),
            DataSpec::Nodal(values) => {
                if var == 't' {
                    return Err(schema(key, "boundary data must be a number or an expression in t"));
                }
                nodal_fn(values.clone()).map_err(|e| schema(key, e.to_string()))
            }
            DataSpec::Expression(src) => {
                let e = Expr::parse(src).map_err(|e| Error::Parse {
                    line,
                    message: format!("{key}: {e}"),
                })?;
                if e.species_used() != (0, 0) {
                    return Err(schema(key, "profiles cannot reference Y or C"));
                }
                let other = if var == 'z' { e.uses_t() } else { e.uses_z() };
                if other {
                    return Err(schema(key, format!("only `{var}` is allowed here")));
                }
                Ok(if var == 'z' {
                    Arc::new(move |z| e.eval_zt(z, 0.0))
                } else {
                    Arc::new(move |t| e.eval_zt(1.0, t))
                })
            }
        }
    }
}

struct ExprLaw {
    f: Vec<Expr>,
    h: Vec<Expr>,
    g: Option<Expr>,
}

impl Kinetics for ExprLaw {
    fn eval(&self, y: &[f64], c: &[f64], f: &mut [f64], h: &mut [f64]) -> f64 {
        let vars = Vars { z: 0.0, t: 0.0, y, c };
        for (out, e) in f.iter_mut().zip(&self.f) {
            *out = e.eval(&vars);
        }
        for (out, e) in h.iter_mut().zip(&self.h) {
            *out = e.eval(&vars);
        }
        match &self.g {
            Some(g) => g.eval(&vars),
            None => f.iter().sum(),
        }
    }
}

fn build_kinetics(k: &KineticsSection, n: usize, m: usize, ctx: &Ctx<'_>) -> Result<KineticsModel> {
    let allowed: &[&str] = match k.preset {
        Preset::Zero => &[],
        Preset::Monod => &["species"],
        Preset::Linear => &["a", "b", "c", "d"],
        Preset::Expr => &["f", "h", "g", "quasi_positive"],
    };
    let present = [
        ("species", k.species.is_some()),
        ("a", k.a.is_some()),
        ("b", k.b.is_some()),
        ("c", k.c.is_some()),
        ("d", k.d.is_some()),
        ("f", k.f.is_some()),
        ("h", k.h.is_some()),
        ("g", k.g.is_some()),
        ("quasi_positive", k.quasi_positive.is_some()),
    ];
    if let Some((key, _)) = present.iter().find(|(key, set)| *set && !allowed.contains(key)) {
        return Err(schema(
            format!("problem.kinetics.{key}"),
            format!("not used by preset `{}`", preset_name(k.preset)),
        ));
    }
    let kin_err = |e: Error| match e {
        Error::Schema { .. } | Error::Parse { .. } => e,
        other => schema("problem.kinetics", other.to_string()),
    };
    let model = match k.preset {
        Preset::Zero => KineticsModel::zero(n, m),
        Preset::Monod => {
            let species = k
                .species
                .as_ref()
                .ok_or_else(|| schema("problem.kinetics.species", "required for preset `monod`"))?;
            let to_zero_based = |i: usize, what: &str| {
                i.checked_sub(1)
                    .ok_or_else(|| schema(format!("problem.kinetics.species.{what}"), "indices are 1-based"))
            };
            let species = species
                .iter()
                .map(|s| {
                    Ok(MonodSpecies {
                        mu_max: s.mu_max,
                        half_saturation: s.half_saturation,
                        decay: s.decay,
                        limiting: to_zero_based(s.limiting, "limiting")?,
                        yields: s.yields.clone(),
                        consumes: s
                            .consumes
                            .as_ref()
                            .map(|v| v.iter().map(|&j| to_zero_based(j, "consumes")).collect())
                            .transpose()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            monod_preset(&MonodParams {
                substrates: m,
                species,
            })
        }
        Preset::Linear => {
            let need = |v: &Option<_>, key: &str| {
                v.clone()
                    .ok_or_else(|| schema(format!("problem.kinetics.{key}"), "required for preset `linear`"))
            };
            linear_preset(
                need(&k.a, "a")?,
                need(&k.b, "b")?,
                k.c.clone().unwrap_or_else(|| vec![0.0; n]),
                k.d.clone().unwrap_or_else(|| vec![0.0; m]),
            )
        }
        Preset::Expr => {
            let list = |v: &Option<Vec<Spanned<String>>>, key: &str, len: usize| -> Result<Vec<Expr>> {
                let v = v
                    .as_ref()
                    .ok_or_else(|| schema(format!("problem.kinetics.{key}"), "required for preset `expr`"))?;
                if v.len() != len {
                    return Err(schema(
                        format!("problem.kinetics.{key}"),
                        format!("expected {len} expressions, got {}", v.len()),
                    ));
                }
                v.iter()
                    .enumerate()
                    .map(|(i, s)| ctx.expr(s, &format!("problem.kinetics.{key}[{}]", i + 1)))
                    .collect()
            };
            let f = list(&k.f, "f", n)?;
            let h = list(&k.h, "h", m)?;
            let g = k.g.as_ref().map(|s| ctx.expr(s, "problem.kinetics.g")).transpose()?;
            for e in f.iter().chain(&h).chain(&g) {
                let (ny, nc) = e.species_used();
                if ny > n || nc > m {
                    return Err(schema(
                        "problem.kinetics",
                        format!("`{}` references a species beyond n = {n}, m = {m}", e.source()),
                    ));
                }
                if e.uses_z() || e.uses_t() {
                    return Err(schema(
                        "problem.kinetics",
                        format!("`{}`: kinetics depend on Y and C only", e.source()),
                    ));
                }
            }
            KineticsModel::custom(n, m, ExprLaw { f, h, g }).map(|k2| {
                k2.with_quasi_positive(k.quasi_positive.unwrap_or(false))
                    .with_label("expr")
            })
        }
    };
    let model = model.map_err(kin_err)?;
    if model.n() != n || model.m() != m {
        return Err(schema(
            "problem.kinetics",
            format!(
                "kinetics has n = {}, m = {} but the initial data has n = {n}, m = {m}",
                model.n(),
                model.m()
            ),
        ));
    }
    Ok(model)
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Zero => "zero",
        Preset::Monod => "monod",
        Preset::Linear => "linear",
        Preset::Expr => "expr",
    }
}

fn violation_key(code: ViolationCode) -> &'static str {
    match code {
        ViolationCode::NonpositiveDiffusivity => "problem.diffusivity",
        ViolationCode::NonpositiveLambda => "problem.lambda",
        ViolationCode::NonpositiveR0 => "problem.r0",
        ViolationCode::CompatMismatch => "problem.psi",
        _ => "problem",
    }
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let ctx = Ctx { text };
    let p = &file.problem;
    let (n, m) = (p.phi.len(), p.theta.len());
    if n == 0 {
        return Err(schema("problem.phi", "at least one biomass species is required"));
    }
    if m == 0 {
        return Err(schema("problem.theta", "at least one substrate is required"));
    }
    for (key, len) in [("problem.psi", p.psi.len()), ("problem.diffusivity", p.diffusivity.len())] {
        if len != m {
            return Err(schema(key, format!("expected {m} entries (one per substrate), got {len}")));
        }
    }
    let profiles = |list: &[Spanned<DataSpec>], key: &str, var: char| {
        list.iter()
            .enumerate()
            .map(|(i, s)| ctx.profile(s, &format!("{key}[{}]", i + 1), var))
            .collect::<Result<Vec<_>>>()
    };
    let data = ProblemData {
        phi: profiles(&p.phi, "problem.phi", 'z')?,
        theta: profiles(&p.theta, "problem.theta", 'z')?,
        psi: profiles(&p.psi, "problem.psi", 't')?,
        diffusivity: p.diffusivity.clone(),
        lambda: p.lambda,
        r0: p.r0,
    };
    let kinetics = build_kinetics(&p.kinetics, n, m, &ctx)?;

    let s = &file.solver;
    s.energy_weights
        .check_dims(n, m)
        .map_err(|e| schema("solver.energy_weights", e.to_string()))?;
    let solver = SolverConfig {
        grid_cells: s.grid_n,
        dt: s.dt,
        picard_tol: s.picard_tol,
        picard_max_iter: s.picard_max_iter,
        theta_scheme: s.theta_scheme,
        transport_coefficient: s.transport_coefficient,
        positivity_mode: s.positivity_mode,
        continuation_threshold: s.continuation_threshold,
        energy_weights: s.energy_weights.clone(),
        r_floor: s.r_floor,
        snapshot_stride: file.output.stride,
    };
    solver.check().map_err(|e| match e {
        Error::NonpositiveParam { name, value } => schema(format!("solver.{name}"), format!("{value} must be positive")),
        Error::TooCoarse(c) => schema("solver.grid_n", format!("{c} cells; at least 4 are required")),
        other => other,
    })?;
    if !(s.t_end > 0.0 && s.t_end.is_finite()) {
        return Err(schema("solver.t_end", format!("{} must be positive", s.t_end)));
    }
    if file.output.formats.is_empty() {
        return Err(schema("output.formats", "at least one format is required"));
    }
    if let Some(v) = &file.verify {
        if !(v.alpha > 0.0) {
            return Err(schema("verify.alpha", format!("{} must be positive", v.alpha)));
        }
        if !(v.beta_m0 >= 0.0) {
            return Err(schema("verify.beta_m0", format!("{} must be nonnegative", v.beta_m0)));
        }
    }

    let validation = validate_problem(&data, &kinetics);
    if let Some(first) = validation.violations.first() {
        return Err(schema(violation_key(first.code), format!("{}: {}", first.code, first.message)));
    }

    Ok(RunSpec {
        data,
        kinetics,
        solver,
        t_end: s.t_end,
        output: file.output.clone(),
        verify: file.verify.clone(),
        validation,
        config_hash: config_hash(text),
        file,
    })
}

pub fn load_config(path: impl AsRef<std::path::Path>) -> Result<RunSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const MINIMAL: &str = r#"
[problem]
lambda = 0.5
r0 = 1.0
diffusivity = [1.0]
phi = [1.0]
theta = ["cos(pi*z/2)"]
psi = [0.0]
kinetics = { preset = "zero" }

[solver]
grid_n = 50
dt = 1e-3
t_end = 1.0
"#;

    #[test]
    fn minimal_spec_gets_defaults() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.solver.picard_tol, 1e-10);
        assert_eq!(spec.solver.picard_max_iter, 50);
        assert_eq!(spec.solver.theta_scheme, 0.5);
        assert_eq!(spec.solver.continuation_threshold, 1e6);
        assert_eq!(spec.solver.positivity_mode, PositivityMode::Monitor);
        assert_eq!(spec.solver.transport_coefficient, TransportCoefficient::Scaled);
        assert_eq!(spec.output.stride, 1);
        assert_eq!(spec.data.lambda, 0.5);
        assert_eq!(spec.kinetics.label(), "zero");
        assert_eq!(spec.config_hash.len(), 64);
        assert!(spec.verify.is_none());
    }

    #[test]
    fn theta_expression_matches_cosine() {
        let text = MINIMAL
            .replace("cos(pi*z/2)", "cos(1.5707963*z)")
            .replace("psi = [0.0]", r#"psi = ["cos(1.5707963)"]"#);
        let spec = parse_config(&text).unwrap();
        for k in 0..=50 {
            let z = k as f64 / 50.0;
            assert_abs_diff_eq!((spec.data.theta[0])(z), (std::f64::consts::FRAC_PI_2 * z).cos(), epsilon = 1e-6);
        }
    }

    #[test]
    fn misspelled_key_is_unknown() {
        let text = MINIMAL.replace("lambda = 0.5", "lamda = 0.5");
        match parse_config(&text) {
            Err(Error::UnknownKey { key, line }) => {
                assert_eq!(key, "lamda");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("t_end = 1.0", "t_end = 1.0\ncolour = 2");
        assert!(matches!(parse_config(&text), Err(Error::UnknownKey { .. })));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = MINIMAL.replace("r0 = 1.0", "r0 = = 1.0");
        match parse_config(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_expression_reports_line() {
        let text = MINIMAL.replace("cos(pi*z/2)", "cos(pi*w/2)");
        match parse_config(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("problem.theta[1]"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_violations() {
        let cases = [
            (MINIMAL.replace("psi = [0.0]", "psi = [0.5]"), "problem.psi"),
            (MINIMAL.replace("lambda = 0.5", "lambda = -1.0"), "problem.lambda"),
            (MINIMAL.replace("grid_n = 50", "grid_n = 2"), "solver.grid_n"),
            (MINIMAL.replace("dt = 1e-3", "dt = 0.0"), "solver.dt"),
            (MINIMAL.replace("diffusivity = [1.0]", "diffusivity = [1.0, 2.0]"), "problem.diffusivity"),
            (MINIMAL.replace(r#"preset = "zero""#, r#"preset = "zero", a = [[1.0]]"#), "problem.kinetics.a"),
            (MINIMAL.replace(r#"preset = "zero""#, r#"preset = "monod""#), "problem.kinetics.species"),
        ];
        for (text, want) in cases {
            match parse_config(&text) {
                Err(Error::Schema { key, .. }) => assert_eq!(key, want),
                other => panic!("{want}: {other:?}"),
            }
        }
        let text = MINIMAL.replace(r#"preset = "zero""#, r#"preset = "magic""#);
        assert!(matches!(parse_config(&text), Err(Error::Schema { .. })));
    }

    #[test]
    fn monod_indices_are_one_based() {
        let text = MINIMAL.replace(
            r#"kinetics = { preset = "zero" }"#,
            r#"
[problem.kinetics]
preset = "monod"
species = [{ mu_max = 1.0, half_saturation = 0.5, yields = [0.5], limiting = 1 }]
"#,
        );
        let spec = parse_config(&text).unwrap();
        let e = spec.kinetics.eval(&[1.0], &[0.5]).unwrap();
        assert_abs_diff_eq!(e.f[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.h[0], -1.0, epsilon = 1e-15);
        let bad = text.replace("limiting = 1", "limiting = 0");
        assert!(matches!(parse_config(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn expression_kinetics() {
        let text = MINIMAL.replace(
            r#"kinetics = { preset = "zero" }"#,
            r#"kinetics = { preset = "expr", f = ["0"], h = ["-2*Y1*C1/(0.5+C1)"], g = "Y1*C1/(0.5+C1) - 0.1" }"#,
        );
        let spec = parse_config(&text).unwrap();
        let e = spec.kinetics.eval(&[1.0], &[0.5]).unwrap();
        assert_eq!(e.f[0], 0.0);
        assert_abs_diff_eq!(e.h[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.g, 0.4, epsilon = 1e-15);
        let bad = text.replace(r#"f = ["0"]"#, r#"f = ["Y2"]"#);
        assert!(matches!(parse_config(&bad), Err(Error::Schema { .. })));
        let bad = text.replace(r#"f = ["0"]"#, r#"f = ["z"]"#);
        assert!(matches!(parse_config(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn boundary_data_in_time_and_nodal_profiles() {
        let text = MINIMAL
            .replace("psi = [0.0]", r#"psi = ["0.5*sin(t)"]"#)
            .replace("phi = [1.0]", "phi = [[0.0, 1.0, 0.0]]");
        let spec = parse_config(&text).unwrap();
        assert_abs_diff_eq!((spec.data.psi[0])(1.0), 0.5 * 1f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!((spec.data.phi[0])(0.25), 0.5, epsilon = 1e-15);
        let bad = MINIMAL.replace("psi = [0.0]", r#"psi = ["z"]"#);
        assert!(matches!(parse_config(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn hash_tracks_text() {
        assert_eq!(config_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let a = parse_config(MINIMAL).unwrap().config_hash;
        let b = parse_config(&format!("{MINIMAL}\n")).unwrap().config_hash;
        assert_ne!(a, b);
    }
}
