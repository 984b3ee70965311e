//! Scenario files: JSON schema, defaults, validation and built-in presets.
//!
//! Complex numbers are two-element arrays `[re, im]`. Every default used by
//! the command line lives here; the library itself takes explicit values.

use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};

use crate::estimator::{Experiment, Readout, SamplingMode};
use crate::pointer::{GridSpec, MIN_EXTENT_SIGMAS, SHIFT_GUARD_SIGMAS};
use crate::qmath::{HermitianOperator, Ket, Operator, C64};

pub const DEFAULT_N_POINTS: usize = 512;
pub const DEFAULT_SIGMA_A: f64 = 1.0;
pub const DEFAULT_SIGMA_F: f64 = 0.05;
pub const DEFAULT_EXTENT_A_SIGMAS: f64 = 16.0;
pub const DEFAULT_EXTENT_F_SIGMAS: f64 = 80.0;
pub const DEFAULT_GF_TF: f64 = 1.0;
pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0;

/// Minimum grid points per pointer width.
pub const MIN_POINTS_PER_SIGMA: f64 = 2.0;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const STATE_NORM_TOL: f64 = 1e-10;

/// Name, one-line description and file contents of each built-in scenario.
pub const PRESETS: [(&str, &str, &str); 2] = [
    (
        "qubit-theta30",
        "A = sigma_z, I = (cos 30, sin 30), F = (cos 30, -sin 30); weak value 2",
        include_str!("../../presets/qubit-theta30.json"),
    ),
    (
        "imaginary-sigma-x",
        "A = sigma_x, I = |0>, F = (|0> + i|1>)/sqrt2, momentum readout; weak value -i",
        include_str!("../../presets/imaginary-sigma-x.json"),
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Parse,
    MissingField,
    InvalidField,
    Dimension,
    NotHermitian,
    NotNormalized,
    InvalidGrid,
    GridExtent,
    GridResolution,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Io => "io_error",
            ErrorKind::Parse => "parse_error",
            ErrorKind::MissingField => "missing_field",
            ErrorKind::InvalidField => "invalid_field",
            ErrorKind::Dimension => "dimension_mismatch",
            ErrorKind::NotHermitian => "not_hermitian",
            ErrorKind::NotNormalized => "not_normalized",
            ErrorKind::InvalidGrid => "invalid_grid",
            ErrorKind::GridExtent => "grid_extent",
            ErrorKind::GridResolution => "grid_resolution",
        }
    }
}

/// A load or validation failure, tied to the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub kind: ErrorKind,
    pub field: String,
    pub detail: String,
}

impl ScenarioError {
    pub fn new(kind: ErrorKind, field: impl Into<String>, detail: impl Into<String>) -> Self {
        ScenarioError { kind, field: field.into(), detail: detail.into() }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in `{}`: {}", self.kind.code(), self.field, self.detail)
    }
}

impl std::error::Error for ScenarioError {}

type Res<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ClosedForm,
    ExactMoments,
    SamplePointer,
    SampleIdeal,
    Diagnostics,
}

impl Mode {
    pub const ALL: [Mode; 5] =
        [Mode::ClosedForm, Mode::ExactMoments, Mode::SamplePointer, Mode::SampleIdeal, Mode::Diagnostics];

    pub fn name(self) -> &'static str {
        match self {
            Mode::ClosedForm => "closed-form",
            Mode::ExactMoments => "exact-moments",
            Mode::SamplePointer => "sample-pointer",
            Mode::SampleIdeal => "sample-ideal",
            Mode::Diagnostics => "diagnostics",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn sampling(self) -> Option<SamplingMode> {
        match self {
            Mode::SamplePointer => Some(SamplingMode::PointerModel),
            Mode::SampleIdeal => Some(SamplingMode::IdealProjection),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerParams {
    pub sigma: f64,
    pub n_points: usize,
    pub extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub mode: Mode,
    pub readout: Readout,
    pub samples: u64,
    pub seed: u64,
    pub threshold: f64,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub a_matrix: HermitianOperator,
    pub i_vector: Ket,
    pub f_vector: Ket,
    /// Set for the single-qubit family `I = (cos θ, sin θ)`,
    /// `F = (cos θ, -sin θ)`.
    pub theta_deg: Option<f64>,
    pub ga_ta: f64,
    pub gf_tf: f64,
    pub hbar: f64,
    pub pointer_a: PointerParams,
    pub pointer_f: PointerParams,
    pub run: RunParams,
}

pub fn default_extent_a(sigma_a: f64) -> f64 {
    DEFAULT_EXTENT_A_SIGMAS * sigma_a
}

pub fn default_extent_f(sigma_f: f64, gf_tf: f64) -> f64 {
    (DEFAULT_EXTENT_F_SIGMAS * sigma_f).max(4.0 * gf_tf.abs())
}

pub fn default_threshold(gf_tf: f64) -> f64 {
    0.5 * gf_tf
}

/// Pre- and post-selected kets of the θ family.
pub fn theta_states(theta_deg: f64) -> (Ket, Ket) {
    let t = theta_deg.to_radians();
    let (c, s) = (t.cos(), t.sin());
    (
        Ket::from_real(&[c, s]).expect("two amplitudes"),
        Ket::from_real(&[c, -s]).expect("two amplitudes"),
    )
}

impl Scenario {
    pub fn system_dim(&self) -> usize {
        self.a_matrix.dim()
    }

    fn grid(&self, p: &PointerParams) -> GridSpec {
        GridSpec::new(p.n_points, p.extent, p.sigma, self.hbar).expect("validated at load")
    }

    pub fn grid_a(&self) -> GridSpec {
        self.grid(&self.pointer_a)
    }

    pub fn grid_f(&self) -> GridSpec {
        self.grid(&self.pointer_f)
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            observable: self.a_matrix.clone(),
            initial: self.i_vector.clone(),
            post: self.f_vector.clone(),
            strength_a: self.ga_ta,
            strength_f: self.gf_tf,
            pointer_a: self.grid_a(),
            pointer_f: self.grid_f(),
            readout: self.run.readout,
            threshold: self.run.threshold,
        }
    }

    /// Re-runs the grid guards, e.g. after a parameter was changed.
    pub fn validate(&self) -> Res<()> {
        check_positive("hbar", self.hbar)?;
        check_finite("gA_tA", self.ga_ta)?;
        check_positive("gF_tF", self.gf_tf)?;
        check_finite("run.threshold", self.run.threshold)?;
        let max_eig = self.a_matrix.spectral().eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        check_pointer("pointer_A", &self.pointer_a, self.hbar, self.ga_ta.abs() * max_eig)?;
        check_pointer("pointer_F", &self.pointer_f, self.hbar, self.gf_tf.abs())?;
        Ok(())
    }
}

fn check_finite(field: &str, v: f64) -> Res<()> {
    if !v.is_finite() {
        return Err(ScenarioError::new(ErrorKind::InvalidField, field, format!("{v} is not finite")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Res<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(ScenarioError::new(ErrorKind::InvalidField, field, format!("{v} must be positive")));
    }
    Ok(())
}

fn check_pointer(name: &str, p: &PointerParams, hbar: f64, max_shift: f64) -> Res<()> {
    let spec = GridSpec::new(p.n_points, p.extent, p.sigma, hbar)
        .map_err(|e| ScenarioError::new(ErrorKind::InvalidGrid, name, e.to_string()))?;
    if p.extent < MIN_EXTENT_SIGMAS * p.sigma {
        return Err(ScenarioError::new(
            ErrorKind::GridExtent,
            format!("{name}.extent"),
            format!("{} is below {MIN_EXTENT_SIGMAS}·sigma = {}", p.extent, MIN_EXTENT_SIGMAS * p.sigma),
        ));
    }
    if spec.check_shift(max_shift).is_err() {
        return Err(ScenarioError::new(
            ErrorKind::GridExtent,
            format!("{name}.extent"),
            format!(
                "largest pointer shift {max_shift} plus {SHIFT_GUARD_SIGMAS}·sigma exceeds half extent {}",
                0.5 * p.extent
            ),
        ));
    }
    if p.sigma < MIN_POINTS_PER_SIGMA * spec.dx() {
        return Err(ScenarioError::new(
            ErrorKind::GridResolution,
            format!("{name}.sigma"),
            format!("sigma {} spans fewer than {MIN_POINTS_PER_SIGMA} cells of width {}", p.sigma, spec.dx()),
        ));
    }
    Ok(())
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Res<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::new(ErrorKind::Io, path.display().to_string(), e.to_string()))?;
    parse_scenario(&text)
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Res<Scenario> {
    let (_, _, text) = PRESETS.iter().find(|(n, _, _)| *n == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        ScenarioError::new(
            ErrorKind::InvalidField,
            "preset",
            format!("unknown preset `{name}` (known: {})", known.join(", ")),
        )
    })?;
    parse_scenario(text)
}

const TOP_KEYS: [&str; 11] = [
    "system_dim", "A_matrix", "I_vector", "F_vector", "theta_deg", "gA_tA", "gF_tF", "hbar", "pointer_A",
    "pointer_F", "run",
];
const POINTER_KEYS: [&str; 3] = ["sigma", "n_points", "extent"];
const RUN_KEYS: [&str; 5] = ["mode", "readout", "samples", "seed", "threshold"];

pub fn parse_scenario(text: &str) -> Res<Scenario> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| ScenarioError::new(ErrorKind::Parse, "<document>", e.to_string()))?;
    let obj = as_object(&root, "<document>")?;
    reject_unknown(obj, &TOP_KEYS, "")?;

    let dim = usize_field(obj, "system_dim")?;
    if dim == 0 {
        return Err(ScenarioError::new(ErrorKind::InvalidField, "system_dim", "must be at least 1"));
    }
    let a_matrix = parse_matrix(require(obj, "A_matrix")?, dim)?;

    let theta_deg = opt_f64(obj, "theta_deg", "theta_deg")?;
    let (i_vector, f_vector) = match theta_deg {
        Some(theta) => {
            for key in ["I_vector", "F_vector"] {
                if obj.contains_key(key) {
                    return Err(ScenarioError::new(
                        ErrorKind::InvalidField,
                        key,
                        "must be omitted when theta_deg is given",
                    ));
                }
            }
            if dim != 2 {
                return Err(ScenarioError::new(
                    ErrorKind::Dimension,
                    "theta_deg",
                    format!("applies only to system_dim 2, got {dim}"),
                ));
            }
            check_finite("theta_deg", theta)?;
            theta_states(theta)
        }
        None => (
            parse_ket(require(obj, "I_vector")?, dim, "I_vector")?,
            parse_ket(require(obj, "F_vector")?, dim, "F_vector")?,
        ),
    };

    let ga_ta = f64_field(obj, "gA_tA", "gA_tA")?;
    let gf_tf = opt_f64(obj, "gF_tF", "gF_tF")?.unwrap_or(DEFAULT_GF_TF);
    let hbar = opt_f64(obj, "hbar", "hbar")?.unwrap_or(DEFAULT_HBAR);
    check_positive("gF_tF", gf_tf)?;

    let pointer_a = parse_pointer(obj.get("pointer_A"), "pointer_A", DEFAULT_SIGMA_A, default_extent_a)?;
    let pointer_f =
        parse_pointer(obj.get("pointer_F"), "pointer_F", DEFAULT_SIGMA_F, |s| default_extent_f(s, gf_tf))?;
    let run = parse_run(obj.get("run"), gf_tf)?;

    let scenario = Scenario { a_matrix, i_vector, f_vector, theta_deg, ga_ta, gf_tf, hbar, pointer_a, pointer_f, run };
    scenario.validate()?;
    Ok(scenario)
}

fn as_object<'a>(v: &'a Value, field: &str) -> Res<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| ScenarioError::new(ErrorKind::InvalidField, field, "expected a JSON object"))
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], prefix: &str) -> Res<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(ScenarioError::new(
            ErrorKind::InvalidField,
            format!("{prefix}{k}"),
            format!("unknown key (expected one of: {})", known.join(", ")),
        )),
        None => Ok(()),
    }
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str) -> Res<&'a Value> {
    obj.get(key).ok_or_else(|| ScenarioError::new(ErrorKind::MissingField, key, "required"))
}

fn number(v: &Value, field: &str) -> Res<f64> {
    v.as_f64().ok_or_else(|| ScenarioError::new(ErrorKind::InvalidField, field, format!("expected a number, got {v}")))
}

fn f64_field(obj: &Map<String, Value>, key: &str, field: &str) -> Res<f64> {
    obj.get(key)
        .ok_or_else(|| ScenarioError::new(ErrorKind::MissingField, field, "required"))
        .and_then(|v| number(v, field))
}

fn opt_f64(obj: &Map<String, Value>, key: &str, field: &str) -> Res<Option<f64>> {
    obj.get(key).map(|v| number(v, field)).transpose()
}

fn integer(v: &Value, field: &str) -> Res<u64> {
    v.as_u64().ok_or_else(|| {
        ScenarioError::new(ErrorKind::InvalidField, field, format!("expected a non-negative integer, got {v}"))
    })
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Res<usize> {
    integer(require(obj, key)?, key).map(|v| v as usize)
}

fn parse_complex(v: &Value, field: &str) -> Res<C64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(C64::new(number(re, field)?, number(im, field)?)),
        _ => Err(ScenarioError::new(ErrorKind::InvalidField, field, format!("expected [re, im], got {v}"))),
    }
}

fn parse_list<'a>(v: &'a Value, len: usize, field: &str) -> Res<&'a [Value]> {
    let items = v
        .as_array()
        .ok_or_else(|| ScenarioError::new(ErrorKind::InvalidField, field, "expected an array"))?;
    if items.len() != len {
        return Err(ScenarioError::new(
            ErrorKind::Dimension,
            field,
            format!("expected {len} entries, got {}", items.len()),
        ));
    }
    Ok(items)
}

fn parse_ket(v: &Value, dim: usize, field: &str) -> Res<Ket> {
    let amps = parse_list(v, dim, field)?
        .iter()
        .enumerate()
        .map(|(k, c)| parse_complex(c, &format!("{field}[{k}]")))
        .collect::<Res<Vec<C64>>>()?;
    let ket = Ket::new(amps).map_err(|e| ScenarioError::new(ErrorKind::InvalidField, field, e.to_string()))?;
    let norm = ket.norm();
    if !((norm - 1.0).abs() <= STATE_NORM_TOL) {
        return Err(ScenarioError::new(
            ErrorKind::NotNormalized,
            field,
            format!("norm {norm:.15} differs from 1 by more than {STATE_NORM_TOL:e}"),
        ));
    }
    Ok(ket)
}

fn parse_matrix(v: &Value, dim: usize) -> Res<HermitianOperator> {
    let field = "A_matrix";
    let rows = parse_list(v, dim, field)?
        .iter()
        .enumerate()
        .map(|(r, row)| {
            parse_list(row, dim, &format!("{field}[{r}]"))?
                .iter()
                .enumerate()
                .map(|(c, x)| parse_complex(x, &format!("{field}[{r}][{c}]")))
                .collect::<Res<Vec<C64>>>()
        })
        .collect::<Res<Vec<Vec<C64>>>>()?;
    let op = Operator::from_rows(rows).map_err(|e| ScenarioError::new(ErrorKind::Dimension, field, e.to_string()))?;
    let deviation = op.hermiticity_deviation();
    if !(deviation <= HERMITIAN_TOL) {
        return Err(ScenarioError::new(
            ErrorKind::NotHermitian,
            field,
            format!("max |A_ij - conj(A_ji)| = {deviation:.3e} exceeds {HERMITIAN_TOL:e}"),
        ));
    }
    HermitianOperator::new(op).map_err(|e| ScenarioError::new(ErrorKind::NotHermitian, field, e.to_string()))
}

fn parse_pointer(
    v: Option<&Value>,
    name: &str,
    default_sigma: f64,
    default_extent: impl Fn(f64) -> f64,
) -> Res<PointerParams> {
    let empty = Map::new();
    let obj = match v {
        Some(v) => as_object(v, name)?,
        None => &empty,
    };
    reject_unknown(obj, &POINTER_KEYS, &format!("{name}."))?;
    let sigma = opt_f64(obj, "sigma", &format!("{name}.sigma"))?.unwrap_or(default_sigma);
    check_positive(&format!("{name}.sigma"), sigma)?;
    let n_points = match obj.get("n_points") {
        Some(v) => integer(v, &format!("{name}.n_points"))? as usize,
        None => DEFAULT_N_POINTS,
    };
    let extent = opt_f64(obj, "extent", &format!("{name}.extent"))?.unwrap_or_else(|| default_extent(sigma));
    Ok(PointerParams { sigma, n_points, extent })
}

fn parse_run(v: Option<&Value>, gf_tf: f64) -> Res<RunParams> {
    let empty = Map::new();
    let obj = match v {
        Some(v) => as_object(v, "run")?,
        None => &empty,
    };
    reject_unknown(obj, &RUN_KEYS, "run.")?;
    let mode = match obj.get("mode") {
        Some(v) => {
            let s = v.as_str().unwrap_or_default();
            Mode::parse(s).ok_or_else(|| {
                let names: Vec<&str> = Mode::ALL.iter().map(|m| m.name()).collect();
                ScenarioError::new(ErrorKind::InvalidField, "run.mode", format!("{v} is not one of {}", names.join(", ")))
            })?
        }
        None => Mode::ClosedForm,
    };
    let readout = match obj.get("readout").map(|v| (v, v.as_str())) {
        None => Readout::Position,
        Some((_, Some("position"))) => Readout::Position,
        Some((_, Some("momentum"))) => Readout::Momentum,
        Some((v, _)) => {
            return Err(ScenarioError::new(
                ErrorKind::InvalidField,
                "run.readout",
                format!("{v} is not one of position, momentum"),
            ))
        }
    };
    let samples = obj.get("samples").map(|v| integer(v, "run.samples")).transpose()?.unwrap_or(DEFAULT_SAMPLES);
    let seed = obj.get("seed").map(|v| integer(v, "run.seed")).transpose()?.unwrap_or(DEFAULT_SEED);
    let threshold = opt_f64(obj, "threshold", "run.threshold")?.unwrap_or_else(|| default_threshold(gf_tf));
    Ok(RunParams { mode, readout, samples, seed, threshold })
}
