//! Mode dispatch: turns a scenario into a JSON result document or sweep rows.

use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

use super::output::{format_f64, write_atomic};
use super::scenario::{default_extent_f, theta_states, Mode, Scenario, ScenarioError};
use crate::entanglement::{correlation_witness, product_checks, SeparabilityReport};
use crate::estimator::{
    run_sampling, sample_with, summarize, Readout, RunSummary, Sampler, SamplingMode,
};
use crate::qmath::{expectation, C64};
use crate::vonneumann::{device_density, device_momentum_density};
use crate::weakvalues::{commutation_report, WeakValueReport};

/// Anything that stops a command, classified by exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Scenario(ScenarioError),
    Runtime(crate::Error),
    Io(String, std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Scenario(_) => 2,
            RunError::Runtime(_) | RunError::Io(..) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Scenario(e) => write!(f, "invalid scenario: {e}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
            RunError::Io(p, e) => write!(f, "cannot write {p}: {e}"),
        }
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        RunError::Scenario(e)
    }
}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        RunError::Runtime(e)
    }
}

type Res<T> = std::result::Result<T, RunError>;

fn complex(c: C64) -> Value {
    json!([c.re, c.im])
}

pub fn weak_value_json(r: &WeakValueReport) -> Value {
    let n = &r.commutator_norms;
    json!({
        "weak_value": complex(r.weak_value),
        "re_formula": r.re_formula,
        "im_formula": r.im_formula,
        "overlap": complex(r.overlap),
        "postselect_prob": r.postselect_prob,
        "expectation": r.expectation,
        "commutator_norms": {
            "A_F": n.a_f,
            "F_rho": n.f_rho,
            "A_rho": n.a_rho,
            "A_F_rho": n.a_f_rho,
        },
    })
}

pub fn separability_json(r: &SeparabilityReport) -> Value {
    json!({
        "bipartition": r.bipartition,
        "singular_values": r.singular_values,
        "correlation_gap": r.correlation_gap,
        "is_product": r.is_product,
        "correlated": r.correlated,
        "tolerance": r.tolerance,
    })
}

pub fn summary_json(s: &RunSummary) -> Value {
    json!({
        "n_total": s.n_total,
        "n_selected": s.n_selected,
        "mean_all_AF": s.mean_all_af,
        "mean_F": s.mean_f,
        "mean_F_raw": s.mean_f_raw,
        "mean_selected_A": s.mean_selected_a,
        "mean_selected_AF": s.mean_selected_af,
        "boost": s.boost,
        "estimate": s.estimate,
        "std_error": s.std_error,
        "seed": s.seed,
        "mode": s.mode.to_string(),
        "readout": s.readout.to_string(),
        "threshold": s.threshold,
    })
}

/// Exact pointer statistics of the two-device state and their first-order
/// predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMoments {
    /// `x̄_A = Tr[ρ x̂_A]`.
    pub mean_a: f64,
    /// `g_A t_A ⟨I|A|I⟩`.
    pub predicted_mean_a: f64,
    /// `x̄_F`.
    pub mean_f: f64,
    /// `g_F t_F ⟨I|F̂|I⟩`.
    pub predicted_mean_f: f64,
    /// `⟨x_A x_F⟩`.
    pub correlation_af: f64,
    /// `g_A t_A g_F t_F Re⟨I|F̂A|I⟩`.
    pub predicted_correlation_af: f64,
    /// `⟨a x_F⟩` with `a` the A readout in the scenario's basis.
    pub readout_correlation: f64,
    /// `⟨a x_F⟩ / x̄_F`.
    pub boosted_mean: f64,
    /// Weak-value estimate from `boosted_mean`.
    pub estimate: f64,
    /// Mean of `a` over `x_F > threshold`, from the exact density.
    pub postselected_mean: f64,
    pub postselected_mass: f64,
    pub postselected_estimate: f64,
}

pub fn exact_moments(sc: &Scenario) -> Res<ExactMoments> {
    let exp = sc.experiment();
    let s = exp.joint_state()?;
    let pos = device_density(&s)?;
    let readout = match sc.run.readout {
        Readout::Position => pos.clone(),
        Readout::Momentum => device_momentum_density(&s)?,
    };
    let a = sc.a_matrix.as_operator();
    let proj = sc.f_vector.projector()?;
    let i = &sc.i_vector;
    let fa = proj.matmul(a)?;

    let mean_f = pos.mean_f();
    let readout_correlation = readout.correlation();
    let boosted_mean = readout_correlation / mean_f;
    let (postselected_mean, postselected_mass) = readout.postselected_mean_a(sc.run.threshold);
    Ok(ExactMoments {
        mean_a: pos.mean_a(),
        predicted_mean_a: sc.ga_ta * expectation(a, i)?.re,
        mean_f,
        predicted_mean_f: sc.gf_tf * expectation(&proj, i)?.re,
        correlation_af: pos.correlation(),
        predicted_correlation_af: sc.ga_ta * sc.gf_tf * expectation(&fa, i)?.re,
        readout_correlation,
        boosted_mean,
        estimate: exp.estimate_from_mean(boosted_mean),
        postselected_mean,
        postselected_mass,
        postselected_estimate: exp.estimate_from_mean(postselected_mean),
    })
}

fn exact_moments_json(m: &ExactMoments) -> Value {
    json!({
        "mean_A": m.mean_a,
        "predicted_mean_A": m.predicted_mean_a,
        "mean_F": m.mean_f,
        "predicted_mean_F": m.predicted_mean_f,
        "correlation_AF": m.correlation_af,
        "predicted_correlation_AF": m.predicted_correlation_af,
        "readout_correlation": m.readout_correlation,
        "boosted_mean": m.boosted_mean,
        "estimate": m.estimate,
        "postselected_mean": m.postselected_mean,
        "postselected_mass": m.postselected_mass,
        "postselected_estimate": m.postselected_estimate,
    })
}

fn target(r: &WeakValueReport, readout: Readout) -> f64 {
    match readout {
        Readout::Position => r.re_formula,
        Readout::Momentum => r.im_formula,
    }
}

fn write_records(path: &Path, records: &[crate::estimator::MeasurementRecord]) -> Res<()> {
    let mut s = String::with_capacity(64 * records.len() + 32);
    s.push_str("index,value_A,value_F,selected\n");
    for (k, r) in records.iter().enumerate() {
        s.push_str(&format!("{k},{},{},{}\n", format_f64(r.value_a), format_f64(r.value_f), r.selected));
    }
    write_atomic(path, s.as_bytes()).map_err(|e| RunError::Io(path.display().to_string(), e))
}

fn sample(sc: &Scenario, mode: SamplingMode, dump: Option<&Path>) -> Res<RunSummary> {
    let exp = sc.experiment();
    let n = sc.run.samples as usize;
    let seed = sc.run.seed;
    match dump {
        None => Ok(run_sampling(&exp, mode, n, seed)?),
        Some(path) => {
            let records = sample_with(&Sampler::new(&exp, mode)?, n, seed);
            write_records(path, &records)?;
            Ok(summarize(&records, &exp, mode, seed)?)
        }
    }
}

/// Runs the scenario's mode and returns the result document.
pub fn run_scenario(sc: &Scenario, dump: Option<&Path>) -> Res<Value> {
    let mode = sc.run.mode;
    if dump.is_some() && mode.sampling().is_none() {
        return Err(RunError::Usage(format!("--dump-records needs a sampling mode, not {}", mode.name())));
    }
    let wv = commutation_report(&sc.a_matrix, &sc.i_vector, &sc.f_vector);
    let mut doc = match mode {
        Mode::ClosedForm => weak_value_json(&wv?),
        Mode::ExactMoments => {
            let mut v = exact_moments_json(&exact_moments(sc)?);
            if let Ok(r) = &wv {
                v["target"] = json!(target(r, sc.run.readout));
            }
            v
        }
        Mode::SamplePointer | Mode::SampleIdeal => {
            let sm = mode.sampling().expect("sampling mode");
            let mut v = summary_json(&sample(sc, sm, dump)?);
            v["target"] = json!(target(&wv?, sc.run.readout));
            v
        }
        Mode::Diagnostics => {
            let exp = sc.experiment();
            let single = exp.single_device_state()?;
            let joint = exp.joint_state()?;
            let list = |v: Vec<SeparabilityReport>| Value::Array(v.iter().map(separability_json).collect());
            json!({
                "commutation_report": weak_value_json(&wv?),
                "separability_after_A": list(product_checks(&single)?),
                "separability_after_A_and_F": list(product_checks(&joint)?),
                "correlation_witness": separability_json(&correlation_witness(&joint)?),
            })
        }
    };
    doc["mode"] = json!(mode.name());
    doc["readout"] = json!(sc.run.readout.to_string());
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    GaTa,
    Theta,
    SigmaF,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GaTa => "gA_tA",
            SweepParam::Theta => "theta",
            SweepParam::SigmaF => "sigma_F",
        }
    }
}

/// Copy of `sc` with one parameter replaced, revalidated.
pub fn with_param(sc: &Scenario, param: SweepParam, value: f64) -> Res<Scenario> {
    let mut s = sc.clone();
    match param {
        SweepParam::GaTa => s.ga_ta = value,
        SweepParam::Theta => {
            if s.theta_deg.is_none() {
                return Err(RunError::Usage(
                    "theta can only be swept on a scenario that sets theta_deg".into(),
                ));
            }
            s.theta_deg = Some(value);
            (s.i_vector, s.f_vector) = theta_states(value);
        }
        SweepParam::SigmaF => {
            s.pointer_f.sigma = value;
            s.pointer_f.extent = s.pointer_f.extent.max(default_extent_f(value, s.gf_tf));
        }
    }
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub re_formula: f64,
    pub im_formula: f64,
    pub abs_error: f64,
}

pub fn sweep_rows(sc: &Scenario, param: SweepParam, values: &[f64]) -> Res<Vec<SweepRow>> {
    values
        .iter()
        .map(|&value| {
            let s = with_param(sc, param, value)?;
            let wv = commutation_report(&s.a_matrix, &s.i_vector, &s.f_vector)?;
            let (estimate, std_error) = match s.run.mode {
                Mode::ClosedForm => (target(&wv, s.run.readout), None),
                Mode::ExactMoments => (exact_moments(&s)?.estimate, None),
                Mode::SamplePointer | Mode::SampleIdeal => {
                    let r = sample(&s, s.run.mode.sampling().expect("sampling mode"), None)?;
                    (r.estimate, r.std_error)
                }
                Mode::Diagnostics => {
                    return Err(RunError::Usage("diagnostics mode cannot be swept".into()));
                }
            };
            Ok(SweepRow {
                value,
                estimate,
                std_error,
                re_formula: wv.re_formula,
                im_formula: wv.im_formula,
                abs_error: (estimate - target(&wv, s.run.readout)).abs(),
            })
        })
        .collect()
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut s = String::from("param,value,estimate,std_error,re_formula,im_formula,abs_error\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            param.name(),
            format_f64(r.value),
            format_f64(r.estimate),
            r.std_error.map(format_f64).unwrap_or_default(),
            format_f64(r.re_formula),
            format_f64(r.im_formula),
            format_f64(r.abs_error),
        ));
    }
    s
}
