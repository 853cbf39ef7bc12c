//! Experiment specifications read from JSON.
//!
//! Every object rejects unknown fields. Parameters are decoded in a second
//! pass once the command is known, so error paths name the exact field.

use std::collections::BTreeSet;
use std::path::PathBuf;

use reslab::counterexamples::SeriesKind;
use reslab::gevrey::Sector;
use reslab::shift::WeightSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input that does not match the schema.
#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl SchemaError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Zeta,
    Det,
    Resonances,
    TraceCheck,
    Counterexample,
    Nuclear,
    Gevrey,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Zeta => "zeta",
            CommandName::Det => "det",
            CommandName::Resonances => "resonances",
            CommandName::TraceCheck => "trace-check",
            CommandName::Counterexample => "counterexample",
            CommandName::Nuclear => "nuclear",
            CommandName::Gevrey => "gevrey",
        }
    }
}

/// Artifact paths, relative ones taken from the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    command: CommandName,
    #[serde(default)]
    params: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    seed: Option<u64>,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: Params,
    pub output: OutputSpec,
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn command(&self) -> CommandName {
        match self.params {
            Params::Zeta(_) => CommandName::Zeta,
            Params::Det(_) => CommandName::Det,
            Params::Resonances(_) => CommandName::Resonances,
            Params::TraceCheck(_) => CommandName::TraceCheck,
            Params::Counterexample(_) => CommandName::Counterexample,
            Params::Nuclear(_) => CommandName::Nuclear,
            Params::Gevrey(_) => CommandName::Gevrey,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Zeta(ZetaParams),
    Det(DetParams),
    Resonances(ResonanceParams),
    TraceCheck(TraceCheckParams),
    Counterexample(CounterexampleParams),
    Nuclear(NuclearParams),
    Gevrey(GevreyParams),
}

/// Inverse zeta coefficients, checked against the orbit route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaParams {
    pub weight: WeightSpec,
    #[serde(default = "default_zeta_order")]
    pub order: usize,
    /// Degree up to which orbits are enumerated; defaults to `min(order, 12)`.
    pub orbit_order: Option<usize>,
    pub tol: Option<f64>,
}

/// Horseshoe determinant coefficients, checked across two product routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetParams {
    pub weight: WeightSpec,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_det_order")]
    pub order: usize,
    pub tol: Option<f64>,
}

/// Horseshoe determinant zeros in a disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceParams {
    pub weight: WeightSpec,
    pub radius: f64,
    /// Product cutoff; by default the smallest one whose omitted factors are
    /// below the tolerance on the disk.
    pub cutoff: Option<usize>,
    #[serde(default = "default_zeta_order")]
    pub zeta_order: usize,
    pub tol: Option<f64>,
}

/// Resonances in a disk together with the local and, optionally, global
/// trace formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceCheckParams {
    pub weight: WeightSpec,
    #[serde(default = "default_trace_radius")]
    pub radius: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_trace_count")]
    pub n_max: usize,
    #[serde(default = "default_trace_zeta_order")]
    pub zeta_order: usize,
    /// Steps of the global formula over the horseshoe shells; only for the
    /// unweighted horseshoe.
    #[serde(default)]
    pub global_steps: usize,
    pub tol: Option<f64>,
}

/// Conditionally convergent trace series, and optionally a weight whose
/// global trace formula holds on a prescribed set of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleParams {
    #[serde(default = "default_kind")]
    pub kind: SeriesKind,
    #[serde(default = "default_step")]
    pub step: usize,
    #[serde(default = "default_cuts")]
    pub cuts: Vec<u64>,
    pub trace_set: Option<BTreeSet<usize>>,
    #[serde(default = "default_max_step")]
    pub max_step: usize,
    pub tol: Option<f64>,
}

/// Determinant coefficients of a stretched-exponential singular value model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclearParams {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_nuclear_order")]
    pub order: usize,
    /// Hypothesised decay exponent, `1 + beta` by default.
    pub exponent: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Gaussian,
    Bump,
    Indicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    pub family: ProfileKind,
    /// Gevrey index of the gaussian.
    pub sigma: Option<f64>,
    /// Exponent `a` of the bump `exp(-1/x^a)`.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionParams {
    #[serde(default = "default_band_exponent")]
    pub alpha: f64,
    #[serde(default = "default_bands")]
    pub bands: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorParams {
    pub centre: f64,
    pub half_angle: f64,
}

impl From<SectorParams> for Sector {
    fn from(s: SectorParams) -> Self {
        Sector {
            centre: s.centre,
            half_angle: s.half_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDistanceParams {
    pub plus: SectorParams,
    pub minus: SectorParams,
    #[serde(default = "default_cone_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicityParams {
    /// Row-major 2x2 matrix.
    pub matrix: [[f64; 2]; 2],
    #[serde(default = "default_hyperbolicity_samples")]
    pub samples: usize,
}

/// Gevrey profile, band partition and cone checks; at least one section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyParams {
    pub profile: Option<ProfileParams>,
    pub partition: Option<PartitionParams>,
    pub cone_distance: Option<ConeDistanceParams>,
    pub hyperbolicity: Option<HyperbolicityParams>,
    pub tol: Option<f64>,
}

fn default_zeta_order() -> usize {
    40
}
fn default_cutoff() -> usize {
    6
}
fn default_det_order() -> usize {
    40
}
fn default_trace_radius() -> f64 {
    100.0
}
fn default_trace_count() -> usize {
    12
}
fn default_trace_zeta_order() -> usize {
    96
}
fn default_kind() -> SeriesKind {
    SeriesKind::Logarithmic
}
fn default_step() -> usize {
    1
}
fn default_cuts() -> Vec<u64> {
    vec![1_000, 10_000, 100_000]
}
fn default_max_step() -> usize {
    5
}
fn default_theta() -> f64 {
    0.5
}
fn default_beta() -> f64 {
    1.0
}
fn default_nuclear_order() -> usize {
    20
}
fn default_band_exponent() -> f64 {
    3.5
}
fn default_bands() -> usize {
    12
}
fn default_stride() -> usize {
    64
}
fn default_cone_samples() -> usize {
    100_000
}
fn default_hyperbolicity_samples() -> usize {
    2000
}

fn decode<T: DeserializeOwned>(prefix: &str, value: serde_json::Value) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        SchemaError::invalid(path, e.into_inner().to_string())
    })
}

/// Parses and validates a specification; `seed` overrides the one in the
/// file.
pub fn parse_spec(text: &str, seed: Option<u64>) -> Result<ExperimentSpec, SchemaError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| SchemaError::invalid("$", format!("malformed JSON: {e}")))?;
    let raw: RawSpec = decode("$", value)?;
    let params = serde_json::Value::Object(raw.params.unwrap_or_default());
    let params = match raw.command {
        CommandName::Zeta => Params::Zeta(decode("$.params", params)?),
        CommandName::Det => Params::Det(decode("$.params", params)?),
        CommandName::Resonances => Params::Resonances(decode("$.params", params)?),
        CommandName::TraceCheck => Params::TraceCheck(decode("$.params", params)?),
        CommandName::Counterexample => Params::Counterexample(decode("$.params", params)?),
        CommandName::Nuclear => Params::Nuclear(decode("$.params", params)?),
        CommandName::Gevrey => Params::Gevrey(decode("$.params", params)?),
    };
    let spec = ExperimentSpec {
        params,
        output: raw.output,
        seed: seed.or(raw.seed),
    };
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &ExperimentSpec) -> Result<(), SchemaError> {
    let positive = |path: &str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(SchemaError::invalid(path, "must be a positive number"))
        }
    };
    match &spec.params {
        Params::Resonances(p) => positive("$.params.radius", p.radius)?,
        Params::TraceCheck(p) => {
            positive("$.params.radius", p.radius)?;
            if p.global_steps > 0 && p.weight != WeightSpec::zero() {
                return Err(SchemaError::invalid(
                    "$.params.global_steps",
                    "the shell tail bounds only cover the unweighted horseshoe",
                ));
            }
        }
        Params::Counterexample(p) => {
            if p.cuts.is_empty() {
                return Err(SchemaError::invalid("$.params.cuts", "needs at least one cut"));
            }
        }
        Params::Gevrey(p) => {
            if p.profile.is_none() && p.partition.is_none() && p.cone_distance.is_none() && p.hyperbolicity.is_none() {
                return Err(SchemaError::invalid(
                    "$.params",
                    "expected at least one of profile, partition, cone_distance, hyperbolicity",
                ));
            }
            if p.cone_distance.is_some() && spec.seed.is_none() {
                return Err(SchemaError::invalid("$.seed", "required for Monte Carlo cone sampling"));
            }
        }
        _ => {}
    }
    let tol = match &spec.params {
        Params::Zeta(p) => p.tol,
        Params::Det(p) => p.tol,
        Params::Resonances(p) => p.tol,
        Params::TraceCheck(p) => p.tol,
        Params::Counterexample(p) => p.tol,
        Params::Nuclear(p) => p.tol,
        Params::Gevrey(p) => p.tol,
    };
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(SchemaError::invalid("$.params.tol", "must be non-negative"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_example_parses() {
        let s = parse_spec(r#"{"command":"resonances","params":{"weight":{"alpha":[]},"radius":40}}"#, None).unwrap();
        assert_eq!(s.command(), CommandName::Resonances);
        match s.params {
            Params::Resonances(p) => assert_eq!(p.radius, 40.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected_with_path() {
        let e = parse_spec(r#"{"command":"zeta","params":{"weight":{"alpha":[]}},"extra":1}"#, None).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
        let e = parse_spec(r#"{"command":"zeta","params":{"weight":{"alpha":[]},"degree":3}}"#, None).unwrap_err();
        assert!(e.to_string().starts_with("$.params"), "{e}");
        let e = parse_spec(r#"{"command":"zeta","params":{"weight":{"alpha":[], "x": 1}}}"#, None).unwrap_err();
        assert!(e.to_string().contains("weight"), "{e}");
    }

    #[test]
    fn cone_sampling_needs_a_seed() {
        let text = r#"{"command":"gevrey","params":{"cone_distance":{"plus":{"centre":0,"half_angle":0.3},"minus":{"centre":1.5,"half_angle":0.3}}}}"#;
        let e = parse_spec(text, None).unwrap_err();
        assert!(e.to_string().starts_with("$.seed"), "{e}");
        assert!(parse_spec(text, Some(3)).is_ok());
    }

    #[test]
    fn malformed_json() {
        assert!(parse_spec("{\"command\": ", None).is_err());
        assert!(parse_spec(r#"{"command":"nope"}"#, None).is_err());
    }
}
