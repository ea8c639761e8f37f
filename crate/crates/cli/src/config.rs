//! Experiment configuration: one JSON document naming the experiment and its
//! parameters, plus seed and output settings.

use serde::{Deserialize, Serialize};

use reltherm_core::spin_model::{parse_alpha, SpinShellSpec, MAX_SPINS};
use reltherm_core::Seed;

use crate::CliError;

/// Largest `|Ω||R|` accepted by the sampling experiments.
pub const MAX_SAMPLING_DIM: usize = 512;
/// Largest joint dimension accepted by the entropy experiment.
pub const MAX_ENTROPY_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(CliError::Validation(format!("output_format: unknown format {other:?} (json or csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: Seed,
    /// Report destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { experiment, seed: Seed::default(), output_path: None, output_format: OutputFormat::Json }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.experiment.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "parameters", rename_all = "kebab-case")]
pub enum Experiment {
    Entropy(EntropyParams),
    DecoupleSample(DecoupleParams),
    SpinExample(SpinParams),
    HeatFlow(HeatFlowParams),
    VerifyBounds(VerifyParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Entropy(_) => "entropy",
            Self::DecoupleSample(_) => "decouple-sample",
            Self::SpinExample(_) => "spin-example",
            Self::HeatFlow(_) => "heat-flow",
            Self::VerifyBounds(_) => "verify-bounds",
        }
    }

    /// Default parameters for the experiment called `name`.
    pub fn default_for(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "entropy" => Self::Entropy(EntropyParams::default()),
            "decouple-sample" => Self::DecoupleSample(DecoupleParams::default()),
            "spin-example" => Self::SpinExample(SpinParams::default()),
            "heat-flow" => Self::HeatFlow(HeatFlowParams::default()),
            "verify-bounds" => Self::VerifyBounds(VerifyParams::default()),
            other => return Err(CliError::Validation(format!("experiment: unknown experiment {other:?}"))),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::Entropy(p) => p.validate(),
            Self::DecoupleSample(p) => p.validate(),
            Self::SpinExample(p) => p.validate(),
            Self::HeatFlow(p) => p.validate(),
            Self::VerifyBounds(p) => p.validate(),
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("parameters.{field}: {msg}"))
}

fn open_unit(field: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid(field, format!("{x} must lie in (0, 1)")));
    }
    Ok(())
}

fn positive(field: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(invalid(field, "must be at least 1"));
    }
    Ok(())
}

/// Entropies of a random state on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyParams {
    /// `[|A|, |B|]`.
    pub dims: [usize; 2],
    /// Rank of the random state; full rank when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub epsilon: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        Self { dims: [2, 2], rank: None, epsilon: 0.01 }
    }
}

impl EntropyParams {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("dims[0]", self.dims[0])?;
        positive("dims[1]", self.dims[1])?;
        let d = self.dims[0] * self.dims[1];
        if d > MAX_ENTROPY_DIM {
            return Err(invalid("dims", format!("|A||B| = {d} exceeds {MAX_ENTROPY_DIM}")));
        }
        if let Some(r) = self.rank {
            if r == 0 || r > d {
                return Err(invalid("rank", format!("{r} must lie in 1..={d}")));
            }
        }
        open_unit("epsilon", self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoupleInput {
    /// `π_Ω ⊗ π_R`.
    #[default]
    Product,
    /// Maximally entangled between `Ω` and `R`; forces `|R| = |Ω|`.
    MaxEntangled,
}

/// Haar sampling on `Ω = S ⊗ E` for a chosen input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoupleParams {
    pub dim_s: usize,
    pub dim_e: usize,
    /// Reference dimension for the product input.
    pub dim_r: usize,
    pub input: DecoupleInput,
    pub delta: f64,
    pub n_trials: usize,
    pub eps_direct: f64,
    pub eps_dimension: f64,
    pub eps_converse: f64,
    pub eps_regime: f64,
}

impl Default for DecoupleParams {
    fn default() -> Self {
        Self {
            dim_s: 2,
            dim_e: 16,
            dim_r: 1,
            input: DecoupleInput::Product,
            delta: 0.3,
            n_trials: 200,
            eps_direct: 1e-4,
            eps_dimension: 1e-4,
            eps_converse: 0.01,
            eps_regime: 0.01,
        }
    }
}

impl DecoupleParams {
    pub fn omega_dim(&self) -> usize {
        self.dim_s * self.dim_e
    }

    pub fn reference_dim(&self) -> usize {
        match self.input {
            DecoupleInput::Product => self.dim_r,
            DecoupleInput::MaxEntangled => self.omega_dim(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("dim_s", self.dim_s)?;
        positive("dim_e", self.dim_e)?;
        positive("dim_r", self.dim_r)?;
        positive("n_trials", self.n_trials)?;
        let total = self.omega_dim() * self.reference_dim();
        if total > MAX_SAMPLING_DIM {
            return Err(invalid("dim_s", format!("|Ω||R| = {total} exceeds {MAX_SAMPLING_DIM}")));
        }
        open_unit("delta", self.delta)?;
        open_unit("eps_direct", self.eps_direct)?;
        open_unit("eps_dimension", self.eps_dimension)?;
        open_unit("eps_converse", self.eps_converse)?;
        open_unit("eps_regime", self.eps_regime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinInput {
    /// `π_Ω`, invariant under every unitary on the shell.
    #[default]
    Microcanonical,
    /// The first computational basis state of the shell.
    BasisState,
}

/// The spin-shell pipeline; the reference is trivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinParams {
    pub n_spins: usize,
    /// `"p/q"`.
    pub alpha: String,
    pub k_up: usize,
    pub input: SpinInput,
    pub delta: f64,
    pub n_trials: usize,
    pub eps_direct: f64,
    pub eps_dimension: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self {
            n_spins: 8,
            alpha: "1/4".into(),
            k_up: 4,
            input: SpinInput::Microcanonical,
            delta: 0.3,
            n_trials: 200,
            eps_direct: 1e-4,
            eps_dimension: 1e-4,
        }
    }
}

impl SpinParams {
    pub fn spec(&self) -> Result<SpinShellSpec, CliError> {
        let (p, q) = parse_alpha(&self.alpha).map_err(|e| invalid("alpha", e))?;
        SpinShellSpec::new(self.n_spins, self.k_up, p, q).map_err(|e| invalid("n_spins/alpha/k_up", e))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_spins > MAX_SPINS {
            return Err(invalid("n_spins", format!("{} exceeds {MAX_SPINS}", self.n_spins)));
        }
        let spec = self.spec()?;
        if spec.k_up == 0 || spec.k_up == spec.n_spins {
            // A one-dimensional shell has nothing to sample.
            return Err(invalid("k_up", "shell must have dimension at least 2 (0 < k < N)"));
        }
        positive("n_trials", self.n_trials)?;
        open_unit("delta", self.delta)?;
        open_unit("eps_direct", self.eps_direct)?;
        open_unit("eps_dimension", self.eps_dimension)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Two qubits with Gibbs marginals and entangling correlations.
    #[default]
    Correlated,
    /// Product of Gibbs states.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatFlowParams {
    pub pair: PairKind,
    pub beta_h: f64,
    pub beta_c: f64,
    /// Level spacing of both qubits.
    pub gap: f64,
    pub n_search: usize,
    /// Points per angle of the energy-conserving grid.
    pub grid_resolution: usize,
}

impl Default for HeatFlowParams {
    fn default() -> Self {
        Self { pair: PairKind::Correlated, beta_h: 0.5, beta_c: 2.0, gap: 1.0, n_search: 500, grid_resolution: 12 }
    }
}

impl HeatFlowParams {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.beta_h.is_finite() && self.beta_h >= 0.0) {
            return Err(invalid("beta_h", format!("{} must be finite and non-negative", self.beta_h)));
        }
        if !(self.beta_c.is_finite() && self.beta_c >= 0.0) {
            return Err(invalid("beta_c", format!("{} must be finite and non-negative", self.beta_c)));
        }
        if self.beta_h >= self.beta_c {
            return Err(invalid("beta_h", "the hot side needs beta_h < beta_c"));
        }
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(invalid("gap", format!("{} must be positive", self.gap)));
        }
        positive("n_search", self.n_search)?;
        if self.grid_resolution < 2 {
            return Err(invalid("grid_resolution", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// Multiplies every randomized trial count.
    pub scale: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl VerifyParams {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(invalid("scale", format!("{} must be positive", self.scale)));
        }
        Ok(())
    }
}
