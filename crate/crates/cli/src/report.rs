//! Report types and their JSON/CSV renderings.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use reltherm_core::entropies::{self, EntropyKind, EntropyValue, SMOOTH_MAX_AGREEMENT};
use reltherm_core::heatflow::MARGINAL_TOL;
use reltherm_core::linalg::{RANK_THRESHOLD, STATE_TOL};
use reltherm_core::sdp::{SdpSettings, SdpStatus};
use reltherm_core::{BoundCheck, Seed, ThermalizationReport};

use crate::config::{ExperimentConfig, OutputFormat};

/// A float that serializes non-finite values as the strings `"inf"`,
/// `"-inf"` and `"nan"` instead of JSON `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Self(x)
    }
}

/// Unitarity tolerance applied to user-facing unitaries.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Agreement required between shell marginals and hypergeometric counts.
pub const SHELL_MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub state_normalization: f64,
    pub rank_threshold: f64,
    pub unitarity: f64,
    pub thermal_marginals: f64,
    pub shell_marginals: f64,
    pub smooth_max_route_agreement: f64,
    pub entropy_sdp: SdpSettings,
    pub default_sdp: SdpSettings,
}

impl Tolerances {
    pub fn current() -> Self {
        Self {
            state_normalization: STATE_TOL,
            rank_threshold: RANK_THRESHOLD,
            unitarity: UNITARITY_TOL,
            thermal_marginals: MARGINAL_TOL,
            shell_marginals: SHELL_MARGINAL_TOL,
            smooth_max_route_agreement: SMOOTH_MAX_AGREEMENT,
            entropy_sdp: entropies::sdp_settings(),
            default_sdp: SdpSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub wall_clock_seconds: f64,
    pub results: Results,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Entropy(EntropyResults),
    Sampling(SamplingResults),
    Spin(SpinResults),
    HeatFlow(HeatFlowResults),
    Bounds(BoundsResults),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRow {
    pub primal_value: Num,
    pub dual_value: Num,
    pub gap: Num,
    pub status: SdpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub kind: EntropyKind,
    pub epsilon: f64,
    pub bits: Num,
    pub certificate: Option<CertificateRow>,
}

impl From<&EntropyValue> for EntropyRow {
    fn from(v: &EntropyValue) -> Self {
        Self {
            kind: v.kind,
            epsilon: v.epsilon,
            bits: v.bits.into(),
            certificate: v.certificate.as_ref().map(|c| CertificateRow {
                primal_value: c.primal_value.into(),
                dual_value: c.dual_value.into(),
                gap: c.gap.into(),
                status: c.status,
                iterations: c.iterations,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyResults {
    pub dims: [usize; 2],
    pub rank: usize,
    pub epsilon: f64,
    /// Conditional entropies `H(A|B)` in bits.
    pub values: Vec<EntropyRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingResults {
    pub omega_dim: usize,
    pub system_dim: usize,
    pub environment_dim: usize,
    pub reference_dim: usize,
    pub input: String,
    pub delta: f64,
    pub n_trials: usize,
    pub seed: Seed,
    pub violating_trials: usize,
    pub empirical_fraction_violating: f64,
    pub haar_tail_bound: Num,
    pub binomial_sigma: f64,
    /// `fraction ≤ min(1, tail bound) + 3σ`.
    pub within_tail_bound: bool,
    pub condition_margin_direct: Option<Num>,
    pub condition_margin_dimension: Option<Num>,
    pub condition_margin_converse: Option<Num>,
    pub converse_leading_order: Num,
    pub converse_regime: bool,
    pub notes: Vec<String>,
    pub distances: Vec<f64>,
}

impl SamplingResults {
    pub fn new(r: &ThermalizationReport, dims: (usize, usize, usize), input: &str, leading: f64) -> Self {
        Self {
            omega_dim: r.omega_dim,
            system_dim: dims.0,
            environment_dim: dims.1,
            reference_dim: dims.2,
            input: input.to_string(),
            delta: r.delta,
            n_trials: r.n_trials,
            seed: r.seed,
            violating_trials: r.violating_trials,
            empirical_fraction_violating: r.empirical_fraction_violating,
            haar_tail_bound: r.haar_tail_bound.into(),
            binomial_sigma: r.binomial_sigma,
            within_tail_bound: r.within_tail_bound(3.0),
            condition_margin_direct: r.condition_margin_direct.map(Num),
            condition_margin_dimension: r.condition_margin_dimension.map(Num),
            condition_margin_converse: r.condition_margin_converse.map(Num),
            converse_leading_order: leading.into(),
            converse_regime: r.converse_regime,
            notes: r.notes.clone(),
            distances: r.distances.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinResults {
    pub n_spins: usize,
    pub alpha: String,
    pub k_up: usize,
    pub threshold_direct: f64,
    pub threshold_converse: f64,
    /// `log|Ω| − 2 log|S|`.
    pub dimension_term: f64,
    /// `P(j spins of S up)`, `j = 0..=αN`.
    pub hypergeometric: Vec<f64>,
    /// Largest deviation of `diag π_S` from the hypergeometric prediction.
    pub marginal_max_error: f64,
    pub marginals_match: bool,
    pub sampling: SamplingResults,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatFlowResults {
    pub pair: String,
    pub beta_h: f64,
    pub beta_c: f64,
    pub gap: f64,
    pub samples: usize,
    pub dq_h: f64,
    pub dq_c: f64,
    pub total_energy_change: f64,
    pub sampled_dq_h: f64,
    pub first_anomalous_sample: Option<usize>,
    pub anomalous: bool,
    /// Row-major `[re, im]` entries of the best unitary.
    pub unitary: Vec<[f64; 2]>,
    pub grid_points: usize,
    pub grid_min_dq_c: f64,
    pub grid_max_dq_h: f64,
    /// No grid point had `dQ_C < −1e-9`.
    pub grid_clausius_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub trials: usize,
    pub worst_slack: Num,
    pub tolerance: f64,
    pub vacuous: usize,
    pub passed: bool,
}

impl From<&BoundCheck> for CheckRow {
    fn from(c: &BoundCheck) -> Self {
        Self {
            name: c.name.clone(),
            trials: c.trials,
            worst_slack: c.worst_slack.into(),
            tolerance: c.tolerance,
            vacuous: c.vacuous,
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsResults {
    pub scale: f64,
    pub all_passed: bool,
    pub checks: Vec<CheckRow>,
}

impl ExperimentReport {
    /// The deterministic part of the report.
    pub fn results_json(&self) -> String {
        serde_json::to_string_pretty(&self.results).expect("results serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = self.to_json();
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// Comment lines of metadata followed by one table. Wall-clock time is
    /// left out so the file is reproducible.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut meta = |k: &str, v: String| writeln!(out, "# {k}: {v}").unwrap();
        meta("tool", format!("{} {}", self.tool, self.version));
        meta("experiment", self.config.experiment.name().to_string());
        meta("seed", self.config.seed.0.to_string());
        match &self.results {
            Results::Entropy(r) => {
                meta("dims", format!("{}x{}", r.dims[0], r.dims[1]));
                meta("rank", r.rank.to_string());
                out.push_str("kind,epsilon,bits,primal_value,dual_value,gap,status\n");
                for v in &r.values {
                    let kind = serde_json::to_value(v.kind).unwrap();
                    let (p, d, g, st) = match &v.certificate {
                        Some(c) => (
                            f(c.primal_value.0),
                            f(c.dual_value.0),
                            f(c.gap.0),
                            serde_json::to_value(c.status).unwrap().as_str().unwrap().to_string(),
                        ),
                        None => Default::default(),
                    };
                    writeln!(out, "{},{},{},{p},{d},{g},{st}", kind.as_str().unwrap(), f(v.epsilon), f(v.bits.0))
                        .unwrap();
                }
            }
            Results::Sampling(r) => sampling_csv(&mut out, r),
            Results::Spin(r) => {
                writeln!(out, "# threshold_direct: {}", f(r.threshold_direct)).unwrap();
                writeln!(out, "# threshold_converse: {}", f(r.threshold_converse)).unwrap();
                writeln!(out, "# marginal_max_error: {}", f(r.marginal_max_error)).unwrap();
                sampling_csv(&mut out, &r.sampling);
            }
            Results::HeatFlow(r) => {
                out.push_str("quantity,value\n");
                let rows: [(&str, String); 10] = [
                    ("beta_h", f(r.beta_h)),
                    ("beta_c", f(r.beta_c)),
                    ("dq_h", f(r.dq_h)),
                    ("dq_c", f(r.dq_c)),
                    ("total_energy_change", f(r.total_energy_change)),
                    ("sampled_dq_h", f(r.sampled_dq_h)),
                    ("anomalous", r.anomalous.to_string()),
                    ("grid_points", r.grid_points.to_string()),
                    ("grid_min_dq_c", f(r.grid_min_dq_c)),
                    ("grid_clausius_holds", r.grid_clausius_holds.to_string()),
                ];
                for (k, v) in rows {
                    writeln!(out, "{k},{v}").unwrap();
                }
            }
            Results::Bounds(r) => {
                out.push_str("name,trials,worst_slack,tolerance,vacuous,passed\n");
                for c in &r.checks {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        c.name,
                        c.trials,
                        f(c.worst_slack.0),
                        f(c.tolerance),
                        c.vacuous,
                        c.passed
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}

/// Shortest round-trip form; non-finite values as `inf`, `-inf`, `nan`.
fn f(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        serde_json::to_value(Num(x)).expect("string").as_str().expect("string").to_string()
    }
}

fn sampling_csv(out: &mut String, r: &SamplingResults) {
    let mut meta = |k: &str, v: String| writeln!(out, "# {k}: {v}").unwrap();
    meta("input", r.input.clone());
    meta("omega_dim", r.omega_dim.to_string());
    meta("system_dim", r.system_dim.to_string());
    meta("reference_dim", r.reference_dim.to_string());
    meta("delta", f(r.delta));
    meta("violating_trials", r.violating_trials.to_string());
    meta("empirical_fraction_violating", f(r.empirical_fraction_violating));
    meta("haar_tail_bound", f(r.haar_tail_bound.0));
    meta("binomial_sigma", f(r.binomial_sigma));
    let opt = |x: Option<Num>| x.map_or("undefined".to_string(), |n| f(n.0));
    meta("condition_margin_direct", opt(r.condition_margin_direct));
    meta("condition_margin_dimension", opt(r.condition_margin_dimension));
    meta("condition_margin_converse", opt(r.condition_margin_converse));
    meta("converse_regime", r.converse_regime.to_string());
    out.push_str("trial_index,distance,violated\n");
    for (i, d) in r.distances.iter().enumerate() {
        writeln!(out, "{i},{},{}", f(*d), u8::from(*d > r.delta)).unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        assert_eq!(f(1.1934897514720433e-15), "1.1934897514720433e-15");
        assert_eq!(f(0.3), "0.3");
        assert_eq!(f(f64::INFINITY), "inf");
    }

    #[test]
    fn infinities_are_strings() {
        let v = serde_json::to_string(&[Num(f64::INFINITY), Num(f64::NEG_INFINITY), Num(1.5), Num(f64::NAN)]).unwrap();
        assert_eq!(v, r#"["inf","-inf",1.5,"nan"]"#);
    }
}
