//! Batch experiment runner for `reltherm-core`.
//!
//! A run takes an [`ExperimentConfig`], validates it, dispatches to one
//! experiment and returns an [`ExperimentReport`]. The `results` part of a
//! report depends only on the config, so identical configs give identical
//! results.

pub mod config;
pub mod report;

use std::time::Instant;

use num_complex::Complex64;

use reltherm_core::bounds::{run_suite, SuiteConfig};
use reltherm_core::entropies::{h_hyp, h_max_smooth, h_min_smooth, von_neumann};
use reltherm_core::heatflow::{energy_conserving_grid_search, find_anomalous_flow, ThermalPair};
use reltherm_core::linalg::{ComplexMatrix, DensityOperator, DimensionSpec, PureState};
use reltherm_core::random::random_state;
use reltherm_core::spin_model::{binomial, energy_shell, fig5_thresholds, hypergeometric_marginals};
use reltherm_core::thermalization::{
    dimension_term, evaluate_conditions, sample_fraction, ConditionParams, ConstraintSubspace,
};
use reltherm_core::Error;

pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use report::{ExperimentReport, Results};

use config::{
    DecoupleInput, DecoupleParams, EntropyParams, HeatFlowParams, PairKind, SpinInput, SpinParams, VerifyParams,
};
use report::{
    BoundsResults, CheckRow, EntropyResults, EntropyRow, HeatFlowResults, SamplingResults, SpinResults, Tolerances,
    SHELL_MARGINAL_TOL,
};

/// Threshold on `dQ_C` below which the grid reports a Clausius violation.
pub const CLAUSIUS_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant suite failed: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 1 validation (and I/O), 2 numerical, 3 invariant suite.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::Numerical(_) => Self::Numerical(e.to_string()),
            Error::Dimension(_) | Error::InvalidState(_) | Error::Domain(_) => Self::Validation(e.to_string()),
        }
    }
}

/// Validates `config`, runs the experiment and returns the report. Nothing
/// is written; see [`write_report`].
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    config.validate()?;
    let start = Instant::now();
    let results = match &config.experiment {
        Experiment::Entropy(p) => Results::Entropy(entropy(p, config)?),
        Experiment::DecoupleSample(p) => Results::Sampling(decouple(p, config)?),
        Experiment::SpinExample(p) => Results::Spin(spin(p, config)?),
        Experiment::HeatFlow(p) => Results::HeatFlow(heat_flow(p, config)?),
        Experiment::VerifyBounds(p) => Results::Bounds(verify(p, config)?),
    };
    Ok(ExperimentReport {
        tool: "reltherm",
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        tolerances: Tolerances::current(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        results,
    })
}

/// Writes the report to `config.output_path` in the configured format.
pub fn write_report(report: &ExperimentReport) -> Result<(), CliError> {
    if let Some(path) = &report.config.output_path {
        std::fs::write(path, report.render(report.config.output_format))?;
    }
    Ok(())
}

/// Report with a failed verify-bounds run turned into [`CliError::Invariant`].
pub fn check_invariants(report: &ExperimentReport) -> Result<(), CliError> {
    if let Results::Bounds(b) = &report.results {
        let failed: Vec<&str> = b.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(CliError::Invariant(failed.join(", ")));
        }
    }
    Ok(())
}

fn entropy(p: &EntropyParams, config: &ExperimentConfig) -> Result<EntropyResults, CliError> {
    let rank = p.rank.unwrap_or(p.dims[0] * p.dims[1]);
    let rho = random_state(&p.dims, rank, &mut config.seed.rng())?;
    let values = [
        von_neumann(&rho, Some(1))?,
        h_min_smooth(&rho, p.epsilon)?,
        h_max_smooth(&rho, p.epsilon)?,
        h_hyp(&rho, p.epsilon)?,
    ];
    Ok(EntropyResults { dims: p.dims, rank, epsilon: p.epsilon, values: values.iter().map(EntropyRow::from).collect() })
}

/// Maximally entangled state on `d ⊗ d`.
fn max_entangled(d: usize) -> Result<DensityOperator, CliError> {
    let mut v = nalgebra::DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    for i in 0..d {
        v[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    Ok(PureState::new(v, DimensionSpec::new(vec![d, d])?)?.density())
}

fn sampling(
    rho: &DensityOperator,
    omega: &ConstraintSubspace,
    delta: f64,
    n_trials: usize,
    params: &ConditionParams,
    input: &str,
    config: &ExperimentConfig,
) -> Result<SamplingResults, CliError> {
    let conditions = evaluate_conditions(rho, omega, delta, params)?;
    let report = sample_fraction(rho, omega, delta, n_trials, config.seed)?.with_conditions(&conditions);
    let dims = (omega.dim_s(), omega.dim_e(), rho.dim() / omega.dim());
    Ok(SamplingResults::new(&report, dims, input, conditions.converse_leading_order))
}

fn decouple(p: &DecoupleParams, config: &ExperimentConfig) -> Result<SamplingResults, CliError> {
    let omega = ConstraintSubspace::full(p.dim_s, p.dim_e)?;
    let n = omega.dim();
    let (rho, input) = match p.input {
        DecoupleInput::Product => {
            let pi_omega = DensityOperator::maximally_mixed(DimensionSpec::single(n)?);
            let pi_r = DensityOperator::maximally_mixed(DimensionSpec::single(p.dim_r)?);
            (pi_omega.tensor(&pi_r), "product")
        }
        DecoupleInput::MaxEntangled => (max_entangled(n)?, "max-entangled"),
    };
    let params = ConditionParams {
        eps_direct: p.eps_direct,
        eps_dimension: p.eps_dimension,
        eps_converse: p.eps_converse,
        eps_regime: p.eps_regime,
    };
    sampling(&rho, &omega, p.delta, p.n_trials, &params, input, config)
}

fn spin(p: &SpinParams, config: &ExperimentConfig) -> Result<SpinResults, CliError> {
    let spec = p.spec()?;
    let thresholds = fig5_thresholds(&spec)?;
    let omega = energy_shell(&spec)?;
    let hyper = hypergeometric_marginals(&spec);
    let pi_s = omega.pi_s()?;
    let m = spec.system_spins();
    let diag = pi_s.matrix().diagonal();
    let mut err = 0.0f64;
    for s in 0..(1usize << m) {
        let j = s.count_ones() as usize;
        err = err.max((diag[s].re - hyper[j] / binomial(m, j) as f64).abs());
    }
    // Off-diagonal weight must vanish as well.
    let off = pi_s.matrix().iter().map(|z| z.norm()).sum::<f64>() - diag.iter().map(|z| z.norm()).sum::<f64>();
    err = err.max(off.abs());
    let dims = DimensionSpec::new(vec![omega.dim(), 1])?;
    let (rho, input) = match p.input {
        SpinInput::Microcanonical => (DensityOperator::maximally_mixed(dims), "microcanonical"),
        SpinInput::BasisState => {
            let mut probs = vec![0.0; omega.dim()];
            probs[0] = 1.0;
            (DensityOperator::diagonal(&probs, dims)?, "basis-state")
        }
    };
    let params =
        ConditionParams { eps_direct: p.eps_direct, eps_dimension: p.eps_dimension, ..ConditionParams::default() };
    let sampling = sampling(&rho, &omega, p.delta, p.n_trials, &params, input, config)?;
    Ok(SpinResults {
        n_spins: spec.n_spins,
        alpha: p.alpha.clone(),
        k_up: spec.k_up,
        threshold_direct: thresholds.direct,
        threshold_converse: thresholds.converse,
        dimension_term: dimension_term(&omega),
        hypergeometric: hyper,
        marginal_max_error: err,
        marginals_match: err <= SHELL_MARGINAL_TOL,
        sampling,
    })
}

fn qubit_hamiltonian(gap: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(gap, 0.0)]))
}

fn heat_flow(p: &HeatFlowParams, config: &ExperimentConfig) -> Result<HeatFlowResults, CliError> {
    let (pair, name) = match p.pair {
        PairKind::Correlated => (ThermalPair::correlated_reference(p.beta_h, p.beta_c, p.gap)?, "correlated"),
        PairKind::Product => {
            let h = qubit_hamiltonian(p.gap);
            (ThermalPair::product(p.beta_h, h.clone(), p.beta_c, h)?, "product")
        }
    };
    let search = find_anomalous_flow(&pair, p.n_search, config.seed)?;
    let grid = energy_conserving_grid_search(&pair, p.grid_resolution)?;
    Ok(HeatFlowResults {
        pair: name.into(),
        beta_h: p.beta_h,
        beta_c: p.beta_c,
        gap: p.gap,
        samples: search.samples,
        dq_h: search.exchange.dq_h,
        dq_c: search.exchange.dq_c,
        total_energy_change: search.exchange.total,
        sampled_dq_h: search.sampled_dq_h,
        first_anomalous_sample: search.first_anomalous_sample,
        anomalous: search.is_anomalous(),
        unitary: search.unitary.iter().map(|&(re, im)| [re, im]).collect(),
        grid_points: grid.points,
        grid_min_dq_c: grid.min_dq_c,
        grid_max_dq_h: grid.max_dq_h,
        grid_clausius_holds: grid.min_dq_c >= -CLAUSIUS_TOL,
    })
}

fn verify(p: &VerifyParams, config: &ExperimentConfig) -> Result<BoundsResults, CliError> {
    let checks = run_suite(config.seed, SuiteConfig { scale: p.scale })?;
    Ok(BoundsResults {
        scale: p.scale,
        all_passed: checks.iter().all(|c| c.passed),
        checks: checks.iter().map(CheckRow::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use reltherm_core::Seed;

    #[test]
    fn entropy_smoke_run() {
        let mut cfg = ExperimentConfig::new(Experiment::default_for("entropy").unwrap());
        cfg.seed = Seed(3);
        let report = run(&cfg).unwrap();
        let Results::Entropy(r) = &report.results else { panic!("wrong payload") };
        assert_eq!(r.values.len(), 4);
        assert!(r.values[1..].iter().all(|v| v.certificate.is_some()));
        let json = report.to_json();
        assert!(json.contains("\"hMin\"") && json.contains("\"tolerances\""));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 1);
        assert_eq!(CliError::from(Error::Solver("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 1);
        assert_eq!(CliError::Invariant(String::new()).exit_code(), 3);
    }
}
