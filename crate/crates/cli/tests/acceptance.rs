//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the table is always printed. The
//! process fails when a criterion fails, unless it is listed in
//! `EXPECTED_FAIL`; an expected failure that starts passing also fails the
//! run, so the list cannot go stale.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use reltherm_cli::config::{DecoupleInput, DecoupleParams, HeatFlowParams, PairKind, SpinParams, VerifyParams};
use reltherm_cli::report::Results;
use reltherm_cli::{run, Experiment, ExperimentConfig};
use reltherm_core::bounds::{
    chain_rule_hh, chain_rule_max_max, chain_rule_max_min, chain_rule_min_max, interpolation_upper, metric_sandwich,
    random_feasible_sdp, ChainParams,
};
use reltherm_core::entropies::{d_hyp_sdp, h_hyp, h_max, h_max_smooth_direct, h_min, h_min_smooth};
use reltherm_core::heatflow::ThermalPair;
use reltherm_core::linalg::{kron, ComplexMatrix, DensityOperator, DimensionSpec};
use reltherm_core::metrics::purified_distance;
use reltherm_core::random::{random_pure, random_state};
use reltherm_core::sdp::{solve_with, SdpSettings, SdpStatus};
use reltherm_core::spin_model::{energy_shell, SpinShellSpec};
use reltherm_core::Seed;

/// Criteria known to be unattainable as stated; see the README.
const EXPECTED_FAIL: &[&str] = &["c05b"];

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

type Check = fn() -> Result<(bool, String), String>;

fn main() {
    let criteria: &[(&'static str, Check)] = &[
        ("c01", c01_h1_support),
        ("c02", c02_duality),
        ("c03", c03_sdp_engine),
        ("c04", c04_chain_rules),
        ("c05a", c05a_direct_sampling),
        ("c05b", c05b_direct_margin),
        ("c06", c06_converse),
        ("c07", c07_spin_pipeline),
        ("c08", c08_heat_flow),
        ("c09", c09_metric_sandwich),
        ("c10", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut outcomes = Vec::new();
    for &(id, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        let o = Outcome { id, passed, detail, seconds: start.elapsed().as_secs_f64() };
        let tag = match (o.passed, EXPECTED_FAIL.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("{:<5} {tag:<15} [{:7.1} s] {}", o.id, o.seconds, o.detail);
        outcomes.push(o);
    }
    let unexpected: Vec<&str> =
        outcomes.iter().filter(|o| o.passed == EXPECTED_FAIL.contains(&o.id)).map(|o| o.id).collect();
    if unexpected.is_empty() {
        println!("acceptance: {} criteria evaluated, no unexpected outcomes", outcomes.len());
    } else {
        println!("acceptance: unexpected outcome for {}", unexpected.join(", "));
        std::process::exit(1);
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c01_h1_support() -> Result<(bool, String), String> {
    let start = Instant::now();
    let mut rng = Seed(101).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(2..=8);
        let rank = rng.random_range(1..=d.min(6));
        let rho = random_state(&[d], rank, &mut rng).map_err(err)?;
        // The support dimension is fixed by construction.
        worst = worst.max((h_hyp(&rho, 1.0).map_err(err)?.bits - (rank as f64).log2()).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-5 && secs < 60.0, format!("H^1(A) vs log rank on 50 states: max error {worst:.2e}")))
}

fn c02_duality() -> Result<(bool, String), String> {
    let mut rng = Seed(202).rng();
    let mut worst: f64 = 0.0;
    let mut worst_ball: f64 = 0.0;
    for _ in 0..30 {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=3)).collect();
        let psi = random_pure(&dims, &mut rng).map_err(err)?.density();
        let ab = psi.bipartition(&[0], &[1]).map_err(err)?;
        let ac = psi.bipartition(&[0], &[2]).map_err(err)?;
        // ε = 0: two unrelated SDPs.
        let gap0 = h_max(&ab).map_err(err)?.bits + h_min(&ac).map_err(err)?.bits;
        // ε = 0.05: max-entropy of an explicit ball point against the min-entropy program.
        let (direct, point) = h_max_smooth_direct(&ab, 0.05).map_err(err)?;
        let gap1 = direct.bits + h_min_smooth(&ac, 0.05).map_err(err)?.bits;
        worst = worst.max(gap0.abs()).max(gap1.abs());
        worst_ball = worst_ball.max(purified_distance(&point, &ab).map_err(err)? - 0.05);
    }
    Ok((
        worst <= 1e-4 && worst_ball <= 1e-6,
        format!("|H_max + H_min| on 30 pure states, eps in {{0, 0.05}}: max {worst:.2e}; ball excess {worst_ball:.1e}"),
    ))
}

/// `min Σ q s / ε` s.t. `Σ q r ≥ ε`, `q ∈ [0,1]^d`, by enumerating vertices:
/// every vertex has all coordinates in {0, 1} except at most one.
fn neyman_pearson_vertices(r: &[f64], s: &[f64], eps: f64) -> f64 {
    let d = r.len();
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << d) {
        let inside = |i: usize| mask >> i & 1 == 1;
        let (pr, ps): (f64, f64) = (0..d).filter(|&i| inside(i)).fold((0.0, 0.0), |(a, b), i| (a + r[i], b + s[i]));
        if pr >= eps {
            best = best.min(ps);
        }
        for j in (0..d).filter(|&j| !inside(j) && r[j] > 0.0) {
            let q = (eps - pr) / r[j];
            if (0.0..=1.0).contains(&q) {
                best = best.min(ps + q * s[j]);
            }
        }
    }
    best / eps
}

fn c03_sdp_engine() -> Result<(bool, String), String> {
    let settings = SdpSettings { gap_abs: 1e-9, gap_rel: 1e-9, ..SdpSettings::default() };
    let mut worst_gap: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut not_optimal = 0;
    for t in 0..100 {
        let problem = random_feasible_sdp(&mut Seed(303).stream(t));
        let sol = solve_with(&problem, &settings).map_err(err)?;
        if sol.status != SdpStatus::Optimal {
            not_optimal += 1;
        }
        worst_gap = worst_gap.max((sol.primal_value - sol.dual_value).abs());
        // Recompute the objective and constraints from the returned X.
        let x = &sol.primal_matrix;
        let obj = (&problem.objective * x).trace().re;
        worst_residual = worst_residual.max((obj - sol.primal_value).abs());
        for c in &problem.constraints {
            worst_residual = worst_residual.max(((&c.a * x).trace().re - c.b).abs() / (1.0 + c.b.abs()));
        }
    }
    let mut rng = Seed(304).rng();
    let mut worst_np: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(2..=6);
        let r: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = r.iter().sum();
        let r: Vec<f64> = r.iter().map(|x| x / total).collect();
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let eps: f64 = rng.random_range(0.05..1.0);
        let rho = DensityOperator::diagonal(&r, DimensionSpec::single(d).map_err(err)?).map_err(err)?;
        let sigma = ComplexMatrix::from_diagonal(&DVector::from_iterator(d, s.iter().map(|&x| Complex64::new(x, 0.0))));
        let sdp = (-d_hyp_sdp(&rho, &sigma, eps).map_err(err)?.bits).exp2();
        worst_np = worst_np.max((sdp - neyman_pearson_vertices(&r, &s, eps)).abs());
    }
    Ok((
        worst_gap <= 1e-7 && not_optimal == 0 && worst_residual <= 1e-6 && worst_np <= 1e-6,
        format!(
            "100 SDPs: max gap {worst_gap:.2e}, {not_optimal} not optimal, residual {worst_residual:.1e}; \
             50 diagonal D_H vs LP vertices: max diff {worst_np:.2e}"
        ),
    ))
}

fn c04_chain_rules() -> Result<(bool, String), String> {
    let start = Instant::now();
    let p = ChainParams::default();
    let checks = [
        chain_rule_hh(100, Seed(401), p),
        chain_rule_max_min(100, Seed(402), p),
        chain_rule_min_max(100, Seed(403), p),
        chain_rule_max_max(100, Seed(404), p),
        interpolation_upper(100, Seed(405), 0.005),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for c in checks {
        let c = c.map_err(err)?;
        ok &= c.worst_slack >= -1e-4 && c.vacuous == 0;
        parts.push(format!("{} {:.2e}", c.name, c.worst_slack));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 600.0, format!("worst slack over 100 states each: {}", parts.join("; "))))
}

fn decouple_config(params: DecoupleParams, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Experiment::DecoupleSample(params));
    cfg.seed = Seed(seed);
    cfg
}

fn sampling_results(cfg: &ExperimentConfig) -> Result<reltherm_cli::report::SamplingResults, String> {
    match run(cfg).map_err(err)?.results {
        Results::Sampling(r) => Ok(r),
        _ => Err("wrong payload".into()),
    }
}

fn c05_params() -> DecoupleParams {
    DecoupleParams { dim_s: 2, dim_e: 16, dim_r: 2, input: DecoupleInput::Product, ..DecoupleParams::default() }
}

fn c05a_direct_sampling() -> Result<(bool, String), String> {
    let r = sampling_results(&decouple_config(c05_params(), 501))?;
    let bound = 2.0 * (-32.0 * 0.09 / 16.0f64).exp();
    let p = bound.min(1.0);
    let sigma = (p * (1.0 - p) / 200.0).sqrt();
    let ok = r.n_trials == 200 && r.empirical_fraction_violating <= bound + 3.0 * sigma;
    Ok((
        ok,
        format!(
            "violating fraction {} <= 2exp(-32*0.09/16) + 3 sigma = {:.4}",
            r.empirical_fraction_violating,
            bound + 3.0 * sigma
        ),
    ))
}

fn c05b_direct_margin() -> Result<(bool, String), String> {
    let r = sampling_results(&decouple_config(c05_params(), 501))?;
    Ok(match r.condition_margin_direct {
        Some(m) => (m.0 > 0.0, format!("condition_direct margin at eps = 1e-4: {}", m.0)),
        None => (
            false,
            format!(
                "condition_direct undefined at eps = 1e-4, delta = 0.3 ({}); dimension condition margin {:?}",
                r.notes.first().map(String::as_str).unwrap_or("no note"),
                r.condition_margin_dimension.map(|m| m.0)
            ),
        ),
    })
}

fn c06_converse() -> Result<(bool, String), String> {
    let params = DecoupleParams {
        dim_s: 2,
        dim_e: 8,
        input: DecoupleInput::MaxEntangled,
        delta: 0.1,
        ..DecoupleParams::default()
    };
    let r = sampling_results(&decouple_config(params, 601))?;
    let thermalized = r.distances.iter().filter(|&&d| d <= 0.1).count();
    let closest = r.distances.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        r.omega_dim == 16 && r.n_trials == 200 && thermalized == 0 && r.converse_regime,
        format!(
            "{thermalized}/200 trials within delta = 0.1 (closest {closest:.4}); converse regime {}",
            r.converse_regime
        ),
    ))
}

fn c07_spin_pipeline() -> Result<(bool, String), String> {
    let start = Instant::now();
    let params = SpinParams::default();
    let mut cfg = ExperimentConfig::new(Experiment::SpinExample(params));
    cfg.seed = Seed(701);
    let Results::Spin(r) = run(&cfg).map_err(err)?.results else { return Err("wrong payload".into()) };
    // h(1/2) = 1, so the thresholds are 8(2/4 − 1) and 8(1 − 1/4).
    let thresholds_ok = r.threshold_direct == -4.0 && r.threshold_converse == 6.0;
    // π_S by direct enumeration of the 70 shell configurations.
    let mut counts = [0usize; 4];
    let mut shell = 0usize;
    for config in 0u32..256 {
        if config.count_ones() == 4 {
            shell += 1;
            counts[(config >> 6) as usize] += 1;
        }
    }
    let pi_s = energy_shell(&SpinShellSpec::new(8, 4, 1, 4).map_err(err)?).map_err(err)?.pi_s().map_err(err)?;
    let mut worst: f64 = 0.0;
    for (i, &count) in counts.iter().enumerate() {
        for j in 0..4 {
            let expect = if i == j { count as f64 / shell as f64 } else { 0.0 };
            worst = worst.max((pi_s.matrix()[(i, j)] - Complex64::new(expect, 0.0)).norm());
        }
    }
    let s = &r.sampling;
    let bound = 2.0 * (-70.0 * 0.09 / 16.0f64).exp();
    let p = bound.min(1.0);
    let within = s.empirical_fraction_violating <= p + 3.0 * (p * (1.0 - p) / s.n_trials as f64).sqrt();
    let secs = start.elapsed().as_secs_f64();
    Ok((
        thresholds_ok && worst <= 1e-10 && shell == 70 && within && secs < 300.0,
        format!(
            "thresholds {} / {} bits, pi_S vs enumeration {worst:.1e}, violating fraction {} (tail bound {bound:.4})",
            r.threshold_direct, r.threshold_converse, s.empirical_fraction_violating
        ),
    ))
}

fn c08_heat_flow() -> Result<(bool, String), String> {
    let start = Instant::now();
    let params = HeatFlowParams::default();
    let mut cfg = ExperimentConfig::new(Experiment::HeatFlow(params.clone()));
    cfg.seed = Seed(801);
    let Results::HeatFlow(r) = run(&cfg).map_err(err)?.results else { return Err("wrong payload".into()) };
    // Recompute dQ_H from the returned unitary.
    let pair = ThermalPair::correlated_reference(params.beta_h, params.beta_c, params.gap).map_err(err)?;
    let u = ComplexMatrix::from_row_iterator(4, 4, r.unitary.iter().map(|&[re, im]| Complex64::new(re, im)));
    let rho = pair.state().matrix();
    let eh = kron(pair.hamiltonian_h(), &ComplexMatrix::identity(2, 2));
    let dq_h = (&eh * (&u * rho * u.adjoint() - rho)).trace().re;
    let anomaly = r.anomalous && dq_h > 0.0 && (dq_h - r.dq_h).abs() < 1e-9 && r.samples <= 500;

    let mut cfg = ExperimentConfig::new(Experiment::HeatFlow(HeatFlowParams { pair: PairKind::Product, ..params }));
    cfg.seed = Seed(802);
    let Results::HeatFlow(g) = run(&cfg).map_err(err)?.results else { return Err("wrong payload".into()) };
    let secs = start.elapsed().as_secs_f64();
    Ok((
        anomaly && g.grid_min_dq_c >= -1e-9 && secs < 120.0,
        format!(
            "correlated pair: dQ_H = {dq_h:.4} (first anomalous sample {:?}); product grid of {} points: min dQ_C = {:.2e}",
            r.first_anomalous_sample, g.grid_points, g.grid_min_dq_c
        ),
    ))
}

fn c09_metric_sandwich() -> Result<(bool, String), String> {
    let c = metric_sandwich(500, Seed(901)).map_err(err)?;
    Ok((
        c.trials == 500 && c.worst_slack >= -1e-9,
        format!("500 subnormalized pairs: worst slack {:.2e}", c.worst_slack),
    ))
}

fn c10_determinism() -> Result<(bool, String), String> {
    let configs = [
        Experiment::default_for("entropy").map_err(err)?,
        Experiment::DecoupleSample(DecoupleParams { n_trials: 50, ..c05_params() }),
        Experiment::SpinExample(SpinParams { n_trials: 50, ..SpinParams::default() }),
        Experiment::HeatFlow(HeatFlowParams { n_search: 100, grid_resolution: 4, ..HeatFlowParams::default() }),
        Experiment::VerifyBounds(VerifyParams { scale: 0.01 }),
    ];
    let mut identical = 0;
    for experiment in &configs {
        let mut cfg = ExperimentConfig::new(experiment.clone());
        cfg.seed = Seed(1001);
        let a = run(&cfg).map_err(err)?;
        let b = run(&cfg).map_err(err)?;
        let same_csv = a.to_csv() == b.to_csv();
        if a.results_json() == b.results_json() && same_csv {
            identical += 1;
        }
    }
    Ok((identical == configs.len(), format!("{identical}/{} experiments byte-identical on re-run", configs.len())))
}
