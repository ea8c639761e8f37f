use proptest::prelude::*;

use reltherm_core::linalg::{
    eigvalsh, kron, partial_trace_matrix, purify, purify_minimal, support_projector, unitarity_defect, ComplexMatrix,
    DensityOperator, DimensionSpec,
};
use reltherm_core::metrics::{fidelity, purified_distance, trace_distance};
use reltherm_core::random::{haar_unitary, random_pure, random_state};
use reltherm_core::sdp::{solve_with, Relation, SdpProblem, SdpSettings, SdpStatus, Sense};
use reltherm_core::spin_model::{binomial, energy_shell, SpinShellSpec};
use reltherm_core::thermalization::{condition_converse, converse_leading_order, therm_distance, ConstraintSubspace};
use reltherm_core::Seed;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn state(seed: u64, dims: &[usize], rank: usize) -> DensityOperator {
    let d: usize = dims.iter().product();
    random_state(dims, rank.clamp(1, d), &mut Seed(seed).rng()).unwrap()
}

fn max_entangled(d: usize) -> DensityOperator {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = (1.0 / d as f64).into();
        }
    }
    DensityOperator::new(m, DimensionSpec::new(vec![d, d]).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn partial_traces_compose(seed in any::<u64>(), a in 2usize..=3, b in 2usize..=3, c in 2usize..=3, rank in 1usize..=6) {
        let rho = state(seed, &[a, b, c], rank);
        let direct = rho.partial_trace(&[0]).unwrap();
        let stepwise = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!((direct.matrix() - stepwise.matrix()).norm() < 1e-12);
        let m = partial_trace_matrix(rho.matrix(), &[a, b, c], &[0, 2]).unwrap();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kron_is_associative_and_multiplies_traces(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3, c in 1usize..=3) {
        let x = state(seed, &[a], a).into_matrix();
        let y = state(seed ^ 1, &[b], b).into_matrix().scale(2.0);
        let z = state(seed ^ 2, &[c], 1).into_matrix();
        let left = kron(&kron(&x, &y), &z);
        let right = kron(&x, &kron(&y, &z));
        prop_assert!((&left - &right).norm() < 1e-13);
        prop_assert!((left.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn purifications_reduce_to_the_state(seed in any::<u64>(), d in 2usize..=6, rank in 1usize..=6) {
        let rho = state(seed, &[d], rank);
        for psi in [purify(&rho).unwrap(), purify_minimal(&rho).unwrap()] {
            let back = psi.density().partial_trace(&[0]).unwrap();
            prop_assert!((back.matrix() - rho.matrix()).norm() < 1e-10);
        }
        prop_assert_eq!(purify_minimal(&rho).unwrap().dims().factors()[1], rank.min(d));
    }

    #[test]
    fn support_projector_is_the_support(seed in any::<u64>(), d in 2usize..=7, rank in 1usize..=7) {
        let rho = state(seed, &[d], rank);
        let p = support_projector(&rho);
        prop_assert!((&p * &p - &p).norm() < 1e-10);
        prop_assert!((p.trace().re - rank.min(d) as f64).abs() < 1e-10);
        prop_assert!((&p * rho.matrix() - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn metric_axioms(seed in any::<u64>(), d in 2usize..=5, r1 in 1usize..=5, r2 in 1usize..=5, r3 in 1usize..=5) {
        let (x, y, z) = (state(seed, &[d], r1), state(seed ^ 7, &[d], r2), state(seed ^ 9, &[d], r3));
        let t = |p: &DensityOperator, q: &DensityOperator| trace_distance(p, q).unwrap();
        let pd = |p: &DensityOperator, q: &DensityOperator| purified_distance(p, q).unwrap();
        prop_assert!(t(&x, &x) < 1e-12 && pd(&x, &x) < 1e-6);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t(&x, &y)));
        prop_assert!(t(&x, &z) <= t(&x, &y) + t(&y, &z) + 1e-12);
        prop_assert!(pd(&x, &z) <= pd(&x, &y) + pd(&y, &z) + 1e-9);
        prop_assert!(t(&x, &y) <= pd(&x, &y) + 1e-9);
        let f = fidelity(&x, &y, false).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
    }

    #[test]
    fn haar_unitaries_are_unitary(seed in any::<u64>(), d in 1usize..=12) {
        let u = haar_unitary(d, &mut Seed(seed).rng());
        prop_assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn sdp_optimum_scales_with_the_objective(seed in any::<u64>(), n in 2usize..=4, scale in 0.1f64..10.0) {
        // min Tr(CX) s.t. Tr X = 1 equals λ_min(C).
        let c = state(seed, &[n], n).into_matrix() + ComplexMatrix::identity(n, n).scale(0.2);
        let settings = SdpSettings { gap_abs: 1e-9, gap_rel: 1e-9, ..SdpSettings::default() };
        let solve = |m: ComplexMatrix| {
            let p = SdpProblem::new(m, Sense::Minimize).with_constraint(ComplexMatrix::identity(n, n), Relation::Eq, 1.0);
            solve_with(&p, &settings).unwrap()
        };
        let base = solve(c.clone());
        let scaled = solve(c.scale(scale));
        prop_assert_eq!(base.status, SdpStatus::Optimal);
        prop_assert!((base.primal_value - eigvalsh(&c)[0]).abs() < 1e-7);
        prop_assert!((scaled.primal_value - scale * base.primal_value).abs() < 1e-7 * (1.0 + scale));
    }

    #[test]
    fn shells_have_binomial_dimension(n in 2usize..=10, k in 0usize..=10, m in 1usize..=9) {
        prop_assume!(k <= n && m < n);
        let spec = SpinShellSpec::new(n, k, m, n).unwrap();
        let shell = energy_shell(&spec).unwrap();
        prop_assert_eq!(shell.dim(), binomial(n, k));
        prop_assert!((shell.pi_s().unwrap().trace() - 1.0).abs() < 1e-12);
    }

    /// Mixing a decoupled input `π_Ω ⊗ π_R` with a maximally entangled one
    /// scales every distance linearly, so degradation is monotone.
    #[test]
    fn distance_is_linear_along_the_interpolation(seed in any::<u64>(), ds in 2usize..=3, de in 1usize..=2) {
        let omega = ConstraintSubspace::full(ds, de).unwrap();
        let n = ds * de;
        let ent = max_entangled(n);
        let mixed = DensityOperator::maximally_mixed(DimensionSpec::new(vec![n, n]).unwrap());
        let u = haar_unitary(n, &mut Seed(seed).rng());
        let full = therm_distance(&ent, &u, &omega).unwrap();
        let mut last = -1.0;
        for i in 0..5 {
            let t = i as f64 / 4.0;
            let rho = DensityOperator::new(
                ent.matrix().scale(t) + mixed.matrix().scale(1.0 - t),
                ent.dims().clone(),
            ).unwrap();
            let d = therm_distance(&rho, &u, &omega).unwrap();
            prop_assert!((d - t * full).abs() < 1e-10);
            prop_assert!(d >= last - 1e-12);
            last = d;
        }
    }

    /// `(U ⊗ 1)|Φ⟩ = (1 ⊗ Uᵀ)|Φ⟩`, so for a maximally entangled input the
    /// reduced state is always `Φ_{SS'} ⊗ π`, at distance `1 − 1/|S|²`.
    #[test]
    fn entangled_inputs_never_thermalize(seed in any::<u64>(), ds in 2usize..=3, de in 1usize..=3) {
        let omega = ConstraintSubspace::full(ds, de).unwrap();
        let rho = max_entangled(ds * de);
        let expect = 1.0 - 1.0 / (ds * ds) as f64;
        for t in 0..4 {
            let u = haar_unitary(ds * de, &mut Seed(seed).stream(t));
            prop_assert!((therm_distance(&rho, &u, &omega).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn converse_penalty_is_positive(eps in 0.001f64..0.008, ds in 2usize..=3, de in 1usize..=2) {
        let omega = ConstraintSubspace::full(ds, de).unwrap();
        let rho = max_entangled(ds * de);
        let delta = (eps / 5.0).powi(2);
        let smoothing = 11.0 * eps.sqrt();
        let margin = condition_converse(&rho, &omega, eps, delta).unwrap();
        prop_assert!(margin < converse_leading_order(&rho, &omega, smoothing).unwrap());
    }

    #[test]
    fn pure_states_are_normalized(seed in any::<u64>(), a in 1usize..=4, b in 1usize..=4) {
        let psi = random_pure(&[a, b], &mut Seed(seed).rng()).unwrap();
        prop_assert!((psi.vector().norm() - 1.0).abs() < 1e-12);
    }
}
