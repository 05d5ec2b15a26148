use num_complex::Complex64;
use proptest::prelude::*;

use steercert::canonical::{canonicalize, diagonalize_correlations, CanonicalState};
use steercert::lhsmodel::{
    domination_check, flip_solution, lhs_assemblage, quantum_assemblage, reproduce_assemblage,
};
use steercert::qstate::{
    bloch_operator, hermitian_eigensystem, pauli_compose, pauli_decompose, reduced_states, steered_operator, werner,
    ComplexMatrix, DensityMatrix,
};
use steercert::sampling::{random_canonical_state, random_direction, stream_rng};
use steercert::steercrit::{
    certify_povm, certify_projective, maximize_objective, objective, unit_efficiency_objective, MaximizeOptions,
    MeasurementDirection,
};
use steercert::tomo::{invert_probabilities, outcome_probabilities};

/// `G G† / Tr(G G†)` mixed with a little white noise so filters stay well conditioned.
fn density_matrix() -> impl Strategy<Value = DensityMatrix> {
    (prop::collection::vec(-1.0f64..1.0, 32), 0.02f64..0.5).prop_map(|(v, noise)| {
        let g = ComplexMatrix::from_row_major(4, (0..16).map(|k| Complex64::new(v[2 * k], v[2 * k + 1])).collect())
            .unwrap();
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        let m = &gg.scale((1.0 - noise) / tr) + &ComplexMatrix::identity(4).scale(noise / 4.0);
        DensityMatrix::new(m.hermitian_part()).unwrap()
    })
}

fn canonical_state() -> impl Strategy<Value = CanonicalState> {
    any::<u64>().prop_map(|s| random_canonical_state(&mut stream_rng(s, 0)))
}

fn direction() -> impl Strategy<Value = MeasurementDirection> {
    any::<u64>().prop_map(|s| random_direction(&mut stream_rng(s, 1)))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn fast() -> MaximizeOptions {
    MaximizeOptions::with_grid_points(4096)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pauli_round_trip(rho in density_matrix()) {
        let p = pauli_decompose(&rho).unwrap();
        let back = pauli_compose(&p).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let again = pauli_decompose(&back).unwrap();
        for i in 0..3 {
            prop_assert!((again.a[i] - p.a[i]).abs() < 1e-12);
            prop_assert!((again.b[i] - p.b[i]).abs() < 1e-12);
            for j in 0..3 {
                prop_assert!((again.t[i][j] - p.t[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectra_are_physical(rho in density_matrix()) {
        let es = hermitian_eigensystem(rho.matrix()).unwrap();
        prop_assert!(es.eigenvalues.iter().all(|&l| l >= -1e-10));
        prop_assert!((es.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(es.reconstruct().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn steered_operator_is_additive(rho in density_matrix(), n1 in prop::array::uniform3(-0.3f64..0.3),
                                    n2 in prop::array::uniform3(-0.3f64..0.3)) {
        // Effects 0.25 I + n·σ with |n| < 0.25 sum to at most I.
        let clip = |n: [f64; 3]| {
            let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if r > 0.24 { n.map(|v| v * 0.24 / r) } else { n }
        };
        let e1 = bloch_operator(0.25, &clip(n1));
        let e2 = bloch_operator(0.25, &clip(n2));
        let s1 = steered_operator(&rho, &e1).unwrap();
        let s2 = steered_operator(&rho, &e2).unwrap();
        let s12 = steered_operator(&rho, &(&e1 + &e2)).unwrap();
        prop_assert!((&s1.matrix + &s2.matrix).max_abs_diff(&s12.matrix) < 1e-12);
    }

    #[test]
    fn werner_pauli_form(mu in 0.0f64..=1.0) {
        let p = pauli_decompose(&werner(mu).unwrap()).unwrap();
        for i in 0..3 {
            prop_assert!(p.a[i].abs() < 1e-15 && p.b[i].abs() < 1e-15);
            for j in 0..3 {
                let expected = if i == j { -mu } else { 0.0 };
                prop_assert!((p.t[i][j] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn canonical_form_properties(rho in density_matrix()) {
        let r = canonicalize(&rho).unwrap();
        prop_assume!(!r.trivially_nonsteerable);
        let c = r.canonical;
        let composed = c.density_matrix().unwrap();
        let (_, rho_b) = reduced_states(&composed).unwrap();
        prop_assert!(rho_b.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-9);
        prop_assert!(c.t[0] >= c.t[1] - 1e-12 && c.t[1] >= c.t[2].abs() - 1e-12);

        let again = canonicalize(&composed).unwrap().canonical;
        for i in 0..3 {
            prop_assert!((again.t[i] - c.t[i]).abs() < 1e-9);
            prop_assert!((again.a[i] - c.a[i]).abs() < 1e-9, "a {:?} vs {:?}", again.a, c.a);
        }
    }

    #[test]
    fn diagonalization_invariants(rho in density_matrix()) {
        let mut p = pauli_decompose(&rho).unwrap();
        p.b = [0.0; 3];
        let r = diagonalize_correlations(&p).unwrap();
        let t = r.canonical.t;
        prop_assert!((t[0] * t[1] * t[2] - det3(&p.t)).abs() < 1e-9);
        let frob: f64 = p.t.iter().flatten().map(|v| v * v).sum();
        prop_assert!((t.iter().map(|v| v * v).sum::<f64>() - frob).abs() < 1e-9);
        let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assert!((norm(&r.canonical.a) - norm(&p.a)).abs() < 1e-12);
        // Singular values: eigenvalues of T Tᵀ are t_i².
        let mut sv: Vec<f64> = t.iter().map(|v| v.abs()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let tt = ComplexMatrix::from_row_major(
            4,
            (0..16).map(|k| {
                let (i, j) = (k / 4, k % 4);
                if i < 3 && j < 3 {
                    Complex64::new((0..3).map(|l| p.t[i][l] * p.t[j][l]).sum(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }).collect(),
        ).unwrap();
        let es = hermitian_eigensystem(&tt).unwrap();
        for k in 0..3 {
            prop_assert!((es.eigenvalues[k].max(0.0).sqrt() - sv[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn objective_is_even(c in canonical_state(), x in direction(), eps in 0.0f64..=1.0) {
        prop_assert_eq!(objective(&c, eps, &x).unwrap(), objective(&c, eps, &x.neg()).unwrap());
    }

    #[test]
    fn unit_efficiency_form(c in canonical_state(), x in direction()) {
        prop_assert!((objective(&c, 1.0, &x).unwrap() - unit_efficiency_objective(&c, &x)).abs() < 1e-12);
    }

    #[test]
    fn povm_is_projective_at_four_eps(c in canonical_state(), eps in 0.0f64..=0.25) {
        let p = certify_povm(&c, eps, &fast()).unwrap();
        let q = certify_projective(&c, 4.0 * eps, &fast()).unwrap();
        prop_assert_eq!(p.certified, q.certified);
        prop_assert_eq!(p.objective_max, q.objective_max);
    }

    #[test]
    fn lhs_sum_rules_and_marginals(c in canonical_state(), x in direction(), eps in 0.0f64..=1.0) {
        let l = lhs_assemblage(&c, eps, &x).unwrap();
        let q = quantum_assemblage(&c, eps, &x).unwrap();
        let half = ComplexMatrix::identity(2).scale(0.5);
        prop_assert!(l.total().max_abs_diff(&half) < 1e-10);
        prop_assert!(q.total().max_abs_diff(&half) < 1e-10);
        prop_assert!(l.null.matrix.max_abs_diff(&half.scale(1.0 - eps)) < 1e-10);
        prop_assert!(q.null.matrix.max_abs_diff(&half.scale(1.0 - eps)) < 1e-10);
        let marginal = 0.5 * eps * (1.0 + c.a_dot(x.as_array()));
        prop_assert!((l.plus.weight - marginal).abs() < 1e-12);
        prop_assert!((q.plus.weight - marginal).abs() < 1e-12);
    }

    #[test]
    fn lhs_entries_are_diagonal_along_the_steering_axis(c in canonical_state(), x in direction(), eps in 0.0f64..=1.0) {
        let l = lhs_assemblage(&c, eps, &x).unwrap();
        let s = steercert::lhsmodel::steering_axis(&c, &x);
        // Projector onto |s> and its complement; the off-diagonal block is P σ (I - P).
        let p = bloch_operator(0.5, &s.map(|v| 0.5 * v));
        let q = &ComplexMatrix::identity(2) - &p;
        for e in [&l.plus, &l.minus, &l.null] {
            let off = &(&p * &e.matrix) * &q;
            prop_assert!(off.max_abs() < 1e-14);
        }
    }

    #[test]
    fn certified_states_are_dominated(c in canonical_state(), eps in 0.0f64..=1.0, seed in any::<u64>()) {
        let v = certify_projective(&c, eps, &fast()).unwrap();
        prop_assume!(v.certified);
        let mut rng = stream_rng(seed, 2);
        for _ in 0..20 {
            let x = random_direction(&mut rng);
            let r = domination_check(&c, eps, &x).unwrap();
            prop_assert!(r.dominated, "{r:?}");
            if eps > 0.0 {
                let rep = reproduce_assemblage(&lhs_assemblage(&c, eps, &x).unwrap(), &quantum_assemblage(&c, eps, &x).unwrap()).unwrap();
                prop_assert!(rep.residue < 1e-10);
            }
        }
    }

    #[test]
    fn maximum_beats_random_directions(c in canonical_state(), eps in 0.0f64..=1.0, seed in any::<u64>()) {
        let (best, _) = maximize_objective(&c, eps, &MaximizeOptions::default()).unwrap();
        let mut rng = stream_rng(seed, 3);
        for _ in 0..2000 {
            let x = random_direction(&mut rng);
            prop_assert!(objective(&c, eps, &x).unwrap() <= best + 1e-7);
        }
    }

    #[test]
    fn flips_are_probabilities(p in 0.01f64..0.99, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        // alpha_lhs in [1/2, min(1, 1/(2p))], alpha in [1/2, alpha_lhs].
        let hi = (0.5 / p).min(1.0);
        let alpha_lhs = 0.5 + a * (hi - 0.5);
        let alpha = 0.5 + b * (alpha_lhs - 0.5);
        let s = flip_solution(p, alpha_lhs, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.f) && (0.0..=1.0).contains(&s.g));
        prop_assert!(s.reconstruction_residue() < 1e-12);
        prop_assert!((s.g - p * (1.0 - s.f) / (1.0 - p)).abs() < 1e-12);
    }

    #[test]
    fn exact_moments_invert(rho in density_matrix()) {
        let back = invert_probabilities(&outcome_probabilities(&rho).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
    }
}
