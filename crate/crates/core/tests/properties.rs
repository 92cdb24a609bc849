use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use tempwit_core::conservation::ConservedQuantity;
use tempwit_core::dense::{expm_hermitian, partial_trace, pauli_decompose, qubit_dense, to_dense, DenseOperator};
use tempwit_core::heisenberg::{evolve_descriptors, swap_expr, Circuit, DescriptorFrame, GateSpec};
use tempwit_core::homogenizer::{partial_swap, run, HomogenizerConfig};
use tempwit_core::oscillator::oscillator_witness_run;
use tempwit_core::states::from_bloch;
use tempwit_core::witness::rotation::{Axis, SignedAxis};
use tempwit_core::witness::search::{classical_search_family, rotation_unitary};
use tempwit_core::witness::{
    classical_impossibility_search, coherence, conjugated_generator, rotation_image, solve_axis_system,
    RotationSpec, SearchBudget, TargetMap,
};
use tempwit_core::{commutator, pauli_mul, OperatorExpr, Pauli, PauliLabel, PauliString};

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn expr(n: usize) -> impl Strategy<Value = OperatorExpr> {
    prop::collection::vec(
        (prop::collection::vec(pauli(), n), -2.0f64..2.0, -2.0f64..2.0),
        0..6,
    )
    .prop_map(move |terms| {
        let mut e = OperatorExpr::zero(n);
        for (sites, re, im) in terms {
            e.add_term(PauliLabel::new(sites), Complex64::new(re, im));
        }
        e
    })
}

fn sized_expr() -> impl Strategy<Value = OperatorExpr> {
    (1usize..=3).prop_flat_map(expr)
}

fn expr_pair() -> impl Strategy<Value = (OperatorExpr, OperatorExpr)> {
    (1usize..=3).prop_flat_map(|n| (expr(n), expr(n)))
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..std::f64::consts::PI, 0.0f64..2.0 * std::f64::consts::PI).prop_map(|(t, p)| {
        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
    })
}

fn bloch_ball() -> impl Strategy<Value = [f64; 3]> {
    (unit_vector(), 0.0f64..=1.0).prop_map(|(u, r)| u.map(|x| x * r))
}

fn complex_matrix(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decompose_inverts_to_dense(e in sized_expr()) {
        let dims = vec![2; e.n_sites()];
        let back = pauli_decompose(&to_dense(&e, &dims).unwrap()).unwrap();
        prop_assert!(back.max_coeff_distance(&e) < 1e-13);
    }

    #[test]
    fn commutator_matches_dense((a, b) in expr_pair()) {
        let dims = vec![2; a.n_sites()];
        let sym = to_dense(&commutator(&a, &b).unwrap(), &dims).unwrap();
        let (da, db) = (to_dense(&a, &dims).unwrap(), to_dense(&b, &dims).unwrap());
        let dense = da.commutator(&db).unwrap();
        prop_assert!(sym.max_distance(&dense) < 1e-12);
    }

    #[test]
    fn rotation_image_matches_conjugation(n in unit_vector(), theta in -7.0f64..7.0) {
        let spec = RotationSpec::new(n, theta).unwrap();
        let u = rotation_unitary(n, theta);
        for (g, p) in [(Axis::X, "X"), (Axis::Y, "Y"), (Axis::Z, "Z")] {
            let conj = qubit_dense(&OperatorExpr::label(p)).conjugate_by(&u).unwrap();
            let coeffs = pauli_decompose(&conj).unwrap();
            let img = rotation_image(&spec, g);
            let poly = conjugated_generator(n, theta, g);
            for (k, l) in ["X", "Y", "Z"].iter().enumerate() {
                prop_assert!((coeffs.coeff_of(l).re - img[k]).abs() < 1e-12);
                prop_assert!((poly[k] - img[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherence_invariant_under_z_rotation(r in bloch_ball(), phi in -7.0f64..7.0) {
        let rho = from_bloch(r);
        let rz = rotation_unitary([0.0, 0.0, 1.0], phi);
        let rotated = rho.conjugate_by(&rz).unwrap();
        prop_assert!((coherence(&rho).unwrap() - coherence(&rotated).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(
        a in complex_matrix(6),
        b in complex_matrix(6),
        s in -3.0f64..3.0,
    ) {
        let da = DenseOperator::new(vec![2, 3], a).unwrap();
        let db = DenseOperator::new(vec![2, 3], b).unwrap();
        let mix = da.checked_add(&db.scale_real(s)).unwrap();
        for keep in [vec![0], vec![1]] {
            let lhs = partial_trace(&mix, &keep).unwrap();
            let rhs = partial_trace(&da, &keep)
                .unwrap()
                .checked_add(&partial_trace(&db, &keep).unwrap().scale_real(s))
                .unwrap();
            prop_assert!(lhs.max_distance(&rhs) < 1e-12);
            prop_assert!((lhs.trace() - mix.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_roots_satisfy_their_systems(theta in -7.0f64..7.0, perm in 0usize..6, signs in 0u8..8) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let images: [SignedAxis; 3] = std::array::from_fn(|i| SignedAxis {
            sign: if signs >> i & 1 == 1 { -1 } else { 1 },
            axis: Axis::ALL[perms[perm][i]],
        });
        let map = TargetMap::new(images).unwrap();
        let sol = solve_axis_system(&map, theta);
        for s in &sol.systems {
            for n in &s.real_roots {
                let f = conjugated_generator(*n, theta, s.system.generator);
                for k in 0..3 {
                    prop_assert!((f[k] - s.system.target[k]).abs() < 1e-10);
                }
            }
        }
        for n in &sol.common_axes {
            prop_assert!((n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn homogenizer_contracts_and_stays_positive(
        eta in 0.0f64..1.5,
        r in bloch_ball(),
        s in bloch_ball(),
    ) {
        let cfg = HomogenizerConfig::new(12, eta, from_bloch(r), from_bloch(s)).unwrap();
        let t = run(&cfg).unwrap();
        prop_assert!(t.max_distance_increase() <= 1e-12);
        prop_assert!(t.max_recursion_gap() < 1e-12);
        for st in &t.steps {
            prop_assert!(st.min_eigenvalue >= -1e-12);
        }
    }

    #[test]
    fn classical_family_members_commute_with_mediator_z(v in prop::collection::vec(-3.0f64..3.0, 4)) {
        let fam = classical_search_family(&ConservedQuantity::nonadditive()).unwrap();
        let basis = fam.solution_space();
        let mut p = vec![0.0; fam.params.len()];
        for (b, x) in basis.iter().zip(&v) {
            for k in 0..p.len() {
                p[k] += b[k] * x;
            }
        }
        let h = fam.member(&p).unwrap();
        let c = commutator(&h, &OperatorExpr::label("IZ")).unwrap();
        prop_assert!(c.is_zero());
    }
}

#[test]
fn single_site_products_match_matrices() {
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let la = PauliLabel::new(vec![a]);
            let lb = PauliLabel::new(vec![b]);
            let prod = pauli_mul(&PauliString::unit(la.clone()), &PauliString::unit(lb.clone())).unwrap();
            let dense = qubit_dense(&OperatorExpr::term(prod.label.clone(), prod.coeff));
            let (ma, mb) = (a.matrix(), b.matrix());
            for i in 0..2 {
                for j in 0..2 {
                    let expect = ma[i][0] * mb[0][j] + ma[i][1] * mb[1][j];
                    assert_abs_diff_eq!((dense.get(i, j) - expect).norm(), 0.0, epsilon = 1e-15);
                }
            }
        }
    }
}

#[test]
fn descriptor_frames_keep_the_algebra() {
    for f in evolve_descriptors(&Circuit::witness(), &DescriptorFrame::canonical(2)).unwrap() {
        assert!(f.algebra_residual().unwrap() < 1e-12, "t_{}", f.time);
        for s in 0..2 {
            for k in 0..3 {
                let d = qubit_dense(f.get(s, k));
                assert!(d.hermiticity_residual() < 1e-12);
                let sq = d.checked_mul(&d).unwrap();
                assert!(sq.max_distance(&DenseOperator::identity(&[2, 2])) < 1e-12);
            }
        }
    }
}

#[test]
fn single_swap_relabels_subsystems() {
    let frames = evolve_descriptors(&Circuit::new(vec![GateSpec::Swap]).unwrap(), &DescriptorFrame::canonical(2)).unwrap();
    let f = &frames[1];
    for (k, p) in ["X", "Y", "Z"].iter().enumerate() {
        assert!(f.get(0, k).max_coeff_distance(&OperatorExpr::label(&format!("I{p}"))) < 1e-15);
        assert!(f.get(1, k).max_coeff_distance(&OperatorExpr::label(&format!("{p}I"))) < 1e-15);
    }
}

#[test]
fn partial_swap_is_exchange_symmetric_and_unitary() {
    let s = qubit_dense(&swap_expr());
    for k in 0..16 {
        let p = partial_swap(k as f64 * 0.2);
        assert!(p.unitarity_residual() < 1e-12);
        assert!(p.conjugate_by(&s).unwrap().max_distance(&p) < 1e-15);
    }
}

#[test]
fn oscillator_trajectories_stay_physical() {
    let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
    for d in [2, 3, 5] {
        let r = oscillator_witness_run(d, &times).unwrap();
        assert!(r.norm_drift < 1e-10);
        assert!(r.coherence.iter().flatten().all(|&c| (0.0..=1.0 + 1e-12).contains(&c)));
    }
    let r = oscillator_witness_run(2, &times).unwrap();
    assert!(r.max_coherence[1] > 0.1, "{:?}", r.max_coherence);
}

#[test]
fn search_is_independent_of_worker_count() {
    let budget = SearchBudget {
        grid_points: 3,
        grid_range: 2.0,
        time_points: 8,
        random_draws: 200,
    };
    let go = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                classical_impossibility_search(
                    &ConservedQuantity::nonadditive(),
                    &TargetMap::frame_exchange(),
                    &budget,
                    11,
                )
                .unwrap()
            })
    };
    assert_eq!(go(1), go(4));
}

#[test]
fn expm_of_zero_is_identity() {
    let z = DenseOperator::zeros(&[2, 2]);
    assert!(expm_hermitian(&z, 3.0).unwrap().max_distance(&DenseOperator::identity(&[2, 2])) < 1e-15);
}
