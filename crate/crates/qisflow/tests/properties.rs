//! Randomized property tests: library results against independent oracles
//! and against the algebraic identities they must satisfy.

mod common;

use proptest::prelude::*;

use qisflow::density::{
    fisher_metric, fisher_metric_eigenbasis, metric_gradient, oja_rhs as density_rhs, sld,
    TracePotential,
};
use qisflow::flow::replicator_oracle;
use qisflow::immersion::{sign_action, square_map, square_map_differential, SignVector};
use qisflow::sphere::{has_full_support, oja_rhs, tangent_project};
use qisflow::{
    parse_config, Complex64, ComplexMatrix, DensityMatrix, DiagonalDensity, HermitianMatrix,
    Spectrum, SphereState, TangentMatrix,
};

fn complex_entries(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m * m).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect()
    })
}

fn matrix_strategy(m: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_entries(m).prop_map(move |entries| ComplexMatrix::new(m, entries).unwrap())
}

fn hermitian_strategy(m: usize) -> impl Strategy<Value = HermitianMatrix> {
    matrix_strategy(m).prop_map(HermitianMatrix::symmetrized)
}

/// Interior density `(B B^H + I/10) / trace`: the ridge keeps every draw
/// comfortably inside the cone.
fn density_strategy(m: usize) -> impl Strategy<Value = DensityMatrix> {
    matrix_strategy(m).prop_map(move |b| {
        let gram = b.multiply(&b.adjoint()).unwrap();
        let mut entries: Vec<Complex64> = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let ridge = if i == j {
                    Complex64::new(0.1, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                entries.push(gram.get(i, j) + ridge);
            }
        }
        let padded = ComplexMatrix::new(m, entries).unwrap();
        let trace = padded.trace().re;
        let normalized = padded.scale(1.0 / trace);
        DensityMatrix::new(HermitianMatrix::symmetrized(normalized)).unwrap()
    })
}

fn tangent_strategy(m: usize) -> impl Strategy<Value = TangentMatrix> {
    hermitian_strategy(m).prop_map(move |h| {
        let shift = h.trace_real() / m as f64;
        let mut entries: Vec<Complex64> = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let adjust = if i == j {
                    Complex64::new(shift, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                entries.push(h.get(i, j) - adjust);
            }
        }
        let traceless = ComplexMatrix::new(m, entries).unwrap();
        TangentMatrix::new(HermitianMatrix::symmetrized(traceless)).unwrap()
    })
}

/// Sphere point with every component clear of the hyperplanes.
fn supported_sphere_strategy(m: usize) -> impl Strategy<Value = SphereState> {
    proptest::collection::vec(0.1..1.0f64, m)
        .prop_flat_map(move |mags| {
            (
                Just(mags),
                proptest::collection::vec(proptest::bool::ANY, m),
            )
        })
        .prop_map(|(mags, signs)| {
            let coords: Vec<f64> = mags
                .into_iter()
                .zip(signs)
                .map(|(x, s)| if s { x } else { -x })
                .collect();
            SphereState::normalized(coords).unwrap()
        })
}

fn simplex_strategy(m: usize) -> impl Strategy<Value = DiagonalDensity> {
    proptest::collection::vec(0.05..1.0f64, m).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        DiagonalDensity::new(raw.into_iter().map(|x| x / total).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs_and_is_unitary(
        a in (2usize..=5).prop_flat_map(hermitian_strategy)
    ) {
        let scale = a.as_matrix().frobenius_norm().max(1.0);
        let decomposition = a.eig().unwrap();
        let reconstruction_err = decomposition.reconstruct().max_abs_diff(a.as_matrix());
        prop_assert!(reconstruction_err <= 1e-10 * scale);
        prop_assert!(decomposition.frame_orthonormality_residual() <= 1e-10);
        for pair in decomposition.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn multiplication_matches_the_textbook_oracle_bit_for_bit(
        (a, b) in (2usize..=4).prop_flat_map(|m| (matrix_strategy(m), matrix_strategy(m)))
    ) {
        let product = a.multiply(&b).unwrap();
        let oracle = common::multiply_oracle(&a, &b);
        prop_assert_eq!(product.max_abs_diff(&oracle), 0.0);
    }

    #[test]
    fn rotation_eigenvalues_match_the_characteristic_polynomial(
        a in (2usize..=4).prop_flat_map(hermitian_strategy)
    ) {
        let scale = a.as_matrix().frobenius_norm().max(1.0);
        let by_rotations = a.eig().unwrap().eigenvalues;
        let min_gap = by_rotations
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(f64::INFINITY, f64::min);
        // The scan oracle needs simple, separated roots; skip the rare
        // near-degenerate draw rather than weaken the comparison.
        prop_assume!(min_gap > 1e-2 * scale);
        let by_charpoly = common::charpoly_eigenvalues(&a);
        for (x, y) in by_rotations.iter().zip(&by_charpoly) {
            prop_assert!((x - y).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn metric_is_symmetric_nonnegative_and_homogeneous(
        (rho, xi1, xi2) in (2usize..=4).prop_flat_map(|m| {
            (density_strategy(m), tangent_strategy(m), tangent_strategy(m))
        })
    ) {
        let forward = fisher_metric(&rho, &xi1, &xi2).unwrap();
        let backward = fisher_metric(&rho, &xi2, &xi1).unwrap();
        prop_assert!((forward - backward).abs() <= 1e-10 * forward.abs().max(1.0));

        let squared = fisher_metric(&rho, &xi1, &xi1).unwrap();
        prop_assert!(squared >= -1e-10);

        let eigen_route = fisher_metric_eigenbasis(&rho, &xi1, &xi2).unwrap();
        prop_assert!((forward - eigen_route).abs() <= 1e-9 * forward.abs().max(1.0));
    }

    #[test]
    fn replicator_oracle_is_a_flow_on_the_simplex(
        (theta0, c, s, t) in (2usize..=4).prop_flat_map(|m| {
            (
                simplex_strategy(m),
                proptest::collection::vec(-1.0..1.0f64, m),
                0.0..2.0f64,
                0.0..2.0f64,
            )
        })
    ) {
        let c = Spectrum::new(c).unwrap();
        let at_s = replicator_oracle(&theta0, &c, s).unwrap();
        prop_assert!((at_s.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(at_s.iter().all(|&x| x > 0.0));

        // Flow property: evolving s then t equals evolving s + t.
        let restart = DiagonalDensity::new(at_s).unwrap();
        let stepwise = replicator_oracle(&restart, &c, t).unwrap();
        let direct = replicator_oracle(&theta0, &c, s + t).unwrap();
        for (a, b) in stepwise.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_field_is_tangent_and_sign_equivariant(
        (w, c, mask) in (2usize..=5).prop_flat_map(|m| {
            (
                supported_sphere_strategy(m),
                proptest::collection::vec(-2.0..2.0f64, m),
                proptest::num::u64::ANY,
            )
        })
    ) {
        let spectrum = Spectrum::new(c).unwrap();
        let field = oja_rhs(&w, &spectrum).unwrap();
        let radial: f64 = w.coords().iter().zip(&field).map(|(a, b)| a * b).sum();
        prop_assert!(radial.abs() <= 1e-13 * spectrum.values().iter().fold(1.0f64, |acc, x| acc.max(x.abs())));

        let sigma = SignVector::from_mask(w.dim(), mask);
        let flipped = sign_action(&sigma, &w).unwrap();
        let flipped_field = oja_rhs(&flipped, &spectrum).unwrap();
        for (i, (a, b)) in field.iter().zip(&flipped_field).enumerate() {
            let expected = f64::from(sigma.signs()[i]) * a;
            prop_assert_eq!(expected, *b);
        }
    }

    #[test]
    fn pullback_of_the_fisher_metric_is_four_times_the_round_metric(
        (w, raw_u, raw_v) in (2usize..=4).prop_flat_map(|m| {
            (
                supported_sphere_strategy(m),
                proptest::collection::vec(-1.0..1.0f64, m),
                proptest::collection::vec(-1.0..1.0f64, m),
            )
        })
    ) {
        let u = tangent_project(&w, &raw_u).unwrap();
        let v = tangent_project(&w, &raw_v).unwrap();
        let image = square_map(&w).unwrap().to_density();
        let du = square_map_differential(&w, &u).unwrap();
        let dv = square_map_differential(&w, &v).unwrap();
        let paired = fisher_metric(&image, &du, &dv).unwrap();
        let round: f64 = u.components().iter().zip(v.components()).map(|(a, b)| a * b).sum();
        prop_assert!((paired - 4.0 * round).abs() <= 1e-9 * (4.0 * round).abs().max(1.0));
    }

    #[test]
    fn flow_field_descends_the_potential(
        (rho, c) in (2usize..=4).prop_flat_map(|m| {
            (density_strategy(m), proptest::collection::vec(-1.0..1.0f64, m))
        })
    ) {
        let spectrum = Spectrum::new(c).unwrap();
        let potential = TracePotential::hebbian(&spectrum);
        let gradient = metric_gradient(&rho, &potential).unwrap();
        let field = density_rhs(&rho, &spectrum).unwrap();
        // The field is minus the gradient, so pairing the two must be
        // minus the squared gradient norm: nonpositive.
        let descent = fisher_metric(&rho, &gradient, &field).unwrap();
        prop_assert!(descent <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sld_matches_the_dense_linear_system_oracle(
        (rho, xi) in (2usize..=4).prop_flat_map(|m| (density_strategy(m), tangent_strategy(m)))
    ) {
        let l = sld(&rho, &xi).unwrap();
        let oracle = common::sld_linear_system_oracle(&rho, &xi);
        let scale = l.as_matrix().frobenius_norm().max(1.0);
        prop_assert!(common::max_abs_entry_diff(l.as_matrix(), &oracle) <= 1e-9 * scale);
    }

    #[test]
    fn configs_round_trip_through_serialization(
        (kind, m, seed, dt_exp, stride, renormalize) in (
            prop_oneof![
                Just("sphere-flow"),
                Just("qis-flow"),
                Just("conjugacy"),
                Just("oja-compare"),
                Just("property-suite"),
            ],
            2usize..=5,
            proptest::num::u64::ANY,
            -4i32..=-1,
            1usize..=50,
            proptest::bool::ANY,
        )
    ) {
        let c: Vec<f64> = (0..m).map(|i| 2.0 - i as f64 / m as f64).collect();
        let text = format!(
            r#"{{"experiment": "{kind}", "m": {m}, "c": {c:?}, "seed": {seed},
                "integrator": {{"dt": 1e{dt_exp}, "t_max": 1.0,
                                "sample_stride": {stride}, "renormalize": {renormalize}}}}}"#
        );
        let config = parse_config(&text).unwrap();
        let serialized = serde_json::to_string(&config).unwrap();
        let reparsed = parse_config(&serialized).unwrap();
        prop_assert_eq!(config, reparsed);
    }
}

#[test]
fn charpoly_oracle_isolates_a_frozen_spectrum() {
    // Frozen draw: the scan must bracket exactly m simple roots and agree
    // with the rotation eigensolver.
    let a = qisflow::density::random_tangent(4, 2025).unwrap();
    let by_rotations = a.as_hermitian().eig().unwrap().eigenvalues;
    let by_charpoly = common::charpoly_eigenvalues(a.as_hermitian());
    assert_eq!(by_charpoly.len(), 4);
    for (x, y) in by_rotations.iter().zip(&by_charpoly) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn sld_oracle_solution_is_hermitian_for_a_frozen_draw() {
    let rho = qisflow::density::random_interior_density(3, 2026).unwrap();
    let xi = qisflow::density::random_tangent(3, 2027).unwrap();
    let entries = common::sld_linear_system_oracle(&rho, &xi);
    for i in 0..3 {
        for j in 0..3 {
            let here = entries[i * 3 + j];
            let mirror = entries[j * 3 + i].conj();
            assert!((here - mirror).norm() < 1e-9);
        }
    }
}

#[test]
fn full_support_predicate_matches_the_strategy() {
    let w = SphereState::normalized(vec![0.4, -0.7, 0.59]).unwrap();
    assert!(has_full_support(&w));
}
