//! Randomized property checks for the spec-level invariants that hold for
//! every input, not just the worked examples.

use ndarray::{Array1, Array2};
use privmix_core::evaluation::{permutation_loss, permutation_loss_brute};
use privmix_core::hunting::{distance_to_simplex, SimplexVertices};
use privmix_core::model::gen_theta;
use privmix_core::privacy::{debias, symmetric_edge_flip, PrivacyParams};
use privmix_core::rng::RngStream;
use privmix_core::spectral::{pseudo_degrees, select_nodes};
use privmix_core::DebiasedMatrix;
use proptest::prelude::*;

fn random_stochastic(n: usize, k: usize, stream: &mut RngStream) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((n, k));
    for i in 0..n {
        let mut total = 0.0;
        for j in 0..k {
            let w = -stream.uniform_oc().ln();
            m[[i, j]] = w;
            total += w;
        }
        for j in 0..k {
            m[[i, j]] /= total;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_scaling_identity_holds_for_every_seed(
        n in 1usize..300,
        b_n in 0.01f64..50.0,
        lo in 0.05f64..2.0,
        span in 0.0f64..5.0,
        seed in 0u64..1000,
    ) {
        let mut stream = RngStream::seed(seed);
        let theta = gen_theta(n, b_n, lo, lo + span, &mut stream).unwrap();
        let theta_bar = theta.sum() / n as f64;
        let scale = (n as f64).sqrt() * theta_bar;
        prop_assert!((scale - b_n).abs() <= 1e-12 * b_n.max(1.0));
        prop_assert!(theta.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn assignment_loss_equals_brute_force(
        n in 1usize..20,
        k in 2usize..6,
        seed in 0u64..1000,
    ) {
        let mut stream = RngStream::seed(seed);
        let a = random_stochastic(n, k, &mut stream);
        let b = random_stochastic(n, k, &mut stream);
        let exact = permutation_loss(&a, &b).unwrap().loss;
        let brute = permutation_loss_brute(&a, &b).unwrap();
        prop_assert!((exact - brute).abs() <= 1e-12);
        prop_assert!((0.0..=2.0).contains(&exact));
    }

    #[test]
    fn loss_is_invariant_under_estimate_relabeling(
        n in 1usize..15,
        k in 2usize..5,
        seed in 0u64..1000,
        rot in 0usize..4,
    ) {
        let mut stream = RngStream::seed(seed);
        let reference = random_stochastic(n, k, &mut stream);
        let estimate = random_stochastic(n, k, &mut stream);
        let base = permutation_loss(&estimate, &reference).unwrap().loss;
        // cyclic column rotation as the relabeling
        let mut rotated = Array2::<f64>::zeros((n, k));
        for i in 0..n {
            for j in 0..k {
                rotated[[i, (j + rot) % k]] = estimate[[i, j]];
            }
        }
        let rotated_loss = permutation_loss(&rotated, &reference).unwrap().loss;
        prop_assert!((base - rotated_loss).abs() <= 1e-12);
    }

    #[test]
    fn debiased_release_is_two_valued_and_symmetric(
        n in 2usize..40,
        eps in 0.05f64..10.0,
        density_seed in 0u64..500,
    ) {
        let mut stream = RngStream::seed(density_seed);
        let mut raw = Array2::<u8>::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let bit = u8::from(stream.uniform_oc() < 0.3);
                raw[[i, j]] = bit;
                raw[[j, i]] = bit;
            }
        }
        let a = privmix_core::model::AdjacencyMatrix::from_dense(raw).unwrap();
        let privacy = PrivacyParams::new(eps).unwrap();
        let out = debias(&symmetric_edge_flip(&a, privacy, &mut stream));
        let p = privacy.p_eps();
        let hi = (1.0 - p) / (1.0 - 2.0 * p);
        let lo = -p / (1.0 - 2.0 * p);
        for i in 0..n {
            prop_assert_eq!(out.matrix()[[i, i]], 0.0);
            for j in 0..n {
                if i != j {
                    let v = out.matrix()[[i, j]];
                    prop_assert!((v - hi).abs() < 1e-12 || (v - lo).abs() < 1e-12);
                    prop_assert_eq!(v, out.matrix()[[j, i]]);
                }
            }
        }
    }

    #[test]
    fn truncation_sets_shrink_with_constants(
        seed in 0u64..500,
        c_small in 0.001f64..0.05,
        c_boost in 1.5f64..20.0,
        gamma_small in 0.0f64..0.5,
        gamma_boost in 1.5f64..4.0,
    ) {
        let n = 30;
        let mut stream = RngStream::seed(seed);
        let mut pi = Array2::<f64>::zeros((n, 2));
        for i in 0..n {
            pi[[i, i % 2]] = 1.0;
        }
        let theta = gen_theta(n, 2.0, 0.3, 5.0, &mut stream).unwrap();
        let params = privmix_core::model::DcmmParams::new(
            theta,
            pi,
            privmix_core::model::make_planted_b(2, 0.8).unwrap(),
        )
        .unwrap();
        let omega = privmix_core::model::build_omega(&params).unwrap();
        let m = DebiasedMatrix::from_omega(&omega);
        let deg = pseudo_degrees(&m);

        let loose = select_nodes(&deg, 1.0, c_small, gamma_small, 2);
        let tight = select_nodes(&deg, 1.0, c_small * c_boost, gamma_small * gamma_boost, 2);
        if let (Ok((s1, g1)), Ok((s2, g2))) = (&loose, &tight) {
            prop_assert!(s2.iter().all(|i| s1.contains(i)));
            prop_assert!(g2.iter().all(|i| g1.contains(i)));
        }
    }

    #[test]
    fn simplex_distance_zero_iff_inside_triangle(
        x in -0.5f64..1.5,
        y in -0.5f64..1.5,
    ) {
        let v = SimplexVertices::new(
            ndarray::array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            0.0,
        )
        .unwrap();
        let p = ndarray::array![x, y];
        let d = distance_to_simplex(&p.view(), &v);
        let inside = x >= -1e-12 && y >= -1e-12 && x + y <= 1.0 + 1e-12;
        if inside {
            prop_assert!(d <= 1e-9, "inside point at distance {d}");
        } else {
            prop_assert!(d > 0.0, "outside point at distance 0");
        }
    }

    #[test]
    fn estimate_rows_stay_on_the_simplex(
        w0 in -2.0f64..2.0,
        w1 in -2.0f64..2.0,
        w2 in -2.0f64..2.0,
        s0 in 0.1f64..4.0,
        s1 in 0.1f64..4.0,
        s2 in 0.1f64..4.0,
    ) {
        let w = Array1::from(vec![w0, w1, w2]);
        let v1 = Array1::from(vec![s0, s1, s2]);
        let (row, _) = privmix_core::estimator::reconstruct_pi_row(&w.view(), &v1.view());
        prop_assert!(row.iter().all(|&x| x >= 0.0));
        prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
    }
}
