use grasspack::{distance, pairwise_distances, principal_angles, Metric, Subspace};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn subspace_strategy(m: usize, k: usize) -> impl Strategy<Value = Subspace> {
    prop::collection::vec(-1.0f64..1.0, m * k).prop_filter_map("rank deficient", move |v| {
        Subspace::orthonormalize(&DMatrix::from_column_slice(m, k, &v)).ok()
    })
}

fn orthogonal_strategy(k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    subspace_strategy(k, k).prop_map(Subspace::into_basis)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..8).prop_flat_map(|m| (Just(m), 1..=m))
}

fn pair() -> impl Strategy<Value = (Subspace, Subspace)> {
    dims().prop_flat_map(|(m, k)| (subspace_strategy(m, k), subspace_strategy(m, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distances_depend_on_span_only(
        (s, t, q) in dims().prop_flat_map(|(m, k)| (
            subspace_strategy(m, k), subspace_strategy(m, k), orthogonal_strategy(k)
        ))
    ) {
        let rotated = Subspace::from_orthonormal(s.basis() * &q).unwrap();
        for metric in Metric::ALL {
            let a = distance(&s, &t, metric).unwrap();
            let b = distance(&rotated, &t, metric).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{metric}: {a} vs {b}");
        }
    }

    #[test]
    fn chordal_frobenius_form_matches_angles((s, t) in pair()) {
        let k = s.dim() as f64;
        let cross = s.basis().transpose() * t.basis();
        let frobenius = (k - cross.norm_squared()).max(0.0).sqrt();
        let angles = principal_angles(&s, &t).unwrap();
        let from_angles: f64 = angles.as_slice().iter().map(|a| a.sin().powi(2)).sum::<f64>().sqrt();
        let d = distance(&s, &t, Metric::Chordal).unwrap();
        prop_assert!((from_angles - d).abs() <= 1e-9);
        // the closed form cancels catastrophically near zero, so compare squares there
        prop_assert!((frobenius * frobenius - d * d).abs() <= 1e-9);
        if d > 1e-4 {
            prop_assert!((frobenius - d).abs() <= 1e-9);
        }
    }

    #[test]
    fn fubini_study_det_form_matches_angles((s, t) in pair()) {
        let cross = s.basis().transpose() * t.basis();
        let det_form = cross.determinant().abs().min(1.0).acos();
        let angles = principal_angles(&s, &t).unwrap();
        let product: f64 = angles.as_slice().iter().map(|a| a.cos()).product();
        let d = distance(&s, &t, Metric::FubiniStudy).unwrap();
        prop_assert!((product.min(1.0).acos() - det_form).abs() <= 1e-7);
        if d > 1e-4 {
            prop_assert!((det_form - d).abs() <= 1e-9, "{det_form} vs {d}");
        }
    }

    #[test]
    fn angles_are_sorted_bounded_and_symmetric((s, t) in pair()) {
        let st = principal_angles(&s, &t).unwrap();
        let ts = principal_angles(&t, &s).unwrap();
        prop_assert_eq!(st.len(), s.dim());
        for w in st.as_slice().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for (a, b) in st.as_slice().iter().zip(ts.as_slice()) {
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(a));
            prop_assert!((a - b).abs() <= 1e-10);
        }
        for metric in Metric::ALL {
            let d1 = distance(&s, &t, metric).unwrap();
            let d2 = distance(&t, &s, metric).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12);
            prop_assert!(d1 >= 0.0 && d1 <= metric.max_distance(s.dim()) + 1e-12);
        }
    }

    #[test]
    fn lines_reduce_to_the_single_angle(
        (s, t) in (2usize..8).prop_flat_map(|m| (subspace_strategy(m, 1), subspace_strategy(m, 1)))
    ) {
        let theta = principal_angles(&s, &t).unwrap().smallest();
        let dot: f64 = s.as_slice().iter().zip(t.as_slice()).map(|(a, b)| a * b).sum();
        prop_assert!((theta.cos() - dot.abs()).abs() <= 1e-12);
        prop_assert!((distance(&s, &t, Metric::Chordal).unwrap() - theta.sin()).abs() <= 1e-12);
        prop_assert!((distance(&s, &t, Metric::FubiniStudy).unwrap() - theta).abs() <= 1e-12);
    }

    #[test]
    fn chordal_triangle_inequality(
        (a, b, c) in dims().prop_flat_map(|(m, k)| (
            subspace_strategy(m, k), subspace_strategy(m, k), subspace_strategy(m, k)
        ))
    ) {
        let ab = distance(&a, &b, Metric::Chordal).unwrap();
        let bc = distance(&b, &c, Metric::Chordal).unwrap();
        let ac = distance(&a, &c, Metric::Chordal).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn identical_span_has_zero_distance(
        (s, q) in dims().prop_flat_map(|(m, k)| (subspace_strategy(m, k), orthogonal_strategy(k)))
    ) {
        let same = Subspace::from_orthonormal(s.basis() * q).unwrap();
        for metric in Metric::ALL {
            prop_assert!(distance(&s, &same, metric).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn pairwise_matrix_matches_individual_calls(
        subs in dims().prop_flat_map(|(m, k)| prop::collection::vec(subspace_strategy(m, k), 3))
    ) {
        for metric in Metric::ALL {
            let d = pairwise_distances(&subs, metric).unwrap();
            for i in 0..3 {
                prop_assert_eq!(d[(i, i)], 0.0);
                for j in 0..3 {
                    prop_assert_eq!(d[(i, j)], d[(j, i)]);
                    if i < j {
                        prop_assert_eq!(d[(i, j)], distance(&subs[i], &subs[j], metric).unwrap());
                    }
                }
            }
        }
    }
}
