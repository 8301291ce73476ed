mod common;

use common::*;
use proptest::prelude::*;
use refinable::bounds::{
    crude_bound, eigen_bounds, refined_bound, regularity_report, ReportOptions,
};
use refinable::equation::{parse_equation, serialize_equation};
use refinable::fourier::fhat;
use refinable::hull::{extremal_subset, in_convex_hull, is_isolated, sample_directions, Direction};
use refinable::iterate::{extremal_decomposition, iterated_mask};
use refinable::linalg::spectral_radius_inverse;
use refinable::presets;
use refinable::scalar::{Point, Scalar};
use refinable::{Arithmetic, RefinementEquation};

const TOL: f64 = 1e-9;

fn equation_from_seed(seed: u64) -> ExactEquation {
    random_equation(&mut rng(seed))
}

fn exact_points(raw: &[(i64, i64)]) -> Vec<Point> {
    raw.iter()
        .map(|&(x, y)| {
            vec![
                Scalar::from_integer(Arithmetic::Exact, x),
                Scalar::from_integer(Arithmetic::Exact, y),
            ]
        })
        .collect()
}

fn distinct(raw: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    let mut seen = Vec::new();
    for p in raw {
        if !seen.contains(&p) {
            seen.push(p);
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_point_lies_in_hull_of_extremal_subset(raw in prop::collection::vec((-6i64..6, -6i64..6), 1..10)) {
        let points = exact_points(&distinct(raw));
        let ext = extremal_subset(&points).unwrap();
        let vertices: Vec<Point> = ext.iter().map(|&i| points[i].clone()).collect();
        for p in &points {
            prop_assert!(in_convex_hull(&vertices, p));
        }
        for &i in &ext {
            let others: Vec<Point> = points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
            prop_assert!(others.is_empty() || !in_convex_hull(&others, &points[i]));
        }
    }

    #[test]
    fn isolated_maximizer_is_an_extremal_point(raw in prop::collection::vec((-6i64..6, -6i64..6), 2..10), seed in 0u64..1000) {
        let points = exact_points(&distinct(raw));
        let ext = extremal_subset(&points).unwrap();
        let u = &sample_directions(2, 1, seed)[0];
        let w = is_isolated(&points, u, 0.0);
        if w.holds {
            prop_assert!(ext.iter().any(|&i| points[i] == w.maximizer));
        }
    }

    #[test]
    fn document_round_trip(seed in 0u64..10_000) {
        let eq = equation_from_seed(seed).library();
        let back = parse_equation(&serialize_equation(&eq)).unwrap();
        prop_assert_eq!(back, eq);
    }

    #[test]
    fn tau_ignores_translation_order(seed in 0u64..10_000) {
        let ex = equation_from_seed(seed);
        let mut rev = ex.clone();
        rev.d.reverse();
        rev.c.reverse();
        let a = spectral_radius_inverse(&ex.library(), TOL).unwrap().tau;
        let b = spectral_radius_inverse(&rev.library(), TOL).unwrap().tau;
        prop_assert_eq!(a, b);
        let ca = crude_bound(&ex.library(), TOL).unwrap().value;
        let cb = crude_bound(&rev.library(), TOL).unwrap().value;
        prop_assert_eq!(ca, cb);
    }

    #[test]
    fn extremal_point_moves_with_translation_scaling(seed in 0u64..10_000, m in 1usize..5) {
        let ex = equation_from_seed(seed);
        let scaled = ex.scaled_translations(&q(5, 2));
        let u = Direction::new(random_unit(&mut rng(seed ^ 0xabc), ex.dim()), 0).unwrap();
        let a = extremal_decomposition(&ex.library(), &u, m).unwrap();
        let b = extremal_decomposition(&scaled.library(), &u, m).unwrap();
        prop_assert_eq!(&a.digits, &b.digits);
        let pa = points_of(&a.point);
        let pb = points_of(&b.point);
        for (x, y) in pa.iter().zip(&pb) {
            prop_assert_eq!(x * q(5, 2), y.clone());
        }
    }

    #[test]
    fn bounds_invariant_under_translation_scaling(seed in 0u64..10_000) {
        let ex = equation_from_seed(seed);
        let scaled = ex.scaled_translations(&q(3, 1));
        let (e, s) = (ex.library(), scaled.library());
        prop_assert_eq!(crude_bound(&e, TOL).unwrap().value, crude_bound(&s, TOL).unwrap().value);
        let ev: Vec<_> = eigen_bounds(&e, TOL).unwrap().into_iter().map(|b| b.value).collect();
        let sv: Vec<_> = eigen_bounds(&s, TOL).unwrap().into_iter().map(|b| b.value).collect();
        prop_assert_eq!(ev, sv);
        prop_assert_eq!(
            refined_bound(&e, 5, 8, 0.0, 0, TOL).unwrap().value,
            refined_bound(&s, 5, 8, 0.0, 0, TOL).unwrap().value
        );
    }

    #[test]
    fn refined_never_exceeds_crude(seed in 0u64..10_000, m_max in 1usize..7, dirs in 1usize..12) {
        let eq = equation_from_seed(seed).library();
        let crude = crude_bound(&eq, TOL).unwrap().value.unwrap();
        if let Some(r) = refined_bound(&eq, m_max, dirs, 0.0, 1, TOL).unwrap().value {
            prop_assert!(r <= crude + 1e-12, "refined {} > crude {}", r, crude);
        }
    }

    #[test]
    fn final_bound_monotone_in_search_effort(seed in 0u64..10_000, m in 1usize..5, dirs in 1usize..8) {
        let eq = equation_from_seed(seed).library();
        let small = ReportOptions { m_max: m, dir_count: dirs, fourier: None, ..ReportOptions::default() };
        let large = ReportOptions { m_max: m + 2, dir_count: dirs * 2, ..small.clone() };
        let a = regularity_report(&eq, &small).unwrap();
        let b = regularity_report(&eq, &large).unwrap();
        prop_assert!(b.final_bound <= a.final_bound);
        for bound in a.bounds().filter_map(|b| b.value) {
            prop_assert!(a.final_bound <= bound);
        }
    }

    #[test]
    fn mask_sum_is_power_of_coefficient_sum(seed in 0u64..10_000, m in 1usize..5) {
        let ex = equation_from_seed(seed);
        let mask = iterated_mask(&ex.library(), m, 1_000_000).unwrap();
        let sum: f64 = ex.c.iter().map(to_f64).sum();
        let want = sum.powi(m as i32);
        prop_assert!((mask.coefficient_sum() - want).abs() <= 1e-9 * want.abs());
        prop_assert_eq!(mask.entries.len() as u64 + mask.collision_count, (ex.d.len() as u64).pow(m as u32));
    }
}

#[test]
fn truncated_product_converges_geometrically() {
    for eq in [presets::hat(), presets::haar(), presets::daubechies4()] {
        for xi in [0.7, 3.0, 11.0, 40.0] {
            let steps: Vec<f64> = (20..=40)
                .map(|t| (fhat(&eq, &[xi], t + 1).unwrap() - fhat(&eq, &[xi], t).unwrap()).norm())
                .collect();
            for w in steps.windows(2) {
                assert!(w[1] <= w[0] * 0.75 + 1e-17, "xi = {xi}: {w:?}");
            }
        }
    }
}

#[test]
fn product_is_one_at_origin_for_two_dimensional_equations() {
    let eq = RefinementEquation::from_f64(
        Arithmetic::Float,
        &[&[1.0, -1.0], &[1.0, 1.0]],
        &[&[0.0, 0.0], &[1.0, 0.0]],
        &[1.0, 1.0],
    )
    .unwrap();
    for t in [1, 5, 40] {
        assert_eq!(fhat(&eq, &[0.0, 0.0], t).unwrap().re, 1.0);
        assert_eq!(fhat(&eq, &[0.0, 0.0], t).unwrap().im, 0.0);
    }
}

#[test]
fn refined_row_along_eigenvector_equals_eigen_bound() {
    for eq in [presets::hat(), presets::daubechies4()] {
        let eigen = eigen_bounds(&eq, TOL).unwrap();
        for (i, u) in [vec![1.0], vec![-1.0]].into_iter().enumerate() {
            let d = Direction::new(u, i).unwrap();
            let tau = spectral_radius_inverse(&eq, TOL).unwrap().tau;
            for m in 1..=8 {
                let dec = extremal_decomposition(&eq, &d, m).unwrap();
                let row = dec.log_abs_product / (m as f64 * tau.ln());
                let want = eigen[i].value.unwrap();
                assert!((row - want).abs() <= 1e-12, "m = {m}: {row} vs {want}");
            }
        }
    }
}
