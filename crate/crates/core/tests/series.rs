use std::f64::consts::PI;

use knn_scaling::manifold::DimensionSpec;
use knn_scaling::mc::{fit_subleading, FitModel, ScalingEstimate};
use knn_scaling::series::{
    flat_mean, mean_from_series, reduced_normalizer, reduced_series, reduced_series_for, sphere_mean_exact,
    subleading_coeff, MomentSpec, PowerSeries, TopologyInfo, DEFAULT_MAX_TERMS,
};
use knn_scaling::special::ln_gamma;
use knn_scaling::{ExactPowerSeries, MomentSpec64};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn dim(d: u32) -> DimensionSpec {
    DimensionSpec::new(d).unwrap()
}

fn sphere_reduced(k: u32, n: u64) -> f64 {
    let ms = MomentSpec64::first(k, n).unwrap();
    let raw = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap().value;
    raw * reduced_normalizer(0.5, 1.0 / PI.sqrt(), k, n, 1.0)
}

#[test]
fn single_site_flat_mean() {
    let ms = MomentSpec64::first(1, 1).unwrap();
    let want = 2.0 / (3.0 * PI.sqrt());
    assert!((flat_mean(dim(2), &ms).unwrap() - want).abs() < 1e-15);
    let s = PowerSeries::new(0.5, vec![1.0 / PI.sqrt()]).unwrap();
    assert!((mean_from_series(&s, &ms).unwrap().value - want).abs() < 1e-15);
    assert!((want - 0.376126).abs() < 1e-6);
}

#[test]
fn constant_inverse_gives_constant_mean() {
    let s = PowerSeries::new(0.0, vec![0.7]).unwrap();
    for (k, n) in [(1, 1), (2, 9), (5, 500), (40, 100_000)] {
        let m = mean_from_series(&s, &MomentSpec64::first(k, n).unwrap()).unwrap();
        assert!((m.value - 0.7).abs() < 1e-13, "k={k} N={n}: {}", m.value);
    }
}

#[test]
fn single_term_series_equals_flat_mean() {
    let s = PowerSeries::<f64>::flat(dim(2));
    for k in 1..=6 {
        for n in [k as u64, 10, 77, 1000, 100_000] {
            let ms = MomentSpec64::first(k, n).unwrap();
            let a = mean_from_series(&s, &ms).unwrap().value;
            let b = flat_mean(dim(2), &ms).unwrap();
            assert!((a - b).abs() <= 1e-14 * b, "k={k} N={n}");
        }
    }
}

#[test]
fn truncated_sphere_series_against_full_sum() {
    let ms = MomentSpec64::first(1, 10).unwrap();
    let exact = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap().value;
    let printed = PowerSeries::new(
        0.5,
        [1.0, 1.0 / 6.0, 3.0 / 40.0, 5.0 / 112.0]
            .iter()
            .map(|c| c / PI.sqrt())
            .collect(),
    )
    .unwrap();
    let four = mean_from_series(&printed, &ms).unwrap().value;
    assert!((four - exact).abs() < 1e-2 && (four - exact).abs() > 1e-6);
    let j30 = mean_from_series(&PowerSeries::sphere_arcsin(30), &ms).unwrap().value;
    assert!((j30 - exact).abs() < 1e-6, "{j30} vs {exact}");
}

#[test]
fn flat_ratio_between_ranks() {
    for n in [2u64, 3, 10, 1000, 1_000_000] {
        let a = flat_mean(dim(2), &MomentSpec64::first(1, n).unwrap()).unwrap();
        let b = flat_mean(dim(2), &MomentSpec64::first(2, n).unwrap()).unwrap();
        assert!((b / a - 1.5).abs() < 1e-13, "N={n}");
    }
}

/// Expected k-th nearest distance on a circle of circumference 1, from
/// `E[D] = ∫ P(Binomial(N, 2l) < k) dl` by composite Simpson.
fn circle_oracle(k: u32, n: u64) -> f64 {
    let tail = |l: f64| {
        let p = 2.0 * l;
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..k as u64 {
            if j > 0 {
                binom *= (n - j + 1) as f64 / j as f64;
            }
            sum += binom * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        }
        sum
    };
    let m = 20_000;
    let h = 0.5 / m as f64;
    let mut acc = tail(0.0) + tail(0.5);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * tail(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn one_dimensional_order_statistics() {
    for n in 1..=6u64 {
        for k in 1..=n as u32 {
            let got = flat_mean(dim(1), &MomentSpec64::first(k, n).unwrap()).unwrap();
            let oracle = circle_oracle(k, n);
            assert!((got - oracle).abs() < 1e-12, "k={k} N={n}: {got} vs {oracle}");
            assert!((got - k as f64 / (2.0 * (n + 1) as f64)).abs() < 1e-14);
        }
    }
}

#[test]
fn separation_holds_in_several_dimensions() {
    for d in 1..=4u32 {
        let inv = 1.0 / d as f64;
        for n in [5u64, 31, 200] {
            let base = flat_mean(dim(d), &MomentSpec64::first(1, n).unwrap()).unwrap() / (ln_gamma(1.0 + inv)).exp();
            for k in 1..=5u32 {
                let v = flat_mean(dim(d), &MomentSpec64::first(k, n).unwrap()).unwrap();
                let scaled = v * (ln_gamma(k as f64) - ln_gamma(k as f64 + inv)).exp();
                assert!((scaled - base).abs() <= 1e-12 * base, "d={d} k={k} N={n}");
            }
        }
    }
}

#[test]
fn sphere_single_site_closed_form() {
    // ∫₀¹ arcsin√w dw = π/4
    let got = sphere_mean_exact(&MomentSpec64::first(1, 1).unwrap(), DEFAULT_MAX_TERMS).unwrap();
    assert!((got.value - PI.sqrt() / 4.0).abs() < 1e-10, "{}", got.value);
}

#[test]
fn sphere_subleading_slopes_from_exact_sums() {
    for (k, want, tol) in [(1u32, -0.125, 0.002), (2, 1.0 / 24.0, 0.002), (3, 5.0 / 24.0, 0.002)] {
        let mut se = ScalingEstimate::new(Vec::new());
        for n in [1000u64, 2000, 5000, 10_000, 20_000, 50_000, 100_000] {
            se.push(k, n, sphere_reduced(k, n), 0.0);
        }
        let c1 = fit_subleading(&se, k, FitModel::WithQuadratic).unwrap();
        assert!((c1.value - want).abs() < tol, "k={k}: {}", c1.value);
    }
}

#[test]
fn sign_of_sphere_correction_follows_rank() {
    for k in 1..=3u32 {
        let expected = (4.0 * k as f64 - 7.0).signum();
        for n in [100u64, 300, 1000, 10_000] {
            let d = sphere_reduced(k, n) - 1.0;
            assert_eq!(d.signum(), expected, "k={k} N={n}: {d}");
        }
    }
}

#[test]
fn exact_gamma_ratio_expansions() {
    let two = reduced_series(q(1, 2), 3).unwrap();
    assert_eq!(two.coeffs[0], BigRational::one());
    assert_eq!(two.one_over_n(), q(-3, 8));
    let three = reduced_series(q(1, 3), 2).unwrap();
    assert_eq!(three.one_over_n(), q(-2, 9));
    let zero = reduced_series(BigRational::zero(), 3).unwrap();
    assert_eq!(
        zero.coeffs,
        vec![
            BigRational::one(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero()
        ]
    );
    assert!(reduced_series(q(1, 2), 4).is_err());
}

#[test]
fn general_dimension_subleading_term() {
    // −(1/d + 1/d²)/2
    for d in 1..=8i64 {
        let s = reduced_series(q(1, d), 1).unwrap();
        assert_eq!(s.one_over_n(), -(q(1, d) + q(1, d * d)) / q(2, 1), "d={d}");
    }
}

#[test]
fn exact_sphere_reduced_series() {
    let arcsin: ExactPowerSeries = PowerSeries::new(q(1, 2), vec![q(1, 1), q(1, 6), q(3, 40), q(5, 112)]).unwrap();
    for k in 1..=5u32 {
        let s = reduced_series_for(&arcsin, k, 1).unwrap();
        assert_eq!(s.one_over_n(), q(4 * k as i64 - 7, 24));
        assert_eq!(
            s.one_over_n(),
            subleading_coeff::<BigRational>(k, TopologyInfo::from_genus(0))
        );
    }
}

#[test]
fn topological_coefficient_examples() {
    let sphere = TopologyInfo::from_chi(2).unwrap();
    let torus = TopologyInfo::from_chi(0).unwrap();
    assert_eq!(subleading_coeff::<BigRational>(1, sphere), q(-1, 8));
    assert_eq!(subleading_coeff::<BigRational>(1, torus), q(-3, 8));
    assert_eq!(subleading_coeff::<BigRational>(2, sphere), q(1, 24));
    assert_eq!(subleading_coeff::<f64>(3, sphere), 5.0 / 24.0);
    assert!(TopologyInfo::from_chi(1).is_err());
    assert!(TopologyInfo::from_chi(4).is_err());
}

#[test]
fn works_in_single_precision() {
    let ms = MomentSpec::<f32>::first(3, 50).unwrap();
    let a = flat_mean(dim(2), &ms).unwrap();
    let b = flat_mean(dim(2), &MomentSpec64::first(3, 50).unwrap()).unwrap();
    assert!(((a as f64) - b).abs() < 1e-5 * b);
}

proptest! {
    #[test]
    fn genus_and_chi_agree(g in 0u32..50) {
        let t = TopologyInfo::from_genus(g);
        prop_assert_eq!(t.chi(), 2 * (1 - g as i64));
        prop_assert_eq!(TopologyInfo::from_chi(t.chi()).unwrap(), t);
    }

    #[test]
    fn reduced_series_starts_at_one(num in 0i64..40, order in 0usize..=3) {
        let s = reduced_series(q(num, 41), order).unwrap();
        prop_assert_eq!(s.coeffs[0].clone(), BigRational::one());
        prop_assert_eq!(s.coeffs.len(), order + 1);
    }

    #[test]
    fn flat_mean_decreases_in_n_and_increases_in_k(k in 1u32..20, n in 20u64..5000) {
        let here = flat_mean(dim(2), &MomentSpec64::first(k, n).unwrap()).unwrap();
        let more_sites = flat_mean(dim(2), &MomentSpec64::first(k, n + 1).unwrap()).unwrap();
        let next_rank = flat_mean(dim(2), &MomentSpec64::first(k + 1, n).unwrap()).unwrap();
        prop_assert!(more_sites < here);
        prop_assert!(next_rank > here);
    }

    #[test]
    fn moment_spec_rejects_k_above_n(k in 2u32..100, short in 1u64..50) {
        let n = (k as u64).saturating_sub(short).max(1);
        prop_assume!(n < k as u64);
        prop_assert!(MomentSpec64::first(k, n).is_err());
    }
}
