use std::f64::consts::PI;

use knn_scaling::manifold::{DimensionSpec, FlatnessThreshold, RandomStream};
use knn_scaling::quadrature::{moment_from_area_inverse, remainder_bound, AreaInverseFn, ClosedForm};
use knn_scaling::series::{flat_mean, sphere_mean_exact, MomentSpec, DEFAULT_MAX_TERMS};
use knn_scaling::special::ln_gamma;
use knn_scaling::{AreaInverse64, MomentSpec64};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn flat() -> AreaInverse64 {
    AreaInverseFn::Closed(ClosedForm::FlatBall(DimensionSpec::TWO))
}

fn sphere() -> AreaInverse64 {
    AreaInverseFn::Closed(ClosedForm::SphereArcsin)
}

fn torus() -> AreaInverse64 {
    AreaInverseFn::Closed(ClosedForm::SquareTorus)
}

fn torus_threshold() -> FlatnessThreshold<f64> {
    FlatnessThreshold::new(0.5, PI / 4.0).unwrap()
}

#[test]
fn single_site_flat() {
    let r = moment_from_area_inverse(&flat(), &MomentSpec64::first(1, 1).unwrap(), TOL).unwrap();
    assert!((r.value - 2.0 / (3.0 * PI.sqrt())).abs() < 1e-13);
}

#[test]
fn sphere_at_fifty_sites() {
    let ms = MomentSpec64::first(1, 50).unwrap();
    let r = moment_from_area_inverse(&sphere(), &ms, TOL).unwrap();
    let s = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap();
    assert!((r.value - s.value).abs() < 1e-9);
}

#[test]
fn second_moment_closed_form() {
    for n in [1u64, 2, 10, 1000, 100_000, 1_000_000] {
        let ms = MomentSpec64::new(1, n, 2.0).unwrap();
        let r = moment_from_area_inverse(&flat(), &ms, TOL).unwrap();
        let want = 1.0 / (PI * (n + 1) as f64);
        assert!((r.value - want).abs() < 1e-11 * want, "N={n}");
    }
}

#[test]
fn fractional_moments_of_flat_inverse() {
    // ⟨D^α⟩ = π^{−α/2} Γ(k+α/2)/Γ(k) Γ(N+1)/Γ(N+1+α/2)
    for (k, n, alpha) in [(1u32, 5u64, 0.5), (3, 40, 1.5), (2, 10_000, 3.0)] {
        let ms = MomentSpec64::new(k, n, alpha).unwrap();
        let r = moment_from_area_inverse(&flat(), &ms, TOL).unwrap();
        let (kf, nf, h) = (k as f64, n as f64, alpha / 2.0);
        let want = (-h * PI.ln() + ln_gamma(kf + h) - ln_gamma(kf) + ln_gamma(nf + 1.0) - ln_gamma(nf + 1.0 + h)).exp();
        // lnΓ near 10⁵ leaves the oracle itself good to only ~1e-11
        assert!((r.value - want).abs() < 2e-10 * want, "k={k} N={n} α={alpha}");
    }
}

#[test]
fn remainder_examples() {
    let ms = MomentSpec64::first(1, 100).unwrap();
    let b = remainder_bound(&flat(), &torus_threshold(), &ms);
    assert!(b < 1e-10 && b > 0.0, "{b}");
    let chord = FlatnessThreshold::new(1.0 / PI.sqrt(), 1.0).unwrap();
    assert_eq!(remainder_bound(&flat(), &chord, &ms), 0.0);
    let unsuppressed = remainder_bound(&torus(), &torus_threshold(), &MomentSpec64::first(3, 3).unwrap());
    assert!(unsuppressed > 0.1, "{unsuppressed}");
}

#[test]
fn torus_truncation_is_certified() {
    for k in 1..=4u32 {
        for n in (4 * k as u64..=1000).step_by(7) {
            let ms = MomentSpec64::first(k, n).unwrap();
            let exact = moment_from_area_inverse(&torus(), &ms, TOL).unwrap();
            let series = flat_mean(DimensionSpec::TWO, &ms).unwrap();
            let bound = remainder_bound(&torus(), &torus_threshold(), &ms);
            let diff = (exact.value - series).abs();
            assert!(
                diff <= bound + exact.error + 4.0 * f64::EPSILON * series,
                "k={k} N={n}: diff {diff:e}, bound {bound:e}, err {:e}",
                exact.error
            );
        }
    }
}

#[test]
fn small_torus_differs_from_flat_formula() {
    let ms = MomentSpec64::first(1, 1).unwrap();
    let torus = moment_from_area_inverse(&torus(), &ms, TOL).unwrap().value;
    let oracle = (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) / 6.0;
    assert!((torus - oracle).abs() < 1e-11, "{torus} vs {oracle}");
    assert!((torus - flat_mean(DimensionSpec::TWO, &ms).unwrap()).abs() > 1e-3);
}

#[test]
fn error_estimates_are_conservative() {
    let mut rng = RandomStream::new(2024, 0);
    let mut held = 0;
    let cases = 200;
    for i in 0..cases {
        let n = 1 + (10f64.powf(rng.uniform::<f64>() * 5.0)) as u64;
        let k = 1 + rng.index(n.min(8) as usize) as u32;
        let ms = MomentSpec64::first(k, n).unwrap();
        let (a, oracle) = if i % 2 == 0 {
            (flat(), flat_mean(DimensionSpec::TWO, &ms).unwrap())
        } else {
            (sphere(), sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap().value)
        };
        let r = moment_from_area_inverse(&a, &ms, 1e-10).unwrap();
        if (r.value - oracle).abs() < r.error {
            held += 1;
        }
    }
    assert!(held * 100 >= 95 * cases, "{held}/{cases}");
}

#[test]
fn tabulated_inverse_tracks_closed_form() {
    let m = 4000;
    // nodes crowd both ends, where A⁻¹ has square-root behaviour
    let mut w: Vec<f64> = (0..=m)
        .map(|i| (0.5 * PI * i as f64 / m as f64).sin().powi(2))
        .collect();
    w[m] = 1.0;
    let l: Vec<f64> = w.iter().map(|&w| (w.sqrt()).asin() / PI.sqrt()).collect();
    let tab = AreaInverseFn::tabulated(w, l).unwrap();
    for n in [1u64, 20, 400] {
        let ms = MomentSpec64::first(1, n).unwrap();
        let a = moment_from_area_inverse(&tab, &ms, 1e-9).unwrap().value;
        let b = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap().value;
        assert!((a - b).abs() < 1e-6 * b, "N={n}: {a} vs {b}");
    }
}

#[test]
fn single_precision_route() {
    let ms = MomentSpec::<f32>::first(2, 30).unwrap();
    let a = AreaInverseFn::<f32>::Closed(ClosedForm::SphereArcsin);
    let r = moment_from_area_inverse(&a, &ms, 1e-5).unwrap();
    let b = sphere_mean_exact(&MomentSpec64::first(2, 30).unwrap(), DEFAULT_MAX_TERMS)
        .unwrap()
        .value;
    assert!(((r.value as f64) - b).abs() < 1e-5 * b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_matches_series_on_sphere(k in 1u32..6, n in 6u64..20_000) {
        let ms = MomentSpec64::first(k, n).unwrap();
        let r = moment_from_area_inverse(&sphere(), &ms, TOL).unwrap();
        let s = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap().value;
        prop_assert!((r.value - s).abs() < 1e-10 * s);
    }

    #[test]
    fn closed_inverses_are_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for f in [flat(), sphere(), torus()] {
            prop_assert!(f.eval(lo) <= f.eval(hi));
        }
        prop_assert_eq!(torus().eval(0.0), 0.0);
    }
}
