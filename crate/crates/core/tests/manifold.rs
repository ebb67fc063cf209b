use std::f64::consts::PI;

use knn_scaling::config::{ManifoldDescriptor, ManifoldSpec, ManifoldVisitor};
use knn_scaling::manifold::{FlatTorus2D, Manifold, ProximityOrder, RandomStream, Sphere};
use knn_scaling::{Error, Real};
use proptest::prelude::*;

const ALL: [&str; 11] = [
    "flat-torus",
    "flat-torus-3d",
    "sphere-geodesic",
    "sphere-chord",
    "stereographic-sphere",
    "perturbed-sphere",
    "torus-of-revolution",
    "conformal-flat-torus",
    "cube",
    "tetrahedron",
    "flat-torus-mesh",
];

/// Metrics whose distance needs geodesic shooting (about a millisecond each).
const SHOOTING: [&str; 2] = ["perturbed-sphere", "torus-of-revolution"];

fn build(name: &str) -> ManifoldDescriptor<f64> {
    ManifoldSpec::from_name(name).unwrap().build().unwrap()
}

/// `d(a, b) ≤ l`, skipping the exact distance when the proximity already
/// decides it.
fn within<M: Manifold<f64>>(m: &M, a: &M::Point, b: &M::Point, l: f64) -> bool {
    let lower = m.proximity_to_distance(m.proximity(a, b));
    if lower > l {
        return false;
    }
    match m.proximity_order() {
        ProximityOrder::Monotone => lower <= l,
        ProximityOrder::LowerBound => m.try_distance(a, b).unwrap() <= l,
    }
}

fn kolmogorov_smirnov(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

/// Critical value of the one-sample KS statistic at α = 0.01.
fn ks_critical(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

#[test]
fn flat_torus_coordinates_are_uniform() {
    let mut rng = RandomStream::new(7, 0);
    let n = 1_000_000;
    let mut sum = 0.0;
    let mut us = Vec::with_capacity(100_000);
    for i in 0..n {
        let p: [f64; 2] = FlatTorus2D.sample(&mut rng).unwrap();
        assert!((0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1]));
        sum += p[0];
        if i < 100_000 {
            us.push(p[1]);
        }
    }
    let sigma = (1.0 / 12.0 / n as f64).sqrt();
    assert!((sum / n as f64 - 0.5).abs() < 3.0 * sigma);
    assert!(kolmogorov_smirnov(us) < ks_critical(100_000));
}

#[test]
fn sphere_height_is_uniform() {
    let r: f64 = Sphere::radius();
    let mut rng = RandomStream::new(11, 3);
    let n = 100_000;
    let zs: Vec<f64> = (0..n)
        .map(|_| {
            let p: [f64; 3] = Sphere::geodesic().sample(&mut rng).unwrap();
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - r).abs() < 1e-12);
            (p[2] + r) / (2.0 * r)
        })
        .collect();
    let d = kolmogorov_smirnov(zs);
    assert!(d < ks_critical(n), "KS statistic {d}");
}

#[test]
fn constant_factor_samples_the_rectangle_uniformly() {
    let spec: ManifoldSpec =
        serde_json::from_str(r#"{"kind":"conformal","params":{"factor":"constant","side_u":2.0,"side_v":0.5}}"#)
            .unwrap();
    let ManifoldDescriptor::ConformalPatchSet(s) = spec.build::<f64>().unwrap() else {
        panic!("expected conformal surface")
    };
    let mut rng = RandomStream::new(5, 0);
    let n = 50_000;
    let (mut us, mut vs) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let p = s.sample(&mut rng).unwrap();
        us.push(p.u / 2.0);
        vs.push(p.v / 0.5);
    }
    assert!(kolmogorov_smirnov(us) < ks_critical(n));
    assert!(kolmogorov_smirnov(vs) < ks_critical(n));
}

#[test]
fn distance_examples() {
    assert!((FlatTorus2D.distance(&[0.1, 0.1], &[0.9, 0.1]) - 0.2f64).abs() < 1e-15);
    let north = Sphere::point(0.0, 0.0);
    let south = Sphere::point(PI, 0.0);
    let arc: f64 = Sphere::geodesic().distance(&north, &south);
    assert!((arc - PI.sqrt() / 2.0).abs() < 1e-12);
    assert!((arc - 0.8862).abs() < 1e-4);
    let chord: f64 = Sphere::chord().distance(&north, &south);
    assert!((chord - 1.0 / PI.sqrt()).abs() < 1e-12);
    assert!((chord - 0.5642).abs() < 1e-4);
}

#[test]
fn disc_area_examples() {
    let x = Sphere::point(0.3, 1.0);
    let full: f64 = Sphere::geodesic().disc_area(&x, PI.sqrt() / 2.0).unwrap();
    assert!((full - 1.0).abs() < 1e-15);
    let r: f64 = Sphere::radius();
    assert!((Sphere::chord().disc_area(&x, 2.0 * r).unwrap() - 1.0).abs() < 1e-15);
    let a: f64 = FlatTorus2D.disc_area(&[0.2, 0.7], 0.3).unwrap();
    assert!((a - PI * 0.09).abs() < 1e-15 && (a - 0.2827).abs() < 1e-4);
}

struct NegativeRadius;
impl<T: Real> ManifoldVisitor<T> for NegativeRadius {
    type Output = bool;
    fn visit<M: Manifold<T>>(self, m: &M) -> bool {
        let x = m.sample(&mut RandomStream::new(1, 1)).unwrap();
        matches!(m.disc_area(&x, -T::lit(0.1)), Err(Error::Domain(_)))
    }
}

#[test]
fn negative_radius_is_a_domain_error() {
    for name in ALL {
        assert!(build(name).visit(NegativeRadius), "{name}");
    }
}

struct Extremes;
impl ManifoldVisitor<f64> for Extremes {
    type Output = ();
    fn visit<M: Manifold<f64>>(self, m: &M) {
        let mut rng = RandomStream::new(17, 0);
        for _ in 0..5 {
            let x = m.sample(&mut rng).unwrap();
            assert_eq!(m.disc_area(&x, 0.0).unwrap(), 0.0);
            match m.disc_area(&x, m.diameter()) {
                Ok(a) => assert!((a - 1.0).abs() < 1e-9, "{:?}: A(diam) = {a}", m.kind()),
                // radii past the injectivity bound are refused
                Err(
                    Error::Unsupported(_) | Error::Domain(_) | Error::ConjugatePoint { .. } | Error::LeftDomain { .. },
                ) => {}
                Err(e) => panic!("{:?}: {e}", m.kind()),
            }
        }
    }
}

#[test]
fn disc_area_vanishes_at_zero_and_fills_at_the_diameter() {
    for name in ALL {
        build(name).visit(Extremes);
    }
}

struct Monotone;
impl ManifoldVisitor<f64> for Monotone {
    type Output = ();
    fn visit<M: Manifold<f64>>(self, m: &M) {
        let mut rng = RandomStream::new(23, 0);
        let x = m.sample(&mut rng).unwrap();
        let mut prev = 0.0;
        for i in 1..=40 {
            let l = m.diameter() * i as f64 / 40.0;
            match m.disc_area(&x, l) {
                Ok(a) => {
                    assert!(a >= prev - 1e-12, "{:?}: A({l}) = {a} < {prev}", m.kind());
                    prev = a;
                }
                Err(_) => break,
            }
        }
    }
}

#[test]
fn disc_area_is_monotone() {
    for name in ALL {
        build(name).visit(Monotone);
    }
}

struct Triangle {
    triples: usize,
    tol: f64,
    /// Keep `b` and `c` within this distance bound of `a`.
    local: Option<f64>,
}

impl ManifoldVisitor<f64> for Triangle {
    type Output = ();
    fn visit<M: Manifold<f64>>(self, m: &M) {
        let mut rng = RandomStream::new(31, 0);
        let mut done = 0;
        while done < self.triples {
            let a = m.sample(&mut rng).unwrap();
            let b = m.sample(&mut rng).unwrap();
            let c = m.sample(&mut rng).unwrap();
            if let Some(r) = self.local {
                let near = |p: &M::Point| m.proximity_to_distance(m.proximity(&a, p)) < r;
                if !(near(&b) && near(&c)) {
                    continue;
                }
            }
            let ab = m.try_distance(&a, &b).unwrap();
            let bc = m.try_distance(&b, &c).unwrap();
            let ac = m.try_distance(&a, &c).unwrap();
            let ba = m.try_distance(&b, &a).unwrap();
            assert!(
                ab >= 0.0 && (ab - ba).abs() <= self.tol,
                "{:?}: asymmetric {ab} {ba}",
                m.kind()
            );
            assert!(ac <= ab + bc + self.tol, "{:?}: {ac} > {ab} + {bc}", m.kind());
            assert!(ab <= m.diameter() + self.tol, "{:?}: {ab} beyond diameter", m.kind());
            done += 1;
        }
    }
}

#[test]
fn triangle_inequality_on_analytic_metrics() {
    for name in ALL.iter().filter(|n| !SHOOTING.contains(n)) {
        build(name).visit(Triangle {
            triples: 10_000,
            tol: 1e-9,
            local: None,
        });
    }
}

#[test]
fn triangle_inequality_on_shooting_metrics() {
    for name in SHOOTING {
        build(name).visit(Triangle {
            triples: 60,
            tol: 1e-6,
            local: Some(0.25),
        });
    }
}

struct EmpiricalArea {
    samples: usize,
    /// Radii are drawn uniformly in `[lo, hi]` as fractions of the diameter.
    lo: f64,
    hi: f64,
}

impl ManifoldVisitor<f64> for EmpiricalArea {
    type Output = usize;
    fn visit<M: Manifold<f64>>(self, m: &M) -> usize {
        let mut rng = RandomStream::new(41, 0);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 10 {
            attempts += 1;
            assert!(attempts < 200, "{:?}: too few supported (x, l) pairs", m.kind());
            let x = m.sample(&mut rng).unwrap();
            let l = m.diameter() * (self.lo + (self.hi - self.lo) * rng.uniform::<f64>());
            let a = match m.disc_area(&x, l) {
                Ok(a) => a,
                Err(Error::Unsupported(_) | Error::Domain(_)) => continue,
                Err(e) => panic!("{:?}: disc_area({l}) failed: {e}", m.kind()),
            };
            let mut sites = RandomStream::new(43, checked as u64 + 1);
            let mut hits = 0usize;
            for _ in 0..self.samples {
                let y = m.sample(&mut sites).unwrap();
                if within(m, &x, &y, l) {
                    hits += 1;
                }
            }
            let n = self.samples as f64;
            let p = hits as f64 / n;
            let sd = (a * (1.0 - a) / n).sqrt().max(1.0 / n);
            assert!(
                (p - a).abs() < 4.0 * sd,
                "{:?}: l = {l}, A = {a}, empirical {p} (sd {sd})",
                m.kind()
            );
            checked += 1;
        }
        checked
    }
}

#[test]
fn disc_area_matches_empirical_fraction() {
    for name in ALL.iter().filter(|n| !SHOOTING.contains(n)) {
        let m = build(name);
        let (lo, hi) = match m {
            // numeric discs need radii inside the injectivity radius
            ManifoldDescriptor::ConformalPatchSet(_) => (0.05, 0.35),
            _ => (0.0, 1.0),
        };
        let n = m.visit(EmpiricalArea {
            samples: 1_000_000,
            lo,
            hi,
        });
        assert_eq!(n, 10, "{name}");
    }
}

#[test]
fn disc_area_matches_empirical_fraction_on_shooting_metrics() {
    for name in SHOOTING {
        build(name).visit(EmpiricalArea {
            samples: 20_000,
            lo: 0.05,
            hi: 0.3,
        });
    }
}

#[test]
fn discs_past_the_injectivity_bound_are_refused() {
    let ManifoldDescriptor::ConformalPatchSet(torus) = build("torus-of-revolution") else {
        unreachable!()
    };
    let inj = torus.injectivity_bound().unwrap();
    let x = torus.sample(&mut RandomStream::new(3, 0)).unwrap();
    assert!(torus.disc_area(&x, 0.9 * inj).is_ok());
    assert!(matches!(torus.disc_area(&x, 1.1 * inj), Err(Error::Domain(_))));
    let ManifoldDescriptor::ConformalPatchSet(round) = build("stereographic-sphere") else {
        unreachable!()
    };
    // π/√K with K = 4π, less the margin
    let bound = round.injectivity_bound().unwrap();
    assert!(bound < PI.sqrt() / 2.0 && bound > 0.97 * PI.sqrt() / 2.0, "{bound}");
}

#[test]
fn chord_sphere_area_is_globally_flat() {
    let m = Sphere::chord();
    let x = Sphere::point(1.0, 2.0);
    let r: f64 = Sphere::radius();
    for i in 0..=100 {
        let l = 2.0 * r * i as f64 / 100.0;
        assert!((m.disc_area(&x, l).unwrap() - PI * l * l).abs() < 1e-15);
    }
    let flat = Manifold::<f64>::flatness(&m).unwrap();
    assert_eq!(flat.w0, 1.0);
}

proptest! {
    #[test]
    fn geodesic_sphere_area_is_sin_squared(theta in 0.0f64..PI, phi in 0.0f64..6.28, t in 0.0f64..1.0) {
        let l = t * PI.sqrt() / 2.0;
        let a = Sphere::geodesic().disc_area(&Sphere::point(theta, phi), l).unwrap();
        prop_assert!((a - (PI.sqrt() * l).sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn flat_torus_distance_is_a_metric(a in prop::array::uniform2(0.0f64..1.0), b in prop::array::uniform2(0.0f64..1.0)) {
        let d = FlatTorus2D.distance(&a, &b);
        prop_assert_eq!(d, FlatTorus2D.distance(&b, &a));
        prop_assert!(d <= 0.5f64.sqrt() + 1e-15);
        prop_assert_eq!(FlatTorus2D.distance(&a, &a), 0.0);
    }

    #[test]
    fn sphere_metrics_are_ordered(t1 in 0.0f64..PI, p1 in 0.0f64..6.28, t2 in 0.0f64..PI, p2 in 0.0f64..6.28) {
        let (a, b) = (Sphere::point(t1, p1), Sphere::point(t2, p2));
        let arc: f64 = Sphere::geodesic().distance(&a, &b);
        let chord: f64 = Sphere::chord().distance(&a, &b);
        prop_assert!(chord <= arc + 1e-15);
        prop_assert!(arc <= PI.sqrt() / 2.0 + 1e-12);
    }
}
