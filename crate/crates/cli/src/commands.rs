//! One function per subcommand, each turning a [`RunConfig`] into a report.

use std::f64::consts::PI;

use knn_scaling::config::{ManifoldDescriptor, ManifoldVisitor};
use knn_scaling::curvature::{
    area_series_from_curvature, gauss_bonnet_chi, invert_area_series, invert_bracket, surface_average_series,
    total_area, CurvatureJet,
};
use knn_scaling::manifold::Manifold;
use knn_scaling::mc::{
    estimate_moments, fit_subleading, summarize, FitModel, MomentEstimate, SampleConfig, ScalingEstimate,
};
use knn_scaling::quadrature::{moment_from_area_inverse, remainder_bound, DEFAULT_REL_TOL};
use knn_scaling::regge::{pi_fraction, PolyhedronKind};
use knn_scaling::series::{reduced_normalizer, reduced_series, subleading_coeff, MomentSpec, TopologyInfo};
use knn_scaling::Descriptor64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::config::{Command, Model, RunConfig, SweepEngine};
use crate::output::{FitSummary, Report, Row};
use crate::{Failure, UsageError};

/// Largest denominator tried when recognising face angles as fractions of π.
const MAX_PI_DENOMINATOR: i64 = 720;

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    let desc: Descriptor64 = cfg.manifold.build().map_err(|e| UsageError(e.to_string()))?;
    match cfg.command {
        Command::Analytic => analytic(cfg, &desc),
        Command::Mc => mc(cfg, &desc).map(|rows| Report { rows, fits: Vec::new() }),
        Command::Sweep => sweep(cfg, &desc),
        Command::Curvature => curvature(cfg, &desc),
        Command::Regge => regge(cfg, &desc),
        Command::Invert => invert(cfg),
    }
}

/// Seed of the Monte Carlo run at one grid point. Mixing in `N` keeps the
/// runs at different `N` independent.
pub fn seed_for(seed: u64, n: u64) -> u64 {
    seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn label(cfg: &RunConfig) -> String {
    cfg.manifold.label()
}

struct Leading;

impl ManifoldVisitor<f64> for Leading {
    type Output = (f64, f64);
    fn visit<M: Manifold<f64>>(self, m: &M) -> Self::Output {
        m.leading_inverse()
    }
}

fn grid(cfg: &RunConfig) -> impl Iterator<Item = (u32, u64)> + '_ {
    cfg.n.iter().flat_map(|&n| cfg.k.iter().map(move |&k| (k, n)))
}

/// Exact value of the moment, when the quadrature route computes one.
fn reference(desc: &Descriptor64, ms: &MomentSpec<f64>) -> Result<Option<(f64, f64)>, Failure> {
    let Some(a) = desc.area_inverse() else {
        return Ok(None);
    };
    let q = moment_from_area_inverse(&a, ms, DEFAULT_REL_TOL)?;
    // on the d-torus the flat ball inverse is exact only below the threshold
    if matches!(desc, ManifoldDescriptor::FlatTorusD(_)) {
        let bound = desc.flatness().map_or(f64::INFINITY, |f| remainder_bound(&a, &f, ms));
        if bound > q.error {
            return Ok(None);
        }
    }
    Ok(Some((q.value, q.error)))
}

fn analytic(cfg: &RunConfig, desc: &Descriptor64) -> Result<Report, Failure> {
    let name = label(cfg);
    let area_inverse = desc.area_inverse();
    if area_inverse.is_none() && desc.series_mean(&MomentSpec::first(1, 1)?).is_none() {
        return Err(UsageError(format!("no analytic route for manifold {name}")).into());
    }
    let (gamma, c0) = desc.visit(Leading);
    let mut rows = Vec::new();
    for (k, n) in grid(cfg) {
        let ms = MomentSpec::new(k, n, cfg.alpha)?;
        let norm = reduced_normalizer(gamma, c0, k, n, cfg.alpha);
        let quantity = if cfg.alpha == 1.0 { "mean" } else { "moment" };
        let row = |engine, value: f64, err: f64| Row {
            k: Some(k),
            n: Some(n),
            alpha: Some(cfg.alpha),
            uncertainty: Some(err),
            reduced: Some(value * norm),
            reduced_uncertainty: Some(err * norm),
            ..Row::new(engine, &name, quantity, value)
        };
        let series = match desc.series_mean(&ms) {
            Some(s) => {
                let s = s?;
                Some(row("series", s.value, s.residual * s.value))
            }
            None => None,
        };
        let quad = match &area_inverse {
            Some(a) => {
                let q = moment_from_area_inverse(a, &ms, DEFAULT_REL_TOL)?;
                Some(row("quadrature", q.value, q.error))
            }
            None => None,
        };
        let agreement = match (&series, &quad) {
            (Some(s), Some(q)) => Some((s.value - q.value).abs()),
            _ => None,
        };
        for mut r in [series, quad].into_iter().flatten() {
            r.agreement = agreement;
            rows.push(r);
        }
        if let (Some(a), Some(flat)) = (&area_inverse, desc.flatness()) {
            let mut r = Row::new("series", &name, "remainder_bound", remainder_bound(a, &flat, &ms));
            (r.k, r.n, r.alpha) = (Some(k), Some(n), Some(cfg.alpha));
            rows.push(r);
        }
    }
    Ok(Report { rows, fits: Vec::new() })
}

struct McRun {
    cfg: SampleConfig<f64>,
}

impl ManifoldVisitor<f64> for McRun {
    type Output = knn_scaling::Result<Vec<MomentEstimate<f64>>>;
    fn visit<M: Manifold<f64>>(self, m: &M) -> Self::Output {
        let acc = estimate_moments(m, &self.cfg)?;
        Ok(summarize(m, &self.cfg, &acc))
    }
}

fn mc(cfg: &RunConfig, desc: &Descriptor64) -> Result<Vec<Row>, Failure> {
    let name = label(cfg);
    let k_max = *cfg.k.iter().max().expect("validated");
    let quantity = if cfg.alpha == 1.0 { "mean" } else { "moment" };
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let sc = SampleConfig::new(n, k_max, cfg.alpha, cfg.trials, seed_for(cfg.seed, n), cfg.streams)
            .map_err(|e| UsageError(e.to_string()))?;
        let est = desc.visit(McRun { cfg: sc })?;
        for &k in &cfg.k {
            let e = &est[k as usize - 1];
            let target = reference(desc, &MomentSpec::new(k, n, cfg.alpha)?)?.map(|(v, _)| v);
            rows.push(Row {
                k: Some(k),
                n: Some(n),
                alpha: Some(cfg.alpha),
                uncertainty: Some(e.stderr),
                seed: Some(cfg.seed),
                reduced: Some(e.reduced),
                reduced_uncertainty: Some(e.reduced_stderr),
                agreement: target.map(|t| (e.mean - t).abs()),
                target,
                ..Row::new("mc", &name, quantity, e.mean)
            });
        }
    }
    Ok(rows)
}

/// Predicted `1/N` coefficient of the reduced first moment.
pub fn c1_target(desc: &Descriptor64, k: u32) -> Option<f64> {
    let flat2 = -3.0 / 8.0;
    match desc {
        ManifoldDescriptor::FlatTorus2D(_) | ManifoldDescriptor::SphereChord(_) => Some(flat2),
        ManifoldDescriptor::FlatTorusD(t) => {
            let d = Manifold::<f64>::dimension(t).d() as f64;
            reduced_series(1.0 / d, 1).ok().map(|s| s.one_over_n())
        }
        ManifoldDescriptor::SphereGeodesic(_) => Some(subleading_coeff(k, TopologyInfo::from_genus(0))),
        ManifoldDescriptor::ConformalPatchSet(s) => Some(subleading_coeff(k, s.topology)),
        ManifoldDescriptor::Polyhedron(p) => (p.kind == PolyhedronKind::FlatTorusMesh).then_some(flat2),
    }
}

fn sweep(cfg: &RunConfig, desc: &Descriptor64) -> Result<Report, Failure> {
    let name = label(cfg);
    let (engine, mut rows) = match cfg.engine {
        SweepEngine::Mc => ("mc", mc(cfg, desc)?),
        SweepEngine::Quadrature => {
            let Some(a) = desc.area_inverse() else {
                return Err(UsageError(format!("no inverse disc-area function for manifold {name}")).into());
            };
            let (gamma, c0) = desc.visit(Leading);
            let mut rows = Vec::new();
            for (k, n) in grid(cfg) {
                let q = moment_from_area_inverse(&a, &MomentSpec::new(k, n, cfg.alpha)?, DEFAULT_REL_TOL)?;
                let norm = reduced_normalizer(gamma, c0, k, n, cfg.alpha);
                rows.push(Row {
                    k: Some(k),
                    n: Some(n),
                    alpha: Some(cfg.alpha),
                    uncertainty: Some(q.error),
                    reduced: Some(q.value * norm),
                    reduced_uncertainty: Some(q.error * norm),
                    ..Row::new("quadrature", &name, "mean", q.value)
                });
            }
            ("quadrature", rows)
        }
    };
    let mut fits = Vec::new();
    if cfg.fit {
        let mut se = ScalingEstimate::new(Vec::new());
        for r in &rows {
            se.push(
                r.k.unwrap(),
                r.n.unwrap(),
                r.reduced.unwrap(),
                r.reduced_uncertainty.unwrap(),
            );
        }
        let model = match cfg.model {
            Model::Linear => FitModel::Linear,
            Model::Quadratic => FitModel::WithQuadratic,
        };
        let mut ks = cfg.k.clone();
        ks.sort_unstable();
        ks.dedup();
        for k in ks {
            let c1 = fit_subleading(&se, k, model)?;
            let target = if cfg.alpha == 1.0 { c1_target(desc, k) } else { None };
            rows.push(Row {
                k: Some(k),
                alpha: Some(cfg.alpha),
                uncertainty: Some(c1.stderr),
                seed: (engine == "mc").then_some(cfg.seed),
                agreement: target.map(|t| (c1.value - t).abs()),
                target,
                ..Row::new(engine, &name, "fitted_c1", c1.value)
            });
            fits.push(FitSummary {
                k,
                value: c1.value,
                stderr: c1.stderr,
                target,
            });
        }
    }
    Ok(Report { rows, fits })
}

fn curvature(cfg: &RunConfig, desc: &Descriptor64) -> Result<Report, Failure> {
    let name = label(cfg);
    let ManifoldDescriptor::ConformalPatchSet(s) = desc else {
        return Err(UsageError(format!("curvature needs a conformal surface, got {name}")).into());
    };
    let tol = s.options.quad_rel_tol;
    let chi = s.topology.chi() as f64;
    let gb = gauss_bonnet_chi(&s.patches, tol)?;
    let area = total_area(&s.patches, tol)?;
    let series = surface_average_series(&s.patches, cfg.order, &s.options)?;
    let mut rows = vec![
        Row {
            uncertainty: Some(gb.error),
            agreement: Some((gb.chi - chi).abs()),
            target: Some(chi),
            exact: Some(s.topology.chi().to_string()),
            ..Row::new("quadrature", &name, "chi", gb.chi)
        },
        Row {
            agreement: Some((area - 1.0).abs()),
            target: Some(1.0),
            ..Row::new("quadrature", &name, "total_area", area)
        },
    ];
    for (j, c) in series.normalized().into_iter().enumerate().skip(1) {
        let target = (j == 1).then_some(chi / 12.0);
        rows.push(Row {
            agreement: target.map(|t| (c - t).abs()),
            target,
            ..Row::new("quadrature", &name, &format!("avg_c{j}"), c)
        });
    }
    Ok(Report { rows, fits: Vec::new() })
}

fn regge(cfg: &RunConfig, desc: &Descriptor64) -> Result<Report, Failure> {
    let name = label(cfg);
    let ManifoldDescriptor::Polyhedron(p) = desc else {
        return Err(UsageError(format!("regge needs a polyhedral surface, got {name}")).into());
    };
    let (data, chi) = p.deficit_and_euler()?;
    let euler = p.euler_characteristic();
    let count = |q: &str, v: i64| Row {
        exact: Some(v.to_string()),
        ..Row::new("exact", &name, q, v as f64)
    };
    let sum: f64 = data.iter().map(|d| d.deficit).sum();
    let mut rows = vec![
        count("vertices", p.vertex_count() as i64),
        count("edges", p.edge_count() as i64),
        count("faces", p.face_count() as i64),
        count("euler_characteristic", euler),
        Row {
            agreement: Some((chi - euler as f64).abs()),
            target: Some(euler as f64),
            ..Row::new("exact", &name, "chi_from_deficits", chi)
        },
        Row {
            target: Some(2.0 * euler as f64),
            exact: p.exact_deficit_sum_over_pi(MAX_PI_DENOMINATOR).map(|r| r.to_string()),
            ..Row::new("exact", &name, "deficit_sum_over_pi", sum / PI)
        },
    ];
    for (i, d) in data.iter().enumerate() {
        rows.push(Row {
            k: Some(i as u32),
            exact: pi_fraction(d.deficit, MAX_PI_DENOMINATOR).map(pi_multiple),
            ..Row::new("exact", &name, "vertex_deficit", d.deficit)
        });
    }
    Ok(Report { rows, fits: Vec::new() })
}

/// `p/q` as a multiple of π: `π/2`, `-3π/4`, `2π`, `0`.
fn pi_multiple(r: num_rational::Rational64) -> String {
    let (p, q) = (*r.numer(), *r.denom());
    let num = match p {
        0 => return "0".into(),
        1 => "π".to_string(),
        -1 => "-π".to_string(),
        _ => format!("{p}π"),
    };
    if q == 1 {
        num
    } else {
        format!("{num}/{q}")
    }
}

fn invert(cfg: &RunConfig) -> Result<Report, Failure> {
    let mut rows = Vec::new();
    if let Some(text) = &cfg.bracket {
        let bracket = text
            .iter()
            .map(|t| {
                t.trim()
                    .parse::<BigRational>()
                    .map_err(|e| UsageError(format!("bad rational {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let e = invert_bracket(&bracket, cfg.order).map_err(|e| UsageError(e.to_string()))?;
        for (j, c) in e.iter().enumerate() {
            rows.push(Row {
                exact: Some(c.to_string()),
                ..Row::new("series", "bracket", &format!("e{j}"), c.to_f64().unwrap_or(f64::NAN))
            });
        }
    } else {
        if cfg.order > 3 {
            return Err(UsageError(format!(
                "constant-curvature inversion has order at most 3, got {}",
                cfg.order
            ))
            .into());
        }
        // unit-area round sphere
        let k = cfg.curvature.unwrap_or(4.0 * PI);
        let poly = area_series_from_curvature(&CurvatureJet::constant(k), 8)?;
        let s = invert_area_series(&poly, cfg.order)?;
        let name = format!("constant-curvature({k})");
        rows.push(Row::new("series", &name, "c0", *s.leading()));
        for (j, c) in s.normalized().into_iter().enumerate().skip(1) {
            rows.push(Row::new("series", &name, &format!("c{j}/c0"), c));
        }
    }
    Ok(Report { rows, fits: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use knn_scaling::config::ManifoldSpec;

    fn config(command: Command, manifold: &str) -> RunConfig {
        RunConfig {
            command,
            manifold: ManifoldSpec::from_name(manifold).unwrap(),
            k: vec![1],
            n: vec![100],
            trials: 2000,
            seed: 1,
            streams: 2,
            alpha: 1.0,
            out: None,
            format: Default::default(),
            fit: false,
            model: Model::Linear,
            engine: SweepEngine::Mc,
            order: 3,
            bracket: None,
            curvature: None,
        }
    }

    #[test]
    fn seeds_differ_per_n() {
        assert_ne!(seed_for(42, 25), seed_for(42, 50));
        assert_eq!(seed_for(42, 0), 42);
    }

    #[test]
    fn analytic_sphere_engines_agree() {
        let rep = run(&config(Command::Analytic, "sphere-geodesic")).unwrap();
        let s = rep.rows.iter().find(|r| r.engine == "series").unwrap();
        let q = rep.rows.iter().find(|r| r.engine == "quadrature").unwrap();
        assert!((s.value - q.value).abs() < 1e-9);
        assert_eq!(s.agreement, q.agreement);
    }

    #[test]
    fn targets_by_manifold() {
        let t = |name: &str, k| c1_target(&ManifoldSpec::from_name(name).unwrap().build().unwrap(), k);
        assert_eq!(t("flat-torus", 3), Some(-0.375));
        assert_eq!(t("sphere-geodesic", 1), Some(-0.125));
        assert!((t("flat-torus-3d", 1).unwrap() + 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(t("cube", 1), None);
        assert_eq!(t("flat-torus-mesh", 1), Some(-0.375));
    }

    #[test]
    fn wrong_manifold_is_usage_error() {
        assert!(matches!(
            run(&config(Command::Regge, "sphere-chord")),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            run(&config(Command::Curvature, "cube")),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(
            run(&config(Command::Analytic, "cube")),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn regge_cube_exact_sum() {
        let rep = run(&config(Command::Regge, "cube")).unwrap();
        let r = rep.rows.iter().find(|r| r.quantity == "deficit_sum_over_pi").unwrap();
        assert_eq!(r.exact.as_deref(), Some("4"));
        let v: Vec<_> = rep.rows.iter().filter(|r| r.quantity == "vertex_deficit").collect();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0].exact.as_deref(), Some("π/2"));
    }

    #[test]
    fn pi_multiples_read_naturally() {
        use num_rational::Rational64;
        assert_eq!(pi_multiple(Rational64::new(1, 2)), "π/2");
        assert_eq!(pi_multiple(Rational64::new(-3, 4)), "-3π/4");
        assert_eq!(pi_multiple(Rational64::new(2, 1)), "2π");
        assert_eq!(pi_multiple(Rational64::new(0, 1)), "0");
    }

    #[test]
    fn invert_bracket_exactly() {
        let mut c = config(Command::Invert, "flat-torus");
        c.bracket = Some(vec!["1".into(), "-1/3".into(), "2/45".into(), "-1/315".into()]);
        let rep = run(&c).unwrap();
        let exact: Vec<_> = rep.rows.iter().map(|r| r.exact.clone().unwrap()).collect();
        assert_eq!(exact, ["1", "1/6", "3/40", "5/112"]);
    }
}
