//! Manifold specifications as read from JSON, and the runtime descriptor
//! they build.
//!
//! A spec is `{"kind": "...", "params": {...}}`. A bare string such as
//! `"sphere-geodesic"` is accepted wherever a spec is expected and expands
//! to the same object with default parameters.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};

use crate::curvature::{ConformalPatch, ConformalSurface, SolverOptions};
use crate::error::{Error, Result};
use crate::manifold::{DimensionSpec, FlatTorus2D, FlatTorusD, FlatnessThreshold, Manifold, ManifoldKind, Sphere};
use crate::quadrature::{AreaInverseFn, ClosedForm};
use crate::regge::{parse_off, PolyhedralSurface};
use crate::scalar::Real;
use crate::series::{flat_mean, sphere_mean_exact, MomentSpec, SeriesMean, DEFAULT_MAX_TERMS};

/// Named conformal factors available to `conformal` specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorName {
    /// Constant factor on a periodic rectangle (a flat torus).
    Constant,
    StereographicSphere,
    /// Stereographic sphere times `exp(2εz/R)`.
    Perturbed,
    TorusOfRevolution,
}

/// Named polyhedra available to `polyhedron` specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyhedronName {
    Cube,
    Tetrahedron,
    FlatTorusMesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecKind {
    FlatTorus,
    FlatTorusD,
    SphereGeodesic,
    SphereChord,
    Conformal,
    Polyhedron,
}

/// Parameters of a spec. Only the keys relevant to the kind may be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FactorName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_v: Option<f64>,
    /// Per-patch sampler bounds; checked against `f` on a grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<PolyhedronName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// OFF mesh file, for deficit and Euler analysis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off: Option<PathBuf>,
}

impl SpecParams {
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut note = |on: bool, k: &'static str| {
            if on {
                keys.push(k)
            }
        };
        note(self.d.is_some(), "d");
        note(self.factor.is_some(), "factor");
        note(self.epsilon.is_some(), "epsilon");
        note(self.major.is_some(), "major");
        note(self.minor.is_some(), "minor");
        note(self.side_u.is_some(), "side_u");
        note(self.side_v.is_some(), "side_v");
        note(self.sup_f.is_some(), "sup_f");
        note(self.quad_rel_tol.is_some(), "quad_rel_tol");
        note(self.ode_rel_tol.is_some(), "ode_rel_tol");
        note(self.name.is_some(), "name");
        note(self.m.is_some(), "m");
        note(self.off.is_some(), "off");
        keys
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldSpec {
    pub kind: SpecKind,
    pub params: SpecParams,
}

pub const DEFAULT_EPSILON: f64 = 0.2;
pub const DEFAULT_MAJOR: f64 = 1.0;
pub const DEFAULT_MINOR: f64 = 0.4;
pub const DEFAULT_TORUS_MESH: usize = 4;

impl ManifoldSpec {
    fn bare(kind: SpecKind) -> Self {
        Self {
            kind,
            params: SpecParams::default(),
        }
    }

    /// Expands a short name into a spec with default parameters.
    ///
    /// Accepted: `flat-torus`, `flat-torus-<d>d`, `sphere-geodesic`,
    /// `sphere-chord`, `stereographic-sphere`, `perturbed-sphere`,
    /// `torus-of-revolution`, `conformal-flat-torus`, `cube`,
    /// `tetrahedron`, `flat-torus-mesh`.
    pub fn from_name(name: &str) -> Result<Self> {
        let conformal = |factor: FactorName| Self {
            kind: SpecKind::Conformal,
            params: SpecParams {
                factor: Some(factor),
                ..Default::default()
            },
        };
        let polyhedron = |name: PolyhedronName| Self {
            kind: SpecKind::Polyhedron,
            params: SpecParams {
                name: Some(name),
                ..Default::default()
            },
        };
        let spec = match name {
            "flat-torus" | "flat-torus-2d" => Self::bare(SpecKind::FlatTorus),
            "sphere-geodesic" | "sphere" => Self::bare(SpecKind::SphereGeodesic),
            "sphere-chord" => Self::bare(SpecKind::SphereChord),
            "stereographic-sphere" => conformal(FactorName::StereographicSphere),
            "perturbed-sphere" => conformal(FactorName::Perturbed),
            "torus-of-revolution" => conformal(FactorName::TorusOfRevolution),
            "conformal-flat-torus" => conformal(FactorName::Constant),
            "cube" => polyhedron(PolyhedronName::Cube),
            "tetrahedron" => polyhedron(PolyhedronName::Tetrahedron),
            "flat-torus-mesh" => polyhedron(PolyhedronName::FlatTorusMesh),
            other => {
                let d = other
                    .strip_prefix("flat-torus-")
                    .and_then(|s| s.strip_suffix('d'))
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown manifold {other:?}")))?;
                Self {
                    kind: SpecKind::FlatTorusD,
                    params: SpecParams {
                        d: Some(d),
                        ..Default::default()
                    },
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that only parameters meaningful for the kind are present.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let allowed: &[&str] = match self.kind {
            SpecKind::FlatTorus | SpecKind::SphereGeodesic | SpecKind::SphereChord => &[],
            SpecKind::FlatTorusD => &["d"],
            SpecKind::Conformal => match p.factor {
                None => return Err(Error::Parse("conformal spec needs params.factor".into())),
                Some(FactorName::Constant) => &["factor", "side_u", "side_v", "sup_f", "quad_rel_tol", "ode_rel_tol"],
                Some(FactorName::StereographicSphere) => &["factor", "sup_f", "quad_rel_tol", "ode_rel_tol"],
                Some(FactorName::Perturbed) => &["factor", "epsilon", "sup_f", "quad_rel_tol", "ode_rel_tol"],
                Some(FactorName::TorusOfRevolution) => {
                    &["factor", "major", "minor", "sup_f", "quad_rel_tol", "ode_rel_tol"]
                }
            },
            SpecKind::Polyhedron => match (p.name, &p.off) {
                (Some(PolyhedronName::FlatTorusMesh), None) => &["name", "m"],
                (Some(_), None) => &["name"],
                (None, Some(_)) => &["off"],
                _ => {
                    return Err(Error::Parse(
                        "polyhedron spec needs exactly one of params.name, params.off".into(),
                    ))
                }
            },
        };
        if let Some(bad) = p.set_keys().into_iter().find(|k| !allowed.contains(k)) {
            return Err(Error::Parse(format!(
                "parameter {bad:?} does not apply to kind {:?}",
                self.kind
            )));
        }
        if self.kind == SpecKind::FlatTorusD && p.d.is_none() {
            return Err(Error::Parse("flat-torus-d spec needs params.d".into()));
        }
        for tol in [p.quad_rel_tol, p.ode_rel_tol].into_iter().flatten() {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Parse(format!("tolerance {tol} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Short display name, the inverse of [`ManifoldSpec::from_name`] for
    /// specs with default parameters.
    pub fn label(&self) -> String {
        let p = &self.params;
        match self.kind {
            SpecKind::FlatTorus => "flat-torus".into(),
            SpecKind::FlatTorusD => format!("flat-torus-{}d", p.d.unwrap_or(0)),
            SpecKind::SphereGeodesic => "sphere-geodesic".into(),
            SpecKind::SphereChord => "sphere-chord".into(),
            SpecKind::Conformal => match p.factor {
                Some(FactorName::Constant) => "conformal-flat-torus".into(),
                Some(FactorName::StereographicSphere) => "stereographic-sphere".into(),
                Some(FactorName::Perturbed) => "perturbed-sphere".into(),
                Some(FactorName::TorusOfRevolution) | None => "torus-of-revolution".into(),
            },
            SpecKind::Polyhedron => match (p.name, &p.off) {
                (Some(PolyhedronName::Cube), _) => "cube".into(),
                (Some(PolyhedronName::Tetrahedron), _) => "tetrahedron".into(),
                (Some(PolyhedronName::FlatTorusMesh), _) => "flat-torus-mesh".into(),
                (None, _) => "off-mesh".into(),
            },
        }
    }

    /// Builds the runtime manifold in precision `T`.
    pub fn build<T: Real>(&self) -> Result<ManifoldDescriptor<T>> {
        self.validate()?;
        let p = &self.params;
        let lit = |x: f64| T::lit(x);
        Ok(match self.kind {
            SpecKind::FlatTorus => ManifoldDescriptor::FlatTorus2D(FlatTorus2D),
            SpecKind::FlatTorusD => {
                ManifoldDescriptor::FlatTorusD(FlatTorusD::new(DimensionSpec::new(p.d.expect("validated"))?))
            }
            SpecKind::SphereGeodesic => ManifoldDescriptor::SphereGeodesic(Sphere::geodesic()),
            SpecKind::SphereChord => ManifoldDescriptor::SphereChord(Sphere::chord()),
            SpecKind::Conformal => {
                let mut s = match p.factor.expect("validated") {
                    FactorName::Constant => {
                        ConformalSurface::flat_torus(lit(p.side_u.unwrap_or(1.0)), lit(p.side_v.unwrap_or(1.0)))?
                    }
                    FactorName::StereographicSphere => ConformalSurface::stereographic_sphere()?,
                    FactorName::Perturbed => {
                        ConformalSurface::perturbed_sphere(lit(p.epsilon.unwrap_or(DEFAULT_EPSILON)))?
                    }
                    FactorName::TorusOfRevolution => ConformalSurface::torus_of_revolution(
                        lit(p.major.unwrap_or(DEFAULT_MAJOR)),
                        lit(p.minor.unwrap_or(DEFAULT_MINOR)),
                    )?,
                };
                if let Some(sups) = &p.sup_f {
                    if sups.len() != s.patches.len() {
                        return Err(Error::InvalidParameter(format!(
                            "sup_f has {} entries for {} patches",
                            sups.len(),
                            s.patches.len()
                        )));
                    }
                    for (patch, &sup) in s.patches.iter_mut().zip(sups) {
                        *patch =
                            ConformalPatch::new(patch.chart_id, patch.factor, patch.domain, patch.weight, lit(sup))?;
                    }
                }
                let mut opts = SolverOptions::default();
                if let Some(t) = p.quad_rel_tol {
                    opts.quad_rel_tol = lit(t);
                }
                if let Some(t) = p.ode_rel_tol {
                    opts.ode_rel_tol = lit(t);
                }
                s = s.with_options(opts);
                ManifoldDescriptor::ConformalPatchSet(s)
            }
            SpecKind::Polyhedron => match (p.name, &p.off) {
                (Some(PolyhedronName::Cube), _) => ManifoldDescriptor::Polyhedron(PolyhedralSurface::cube()),
                (Some(PolyhedronName::Tetrahedron), _) => {
                    ManifoldDescriptor::Polyhedron(PolyhedralSurface::tetrahedron())
                }
                (Some(PolyhedronName::FlatTorusMesh), _) => ManifoldDescriptor::Polyhedron(
                    PolyhedralSurface::flat_torus_mesh(p.m.unwrap_or(DEFAULT_TORUS_MESH))?,
                ),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))?;
                    ManifoldDescriptor::Polyhedron(parse_off(&text)?)
                }
                (None, None) => unreachable!("validated"),
            },
        })
    }
}

impl<'de> Deserialize<'de> for ManifoldSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Object {
            kind: SpecKind,
            #[serde(default)]
            params: SpecParams,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Name(String),
            Object(Object),
        }
        let spec = match Either::deserialize(de)? {
            Either::Name(n) => return ManifoldSpec::from_name(&n).map_err(serde::de::Error::custom),
            Either::Object(o) => ManifoldSpec {
                kind: o.kind,
                params: o.params,
            },
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A built manifold of any supported kind.
///
/// The point type differs between kinds, so generic work is dispatched
/// through [`ManifoldVisitor`].
#[derive(Debug, Clone)]
pub enum ManifoldDescriptor<T> {
    FlatTorus2D(FlatTorus2D),
    SphereGeodesic(Sphere),
    SphereChord(Sphere),
    FlatTorusD(FlatTorusD),
    ConformalPatchSet(ConformalSurface<T>),
    Polyhedron(PolyhedralSurface<T>),
}

/// Generic computation over whichever manifold a descriptor holds.
pub trait ManifoldVisitor<T: Real> {
    type Output;
    fn visit<M: Manifold<T>>(self, m: &M) -> Self::Output;
}

impl<T: Real> ManifoldDescriptor<T> {
    pub fn visit<V: ManifoldVisitor<T>>(&self, v: V) -> V::Output {
        match self {
            Self::FlatTorus2D(m) => v.visit(m),
            Self::SphereGeodesic(m) | Self::SphereChord(m) => v.visit(m),
            Self::FlatTorusD(m) => v.visit(m),
            Self::ConformalPatchSet(m) => v.visit(m),
            Self::Polyhedron(m) => v.visit(m),
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        struct Kind;
        impl<T: Real> ManifoldVisitor<T> for Kind {
            type Output = ManifoldKind;
            fn visit<M: Manifold<T>>(self, m: &M) -> ManifoldKind {
                m.kind()
            }
        }
        self.visit(Kind)
    }

    pub fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        struct Flat;
        impl<T: Real> ManifoldVisitor<T> for Flat {
            type Output = Option<FlatnessThreshold<T>>;
            fn visit<M: Manifold<T>>(self, m: &M) -> Self::Output {
                m.flatness()
            }
        }
        self.visit(Flat)
    }

    pub fn total_area(&self) -> T {
        T::one()
    }

    /// Inverse disc-area function for the quadrature route, when every
    /// point has the same disc areas. On the `d`-torus with `d > 2` this is
    /// the flat ball, exact only below the flatness threshold.
    pub fn area_inverse(&self) -> Option<AreaInverseFn<T>> {
        match self {
            Self::FlatTorus2D(_) => Some(AreaInverseFn::Closed(ClosedForm::SquareTorus)),
            Self::SphereGeodesic(_) => Some(AreaInverseFn::Closed(ClosedForm::SphereArcsin)),
            Self::SphereChord(_) => Some(AreaInverseFn::Closed(ClosedForm::FlatBall(DimensionSpec::TWO))),
            Self::FlatTorusD(t) => Some(AreaInverseFn::Closed(ClosedForm::FlatBall(Manifold::<T>::dimension(t)))),
            _ => None,
        }
    }

    /// First moment from the series engine: the flat formula on flat
    /// manifolds and the chord sphere, the summed arcsine series on the
    /// geodesic sphere.
    pub fn series_mean(&self, ms: &MomentSpec<T>) -> Option<Result<SeriesMean<T>>> {
        let flat = |dim| {
            flat_mean(dim, ms).map(|value| SeriesMean {
                value,
                terms: 1,
                residual: T::zero(),
                tail_warning: false,
            })
        };
        match self {
            Self::FlatTorus2D(_) | Self::SphereChord(_) => Some(flat(DimensionSpec::TWO)),
            Self::FlatTorusD(t) => Some(flat(Manifold::<T>::dimension(t))),
            Self::SphereGeodesic(_) => Some(sphere_mean_exact(ms, DEFAULT_MAX_TERMS)),
            _ => None,
        }
    }
}
