//! Closed surfaces assembled from conformal charts.

use crate::error::{Error, Result};
use crate::manifold::{
    torus_disc_area, FlatnessThreshold, Manifold, ManifoldKind, ProximityOrder, RandomStream, SurfacePoint,
};
use crate::quadrature::{integrate_2d, QuadOptions};
use crate::scalar::Real;
use crate::series::{PowerSeries, TopologyInfo};

use super::geodesic::{disc_area_numeric, geodesic_distance, DiscAreaOptions, ShootingOptions};
use super::geometry::{curvature, gaussian_curvature, FdOptions};
use super::patch::{BuiltinFactor, ChartDomain, ChartWeight, ConformalPatch, Pole};

/// A point given in one chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint<T> {
    pub chart: usize,
    pub u: T,
    pub v: T,
}

impl<T> From<ChartPoint<T>> for SurfacePoint<T> {
    fn from(p: ChartPoint<T>) -> Self {
        SurfacePoint::Chart {
            chart_id: p.chart,
            u: p.u,
            v: p.v,
        }
    }
}

/// How charts of an atlas are glued.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Gluing {
    /// One periodic chart.
    Single,
    /// Two stereographic charts related by `(u, v) ↦ (u, v)/(u² + v²)`.
    Inversion,
}

/// Solver settings shared by the numeric routines of an atlas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub quad_rel_tol: T,
    pub ode_rel_tol: T,
    pub fd: FdOptions<T>,
    pub max_attempts: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            quad_rel_tol: T::lit(1e-10),
            ode_rel_tol: T::lit(1e-12),
            fd: FdOptions::default(),
            max_attempts: 1_000_000,
        }
    }
}

/// A closed unit-area surface covered by conformal charts whose weights form
/// a partition of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalSurface<T> {
    pub name: String,
    pub patches: Vec<ConformalPatch<T>>,
    pub topology: TopologyInfo,
    pub options: SolverOptions<T>,
    gluing: Gluing,
    injectivity: Option<T>,
}

/// Half-width of the transition band of the stereographic weights, in `ln ρ`.
const STEREO_BAND: f64 = 0.6;
/// Half-width of the stereographic chart squares.
const STEREO_HALF_WIDTH: f64 = 2.0;

impl<T: Real> ConformalSurface<T> {
    /// Unit-area round sphere from two stereographic charts.
    pub fn stereographic_sphere() -> Result<Self> {
        Self::perturbed_sphere(T::zero())
    }

    /// Round sphere with conformal factor multiplied by `exp(2εz/R)` and
    /// renormalized to unit area.
    pub fn perturbed_sphere(epsilon: T) -> Result<Self> {
        if epsilon.abs() > T::lit(2.0) {
            return Err(Error::InvalidParameter("perturbation |ε| must be ≤ 2".into()));
        }
        let radius = T::lit(0.5) / T::PI().sqrt();
        let h = T::lit(STEREO_HALF_WIDTH);
        let domain = ChartDomain::new((-h, h), (-h, h))?;
        let weight = ChartWeight::Radial { a: T::lit(STEREO_BAND) };
        let mut patches = Vec::new();
        for (id, pole) in [(0, Pole::South), (1, Pole::North)] {
            let factor = BuiltinFactor::Stereographic { radius, epsilon, pole };
            let sup = factor.sup_bound().expect("bounded");
            patches.push(ConformalPatch::new(id, factor, domain, weight, sup)?);
        }
        Self {
            name: if epsilon == T::zero() {
                "stereographic-sphere".into()
            } else {
                "perturbed-sphere".into()
            },
            patches,
            topology: TopologyInfo::from_genus(0),
            options: SolverOptions::default(),
            gluing: Gluing::Inversion,
            injectivity: None,
        }
        .with_injectivity()
    }

    /// Torus of revolution with radii `major > minor > 0`, rescaled to unit
    /// area, in one doubly periodic isothermal chart.
    pub fn torus_of_revolution(major: T, minor: T) -> Result<Self> {
        if !(minor > T::zero() && major > minor) {
            return Err(Error::InvalidParameter("torus radii need major > minor > 0".into()));
        }
        let factor = BuiltinFactor::TorusRevolution { major, minor };
        let period = BuiltinFactor::torus_period(major, minor);
        let domain = ChartDomain::new((T::zero(), T::lit(2.0) * T::PI()), (T::zero(), period))?.periodic(true, true);
        let sup = factor.sup_bound().expect("bounded");
        Self {
            name: "torus-of-revolution".into(),
            patches: vec![ConformalPatch::new(0, factor, domain, ChartWeight::One, sup)?],
            topology: TopologyInfo::from_genus(1),
            options: SolverOptions::default(),
            gluing: Gluing::Single,
            injectivity: None,
        }
        .with_injectivity()
    }

    /// Constant factor `c` on a periodic `a × b` rectangle with `c·a·b = 1`.
    pub fn flat_torus(side_u: T, side_v: T) -> Result<Self> {
        let c = (side_u * side_v).recip();
        let factor = BuiltinFactor::Constant { c };
        let domain = ChartDomain::new((T::zero(), side_u), (T::zero(), side_v))?.periodic(true, true);
        Self {
            name: "flat-torus-chart".into(),
            patches: vec![ConformalPatch::new(0, factor, domain, ChartWeight::One, c)?],
            topology: TopologyInfo::from_genus(1),
            options: SolverOptions::default(),
            gluing: Gluing::Single,
            injectivity: None,
        }
        .with_injectivity()
    }

    /// A lower bound on the injectivity radius, from
    /// `inj ≥ min(π/√K_max, ℓ/2)` with `ℓ` the shortest closed geodesic.
    ///
    /// On a sphere with `K > 0` everywhere the second term is not needed. On
    /// a torus of revolution `ℓ` is taken from the meridian and the inner
    /// equator. `K_max` comes from a grid scan with a 5% margin. `None` when
    /// no bound is known (flat surfaces need none).
    pub fn injectivity_bound(&self) -> Option<T> {
        self.injectivity
    }

    fn with_injectivity(mut self) -> Result<Self> {
        const GRID: usize = 81;
        let mut kmin = T::infinity();
        let mut kmax = T::neg_infinity();
        for patch in &self.patches {
            let d = patch.domain;
            for i in 0..GRID {
                for j in 0..GRID {
                    let u = d.u.0 + (d.u.1 - d.u.0) * T::of_usize(i) / T::of_usize(GRID - 1);
                    let v = d.v.0 + (d.v.1 - d.v.0) * T::of_usize(j) / T::of_usize(GRID - 1);
                    let k = curvature(patch, u, v)?;
                    kmin = kmin.min(k);
                    kmax = kmax.max(k);
                }
            }
        }
        let conj = T::PI() / (T::lit(1.05) * kmax).sqrt();
        self.injectivity = match self.patches[0].factor {
            BuiltinFactor::Stereographic { .. } if kmin > T::zero() => Some(conj),
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = BuiltinFactor::<T>::torus_params(major, minor);
                let loop_half = T::PI() * s2.sqrt() * minor.min(major - minor);
                Some(if kmax > T::zero() {
                    conj.min(loop_half)
                } else {
                    loop_half
                })
            }
            _ => None,
        };
        Ok(self)
    }

    pub fn with_options(mut self, options: SolverOptions<T>) -> Self {
        self.options = options;
        self
    }

    fn is_flat(&self) -> Option<T> {
        match (self.gluing, self.patches[0].factor) {
            (Gluing::Single, BuiltinFactor::Constant { c }) => Some(c),
            _ => None,
        }
    }

    /// Coordinates of `p` in `chart`, if it lies in that chart's domain.
    pub fn express(&self, p: &ChartPoint<T>, chart: usize) -> Option<(T, T)> {
        let target = self.patches.get(chart)?;
        let (u, v) = if p.chart == chart {
            (p.u, p.v)
        } else {
            match self.gluing {
                Gluing::Single => (p.u, p.v),
                Gluing::Inversion => {
                    let r2 = p.u * p.u + p.v * p.v;
                    if r2 == T::zero() {
                        return None;
                    }
                    (p.u / r2, p.v / r2)
                }
            }
        };
        let (u, v) = target.domain.wrap(u, v);
        target.domain.contains(u, v).then_some((u, v))
    }

    /// Representative of `p` in the lowest-numbered chart containing it.
    pub fn canonical(&self, p: &ChartPoint<T>) -> Result<ChartPoint<T>> {
        for c in 0..self.patches.len() {
            if let Some((u, v)) = self.express(p, c) {
                return Ok(ChartPoint { chart: c, u, v });
            }
        }
        Err(Error::Domain(format!("point {p:?} lies in no chart")))
    }

    /// The chart in which both points sit deepest (largest smaller weight,
    /// then largest edge margin); ties go to the lowest chart id.
    fn common_chart(&self, a: &ChartPoint<T>, b: &ChartPoint<T>) -> Option<(usize, (T, T), (T, T))> {
        let mut best: Option<(T, T, usize, (T, T), (T, T))> = None;
        for (c, patch) in self.patches.iter().enumerate() {
            let (Some(pa), Some(pb)) = (self.express(a, c), self.express(b, c)) else {
                continue;
            };
            let w = patch.weight.eval(pa.0, pa.1).min(patch.weight.eval(pb.0, pb.1));
            let m = patch.domain.margin(pa.0, pa.1).min(patch.domain.margin(pb.0, pb.1));
            let better = match best {
                None => true,
                Some((bw, bm, ..)) => w > bw || (w == bw && m > bm),
            };
            if better {
                best = Some((w, m, c, pa, pb));
            }
        }
        best.map(|(_, _, c, pa, pb)| (c, pa, pb))
    }

    /// Embedding of the underlying round sphere or torus of revolution
    /// (unit-area scale), used for distance lower bounds.
    pub fn embed(&self, p: &ChartPoint<T>) -> [T; 3] {
        let patch = &self.patches[p.chart];
        match patch.factor {
            BuiltinFactor::Stereographic { radius, pole, .. } => {
                let r2 = p.u * p.u + p.v * p.v;
                let d = T::one() + r2;
                let z = radius * (r2 - T::one()) / d;
                let z = match pole {
                    Pole::South => z,
                    Pole::North => -z,
                };
                [(radius + radius) * p.u / d, (radius + radius) * p.v / d, z]
            }
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = BuiltinFactor::<T>::torus_params(major, minor);
                let sigma = s2.sqrt();
                let (ct, st) = BuiltinFactor::<T>::torus_angle(major, minor, p.v);
                let ring = major + minor * ct;
                [sigma * ring * p.u.cos(), sigma * ring * p.u.sin(), sigma * minor * st]
            }
            BuiltinFactor::Constant { .. } | BuiltinFactor::Hyperbolic => [p.u, p.v, T::zero()],
        }
    }

    /// Factor `λ` with `λ·|E(a) − E(b)| ≤ d(a, b)` for the embedding `E`.
    fn chord_scale(&self) -> T {
        match self.patches[0].factor {
            BuiltinFactor::Stereographic { epsilon, .. } => {
                (-epsilon.abs()).exp() * BuiltinFactor::perturbation_norm(epsilon).sqrt()
            }
            _ => T::one(),
        }
    }

    /// Fallible geodesic distance.
    pub fn try_distance(&self, a: &ChartPoint<T>, b: &ChartPoint<T>) -> Result<T> {
        if let Some(c) = self.is_flat() {
            let patch = &self.patches[0];
            let (du, dv) = patch.domain.delta((a.u, a.v), (b.u, b.v));
            return Ok(c.sqrt() * (du * du + dv * dv).sqrt());
        }
        if let (Gluing::Inversion, BuiltinFactor::Stereographic { epsilon, radius, .. }) =
            (self.gluing, self.patches[0].factor)
        {
            if epsilon == T::zero() {
                let (ea, eb) = (self.embed(a), self.embed(b));
                let c = ((ea[0] - eb[0]).powi(2) + (ea[1] - eb[1]).powi(2) + (ea[2] - eb[2]).powi(2)).sqrt();
                return Ok((radius + radius) * (c / (radius + radius)).min(T::one()).asin());
            }
        }
        let (c, pa, pb) = self
            .common_chart(a, b)
            .ok_or_else(|| Error::Domain("points share no chart".into()))?;
        let opts = ShootingOptions {
            ode_rel_tol: self.options.ode_rel_tol,
            ..ShootingOptions::default()
        };
        geodesic_distance(&self.patches[c], pa, pb, &opts)
    }

    /// Geodesic disc area about `x`, in the chart where `x` is deepest.
    pub fn try_disc_area(&self, x: &ChartPoint<T>, l: T) -> Result<T> {
        if l < T::zero() {
            return Err(Error::Domain(format!("disc radius {l} is negative")));
        }
        if let Some(th) = Manifold::<T>::flatness(self) {
            if l <= th.l0 {
                return Ok(T::PI() * l * l);
            }
            let d = self.patches[0].domain;
            if d.u.1 - d.u.0 != d.v.1 - d.v.0 {
                return Err(Error::Unsupported(
                    "disc areas beyond l0 on a non-square flat torus".into(),
                ));
            }
            // unit-area square, so the chart scale drops out
            return Ok(torus_disc_area(l));
        }
        if let Some(inj) = self.injectivity {
            if l > inj {
                return Err(Error::Domain(format!(
                    "disc radius {l} exceeds the injectivity bound {inj}; polar coordinates would overlap"
                )));
            }
        }
        let (c, p) = self
            .common_chart(x, x)
            .map(|(c, p, _)| (c, p))
            .ok_or_else(|| Error::Domain("point lies in no chart".into()))?;
        let opts = DiscAreaOptions {
            ode_rel_tol: self.options.ode_rel_tol,
            ..DiscAreaOptions::default()
        };
        disc_area_numeric(&self.patches[c], p, l, &opts)
    }

    /// Draws a point uniformly in area: a chart uniformly, a proposal uniform
    /// in its rectangle, accepted with probability `w f |D| / max_i(sup_i |D_i|)`.
    pub fn try_sample(&self, rng: &mut RandomStream) -> Result<ChartPoint<T>> {
        let bound = self
            .patches
            .iter()
            .map(|p| p.sup_f * p.domain.area())
            .fold(T::zero(), T::max);
        for _ in 0..self.options.max_attempts {
            let c = if self.patches.len() == 1 {
                0
            } else {
                rng.index(self.patches.len())
            };
            let patch = &self.patches[c];
            let d = patch.domain;
            let u = d.u.0 + (d.u.1 - d.u.0) * rng.uniform::<T>();
            let v = d.v.0 + (d.v.1 - d.v.0) * rng.uniform::<T>();
            let f = patch.f(u, v);
            if f > patch.sup_f {
                return Err(Error::SupBoundViolated {
                    value: f.to_f64_lossy(),
                    bound: patch.sup_f.to_f64_lossy(),
                    u: u.to_f64_lossy(),
                    v: v.to_f64_lossy(),
                });
            }
            let accept = patch.weight.eval(u, v) * f * d.area() / bound;
            if rng.uniform::<T>() < accept {
                return Ok(ChartPoint { chart: c, u, v });
            }
        }
        Err(Error::RejectionExhausted {
            attempts: self.options.max_attempts,
        })
    }
}

impl<T: Real> Manifold<T> for ConformalSurface<T> {
    type Point = ChartPoint<T>;

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::ConformalPatchSet
    }

    fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        self.is_flat().map(|c| {
            let d = self.patches[0].domain;
            let l0 = c.sqrt() * (d.u.1 - d.u.0).min(d.v.1 - d.v.0) / T::lit(2.0);
            FlatnessThreshold {
                l0,
                w0: (T::PI() * l0 * l0).min(T::one()),
            }
        })
    }

    fn topology(&self) -> Option<TopologyInfo> {
        Some(self.topology)
    }

    /// An upper bound on the diameter.
    fn diameter(&self) -> T {
        match self.patches[0].factor {
            BuiltinFactor::Constant { c } => {
                let d = self.patches[0].domain;
                c.sqrt() * ((d.u.1 - d.u.0).powi(2) + (d.v.1 - d.v.0).powi(2)).sqrt() / T::lit(2.0)
            }
            BuiltinFactor::Stereographic { radius, epsilon, .. } => {
                T::PI() * radius * epsilon.abs().exp() * BuiltinFactor::perturbation_norm(epsilon).sqrt()
            }
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = BuiltinFactor::<T>::torus_params(major, minor);
                s2.sqrt() * T::PI() * (major + minor + minor)
            }
            BuiltinFactor::Hyperbolic => T::infinity(),
        }
    }

    fn sample(&self, rng: &mut RandomStream) -> Result<ChartPoint<T>> {
        self.try_sample(rng)
    }

    /// Geodesic distance; `NaN` if shooting fails (see [`Self::try_distance`]).
    fn distance(&self, a: &ChartPoint<T>, b: &ChartPoint<T>) -> T {
        self.try_distance(a, b).unwrap_or_else(|_| T::nan())
    }

    fn try_distance(&self, a: &ChartPoint<T>, b: &ChartPoint<T>) -> Result<T> {
        ConformalSurface::try_distance(self, a, b)
    }

    fn proximity(&self, a: &ChartPoint<T>, b: &ChartPoint<T>) -> T {
        if self.is_flat().is_some() {
            return ConformalSurface::try_distance(self, a, b).unwrap_or_else(|_| T::nan());
        }
        let (ea, eb) = (self.embed(a), self.embed(b));
        let c = ((ea[0] - eb[0]).powi(2) + (ea[1] - eb[1]).powi(2) + (ea[2] - eb[2]).powi(2)).sqrt();
        self.chord_scale() * c
    }

    fn proximity_order(&self) -> ProximityOrder {
        if self.is_flat().is_some() {
            ProximityOrder::Monotone
        } else {
            ProximityOrder::LowerBound
        }
    }

    fn disc_area(&self, x: &ChartPoint<T>, l: T) -> Result<T> {
        self.try_disc_area(x, l)
    }
}

/// `∫ w K f du dv` or another weighted density over every chart.
fn integrate_surface<T: Real, G>(patches: &[ConformalPatch<T>], rel_tol: T, mut density: G) -> Result<(T, T)>
where
    G: FnMut(&ConformalPatch<T>, T, T) -> Result<T>,
{
    let mut total = T::zero();
    let mut err = T::zero();
    for patch in patches {
        let mut fault = None;
        let r = integrate_2d(
            |u, v| {
                let w = patch.weight.eval(u, v);
                if w == T::zero() || fault.is_some() {
                    return T::zero();
                }
                match density(patch, u, v) {
                    Ok(x) => w * x * patch.f(u, v),
                    Err(e) => {
                        fault = Some(e);
                        T::zero()
                    }
                }
            },
            patch.domain.u,
            patch.domain.v,
            &QuadOptions::rel(rel_tol).with_abs(rel_tol).with_max_intervals(20_000),
        );
        if let Some(e) = fault {
            return Err(e);
        }
        let r = r?;
        total += r.value;
        err += r.error;
    }
    Ok((total, err))
}

/// Euler characteristic from Gauss–Bonnet, with the quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBonnet<T> {
    pub chi: T,
    pub error: T,
}

/// `χ = (1/2π) Σ_charts ∫ w K f du dv`.
pub fn gauss_bonnet_chi<T: Real>(patches: &[ConformalPatch<T>], rel_tol: T) -> Result<GaussBonnet<T>> {
    let (total, err) = integrate_surface(patches, rel_tol, |p, u, v| curvature(p, u, v))?;
    let tau = T::lit(2.0) * T::PI();
    Ok(GaussBonnet {
        chi: total / tau,
        error: err / tau,
    })
}

/// Surface average of the inverse-area series coefficients through `w^order`
/// (`order ≤ 3`), using the integrated-by-parts densities
/// `K/24π`, `3K²/640π²`, `(15K³ + 16K∇²K)/21504π³`, each over `√π`.
pub fn surface_average_series<T: Real>(
    patches: &[ConformalPatch<T>],
    order: usize,
    opts: &SolverOptions<T>,
) -> Result<PowerSeries<T>> {
    if order > 3 {
        return Err(Error::Unsupported(format!("surface average order {order} > 3")));
    }
    let pi = T::PI();
    let sp = pi.sqrt();
    let mut coeffs = vec![sp.recip()];
    let densities: [&dyn Fn(&ConformalPatch<T>, T, T) -> Result<T>; 3] = [
        &|p, u, v| Ok(curvature(p, u, v)? / (T::lit(24.0) * pi)),
        &|p, u, v| {
            let k = curvature(p, u, v)?;
            Ok(T::lit(3.0) * k * k / (T::lit(640.0) * pi * pi))
        },
        &|p, u, v| {
            let j = gaussian_curvature(p, u, v, &opts.fd)?;
            Ok((T::lit(15.0) * j.k.powi(3) + T::lit(16.0) * j.k * j.lap_k) / (T::lit(21_504.0) * pi * pi * pi))
        },
    ];
    for density in densities.iter().take(order) {
        let (v, _) = integrate_surface(patches, opts.quad_rel_tol, |p, u, w| density(p, u, w))?;
        coeffs.push(v / sp);
    }
    PowerSeries::new(T::lit(0.5), coeffs)
}

/// Surface average of the pointwise coefficients
/// `(9K² + 4∇²K)/1920π²` (order 2) before integration by parts; agrees with
/// [`surface_average_series`] on closed surfaces.
pub fn surface_average_pointwise_w2<T: Real>(patches: &[ConformalPatch<T>], opts: &SolverOptions<T>) -> Result<T> {
    let pi = T::PI();
    let (v, _) = integrate_surface(patches, opts.quad_rel_tol, |p, u, w| {
        let j = gaussian_curvature(p, u, w, &opts.fd)?;
        Ok((T::lit(9.0) * j.k * j.k + T::lit(4.0) * j.lap_k) / (T::lit(1920.0) * pi * pi))
    })?;
    Ok(v / pi.sqrt())
}

/// Total area `Σ ∫ w f du dv`; equals 1 for every built-in surface.
pub fn total_area<T: Real>(patches: &[ConformalPatch<T>], rel_tol: T) -> Result<T> {
    Ok(integrate_surface(patches, rel_tol, |_, _, _| Ok(T::one()))?.0)
}
