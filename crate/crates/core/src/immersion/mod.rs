//! Parametric immersions `x: D ⊂ ℝ² → ℝⁿ` and their 2-jets.

mod catalog;
pub mod expr;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;


use crate::linalg::{AmbientVec, MAX_AMBIENT_DIM};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub use catalog::{catalog_surface, truncated_total_curvature, CATALOG};
pub use expr::Expression;

/// Closed interval `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn lerp(&self, s: f64) -> f64 {
        self.min + s * (self.max - self.min)
    }
}

/// Which sides of the parameter rectangle are artificial cuts of a
/// noncompact surface. Order: `u = min`, `u = max`, `v = min`, `v = max`.
pub type TruncatedSides = [bool; 4];

/// Parameter rectangle with optional seams and collapsed edges.
///
/// A collapsed `v` edge maps to a single surface point (a pole of the
/// sphere chart). It is neither a seam nor a truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamDomain {
    pub u_range: Interval,
    pub v_range: Interval,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub collapsed_v_min: bool,
    pub collapsed_v_max: bool,
    pub truncation_note: String,
}

impl ParamDomain {
    /// A rectangle with every side truncated.
    pub fn rect(u: Interval, v: Interval) -> Result<Self> {
        for (name, iv) in [("u_range", u), ("v_range", v)] {
            if !(iv.min.is_finite() && iv.max.is_finite() && iv.len() > 0.0) {
                return Err(Error::InvalidParameter {
                    name: name.to_string(),
                    reason: format!("interval [{}, {}] must have positive length", iv.min, iv.max),
                });
            }
        }
        let mut d = ParamDomain {
            u_range: u,
            v_range: v,
            periodic_u: false,
            periodic_v: false,
            collapsed_v_min: false,
            collapsed_v_max: false,
            truncation_note: String::new(),
        };
        d.refresh_note();
        Ok(d)
    }

    pub fn with_periodic(mut self, u: bool, v: bool) -> Self {
        self.periodic_u = u;
        self.periodic_v = v;
        self.refresh_note();
        self
    }

    pub fn with_collapsed_v(mut self, at_min: bool, at_max: bool) -> Self {
        self.collapsed_v_min = at_min;
        self.collapsed_v_max = at_max;
        self.refresh_note();
        self
    }

    fn refresh_note(&mut self) {
        let names = ["u = min", "u = max", "v = min", "v = max"];
        let cut: Vec<&str> = self
            .truncated_sides()
            .iter()
            .zip(names)
            .filter_map(|(t, n)| t.then_some(n))
            .collect();
        self.truncation_note = if cut.is_empty() {
            "no truncation".to_string()
        } else {
            format!("truncated edges: {}", cut.join(", "))
        };
    }

    pub fn truncated_sides(&self) -> TruncatedSides {
        [
            !self.periodic_u,
            !self.periodic_u,
            !self.periodic_v && !self.collapsed_v_min,
            !self.periodic_v && !self.collapsed_v_max,
        ]
    }

    /// True when no side is an artificial cut.
    pub fn is_compact(&self) -> bool {
        !self.truncated_sides().iter().any(|&t| t)
    }

    /// Wraps periodic coordinates into `[min, max)`.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        let w = |x: f64, iv: &Interval, periodic: bool| {
            if periodic {
                let period = iv.len();
                let mut m = (x - iv.min) % period;
                if m < 0.0 {
                    m += period;
                }
                let mut y = iv.min + m;
                if y >= iv.max {
                    y = iv.min;
                }
                y
            } else {
                x
            }
        };
        [
            w(p[0], &self.u_range, self.periodic_u),
            w(p[1], &self.v_range, self.periodic_v),
        ]
    }

    /// Containment after wrapping, with a relative slack on closed sides.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let q = self.wrap(p);
        let inside = |x: f64, iv: &Interval| {
            let tol = 1e-9 * iv.len();
            x >= iv.min - tol && x <= iv.max + tol
        };
        q[0].is_finite() && q[1].is_finite() && inside(q[0], &self.u_range) && inside(q[1], &self.v_range)
    }
}

/// How a surface's derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetMode {
    Analytic,
    FiniteDifference,
}

/// Position and first and second partials at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImmersionJet {
    pub p: [f64; 2],
    pub x: AmbientVec,
    /// `[x_u, x_v]`.
    pub dx: [AmbientVec; 2],
    /// `[x_uu, x_uv, x_vv]`.
    pub ddx: [AmbientVec; 3],
}

impl ImmersionJet {
    /// `∂_i∂_j x` for `i, j ∈ {0, 1}`.
    #[inline]
    pub fn second(&self, i: usize, j: usize) -> &AmbientVec {
        &self.ddx[i + j]
    }

    pub fn gram(&self) -> crate::Sym2 {
        crate::Sym2::new(
            self.dx[0].norm_sq(),
            self.dx[0].dot(&self.dx[1]),
            self.dx[1].norm_sq(),
        )
    }

    /// Immersion test: `det g > 1e-12 · (tr g)²`.
    pub fn is_degenerate(&self) -> bool {
        let g = self.gram();
        let tr = g.trace();
        !(g.det() > 1e-12 * tr * tr) || !self.x.is_finite()
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Shape {
    Plane,
    Sphere { radius: f64 },
    Catenoid,
    Enneper,
    Helicoid,
    Paraboloid,
    CliffordTorus,
    User { components: Vec<Expression>, values: Vec<f64> },
}

/// A parametric surface: chart, position map, declared topology.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub domain: ParamDomain,
    pub ambient_dim: usize,
    pub euler_char_full: i64,
    pub jet_mode: JetMode,
    /// `∫_M K` over the full, untruncated surface when known in closed form.
    pub total_curvature: Option<f64>,
    pub(crate) shape: Shape,
    pub(crate) scale: f64,
}

impl SurfaceSpec {
    /// A user surface from one expression per ambient coordinate.
    ///
    /// Expressions may use `u`, `v` and the names in `params`. Jets are
    /// always finite-difference.
    pub fn user(
        name: &str,
        components: &[&str],
        params: &[(&str, f64)],
        domain: ParamDomain,
        euler_char_full: i64,
    ) -> Result<Self> {
        if components.len() < 3 || components.len() > MAX_AMBIENT_DIM {
            return Err(Error::InvalidParameter {
                name: "components".to_string(),
                reason: format!(
                    "ambient dimension must be between 3 and {MAX_AMBIENT_DIM}, got {}",
                    components.len()
                ),
            });
        }
        let mut vars: Vec<&str> = alloc::vec!["u", "v"];
        for (k, _) in params {
            if matches!(*k, "u" | "v" | "pi" | "e") {
                return Err(Error::InvalidParameter {
                    name: (*k).to_string(),
                    reason: "reserved name".to_string(),
                });
            }
            vars.push(k);
        }
        let exprs = components
            .iter()
            .map(|c| Expression::parse(c, &vars))
            .collect::<Result<Vec<_>>>()?;
        let spec = SurfaceSpec {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            domain,
            ambient_dim: components.len(),
            euler_char_full,
            jet_mode: JetMode::FiniteDifference,
            total_curvature: None,
            shape: Shape::User {
                components: exprs,
                values: params.iter().map(|(_, v)| *v).collect(),
            },
            scale: 1.0,
        };
        spec.check_seams(1e-9)?;
        Ok(spec)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Overall length scale of the image (the `scale` parameter, times the
    /// radius for the sphere).
    pub fn length_scale(&self) -> f64 {
        match self.shape {
            Shape::Sphere { radius } => self.scale * radius,
            _ => self.scale,
        }
    }

    pub fn with_jet_mode(mut self, mode: JetMode) -> Self {
        self.jet_mode = mode;
        self
    }

    /// Position `x(p)`; `p` is wrapped but not range-checked.
    pub fn position(&self, p: [f64; 2]) -> AmbientVec {
        let p = self.domain.wrap(p);
        catalog::position(&self.shape, p) * self.scale
    }

    /// Jet at `p` without domain or degeneracy checks.
    pub fn jet_unchecked(&self, p: [f64; 2]) -> ImmersionJet {
        let p = self.domain.wrap(p);
        match (&self.shape, self.jet_mode) {
            (Shape::User { .. }, _) | (_, JetMode::FiniteDifference) => self.fd_jet(p),
            (shape, JetMode::Analytic) => {
                let mut j = catalog::jet(shape, p);
                let s = self.scale;
                j.x = j.x * s;
                for d in j.dx.iter_mut() {
                    *d = *d * s;
                }
                for d in j.ddx.iter_mut() {
                    *d = *d * s;
                }
                j
            }
        }
    }

    /// Fourth-order central differences of the position map.
    ///
    /// First derivatives use `h = s·ε^{1/5}` and second derivatives
    /// `h = s·ε^{1/6}`, with `s = max(1, |u|, |v|)`; each step balances the
    /// `h⁴` truncation term against rounding for its derivative order.
    fn fd_jet(&self, p: [f64; 2]) -> ImmersionJet {
        let s = 1.0f64.max(p[0].abs()).max(p[1].abs());
        let h1 = s * f64::EPSILON.powf(1.0 / 5.0);
        let h2 = s * f64::EPSILON.powf(1.0 / 6.0);
        let f = |du: f64, dv: f64| self.position([p[0] + du, p[1] + dv]);
        let x = f(0.0, 0.0);
        let d1 = |e: [f64; 2]| {
            let at = |k: f64| f(k * h1 * e[0], k * h1 * e[1]);
            (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) * (1.0 / (12.0 * h1))
        };
        let d2 = |e: [f64; 2]| {
            let at = |k: f64| f(k * h2 * e[0], k * h2 * e[1]);
            ((at(-2.0) + at(2.0)) * -1.0 + (at(1.0) + at(-1.0)) * 16.0 - x * 30.0)
                * (1.0 / (12.0 * h2 * h2))
        };
        const C: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
        let mut uv = AmbientVec::zeros(x.dim());
        for (a, ca) in C.iter().enumerate() {
            for (b, cb) in C.iter().enumerate() {
                let w = ca * cb;
                if w != 0.0 {
                    uv += f((a as f64 - 2.0) * h2, (b as f64 - 2.0) * h2) * w;
                }
            }
        }
        uv = uv * (1.0 / (144.0 * h2 * h2));
        ImmersionJet {
            p,
            x,
            dx: [d1([1.0, 0.0]), d1([0.0, 1.0])],
            ddx: [d2([1.0, 0.0]), uv, d2([0.0, 1.0])],
        }
    }

    /// Largest distance between identified points along the periodic seams.
    pub fn seam_mismatch(&self) -> f64 {
        let d = &self.domain;
        let mut worst = 0.0f64;
        for k in 0..=32 {
            let s = k as f64 / 32.0;
            if d.periodic_u {
                let v = d.v_range.lerp(s);
                let a = catalog::position(&self.shape, [d.u_range.min, v]);
                let b = catalog::position(&self.shape, [d.u_range.max, v]);
                worst = worst.max((a - b).norm() * self.scale);
            }
            if d.periodic_v {
                let u = d.u_range.lerp(s);
                let a = catalog::position(&self.shape, [u, d.v_range.min]);
                let b = catalog::position(&self.shape, [u, d.v_range.max]);
                worst = worst.max((a - b).norm() * self.scale);
            }
        }
        worst
    }

    pub(crate) fn check_seams(&self, tol: f64) -> Result<()> {
        let m = self.seam_mismatch();
        if !(m <= tol * self.length_scale().max(1.0)) {
            return Err(Error::InvalidParameter {
                name: "domain".to_string(),
                reason: format!("periodic seam endpoints differ by {m}"),
            });
        }
        Ok(())
    }

    /// Unit vector normal to the surface at `p`, chosen as the normal part of
    /// the coordinate axis that is least tangent. Falls back to a nearby
    /// interior point when `p` is degenerate.
    pub fn unit_normal(&self, p: [f64; 2]) -> AmbientVec {
        let mut jet = self.jet_unchecked(p);
        if jet.is_degenerate() {
            let d = &self.domain;
            let dv = 1e-6 * d.v_range.len();
            let v = if p[1] - d.v_range.min < 0.5 * d.v_range.len() {
                p[1] + dv
            } else {
                p[1] - dv
            };
            jet = self.jet_unchecked([p[0], v]);
        }
        let g = jet.gram();
        let n = self.ambient_dim;
        let mut best = AmbientVec::axis(n, n - 1);
        let mut best_norm = -1.0;
        for k in 0..n {
            let e = AmbientVec::axis(n, k);
            let rhs = [e.dot(&jet.dx[0]), e.dot(&jet.dx[1])];
            let Some(c) = g.solve(rhs) else { continue };
            let perp = e - jet.dx[0] * c[0] - jet.dx[1] * c[1];
            let len = perp.norm();
            if len > best_norm {
                best_norm = len;
                best = perp * (1.0 / len);
            }
        }
        best
    }
}

/// Exact or finite-difference jet at `p`, after wrapping periodic
/// coordinates.
pub fn evaluate_jet(spec: &SurfaceSpec, p: [f64; 2]) -> Result<ImmersionJet> {
    if !spec.domain.contains(p) {
        return Err(Error::OutsideDomain { u: p[0], v: p[1] });
    }
    let jet = spec.jet_unchecked(p);
    if jet.is_degenerate() {
        return Err(Error::Degenerate { u: p[0], v: p[1] });
    }
    Ok(jet)
}
