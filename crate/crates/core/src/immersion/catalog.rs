//! Classical test surfaces with exact jets.
//!
//! Every entry accepts `scale` (default 1), which multiplies the map.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};


use super::{ImmersionJet, Interval, JetMode, ParamDomain, Shape, SurfaceSpec};
use crate::linalg::AmbientVec;
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub const CATALOG: [&str; 7] = [
    "plane",
    "sphere",
    "catenoid",
    "enneper",
    "helicoid",
    "graph_paraboloid",
    "clifford_torus",
];

fn v3(a: f64, b: f64, c: f64) -> AmbientVec {
    AmbientVec::from_slice(&[a, b, c])
}

fn v4(a: f64, b: f64, c: f64, d: f64) -> AmbientVec {
    AmbientVec::from_slice(&[a, b, c, d])
}

pub(crate) fn position(shape: &Shape, p: [f64; 2]) -> AmbientVec {
    let [u, v] = p;
    match shape {
        Shape::Plane => v3(u, v, 0.0),
        Shape::Sphere { radius } => {
            let (sv, cv) = v.sin_cos();
            let (su, cu) = u.sin_cos();
            v3(sv * cu, sv * su, cv) * *radius
        }
        Shape::Catenoid => {
            let ch = v.cosh();
            v3(ch * u.cos(), ch * u.sin(), v)
        }
        Shape::Enneper => v3(
            u - u * u * u / 3.0 + u * v * v,
            -(v - v * v * v / 3.0 + u * u * v),
            u * u - v * v,
        ),
        Shape::Helicoid => v3(v * u.cos(), v * u.sin(), u),
        Shape::Paraboloid => v3(u, v, 0.5 * (u * u + v * v)),
        Shape::CliffordTorus => v4(u.cos(), u.sin(), v.cos(), v.sin()),
        Shape::User { components, values } => {
            let mut vars = Vec::with_capacity(2 + values.len());
            vars.push(u);
            vars.push(v);
            vars.extend_from_slice(values);
            let mut x = AmbientVec::zeros(components.len());
            for (k, e) in components.iter().enumerate() {
                x[k] = e.eval(&vars);
            }
            x
        }
    }
}

/// Exact jet of an unscaled catalog shape.
pub(crate) fn jet(shape: &Shape, p: [f64; 2]) -> ImmersionJet {
    let [u, v] = p;
    let x = position(shape, p);
    let (dx, ddx) = match shape {
        Shape::Plane => {
            let z = v3(0.0, 0.0, 0.0);
            ([v3(1.0, 0.0, 0.0), v3(0.0, 1.0, 0.0)], [z, z, z])
        }
        Shape::Sphere { radius } => {
            let (sv, cv) = v.sin_cos();
            let (su, cu) = u.sin_cos();
            let r = *radius;
            (
                [v3(-sv * su, sv * cu, 0.0) * r, v3(cv * cu, cv * su, -sv) * r],
                [
                    v3(-sv * cu, -sv * su, 0.0) * r,
                    v3(-cv * su, cv * cu, 0.0) * r,
                    v3(-sv * cu, -sv * su, -cv) * r,
                ],
            )
        }
        Shape::Catenoid => {
            let (ch, sh) = (v.cosh(), v.sinh());
            let (su, cu) = u.sin_cos();
            (
                [v3(-ch * su, ch * cu, 0.0), v3(sh * cu, sh * su, 1.0)],
                [
                    v3(-ch * cu, -ch * su, 0.0),
                    v3(-sh * su, sh * cu, 0.0),
                    v3(ch * cu, ch * su, 0.0),
                ],
            )
        }
        Shape::Enneper => (
            [
                v3(1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u),
                v3(2.0 * u * v, -1.0 + v * v - u * u, -2.0 * v),
            ],
            [
                v3(-2.0 * u, -2.0 * v, 2.0),
                v3(2.0 * v, -2.0 * u, 0.0),
                v3(2.0 * u, 2.0 * v, -2.0),
            ],
        ),
        Shape::Helicoid => {
            let (su, cu) = u.sin_cos();
            (
                [v3(-v * su, v * cu, 1.0), v3(cu, su, 0.0)],
                [
                    v3(-v * cu, -v * su, 0.0),
                    v3(-su, cu, 0.0),
                    v3(0.0, 0.0, 0.0),
                ],
            )
        }
        Shape::Paraboloid => (
            [v3(1.0, 0.0, u), v3(0.0, 1.0, v)],
            [v3(0.0, 0.0, 1.0), v3(0.0, 0.0, 0.0), v3(0.0, 0.0, 1.0)],
        ),
        Shape::CliffordTorus => {
            let (su, cu) = u.sin_cos();
            let (sv, cv) = v.sin_cos();
            (
                [v4(-su, cu, 0.0, 0.0), v4(0.0, 0.0, -sv, cv)],
                [
                    v4(-cu, -su, 0.0, 0.0),
                    v4(0.0, 0.0, 0.0, 0.0),
                    v4(0.0, 0.0, -cv, -sv),
                ],
            )
        }
        Shape::User { .. } => unreachable!("user surfaces have no analytic jet"),
    };
    ImmersionJet { p, x, dx, ddx }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

/// Builds a catalog surface. Recognized parameters:
///
/// | name | params (defaults) |
/// |---|---|
/// | plane | `L` = 10 (half-width) |
/// | sphere | `R` = 1 |
/// | catenoid | `V` = 3 (height half-range) |
/// | enneper | `L` = 2 |
/// | helicoid | `U` = 10, `W` = 10 |
/// | graph_paraboloid | `L` = 10 |
/// | clifford_torus | none |
///
/// plus `scale` = 1 for all.
pub fn catalog_surface(name: &str, params: &[(&str, f64)]) -> Result<SurfaceSpec> {
    let allowed: &[(&str, f64)] = match name {
        "plane" => &[("L", 10.0)],
        "sphere" => &[("R", 1.0)],
        "catenoid" => &[("V", 5.6)],
        "enneper" => &[("L", 10.5)],
        "helicoid" => &[("U", 10.0), ("W", 10.0)],
        "graph_paraboloid" => &[("L", 10.0)],
        "clifford_torus" => &[],
        _ => return Err(Error::UnknownSurface(name.to_string())),
    };
    let mut values: Vec<(&str, f64)> = allowed.to_vec();
    values.push(("scale", 1.0));
    for (k, v) in params {
        match values.iter_mut().find(|(n, _)| n == k) {
            Some(slot) => slot.1 = positive(k, *v)?,
            None => {
                return Err(Error::InvalidParameter {
                    name: k.to_string(),
                    reason: format!("not a parameter of `{name}`"),
                })
            }
        }
    }
    let get = |k: &str| values.iter().find(|(n, _)| *n == k).map(|(_, v)| *v).unwrap();
    let sym = |a: f64| Interval::new(-a, a);
    let circle = Interval::new(0.0, TAU);

    let (shape, domain, dim, chi, total_k) = match name {
        "plane" => {
            let l = get("L");
            (Shape::Plane, ParamDomain::rect(sym(l), sym(l))?, 3, 1, Some(0.0))
        }
        "sphere" => {
            let d = ParamDomain::rect(circle, Interval::new(0.0, PI))?
                .with_periodic(true, false)
                .with_collapsed_v(true, true);
            (Shape::Sphere { radius: get("R") }, d, 3, 2, Some(2.0 * TAU))
        }
        "catenoid" => {
            let d = ParamDomain::rect(circle, sym(get("V")))?.with_periodic(true, false);
            (Shape::Catenoid, d, 3, 0, Some(-2.0 * TAU))
        }
        "enneper" => {
            let l = get("L");
            (Shape::Enneper, ParamDomain::rect(sym(l), sym(l))?, 3, 1, Some(-2.0 * TAU))
        }
        "helicoid" => (
            Shape::Helicoid,
            ParamDomain::rect(sym(get("U")), sym(get("W")))?,
            3,
            1,
            None,
        ),
        "graph_paraboloid" => {
            let l = get("L");
            (Shape::Paraboloid, ParamDomain::rect(sym(l), sym(l))?, 3, 1, Some(TAU))
        }
        _ => {
            let d = ParamDomain::rect(circle, circle)?.with_periodic(true, true);
            (Shape::CliffordTorus, d, 4, 0, Some(0.0))
        }
    };

    let spec = SurfaceSpec {
        name: name.to_string(),
        params: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        domain,
        ambient_dim: dim,
        euler_char_full: chi,
        jet_mode: JetMode::Analytic,
        total_curvature: total_k,
        shape,
        scale: get("scale"),
    };
    spec.check_seams(1e-9)?;
    Ok(spec)
}

/// `∫K` over the truncated chart, in closed form where one exists.
pub fn truncated_total_curvature(spec: &SurfaceSpec) -> Option<f64> {
    match spec.shape {
        Shape::Plane | Shape::CliffordTorus => Some(0.0),
        Shape::Sphere { .. } => Some(2.0 * TAU),
        Shape::Catenoid => Some(-2.0 * TAU * spec.domain.v_range.max.tanh()),
        _ => None,
    }
}
