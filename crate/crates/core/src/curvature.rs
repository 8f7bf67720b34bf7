//! Fundamental forms and radial quantities relative to a base point.


use crate::immersion::{ImmersionJet, SurfaceSpec};
use crate::linalg::{AmbientVec, Sym2};
use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// `|∇r|` below which `ν = ∇r/|∇r|` is not formed and a level is not
/// regular.
pub const REGULARITY_THRESHOLD: f64 = 0.05;

/// First and (vector-valued) second fundamental form at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalForms {
    pub g: Sym2,
    pub g_inv: Sym2,
    pub det_g: f64,
    /// `[A₁₁, A₁₂, A₂₂]`.
    pub a: [AmbientVec; 3],
    /// Unnormalized mean curvature vector `H = gⁱʲ A_ij`.
    pub h: AmbientVec,
    pub k: f64,
    pub normsq_a: f64,
}

impl FundamentalForms {
    #[inline]
    pub fn a_ij(&self, i: usize, j: usize) -> &AmbientVec {
        &self.a[i + j]
    }

    /// `A(y, y)` for a parameter-space vector `y`.
    pub fn a_quad(&self, y: [f64; 2]) -> AmbientVec {
        self.a[0] * (y[0] * y[0]) + self.a[1] * (2.0 * y[0] * y[1]) + self.a[2] * (y[1] * y[1])
    }

    #[inline]
    pub fn area_element(&self) -> f64 {
        self.det_g.sqrt()
    }
}

/// Fundamental forms from a jet. The tangential part of each `∂_i∂_j x` is
/// removed by solving the Gram system directly.
pub fn fundamental_forms(jet: &ImmersionJet) -> Result<FundamentalForms> {
    let degenerate = || Error::Degenerate {
        u: jet.p[0],
        v: jet.p[1],
    };
    if jet.is_degenerate() {
        return Err(degenerate());
    }
    let g = jet.gram();
    let det_g = g.det();
    let g_inv = g.inverse().ok_or_else(degenerate)?;
    let mut a = jet.ddx;
    for ai in a.iter_mut() {
        let rhs = [ai.dot(&jet.dx[0]), ai.dot(&jet.dx[1])];
        let c = g.solve(rhs).ok_or_else(degenerate)?;
        *ai = *ai - jet.dx[0] * c[0] - jet.dx[1] * c[1];
    }
    let h = a[0] * g_inv.a + a[1] * (2.0 * g_inv.b) + a[2] * g_inv.c;
    let k = (a[0].dot(&a[2]) - a[1].norm_sq()) / det_g;
    let mut normsq_a = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    normsq_a += g_inv.at(i, p) * g_inv.at(j, q) * a[i + j].dot(&a[p + q]);
                }
            }
        }
    }
    Ok(FundamentalForms {
        g,
        g_inv,
        det_g,
        a,
        h,
        k,
        normsq_a,
    })
}

/// Extrinsic distance to `x0` and its tangential and normal gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialFrame {
    pub x0: AmbientVec,
    pub r: f64,
    /// Covector `∂_i r`.
    pub dr: [f64; 2],
    /// Vector `∇r = g⁻¹ dr` in parameter coordinates.
    pub grad_r: [f64; 2],
    pub grad_r_sq: f64,
    pub grad_perp_sq: f64,
    pub x_perp: AmbientVec,
    pub pairing_xh: f64,
    /// `⟨A(ν,ν), ∇⊥r⟩`, present when `|∇r| ≥ REGULARITY_THRESHOLD`.
    pub nu_term: Option<f64>,
}

impl RadialFrame {
    #[inline]
    pub fn grad_r_norm(&self) -> f64 {
        self.grad_r_sq.sqrt()
    }

    pub fn is_regular(&self) -> bool {
        self.nu_term.is_some()
    }

    /// `(1/|∇r|)(1/r + ⟨H − A(ν,ν), ∇⊥r⟩)`, the geodesic curvature of the
    /// level curve through this point.
    pub fn geodesic_curvature(&self) -> Option<f64> {
        let nu = self.nu_term?;
        Some((1.0 / self.r + self.pairing_xh / self.r - nu) / self.grad_r_norm())
    }
}

pub fn radial_frame(jet: &ImmersionJet, forms: &FundamentalForms, x0: &AmbientVec) -> Result<RadialFrame> {
    let x = jet.x - *x0;
    let r = x.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::BasePointOnSurface {
            u: jet.p[0],
            v: jet.p[1],
        });
    }
    let t = [x.dot(&jet.dx[0]), x.dot(&jet.dx[1])];
    let c = forms.g.solve(t).ok_or(Error::Degenerate {
        u: jet.p[0],
        v: jet.p[1],
    })?;
    let x_perp = x - jet.dx[0] * c[0] - jet.dx[1] * c[1];
    let r2 = r * r;
    // Both parts are computed directly and the larger one is taken as the
    // complement of the smaller, so that they sum to one exactly.
    let tan = ((t[0] * c[0] + t[1] * c[1]) / r2).clamp(0.0, 1.0);
    let nor = (x_perp.norm_sq() / r2).clamp(0.0, 1.0);
    let (grad_r_sq, grad_perp_sq) = if tan <= nor { (tan, 1.0 - tan) } else { (1.0 - nor, nor) };
    let grad_r = [c[0] / r, c[1] / r];
    let pairing_xh = x_perp.dot(&forms.h);
    let nu_term = if grad_r_sq.sqrt() >= REGULARITY_THRESHOLD {
        let s = 1.0 / grad_r_sq.sqrt();
        let nu = [grad_r[0] * s, grad_r[1] * s];
        Some(forms.a_quad(nu).dot(&x_perp) / r)
    } else {
        None
    };
    Ok(RadialFrame {
        x0: *x0,
        r,
        dr: [t[0] / r, t[1] / r],
        grad_r,
        grad_r_sq,
        grad_perp_sq,
        x_perp,
        pairing_xh,
        nu_term,
    })
}

/// Default Brioschi step: the spacing of a 1024² grid over the domain.
pub fn default_brioschi_step(spec: &SurfaceSpec) -> [f64; 2] {
    [spec.domain.u_range.len() / 1024.0, spec.domain.v_range.len() / 1024.0]
}

/// Gauss curvature from the metric alone (Brioschi's formula), with
/// fourth-order differences of `E, F, G` at the default step.
pub fn gauss_curvature_intrinsic(spec: &SurfaceSpec, p: [f64; 2]) -> Result<f64> {
    gauss_curvature_intrinsic_with_step(spec, p, default_brioschi_step(spec))
}

pub fn gauss_curvature_intrinsic_with_step(spec: &SurfaceSpec, p: [f64; 2], h: [f64; 2]) -> Result<f64> {
    let d = &spec.domain;
    let strict = |x: f64, lo: f64, hi: f64, periodic: bool| periodic || (x >= lo && x <= hi);
    let sample = |du: i32, dv: i32| -> Result<Sym2> {
        let q = [p[0] + du as f64 * h[0], p[1] + dv as f64 * h[1]];
        let ok = strict(q[0], d.u_range.min, d.u_range.max, d.periodic_u)
            && strict(q[1], d.v_range.min, d.v_range.max, d.periodic_v);
        let jet = spec.jet_unchecked(q);
        if !ok || jet.is_degenerate() {
            return Err(Error::InsufficientNeighbors { u: p[0], v: p[1] });
        }
        Ok(jet.gram())
    };
    let mut grid = [[Sym2::IDENTITY; 5]; 5];
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = sample(a as i32 - 2, b as i32 - 2)?;
        }
    }
    const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let comp = |m: &Sym2, k: usize| match k {
        0 => m.a,
        1 => m.b,
        _ => m.c,
    };
    let du = |k: usize| (0..5).map(|a| D1[a] * comp(&grid[a][2], k)).sum::<f64>() / (12.0 * h[0]);
    let dv = |k: usize| (0..5).map(|b| D1[b] * comp(&grid[2][b], k)).sum::<f64>() / (12.0 * h[1]);
    let duu = |k: usize| (0..5).map(|a| D2[a] * comp(&grid[a][2], k)).sum::<f64>() / (12.0 * h[0] * h[0]);
    let dvv = |k: usize| (0..5).map(|b| D2[b] * comp(&grid[2][b], k)).sum::<f64>() / (12.0 * h[1] * h[1]);
    let duv = |k: usize| {
        let mut s = 0.0;
        for a in 0..5 {
            for b in 0..5 {
                s += D1[a] * D1[b] * comp(&grid[a][b], k);
            }
        }
        s / (144.0 * h[0] * h[1])
    };
    let g = grid[2][2];
    let (e, f, gg) = (g.a, g.b, g.c);
    let (e_u, e_v, f_u, f_v, g_u, g_v) = (du(0), dv(0), du(1), dv(1), du(2), dv(2));
    let (e_vv, f_uv, g_uu) = (dvv(0), duv(1), duu(2));
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m1 = [
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, gg],
    ];
    let m2 = [[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, gg]];
    let w = e * gg - f * f;
    Ok((det3(m1) - det3(m2)) / (w * w))
}

/// Derivatives `∂_k g_ij` from the jet, indexed `[k][0..3]` as `(a, b, c)`.
fn metric_derivatives(jet: &ImmersionJet) -> [Sym2; 2] {
    let mut out = [Sym2::IDENTITY; 2];
    for (k, o) in out.iter_mut().enumerate() {
        let d = |i: usize, j: usize| jet.second(k, i).dot(&jet.dx[j]) + jet.dx[i].dot(jet.second(k, j));
        *o = Sym2::new(d(0, 0), d(0, 1), d(1, 1));
    }
    out
}

/// Geodesic acceleration `-Γ^k_ij ẏ^i ẏ^j` at `p`.
fn geodesic_accel(spec: &SurfaceSpec, p: [f64; 2], y: [f64; 2]) -> Result<[f64; 2]> {
    if !spec.domain.contains(p) {
        return Err(Error::GeodesicLeftDomain);
    }
    let jet = spec.jet_unchecked(p);
    if jet.is_degenerate() {
        return Err(Error::Degenerate { u: p[0], v: p[1] });
    }
    let g = jet.gram();
    let dg = metric_derivatives(&jet);
    // Lowered Christoffel contraction Γ_{l,ij} ẏ^i ẏ^j.
    let mut low = [0.0; 2];
    for (l, lo) in low.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let c = dg[i].at(j, l) + dg[j].at(i, l) - dg[l].at(i, j);
                s += 0.5 * c * y[i] * y[j];
            }
        }
        *lo = s;
    }
    let up = g.solve(low).ok_or(Error::Degenerate { u: p[0], v: p[1] })?;
    Ok([-up[0], -up[1]])
}

/// Point at arclength `s` along the geodesic with unit initial velocity `e`.
fn geodesic_point(spec: &SurfaceSpec, p: [f64; 2], e: [f64; 2], s: f64) -> Result<[f64; 2]> {
    const SUBSTEPS: usize = 4;
    let h = s / SUBSTEPS as f64;
    let (mut q, mut y) = (p, e);
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * b[0], a[1] + t * b[1]];
    for _ in 0..SUBSTEPS {
        let k1q = y;
        let k1y = geodesic_accel(spec, q, y)?;
        let k2q = add(y, k1y, 0.5 * h);
        let k2y = geodesic_accel(spec, add(q, k1q, 0.5 * h), k2q)?;
        let k3q = add(y, k2y, 0.5 * h);
        let k3y = geodesic_accel(spec, add(q, k2q, 0.5 * h), k3q)?;
        let k4q = add(y, k3y, h);
        let k4y = geodesic_accel(spec, add(q, k3q, h), k4q)?;
        for i in 0..2 {
            q[i] += h / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
    }
    if !spec.domain.contains(q) {
        return Err(Error::GeodesicLeftDomain);
    }
    Ok(q)
}

/// `|∇²r(e,e) − [(1 − ⟨e,∇r⟩²)/r + ⟨A(e,e), ∇⊥r⟩]|` at `p`, with the Hessian
/// taken as the second derivative of `r` along the geodesic through `p` in
/// direction `e` (a parameter-space vector, normalized here).
pub fn hessian_identity_residual(spec: &SurfaceSpec, p: [f64; 2], x0: &AmbientVec, e: [f64; 2]) -> Result<f64> {
    hessian_identity_residual_with_step(spec, p, x0, e, 1e-3)
}

pub fn hessian_identity_residual_with_step(
    spec: &SurfaceSpec,
    p: [f64; 2],
    x0: &AmbientVec,
    e: [f64; 2],
    h: f64,
) -> Result<f64> {
    let jet = crate::immersion::evaluate_jet(spec, p)?;
    let forms = fundamental_forms(&jet)?;
    let frame = radial_frame(&jet, &forms, x0)?;
    let len = forms.g.quad(e).sqrt();
    if !(len > 0.0) {
        return Err(Error::InvalidInput("direction must be a nonzero tangent vector".into()));
    }
    let e = [e[0] / len, e[1] / len];
    let r_at = |s: f64| -> Result<f64> {
        let q = geodesic_point(spec, p, e, s)?;
        Ok((spec.position(q) - *x0).norm())
    };
    let (rp2, rp1, rm1, rm2) = (r_at(2.0 * h)?, r_at(h)?, r_at(-h)?, r_at(-2.0 * h)?);
    let lhs = (-(rp2 + rm2) + 16.0 * (rp1 + rm1) - 30.0 * frame.r) / (12.0 * h * h);
    let dre = frame.dr[0] * e[0] + frame.dr[1] * e[1];
    let rhs = (1.0 - dre * dre) / frame.r + forms.a_quad(e).dot(&frame.x_perp) / frame.r;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{catalog_surface, evaluate_jet, CATALOG};

    fn forms_at(name: &str, p: [f64; 2]) -> (ImmersionJet, FundamentalForms) {
        let s = catalog_surface(name, &[]).unwrap();
        let j = evaluate_jet(&s, p).unwrap();
        (j, fundamental_forms(&j).unwrap())
    }

    #[test]
    fn catenoid_waist() {
        let (_, f) = forms_at("catenoid", [0.0, 0.0]);
        assert!((f.g.a - 1.0).abs() < 1e-15 && f.g.b.abs() < 1e-15 && (f.g.c - 1.0).abs() < 1e-15);
        assert!((f.k + 1.0).abs() < 1e-14);
        assert!(f.h.norm() < 1e-14);
    }

    #[test]
    fn catenoid_matches_closed_form_curvature() {
        for v in [-2.0, -0.5, 0.7, 2.5] {
            let (_, f) = forms_at("catenoid", [1.0, v]);
            let sech: f64 = 1.0 / f64::cosh(v);
            assert!((f.k + sech.powi(4)).abs() < 1e-12 * sech.powi(4).max(1e-3));
        }
    }

    #[test]
    fn unit_sphere_forms() {
        for p in [[0.3, 0.4], [2.0, 1.5], [5.0, 2.9]] {
            let (j, f) = forms_at("sphere", p);
            assert!((f.k - 1.0).abs() < 1e-12);
            assert!((f.h.norm() - 2.0).abs() < 1e-12);
            assert!((f.normsq_a - 2.0).abs() < 1e-12);
            assert!((f.h + j.x * 2.0).max_abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_torus_forms() {
        for p in [[0.3, 0.4], [4.0, 1.0]] {
            let (_, f) = forms_at("clifford_torus", p);
            assert!(f.k.abs() < 1e-14);
            assert!((f.h.norm_sq() - 2.0).abs() < 1e-12);
            assert!((f.normsq_a - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enneper_curvature_from_conformal_factor() {
        for p in [[0.0, 0.0], [0.5, -1.0], [1.5, 1.2]] {
            let (_, f) = forms_at("enneper", p);
            let w = 1.0 + p[0] * p[0] + p[1] * p[1];
            let k = -4.0 / w.powi(4);
            assert!((f.k - k).abs() < 1e-12 * k.abs());
            assert!(f.h.norm() < 1e-12 * w * w);
            assert!((f.normsq_a + 2.0 * f.k).abs() < 1e-8 * f.k.abs());
        }
    }

    #[test]
    fn a_is_normal_and_gauss_equation_holds() {
        for name in CATALOG {
            let (j, f) = forms_at(name, [0.4, 0.9]);
            for a in f.a {
                for t in j.dx {
                    assert!(a.dot(&t).abs() <= 1e-9 * a.norm().max(1.0) * t.norm());
                }
            }
            let gauss = f.a[0].dot(&f.a[2]) - f.a[1].norm_sq();
            assert!((f.k * f.det_g - gauss).abs() <= 1e-14 * gauss.abs().max(1e-300));
            assert!(f.normsq_a >= f.h.norm_sq() / 2.0 - 1e-12);
        }
    }

    #[test]
    fn brioschi_matches_gauss_equation() {
        let pts = [[0.4, 0.9], [1.2, -0.6], [1.6, 0.3], [0.1, 1.4]];
        for name in CATALOG {
            let s = catalog_surface(name, &[]).unwrap();
            for p in pts {
                let p = [p[0], p[1].abs() + 0.3];
                let (_, f) = forms_at(name, p);
                let k = gauss_curvature_intrinsic(&s, p).unwrap();
                let tol = 1e-5 * f.k.abs().max(1e-3);
                assert!((k - f.k).abs() <= tol, "{name} at {p:?}: {k} vs {}", f.k);
            }
        }
    }

    #[test]
    fn brioschi_reference_values() {
        let cat = catalog_surface("catenoid", &[]).unwrap();
        assert!((gauss_curvature_intrinsic(&cat, [0.5, 0.0]).unwrap() + 1.0).abs() < 1e-5);
        let enn = catalog_surface("enneper", &[]).unwrap();
        assert!((gauss_curvature_intrinsic(&enn, [0.0, 0.0]).unwrap() + 4.0).abs() < 1e-4);
        let plane = catalog_surface("plane", &[]).unwrap();
        assert!(gauss_curvature_intrinsic(&plane, [1.0, 2.0]).unwrap().abs() < 1e-12);
        assert!(matches!(
            gauss_curvature_intrinsic(&plane, [10.0, 2.0]),
            Err(Error::InsufficientNeighbors { .. })
        ));
    }

    #[test]
    fn plane_radial_frame() {
        let s = catalog_surface("plane", &[]).unwrap();
        let j = evaluate_jet(&s, [1.0, -2.0]).unwrap();
        let f = fundamental_forms(&j).unwrap();
        let rf = radial_frame(&j, &f, &AmbientVec::zeros(3)).unwrap();
        assert_eq!(rf.grad_r_sq, 1.0);
        assert_eq!(rf.grad_perp_sq, 0.0);
        assert_eq!(rf.x_perp.max_abs(), 0.0);
        assert_eq!(rf.pairing_xh, 0.0);
    }

    #[test]
    fn sphere_radial_frame_from_north_pole() {
        let s = catalog_surface("sphere", &[]).unwrap();
        let x0 = AmbientVec::from_slice(&[0.0, 0.0, 1.0]);
        for v in [0.3, 1.0, 2.0, 2.8] {
            let j = evaluate_jet(&s, [0.7, v]).unwrap();
            let f = fundamental_forms(&j).unwrap();
            let rf = radial_frame(&j, &f, &x0).unwrap();
            let r = rf.r;
            assert!((rf.grad_perp_sq - r * r / 4.0).abs() < 1e-12);
            assert!((rf.pairing_xh + r * r).abs() < 1e-12);
            assert!((rf.grad_r_sq + rf.grad_perp_sq - 1.0).abs() <= 1e-12);
            assert!((rf.x_perp.norm() - r * rf.grad_perp_sq.sqrt()).abs() < 1e-9 * r);
            let kg = rf.geodesic_curvature().unwrap();
            assert!((kg - v.cos() / v.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn catenoid_gradient_is_along_v() {
        let s = catalog_surface("catenoid", &[]).unwrap();
        let j = evaluate_jet(&s, [0.0, 1.2]).unwrap();
        let f = fundamental_forms(&j).unwrap();
        let rf = radial_frame(&j, &f, &AmbientVec::zeros(3)).unwrap();
        assert!(rf.dr[0].abs() < 1e-15 && rf.dr[1] > 0.0);
    }

    #[test]
    fn base_point_on_surface_is_an_error() {
        let s = catalog_surface("plane", &[]).unwrap();
        let j = evaluate_jet(&s, [0.0, 0.0]).unwrap();
        let f = fundamental_forms(&j).unwrap();
        assert!(matches!(
            radial_frame(&j, &f, &AmbientVec::zeros(3)),
            Err(Error::BasePointOnSurface { .. })
        ));
    }

    #[test]
    fn hessian_identity_examples() {
        let plane = catalog_surface("plane", &[]).unwrap();
        let x0 = AmbientVec::from_slice(&[0.1, 0.2, 0.0]);
        for e in [[1.0, 0.0], [0.3, -0.8]] {
            let r = hessian_identity_residual(&plane, [1.0, 0.5], &x0, e).unwrap();
            assert!(r < 1e-8, "plane {r}");
        }
        let sphere = catalog_surface("sphere", &[]).unwrap();
        let north = AmbientVec::from_slice(&[0.0, 0.0, 1.0]);
        let r = hessian_identity_residual(&sphere, [0.4, 1.0], &north, [1.0, 0.0]).unwrap();
        assert!(r < 1e-6, "sphere {r}");
        let cat = catalog_surface("catenoid", &[]).unwrap();
        let origin = AmbientVec::zeros(3);
        let r = hessian_identity_residual(&cat, [0.0, 1.0], &origin, [1.0, 0.0]).unwrap();
        assert!(r < 1e-5, "catenoid {r}");
        let r = hessian_identity_residual(&cat, [0.3, 0.5], &origin, [0.6, 0.8]).unwrap();
        assert!(r < 1e-5, "catenoid oblique {r}");
    }

    #[test]
    fn geodesic_leaving_domain_is_reported() {
        let plane = catalog_surface("plane", &[("L", 1.0)]).unwrap();
        let x0 = AmbientVec::from_slice(&[0.0, 0.0, 1.0]);
        assert!(matches!(
            hessian_identity_residual_with_step(&plane, [0.999, 0.0], &x0, [1.0, 0.0], 1e-2),
            Err(Error::GeodesicLeftDomain)
        ));
    }
}
