//! The boundary and variation identities, monotone quantities and the
//! area-growth limit, each turned into a residual or a report.

mod defect;
mod tail;

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::immersion::SurfaceSpec;
use crate::linalg::{AmbientVec, Sym2};
use crate::sublevel::{
    boundary_integral, build_grid, extract_level, slice_level, sublevel_region, BasePointPolicy,
    BoundaryIntegrand, CurvePoint, GeometryGrid, GridOptions, LevelCurve, LevelSlice, RegionIntegrals,
};
use crate::{Error, Result};

pub use defect::{
    chern_osserman_defect, hypothesis_diagnostics, quadratic_growth_certificate, small_energy_topology,
    DefectReport, GrowthCertificate, DEFECT_TOL, COHN_VOSSEN_TOL, INTEGER_TOL, HypothesisReport, SmallEnergyReport, Trend,
};
pub use tail::{quadratic_fit, tail_extrapolate, QuadraticFit, TailFit, TailVerdict};

/// Default slack for the monotonicity check, relative to `1 + |u|`.
pub const MONOTONICITY_SLACK: f64 = 1e-6;

/// Boundary integrals of one level, named after their integrands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryValues {
    pub length: f64,
    pub inv_grad_r: f64,
    pub grad_r: f64,
    pub perp_sq_over_grad_r: f64,
    pub xperp_h_over_grad_r: f64,
    pub xperp_h_abs_over_grad_r: f64,
    pub h2_over_grad_r: f64,
    pub a2_over_grad_r: f64,
    pub nu_term_over_grad_r: f64,
    pub geodesic_curvature: f64,
}

impl BoundaryValues {
    const NAN: BoundaryValues = BoundaryValues {
        length: f64::NAN,
        inv_grad_r: f64::NAN,
        grad_r: f64::NAN,
        perp_sq_over_grad_r: f64::NAN,
        xperp_h_over_grad_r: f64::NAN,
        xperp_h_abs_over_grad_r: f64::NAN,
        h2_over_grad_r: f64::NAN,
        a2_over_grad_r: f64::NAN,
        nu_term_over_grad_r: f64::NAN,
        geodesic_curvature: f64::NAN,
    };

    pub fn of(level: &LevelCurve) -> Result<BoundaryValues> {
        let b = |f| boundary_integral(level, f);
        use BoundaryIntegrand as I;
        Ok(BoundaryValues {
            length: b(I::One)?,
            inv_grad_r: b(I::InvGradR)?,
            grad_r: b(I::GradR)?,
            perp_sq_over_grad_r: b(I::PerpSqOverGrad)?,
            xperp_h_over_grad_r: b(I::XperpHOverGrad)?,
            xperp_h_abs_over_grad_r: b(I::XperpHAbsOverGrad)?,
            h2_over_grad_r: b(I::H2OverGrad)?,
            a2_over_grad_r: b(I::A2OverGrad)?,
            nu_term_over_grad_r: b(I::NuTermOverGrad)?,
            geodesic_curvature: b(I::GeodesicCurvature)?,
        })
    }
}

/// Everything measured at one level. Boundary-derived fields are NaN on
/// non-regular levels.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub t: f64,
    pub regular: bool,
    pub min_grad_r: f64,
    pub v: f64,
    pub vprime_coarea: f64,
    pub chi_mt: i64,
    pub int_k: f64,
    pub int_h2: f64,
    pub int_a2: f64,
    pub int_xperp_h: f64,
    pub int_xperp_h_abs: f64,
    pub boundary: BoundaryValues,
    pub u1: f64,
    pub u2: f64,
    pub prop22_residual: f64,
    pub prop23_residual: f64,
    /// Residual of `t∫|∇r| = 2v + ∫⟨x⊥,H⟩`.
    pub eq24_residual: f64,
    /// `|(∫K + ∫k_g)/2π − χ(M_t)|`.
    pub gauss_bonnet_distance: f64,
}

impl LevelRecord {
    pub fn skipped_nonregular(&self) -> bool {
        !self.regular
    }

    pub fn from_slice(slice: &LevelSlice) -> Result<LevelRecord> {
        let c = &slice.curve;
        let reg = &slice.region;
        let i = &reg.integrals;
        let t = reg.t;
        let (u1, u2) = u_values(t, i);
        let mut rec = LevelRecord {
            t,
            regular: c.regular,
            min_grad_r: c.min_grad_r,
            v: reg.area,
            vprime_coarea: f64::NAN,
            chi_mt: reg.euler_char,
            int_k: i.k,
            int_h2: i.h2,
            int_a2: i.a2,
            int_xperp_h: i.xperp_h,
            int_xperp_h_abs: i.xperp_h_abs,
            boundary: BoundaryValues::NAN,
            u1,
            u2,
            prop22_residual: f64::NAN,
            prop23_residual: f64::NAN,
            eq24_residual: f64::NAN,
            gauss_bonnet_distance: f64::NAN,
        };
        if !c.regular {
            return Ok(rec);
        }
        let b = BoundaryValues::of(c)?;
        rec.boundary = b;
        rec.vprime_coarea = b.inv_grad_r;
        rec.prop22_residual = prop22(t, reg.euler_char, i, &b).residual;
        rec.prop23_residual = prop23(t, i, &b).residual;
        rec.eq24_residual = eq24(t, i, &b).residual;
        rec.gauss_bonnet_distance = ((i.k + b.geodesic_curvature) / TAU - reg.euler_char as f64).abs();
        Ok(rec)
    }
}

/// `u₁ = v/t² − ∫|x⊥||H|/(2t²) + ∫|H|²/16` and
/// `u₂ = v/t² − ∫|x⊥||H|/t² + ∫|H|²/4`.
pub fn u_values(t: f64, i: &RegionIntegrals) -> (f64, f64) {
    let t2 = t * t;
    let u1 = i.area / t2 - i.xperp_h_abs / (2.0 * t2) + i.h2 / 16.0;
    let u2 = i.area / t2 - i.xperp_h_abs / t2 + i.h2 / 4.0;
    (u1, u2)
}

/// Two sides of an identity and their normalized difference
/// `|lhs − rhs| / (1 + |lhs|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IdentityResidual {
    fn new(lhs: f64, rhs: f64) -> Self {
        IdentityResidual {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / (1.0 + lhs.abs()),
        }
    }
}

fn prop22(t: f64, chi: i64, i: &RegionIntegrals, b: &BoundaryValues) -> IdentityResidual {
    let lhs = TAU * chi as f64 - i.k;
    let rhs = (b.inv_grad_r + b.xperp_h_over_grad_r) / t - b.nu_term_over_grad_r;
    IdentityResidual::new(lhs, rhs)
}

fn prop23(t: f64, i: &RegionIntegrals, b: &BoundaryValues) -> IdentityResidual {
    let lhs = t * b.inv_grad_r;
    let rhs = t * b.perp_sq_over_grad_r + 2.0 * i.area + i.xperp_h;
    IdentityResidual::new(lhs, rhs)
}

fn eq24(t: f64, i: &RegionIntegrals, b: &BoundaryValues) -> IdentityResidual {
    IdentityResidual::new(t * b.grad_r, 2.0 * i.area + i.xperp_h)
}

fn regular_slice(grid: &GeometryGrid, t: f64) -> Result<LevelSlice> {
    let s = slice_level(grid, t)?;
    if !s.curve.regular {
        return Err(Error::NonRegular {
            t,
            min_grad_r: s.curve.min_grad_r,
        });
    }
    Ok(s)
}

/// `2πχ(M_t) − ∫K` against `(1/t)(v' + ∫⟨x⊥,H⟩/|∇r|) − ∫⟨A(ν,ν),∇⊥r⟩/|∇r|`.
pub fn gauss_bonnet_boundary_identity(grid: &GeometryGrid, t: f64) -> Result<IdentityResidual> {
    let s = regular_slice(grid, t)?;
    let b = BoundaryValues::of(&s.curve)?;
    Ok(prop22(t, s.region.euler_char, &s.region.integrals, &b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstVariation {
    /// `t v'` against `t∫|∇⊥r|²/|∇r| + 2v + ∫⟨x⊥,H⟩`.
    pub identity: IdentityResidual,
    /// `t∫|∇r|` against `2v + ∫⟨x⊥,H⟩`.
    pub divergence: IdentityResidual,
}

pub fn first_variation_identity(grid: &GeometryGrid, t: f64) -> Result<FirstVariation> {
    let s = regular_slice(grid, t)?;
    let b = BoundaryValues::of(&s.curve)?;
    let i = &s.region.integrals;
    Ok(FirstVariation {
        identity: prop23(t, i, &b),
        divergence: eq24(t, i, &b),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCurvatureReport {
    pub max_residual: f64,
    pub samples: usize,
    /// Worst sample: finite-difference and closed-form values.
    pub worst: (f64, f64),
}

/// Geodesic curvature of `∂M_t` from the chain geometry, against the
/// closed form `(1/|∇r|)(1/r + ⟨H − A(ν,ν), ∇⊥r⟩)`.
///
/// At each sample the curvature vector comes from circles through the point
/// and its neighbours `σ` and `σ/2` away in arclength, extrapolated to zero
/// step; its tangential part is
/// paired with the outward conormal `ν`.
pub fn geodesic_curvature_identity(grid: &GeometryGrid, t: f64, sample_count: usize) -> Result<GeodesicCurvatureReport> {
    let curve = extract_level(grid, t)?;
    if !curve.regular {
        return Err(Error::NonRegular {
            t,
            min_grad_r: curve.min_grad_r,
        });
    }
    let total_points = curve.point_count();
    let mut rep = GeodesicCurvatureReport {
        max_residual: 0.0,
        samples: 0,
        worst: (0.0, 0.0),
    };
    for chain in &curve.chains {
        let raw = chain.length() / chain.points.len() as f64;
        // Crossings through grid nodes can repeat a point; near-duplicates
        // would wreck the interpolation below.
        let mut pts: Vec<&CurvePoint> = Vec::with_capacity(chain.points.len());
        for p in &chain.points {
            if pts.last().is_none_or(|q| (p.jet.x - q.jet.x).norm() > 1e-3 * raw) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && (pts[0].jet.x - pts[pts.len() - 1].jet.x).norm() <= 1e-3 * raw {
            pts.pop();
        }
        let n = pts.len();
        if n < 8 {
            return Err(Error::ChainTooCoarse { points: n });
        }
        let mut s = Vec::with_capacity(n + 1);
        s.push(0.0);
        for k in 0..n {
            let a = pts[k].jet.x;
            let b = pts[(k + 1) % n].jet.x;
            s.push(s[k] + (b - a).norm());
        }
        let len = s[n];
        let sigma = (8.0 * len / n as f64).max(0.08 * len / TAU).min(len / 8.0);
        let m = ((sample_count * n).div_ceil(total_points)).clamp(1, n);
        let x_at = |k: isize| pts[k.rem_euclid(n as isize) as usize].jet.x;
        let s_at = |k: isize| {
            let q = k.div_euclid(n as isize) as f64;
            s[k.rem_euclid(n as isize) as usize] + q * len
        };
        // Point at arclength `target`, by cubic interpolation through the
        // four surrounding chain points.
        let point_at = |target: f64| -> AmbientVec {
            let target = wrap(target, len);
            let k = s[..n].partition_point(|&x| x <= target).saturating_sub(1) as isize;
            let ks = [k - 1, k, k + 1, k + 2];
            let ss = ks.map(s_at);
            let mut out = AmbientVec::zeros(x_at(k).dim());
            for a in 0..4 {
                let mut l = 1.0;
                for b in 0..4 {
                    if a != b {
                        l *= (target - ss[b]) / (ss[a] - ss[b]);
                    }
                }
                out = out + x_at(ks[a]) * l;
            }
            out
        };
        // Curvature vector of the circle through point `i` and the chain
        // points exactly `step` before and after it.
        let circle = |i: usize, step: f64| -> AmbientVec {
            let x0 = pts[i].jet.x;
            let a = point_at(s[i] - step) - x0;
            let b = point_at(s[i] + step) - x0;
            let gram = Sym2::new(a.norm_sq(), a.dot(&b), b.norm_sq());
            match gram.solve([0.5 * gram.a, 0.5 * gram.c]) {
                Some([ca, cb]) if gram.det() > 1e-14 * gram.a * gram.c => {
                    let centre = a * ca + b * cb;
                    centre * (1.0 / centre.norm_sq())
                }
                _ => AmbientVec::zeros(a.dim()),
            }
        };
        for q in 0..m {
            let i = (q * n) / m;
            let c = pts[i];
            // The circle error is even in the step, so one Richardson
            // step removes its leading term.
            // Tight bends near critical values need a shorter stencil.
            let bend = circle(i, sigma).norm();
            let step = if bend * sigma > 0.25 { (0.25 / bend).max(3.0 * len / n as f64) } else { sigma };
            let (k1, k2) = (circle(i, step), circle(i, 0.5 * step));
            let kappa = k2 * (4.0 / 3.0) - k1 * (1.0 / 3.0);
            let rhs = [kappa.dot(&c.jet.dx[0]), kappa.dot(&c.jet.dx[1])];
            let Some(ct) = c.forms.g.solve(rhs) else { continue };
            let kappa_tan = c.jet.dx[0] * ct[0] + c.jet.dx[1] * ct[1];
            let gn = c.frame.grad_r_norm();
            let nu = (c.jet.dx[0] * c.frame.grad_r[0] + c.jet.dx[1] * c.frame.grad_r[1]) * (1.0 / gn);
            let kg_fd = -kappa_tan.dot(&nu);
            let kg_cf = c.frame.geodesic_curvature().unwrap_or(f64::NAN);
            let res = (kg_fd - kg_cf).abs();
            rep.samples += 1;
            if !(res <= rep.max_residual) {
                rep.max_residual = res;
                rep.worst = (kg_fd, kg_cf);
            }
        }
    }
    Ok(rep)
}

fn wrap(x: f64, len: f64) -> f64 {
    let r = x % len;
    if r < 0.0 {
        r + len
    } else {
        r
    }
}

/// A set of level records from one grid, in increasing `t`.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub surface: String,
    pub x0: AmbientVec,
    pub resolution: [usize; 2],
    pub euler_char_full: i64,
    pub total_curvature_closed: Option<f64>,
    pub compact: bool,
    /// Integrals over the whole surface, for compact surfaces.
    pub whole: Option<RegionIntegrals>,
    pub records: Vec<LevelRecord>,
}

impl Sweep {
    /// Wraps records computed elsewhere (for instance in parallel).
    pub fn new(grid: &GeometryGrid, mut records: Vec<LevelRecord>) -> Result<Sweep> {
        records.sort_by(|a, b| a.t.total_cmp(&b.t));
        let compact = grid.spec.domain.is_compact();
        let whole = if compact {
            Some(sublevel_region(grid, 1.01 * grid.r_max + f64::MIN_POSITIVE)?.integrals)
        } else {
            None
        };
        Ok(Sweep {
            surface: grid.spec.name.clone(),
            x0: grid.x0,
            resolution: grid.resolution,
            euler_char_full: grid.spec.euler_char_full,
            total_curvature_closed: grid.spec.total_curvature,
            compact,
            whole,
            records,
        })
    }

    pub fn regular(&self) -> impl Iterator<Item = &LevelRecord> {
        self.records.iter().filter(|r| r.regular)
    }

    pub fn regular_count(&self) -> usize {
        self.regular().count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `n` levels from `t_min` to `t_max` inclusive.
pub fn level_samples(t_min: f64, t_max: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![t_max];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                return t_min;
            } else if k == n - 1 {
                return t_max;
            }
            let s = k as f64 / (n - 1) as f64;
            match spacing {
                Spacing::Linear => t_min + s * (t_max - t_min),
                Spacing::Log => (t_min.ln() + s * (t_max.ln() - t_min.ln())).exp(),
            }
        })
        .collect()
}

pub fn level_record(grid: &GeometryGrid, t: f64) -> Result<LevelRecord> {
    LevelRecord::from_slice(&slice_level(grid, t)?)
}

/// Sequential sweep over `t_samples`.
pub fn run_sweep(grid: &GeometryGrid, t_samples: &[f64]) -> Result<Sweep> {
    let records = t_samples
        .iter()
        .map(|&t| level_record(grid, t))
        .collect::<Result<Vec<_>>>()?;
    Sweep::new(grid, records)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub t_prev: f64,
    pub t: f64,
    pub u_prev: f64,
    pub u: f64,
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub sweep: Sweep,
    pub regular_levels: usize,
    pub u1_violations: Vec<Violation>,
    pub u2_violations: Vec<Violation>,
    /// Largest drop relative to `1 + |u|` over consecutive regular levels.
    pub worst_u1_drop: f64,
    pub worst_u2_drop: f64,
    pub ok: bool,
}

/// Checks that `u₁` and `u₂` do not decrease by more than
/// `slack·(1 + |u|)` between consecutive regular levels.
pub fn check_monotonicity(sweep: Sweep, slack: f64) -> Result<MonotonicityReport> {
    let reg: Vec<&LevelRecord> = sweep.regular().collect();
    if reg.is_empty() {
        return Err(Error::NoRegularLevels);
    }
    let mut u1v = Vec::new();
    let mut u2v = Vec::new();
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    for w in reg.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (ua, ub, out, worst) in [(a.u1, b.u1, &mut u1v, &mut w1), (a.u2, b.u2, &mut u2v, &mut w2)] {
            let drop = (ua - ub) / (1.0 + ua.abs());
            *worst = worst.max(drop);
            if drop > slack {
                out.push(Violation {
                    t_prev: a.t,
                    t: b.t,
                    u_prev: ua,
                    u: ub,
                });
            }
        }
    }
    let ok = u1v.is_empty() && u2v.is_empty();
    Ok(MonotonicityReport {
        regular_levels: reg.len(),
        sweep: sweep.clone(),
        u1_violations: u1v,
        u2_violations: u2v,
        worst_u1_drop: w1,
        worst_u2_drop: w2,
        ok,
    })
}

pub fn monotonicity_profile(grid: &GeometryGrid, t_samples: &[f64]) -> Result<MonotonicityReport> {
    if t_samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("level samples must increase".into()));
    }
    if let Some(&t) = t_samples.last() {
        grid.check_guard(t)?;
    }
    check_monotonicity(run_sweep(grid, t_samples)?, MONOTONICITY_SLACK)
}

/// `u₁` at a single level.
pub fn u1_at(grid: &GeometryGrid, t: f64) -> Result<f64> {
    Ok(u_values(t, &sublevel_region(grid, t)?.integrals).0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallTLimit {
    pub t: f64,
    pub u1: f64,
    /// Ambient size of the grid cells around the base point.
    pub cell_size: f64,
}

/// `u₁` at the smallest regular level spanning at least eight grid cells,
/// with `x0 = x(p)` kept on the surface.
pub fn small_t_limit(spec: &SurfaceSpec, p: [f64; 2], resolution: [usize; 2]) -> Result<SmallTLimit> {
    let x0 = spec.position(p);
    let opts = GridOptions {
        resolution,
        base_point: BasePointPolicy::OnSurface,
        t_max: None,
    };
    let grid = build_grid(spec, &opts, &x0)?;
    let (i, j) = grid.nearest_node();
    let h = grid.local_cell_size(i, j);
    let t0 = 4.0 * h;
    for k in 0..40 {
        let t = t0 * 1.05f64.powi(k);
        if t >= grid.guard_limit() || t >= grid.r_max {
            break;
        }
        let s = slice_level(&grid, t)?;
        if s.curve.regular {
            return Ok(SmallTLimit {
                t,
                u1: u_values(t, &s.region.integrals).0,
                cell_size: h,
            });
        }
    }
    Err(Error::ResolutionTooCoarse(alloc::format!(
        "no regular level of at least eight cells (cell size {h}) fits on the grid"
    )))
}

/// `v(t)/(π t²)`.
pub fn area_ratio(rec: &LevelRecord) -> f64 {
    rec.v / (PI * rec.t * rec.t)
}
