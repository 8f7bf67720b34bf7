//! Total-curvature limits: hypothesis diagnostics, the area-growth defect,
//! the quadratic lower bound and the small-energy predicate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use super::tail::{quadratic_fit, tail_extrapolate, QuadraticFit, TailFit, TailVerdict};
use super::{LevelRecord, Sweep};
use crate::linalg::AmbientVec;
use crate::sublevel::{extract_level, sublevel_region, GeometryGrid};
use crate::{Error, Result};

/// How a per-level quantity behaves over the top half-decade of regular levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trend {
    pub t_first: f64,
    pub t_last: f64,
    pub first: f64,
    pub last: f64,
    /// Every step decreases.
    pub decreasing: bool,
    /// Every step increases.
    pub increasing: bool,
}

impl Trend {
    fn of(records: &[&LevelRecord], f: impl Fn(&LevelRecord) -> f64) -> Option<Trend> {
        let t_hi = records.last()?.t;
        let top: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.t >= t_hi / 10f64.sqrt())
            .map(|r| (r.t, f(r)))
            .filter(|(_, y)| y.is_finite())
            .collect();
        if top.len() < 2 {
            return None;
        }
        let (first, last) = (top[0], top[top.len() - 1]);
        Some(Trend {
            t_first: first.0,
            t_last: last.0,
            first: first.1,
            last: last.1,
            decreasing: top.windows(2).all(|w| w[1].1 < w[0].1),
            increasing: top.windows(2).all(|w| w[1].1 > w[0].1),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub int_a2: TailFit,
    pub int_h2: TailFit,
    /// `t∫_{∂M_t}|A|²/|∇r|` and `t∫_{∂M_t}|H|²/|∇r|`.
    pub a2_flux: Option<Trend>,
    pub h2_flux: Option<Trend>,
    /// `v(t)/t²`.
    pub area_ratio: Option<Trend>,
    /// Whether `∫|A|²` is finite on this sweep.
    pub hypothesis_ok: bool,
    /// Names of the tails judged divergent.
    pub diverging: Vec<&'static str>,
    pub regular_levels: usize,
    pub skipped_levels: usize,
    /// Non-regular levels among the top half-decade.
    pub skipped_in_top_half_decade: usize,
}

fn regular_series(sweep: &Sweep, f: impl Fn(&LevelRecord) -> f64) -> (Vec<f64>, Vec<f64>) {
    sweep.regular().map(|r| (r.t, f(r))).unzip()
}

pub fn hypothesis_diagnostics(sweep: &Sweep) -> HypothesisReport {
    let reg: Vec<&LevelRecord> = sweep.regular().collect();
    let (int_a2, int_h2) = match &sweep.whole {
        Some(w) => (TailFit::exact(w.a2), TailFit::exact(w.h2)),
        None => {
            let (ts, a2) = regular_series(sweep, |r| r.int_a2);
            let (_, h2) = regular_series(sweep, |r| r.int_h2);
            (tail_extrapolate(&ts, &a2), tail_extrapolate(&ts, &h2))
        }
    };
    let mut diverging = Vec::new();
    if int_a2.verdict == TailVerdict::Diverging {
        diverging.push("int_A2");
    }
    if int_h2.verdict == TailVerdict::Diverging {
        diverging.push("int_H2");
    }
    let t_hi = sweep.records.last().map_or(0.0, |r| r.t);
    HypothesisReport {
        int_a2,
        int_h2,
        a2_flux: Trend::of(&reg, |r| r.t * r.boundary.a2_over_grad_r),
        h2_flux: Trend::of(&reg, |r| r.t * r.boundary.h2_over_grad_r),
        area_ratio: Trend::of(&reg, |r| r.v / (r.t * r.t)),
        hypothesis_ok: int_a2.converged(),
        diverging,
        regular_levels: reg.len(),
        skipped_levels: sweep.records.len() - reg.len(),
        skipped_in_top_half_decade: sweep
            .records
            .iter()
            .filter(|r| !r.regular && r.t >= t_hi / 10f64.sqrt())
            .count(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    pub surface: String,
    pub chi_m: i64,
    /// False for compact surfaces and when `∫|A|²` diverges.
    pub applicable: bool,
    pub note: Option<String>,
    /// `∫_M K` used in the defect.
    pub total_k: f64,
    pub total_k_closed_form: Option<f64>,
    /// Extrapolation of the measured `∫_{M_t} K`.
    pub total_k_numeric: TailFit,
    /// `|total_k − numeric limit|`.
    pub total_k_delta: f64,
    /// `χ(M) − total_k/2π`.
    pub defect: f64,
    pub ratio_fit: Option<QuadraticFit>,
    /// `c₂/π` from the fit, NaN without one.
    pub ratio: f64,
    pub nearest_integer: i64,
    pub integer_distance: f64,
    pub defect_integer_distance: f64,
    /// `|defect − ratio|`.
    pub discrepancy: f64,
    pub tolerance: f64,
    pub cohn_vossen_ok: bool,
    pub hypothesis_ok: bool,
    pub hypotheses: HypothesisReport,
    /// The limit is a positive integer equal to the defect, within tolerance.
    pub assertions_hold: bool,
}

/// Cohn–Vossen slack on `χ(M) − ∫K/2π ≥ 0`.
pub const COHN_VOSSEN_TOL: f64 = 0.02;

/// Default bound on `|defect − ratio|`.
pub const DEFECT_TOL: f64 = 0.05;

/// Integer proximity required of the fitted limit.
pub const INTEGER_TOL: f64 = 0.05;

pub fn chern_osserman_defect(sweep: &Sweep, fit_gate: f64, tolerance: f64) -> Result<DefectReport> {
    if sweep.regular_count() == 0 {
        return Err(Error::NoRegularLevels);
    }
    let hyp = hypothesis_diagnostics(sweep);
    let (ts, ks) = regular_series(sweep, |r| r.int_k);
    let numeric = match &sweep.whole {
        Some(w) => TailFit::exact(w.k),
        None => tail_extrapolate(&ts, &ks),
    };
    let (total_k, delta) = match sweep.total_curvature_closed {
        Some(k) => (k, (k - numeric.limit).abs()),
        None => (numeric.limit, (numeric.limit - numeric.last).abs()),
    };
    let defect = sweep.euler_char_full as f64 - total_k / TAU;
    let (_, vs) = regular_series(sweep, |r| r.v);
    let fit = quadratic_fit(&ts, &vs, fit_gate);
    let ratio = fit.map_or(f64::NAN, |f| f.ratio);
    let nearest = if ratio.is_finite() { ratio.round() as i64 } else { 0 };
    let int_dist = (ratio - nearest as f64).abs();
    let discrepancy = (defect - ratio).abs();

    let mut note = None;
    let applicable = if sweep.compact {
        note = Some("compact surface: the area-growth limit concerns noncompact surfaces".into());
        false
    } else if !hyp.hypothesis_ok {
        note = Some(format!(
            "hypothesis violated: diverging {}",
            if hyp.diverging.is_empty() {
                String::from("int_A2 (tail insufficient)")
            } else {
                hyp.diverging.join(", ")
            }
        ));
        false
    } else {
        true
    };
    let assertions_hold = applicable
        && fit.is_some_and(|f| f.gate_ok)
        && nearest >= 1
        && int_dist < INTEGER_TOL
        && discrepancy < tolerance;
    Ok(DefectReport {
        surface: sweep.surface.clone(),
        chi_m: sweep.euler_char_full,
        applicable,
        note,
        total_k,
        total_k_closed_form: sweep.total_curvature_closed,
        total_k_numeric: numeric,
        total_k_delta: delta,
        defect,
        ratio_fit: fit,
        ratio,
        nearest_integer: nearest,
        integer_distance: int_dist,
        defect_integer_distance: (defect - defect.round()).abs(),
        discrepancy,
        tolerance,
        cohn_vossen_ok: defect >= -COHN_VOSSEN_TOL,
        hypothesis_ok: hyp.hypothesis_ok,
        hypotheses: hyp,
        assertions_hold,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCertificate {
    pub r_inner: f64,
    pub t: f64,
    /// `∫_{M∖M_R}|H|²`.
    pub epsilon: f64,
    pub v: f64,
    /// `(π − ε)(t − R)²/4`.
    pub bound: f64,
    pub holds: bool,
    /// Centre of the recentred ball, on `M ∩ ∂B((t+R)/2)`.
    pub center: Option<AmbientVec>,
    /// Set when the certificate cannot be issued.
    pub refused: Option<String>,
    pub h2_tail: TailFit,
    pub area_ratio: Option<Trend>,
    /// `v/t²` falls at every step of the top half-decade.
    pub sub_quadratic: bool,
    /// Sweep levels where the bound applies, and whether it held at all.
    pub levels_checked: usize,
    pub all_levels_hold: bool,
}

fn growth_bound(eps: f64, r_inner: f64, t: f64) -> f64 {
    (PI - eps) * (t - r_inner) * (t - r_inner) / 4.0
}

fn bound_holds(v: f64, bound: f64) -> bool {
    v >= bound - 1e-6 * (1.0 + bound.abs())
}

/// Checks `v(t) ≥ (π − ε)(t − R)²/4` at `t` and at every sweep level
/// where a recentred ball exists. Refused when the `|H|²` tail diverges.
pub fn quadratic_growth_certificate(
    grid: &GeometryGrid,
    sweep: &Sweep,
    r_inner: f64,
    t: f64,
) -> Result<GrowthCertificate> {
    if !(t > r_inner) || r_inner < 0.0 {
        return Err(Error::InvalidInput(format!("need 0 ≤ R < t, got R={r_inner}, t={t}")));
    }
    let hyp = hypothesis_diagnostics(sweep);
    let area_ratio = hyp.area_ratio;
    let mut cert = GrowthCertificate {
        r_inner,
        t,
        epsilon: f64::NAN,
        v: f64::NAN,
        bound: f64::NAN,
        holds: false,
        center: None,
        refused: None,
        h2_tail: hyp.int_h2,
        area_ratio,
        sub_quadratic: area_ratio.is_some_and(|a| a.decreasing),
        levels_checked: 0,
        all_levels_hold: false,
    };
    if !hyp.int_h2.converged() {
        cert.refused = Some(format!(
            "int_H2 tail does not converge (last {}, verdict {:?})",
            hyp.int_h2.last, hyp.int_h2.verdict
        ));
        return Ok(cert);
    }
    grid.check_guard(t)?;
    let inner = if r_inner > grid.r_min {
        sublevel_region(grid, r_inner)?.integrals.h2
    } else {
        0.0
    };
    let eps = (hyp.int_h2.limit - inner).max(0.0);
    cert.epsilon = eps;
    if eps >= PI {
        cert.refused = Some(format!("int_H2 outside B(R) is {eps}, not below π"));
        return Ok(cert);
    }
    let mid = 0.5 * (t + r_inner);
    if mid > grid.r_min && mid < grid.r_max {
        let c = extract_level(grid, mid)?;
        cert.center = c.chains.first().and_then(|ch| ch.points.first()).map(|p| p.jet.x);
    }
    cert.v = sublevel_region(grid, t)?.area;
    cert.bound = growth_bound(eps, r_inner, t);
    cert.holds = cert.center.is_none() || bound_holds(cert.v, cert.bound);
    let mut all = true;
    for r in sweep.records.iter().filter(|r| r.t > r_inner) {
        if 0.5 * (r.t + r_inner) <= grid.r_min {
            continue;
        }
        cert.levels_checked += 1;
        all &= bound_holds(r.v, growth_bound(eps, r_inner, r.t));
    }
    cert.all_levels_hold = all && cert.holds;
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallEnergyReport {
    pub int_a2: f64,
    pub below_4pi: bool,
    pub chi_m: i64,
    /// `∫|A|² < 4π ⇒ χ(M) = 1` on this input.
    pub implication_ok: bool,
    /// The premise fails, so the implication holds trivially.
    pub vacuous: bool,
}

pub fn small_energy_topology(sweep: &Sweep) -> Result<SmallEnergyReport> {
    let hyp = hypothesis_diagnostics(sweep);
    if !hyp.int_a2.converged() {
        return Err(Error::HypothesisViolated(format!(
            "int_A2 tail {:?} at last value {}",
            hyp.int_a2.verdict, hyp.int_a2.last
        )));
    }
    let a2 = hyp.int_a2.limit;
    let below = a2 < 4.0 * PI;
    Ok(SmallEnergyReport {
        int_a2: a2,
        below_4pi: below,
        chi_m: sweep.euler_char_full,
        implication_ok: !below || sweep.euler_char_full == 1,
        vacuous: !below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::{level_samples, run_sweep, Spacing};
    use crate::immersion::catalog_surface;
    use crate::sublevel::{build_grid, GridOptions};

    #[test]
    fn plane_defect_and_predicate() {
        let s = catalog_surface("plane", &[]).unwrap();
        let g = build_grid(&s, &GridOptions::square(128), &AmbientVec::zeros(3)).unwrap();
        let ts = level_samples(0.5, g.default_t_max(), 16, Spacing::Log);
        let sw = run_sweep(&g, &ts).unwrap();
        let d = chern_osserman_defect(&sw, 1e-2, 0.05).unwrap();
        assert!(d.applicable && d.assertions_hold, "{d:?}");
        assert!((d.ratio - 1.0).abs() < 1e-3 && d.defect == 1.0);
        let e = small_energy_topology(&sw).unwrap();
        assert!(e.below_4pi && e.implication_ok && !e.vacuous);
        let c = quadratic_growth_certificate(&g, &sw, 0.0, 6.0).unwrap();
        assert!(c.refused.is_none() && c.holds && c.all_levels_hold, "{c:?}");
        assert!(c.levels_checked == 16);
    }

    #[test]
    fn compact_surfaces_are_not_applicable() {
        let s = catalog_surface("sphere", &[]).unwrap();
        let g = build_grid(&s, &GridOptions::square(64), &AmbientVec::from_slice(&[0.0, 0.0, 1.0])).unwrap();
        let sw = run_sweep(&g, &level_samples(0.2, 1.8, 8, Spacing::Linear)).unwrap();
        let d = chern_osserman_defect(&sw, 1e-2, 0.05).unwrap();
        assert!(!d.applicable && !d.assertions_hold);
        assert!((d.defect).abs() < 1e-12);
        // ∫|A|² = 2·4π on the unit sphere.
        assert!((d.hypotheses.int_a2.limit - 8.0 * PI).abs() < 1e-2 * 8.0 * PI);
    }
}
