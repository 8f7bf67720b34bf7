//! Boundary integrals along `∂M_t`, the co-area check and the
//! extrinsic-versus-intrinsic distance check.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;

use super::{extract_level, slice_level, CurvePoint, GeometryGrid, LevelCurve};
use crate::sum::PairwiseSum;
use crate::{Error, Result};

/// Integrands available on `∂M_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryIntegrand {
    /// `1` (curve length).
    One,
    /// `1/|∇r|` (co-area density).
    InvGradR,
    /// `|∇r|`.
    GradR,
    /// `|∇⊥r|²/|∇r|`.
    PerpSqOverGrad,
    /// `⟨x⊥, H⟩/|∇r|`.
    XperpHOverGrad,
    /// `|x⊥||H|/|∇r|`.
    XperpHAbsOverGrad,
    /// `|H|²/|∇r|`.
    H2OverGrad,
    /// `|A|²/|∇r|`.
    A2OverGrad,
    /// `⟨A(ν,ν), ∇⊥r⟩/|∇r|`.
    NuTermOverGrad,
    /// Closed-form geodesic curvature of the level curve.
    GeodesicCurvature,
}

impl BoundaryIntegrand {
    pub const ALL: [BoundaryIntegrand; 10] = [
        BoundaryIntegrand::One,
        BoundaryIntegrand::InvGradR,
        BoundaryIntegrand::GradR,
        BoundaryIntegrand::PerpSqOverGrad,
        BoundaryIntegrand::XperpHOverGrad,
        BoundaryIntegrand::XperpHAbsOverGrad,
        BoundaryIntegrand::H2OverGrad,
        BoundaryIntegrand::A2OverGrad,
        BoundaryIntegrand::NuTermOverGrad,
        BoundaryIntegrand::GeodesicCurvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryIntegrand::One => "length",
            BoundaryIntegrand::InvGradR => "inv_grad_r",
            BoundaryIntegrand::GradR => "grad_r",
            BoundaryIntegrand::PerpSqOverGrad => "perp_sq_over_grad_r",
            BoundaryIntegrand::XperpHOverGrad => "xperp_h_over_grad_r",
            BoundaryIntegrand::XperpHAbsOverGrad => "xperp_h_abs_over_grad_r",
            BoundaryIntegrand::H2OverGrad => "h2_over_grad_r",
            BoundaryIntegrand::A2OverGrad => "a2_over_grad_r",
            BoundaryIntegrand::NuTermOverGrad => "nu_term_over_grad_r",
            BoundaryIntegrand::GeodesicCurvature => "geodesic_curvature",
        }
    }

    pub fn eval(self, p: &CurvePoint) -> f64 {
        let f = &p.frame;
        let g = f.grad_r_norm();
        match self {
            BoundaryIntegrand::One => 1.0,
            BoundaryIntegrand::InvGradR => 1.0 / g,
            BoundaryIntegrand::GradR => g,
            BoundaryIntegrand::PerpSqOverGrad => f.grad_perp_sq / g,
            BoundaryIntegrand::XperpHOverGrad => f.pairing_xh / g,
            BoundaryIntegrand::XperpHAbsOverGrad => f.x_perp.norm() * p.forms.h.norm() / g,
            BoundaryIntegrand::H2OverGrad => p.forms.h.norm_sq() / g,
            BoundaryIntegrand::A2OverGrad => p.forms.normsq_a / g,
            BoundaryIntegrand::NuTermOverGrad => f.nu_term.map_or(f64::NAN, |n| n / g),
            BoundaryIntegrand::GeodesicCurvature => f.geodesic_curvature().unwrap_or(f64::NAN),
        }
    }
}

/// `∫_{∂M_t} f ds` by the trapezoid rule on each segment.
pub fn boundary_integral(level: &LevelCurve, integrand: BoundaryIntegrand) -> Result<f64> {
    if !level.regular {
        return Err(Error::NonRegular {
            t: level.t,
            min_grad_r: level.min_grad_r,
        });
    }
    let mut s = PairwiseSum::new();
    for chain in &level.chains {
        for k in 0..chain.segments() {
            let (a, b) = chain.segment(k);
            s.add(chain.segment_length(k) * 0.5 * (integrand.eval(a) + integrand.eval(b)));
        }
    }
    Ok(s.total())
}

/// `|(v(t+dt) − v(t−dt))/(2dt) − ∫_{∂M_t} 1/|∇r|| / max(1, v'(t))`.
pub fn coarea_check(grid: &GeometryGrid, t: f64, dt: f64) -> Result<f64> {
    let lo = slice_level(grid, t - dt)?;
    let hi = slice_level(grid, t + dt)?;
    for c in [&lo.curve, &hi.curve] {
        if !c.regular {
            return Err(Error::NonRegular {
                t: c.t,
                min_grad_r: c.min_grad_r,
            });
        }
    }
    let vprime = boundary_integral(&extract_level(grid, t)?, BoundaryIntegrand::InvGradR)?;
    let fd = (hi.region.area - lo.region.area) / (2.0 * dt);
    Ok((fd - vprime).abs() / vprime.max(1.0))
}

/// Outcome of comparing `r` with graph distances from the node nearest the
/// base point.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceReport {
    pub source: (usize, usize),
    /// `max(r − d_graph − slack)` over nodes apart from the source;
    /// nonpositive when the inequality holds.
    pub max_violation: f64,
    /// `max(r − d_graph)` before the slack is applied.
    pub max_raw_excess: f64,
    /// Largest accumulated slack along a shortest path.
    pub max_slack: f64,
    /// Largest `d_graph / r` over nodes with `r` above a few cells.
    pub max_distortion: f64,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra over the grid's 8-neighbour graph. Edge weights are intrinsic
/// lengths `√(Δpᵀ ḡ Δp)` with `ḡ` the mean endpoint metric; where such a
/// weight falls short of the chord, the shortfall accumulates as slack.
pub fn intrinsic_distance_check(grid: &GeometryGrid) -> Result<DistanceReport> {
    let (nu, nv) = (grid.nodes_u, grid.nodes_v);
    let d = &grid.spec.domain;
    let src = grid.nearest_node();
    let si = grid.node_index(src.0, src.1);
    let xs = grid.nodes[si].x;
    let n = grid.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut slack = vec![0.0; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[si] = 0.0;
    heap.push(Item(0.0, si));
    const STEPS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];
    while let Some(Item(dk, k)) = heap.pop() {
        if done[k] {
            continue;
        }
        done[k] = true;
        let (i, j) = ((k % nu) as i64, (k / nu) as i64);
        for (di, dj) in STEPS {
            let (mut a, mut b) = (i + di, j + dj);
            if d.periodic_u {
                a = a.rem_euclid(nu as i64);
            }
            if d.periodic_v {
                b = b.rem_euclid(nv as i64);
            }
            if a < 0 || b < 0 || a >= nu as i64 || b >= nv as i64 {
                continue;
            }
            let m = b as usize * nu + a as usize;
            if done[m] {
                continue;
            }
            let (na, nb) = (&grid.nodes[k], &grid.nodes[m]);
            let dp = [di as f64 * grid.du, dj as f64 * grid.dv];
            let w = na.g.lerp(&nb.g, 0.5).quad(dp).max(0.0).sqrt();
            let chord = (nb.x - na.x).norm();
            let cand = dk + w;
            if cand < dist[m] {
                dist[m] = cand;
                slack[m] = slack[k] + (chord - w).max(0.0);
                heap.push(Item(cand, m));
            }
        }
    }
    if let Some(k) = done.iter().position(|&x| !x) {
        return Err(Error::InvalidInput(format!(
            "grid graph is disconnected: node ({}, {}) unreachable",
            k % nu,
            k / nu
        )));
    }
    let near = 4.0 * grid.local_cell_size(src.0, src.1);
    let mut rep = DistanceReport {
        source: src,
        max_violation: f64::NEG_INFINITY,
        max_raw_excess: f64::NEG_INFINITY,
        max_slack: 0.0,
        max_distortion: 1.0,
    };
    for k in 0..n {
        let r = (grid.nodes[k].x - xs).norm();
        if r == 0.0 {
            continue;
        }
        rep.max_violation = rep.max_violation.max(r - dist[k] - slack[k]);
        rep.max_raw_excess = rep.max_raw_excess.max(r - dist[k]);
        rep.max_slack = rep.max_slack.max(slack[k]);
        if r > near {
            rep.max_distortion = rep.max_distortion.max(dist[k] / r);
        }
    }
    Ok(rep)
}
