//! Parameter grids with cached geometry, extrinsic sublevel sets `M_t` and
//! their boundary curves.
//!
//! Each grid cell is split into two triangles along the `c00–c11` diagonal,
//! except in saddle cells at a given level, where the cell-center sample of
//! `r` decides which diagonal keeps the inside (or outside) corners joined.
//! Crossings of `r = t` start from linear interpolation along an edge and
//! are then refined on the exact surface, so every boundary point carries
//! exact forms and radial frame.

mod checks;
mod slice;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curvature::{fundamental_forms, radial_frame, FundamentalForms, RadialFrame};
use crate::immersion::{ImmersionJet, SurfaceSpec};
use crate::linalg::{AmbientVec, Sym2};
use crate::{Error, Result};

pub use checks::{
    boundary_integral, coarea_check, intrinsic_distance_check, BoundaryIntegrand, DistanceReport,
};
pub use slice::{
    extract_level, slice_level, sublevel_region, Chain, ClippedRegion, CurvePoint, LevelCurve,
    LevelSlice, RegionIntegrals,
};

/// Ratio between the smallest `r` on an artificial boundary and the largest
/// admissible level.
pub const TRUNCATION_MARGIN: f64 = 1.25;

/// Number of area densities cached per node.
pub(crate) const NDENS: usize = 6;

/// Indices into the per-node density array.
pub(crate) mod dens {
    pub const AREA: usize = 0;
    pub const K: usize = 1;
    pub const H2: usize = 2;
    pub const A2: usize = 3;
    pub const XPERP_H: usize = 4;
    pub const XPERP_H_ABS: usize = 5;
}

/// What to do when the base point lies on the sampled surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasePointPolicy {
    /// Move `x0` by `1e-9 · scale` along the surface normal and record a
    /// warning.
    AutoOffset,
    /// Keep `x0` on the surface and use the `r → 0` limits of the radial
    /// densities at the coincident node.
    OnSurface,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridOptions {
    /// Cells along `u` and `v`.
    pub resolution: [usize; 2],
    pub base_point: BasePointPolicy,
    /// Largest level the grid will be asked for; checked against the
    /// truncation guard at build time.
    pub t_max: Option<f64>,
}

impl GridOptions {
    pub fn new(nu: usize, nv: usize) -> Self {
        GridOptions {
            resolution: [nu, nv],
            base_point: BasePointPolicy::AutoOffset,
            t_max: None,
        }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn with_t_max(mut self, t: f64) -> Self {
        self.t_max = Some(t);
        self
    }

    pub fn with_policy(mut self, policy: BasePointPolicy) -> Self {
        self.base_point = policy;
        self
    }
}

/// Cached per-node data. Degenerate nodes (on a collapsed edge) carry zero
/// densities and no gradient.
#[derive(Clone, Copy, Debug)]
pub struct NodeCache {
    pub p: [f64; 2],
    pub x: AmbientVec,
    pub g: Sym2,
    pub r: f64,
    /// `|∇r|`, or NaN where undefined.
    pub grad_r: f64,
    pub(crate) dens: [f64; NDENS],
}

/// A surface sampled on a parameter grid together with a base point.
#[derive(Clone, Debug)]
pub struct GeometryGrid {
    pub spec: SurfaceSpec,
    pub resolution: [usize; 2],
    pub x0: AmbientVec,
    pub policy: BasePointPolicy,
    pub nodes_u: usize,
    pub nodes_v: usize,
    pub du: f64,
    pub dv: f64,
    pub(crate) nodes: Vec<NodeCache>,
    pub(crate) center_r: Vec<f64>,
    /// Smallest `r` on an artificial boundary; infinite when there is none.
    pub min_boundary_r: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub warnings: Vec<String>,
}

/// Samples `spec` on a grid and caches the geometry relative to `x0`.
pub fn build_grid(spec: &SurfaceSpec, options: &GridOptions, x0: &AmbientVec) -> Result<GeometryGrid> {
    let [nu, nv] = options.resolution;
    if nu < 16 || nv < 16 {
        return Err(Error::ResolutionTooCoarse(format!(
            "resolution {nu}×{nv} is below the 16×16 minimum"
        )));
    }
    if x0.dim() != spec.ambient_dim {
        return Err(Error::InvalidInput(format!(
            "base point has dimension {}, surface lives in ℝ^{}",
            x0.dim(),
            spec.ambient_dim
        )));
    }
    let d = &spec.domain;
    let nodes_u = if d.periodic_u { nu } else { nu + 1 };
    let nodes_v = if d.periodic_v { nv } else { nv + 1 };
    let du = d.u_range.len() / nu as f64;
    let dv = d.v_range.len() / nv as f64;

    let mut jets = Vec::with_capacity(nodes_u * nodes_v);
    for j in 0..nodes_v {
        let v = d.v_range.min + j as f64 * dv;
        let collapsed = (j == 0 && d.collapsed_v_min) || (j == nv && d.collapsed_v_max);
        for i in 0..nodes_u {
            let u = d.u_range.min + i as f64 * du;
            let mut jet = spec.jet_unchecked([u, v]);
            if collapsed {
                // Every node of a collapsed row is the same surface point.
                jet.x = spec.position([d.u_range.min, v]);
            } else if jet.is_degenerate() {
                return Err(Error::Degenerate { u, v });
            }
            jets.push(jet);
        }
    }

    let mut x0 = *x0;
    let mut warnings = Vec::new();
    let tiny = 1e-12 * spec.length_scale();
    let closest = jets
        .iter()
        .enumerate()
        .map(|(k, j)| (k, (j.x - x0).norm()))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if closest.1 < tiny && options.base_point == BasePointPolicy::AutoOffset {
        let p = jets[closest.0].p;
        let shift = spec.unit_normal(p) * (1e-9 * spec.length_scale());
        x0 += shift;
        warnings.push(format!(
            "base point lies on the surface at (u, v) = ({}, {}); offset by {:e} along the normal",
            p[0],
            p[1],
            1e-9 * spec.length_scale()
        ));
    }

    let mut nodes = Vec::with_capacity(jets.len());
    for jet in &jets {
        nodes.push(node_cache(jet, &x0, tiny)?);
    }

    let mut center_r = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let p = [
                d.u_range.min + (i as f64 + 0.5) * du,
                d.v_range.min + (j as f64 + 0.5) * dv,
            ];
            center_r.push((spec.position(p) - x0).norm());
        }
    }

    let sides = d.truncated_sides();
    let mut min_boundary_r = f64::INFINITY;
    for j in 0..nodes_v {
        for i in 0..nodes_u {
            let on = (sides[0] && i == 0)
                || (sides[1] && i == nodes_u - 1)
                || (sides[2] && j == 0)
                || (sides[3] && j == nodes_v - 1);
            if on {
                min_boundary_r = min_boundary_r.min(nodes[j * nodes_u + i].r);
            }
        }
    }
    let r_min = nodes.iter().map(|n| n.r).fold(f64::INFINITY, f64::min);
    let r_max = nodes.iter().map(|n| n.r).fold(0.0, f64::max);

    let grid = GeometryGrid {
        spec: spec.clone(),
        resolution: [nu, nv],
        x0,
        policy: options.base_point,
        nodes_u,
        nodes_v,
        du,
        dv,
        nodes,
        center_r,
        min_boundary_r,
        r_min,
        r_max,
        warnings,
    };
    if let Some(t) = options.t_max {
        grid.check_guard(t)?;
    }
    Ok(grid)
}

fn node_cache(jet: &ImmersionJet, x0: &AmbientVec, tiny: f64) -> Result<NodeCache> {
    let r = (jet.x - *x0).norm();
    let mut n = NodeCache {
        p: jet.p,
        x: jet.x,
        g: jet.gram(),
        r,
        grad_r: f64::NAN,
        dens: [0.0; NDENS],
    };
    if jet.is_degenerate() {
        return Ok(n);
    }
    let forms = fundamental_forms(jet)?;
    if r >= tiny {
        let frame = radial_frame(jet, &forms, x0)?;
        n.grad_r = frame.grad_r_norm();
        n.dens = densities(&forms, Some(&frame));
    } else {
        n.dens = densities(&forms, None);
    }
    Ok(n)
}

/// Integrand densities per unit parameter area. The radial terms are zero
/// without a frame.
pub(crate) fn densities(forms: &FundamentalForms, frame: Option<&RadialFrame>) -> [f64; NDENS] {
    let sg = forms.area_element();
    let mut d = [0.0; NDENS];
    d[dens::AREA] = sg;
    d[dens::K] = forms.k * sg;
    d[dens::H2] = forms.h.norm_sq() * sg;
    d[dens::A2] = forms.normsq_a * sg;
    if let Some(f) = frame {
        d[dens::XPERP_H] = f.pairing_xh * sg;
        d[dens::XPERP_H_ABS] = f.x_perp.norm() * forms.h.norm() * sg;
    }
    d
}

impl GeometryGrid {
    /// Largest level admitted by the truncation guard.
    pub fn guard_limit(&self) -> f64 {
        self.min_boundary_r / TRUNCATION_MARGIN
    }

    pub fn check_guard(&self, t: f64) -> Result<()> {
        if TRUNCATION_MARGIN * t > self.min_boundary_r {
            return Err(Error::TruncationGuard {
                boundary_r: self.min_boundary_r,
                t,
                required: TRUNCATION_MARGIN * t,
            });
        }
        Ok(())
    }

    /// Default top level: the guard limit, or just below the largest `r` on
    /// a compact surface.
    pub fn default_t_max(&self) -> f64 {
        if self.min_boundary_r.is_finite() {
            self.guard_limit().min(0.99 * self.r_max)
        } else {
            0.99 * self.r_max
        }
    }

    #[inline]
    pub(crate) fn node_index(&self, i: usize, j: usize) -> usize {
        let i = if i == self.nodes_u { 0 } else { i };
        let j = if j == self.nodes_v { 0 } else { j };
        j * self.nodes_u + i
    }

    pub fn node(&self, i: usize, j: usize) -> &NodeCache {
        &self.nodes[self.node_index(i, j)]
    }

    pub fn nodes(&self) -> &[NodeCache] {
        &self.nodes
    }

    /// Parameter of node `(i, j)` without wrapping, so `i = Nu` sits on
    /// the far seam.
    #[inline]
    pub(crate) fn node_param(&self, i: usize, j: usize) -> [f64; 2] {
        let d = &self.spec.domain;
        [
            d.u_range.min + i as f64 * self.du,
            d.v_range.min + j as f64 * self.dv,
        ]
    }

    /// Node closest to the base point.
    pub fn nearest_node(&self) -> (usize, usize) {
        let mut best = (0, f64::INFINITY);
        for (k, n) in self.nodes.iter().enumerate() {
            if n.r < best.1 {
                best = (k, n.r);
            }
        }
        (best.0 % self.nodes_u, best.0 / self.nodes_u)
    }

    /// Largest ambient edge length among the cells around node `(i, j)`.
    pub fn local_cell_size(&self, i: usize, j: usize) -> f64 {
        let [nu, nv] = self.resolution;
        let wrap_u = self.spec.domain.periodic_u;
        let wrap_v = self.spec.domain.periodic_v;
        let mut h = 0.0f64;
        let x = self.node(i, j).x;
        for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1), (1, 1), (-1, -1)] {
            let (a, b) = (i as i64 + di, j as i64 + dj);
            let a = if wrap_u { a.rem_euclid(nu as i64) } else { a };
            let b = if wrap_v { b.rem_euclid(nv as i64) } else { b };
            if a < 0 || b < 0 || a as usize >= self.nodes_u || b as usize >= self.nodes_v {
                continue;
            }
            h = h.max((self.node(a as usize, b as usize).x - x).norm());
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::catalog_surface;

    #[test]
    fn plane_base_point_on_grid_is_offset() {
        let s = catalog_surface("plane", &[]).unwrap();
        let g = build_grid(&s, &GridOptions::square(64), &AmbientVec::zeros(3)).unwrap();
        assert_eq!(g.warnings.len(), 1);
        assert!((g.x0[2].abs() - 1e-9).abs() < 1e-15);
        assert!(g.x0[0] == 0.0 && g.x0[1] == 0.0);
    }

    #[test]
    fn catenoid_guard() {
        // The boundary circles v = ±3 sit at r = sqrt(cosh²3 + 9) ≈ 10.51
        // from the origin, so t_max = 8 passes and t_max = 9 does not.
        let s = catalog_surface("catenoid", &[("V", 3.0)]).unwrap();
        let boundary = (3f64.cosh().powi(2) + 9.0).sqrt();
        let ok = build_grid(&s, &GridOptions::new(64, 64).with_t_max(8.0), &AmbientVec::zeros(3)).unwrap();
        assert!((ok.min_boundary_r - boundary).abs() < 1e-9);
        match build_grid(&s, &GridOptions::new(64, 64).with_t_max(9.0), &AmbientVec::zeros(3)) {
            Err(Error::TruncationGuard { boundary_r, required, .. }) => {
                assert!((boundary_r - boundary).abs() < 1e-9);
                assert_eq!(required, 11.25);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn sphere_has_no_truncation() {
        let s = catalog_surface("sphere", &[]).unwrap();
        let x0 = AmbientVec::from_slice(&[0.0, 0.0, 1.0]);
        let g = build_grid(&s, &GridOptions::square(32).with_t_max(1.9), &x0).unwrap();
        assert!(g.min_boundary_r.is_infinite());
        assert_eq!(g.nodes_u, 32);
        assert_eq!(g.nodes_v, 33);
    }

    #[test]
    fn coarse_resolution_is_rejected() {
        let s = catalog_surface("plane", &[]).unwrap();
        assert!(matches!(
            build_grid(&s, &GridOptions::square(8), &AmbientVec::zeros(3)),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }
}
