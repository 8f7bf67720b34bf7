//! Per-level extraction: clipped region, Euler characteristic and boundary
//! chains.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{dens, densities, GeometryGrid, NDENS};
use crate::curvature::{fundamental_forms, radial_frame, FundamentalForms, RadialFrame, REGULARITY_THRESHOLD};
use crate::immersion::ImmersionJet;
use crate::sum::PairwiseSum;
use crate::{Error, Result};

/// A point of `∂M_t` with exact geometry.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub jet: ImmersionJet,
    pub forms: FundamentalForms,
    pub frame: RadialFrame,
}

/// A polyline of crossing points. `dp[k]` is the parameter step from
/// point `k` to the next one (wrapping for closed chains), taken inside a
/// single grid triangle so it never straddles a seam.
#[derive(Clone, Debug)]
pub struct Chain {
    pub points: Vec<CurvePoint>,
    pub dp: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Chain {
    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.dp.len()
    }

    /// Endpoints of segment `k`.
    pub fn segment(&self, k: usize) -> (&CurvePoint, &CurvePoint) {
        let n = self.points.len();
        (&self.points[k], &self.points[(k + 1) % n])
    }

    /// Intrinsic length of segment `k`, using the metric averaged over its
    /// endpoints.
    pub fn segment_length(&self, k: usize) -> f64 {
        let (a, b) = self.segment(k);
        let g = a.forms.g.lerp(&b.forms.g, 0.5);
        g.quad(self.dp[k]).max(0.0).sqrt()
    }

    pub fn length(&self) -> f64 {
        let mut s = PairwiseSum::new();
        for k in 0..self.segments() {
            s.add(self.segment_length(k));
        }
        s.total()
    }
}

/// `∂M_t` as a set of chains.
#[derive(Clone, Debug)]
pub struct LevelCurve {
    pub t: f64,
    pub chains: Vec<Chain>,
    pub min_grad_r: f64,
    pub regular: bool,
    pub closed: bool,
}

impl LevelCurve {
    pub fn point_count(&self) -> usize {
        self.chains.iter().map(|c| c.points.len()).sum()
    }

    pub fn length(&self) -> f64 {
        let mut s = PairwiseSum::new();
        for c in &self.chains {
            s.add(c.length());
        }
        s.total()
    }
}

/// Integrals over `M_t` of the cached densities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegionIntegrals {
    pub area: f64,
    pub k: f64,
    pub h2: f64,
    pub a2: f64,
    pub xperp_h: f64,
    pub xperp_h_abs: f64,
}

/// `M_t` as a clipped triangle complex.
#[derive(Clone, Debug, PartialEq)]
pub struct ClippedRegion {
    pub t: f64,
    pub full_cells: usize,
    pub partial_cells: usize,
    pub area: f64,
    pub integrals: RegionIntegrals,
    pub euler_char: i64,
}

#[derive(Clone, Debug)]
pub struct LevelSlice {
    pub curve: LevelCurve,
    pub region: ClippedRegion,
}

/// A triangle edge: key, corner slots of its canonical endpoints.
#[derive(Clone, Copy)]
struct TriEdge {
    key: usize,
    from: usize,
    to: usize,
}

struct Crossing {
    point: CurvePoint,
    /// Fraction along the canonical edge.
    s: f64,
}

struct Slicer<'g> {
    grid: &'g GeometryGrid,
    t: f64,
    slot: Vec<u32>,
    crossings: Vec<Crossing>,
    n_h: usize,
    n_v: usize,
}

impl Slicer<'_> {
    fn key_h(&self, i: usize, j: usize) -> usize {
        let j = if j == self.grid.nodes_v { 0 } else { j };
        j * self.grid.resolution[0] + i
    }

    fn key_v(&self, i: usize, j: usize) -> usize {
        let i = if i == self.grid.nodes_u { 0 } else { i };
        self.n_h + j * self.grid.nodes_u + i
    }

    fn key_d(&self, i: usize, j: usize) -> usize {
        self.n_h + self.n_v + j * self.grid.resolution[0] + i
    }

    /// Crossing on an edge between the unwrapped nodes `a` and `b`, in the
    /// canonical direction `a → b`.
    fn crossing(&mut self, key: usize, a: (usize, usize), b: (usize, usize)) -> Result<usize> {
        if self.slot[key] != u32::MAX {
            return Ok(self.slot[key] as usize);
        }
        let g = self.grid;
        let t = self.t;
        let pa = g.node_param(a.0, a.1);
        let pb = g.node_param(b.0, b.1);
        let ra = g.node(a.0, a.1).r;
        let rb = g.node(b.0, b.1).r;
        let at = |s: f64| [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
        let r_of = |s: f64| (g.spec.position(at(s)) - g.x0).norm();
        let s = refine_root(&r_of, t, ra, rb, 4.0 * f64::EPSILON * t.max(g.spec.length_scale()));
        let p = g.spec.domain.wrap(at(s));
        let jet = g.spec.jet_unchecked(p);
        let forms = fundamental_forms(&jet)?;
        let frame = radial_frame(&jet, &forms, &g.x0)?;
        let idx = self.crossings.len();
        self.crossings.push(Crossing {
            point: CurvePoint { jet, forms, frame },
            s,
        });
        self.slot[key] = idx as u32;
        Ok(idx)
    }
}

/// Bracketed Illinois iteration for `r(s) = t` on `[0, 1]`, started from
/// the linear interpolant of the endpoint values.
fn refine_root(r: &dyn Fn(f64) -> f64, t: f64, ra: f64, rb: f64, tol: f64) -> f64 {
    let (mut s0, mut f0) = (0.0, ra - t);
    let (mut s1, mut f1) = (1.0, rb - t);
    if f1 == 0.0 {
        return 1.0;
    }
    if f0 == 0.0 {
        return 0.0;
    }
    let mut s = s0 - f0 * (s1 - s0) / (f1 - f0);
    let mut side = 0i8;
    for _ in 0..60 {
        let f = r(s) - t;
        if f.abs() <= tol || !f.is_finite() {
            break;
        }
        if (f > 0.0) == (f1 > 0.0) {
            s1 = s;
            f1 = f;
            if side == -1 {
                f0 *= 0.5;
            }
            side = -1;
        } else {
            s0 = s;
            f0 = f;
            if side == 1 {
                f1 *= 0.5;
            }
            side = 1;
        }
        if (s1 - s0).abs() <= 1e-15 {
            break;
        }
        s = s0 - f0 * (s1 - s0) / (f1 - f0);
    }
    s.clamp(0.0, 1.0)
}

/// Curvature of the level set of `r` through `p` in the flat parameter
/// plane, positive when `{r < t}` is locally convex.
fn param_curvature(p: &CurvePoint) -> Option<f64> {
    if !p.frame.is_regular() {
        return None;
    }
    let x = p.jet.x - p.frame.x0;
    let r = p.frame.r;
    let d = p.frame.dr;
    let g = &p.forms.g;
    let h = |i: usize, j: usize| (g.at(i, j) + x.dot(p.jet.second(i, j)) - d[i] * d[j]) / r;
    let den = (d[0] * d[0] + d[1] * d[1]).powf(1.5);
    if !(den > 0.0) {
        return None;
    }
    let num = h(0, 0) * d[1] * d[1] - 2.0 * h(0, 1) * d[0] * d[1] + h(1, 1) * d[0] * d[0];
    Some(num / den)
}

fn polygon_area_centroid(poly: &[[f64; 2]]) -> (f64, [f64; 2]) {
    let n = poly.len();
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let c = p[0] * q[1] - q[0] * p[1];
        a2 += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if a2 == 0.0 {
        return (0.0, poly[0]);
    }
    (0.5 * a2, [cx / (3.0 * a2), cy / (3.0 * a2)])
}

/// Barycentric coordinates of `p` in the triangle `tri`.
fn barycentric(tri: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = *tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Extracts `M_t` and `∂M_t` together.
pub fn slice_level(grid: &GeometryGrid, t: f64) -> Result<LevelSlice> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("level t = {t} must be positive")));
    }
    grid.check_guard(t)?;
    let [nu, nv] = grid.resolution;
    let n_h = nu * grid.nodes_v;
    let n_v = grid.nodes_u * nv;
    let mut sl = Slicer {
        grid,
        t,
        slot: vec![u32::MAX; n_h + n_v + nu * nv],
        crossings: Vec::new(),
        n_h,
        n_v,
    };
    let inside: Vec<bool> = grid.nodes.iter().map(|n| n.r < t).collect();
    let ins = |i: usize, j: usize| inside[grid.node_index(i, j)];

    let n_in = inside.iter().filter(|&&b| b).count() as i64;
    let mut e_full = 0i64;
    for j in 0..grid.nodes_v {
        for i in 0..nu {
            e_full += (ins(i, j) && ins(i + 1, j)) as i64;
        }
    }
    for j in 0..nv {
        for i in 0..grid.nodes_u {
            e_full += (ins(i, j) && ins(i, j + 1)) as i64;
        }
    }

    let mut sums: [PairwiseSum; NDENS] = Default::default();
    let mut f_full = 0i64;
    let mut partial_cells = 0usize;
    let mut segments: Vec<(usize, usize, [f64; 2])> = Vec::new();
    let tri_area = 0.5 * grid.du * grid.dv;
    let (du, dv) = (grid.du, grid.dv);
    let local = [[0.0, 0.0], [du, 0.0], [du, dv], [0.0, dv]];

    for j in 0..nv {
        for i in 0..nu {
            let corner = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let b = corner.map(|(a, c)| ins(a, c));
            let saddle = b[0] == b[2] && b[1] == b[3] && b[0] != b[1];
            let main = !saddle || b[0] == (grid.center_r[j * nu + i] < t);
            if main {
                e_full += (b[0] && b[2]) as i64;
            } else {
                e_full += (b[1] && b[3]) as i64;
            }
            if !b.iter().any(|&x| x) {
                continue;
            }
            let h0 = sl.key_h(i, j);
            let h1 = sl.key_h(i, j + 1);
            let v0 = sl.key_v(i, j);
            let v1 = sl.key_v(i + 1, j);
            let dk = sl.key_d(i, j);
            let te = |key, from, to| TriEdge { key, from, to };
            // Triangles as corner slots in counterclockwise order; each edge
            // k joins slots k and k+1 and names its canonical direction.
            let tris: [([usize; 3], [TriEdge; 3]); 2] = if main {
                [
                    ([0, 1, 2], [te(h0, 0, 1), te(v1, 1, 2), te(dk, 0, 2)]),
                    ([0, 2, 3], [te(dk, 0, 2), te(h1, 3, 2), te(v0, 0, 3)]),
                ]
            } else {
                [
                    ([0, 1, 3], [te(h0, 0, 1), te(dk, 1, 3), te(v0, 0, 3)]),
                    ([1, 2, 3], [te(v1, 1, 2), te(h1, 3, 2), te(dk, 1, 3)]),
                ]
            };
            let mut cut = false;
            for (slots, edges) in tris {
                let n_inside = slots.iter().filter(|&&s| b[s]).count();
                let d = slots.map(|s| grid.node(corner[s].0, corner[s].1).dens);
                if n_inside == 3 {
                    f_full += 1;
                    for q in 0..NDENS {
                        sums[q].add(tri_area * (d[0][q] + d[1][q] + d[2][q]) / 3.0);
                    }
                    continue;
                }
                if n_inside == 0 {
                    continue;
                }
                cut = true;
                let mut poly: Vec<[f64; 2]> = Vec::with_capacity(4);
                let (mut exit, mut entry) = (None, None);
                for k in 0..3 {
                    let (sa, sb) = (slots[k], slots[(k + 1) % 3]);
                    if b[sa] {
                        poly.push(local[sa]);
                    }
                    if b[sa] != b[sb] {
                        let e = edges[k];
                        let idx = sl.crossing(e.key, corner[e.from], corner[e.to])?;
                        let s = sl.crossings[idx].s;
                        let (lf, lt) = (local[e.from], local[e.to]);
                        let pos = [lf[0] + s * (lt[0] - lf[0]), lf[1] + s * (lt[1] - lf[1])];
                        poly.push(pos);
                        if b[sa] {
                            exit = Some((idx, pos));
                        } else {
                            entry = Some((idx, pos));
                        }
                    }
                }
                let (area, centroid) = polygon_area_centroid(&poly);
                if area > 0.0 {
                    let tri = slots.map(|s| local[s]);
                    let w = barycentric(&tri, centroid);
                    for q in 0..NDENS {
                        sums[q].add(area * (w[0] * d[0][q] + w[1] * d[1][q] + w[2] * d[2][q]));
                    }
                }
                if let (Some((a, pa)), Some((c, pc))) = (exit, entry) {
                    segments.push((a, c, [pc[0] - pa[0], pc[1] - pa[1]]));
                }
            }
            partial_cells += cut as usize;
        }
    }

    let d = &grid.spec.domain;
    let mut poles = 0i64;
    if d.periodic_u {
        if d.collapsed_v_min && ins(0, 0) {
            poles += 1;
        }
        if d.collapsed_v_max && ins(0, nv) {
            poles += 1;
        }
    }
    let euler_char = n_in - e_full + f_full + poles;

    // Each chord cuts a thin lens off the true level curve; add it back
    // using the curvature of {r = t} in the parameter plane.
    for &(a, c, dp) in &segments {
        let (pa, pc) = (&sl.crossings[a].point, &sl.crossings[c].point);
        let (Some(ka), Some(kc)) = (param_curvature(pa), param_curvature(pc)) else {
            continue;
        };
        let l2 = dp[0] * dp[0] + dp[1] * dp[1];
        let kappa = 0.5 * (ka + kc);
        if (kappa * l2.sqrt()).abs() > 0.5 {
            continue;
        }
        let lens = kappa * l2 * l2.sqrt() / 12.0;
        let da = densities(&pa.forms, Some(&pa.frame));
        let dc = densities(&pc.forms, Some(&pc.frame));
        for q in 0..NDENS {
            sums[q].add(lens * 0.5 * (da[q] + dc[q]));
        }
    }

    let totals = sums.map(|s| s.total());
    let integrals = RegionIntegrals {
        area: totals[dens::AREA],
        k: totals[dens::K],
        h2: totals[dens::H2],
        a2: totals[dens::A2],
        xperp_h: totals[dens::XPERP_H],
        xperp_h_abs: totals[dens::XPERP_H_ABS],
    };
    let region = ClippedRegion {
        t,
        full_cells: f_full as usize,
        partial_cells,
        area: integrals.area,
        integrals,
        euler_char,
    };

    let curve = link_chains(grid, t, &sl.crossings, &segments)?;
    Ok(LevelSlice { curve, region })
}

fn link_chains(
    grid: &GeometryGrid,
    t: f64,
    crossings: &[Crossing],
    segments: &[(usize, usize, [f64; 2])],
) -> Result<LevelCurve> {
    let n = crossings.len();
    let mut succ = vec![usize::MAX; n];
    let mut has_pred = vec![false; n];
    for (k, &(a, c, _)) in segments.iter().enumerate() {
        if succ[a] != usize::MAX || has_pred[c] {
            return Err(Error::InvalidInput(format!(
                "level t = {t}: crossing reached by more than one segment"
            )));
        }
        succ[a] = k;
        has_pred[c] = true;
    }
    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    let starts = (0..n)
        .filter(|&c| !has_pred[c])
        .chain((0..n).filter(|&c| has_pred[c]));
    for start in starts {
        if visited[start] {
            continue;
        }
        let mut points = Vec::new();
        let mut dp = Vec::new();
        let mut c = start;
        let mut closed = false;
        loop {
            visited[c] = true;
            points.push(crossings[c].point);
            let k = succ[c];
            if k == usize::MAX {
                break;
            }
            dp.push(segments[k].2);
            c = segments[k].1;
            if c == start {
                closed = true;
                break;
            }
            if visited[c] {
                return Err(Error::InvalidInput(format!(
                    "level t = {t}: chains merge at a crossing"
                )));
            }
        }
        chains.push(Chain { points, dp, closed });
    }
    let closed = chains.iter().all(|c| c.closed);
    if !closed {
        return Err(Error::TruncationGuard {
            boundary_r: grid.min_boundary_r,
            t,
            required: super::TRUNCATION_MARGIN * t,
        });
    }
    let min_grad_r = crossings
        .iter()
        .map(|c| c.point.frame.grad_r_norm())
        .fold(f64::INFINITY, f64::min);
    let regular = !chains.is_empty() && min_grad_r >= REGULARITY_THRESHOLD;
    Ok(LevelCurve {
        t,
        chains,
        min_grad_r,
        regular,
        closed,
    })
}

/// `∂M_t`; requires `t` strictly between the extreme sampled values of `r`.
pub fn extract_level(grid: &GeometryGrid, t: f64) -> Result<LevelCurve> {
    if !(t > grid.r_min && t < grid.r_max) {
        return Err(Error::LevelOutOfRange {
            t,
            r_min: grid.r_min,
            r_max: grid.r_max,
        });
    }
    Ok(slice_level(grid, t)?.curve)
}

/// `M_t` with its area, density integrals and Euler characteristic.
pub fn sublevel_region(grid: &GeometryGrid, t: f64) -> Result<ClippedRegion> {
    Ok(slice_level(grid, t)?.region)
}

#[cfg(test)]
mod tests {
    use super::super::{build_grid, GridOptions};
    use super::*;
    use crate::immersion::catalog_surface;
    use crate::linalg::AmbientVec;
    use core::f64::consts::PI;

    fn grid(name: &str, params: &[(&str, f64)], n: usize, x0: &[f64]) -> GeometryGrid {
        let s = catalog_surface(name, params).unwrap();
        build_grid(&s, &GridOptions::square(n), &AmbientVec::from_slice(x0)).unwrap()
    }

    #[test]
    fn sphere_cap_from_north_pole() {
        let g = grid("sphere", &[], 256, &[0.0, 0.0, 1.0]);
        let sl = slice_level(&g, 1.0).unwrap();
        assert!((sl.region.area - PI).abs() < 5e-3 * PI, "{}", sl.region.area);
        assert_eq!(sl.region.euler_char, 1);
        assert_eq!(sl.curve.chains.len(), 1);
        let len = sl.curve.length();
        assert!((len - PI * 3f64.sqrt()).abs() < 1e-2 * PI * 3f64.sqrt(), "{len}");
        assert!(sl.curve.regular);
    }

    #[test]
    fn whole_sphere_has_euler_characteristic_two() {
        let g = grid("sphere", &[], 64, &[0.0, 0.0, 1.0]);
        let r = sublevel_region(&g, 2.5).unwrap();
        assert_eq!(r.euler_char, 2);
        assert!((r.area - 4.0 * PI).abs() < 1e-2);
        assert!(matches!(extract_level(&g, 2.5), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn whole_torus_has_euler_characteristic_zero() {
        let g = grid("clifford_torus", &[], 64, &[0.6, 0.0, 0.3, 0.0]);
        let r = sublevel_region(&g, 3.0).unwrap();
        assert_eq!(r.euler_char, 0);
        assert!((r.area - 4.0 * PI * PI).abs() < 1e-2);
    }

    #[test]
    fn plane_disk() {
        let g = grid("plane", &[], 256, &[0.0, 0.0, 0.0]);
        let sl = slice_level(&g, 2.0).unwrap();
        assert_eq!(sl.region.euler_char, 1);
        assert!((sl.region.area - 4.0 * PI).abs() < 5e-3 * 4.0 * PI);
        assert_eq!(sl.curve.chains.len(), 1);
        assert!((sl.curve.length() - 4.0 * PI).abs() < 5e-3 * 4.0 * PI);
    }

    #[test]
    fn catenoid_annulus() {
        let g = grid("catenoid", &[], 128, &[0.0, 0.0, 0.0]);
        let sl = slice_level(&g, 5.0).unwrap();
        assert_eq!(sl.region.euler_char, 0);
        assert_eq!(sl.curve.chains.len(), 2);
        assert!(sl.curve.regular);
    }

    #[test]
    fn chains_keep_region_on_the_left() {
        // For the plane disk, counterclockwise traversal means positive
        // signed area of the enclosed polygon.
        let g = grid("plane", &[], 64, &[0.3, -0.2, 0.0]);
        let c = &extract_level(&g, 3.0).unwrap().chains[0];
        let pts: Vec<[f64; 2]> = c.points.iter().map(|p| p.jet.p).collect();
        let (a, _) = polygon_area_centroid(&pts);
        assert!(a > 0.0);
    }

    #[test]
    fn illinois_converges() {
        let f = |s: f64| 1.0 + s * s * 3.0;
        let s = refine_root(&f, 2.0, 1.0, 4.0, 1e-15);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }
}
