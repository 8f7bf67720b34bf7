//! Triangle-mesh backend: discrete curvature, extrinsic sublevel profiles
//! and graph geodesic balls.

mod mesh;

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::immersion::SurfaceSpec;
use crate::linalg::AmbientVec;
use crate::sum::PairwiseSum;
use crate::{Error, Result};

pub use mesh::{corner_angle, triangle_area, Mesh};

/// Integrated Gauss curvature per vertex: `2π − Σθ` inside, `π − Σθ` on the
/// boundary. Unused vertices get 0.
pub fn angle_defect_curvature(mesh: &Mesh) -> Vec<f64> {
    let vs = mesh.vertices();
    let mut sums: Vec<PairwiseSum> = vec![PairwiseSum::new(); vs.len()];
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            sums[a].add(corner_angle(&vs[a], &vs[b], &vs[c]));
        }
    }
    let boundary = mesh.boundary_vertices();
    sums.iter()
        .enumerate()
        .map(|(i, s)| {
            if !mesh.is_referenced(i) {
                0.0
            } else if boundary[i] {
                PI - s.total()
            } else {
                TAU - s.total()
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshLevel {
    pub t: f64,
    pub v: f64,
    pub chi: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshProfile {
    /// Base point actually used.
    pub x0: AmbientVec,
    pub offset_applied: bool,
    pub levels: Vec<MeshLevel>,
}

/// A unit vector orthogonal to the span of `e1, e2`.
fn normal_to(e1: &AmbientVec, e2: &AmbientVec) -> AmbientVec {
    let dim = e1.dim();
    let q1 = *e1 * (1.0 / e1.norm());
    let w = *e2 - q1 * q1.dot(e2);
    let q2 = w * (1.0 / w.norm());
    let mut best = AmbientVec::zeros(dim);
    for k in 0..dim {
        let a = AmbientVec::axis(dim, k);
        let r = a - q1 * q1.dot(&a) - q2 * q2.dot(&a);
        if r.norm_sq() > best.norm_sq() {
            best = r;
        }
    }
    best * (1.0 / best.norm())
}

/// Area and Euler characteristic of `{|x − x0| < t}` on the mesh, with `r`
/// interpolated linearly along edges. A base point on a vertex is moved off
/// along a face normal by `1e-9·scale`.
pub fn mesh_sublevel_profile(mesh: &Mesh, x0: &AmbientVec, t_samples: &[f64]) -> Result<MeshProfile> {
    if x0.dim() != mesh.dim() {
        return Err(Error::InvalidInput("base point dimension differs from the mesh".into()));
    }
    let vs = mesh.vertices();
    let scale = mesh.scale();
    let mut x0 = *x0;
    let mut offset_applied = false;
    if let Some(vi) = (0..vs.len()).find(|&i| mesh.is_referenced(i) && (vs[i] - x0).norm() < 1e-12 * scale) {
        let f = mesh.faces().iter().find(|f| f.contains(&vi)).expect("referenced vertex");
        let n = normal_to(&(vs[f[1]] - vs[f[0]]), &(vs[f[2]] - vs[f[0]]));
        x0 += n * (1e-9 * scale);
        offset_applied = true;
    }
    let r: Vec<f64> = vs.iter().map(|v| (*v - x0).norm()).collect();
    let levels = t_samples
        .iter()
        .map(|&t| {
            let inside: Vec<bool> = r.iter().map(|&ri| ri < t).collect();
            let n_in = (0..vs.len()).filter(|&i| inside[i] && mesh.is_referenced(i)).count() as i64;
            let e_in = mesh.edges().iter().filter(|e| inside[e[0]] && inside[e[1]]).count() as i64;
            let mut f_in = 0i64;
            let mut area = PairwiseSum::new();
            for f in mesh.faces() {
                let k = f.iter().filter(|&&i| inside[i]).count();
                if k == 3 {
                    f_in += 1;
                    area.add(triangle_area(&vs[f[0]], &vs[f[1]], &vs[f[2]]));
                } else if k > 0 {
                    let mut poly: Vec<AmbientVec> = Vec::with_capacity(4);
                    for q in 0..3 {
                        let (a, b) = (f[q], f[(q + 1) % 3]);
                        if inside[a] {
                            poly.push(vs[a]);
                        }
                        if inside[a] != inside[b] {
                            let s = (t - r[a]) / (r[b] - r[a]);
                            poly.push(vs[a] + (vs[b] - vs[a]) * s);
                        }
                    }
                    for q in 1..poly.len() - 1 {
                        area.add(triangle_area(&poly[0], &poly[q], &poly[q + 1]));
                    }
                }
            }
            MeshLevel {
                t,
                v: area.total(),
                chi: n_in - e_in + f_in,
            }
        })
        .collect();
    Ok(MeshProfile {
        x0,
        offset_applied,
        levels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallLevel {
    pub t: f64,
    /// Area of faces with all three vertices within graph distance `t`.
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicBallProfile {
    pub source: usize,
    pub distances: Vec<f64>,
    pub levels: Vec<BallLevel>,
    /// Vertices in other components, excluded from everything.
    pub unreachable: usize,
    /// `max(r − d)` over reachable vertices; extrinsic distance must not
    /// exceed intrinsic distance.
    pub max_excess: f64,
    /// Tolerance applied to `max_excess`.
    pub slack: f64,
    /// `max d/r` over reachable vertices, the graph-metric distortion.
    pub max_distortion: f64,
    pub holds: bool,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Edge-graph Dijkstra from a vertex, with `D(t)` at each level.
pub fn geodesic_ball_profile(mesh: &Mesh, source: usize, t_samples: &[f64]) -> Result<GeodesicBallProfile> {
    let vs = mesh.vertices();
    if source >= vs.len() || !mesh.is_referenced(source) {
        return Err(Error::InvalidInput("source is not a mesh vertex".into()));
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vs.len()];
    for e in mesh.edges() {
        let w = (vs[e[0]] - vs[e[1]]).norm();
        adj[e[0]].push((e[1], w));
        adj[e[1]].push((e[0], w));
    }
    let mut dist = vec![f64::INFINITY; vs.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Item(0.0, source));
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    let unreachable = (0..vs.len()).filter(|&i| mesh.is_referenced(i) && dist[i].is_infinite()).count();
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_distortion = 1.0f64;
    for i in 0..vs.len() {
        if !dist[i].is_finite() {
            continue;
        }
        let r = (vs[i] - vs[source]).norm();
        max_excess = max_excess.max(r - dist[i]);
        if r > 0.0 {
            max_distortion = max_distortion.max(dist[i] / r);
        }
    }
    let levels = t_samples
        .iter()
        .map(|&t| {
            let mut s = PairwiseSum::new();
            for (fi, f) in mesh.faces().iter().enumerate() {
                if f.iter().all(|&i| dist[i] <= t) {
                    s.add(mesh.face_area(fi));
                }
            }
            BallLevel { t, d: s.total() }
        })
        .collect();
    let slack = 1e-12 * mesh.scale();
    Ok(GeodesicBallProfile {
        source,
        distances: dist,
        levels,
        unreachable,
        max_excess,
        slack,
        max_distortion,
        holds: max_excess <= slack,
    })
}

/// Subdivided icosahedron projected to the sphere of radius `radius`
/// about the origin, faces oriented outward.
pub fn icosphere(subdivisions: u32, radius: f64) -> Mesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let unit = |p: AmbientVec| p * (1.0 / p.norm());
    let mut vs: Vec<AmbientVec> = raw.iter().map(|c| unit(AmbientVec::from_slice(c))).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid = alloc::collections::BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, vs: &mut Vec<AmbientVec>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vs.push(unit((vs[a] + vs[b]) * 0.5));
                vs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vs);
            let bc = midpoint(b, c, &mut vs);
            let ca = midpoint(c, a, &mut vs);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vs {
        *v = *v * radius;
    }
    Mesh::new(vs, faces).expect("icosphere is a valid closed mesh")
}

/// Samples the chart on an `nu × nv` cell grid, identifying periodic seams
/// and collapsed rows, and splits each cell along its main diagonal.
pub fn tessellate(spec: &SurfaceSpec, nu: usize, nv: usize) -> Result<Mesh> {
    if nu < 3 || nv < 2 {
        return Err(Error::ResolutionTooCoarse(alloc::format!("{nu}x{nv} cells")));
    }
    let d = &spec.domain;
    let cols = if d.periodic_u { nu } else { nu + 1 };
    let rows = if d.periodic_v { nv } else { nv + 1 };
    let mut vertices = Vec::new();
    let mut id = vec![0usize; cols * rows];
    for j in 0..rows {
        let v = d.v_range.lerp(j as f64 / nv as f64);
        let collapsed = (j == 0 && d.collapsed_v_min) || (j == nv && d.collapsed_v_max);
        for i in 0..cols {
            if collapsed && i > 0 {
                id[j * cols + i] = id[j * cols];
                continue;
            }
            let u = d.u_range.lerp(i as f64 / nu as f64);
            id[j * cols + i] = vertices.len();
            vertices.push(spec.position([u, v]));
        }
    }
    let at = |i: usize, j: usize| id[(j % rows) * cols + (i % cols)];
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (c00, c10, c11, c01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            for f in [[c00, c10, c11], [c00, c11, c01]] {
                if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                    faces.push(f);
                }
            }
        }
    }
    Mesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{catalog_surface, truncated_total_curvature};
    use crate::sum::pairwise;

    fn v3(a: f64, b: f64, c: f64) -> AmbientVec {
        AmbientVec::from_slice(&[a, b, c])
    }

    #[test]
    fn icosphere_counts_and_defects() {
        let m = icosphere(3, 1.0);
        assert_eq!((m.vertex_count(), m.faces().len()), (642, 1280));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed() && m.components() == 1);
        let total = pairwise(&angle_defect_curvature(&m));
        assert!((total - 4.0 * PI).abs() < 1e-9, "{total}");
    }

    #[test]
    fn obj_round_trip() {
        let m = icosphere(1, 2.0);
        let back = Mesh::parse_obj(&m.to_obj()).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.vertices(), m.vertices());
    }

    #[test]
    fn obj_errors_name_the_line() {
        let bad = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n";
        let e = Mesh::parse_obj(bad).unwrap_err();
        assert!(alloc::format!("{e}").contains("line 4"), "{e}");
        let nm = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 0 -1 0\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
        assert!(alloc::format!("{}", Mesh::parse_obj(nm).unwrap_err()).contains("non-manifold"));
        let flip = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\nf 1 3 2\n";
        assert!(Mesh::parse_obj(flip).is_err());
        let flip2 = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 3 4\n";
        assert!(alloc::format!("{}", Mesh::parse_obj(flip2).unwrap_err()).contains("orientation"));
    }

    #[test]
    fn disjoint_triangles() {
        let vs = vec![
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(0.0, 1.0, 0.0),
            v3(5.0, 0.0, 0.0),
            v3(6.0, 0.0, 0.0),
            v3(5.0, 1.0, 0.0),
        ];
        let m = Mesh::new(vs, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.components(), 2);
        assert_eq!(m.boundary_loops().len(), 2);
        let g = geodesic_ball_profile(&m, 0, &[10.0]).unwrap();
        assert_eq!(g.unreachable, 3);
        assert!((g.levels[0].d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_face_rejected() {
        let vs = vec![v3(0.0, 0.0, 0.0), v3(1.0, 0.0, 0.0), v3(2.0, 0.0, 0.0)];
        assert!(Mesh::new(vs, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn flat_patch() {
        let s = catalog_surface("plane", &[("L", 1.0)]).unwrap();
        let m = tessellate(&s, 64, 64).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        let defects = angle_defect_curvature(&m);
        let b = m.boundary_vertices();
        for (i, k) in defects.iter().enumerate() {
            if !b[i] {
                assert!(k.abs() < 1e-12);
            }
        }
        let p = mesh_sublevel_profile(&m, &v3(0.0, 0.0, 0.0), &[0.5]).unwrap();
        assert!(p.offset_applied);
        assert!((p.levels[0].v / (PI * 0.25) - 1.0).abs() < 2e-2);
        assert_eq!(p.levels[0].chi, 1);
    }

    #[test]
    fn catalog_tessellations_have_declared_topology() {
        for name in crate::immersion::CATALOG {
            let s = catalog_surface(name, &[]).unwrap();
            let m = tessellate(&s, 48, 24).unwrap();
            assert_eq!(m.euler_characteristic(), s.euler_char_full, "{name}");
        }
    }

    #[test]
    fn catenoid_interior_defects() {
        let s = catalog_surface("catenoid", &[]).unwrap();
        let m = tessellate(&s, 256, 64).unwrap();
        let b = m.boundary_vertices();
        let k: Vec<f64> = angle_defect_curvature(&m)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !b[*i])
            .map(|(_, k)| k)
            .collect();
        let exact = truncated_total_curvature(&s).unwrap();
        assert!((pairwise(&k) / exact - 1.0).abs() < 1e-2, "{}", pairwise(&k));
    }

    #[test]
    fn icosphere_cap_and_ball() {
        let m = icosphere(4, 1.0);
        let p = mesh_sublevel_profile(&m, &v3(0.0, 0.0, 1.0), &[1.0]).unwrap();
        assert!((p.levels[0].v / PI - 1.0).abs() < 2e-2, "{:?}", p.levels);
        let g = geodesic_ball_profile(&m, 0, &[PI / 2.0]).unwrap();
        assert!(g.holds && g.unreachable == 0);
        assert!(g.max_distortion >= 1.0);
        // Graph distances overshoot, so the hemisphere is under-counted.
        let d = g.levels[0].d / (2.0 * PI);
        assert!(d <= 1.0 && d > 0.8, "D/2pi = {d}");
    }
}
