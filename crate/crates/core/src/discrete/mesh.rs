use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{AmbientVec, MAX_AMBIENT_DIM};
use crate::{Error, Result};

/// A validated triangle mesh in ℝⁿ: nondegenerate faces, manifold edges and
/// a consistent orientation.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<AmbientVec>,
    faces: Vec<[usize; 3]>,
    /// Sorted endpoint pairs.
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<(usize, Option<usize>)>,
    boundary_loops: Vec<Vec<usize>>,
    components: usize,
    referenced: Vec<bool>,
}

fn mesh_err(msg: String) -> Error {
    Error::Mesh(msg)
}

/// Area of the triangle `abc` in any dimension.
pub fn triangle_area(a: &AmbientVec, b: &AmbientVec, c: &AmbientVec) -> f64 {
    let e1 = *b - *a;
    let e2 = *c - *a;
    let g = e1.norm_sq() * e2.norm_sq() - e1.dot(&e2).powi(2);
    0.5 * g.max(0.0).sqrt()
}

/// Interior angle at `a` of the triangle `abc`.
pub fn corner_angle(a: &AmbientVec, b: &AmbientVec, c: &AmbientVec) -> f64 {
    let u = *b - *a;
    let v = *c - *a;
    let (u, v) = (u * (1.0 / u.norm()), v * (1.0 / v.norm()));
    2.0 * (u - v).norm().atan2((u + v).norm())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Mesh {
    pub fn new(vertices: Vec<AmbientVec>, faces: Vec<[usize; 3]>) -> Result<Mesh> {
        let dim = vertices.first().map_or(3, |v| v.dim());
        if vertices.iter().any(|v| v.dim() != dim) {
            return Err(mesh_err("vertices have mixed dimensions".into()));
        }
        if faces.is_empty() {
            return Err(mesh_err("mesh has no faces".into()));
        }
        let scale = bbox_diagonal(&vertices);
        let mut referenced = vec![false; vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= vertices.len()) {
                return Err(mesh_err(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(mesh_err(format!("face {fi} repeats a vertex")));
            }
            let a = triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            if !(a > 1e-14 * scale * scale) {
                return Err(mesh_err(format!("face {fi} is degenerate (area {a})")));
            }
            for &i in f {
                referenced[i] = true;
            }
        }

        // Each undirected edge with the faces using it and their direction.
        let mut map: BTreeMap<[usize; 2], Vec<(usize, bool)>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                map.entry(key).or_default().push((fi, a < b));
            }
        }
        let mut edges = Vec::with_capacity(map.len());
        let mut edge_faces = Vec::with_capacity(map.len());
        for (key, users) in &map {
            match users.as_slice() {
                [(f, _)] => edge_faces.push((*f, None)),
                [(f, da), (g, db)] => {
                    if da == db {
                        return Err(mesh_err(format!(
                            "inconsistent orientation across edge {}-{} (faces {f} and {g})",
                            key[0], key[1]
                        )));
                    }
                    edge_faces.push((*f, Some(*g)));
                }
                _ => {
                    return Err(mesh_err(format!(
                        "non-manifold edge {}-{} shared by {} faces",
                        key[0],
                        key[1],
                        users.len()
                    )))
                }
            }
            edges.push(*key);
        }

        let mut parent: Vec<usize> = (0..vertices.len()).collect();
        for e in &edges {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a] = b;
            }
        }
        let components = (0..vertices.len())
            .filter(|&i| referenced[i] && find(&mut parent, i) == i)
            .count();

        // Boundary edges follow their face's direction, so loops run with
        // the surface on the left.
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (key, users) in &map {
            if let [(f, _)] = users.as_slice() {
                let fv = faces[*f];
                let k = (0..3).find(|&k| [fv[k], fv[(k + 1) % 3]] == *key).is_some();
                let (a, b) = if k { (key[0], key[1]) } else { (key[1], key[0]) };
                next.entry(a).or_default().push(b);
            }
        }
        let mut boundary_loops = Vec::new();
        while let Some((&start, _)) = next.iter().find(|(_, v)| !v.is_empty()) {
            let mut lp = vec![start];
            let mut cur = start;
            loop {
                let Some(n) = next.get_mut(&cur).and_then(|v| v.pop()) else {
                    break;
                };
                if n == start {
                    break;
                }
                lp.push(n);
                cur = n;
            }
            boundary_loops.push(lp);
        }

        Ok(Mesh {
            vertices,
            faces,
            edges,
            edge_faces,
            boundary_loops,
            components,
            referenced,
        })
    }

    /// Parses the OBJ subset `v x y z [w ...]` and `f i j k` (1-based,
    /// `i/vt/vn` accepted). Other records are ignored.
    pub fn parse_obj(src: &str) -> Result<Mesh> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (ln, line) in src.lines().enumerate() {
            let ln = ln + 1;
            let line = line.split('#').next().unwrap_or("");
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: core::result::Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
                    let c = c.map_err(|e| mesh_err(format!("line {ln}: bad coordinate: {e}")))?;
                    if c.len() < 3 || c.len() > MAX_AMBIENT_DIM {
                        return Err(mesh_err(format!(
                            "line {ln}: vertex needs 3 to {MAX_AMBIENT_DIM} coordinates, got {}",
                            c.len()
                        )));
                    }
                    if c.iter().any(|x| !x.is_finite()) {
                        return Err(mesh_err(format!("line {ln}: non-finite coordinate")));
                    }
                    if let Some(v0) = vertices.first() {
                        let v0: &AmbientVec = v0;
                        if v0.dim() != c.len() {
                            return Err(mesh_err(format!(
                                "line {ln}: vertex has {} coordinates, earlier ones {}",
                                c.len(),
                                v0.dim()
                            )));
                        }
                    }
                    vertices.push(AmbientVec::from_slice(&c));
                }
                Some("f") => {
                    let idx: Vec<&str> = it.collect();
                    if idx.len() != 3 {
                        return Err(mesh_err(format!("line {ln}: only triangles are supported")));
                    }
                    let mut f = [0usize; 3];
                    for (k, s) in idx.iter().enumerate() {
                        let head = s.split('/').next().unwrap_or("");
                        let i: usize = head
                            .parse()
                            .map_err(|_| mesh_err(format!("line {ln}: bad vertex index `{s}`")))?;
                        if i == 0 || i > vertices.len() {
                            return Err(mesh_err(format!("line {ln}: vertex index {i} out of range")));
                        }
                        f[k] = i - 1;
                    }
                    faces.push(f);
                }
                _ => {}
            }
        }
        Mesh::new(vertices, faces)
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push('v');
            for x in v.as_slice() {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[AmbientVec] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.referenced.iter().filter(|&&r| r).count()
    }

    pub fn is_referenced(&self, v: usize) -> bool {
        self.referenced[v]
    }

    /// `V − E + F`, counting only vertices used by some face.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops.is_empty()
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.vertices.len()];
        for (e, (_, g)) in self.edges.iter().zip(&self.edge_faces) {
            if g.is_none() {
                b[e[0]] = true;
                b[e[1]] = true;
            }
        }
        b
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn scale(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }
}

fn bbox_diagonal(vs: &[AmbientVec]) -> f64 {
    let Some(first) = vs.first() else { return 0.0 };
    let mut lo = *first;
    let mut hi = *first;
    for v in vs {
        for k in 0..v.dim() {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (hi - lo).norm()
}
