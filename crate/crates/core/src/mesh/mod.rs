//! Conforming tetrahedral meshes with derived boundary triangulation.
//!
//! The boundary surface is always computed from once-owned tet faces and
//! oriented with outward normals taken from the owning tetrahedron.

mod generate;
mod gmsh;

pub use generate::{icosphere, kuhn_cube, reference_tet, two_tets};
pub use gmsh::{load_msh, parse_msh, write_msh};

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::material::MaterialConfig;

pub type Vec3 = Vector3<f64>;

/// Vertex indices of the face opposite local vertex `i`.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Debug, Clone)]
pub struct Tet {
    pub vertices: [usize; 4],
    pub region: i32,
}

#[derive(Debug, Clone)]
pub struct BoundaryTri {
    /// Ordered so that `(v1 - v0) x (v2 - v0)` points along `normal`.
    pub vertices: [usize; 3],
    pub owner: usize,
    pub local_face: usize,
    pub normal: Vec3,
    pub area: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct InteriorFace {
    pub vertices: [usize; 3],
    pub tets: [usize; 2],
    pub local_faces: [usize; 2],
    /// Outward unit normals of the two incident tets; `normals[1] = -normals[0]`.
    pub normals: [Vec3; 2],
    pub area: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRef {
    Interior(usize),
    Boundary(usize),
}

/// Vertex/edge structure of the boundary surface.
#[derive(Debug, Clone)]
pub struct SurfaceTopology {
    /// Global vertex ids on the surface, ascending.
    pub vertices: Vec<usize>,
    /// Global vertex id -> surface vertex index.
    pub vertex_index: HashMap<usize, usize>,
    /// Surface edges as ascending global vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// For each boundary triangle, edge index opposite local vertex `i`.
    pub tri_edges: Vec<[usize; 3]>,
    pub genus: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MeshDiagnostics {
    /// Tets whose vertex order was flipped to obtain positive volume.
    pub reoriented: Vec<usize>,
    /// max over tets of h_K / rho_K.
    pub max_shape_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<Tet>,
    pub boundary: Vec<BoundaryTri>,
    pub interior: Vec<InteriorFace>,
    pub tet_faces: Vec<[FaceRef; 4]>,
    pub tet_volume: Vec<f64>,
    pub tet_diameter: Vec<f64>,
    pub surface: SurfaceTopology,
    pub diagnostics: MeshDiagnostics,
}

/// Penalty weights per face.
#[derive(Debug, Clone)]
pub struct FaceWeights {
    pub s_interior: Vec<f64>,
    pub h_interior: Vec<f64>,
    pub s_boundary: Vec<f64>,
    pub h_boundary: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Diameters {
    pub h: f64,
    pub tet: Vec<f64>,
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
}

fn diameter(points: &[Vec3]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

fn signed_volume(p: &[Vec3; 4]) -> f64 {
    (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&(p[3] - p[0])) / 6.0
}

impl TetMesh {
    /// Builds the mesh topology, repairing negatively oriented tets.
    pub fn new(vertices: Vec<Vec3>, mut tets: Vec<Tet>) -> Result<Self> {
        if tets.is_empty() {
            return Err(Error::Topology("mesh has no tetrahedra".into()));
        }
        let nv = vertices.len();
        let mut diagnostics = MeshDiagnostics::default();
        let mut tet_volume = Vec::with_capacity(tets.len());
        let mut tet_diameter = Vec::with_capacity(tets.len());
        for (k, tet) in tets.iter_mut().enumerate() {
            if let Some(&bad) = tet.vertices.iter().find(|&&v| v >= nv) {
                return Err(Error::Topology(format!(
                    "tet {k} references missing vertex {bad}"
                )));
            }
            let mut sorted = tet.vertices;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Topology(format!("tet {k} repeats a vertex")));
            }
            let mut p = tet.vertices.map(|v| vertices[v]);
            let hk = diameter(&p);
            let mut vol = signed_volume(&p);
            if vol.abs() < 1e-14 * hk.powi(3) {
                return Err(Error::Degenerate {
                    tet: k,
                    volume: vol,
                });
            }
            if vol < 0.0 {
                tet.vertices.swap(2, 3);
                p.swap(2, 3);
                vol = signed_volume(&p);
                diagnostics.reoriented.push(k);
            }
            tet_volume.push(vol);
            tet_diameter.push(hk);
        }
        if !diagnostics.reoriented.is_empty() {
            log::info!(
                "reoriented {} tetrahedra with negative volume",
                diagnostics.reoriented.len()
            );
        }

        let mut owners: HashMap<[usize; 3], Vec<(usize, usize)>> = HashMap::new();
        let mut face_order: Vec<[usize; 3]> = Vec::new();
        for (k, tet) in tets.iter().enumerate() {
            for (f, local) in TET_FACES.iter().enumerate() {
                let mut key = local.map(|i| tet.vertices[i]);
                key.sort_unstable();
                let entry = owners.entry(key).or_default();
                if entry.is_empty() {
                    face_order.push(key);
                }
                entry.push((k, f));
            }
        }

        let outward = |k: usize, f: usize| -> (Vec3, f64, [usize; 3]) {
            let t = &tets[k];
            let [a, b, c] = TET_FACES[f].map(|i| t.vertices[i]);
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let cr = (pb - pa).cross(&(pc - pa));
            let area = 0.5 * cr.norm();
            let opp = vertices[t.vertices[f]];
            if cr.dot(&(pa - opp)) > 0.0 {
                (cr / (2.0 * area), area, [a, b, c])
            } else {
                (-cr / (2.0 * area), area, [a, c, b])
            }
        };

        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        let mut tet_faces = vec![[FaceRef::Boundary(0); 4]; tets.len()];
        for key in &face_order {
            let own = &owners[key];
            let pts = key.map(|v| vertices[v]);
            let hf = diameter(&pts);
            match own.as_slice() {
                [(k, f)] => {
                    let (normal, area, verts) = outward(*k, *f);
                    tet_faces[*k][*f] = FaceRef::Boundary(boundary.len());
                    boundary.push(BoundaryTri {
                        vertices: verts,
                        owner: *k,
                        local_face: *f,
                        normal,
                        area,
                        diameter: hf,
                    });
                }
                [(k0, f0), (k1, f1)] => {
                    let (n0, area, _) = outward(*k0, *f0);
                    tet_faces[*k0][*f0] = FaceRef::Interior(interior.len());
                    tet_faces[*k1][*f1] = FaceRef::Interior(interior.len());
                    interior.push(InteriorFace {
                        vertices: *key,
                        tets: [*k0, *k1],
                        local_faces: [*f0, *f1],
                        normals: [n0, -n0],
                        area,
                        diameter: hf,
                    });
                }
                many => {
                    return Err(Error::Topology(format!(
                        "face {:?} is shared by {} tetrahedra",
                        key,
                        many.len()
                    )))
                }
            }
        }

        let surface = build_surface(&boundary)?;
        if surface.genus > 0 {
            log::warn!(
                "boundary surface has genus {}; the exterior coupling assumes a simply connected domain",
                surface.genus
            );
        }

        let mut max_ratio: f64 = 0.0;
        for (k, tet) in tets.iter().enumerate() {
            let face_area: f64 = TET_FACES
                .iter()
                .map(|f| {
                    let [a, b, c] = f.map(|i| vertices[tet.vertices[i]]);
                    0.5 * (b - a).cross(&(c - a)).norm()
                })
                .sum();
            let inradius = 3.0 * tet_volume[k] / face_area;
            max_ratio = max_ratio.max(tet_diameter[k] / inradius);
        }
        diagnostics.max_shape_ratio = max_ratio;
        log::debug!("mesh shape regularity max h_K/rho_K = {max_ratio:.3}");

        Ok(TetMesh {
            vertices,
            tets,
            boundary,
            interior,
            tet_faces,
            tet_volume,
            tet_diameter,
            surface,
            diagnostics,
        })
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_points(&self, k: usize) -> [Vec3; 4] {
        self.tets[k].vertices.map(|v| self.vertices[v])
    }

    pub fn tri_points(&self, t: usize) -> [Vec3; 3] {
        self.boundary[t].vertices.map(|v| self.vertices[v])
    }

    pub fn face_points(&self, f: usize) -> [Vec3; 3] {
        self.interior[f].vertices.map(|v| self.vertices[v])
    }

    pub fn surface_area(&self) -> f64 {
        self.boundary.iter().map(|t| t.area).sum()
    }

    pub fn volume(&self) -> f64 {
        self.tet_volume.iter().sum()
    }

    /// Maximum tet diameter.
    pub fn h(&self) -> f64 {
        self.tet_diameter.iter().cloned().fold(0.0, f64::max)
    }

    pub fn diameters(&self) -> Diameters {
        Diameters {
            h: self.h(),
            tet: self.tet_diameter.clone(),
            interior: self.interior.iter().map(|f| f.diameter).collect(),
            boundary: self.boundary.iter().map(|t| t.diameter).collect(),
        }
    }

    /// Distinct region tags in first-appearance order.
    pub fn regions(&self) -> Vec<i32> {
        let mut out = Vec::new();
        for t in &self.tets {
            if !out.contains(&t.region) {
                out.push(t.region);
            }
        }
        out
    }

    pub fn face_weights(&self, materials: &MaterialConfig) -> Result<FaceWeights> {
        let sigma = |k: usize| materials.sigma(self.tets[k].region);
        let mut s_interior = Vec::with_capacity(self.interior.len());
        for f in &self.interior {
            s_interior.push(sigma(f.tets[0])?.min(sigma(f.tets[1])?));
        }
        let mut s_boundary = Vec::with_capacity(self.boundary.len());
        for t in &self.boundary {
            s_boundary.push(sigma(t.owner)?);
        }
        Ok(FaceWeights {
            s_interior,
            h_interior: self.interior.iter().map(|f| f.diameter).collect(),
            s_boundary,
            h_boundary: self.boundary.iter().map(|t| t.diameter).collect(),
        })
    }

    /// Tet containing `x` (barycentric test with a small tolerance).
    pub fn locate(&self, x: &Vec3, tol: f64) -> Option<usize> {
        (0..self.tets.len()).find(|&k| {
            let b = barycentric_tet(&self.tet_points(k), x);
            b.iter().all(|&l| l >= -tol)
        })
    }

    /// Solid-angle winding number of the boundary surface around `x`:
    /// 1 for interior points, 0 for exterior points.
    pub fn winding_number(&self, x: &Vec3) -> f64 {
        let mut omega = 0.0;
        for t in 0..self.boundary.len() {
            let [a, b, c] = self.tri_points(t).map(|p| p - x);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
            omega += 2.0 * num.atan2(den);
        }
        omega / (4.0 * std::f64::consts::PI)
    }

    /// Distance from `x` to the nearest boundary vertex or triangle centroid.
    pub fn boundary_distance_estimate(&self, x: &Vec3) -> f64 {
        let mut d = f64::INFINITY;
        for t in 0..self.boundary.len() {
            let p = self.tri_points(t);
            d = d.min(point_triangle_distance(x, &p));
        }
        d
    }
}

pub fn barycentric_tet(p: &[Vec3; 4], x: &Vec3) -> [f64; 4] {
    let vol = signed_volume(p);
    let mut out = [0.0; 4];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut q = *p;
        q[i] = *x;
        *slot = signed_volume(&q) / vol;
    }
    out
}

/// Euclidean distance from a point to a (closed) triangle.
pub fn point_triangle_distance(x: &Vec3, p: &[Vec3; 3]) -> f64 {
    let e0 = p[1] - p[0];
    let e1 = p[2] - p[0];
    let n = e0.cross(&e1);
    let nn = n.norm_squared();
    let w = x - p[0];
    // Projection barycentrics.
    let s = w.cross(&e1).dot(&n) / nn;
    let t = e0.cross(&w).dot(&n) / nn;
    if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
        return (n.dot(&w) / nn.sqrt()).abs();
    }
    let seg = |a: &Vec3, b: &Vec3| {
        let d = b - a;
        let u = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (x - (a + d * u)).norm()
    };
    seg(&p[0], &p[1])
        .min(seg(&p[1], &p[2]))
        .min(seg(&p[2], &p[0]))
}

fn build_surface(boundary: &[BoundaryTri]) -> Result<SurfaceTopology> {
    if boundary.is_empty() {
        return Err(Error::Topology("mesh has no boundary faces".into()));
    }
    let mut verts: Vec<usize> = boundary.iter().flat_map(|t| t.vertices).collect();
    verts.sort_unstable();
    verts.dedup();
    let vertex_index: HashMap<usize, usize> =
        verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut edge_tris: Vec<Vec<usize>> = Vec::new();
    let mut tri_edges = Vec::with_capacity(boundary.len());
    for (t, tri) in boundary.iter().enumerate() {
        let mut te = [0; 3];
        for (i, slot) in te.iter_mut().enumerate() {
            let a = tri.vertices[(i + 1) % 3];
            let b = tri.vertices[(i + 2) % 3];
            let key = if a < b { [a, b] } else { [b, a] };
            let idx = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_tris.push(Vec::new());
                edges.len() - 1
            });
            edge_tris[idx].push(t);
            *slot = idx;
        }
        tri_edges.push(te);
    }
    if let Some((e, tris)) = edge_tris.iter().enumerate().find(|(_, t)| t.len() != 2) {
        return Err(Error::Topology(format!(
            "boundary edge {:?} belongs to {} triangles; the surface is not a closed 2-manifold",
            edges[e],
            tris.len()
        )));
    }

    // Connectivity across shared edges.
    let mut seen = vec![false; boundary.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(t) = stack.pop() {
        for &e in &tri_edges[t] {
            for &n in &edge_tris[e] {
                if !seen[n] {
                    seen[n] = true;
                    count += 1;
                    stack.push(n);
                }
            }
        }
    }
    if count != boundary.len() {
        return Err(Error::Topology(
            "boundary surface has more than one connected component".into(),
        ));
    }

    let chi = verts.len() as i64 - edges.len() as i64 + boundary.len() as i64;
    let genus = ((2 - chi) / 2).max(0) as usize;
    Ok(SurfaceTopology {
        vertices: verts,
        vertex_index,
        edges,
        tri_edges,
        genus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_tet_topology() {
        let m = reference_tet();
        assert_eq!(m.n_tets(), 1);
        assert_eq!(m.interior.len(), 0);
        assert_eq!(m.boundary.len(), 4);
        assert!((m.tet_diameter[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_tet_topology() {
        let m = two_tets();
        assert_eq!(m.interior.len(), 1);
        assert_eq!(m.boundary.len(), 6);
    }

    #[test]
    fn kuhn_single_cube() {
        let m = kuhn_cube(1);
        assert_eq!(m.n_tets(), 6);
        assert_eq!(m.interior.len(), 6);
        assert_eq!(m.boundary.len(), 12);
        assert!((m.h() - 3f64.sqrt()).abs() < 1e-14);
        assert!((m.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normals_point_outward_on_cube() {
        let m = kuhn_cube(2);
        let c = Vec3::new(0.5, 0.5, 0.5);
        for (t, tri) in m.boundary.iter().enumerate() {
            let p = m.tri_points(t);
            let centroid = (p[0] + p[1] + p[2]) / 3.0;
            assert!(tri.normal.dot(&(centroid - c)) > 0.0);
            let cr = (p[1] - p[0]).cross(&(p[2] - p[0]));
            assert!(cr.dot(&tri.normal) > 0.0);
            assert!((tri.normal.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_tets_are_repaired() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let m = TetMesh::new(
            v,
            vec![Tet {
                vertices: [0, 1, 2, 3],
                region: 1,
            }],
        )
        .unwrap();
        assert_eq!(m.diagnostics.reoriented, vec![0]);
        assert!(m.tet_volume[0] > 0.0);
    }

    #[test]
    fn degenerate_tet_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        let err = TetMesh::new(
            v,
            vec![Tet {
                vertices: [0, 1, 2, 3],
                region: 1,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
    }

    #[test]
    fn nonmanifold_face_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(1.0, 1.0, 1.0),
        ];
        let tets = vec![
            Tet {
                vertices: [0, 1, 2, 3],
                region: 1,
            },
            Tet {
                vertices: [0, 1, 2, 4],
                region: 1,
            },
            Tet {
                vertices: [0, 1, 2, 5],
                region: 1,
            },
        ];
        assert!(matches!(TetMesh::new(v, tets), Err(Error::Topology(_))));
    }

    #[test]
    fn two_components_rejected() {
        let mut v: Vec<Vec3> = reference_tet().vertices.clone();
        v.extend(
            reference_tet()
                .vertices
                .iter()
                .map(|p| p + Vec3::new(5.0, 0.0, 0.0)),
        );
        let tets = vec![
            Tet {
                vertices: [0, 1, 2, 3],
                region: 1,
            },
            Tet {
                vertices: [4, 5, 6, 7],
                region: 1,
            },
        ];
        assert!(matches!(TetMesh::new(v, tets), Err(Error::Topology(_))));
    }

    #[test]
    fn winding_number_inside_outside() {
        let m = kuhn_cube(2);
        assert!((m.winding_number(&Vec3::new(0.3, 0.6, 0.5)) - 1.0).abs() < 1e-12);
        assert!(m.winding_number(&Vec3::new(2.0, 0.6, 0.5)).abs() < 1e-12);
        assert!(m.locate(&Vec3::new(0.3, 0.6, 0.5), 1e-12).is_some());
        assert!(m.locate(&Vec3::new(1.3, 0.6, 0.5), 1e-12).is_none());
    }

    #[test]
    fn point_triangle_distance_cases() {
        let p = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        assert!((point_triangle_distance(&Vec3::new(0.2, 0.2, 3.0), &p) - 3.0).abs() < 1e-15);
        assert!((point_triangle_distance(&Vec3::new(-1.0, 0.0, 0.0), &p) - 1.0).abs() < 1e-15);
        let d = point_triangle_distance(&Vec3::new(1.0, 1.0, 0.0), &p);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
