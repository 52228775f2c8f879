//! Surface spaces: continuous Lagrange P_{m+1} and broken P_{m-1}.

use crate::mesh::{TetMesh, Vec3};

/// Flat-triangle geometry of the boundary surface.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub points: Vec<[Vec3; 3]>,
    pub normal: Vec<Vec3>,
    pub area: Vec<f64>,
    /// Surface gradients of the three barycentric coordinates.
    pub grad_bary: Vec<[Vec3; 3]>,
}

impl SurfaceGeometry {
    pub fn new(mesh: &TetMesh) -> Self {
        let n = mesh.boundary.len();
        let mut g = SurfaceGeometry {
            points: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            area: Vec::with_capacity(n),
            grad_bary: Vec::with_capacity(n),
        };
        for (t, tri) in mesh.boundary.iter().enumerate() {
            let p = mesh.tri_points(t);
            let nrm = tri.normal;
            let a2 = 2.0 * tri.area;
            g.grad_bary.push([
                nrm.cross(&(p[2] - p[1])) / a2,
                nrm.cross(&(p[0] - p[2])) / a2,
                nrm.cross(&(p[1] - p[0])) / a2,
            ]);
            g.points.push(p);
            g.normal.push(nrm);
            g.area.push(tri.area);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, t: usize, b: &[f64; 3]) -> Vec3 {
        let p = &self.points[t];
        p[0] * b[0] + p[1] * b[1] + p[2] * b[2]
    }
}

/// `prod_{s<a} (k l - s) / (s + 1)` and its derivative in `l`.
#[cfg(test)]
fn silvester(k: usize, a: usize, l: f64) -> (f64, f64) {
    let mut v = 1.0;
    let mut d = 0.0;
    for s in 0..a {
        let f = (k as f64 * l - s as f64) / (s + 1) as f64;
        let df = k as f64 / (s + 1) as f64;
        d = d * f + v * df;
        v *= f;
    }
    (v, d)
}

/// Continuous Lagrange space of degree `k` on the boundary triangulation.
///
/// Global numbering: surface vertices, then `k-1` dofs per edge ordered
/// from the lower to the higher global vertex id, then interior dofs.
#[derive(Debug, Clone)]
pub struct PsiSpace {
    pub degree: usize,
    /// Barycentric lattice indices of the local nodes.
    pub nodes: Vec<[usize; 3]>,
    dofs: Vec<Vec<usize>>,
    grad_bary: Vec<[Vec3; 3]>,
    /// `grad l_r x n` per triangle.
    curl_bary: Vec<[Vec3; 3]>,
    dim: usize,
}

impl PsiSpace {
    pub fn new(mesh: &TetMesh, geom: &SurfaceGeometry, degree: usize) -> Self {
        assert!(degree >= 1);
        let k = degree;
        let mut nodes = Vec::new();
        for i in (0..=k).rev() {
            for j in (0..=k - i).rev() {
                nodes.push([i, j, k - i - j]);
            }
        }
        let surf = &mesh.surface;
        let nv = surf.vertices.len();
        let ne = surf.edges.len();
        let n_int = if k >= 3 { (k - 1) * (k - 2) / 2 } else { 0 };
        let edge_base = nv;
        let int_base = nv + ne * (k - 1);
        let mut dofs = Vec::with_capacity(mesh.boundary.len());
        for (t, tri) in mesh.boundary.iter().enumerate() {
            let mut local = Vec::with_capacity(nodes.len());
            let mut interior_count = 0;
            for node in &nodes {
                let zeros = node.iter().filter(|&&v| v == 0).count();
                let dof = if let Some(r) = node.iter().position(|&v| v == k) {
                    surf.vertex_index[&tri.vertices[r]]
                } else if zeros == 1 {
                    let r = node.iter().position(|&v| v == 0).unwrap();
                    let a = (r + 1) % 3;
                    let b = (r + 2) % 3;
                    let e = surf.tri_edges[t][r];
                    let pos_from_a = node[b];
                    let pos = if tri.vertices[a] == surf.edges[e][0] {
                        pos_from_a
                    } else {
                        k - pos_from_a
                    };
                    edge_base + e * (k - 1) + pos - 1
                } else {
                    interior_count += 1;
                    int_base + t * n_int + interior_count - 1
                };
                local.push(dof);
            }
            dofs.push(local);
        }
        PsiSpace {
            degree,
            nodes,
            dofs,
            grad_bary: geom.grad_bary.clone(),
            curl_bary: geom
                .grad_bary
                .iter()
                .zip(&geom.normal)
                .map(|(g, n)| g.map(|gi| gi.cross(n)))
                .collect(),
            dim: int_base + mesh.boundary.len() * n_int,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn dofs(&self, t: usize) -> &[usize] {
        &self.dofs[t]
    }

    pub fn eval(&self, b: &[f64; 3], out: &mut [f64]) {
        let (v, _) = silvester_table(self.degree, b);
        for (o, n) in out.iter_mut().zip(&self.nodes) {
            *o = v[0][n[0]] * v[1][n[1]] * v[2][n[2]];
        }
    }

    /// Surface gradients on triangle `t`.
    pub fn eval_grad(&self, t: usize, b: &[f64; 3], out: &mut [Vec3]) {
        self.combine(&self.grad_bary[t], b, out)
    }

    /// `curl_G phi = grad_G phi x n` on triangle `t`.
    pub fn eval_curl(&self, t: usize, b: &[f64; 3], out: &mut [Vec3]) {
        self.combine(&self.curl_bary[t], b, out)
    }

    /// `sum_r d phi / d l_r * g_r`.
    fn combine(&self, g: &[Vec3; 3], b: &[f64; 3], out: &mut [Vec3]) {
        let (v, d) = silvester_table(self.degree, b);
        for (o, n) in out.iter_mut().zip(&self.nodes) {
            let (v0, v1, v2) = (v[0][n[0]], v[1][n[1]], v[2][n[2]]);
            *o = g[0] * (d[0][n[0]] * v1 * v2)
                + g[1] * (v0 * d[1][n[1]] * v2)
                + g[2] * (v0 * v1 * d[2][n[2]]);
        }
    }
}

const MAX_DEGREE: usize = 7;
const INV: [f64; MAX_DEGREE] = [1.0, 0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0, 1.0 / 7.0];

/// Values and derivatives of `silvester(k, a, b_r)` for all `a <= k`.
#[inline(always)]
fn silvester_table(k: usize, b: &[f64; 3]) -> ([[f64; MAX_DEGREE]; 3], [[f64; MAX_DEGREE]; 3]) {
    let mut v = [[1.0; MAX_DEGREE]; 3];
    let mut d = [[0.0; MAX_DEGREE]; 3];
    let kf = k as f64;
    for r in 0..3 {
        let (vr, dr) = (&mut v[r], &mut d[r]);
        for s in 0..k {
            let f = (kf * b[r] - s as f64) * INV[s];
            dr[s + 1] = dr[s] * f + vr[s] * kf * INV[s];
            vr[s + 1] = vr[s] * f;
        }
    }
    (v, d)
}

/// Broken P_{m-1} on the boundary triangles with local monomials
/// `l1^a l2^b` in the barycentric coordinates.
#[derive(Debug, Clone)]
pub struct LambdaSpace {
    pub degree: usize,
    pub exps: Vec<[i32; 2]>,
    n_tris: usize,
}

impl LambdaSpace {
    pub fn new(n_tris: usize, degree: usize) -> Self {
        let mut exps = Vec::new();
        for d in 0..=degree as i32 {
            for a in (0..=d).rev() {
                exps.push([a, d - a]);
            }
        }
        LambdaSpace {
            degree,
            exps,
            n_tris,
        }
    }

    pub fn n_local(&self) -> usize {
        self.exps.len()
    }

    pub fn dim(&self) -> usize {
        self.n_tris * self.n_local()
    }

    pub fn offset(&self, t: usize) -> usize {
        t * self.n_local()
    }

    pub fn eval(&self, b: &[f64; 3], out: &mut [f64]) {
        let mut p1 = [1.0; MAX_DEGREE];
        let mut p2 = [1.0; MAX_DEGREE];
        for i in 1..=self.degree {
            p1[i] = p1[i - 1] * b[1];
            p2[i] = p2[i - 1] * b[2];
        }
        for (o, e) in out.iter_mut().zip(&self.exps) {
            *o = p1[e[0] as usize] * p2[e[1] as usize];
        }
    }
}
