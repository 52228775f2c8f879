//! Broken vector P_m space with an orthonormal basis on every tet.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{TetMesh, Vec3};
use crate::quadrature::gauss_tet;

/// Scalar basis functions are orthonormalized monomials in the scaled
/// local coordinates `(x - c_K) / h_K`; the vector basis takes each scalar
/// function along each axis, local index `axis * n_scalar + s`.
#[derive(Debug, Clone)]
pub struct XSpace {
    pub m: usize,
    pub n_scalar: usize,
    exps: Vec<[i32; 3]>,
    center: Vec<Vec3>,
    scale: Vec<f64>,
    /// Row `s` holds the monomial coefficients of scalar function `s`.
    coeff: Vec<DMatrix<f64>>,
    /// Largest condition number of the monomial Gram matrices.
    pub max_gram_condition: f64,
}

fn exponents(m: usize) -> Vec<[i32; 3]> {
    let mut e = Vec::new();
    for d in 0..=m as i32 {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                e.push([a, b, d - a - b]);
            }
        }
    }
    e
}

impl XSpace {
    pub fn new(mesh: &TetMesh, m: usize) -> Result<Self> {
        let exps = exponents(m);
        let ns = exps.len();
        let rule = gauss_tet(2 * m.max(1))?;
        let mut center = Vec::with_capacity(mesh.n_tets());
        let mut scale = Vec::with_capacity(mesh.n_tets());
        let mut coeff = Vec::with_capacity(mesh.n_tets());
        let mut max_cond: f64 = 1.0;
        let mut mono = vec![0.0; ns];
        for k in 0..mesh.n_tets() {
            let p = mesh.tet_points(k);
            let c = (p[0] + p[1] + p[2] + p[3]) / 4.0;
            let h = mesh.tet_diameter[k];
            let jac = 6.0 * mesh.tet_volume[k];
            let mut gram = DMatrix::<f64>::zeros(ns, ns);
            for (b, w) in rule.iter() {
                let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3];
                let xi = (x - c) / h;
                for (s, e) in exps.iter().enumerate() {
                    mono[s] = xi.x.powi(e[0]) * xi.y.powi(e[1]) * xi.z.powi(e[2]);
                }
                for i in 0..ns {
                    for j in 0..ns {
                        gram[(i, j)] += w * jac * mono[i] * mono[j];
                    }
                }
            }
            let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
            let (lo, hi) = eig
                .iter()
                .fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            max_cond = max_cond.max(hi / lo);
            let chol = gram.cholesky().ok_or_else(|| {
                Error::Singular(format!(
                    "monomial Gram matrix of tet {k} is not positive definite"
                ))
            })?;
            let l = chol.l();
            let linv = l
                .solve_lower_triangular(&DMatrix::identity(ns, ns))
                .ok_or_else(|| {
                    Error::Singular(format!("Cholesky factor of tet {k} is singular"))
                })?;
            center.push(c);
            scale.push(h);
            coeff.push(linv);
        }
        log::debug!("X_h local Gram matrices: max condition number {max_cond:.3e}");
        Ok(XSpace {
            m,
            n_scalar: ns,
            exps,
            center,
            scale,
            coeff,
            max_gram_condition: max_cond,
        })
    }

    pub fn n_tets(&self) -> usize {
        self.center.len()
    }

    pub fn local_dim(&self) -> usize {
        3 * self.n_scalar
    }

    pub fn dim(&self) -> usize {
        self.n_tets() * self.local_dim()
    }

    pub fn offset(&self, tet: usize) -> usize {
        tet * self.local_dim()
    }

    /// Scalar basis values and physical gradients at `x`.
    pub fn eval_scalar(&self, tet: usize, x: &Vec3, phi: &mut [f64], grad: &mut [Vec3]) {
        let h = self.scale[tet];
        let xi = (x - self.center[tet]) / h;
        let ns = self.n_scalar;
        let pw = |v: f64, e: i32| if e <= 0 { 1.0 } else { v.powi(e) };
        let mut mono = [0.0; 64];
        let mut dmono = [Vec3::zeros(); 64];
        for (s, e) in self.exps.iter().enumerate() {
            let (px, py, pz) = (pw(xi.x, e[0]), pw(xi.y, e[1]), pw(xi.z, e[2]));
            mono[s] = px * py * pz;
            let dx = if e[0] > 0 {
                e[0] as f64 * pw(xi.x, e[0] - 1) * py * pz
            } else {
                0.0
            };
            let dy = if e[1] > 0 {
                e[1] as f64 * px * pw(xi.y, e[1] - 1) * pz
            } else {
                0.0
            };
            let dz = if e[2] > 0 {
                e[2] as f64 * px * py * pw(xi.z, e[2] - 1)
            } else {
                0.0
            };
            dmono[s] = Vec3::new(dx, dy, dz) / h;
        }
        let c = &self.coeff[tet];
        for s in 0..ns {
            let mut v = 0.0;
            let mut g = Vec3::zeros();
            for t in 0..=s {
                v += c[(s, t)] * mono[t];
                g += dmono[t] * c[(s, t)];
            }
            phi[s] = v;
            grad[s] = g;
        }
    }

    /// Values and curls of the `3 n_scalar` vector basis functions.
    pub fn eval(&self, tet: usize, x: &Vec3, values: &mut [Vec3], curls: &mut [Vec3]) {
        let ns = self.n_scalar;
        let mut phi = [0.0; 64];
        let mut grad = [Vec3::zeros(); 64];
        self.eval_scalar(tet, x, &mut phi[..ns], &mut grad[..ns]);
        for axis in 0..3 {
            let e = Vec3::ith(axis, 1.0);
            for s in 0..ns {
                values[axis * ns + s] = e * phi[s];
                curls[axis * ns + s] = grad[s].cross(&e);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{kuhn_cube, reference_tet};

    #[test]
    fn scalar_basis_is_orthonormal() {
        let mesh = kuhn_cube(1);
        for m in 1..=3 {
            let xs = XSpace::new(&mesh, m).unwrap();
            let ns = xs.n_scalar;
            assert_eq!(ns, (m + 1) * (m + 2) * (m + 3) / 6);
            let rule = gauss_tet(2 * m).unwrap();
            for k in [0, 3, 5] {
                let p = mesh.tet_points(k);
                let mut g = DMatrix::<f64>::zeros(ns, ns);
                let mut phi = vec![0.0; ns];
                let mut grad = vec![Vec3::zeros(); ns];
                for (b, w) in rule.iter() {
                    let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3];
                    xs.eval_scalar(k, &x, &mut phi, &mut grad);
                    for i in 0..ns {
                        for j in 0..ns {
                            g[(i, j)] += w * 6.0 * mesh.tet_volume[k] * phi[i] * phi[j];
                        }
                    }
                }
                assert!((g - DMatrix::identity(ns, ns)).amax() < 1e-12);
            }
        }
    }

    /// Coefficients of a linear field in the basis via L2 projection.
    fn project(xs: &XSpace, mesh: &TetMesh, f: impl Fn(Vec3) -> Vec3) -> Vec<f64> {
        let rule = gauss_tet(4).unwrap();
        let n = xs.local_dim();
        let mut c = vec![0.0; n];
        let mut v = vec![Vec3::zeros(); n];
        let mut cu = vec![Vec3::zeros(); n];
        let p = mesh.tet_points(0);
        for (b, w) in rule.iter() {
            let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3];
            xs.eval(0, &x, &mut v, &mut cu);
            for i in 0..n {
                c[i] += w * 6.0 * mesh.tet_volume[0] * f(x).dot(&v[i]);
            }
        }
        c
    }

    fn curl_at(xs: &XSpace, c: &[f64], x: Vec3) -> Vec3 {
        let n = xs.local_dim();
        let mut v = vec![Vec3::zeros(); n];
        let mut cu = vec![Vec3::zeros(); n];
        xs.eval(0, &x, &mut v, &mut cu);
        (0..n).map(|i| cu[i] * c[i]).sum()
    }

    #[test]
    fn curls_of_linear_fields() {
        let mesh = reference_tet();
        let xs = XSpace::new(&mesh, 1).unwrap();
        let x = Vec3::new(0.2, 0.3, 0.1);
        let c = project(&xs, &mesh, |_| Vec3::new(1.0, -2.0, 0.5));
        assert!(curl_at(&xs, &c, x).norm() < 1e-13);
        let c = project(&xs, &mesh, |p| Vec3::new(0.0, 0.0, p.x));
        assert!((curl_at(&xs, &c, x) - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
        let c = project(&xs, &mesh, |p| Vec3::new(p.y, p.z, p.x));
        assert!((curl_at(&xs, &c, x) - Vec3::new(-1.0, -1.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn dimensions() {
        let xs = XSpace::new(&reference_tet(), 1).unwrap();
        assert_eq!(xs.dim(), 12);
        let xs = XSpace::new(&crate::mesh::two_tets(), 2).unwrap();
        assert_eq!(xs.dim(), 60);
    }
}
