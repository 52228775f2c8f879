//! Discrete spaces X_h, Psi_h, Lambda_h and their interpolation utilities.

mod surface;
mod volume;

pub use surface::{LambdaSpace, PsiSpace, SurfaceGeometry};
pub use volume::XSpace;

use faer::c64;
use nalgebra::{DMatrix, DVector};

use crate::cvec::{self, CVec3};
use crate::error::{Error, Result};
use crate::mesh::{TetMesh, Vec3};
use crate::quadrature::{gauss_legendre, gauss_tet, gauss_tri};

/// Highest supported polynomial order m.
pub const MAX_M: usize = 5;

#[derive(Debug, Clone)]
pub struct SpaceSet {
    pub m: usize,
    pub x: XSpace,
    pub psi: PsiSpace,
    pub lambda: LambdaSpace,
    pub geom: SurfaceGeometry,
    /// Surface integrals of the Psi_h basis functions.
    pub c_psi: Vec<f64>,
    /// Surface integrals of the Lambda_h basis functions.
    pub c_lambda: Vec<f64>,
    pub surface_area: f64,
}

pub fn build_spaces(mesh: &TetMesh, m: usize) -> Result<SpaceSet> {
    if !(1..=MAX_M).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "polynomial order m must be in 1..={MAX_M}, got {m}"
        )));
    }
    let x = XSpace::new(mesh, m)?;
    let geom = SurfaceGeometry::new(mesh);
    let psi = PsiSpace::new(mesh, &geom, m + 1);
    let lambda = LambdaSpace::new(geom.len(), m - 1);

    let rule = gauss_tri(m + 1)?;
    let mut c_psi = vec![0.0; psi.dim()];
    let mut c_lambda = vec![0.0; lambda.dim()];
    let mut vp = vec![0.0; psi.n_local()];
    let mut vl = vec![0.0; lambda.n_local()];
    for t in 0..geom.len() {
        let jac = 2.0 * geom.area[t];
        for (b, w) in rule.iter() {
            psi.eval(b, &mut vp);
            lambda.eval(b, &mut vl);
            for (i, &d) in psi.dofs(t).iter().enumerate() {
                c_psi[d] += w * jac * vp[i];
            }
            for (i, v) in vl.iter().enumerate() {
                c_lambda[lambda.offset(t) + i] += w * jac * v;
            }
        }
    }
    let surface_area = geom.area.iter().sum();
    Ok(SpaceSet {
        m,
        x,
        psi,
        lambda,
        geom,
        c_psi,
        c_lambda,
        surface_area,
    })
}

/// Scalar data on the surface, given the triangle and the physical point.
pub type SurfaceFn<'a> = dyn Fn(usize, &Vec3) -> f64 + Sync + 'a;

impl SpaceSet {
    pub fn n_x(&self) -> usize {
        self.x.dim()
    }

    pub fn n_psi(&self) -> usize {
        self.psi.dim()
    }

    pub fn n_lambda(&self) -> usize {
        self.lambda.dim()
    }

    /// Coefficients of the constant function 1 in Psi_h.
    pub fn psi_one(&self) -> Vec<f64> {
        vec![1.0; self.n_psi()]
    }

    /// Coefficients of the constant function 1 in Lambda_h.
    pub fn lambda_one(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n_lambda()];
        for t in 0..self.geom.len() {
            v[self.lambda.offset(t)] = 1.0;
        }
        v
    }

    /// Surface interpolant: vertex values, edge moments against
    /// P_{m-1}(e) and triangle moments against P_{m-2}(T).
    /// With `zero_mean`, the constant that makes the integral vanish is
    /// subtracted afterwards.
    pub fn surface_interpolate(
        &self,
        f: &SurfaceFn,
        order: usize,
        zero_mean: bool,
    ) -> Result<Vec<f64>> {
        let k = self.psi.degree;
        let n = self.psi.n_local();
        let (eg, ew) = gauss_legendre(order / 2 + 1);
        let rule = gauss_tri(order)?;
        let mut sum = vec![0.0; self.n_psi()];
        let mut count = vec![0usize; self.n_psi()];
        let mut vals = vec![0.0; n];
        for t in 0..self.geom.len() {
            let mut g = DMatrix::<f64>::zeros(n, n);
            let mut d = DVector::<f64>::zeros(n);
            let mut row = 0;
            for r in 0..3 {
                let mut b = [0.0; 3];
                b[r] = 1.0;
                self.psi.eval(&b, &mut vals);
                for j in 0..n {
                    g[(row, j)] = vals[j];
                }
                d[row] = f(t, &self.geom.points[t][r]);
                row += 1;
            }
            for r in 0..3 {
                let (a, bb) = ((r + 1) % 3, (r + 2) % 3);
                for p in 0..k - 1 {
                    for (&s, &w) in eg.iter().zip(&ew) {
                        let mut b = [0.0; 3];
                        b[a] = 1.0 - s;
                        b[bb] = s;
                        let q = s.powi(p as i32);
                        self.psi.eval(&b, &mut vals);
                        for j in 0..n {
                            g[(row, j)] += w * q * vals[j];
                        }
                        d[row] += w * q * f(t, &self.geom.point(t, &b));
                    }
                    row += 1;
                }
            }
            if k >= 3 {
                for deg in 0..=(k - 3) as i32 {
                    for a in (0..=deg).rev() {
                        for (b, w) in rule.iter() {
                            let q = b[1].powi(a) * b[2].powi(deg - a);
                            self.psi.eval(b, &mut vals);
                            for j in 0..n {
                                g[(row, j)] += w * q * vals[j];
                            }
                            d[row] += w * q * f(t, &self.geom.point(t, b));
                        }
                        row += 1;
                    }
                }
            }
            debug_assert_eq!(row, n);
            let c = g.lu().solve(&d).ok_or_else(|| {
                Error::Singular("interpolation functionals not unisolvent".into())
            })?;
            for (i, &dof) in self.psi.dofs(t).iter().enumerate() {
                sum[dof] += c[i];
                count[dof] += 1;
            }
        }
        let mut out: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
        if zero_mean {
            let mean = dot(&self.c_psi, &out) / self.surface_area;
            out.iter_mut().for_each(|v| *v -= mean);
        }
        Ok(out)
    }

    /// Triangle-wise L2 projection onto P_{m-1}, optionally followed by
    /// subtraction of the mean.
    pub fn project_lambda(&self, f: &SurfaceFn, order: usize, zero_mean: bool) -> Result<Vec<f64>> {
        let n = self.lambda.n_local();
        let rule = gauss_tri(order)?;
        let mut out = vec![0.0; self.n_lambda()];
        let mut vals = vec![0.0; n];
        for t in 0..self.geom.len() {
            let mut g = DMatrix::<f64>::zeros(n, n);
            let mut d = DVector::<f64>::zeros(n);
            for (b, w) in rule.iter() {
                self.lambda.eval(b, &mut vals);
                let fv = f(t, &self.geom.point(t, b));
                for i in 0..n {
                    d[i] += w * fv * vals[i];
                    for j in 0..n {
                        g[(i, j)] += w * vals[i] * vals[j];
                    }
                }
            }
            let c = g
                .cholesky()
                .ok_or_else(|| Error::Singular("local Lambda_h mass matrix".into()))?
                .solve(&d);
            out[self.lambda.offset(t)..self.lambda.offset(t) + n].copy_from_slice(c.as_slice());
        }
        if zero_mean {
            let mean = dot(&self.c_lambda, &out) / self.surface_area;
            for t in 0..self.geom.len() {
                out[self.lambda.offset(t)] -= mean;
            }
        }
        Ok(out)
    }

    /// Element-wise L2 projection of a volume field onto X_h.
    pub fn project_x(
        &self,
        mesh: &TetMesh,
        f: &(dyn Fn(usize, &Vec3) -> CVec3 + Sync),
        order: usize,
    ) -> Result<Vec<c64>> {
        let rule = gauss_tet(order)?;
        let nl = self.x.local_dim();
        let mut out = vec![cvec::ZERO; self.n_x()];
        let mut v = vec![Vec3::zeros(); nl];
        let mut c = vec![Vec3::zeros(); nl];
        for k in 0..mesh.n_tets() {
            let p = mesh.tet_points(k);
            let jac = 6.0 * mesh.tet_volume[k];
            let off = self.x.offset(k);
            for (b, w) in rule.iter() {
                let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3];
                self.x.eval(k, &x, &mut v, &mut c);
                let fx = f(k, &x);
                for i in 0..nl {
                    out[off + i] += cvec::dot_real(&fx, &v[i]) * (w * jac);
                }
            }
        }
        Ok(out)
    }

    /// Value and curl of a discrete X_h field at `x` in tet `k`.
    pub fn eval_u(&self, u: &[c64], k: usize, x: &Vec3) -> (CVec3, CVec3) {
        let nl = self.x.local_dim();
        let mut v = [Vec3::zeros(); 192];
        let mut c = [Vec3::zeros(); 192];
        self.x.eval(k, x, &mut v[..nl], &mut c[..nl]);
        let off = self.x.offset(k);
        let mut val = cvec::czero();
        let mut curl = cvec::czero();
        for i in 0..nl {
            val += cvec::scale(&v[i], u[off + i]);
            curl += cvec::scale(&c[i], u[off + i]);
        }
        (val, curl)
    }

    /// Value and surface curl of a discrete Psi_h field.
    pub fn eval_psi(&self, psi: &[c64], t: usize, b: &[f64; 3]) -> (c64, CVec3) {
        let n = self.psi.n_local();
        let mut v = [0.0; 32];
        let mut c = [Vec3::zeros(); 32];
        self.psi.eval(b, &mut v[..n]);
        self.psi.eval_curl(t, b, &mut c[..n]);
        let mut val = cvec::ZERO;
        let mut curl = cvec::czero();
        for (i, &d) in self.psi.dofs(t).iter().enumerate() {
            val += psi[d] * v[i];
            curl += cvec::scale(&c[i], psi[d]);
        }
        (val, curl)
    }

    pub fn eval_lambda(&self, lam: &[c64], t: usize, b: &[f64; 3]) -> c64 {
        let n = self.lambda.n_local();
        let mut v = [0.0; 32];
        self.lambda.eval(b, &mut v[..n]);
        let off = self.lambda.offset(t);
        (0..n).map(|i| lam[off + i] * v[i]).sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, kuhn_cube, reference_tet};

    #[test]
    fn build_rejects_m0() {
        assert!(build_spaces(&reference_tet(), 0).is_err());
    }

    #[test]
    fn single_tet_dims() {
        let s = build_spaces(&reference_tet(), 1).unwrap();
        assert_eq!((s.n_x(), s.n_psi(), s.n_lambda()), (12, 10, 4));
    }

    #[test]
    fn partition_of_unity_and_constraint_vectors() {
        let mesh = kuhn_cube(2);
        for m in 1..=3 {
            let s = build_spaces(&mesh, m).unwrap();
            let rule = gauss_tri(6).unwrap();
            let mut v = vec![0.0; s.psi.n_local()];
            for (b, _) in rule.iter() {
                s.psi.eval(b, &mut v);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            }
            let area = s.surface_area;
            assert!((area - 6.0).abs() < 1e-12);
            assert!((dot(&s.c_psi, &s.psi_one()) - area).abs() < 1e-12 * area);
            assert!((dot(&s.c_lambda, &s.lambda_one()) - area).abs() < 1e-12 * area);
        }
    }

    #[test]
    fn interpolation_reproduces_surface_polynomials() {
        let mesh = kuhn_cube(1);
        for m in 1..=3 {
            let s = build_spaces(&mesh, m).unwrap();
            let k = m + 1;
            // A degree-k polynomial in space restricts to P_k on each face.
            let f = |_t: usize, x: &Vec3| x.x.powi(k as i32) - 2.0 * x.y * x.z + 0.3;
            let c = s.surface_interpolate(&f, 2 * k + 2, false).unwrap();
            let rule = gauss_tri(7).unwrap();
            let mut v = vec![0.0; s.psi.n_local()];
            for t in 0..s.geom.len() {
                for (b, _) in rule.iter() {
                    s.psi.eval(b, &mut v);
                    let val: f64 = s.psi.dofs(t).iter().zip(&v).map(|(&d, vi)| c[d] * vi).sum();
                    let exact = f(t, &s.geom.point(t, b));
                    assert!((val - exact).abs() < 1e-12, "m={m}");
                }
            }
            let vertex_ok = (0..s.geom.len()).all(|t| {
                (0..3).all(|r| {
                    let mut b = [0.0; 3];
                    b[r] = 1.0;
                    s.psi.eval(&b, &mut v);
                    let val: f64 = s.psi.dofs(t).iter().zip(&v).map(|(&d, vi)| c[d] * vi).sum();
                    (val - f(t, &s.geom.points[t][r])).abs() < 1e-13
                })
            });
            assert!(vertex_ok);
        }
    }

    #[test]
    fn zero_mean_interpolant() {
        let s = build_spaces(&icosphere(0), 1).unwrap();
        let f = |_t: usize, x: &Vec3| 1.0 + x.x * x.y;
        let c = s.surface_interpolate(&f, 8, true).unwrap();
        assert!(dot(&s.c_psi, &c).abs() < 1e-13);
    }

    #[test]
    fn lambda_projection_of_coordinate_is_centroid() {
        let s = build_spaces(&kuhn_cube(1), 1).unwrap();
        let c = s.project_lambda(&|_t, x: &Vec3| x.x, 4, false).unwrap();
        for (p, ct) in s.geom.points.iter().zip(&c) {
            let centroid = (p[0].x + p[1].x + p[2].x) / 3.0;
            assert!((ct - centroid).abs() < 1e-14);
        }
        let pc = s
            .project_lambda(&|t, _x: &Vec3| t as f64, 2, false)
            .unwrap();
        assert!(pc
            .iter()
            .enumerate()
            .all(|(t, &v)| (v - t as f64).abs() < 1e-13));
        let zm = s
            .project_lambda(&|_t, x: &Vec3| x.x + 1.0, 4, true)
            .unwrap();
        assert!(dot(&s.c_lambda, &zm).abs() < 1e-13);
    }

    /// <curl_G phi_i, grad_G phi_j> summed over the closed surface is the
    /// zero matrix for continuous piecewise polynomials.
    #[test]
    fn surface_curl_is_orthogonal_to_gradients() {
        let mesh = icosphere(0);
        let s = build_spaces(&mesh, 1).unwrap();
        let n = s.n_psi();
        let nl = s.psi.n_local();
        let rule = gauss_tri(4).unwrap();
        let mut b_mat = DMatrix::<f64>::zeros(n, n);
        let mut curls = vec![Vec3::zeros(); nl];
        let mut grads = vec![Vec3::zeros(); nl];
        for t in 0..s.geom.len() {
            let jac = 2.0 * s.geom.area[t];
            for (b, w) in rule.iter() {
                s.psi.eval_curl(t, b, &mut curls);
                s.psi.eval_grad(t, b, &mut grads);
                for (i, &di) in s.psi.dofs(t).iter().enumerate() {
                    for (j, &dj) in s.psi.dofs(t).iter().enumerate() {
                        b_mat[(di, dj)] += w * jac * curls[i].dot(&grads[j]);
                    }
                }
            }
        }
        assert!(b_mat.amax() < 1e-12, "{}", b_mat.amax());
    }

    #[test]
    fn projection_of_linear_field_is_exact() {
        let mesh = kuhn_cube(1);
        let s = build_spaces(&mesh, 1).unwrap();
        let f = |_k: usize, x: &Vec3| cvec::real(&Vec3::new(x.y, x.z, x.x));
        let u = s.project_x(&mesh, &f, 4).unwrap();
        let x = Vec3::new(0.3, 0.4, 0.6);
        let k = mesh.locate(&x, 0.0).unwrap();
        let (val, curl) = s.eval_u(&u, k, &x);
        assert!((val - f(k, &x)).norm() < 1e-13);
        assert!((curl - cvec::real(&Vec3::new(-1.0, -1.0, -1.0))).norm() < 1e-12);
    }
}
