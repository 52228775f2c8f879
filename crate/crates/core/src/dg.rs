//! Interior penalty DG form on the conductor and its load functional.
//!
//! Unknowns are ordered `[u (X_h) | psi (Psi_h)]`. Rows are test functions,
//! columns trial functions, and every pairing conjugates the test side, so
//! a form value is `y^H A x`. The form splits into real sparse parts
//!
//! ```text
//! A = i omega M_mu + C + (D - D^T) + alpha P
//! ```
//!
//! where `D_ij = <{sigma^-1 curl f_j}, [f_i]>` is the consistency term and
//! `P` the unscaled jump penalty. The exterior `W` term is added by the
//! coupled system.

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::bem::BemMatrices;
use crate::cvec::{self, CVec3};
use crate::error::{Error, Result};
use crate::material::MaterialConfig;
use crate::mesh::{FaceWeights, TetMesh, Vec3};
use crate::quadrature::{gauss_tet, gauss_tri, QuadConfig, TetRule, TriRule};
use crate::spaces::SpaceSet;
use crate::sparse::{CsrMatrix, Triplets};

/// Volume data: tet index and physical point.
pub type VolumeField<'a> = dyn Fn(usize, &Vec3) -> CVec3 + Sync + 'a;
/// Boundary data: boundary triangle index and physical point.
pub type BoundaryField<'a> = dyn Fn(usize, &Vec3) -> CVec3 + Sync + 'a;

/// Tangential jump across an interior face.
pub fn jump_interior(v0: &CVec3, n0: &Vec3, v1: &CVec3, n1: &Vec3) -> CVec3 {
    cvec::cross_real(v0, n0) + cvec::cross_real(v1, n1)
}

/// Jump on a boundary face between the volume trace and the surface curl.
pub fn jump_boundary(v: &CVec3, n: &Vec3, curl_phi: &CVec3) -> CVec3 {
    cvec::cross_real(v, n) - curl_phi
}

pub fn average_interior(a: &CVec3, b: &CVec3) -> CVec3 {
    (a + b) * c64::new(0.5, 0.0)
}

#[derive(Debug, Clone)]
pub struct DgBlocks {
    pub n_x: usize,
    pub n_psi: usize,
    pub omega: f64,
    pub alpha: f64,
    /// `(mu u, v)` on X_h.
    pub mass: CsrMatrix,
    /// `(sigma^-1 curl u, curl v)` on X_h.
    pub curl: CsrMatrix,
    /// `D`, square over X_h + Psi_h with nonzero columns in X_h only.
    pub consistency: CsrMatrix,
    /// `sum_F s_F^-1 h_F^-1 <[f_j], [f_i]>` over X_h + Psi_h.
    pub penalty: CsrMatrix,
    /// `sum_F s_F h_F <{sigma^-1 curl f_j}, {sigma^-1 curl f_i}>` on X_h.
    pub flux: CsrMatrix,
}

struct Local {
    dofs: Vec<usize>,
    n: usize,
    d: Vec<f64>,
    p: Vec<f64>,
    f: Vec<f64>,
}

impl Local {
    fn new(dofs: Vec<usize>) -> Self {
        let n = dofs.len();
        Local {
            dofs,
            n,
            d: vec![0.0; n * n],
            p: vec![0.0; n * n],
            f: vec![0.0; n * n],
        }
    }

    fn add(&mut self, w: f64, jumps: &[Vec3], avgs: &[Vec3], s: f64, h: f64) {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                self.d[a * n + b] += w * avgs[b].dot(&jumps[a]);
                self.p[a * n + b] += w / (s * h) * jumps[b].dot(&jumps[a]);
                self.f[a * n + b] += w * s * h * avgs[b].dot(&avgs[a]);
            }
        }
    }

    fn emit(&self, d: &mut Triplets, p: &mut Triplets, f: &mut Triplets, n_x: usize) {
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let (r, c) = (self.dofs[a], self.dofs[b]);
                if c < n_x {
                    d.push(r, c, self.d[a * n + b]);
                }
                p.push(r, c, self.p[a * n + b]);
                if r < n_x && c < n_x {
                    f.push(r, c, self.f[a * n + b]);
                }
            }
        }
    }
}

fn tet_point(p: &[Vec3; 4], b: &[f64; 4]) -> Vec3 {
    p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3]
}

fn tri_point(p: &[Vec3; 3], b: &[f64; 3]) -> Vec3 {
    p[0] * b[0] + p[1] * b[1] + p[2] * b[2]
}

fn check_spaces(mesh: &TetMesh, spaces: &SpaceSet) -> Result<()> {
    if spaces.x.n_tets() != mesh.n_tets() || spaces.geom.len() != mesh.boundary.len() {
        return Err(Error::DimensionMismatch(
            "spaces were built on a different mesh".into(),
        ));
    }
    Ok(())
}

struct Coeffs {
    sigma: Vec<f64>,
    mu: Vec<f64>,
    weights: FaceWeights,
}

impl Coeffs {
    fn new(mesh: &TetMesh, materials: &MaterialConfig) -> Result<Self> {
        let mut sigma = Vec::with_capacity(mesh.n_tets());
        let mut mu = Vec::with_capacity(mesh.n_tets());
        for t in &mesh.tets {
            sigma.push(materials.sigma(t.region)?);
            mu.push(materials.mu(t.region)?);
        }
        Ok(Coeffs {
            sigma,
            mu,
            weights: mesh.face_weights(materials)?,
        })
    }
}

impl DgBlocks {
    pub fn assemble(
        mesh: &TetMesh,
        spaces: &SpaceSet,
        materials: &MaterialConfig,
        quad: &QuadConfig,
    ) -> Result<Self> {
        check_spaces(mesh, spaces)?;
        materials.validate()?;
        let co = Coeffs::new(mesh, materials)?;
        let n_x = spaces.n_x();
        let n = n_x + spaces.n_psi();
        let xs = &spaces.x;
        let nl = xs.local_dim();

        let vol = gauss_tet(quad.volume_order)?;
        let (mass, curl): (Vec<Triplets>, Vec<Triplets>) = (0..mesh.n_tets())
            .into_par_iter()
            .map(|k| {
                let p = mesh.tet_points(k);
                let jac = 6.0 * mesh.tet_volume[k];
                let off = xs.offset(k);
                let mut v = vec![Vec3::zeros(); nl];
                let mut c = vec![Vec3::zeros(); nl];
                let mut mm = vec![0.0; nl * nl];
                let mut cc = vec![0.0; nl * nl];
                for (b, w) in vol.iter() {
                    xs.eval(k, &tet_point(&p, b), &mut v, &mut c);
                    let w = w * jac;
                    for i in 0..nl {
                        for j in 0..nl {
                            mm[i * nl + j] += w * co.mu[k] * v[j].dot(&v[i]);
                            cc[i * nl + j] += w / co.sigma[k] * c[j].dot(&c[i]);
                        }
                    }
                }
                let (mut tm, mut tc) = (Triplets::new(), Triplets::new());
                for i in 0..nl {
                    for j in 0..nl {
                        tm.push(off + i, off + j, mm[i * nl + j]);
                        tc.push(off + i, off + j, cc[i * nl + j]);
                    }
                }
                (tm, tc)
            })
            .unzip();

        let tri = gauss_tri(quad.surface_order)?;
        let interior: Vec<Local> = (0..mesh.interior.len())
            .into_par_iter()
            .map(|f| interior_local(mesh, spaces, &co, &tri, f))
            .collect();
        let boundary: Vec<Local> = (0..mesh.boundary.len())
            .into_par_iter()
            .map(|t| boundary_local(mesh, spaces, &co, &tri, t))
            .collect();

        let (mut td, mut tp, mut tf) = (Triplets::new(), Triplets::new(), Triplets::new());
        for l in interior.iter().chain(&boundary) {
            l.emit(&mut td, &mut tp, &mut tf, n_x);
        }
        let merge = |parts: Vec<Triplets>| {
            let mut t = Triplets::new();
            parts.into_iter().for_each(|p| t.extend(p));
            CsrMatrix::from_triplets(n_x, n_x, t)
        };
        Ok(DgBlocks {
            n_x,
            n_psi: spaces.n_psi(),
            omega: materials.omega,
            alpha: materials.alpha,
            mass: merge(mass),
            curl: merge(curl),
            consistency: CsrMatrix::from_triplets(n, n, td),
            penalty: CsrMatrix::from_triplets(n, n, tp),
            flux: CsrMatrix::from_triplets(n_x, n_x, tf),
        })
    }

    pub fn dim(&self) -> usize {
        self.n_x + self.n_psi
    }

    /// Same blocks with a different penalty parameter.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        DgBlocks {
            alpha,
            ..self.clone()
        }
    }

    /// Dense `A_h` without the exterior term.
    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.dim();
        let mut a = Mat::<c64>::zeros(n, n);
        self.add_to(&mut a, 0);
        a
    }

    /// Adds `A_h` without the exterior term into `a` at `(off, off)`.
    pub fn add_to(&self, a: &mut Mat<c64>, off: usize) {
        let iw = c64::new(0.0, self.omega);
        for (r, c, v) in self.mass.iter() {
            a[(off + r, off + c)] += iw * v;
        }
        for (r, c, v) in self.curl.iter() {
            a[(off + r, off + c)] += c64::new(v, 0.0);
        }
        for (r, c, v) in self.consistency.iter() {
            a[(off + r, off + c)] += c64::new(v, 0.0);
            a[(off + c, off + r)] -= c64::new(v, 0.0);
        }
        for (r, c, v) in self.penalty.iter() {
            a[(off + r, off + c)] += c64::new(self.alpha * v, 0.0);
        }
    }

    /// `A_h x` without the exterior term.
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![cvec::ZERO; self.dim()];
        let iw = c64::new(0.0, self.omega);
        let mv = self.mass.mul_vec(&x[..self.n_x]);
        let cv = self.curl.mul_vec(&x[..self.n_x]);
        for i in 0..self.n_x {
            y[i] += iw * mv[i] + cv[i];
        }
        let dv = self.consistency.mul_vec(x);
        let dtv = self.consistency.transpose().mul_vec(x);
        let pv = self.penalty.mul_vec(x);
        for i in 0..self.dim() {
            y[i] += dv[i] - dtv[i] + pv[i] * self.alpha;
        }
        y
    }

    /// Squared parts of the DG energy norm of `(v, phi)`:
    /// `[omega ||mu^1/2 v||^2, ||sigma^-1/2 curl v||^2, ||s^-1/2 h^-1/2 [(v, phi)]||^2]`.
    pub fn energy_parts(&self, x: &[c64]) -> [f64; 3] {
        let v = &x[..self.n_x];
        [
            self.omega * self.mass.form(v, v).re,
            self.curl.form(v, v).re,
            self.penalty.form(x, x).re,
        ]
    }

    /// `||s^1/2 h^1/2 {sigma^-1 curl v}||^2`.
    pub fn flux_part(&self, v: &[c64]) -> f64 {
        self.flux.form(&v[..self.n_x], &v[..self.n_x]).re
    }
}

fn interior_local(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    co: &Coeffs,
    tri: &TriRule,
    f: usize,
) -> Local {
    let face = &mesh.interior[f];
    let xs = &spaces.x;
    let nl = xs.local_dim();
    let [k0, k1] = face.tets;
    let mut dofs: Vec<usize> = (0..nl).map(|i| xs.offset(k0) + i).collect();
    dofs.extend((0..nl).map(|i| xs.offset(k1) + i));
    let mut local = Local::new(dofs);
    let p = mesh.face_points(f);
    let mut v = vec![Vec3::zeros(); nl];
    let mut c = vec![Vec3::zeros(); nl];
    let mut jumps = vec![Vec3::zeros(); 2 * nl];
    let mut avgs = vec![Vec3::zeros(); 2 * nl];
    let (s, h) = (co.weights.s_interior[f], co.weights.h_interior[f]);
    for (b, w) in tri.iter() {
        let x = tri_point(&p, b);
        for (side, &k) in face.tets.iter().enumerate() {
            xs.eval(k, &x, &mut v, &mut c);
            let n = face.normals[side];
            for i in 0..nl {
                jumps[side * nl + i] = v[i].cross(&n);
                avgs[side * nl + i] = c[i] * (0.5 / co.sigma[k]);
            }
        }
        local.add(w * 2.0 * face.area, &jumps, &avgs, s, h);
    }
    local
}

fn boundary_local(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    co: &Coeffs,
    tri: &TriRule,
    t: usize,
) -> Local {
    let bt = &mesh.boundary[t];
    let xs = &spaces.x;
    let nl = xs.local_dim();
    let np = spaces.psi.n_local();
    let k = bt.owner;
    let n_x = spaces.n_x();
    let mut dofs: Vec<usize> = (0..nl).map(|i| xs.offset(k) + i).collect();
    dofs.extend(spaces.psi.dofs(t).iter().map(|d| n_x + d));
    let mut local = Local::new(dofs);
    let mut v = vec![Vec3::zeros(); nl];
    let mut c = vec![Vec3::zeros(); nl];
    let mut pc = vec![Vec3::zeros(); np];
    let mut jumps = vec![Vec3::zeros(); nl + np];
    let mut avgs = vec![Vec3::zeros(); nl + np];
    let (s, h) = (co.weights.s_boundary[t], co.weights.h_boundary[t]);
    for (b, w) in tri.iter() {
        let x = spaces.geom.point(t, b);
        xs.eval(k, &x, &mut v, &mut c);
        spaces.psi.eval_curl(t, b, &mut pc);
        for i in 0..nl {
            jumps[i] = v[i].cross(&bt.normal);
            avgs[i] = c[i] / co.sigma[k];
        }
        for i in 0..np {
            jumps[nl + i] = -pc[i];
        }
        local.add(w * 2.0 * bt.area, &jumps, &avgs, s, h);
    }
    local
}

/// Integrands of a linear functional over X_h + Psi_h,
///
/// ```text
/// F(v, phi) = sum_K (a, v)_K + (b, curl v)_K + sum_F <c, [(v, phi)]>_F + <d, {sigma^-1 curl v}>_F,
/// ```
///
/// where `a, b` are given per tet and `c, d` per face.
pub struct Functional<'a> {
    pub volume: &'a (dyn Fn(usize, &Vec3) -> (CVec3, CVec3) + Sync),
    pub interior: &'a (dyn Fn(usize, &Vec3) -> (CVec3, CVec3) + Sync),
    pub boundary: &'a (dyn Fn(usize, &Vec3) -> (CVec3, CVec3) + Sync),
}

/// Test vector of a [`Functional`], with data rules from `quad`.
pub fn assemble_functional(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    materials: &MaterialConfig,
    quad: &QuadConfig,
    fun: &Functional,
) -> Result<Vec<c64>> {
    check_spaces(mesh, spaces)?;
    let co = Coeffs::new(mesh, materials)?;
    let xs = &spaces.x;
    let nl = xs.local_dim();
    let np = spaces.psi.n_local();
    let n_x = spaces.n_x();
    let mut out = vec![cvec::ZERO; n_x + spaces.n_psi()];
    let vol: TetRule = gauss_tet(quad.data_order)?;
    let tri = quad.data_tri()?;

    let volume: Vec<Vec<c64>> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|k| {
            let p = mesh.tet_points(k);
            let jac = 6.0 * mesh.tet_volume[k];
            let mut v = vec![Vec3::zeros(); nl];
            let mut c = vec![Vec3::zeros(); nl];
            let mut loc = vec![cvec::ZERO; nl];
            for (b, w) in vol.iter() {
                let x = tet_point(&p, b);
                xs.eval(k, &x, &mut v, &mut c);
                let (fa, fb) = (fun.volume)(k, &x);
                let s = c64::new(w * jac, 0.0);
                let (fa, fb) = (fa * s, fb * s);
                for i in 0..nl {
                    loc[i] += cvec::dot_real(&fa, &v[i]) + cvec::dot_real(&fb, &c[i]);
                }
            }
            loc
        })
        .collect();
    for (k, loc) in volume.iter().enumerate() {
        for (i, l) in loc.iter().enumerate() {
            out[xs.offset(k) + i] += l;
        }
    }

    let interior: Vec<Vec<c64>> = (0..mesh.interior.len())
        .into_par_iter()
        .map(|f| {
            let face = &mesh.interior[f];
            let p = mesh.face_points(f);
            let mut v = vec![Vec3::zeros(); nl];
            let mut c = vec![Vec3::zeros(); nl];
            let mut loc = vec![cvec::ZERO; 2 * nl];
            for (b, w) in tri.iter() {
                let x = tri_point(&p, b);
                let (fc, fd) = (fun.interior)(f, &x);
                let s = c64::new(w * 2.0 * face.area, 0.0);
                let (fc, fd) = (fc * s, fd * s);
                for (side, &k) in face.tets.iter().enumerate() {
                    xs.eval(k, &x, &mut v, &mut c);
                    let n = face.normals[side];
                    let half = 0.5 / co.sigma[k];
                    for i in 0..nl {
                        loc[side * nl + i] += cvec::dot_real(&fc, &v[i].cross(&n))
                            + cvec::dot_real(&fd, &(c[i] * half));
                    }
                }
            }
            loc
        })
        .collect();
    for (f, loc) in interior.iter().enumerate() {
        for (side, &k) in mesh.interior[f].tets.iter().enumerate() {
            for i in 0..nl {
                out[xs.offset(k) + i] += loc[side * nl + i];
            }
        }
    }

    let boundary: Vec<Vec<c64>> = (0..mesh.boundary.len())
        .into_par_iter()
        .map(|t| {
            let bt = &mesh.boundary[t];
            let k = bt.owner;
            let mut v = vec![Vec3::zeros(); nl];
            let mut c = vec![Vec3::zeros(); nl];
            let mut pc = vec![Vec3::zeros(); np];
            let mut loc = vec![cvec::ZERO; nl + np];
            for (b, w) in tri.iter() {
                let x = spaces.geom.point(t, b);
                xs.eval(k, &x, &mut v, &mut c);
                spaces.psi.eval_curl(t, b, &mut pc);
                let (fc, fd) = (fun.boundary)(t, &x);
                let s = c64::new(w * 2.0 * bt.area, 0.0);
                let (fc, fd) = (fc * s, fd * (s / co.sigma[k]));
                for i in 0..nl {
                    loc[i] +=
                        cvec::dot_real(&fc, &v[i].cross(&bt.normal)) + cvec::dot_real(&fd, &c[i]);
                }
                for i in 0..np {
                    loc[nl + i] -= cvec::dot_real(&fc, &pc[i]);
                }
            }
            loc
        })
        .collect();
    for (t, loc) in boundary.iter().enumerate() {
        let k = mesh.boundary[t].owner;
        for i in 0..nl {
            out[xs.offset(k) + i] += loc[i];
        }
        for (i, d) in spaces.psi.dofs(t).iter().enumerate() {
            out[n_x + d] += loc[nl + i];
        }
    }
    Ok(out)
}

/// Load functional `L_h` over X_h + Psi_h, with the Nitsche terms of
/// tangential Dirichlet data `g_D` when given.
pub fn assemble_lh(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    materials: &MaterialConfig,
    quad: &QuadConfig,
    j_e: &VolumeField,
    g_d: Option<&BoundaryField>,
) -> Result<Vec<c64>> {
    let co = Coeffs::new(mesh, materials)?;
    let alpha = materials.alpha;
    let inv = |k: usize| c64::new(1.0 / co.sigma[k], 0.0);
    let volume = |k: usize, x: &Vec3| (cvec::czero(), j_e(k, x) * inv(k));
    let interior = |f: usize, x: &Vec3| {
        let [k0, k1] = mesh.interior[f].tets;
        (
            average_interior(&(j_e(k0, x) * inv(k0)), &(j_e(k1, x) * inv(k1))),
            cvec::czero(),
        )
    };
    let boundary = |t: usize, x: &Vec3| {
        let k = mesh.boundary[t].owner;
        let mut c = j_e(k, x) * inv(k);
        let mut d = cvec::czero();
        if let Some(g) = g_d {
            let gv = g(t, x);
            let (s, h) = (co.weights.s_boundary[t], co.weights.h_boundary[t]);
            c += gv * c64::new(alpha / (s * h), 0.0);
            d -= gv;
        }
        (c, d)
    };
    assemble_functional(
        mesh,
        spaces,
        materials,
        quad,
        &Functional {
            volume: &volume,
            interior: &interior,
            boundary: &boundary,
        },
    )
}

/// A trial pair `(u, psi)` given pointwise: `u` and `curl u` per tet, and
/// `curl_Gamma psi` per boundary triangle.
pub struct ExactTrial<'a> {
    pub u: &'a VolumeField<'a>,
    pub curl_u: &'a VolumeField<'a>,
    pub curl_psi: &'a BoundaryField<'a>,
}

/// `A_h((u, psi), (v_i, phi_i))` without the exterior term, for every test
/// function, by quadrature of the given trial pair.
pub fn apply_exact(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    materials: &MaterialConfig,
    quad: &QuadConfig,
    trial: &ExactTrial,
) -> Result<Vec<c64>> {
    let co = Coeffs::new(mesh, materials)?;
    let alpha = materials.alpha;
    let omega = materials.omega;
    let volume = |k: usize, x: &Vec3| {
        let a = (trial.u)(k, x) * c64::new(0.0, omega * co.mu[k]);
        (a, (trial.curl_u)(k, x) / c64::new(co.sigma[k], 0.0))
    };
    let interior = |f: usize, x: &Vec3| {
        let face = &mesh.interior[f];
        let [k0, k1] = face.tets;
        let flux = average_interior(
            &((trial.curl_u)(k0, x) / c64::new(co.sigma[k0], 0.0)),
            &((trial.curl_u)(k1, x) / c64::new(co.sigma[k1], 0.0)),
        );
        let jump = jump_interior(
            &(trial.u)(k0, x),
            &face.normals[0],
            &(trial.u)(k1, x),
            &face.normals[1],
        );
        let (s, h) = (co.weights.s_interior[f], co.weights.h_interior[f]);
        (flux + jump * c64::new(alpha / (s * h), 0.0), -jump)
    };
    let boundary = |t: usize, x: &Vec3| {
        let bt = &mesh.boundary[t];
        let k = bt.owner;
        let flux = (trial.curl_u)(k, x) / c64::new(co.sigma[k], 0.0);
        let jump = jump_boundary(&(trial.u)(k, x), &bt.normal, &(trial.curl_psi)(t, x));
        let (s, h) = (co.weights.s_boundary[t], co.weights.h_boundary[t]);
        (flux + jump * c64::new(alpha / (s * h), 0.0), -jump)
    };
    assemble_functional(
        mesh,
        spaces,
        materials,
        quad,
        &Functional {
            volume: &volume,
            interior: &interior,
            boundary: &boundary,
        },
    )
}

/// Fields `(v, phi, eta)` measured in the DG energy norm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormParts {
    /// `omega ||mu^1/2 v||^2`.
    pub volume: f64,
    /// `||sigma^-1/2 curl v||^2`.
    pub curl: f64,
    /// `||s^-1/2 h^-1/2 [(v, phi)]||^2`.
    pub jump: f64,
    /// `omega mu0 ||phi||_1/2^2`.
    pub psi_half: f64,
    /// `omega mu0 ||eta||_-1/2^2`.
    pub lambda_minus_half: f64,
    /// `||s^1/2 h^1/2 {sigma^-1 curl v}||^2`.
    pub flux: f64,
}

impl NormParts {
    pub fn norm(&self) -> f64 {
        (self.volume + self.curl + self.jump + self.psi_half + self.lambda_minus_half).sqrt()
    }

    pub fn norm_star(&self) -> f64 {
        (self.norm().powi(2) + self.flux).sqrt()
    }
}

/// Squared norm parts of discrete fields. `x` holds `[v | phi]`.
pub fn norm_parts(
    dg: &DgBlocks,
    bem: &BemMatrices,
    spaces: &SpaceSet,
    mu0: f64,
    x: &[c64],
    eta: &[c64],
) -> Result<NormParts> {
    if x.len() != dg.dim() || eta.len() != bem.v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} + {} coefficients, got {} + {}",
            dg.dim(),
            bem.v.nrows(),
            x.len(),
            eta.len()
        )));
    }
    let [volume, curl, jump] = dg.energy_parts(x);
    let wm = dg.omega * mu0;
    Ok(NormParts {
        volume,
        curl,
        jump,
        psi_half: wm * bem.w_energy(spaces, &x[dg.n_x..])?,
        lambda_minus_half: wm * bem.v_energy(eta)?,
        flux: dg.flux_part(x),
    })
}

pub fn dg_norm(
    dg: &DgBlocks,
    bem: &BemMatrices,
    spaces: &SpaceSet,
    mu0: f64,
    x: &[c64],
    eta: &[c64],
) -> Result<f64> {
    Ok(norm_parts(dg, bem, spaces, mu0, x, eta)?.norm())
}

pub fn dg_norm_star(
    dg: &DgBlocks,
    bem: &BemMatrices,
    spaces: &SpaceSet,
    mu0: f64,
    x: &[c64],
    eta: &[c64],
) -> Result<f64> {
    Ok(norm_parts(dg, bem, spaces, mu0, x, eta)?.norm_star())
}

#[cfg(test)]
mod tests;
