//! The bordered FEM/BEM system and its direct solution.
//!
//! Unknowns are `[u | psi | lambda | m_psi | m_lambda]`; the two scalar
//! multipliers enforce the zero-mean conditions on Psi_h and Lambda_h.
//! With `C = 1/2 M - K` the block rows read
//!
//! ```text
//! [ A_uu      A_upsi                     0              ] u
//! [ A_psiu    A_psipsi + i w mu0 W       -i w mu0 C^T   ] psi
//! [ 0         i w mu0 C                  i w mu0 V      ] lambda
//! ```
//!
//! plus the constraint rows and columns `c_psi`, `c_lambda`.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};

use crate::bem::{mat_vec, BemMatrices};
use crate::cvec;
use crate::dg::DgBlocks;
use crate::error::{Error, Result};
use crate::material::MaterialConfig;
use crate::mesh::{TetMesh, Vec3};
use crate::quadrature::QuadConfig;
use crate::spaces::SpaceSet;

/// Relative residual above which a solve is reported as failed.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub matrix: Mat<c64>,
    pub rhs: Vec<c64>,
    pub n_x: usize,
    pub n_psi: usize,
    pub n_lambda: usize,
    pub omega: f64,
    pub mu0: f64,
    pub alpha: f64,
    /// Constants added to the discrete `psi` and `lambda`, which are kept
    /// mean-free by the spaces.
    pub psi_offset: c64,
    pub lambda_offset: c64,
}

#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub u: Vec<c64>,
    pub psi: Vec<c64>,
    pub lambda: Vec<c64>,
    pub multipliers: [c64; 2],
    pub psi_offset: c64,
    pub lambda_offset: c64,
    /// `||A x - b|| / ||b||`, or `||A x||` for a zero right-hand side.
    pub residual: f64,
    /// Ratio of the largest to the smallest pivot magnitude.
    pub pivot_ratio: f64,
}

impl CoupledSolution {
    /// `[u | psi]`, the argument of the DG form.
    pub fn volume_pair(&self) -> Vec<c64> {
        let mut x = self.u.clone();
        x.extend_from_slice(&self.psi);
        x
    }

    /// Neumann trace coefficients including the known mean.
    pub fn lambda_with_offset(&self, spaces: &SpaceSet) -> Vec<c64> {
        let mut l = self.lambda.clone();
        for (v, o) in l.iter_mut().zip(spaces.lambda_one()) {
            *v += self.lambda_offset * o;
        }
        l
    }

    pub fn psi_with_offset(&self) -> Vec<c64> {
        self.psi.iter().map(|v| v + self.psi_offset).collect()
    }
}

impl CoupledSystem {
    pub fn dim(&self) -> usize {
        self.n_x + self.n_psi + self.n_lambda + 2
    }

    pub fn psi_start(&self) -> usize {
        self.n_x
    }

    pub fn lambda_start(&self) -> usize {
        self.n_x + self.n_psi
    }

    /// Index of the `psi` multiplier; the `lambda` multiplier follows.
    pub fn multiplier_start(&self) -> usize {
        self.n_x + self.n_psi + self.n_lambda
    }

    /// Square part without constraint rows and columns.
    pub fn unconstrained(&self) -> faer::MatRef<'_, c64> {
        let n = self.multiplier_start();
        self.matrix.as_ref().submatrix(0, 0, n, n)
    }

    /// Adds the DG load `L_h` (length `n_x + n_psi`) to the first block rows.
    pub fn add_load(&mut self, lh: &[c64]) -> Result<()> {
        if lh.len() != self.n_x + self.n_psi {
            return Err(Error::DimensionMismatch(format!(
                "load of length {} for {} rows",
                lh.len(),
                self.n_x + self.n_psi
            )));
        }
        for (r, l) in self.rhs.iter_mut().zip(lh) {
            *r += l;
        }
        Ok(())
    }

    /// Adds `i w mu0 <g_N, phi>` to the Psi_h rows.
    pub fn apply_gn(
        &mut self,
        mesh: &TetMesh,
        spaces: &SpaceSet,
        quad: &QuadConfig,
        g_n: &(dyn Fn(usize, &Vec3) -> c64 + Sync),
    ) -> Result<()> {
        let load = gn_load(
            mesh,
            spaces,
            quad,
            c64::new(0.0, self.omega * self.mu0),
            g_n,
        )?;
        let off = self.psi_start();
        for (r, l) in self.rhs[off..off + self.n_psi].iter_mut().zip(load) {
            *r += l;
        }
        Ok(())
    }

    /// Moves known constants of `psi` and `lambda` to the right-hand side.
    pub fn set_offsets(
        &mut self,
        bem: &BemMatrices,
        spaces: &SpaceSet,
        psi_offset: c64,
        lambda_offset: c64,
    ) {
        let s = c64::new(0.0, self.omega * self.mu0);
        let one_l: Vec<c64> = spaces
            .lambda_one()
            .iter()
            .map(|&v| c64::new(v, 0.0))
            .collect();
        let one_p: Vec<c64> = spaces.psi_one().iter().map(|&v| c64::new(v, 0.0)).collect();
        let c = bem.calderon();
        let dl = lambda_offset - self.lambda_offset;
        let dp = psi_offset - self.psi_offset;
        let ct1 = mat_vec(&c.transpose().to_owned(), &one_l);
        let c1 = mat_vec(&c, &one_p);
        let v1 = mat_vec(&bem.v, &one_l);
        let (ps, ls) = (self.psi_start(), self.lambda_start());
        for (r, c) in self.rhs[ps..ps + self.n_psi].iter_mut().zip(&ct1) {
            *r += s * dl * c;
        }
        for (r, (c, v)) in self.rhs[ls..ls + self.n_lambda]
            .iter_mut()
            .zip(c1.iter().zip(&v1))
        {
            *r -= s * (dp * c + dl * v);
        }
        self.psi_offset = psi_offset;
        self.lambda_offset = lambda_offset;
    }

    /// Header of two little-endian `u64` (rows, cols), then the matrix in
    /// column-major order and the right-hand side, as `(re, im)` `f64` pairs.
    pub fn write_binary(&self, out: &mut impl Write) -> std::io::Result<()> {
        let n = self.dim();
        out.write_all(&(n as u64).to_le_bytes())?;
        out.write_all(&(n as u64).to_le_bytes())?;
        let mut put = |z: c64| -> std::io::Result<()> {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())
        };
        for j in 0..n {
            for i in 0..n {
                put(self.matrix[(i, j)])?;
            }
        }
        for &z in &self.rhs {
            put(z)?;
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<CoupledSolution> {
        let n = self.dim();
        let lu = self.matrix.partial_piv_lu();
        let u = lu.U();
        let (mut dmax, mut dmin) = (0.0f64, f64::INFINITY);
        for i in 0..n {
            let d = u[(i, i)].norm();
            dmax = dmax.max(d);
            dmin = dmin.min(d);
        }
        if !(dmin > 0.0 && dmin.is_finite()) || dmin < 1e-300 {
            return Err(Error::Singular(format!(
                "zero pivot in a system of size {n}"
            )));
        }
        let pivot_ratio = dmax / dmin;
        if pivot_ratio > 1e15 {
            return Err(Error::Singular(format!("pivot ratio {pivot_ratio:e}")));
        }
        let b = Mat::<c64>::from_fn(n, 1, |i, _| self.rhs[i]);
        let bnorm = b.norm_l2();
        let mut x = lu.solve(&b);
        let mut residual = f64::INFINITY;
        // Two steps of iterative refinement recover the last digits lost to
        // the scaling spread between the DG and BEM blocks.
        for step in 0..3 {
            let r = &b - &self.matrix * &x;
            let rn = r.norm_l2();
            residual = if bnorm > 0.0 { rn / bnorm } else { rn };
            if step == 2 || rn == 0.0 {
                break;
            }
            x += lu.solve(&r);
        }
        if !residual.is_finite() || residual > RESIDUAL_TOL {
            return Err(Error::Residual {
                residual,
                tol: RESIDUAL_TOL,
            });
        }
        let col: Vec<c64> = (0..n).map(|i| x[(i, 0)]).collect();
        let (ps, ls, ms) = (
            self.psi_start(),
            self.lambda_start(),
            self.multiplier_start(),
        );
        Ok(CoupledSolution {
            u: col[..ps].to_vec(),
            psi: col[ps..ls].to_vec(),
            lambda: col[ls..ms].to_vec(),
            multipliers: [col[ms], col[ms + 1]],
            psi_offset: self.psi_offset,
            lambda_offset: self.lambda_offset,
            residual,
            pivot_ratio,
        })
    }
}

/// Assembles the bordered matrix with a zero right-hand side.
/// `s <g_N, phi_i>` for every Psi_h basis function, with the data rule.
pub fn gn_load(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    quad: &QuadConfig,
    s: c64,
    g_n: &(dyn Fn(usize, &Vec3) -> c64 + Sync),
) -> Result<Vec<c64>> {
    let rule = quad.data_tri()?;
    let mut vals = vec![0.0; spaces.psi.n_local()];
    let mut out = vec![c64::new(0.0, 0.0); spaces.n_psi()];
    for t in 0..mesh.boundary.len() {
        let jac = 2.0 * spaces.geom.area[t];
        for (b, w) in rule.iter() {
            let g = g_n(t, &spaces.geom.point(t, b)) * (w * jac) * s;
            spaces.psi.eval(b, &mut vals);
            for (i, &d) in spaces.psi.dofs(t).iter().enumerate() {
                out[d] += g * vals[i];
            }
        }
    }
    Ok(out)
}

pub fn build_system(
    dg: &DgBlocks,
    bem: &BemMatrices,
    spaces: &SpaceSet,
    materials: &MaterialConfig,
) -> Result<CoupledSystem> {
    let (n_x, n_psi, n_lambda) = (spaces.n_x(), spaces.n_psi(), spaces.n_lambda());
    if dg.n_x != n_x || dg.n_psi != n_psi {
        return Err(Error::DimensionMismatch(
            "DG blocks and spaces disagree".into(),
        ));
    }
    if bem.v.nrows() != n_lambda
        || bem.w.nrows() != n_psi
        || bem.k.nrows() != n_lambda
        || bem.k.ncols() != n_psi
    {
        return Err(Error::DimensionMismatch(
            "BEM matrices and spaces disagree".into(),
        ));
    }
    if dg.omega != materials.omega || dg.alpha != materials.alpha {
        return Err(Error::InvalidParameter(
            "DG blocks were assembled with other materials".into(),
        ));
    }
    let n = n_x + n_psi + n_lambda + 2;
    let mut a = Mat::<c64>::zeros(n, n);
    dg.add_to(&mut a, 0);
    let s = c64::new(0.0, materials.omega * materials.mu0);
    let (ps, ls, ms) = (n_x, n_x + n_psi, n_x + n_psi + n_lambda);
    let c = bem.calderon();
    for j in 0..n_psi {
        for i in 0..n_psi {
            a[(ps + i, ps + j)] += s * bem.w[(i, j)];
        }
    }
    for i in 0..n_lambda {
        for j in 0..n_psi {
            a[(ls + i, ps + j)] = s * c[(i, j)];
            a[(ps + j, ls + i)] = -s * c[(i, j)];
        }
        for j in 0..n_lambda {
            a[(ls + i, ls + j)] = s * bem.v[(i, j)];
        }
    }
    for (i, &cp) in spaces.c_psi.iter().enumerate() {
        a[(ms, ps + i)] = c64::new(cp, 0.0);
        a[(ps + i, ms)] = c64::new(cp, 0.0);
    }
    for (i, &cl) in spaces.c_lambda.iter().enumerate() {
        a[(ms + 1, ls + i)] = c64::new(cl, 0.0);
        a[(ls + i, ms + 1)] = c64::new(cl, 0.0);
    }
    Ok(CoupledSystem {
        matrix: a,
        rhs: vec![cvec::ZERO; n],
        n_x,
        n_psi,
        n_lambda,
        omega: materials.omega,
        mu0: materials.mu0,
        alpha: materials.alpha,
        psi_offset: cvec::ZERO,
        lambda_offset: cvec::ZERO,
    })
}

/// Everything needed to assemble and solve on one mesh.
pub struct Discretization<'a> {
    pub mesh: &'a TetMesh,
    pub spaces: SpaceSet,
    pub dg: DgBlocks,
    pub bem: BemMatrices,
    pub quad: QuadConfig,
    pub materials: MaterialConfig,
}

impl<'a> Discretization<'a> {
    pub fn new(
        mesh: &'a TetMesh,
        m: usize,
        materials: &MaterialConfig,
        quad: &QuadConfig,
    ) -> Result<Self> {
        quad.validate()?;
        materials.validate()?;
        let spaces = crate::spaces::build_spaces(mesh, m)?;
        let dg = DgBlocks::assemble(mesh, &spaces, materials, quad)?;
        let bem = BemMatrices::assemble(mesh, &spaces, quad)?;
        Ok(Discretization {
            mesh,
            spaces,
            dg,
            bem,
            quad: quad.clone(),
            materials: materials.clone(),
        })
    }

    /// Same discretization with another penalty parameter.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Discretization {
            mesh: self.mesh,
            spaces: self.spaces.clone(),
            dg: self.dg.with_alpha(alpha),
            bem: self.bem.clone(),
            quad: self.quad.clone(),
            materials: self.materials.with_alpha(alpha),
        }
    }

    pub fn system(&self) -> Result<CoupledSystem> {
        build_system(&self.dg, &self.bem, &self.spaces, &self.materials)
    }
}

#[cfg(test)]
mod tests;
