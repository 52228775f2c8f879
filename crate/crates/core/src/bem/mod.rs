//! Galerkin boundary element matrices for the Laplace layer operators.
//!
//! `V` acts on Lambda_h, `W` on Psi_h, `K` maps Psi_h into the dual of
//! Lambda_h, and `M` is the Lambda_h x Psi_h mass matrix. The double layer
//! kernel is `(x - y) . n_y / (4 pi |x - y|^3)` with the outward normal, so
//! `K 1 = -1/2` on a smooth closed surface.

pub mod engine;
pub mod panels;
pub mod sides;

use faer::{c64, Mat};

pub use engine::{assemble, assemble_mass, potential, Assembler, Kernel, INV_4PI};
pub use panels::{Panel, PanelSet};
pub use sides::{Channel, FnSide, SurfaceSide};

use crate::error::{Error, Result};
use crate::mesh::{TetMesh, Vec3};
use crate::quadrature::QuadConfig;
use crate::spaces::SpaceSet;

#[derive(Debug, Clone)]
pub struct BemMatrices {
    pub v: Mat<f64>,
    pub k: Mat<f64>,
    pub w: Mat<f64>,
    pub m: Mat<f64>,
}

impl BemMatrices {
    pub fn assemble(mesh: &TetMesh, spaces: &SpaceSet, quad: &QuadConfig) -> Result<Self> {
        let panels = PanelSet::new(mesh, &spaces.geom, 0);
        let (lam, psi) = (&spaces.lambda, &spaces.psi);
        let v = assemble(&panels, lam, lam, Kernel::Single, quad, true)?;
        let k = assemble(&panels, lam, psi, Kernel::DoubleLayer, quad, false)?;
        let w = assemble(&panels, psi, psi, Kernel::Hypersingular, quad, true)?;
        let m = assemble_mass(&panels, lam, psi, quad.surface_order)?;
        Ok(BemMatrices { v, k, w, m })
    }

    /// `1/2 M - K`.
    pub fn calderon(&self) -> Mat<f64> {
        let mut c = &self.m * 0.5;
        c -= &self.k;
        c
    }

    /// `||eta||^2` in the energy of `V`.
    pub fn v_energy(&self, eta: &[c64]) -> Result<f64> {
        nonneg(hermitian_form(&self.v, eta).re, "V")
    }

    /// `phi^H W phi + |int phi|^2`, an equivalent H^{1/2} energy.
    pub fn w_energy(&self, spaces: &SpaceSet, phi: &[c64]) -> Result<f64> {
        let mean: c64 = spaces.c_psi.iter().zip(phi).map(|(c, p)| p * c).sum();
        Ok(nonneg(hermitian_form(&self.w, phi).re, "W")? + mean.norm_sqr())
    }
}

fn nonneg(q: f64, name: &str) -> Result<f64> {
    if q < 0.0 {
        log::debug!("{name} energy {q:e}");
        return Err(Error::NegativeForm(q));
    }
    Ok(q)
}

/// `x^H A y` for a real matrix.
pub fn bilinear(a: &Mat<f64>, x: &[c64], y: &[c64]) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for (j, yj) in y.iter().enumerate().take(a.ncols()) {
        let col = a.col(j);
        let mut t = c64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            t += xi.conj() * col[i];
        }
        s += t * yj;
    }
    s
}

pub fn hermitian_form(a: &Mat<f64>, x: &[c64]) -> c64 {
    bilinear(a, x, x)
}

/// `A x` for a real matrix and complex vector.
pub fn mat_vec(a: &Mat<f64>, x: &[c64]) -> Vec<c64> {
    let mut out = vec![c64::new(0.0, 0.0); a.nrows()];
    for (j, xj) in x.iter().enumerate() {
        for (o, aij) in out.iter_mut().zip(a.col(j).iter()) {
            *o += xj * aij;
        }
    }
    out
}

/// Exterior potential `DL(psi) - SL(lambda + shift)` at `x`, the shift
/// being a constant added to the Neumann trace.
pub fn representation(
    mesh: &TetMesh,
    spaces: &SpaceSet,
    quad: &QuadConfig,
    x: &Vec3,
    psi: &[c64],
    lambda: &[c64],
    shift: c64,
) -> Result<c64> {
    if mesh.winding_number(x).abs() > 0.5 || mesh.boundary_distance_estimate(x) < 1e-8 * mesh.h() {
        return Err(Error::NotOutside([x.x, x.y, x.z]));
    }
    let panels = PanelSet::new(mesh, &spaces.geom, 0);
    let dl = potential(
        &panels,
        &spaces.psi,
        Kernel::DoubleLayer,
        x,
        quad.data_order,
        quad,
    )?;
    let sl = potential(
        &panels,
        &spaces.lambda,
        Kernel::Single,
        x,
        quad.data_order,
        quad,
    )?;
    let one = spaces.lambda_one();
    let mut p = c64::new(0.0, 0.0);
    for (d, c) in dl.iter().zip(psi) {
        p += c * d;
    }
    for ((s, c), o) in sl.iter().zip(lambda).zip(&one) {
        p -= (c + shift * o) * s;
    }
    Ok(p)
}
