//! Property checks of the discrete operators: sphere spectra, Calderon
//! residuals, sampled coercivity, discrete trace constants and
//! interpolation errors.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bem::{
    assemble, assemble_mass, bilinear, hermitian_form, mat_vec, BemMatrices, Channel, FnSide,
    Kernel, PanelSet,
};
use crate::coupled::Discretization;
use crate::dg::norm_parts;
use crate::error::{Error, Result};
use crate::manufactured::ExactSolution;
use crate::mesh::{TetMesh, Vec3, TET_FACES};
use crate::quadrature::{gauss_tet, gauss_tri, QuadConfig};
use crate::spaces::{build_spaces, SpaceSet};

/// Relative deviation, or absolute when the reference is zero.
pub fn deviation(computed: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        computed.abs()
    } else {
        (computed - exact).abs() / exact.abs()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralRow {
    pub operator: String,
    /// Spherical harmonic degree of the data.
    pub n: usize,
    pub computed: f64,
    pub exact: f64,
    pub deviation: f64,
}

/// Unit sphere eigenvalues of V, K and W on degree-n harmonics.
pub fn sphere_eigenvalue(op: Kernel, n: usize) -> f64 {
    let d = (2 * n + 1) as f64;
    match op {
        Kernel::Single => 1.0 / d,
        Kernel::DoubleLayer => -0.5 / d,
        Kernel::Hypersingular => (n * (n + 1)) as f64 / d,
    }
}

/// Galerkin Rayleigh quotients of V, K and W for the constant and for the
/// degree-1 harmonic `x_3`, on a mesh of the unit sphere.
pub fn spectral_table(mesh: &TetMesh, m: usize, quad: &QuadConfig) -> Result<Vec<SpectralRow>> {
    let sp = build_spaces(mesh, m)?;
    let panels = PanelSet::new(mesh, &sp.geom, 0);
    let (lam, psi) = (&sp.lambda, &sp.psi);
    let v = assemble(&panels, lam, lam, Kernel::Single, quad, true)?;
    let k = assemble(&panels, lam, psi, Kernel::DoubleLayer, quad, false)?;
    let w = assemble(&panels, psi, psi, Kernel::Hypersingular, quad, true)?;
    let mll = assemble_mass(&panels, lam, lam, quad.surface_order)?;
    let mlp = assemble_mass(&panels, lam, psi, quad.surface_order)?;
    let mpp = assemble_mass(&panels, psi, psi, quad.surface_order)?;

    let real = |v: Vec<f64>| v.into_iter().map(|a| c64::new(a, 0.0)).collect::<Vec<_>>();
    let data: [(Vec<c64>, Vec<c64>); 2] = [
        (real(sp.lambda_one()), real(sp.psi_one())),
        (
            real(sp.project_lambda(&|_, x| x.z, quad.data_order, false)?),
            real(sp.surface_interpolate(&|_, x| x.z, quad.data_order, false)?),
        ),
    ];
    let mut rows = Vec::new();
    for (n, (eta, phi)) in data.iter().enumerate() {
        let q = |a: &Mat<f64>, b: &Mat<f64>, x: &[c64], y: &[c64]| {
            bilinear(a, x, y).re / bilinear(b, x, y).re
        };
        for (op, name, val) in [
            (Kernel::Single, "V", q(&v, &mll, eta, eta)),
            (Kernel::DoubleLayer, "K", q(&k, &mlp, eta, phi)),
            (Kernel::Hypersingular, "W", q(&w, &mpp, phi, phi)),
        ] {
            let exact = sphere_eigenvalue(op, n);
            rows.push(SpectralRow {
                operator: name.into(),
                n,
                computed: val,
                exact,
                deviation: deviation(val, exact),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalderonResiduals {
    pub h: f64,
    /// `V lambda + (1/2 - K) psi` in the dual norm of V, relative to `V lambda`.
    pub interior: f64,
    /// `-W psi - (1/2 + K') lambda`, Euclidean, relative to `M' lambda`.
    pub exterior: f64,
}

/// Residuals of the exterior Calderon identities for interpolated
/// Cauchy data of the point source.
pub fn calderon_residuals(
    mesh: &TetMesh,
    sp: &SpaceSet,
    bem: &BemMatrices,
    quad: &QuadConfig,
    exact: &ExactSolution,
) -> Result<CalderonResiduals> {
    let z = |v: Vec<f64>| v.into_iter().map(|a| c64::new(a, 0.0)).collect::<Vec<_>>();
    let psi = z(sp.surface_interpolate(&|_, x| exact.psi(x), quad.data_order, false)?);
    let lam = z(sp.project_lambda(&|t, x| exact.lambda(t, x), quad.data_order, false)?);

    let vl = mat_vec(&bem.v, &lam);
    let cp = mat_vec(&bem.calderon(), &psi);
    let r: Vec<c64> = vl.iter().zip(&cp).map(|(a, b)| a + b).collect();
    let dual = |r: &[c64]| -> Result<f64> {
        let llt = bem
            .v
            .llt(faer::Side::Lower)
            .map_err(|_| Error::Singular("V is not positive definite".into()))?;
        let re = Mat::from_fn(r.len(), 2, |i, j| if j == 0 { r[i].re } else { r[i].im });
        let s = llt.solve(&re);
        Ok((0..r.len())
            .map(|i| r[i].re * s[(i, 0)] + r[i].im * s[(i, 1)])
            .sum::<f64>()
            .sqrt())
    };
    let interior = dual(&r)? / dual(&vl)?;

    let wp = mat_vec(&bem.w, &psi);
    let mt = bem.m.transpose().to_owned();
    let kt = bem.k.transpose().to_owned();
    let ml = mat_vec(&mt, &lam);
    let kl = mat_vec(&kt, &lam);
    let e: Vec<c64> = (0..psi.len())
        .map(|i| -wp[i] - ml[i] * 0.5 - kl[i])
        .collect();
    let norm = |v: &[c64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(CalderonResiduals {
        h: surface_h(mesh),
        interior,
        exterior: norm(&e) / norm(&ml),
    })
}

/// Largest boundary triangle diameter.
pub fn surface_h(mesh: &TetMesh) -> f64 {
    mesh.boundary.iter().map(|b| b.diameter).fold(0.0, f64::max)
}

/// Outcome of sampling the real-part energy identity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub samples: usize,
    /// Largest relative gap between `Re[(1 - i) x^H A_sym x]` and the
    /// weighted energy it should equal.
    pub max_identity_residual: f64,
    /// Smallest ratio of the left side to the weighted energy.
    pub min_energy_ratio: f64,
    /// Smallest sampled ratio of the left side to the squared DG norm.
    pub sampled_min_ratio: f64,
    /// Smallest ratio over all mean-free triples, the bottom of the
    /// pencil (energy, squared DG norm).
    pub beta_hat: f64,
    /// `min(1, alpha)`, the bound with operator-induced boundary norms.
    pub beta_theory: f64,
}

fn random_c(rng: &mut ChaCha8Rng) -> c64 {
    c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Removes the surface mean of `v` given the basis integrals `c`.
fn remove_mean(v: &mut [c64], c: &[f64], one: &[f64], area: f64) {
    let mean: c64 = v.iter().zip(c).map(|(a, b)| a * b).sum::<c64>() / area;
    for (a, o) in v.iter_mut().zip(one) {
        *a -= mean * o;
    }
}

/// Samples random mean-free triples `(u, psi, lambda)` and compares the
/// real part of `(1 - i) x^H A x`, with `A` the symmetric part of the
/// system matrix, to the weighted energy
/// `omega ||mu^1/2 u||^2 + ||sigma^-1/2 curl u||^2 + alpha |[(u, psi)]|^2
/// + omega mu0 (<V lambda, lambda> + <W psi, psi>)`.
pub fn coercivity(disc: &Discretization, samples: usize, seed: u64) -> Result<CoercivityReport> {
    let sys = disc.system()?;
    let s = sys.unconstrained();
    let n = s.nrows();
    let sym = Mat::from_fn(n, n, |i, j| (s[(i, j)] + s[(j, i)]) * 0.5);
    let sp = &disc.spaces;
    let (nx, np) = (sp.n_x(), sp.n_psi());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = c64::new(1.0, -1.0);
    let mu0 = disc.materials.mu0;
    let wm = disc.materials.omega * mu0;
    let mut rep = CoercivityReport {
        samples,
        max_identity_residual: 0.0,
        min_energy_ratio: f64::INFINITY,
        sampled_min_ratio: f64::INFINITY,
        beta_hat: pencil_minimum(disc, &sym)?,
        beta_theory: disc.materials.alpha.min(1.0),
    };
    for _ in 0..samples {
        let mut x: Vec<c64> = (0..n).map(|_| random_c(&mut rng)).collect();
        remove_mean(
            &mut x[nx..nx + np],
            &sp.c_psi,
            &sp.psi_one(),
            sp.surface_area,
        );
        remove_mean(
            &mut x[nx + np..],
            &sp.c_lambda,
            &sp.lambda_one(),
            sp.surface_area,
        );
        let col = Mat::from_fn(n, 1, |i, _| x[i]);
        let y = &sym * &col;
        let form: c64 = (0..n).map(|i| x[i].conj() * y[(i, 0)]).sum();
        let lhs = (one * form).re;
        let parts = norm_parts(&disc.dg, &disc.bem, sp, mu0, &x[..nx + np], &x[nx + np..])?;
        let w_form = hermitian_form(&disc.bem.w, &x[nx..nx + np]).re;
        let energy = parts.volume
            + parts.curl
            + disc.materials.alpha * parts.jump
            + parts.lambda_minus_half
            + wm * w_form;
        rep.max_identity_residual = rep.max_identity_residual.max((lhs - energy).abs() / energy);
        rep.min_energy_ratio = rep.min_energy_ratio.min(lhs / energy);
        rep.sampled_min_ratio = rep.sampled_min_ratio.min(lhs / parts.norm().powi(2));
    }
    Ok(rep)
}

/// Smallest eigenvalue of `Re[(1 - i) x^H sym x] = b x^H N x` on mean-free
/// triples, `N` the Gram matrix of the squared DG norm.
fn pencil_minimum(disc: &Discretization, sym: &Mat<c64>) -> Result<f64> {
    let sp = &disc.spaces;
    let (nx, np, nl) = (sp.n_x(), sp.n_psi(), sp.n_lambda());
    let n = nx + np + nl;
    let wm = disc.materials.omega * disc.materials.mu0;
    let dg = &disc.dg;
    let mut gram = Mat::<f64>::zeros(n, n);
    for (r, c, v) in dg.mass.iter() {
        gram[(r, c)] += dg.omega * v;
    }
    for (r, c, v) in dg.curl.iter() {
        gram[(r, c)] += v;
    }
    for (r, c, v) in dg.penalty.iter() {
        gram[(r, c)] += v;
    }
    for i in 0..np {
        for j in 0..np {
            gram[(nx + i, nx + j)] += wm * (disc.bem.w[(i, j)] + sp.c_psi[i] * sp.c_psi[j]);
        }
    }
    for i in 0..nl {
        for j in 0..nl {
            gram[(nx + np + i, nx + np + j)] += wm * disc.bem.v[(i, j)];
        }
    }

    // Basis of the mean-free subspace: mean-removed unit vectors, one
    // dropped per surface block since they sum to zero against `1`.
    let drop_psi = nx + np - 1;
    let drop_lam = nx + np + sp.lambda.offset(sp.geom.len() - 1);
    let cols: Vec<usize> = (0..n).filter(|&j| j != drop_psi && j != drop_lam).collect();
    let (one_p, one_l) = (sp.psi_one(), sp.lambda_one());
    let z = Mat::<f64>::from_fn(n, cols.len(), |i, jj| {
        let j = cols[jj];
        let mut v = if i == j { 1.0 } else { 0.0 };
        if (nx..nx + np).contains(&i) && (nx..nx + np).contains(&j) {
            v -= one_p[i - nx] * sp.c_psi[j - nx] / sp.surface_area;
        } else if i >= nx + np && j >= nx + np {
            v -= one_l[i - nx - np] * sp.c_lambda[j - nx - np] / sp.surface_area;
        }
        v
    });
    let nr = z.transpose() * &gram * &z;
    let eig = nr
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::Singular("norm Gram matrix".into()))?;
    let d = eig.S().column_vector();
    if (0..d.nrows()).any(|i| d[i] <= 0.0) {
        return Err(Error::NegativeForm(
            d.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
        ));
    }
    let t = &z * eig.U();
    let tc = Mat::<c64>::from_fn(t.nrows(), t.ncols(), |i, j| {
        c64::new(t[(i, j)] / d[j].sqrt(), 0.0)
    });
    let rot = c64::new(1.0, -1.0);
    let herm = Mat::<c64>::from_fn(n, n, |i, j| {
        (rot * sym[(i, j)] + (rot * sym[(j, i)]).conj()) * 0.5
    });
    let c = tc.adjoint() * &herm * &tc;
    let vals = c
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::Singular("energy pencil".into()))?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceConstant {
    pub h: f64,
    /// Sup over sampled fields and tets of `h_K ||v||_dK^2 / ||v||_K^2`.
    pub sampled: f64,
    /// Sup over tets of the largest generalized eigenvalue.
    pub exact: f64,
}

/// `h_K ||v||^2_{dK}` and `||v||^2_K` Gram matrices of the scalar local basis.
fn trace_matrices(mesh: &TetMesh, sp: &SpaceSet, k: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let xs = &sp.x;
    let ns = xs.n_scalar;
    let order = 2 * sp.m;
    let (tet, tri) = (gauss_tet(order)?, gauss_tri(order)?);
    let p = mesh.tet_points(k);
    let mut phi = vec![0.0; ns];
    let mut grad = vec![Vec3::zeros(); ns];
    let mut m = DMatrix::zeros(ns, ns);
    let mut b = DMatrix::zeros(ns, ns);
    let jac = 6.0 * mesh.tet_volume[k];
    for (l, w) in tet.iter() {
        let x = p[0] * l[0] + p[1] * l[1] + p[2] * l[2] + p[3] * l[3];
        xs.eval_scalar(k, &x, &mut phi, &mut grad);
        m += DMatrix::from_fn(ns, ns, |i, j| w * jac * phi[i] * phi[j]);
    }
    for f in TET_FACES {
        let q = [p[f[0]], p[f[1]], p[f[2]]];
        let area = 0.5 * (q[1] - q[0]).cross(&(q[2] - q[0])).norm();
        for (l, w) in tri.iter() {
            let x = q[0] * l[0] + q[1] * l[1] + q[2] * l[2];
            xs.eval_scalar(k, &x, &mut phi, &mut grad);
            b += DMatrix::from_fn(ns, ns, |i, j| w * 2.0 * area * phi[i] * phi[j]);
        }
    }
    Ok((b * mesh.tet_diameter[k], m))
}

/// Largest `lambda` with `B c = lambda M c`, `M` symmetric positive definite.
pub fn max_generalized_eigenvalue(b: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    let l = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("mass matrix is not positive definite".into()))?
        .l();
    let li = l
        .try_inverse()
        .ok_or_else(|| Error::Singular("Cholesky factor".into()))?;
    let c = &li * b * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    Ok(SymmetricEigen::new(c).eigenvalues.max())
}

/// Samples the discrete trace inequality with `samples` random broken
/// P_m fields.
pub fn trace_constant(
    mesh: &TetMesh,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<TraceConstant> {
    let sp = build_spaces(mesh, m)?;
    let mats: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..mesh.n_tets())
        .into_par_iter()
        .map(|k| trace_matrices(mesh, &sp, k))
        .collect::<Result<_>>()?;
    let exact = mats
        .iter()
        .map(|(b, m)| max_generalized_eigenvalue(b, m))
        .try_fold(0.0f64, |a, e| e.map(|e| a.max(e)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = sp.x.n_scalar;
    let mut sampled = 0.0f64;
    for _ in 0..samples {
        for (b, m) in &mats {
            let c = nalgebra::DVector::from_fn(ns, |_, _| rng.random_range(-1.0..1.0));
            sampled = sampled.max(c.dot(&(b * &c)) / c.dot(&(m * &c)));
        }
    }
    Ok(TraceConstant {
        h: mesh.h(),
        sampled,
        exact,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterpolationErrors {
    pub h: f64,
    /// `||psi - interpolant||_{0, Gamma}`.
    pub psi_l2: f64,
    /// `||lambda - L2 projection||_{-1/2}` in the energy of V.
    pub lambda_minus_half: f64,
}

/// Interpolation errors of the point-source Cauchy data.
pub fn interpolation_errors(
    mesh: &TetMesh,
    sp: &SpaceSet,
    quad: &QuadConfig,
    exact: &ExactSolution,
) -> Result<InterpolationErrors> {
    let psi = sp.surface_interpolate(&|_, x| exact.psi(x), quad.data_order, false)?;
    let lam = sp.project_lambda(&|t, x| exact.lambda(t, x), quad.data_order, false)?;
    let pc: Vec<c64> = psi.iter().map(|&a| c64::new(a, 0.0)).collect();
    let rule = quad.data_tri()?;
    let mut l2 = 0.0;
    for t in 0..sp.geom.len() {
        let jac = 2.0 * sp.geom.area[t];
        for (b, w) in rule.iter() {
            let x = sp.geom.point(t, b);
            let (v, _) = sp.eval_psi(&pc, t, b);
            l2 += w * jac * (exact.psi(&x) - v.re).powi(2);
        }
    }
    let panels = PanelSet::new(mesh, &sp.geom, quad.data_subdivision);
    let err = FnSide::new(vec![
        Channel::value(|t, x: &Vec3| exact.lambda(t, x)).minus(&sp.lambda, lam)
    ]);
    let v = assemble(&panels, &err, &err, Kernel::Single, quad, false)?;
    if v[(0, 0)] < 0.0 {
        return Err(Error::NegativeForm(v[(0, 0)]));
    }
    Ok(InterpolationErrors {
        h: surface_h(mesh),
        psi_l2: l2.sqrt(),
        lambda_minus_half: v[(0, 0)].sqrt(),
    })
}
