//! Manufactured solutions, error measurement and convergence tables.
//!
//! Interior fields come from a vector potential `A`: `H = curl A`,
//! `E = -i omega mu A` and `j_e = curl H - sigma E`, so Faraday's law holds
//! exactly for constant `mu`. The exterior potential is a point source at
//! `x0` inside the conductor, `p = 1 / (4 pi |x - x0|)`, with Cauchy data
//! `psi = p|_Gamma` and `lambda = dp/dn`. The transmission conditions are
//! closed by the data `g_D = H x n - curl_Gamma psi` and
//! `g_N = (mu/mu0) H . n - lambda`.

use std::time::Instant;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::bem::{
    assemble, representation, Channel, FnSide, Kernel, PanelSet, SurfaceSide, INV_4PI,
};
use crate::coupled::{gn_load, CoupledSolution, CoupledSystem, Discretization};
use crate::cvec::{self, CVec3};
use crate::dg::{self, ExactTrial, NormParts};
use crate::error::{Error, Result};
use crate::material::MaterialConfig;
use crate::mesh::{TetMesh, Vec3};
use crate::quadrature::{gauss_tet, QuadConfig};

/// Vector potential of the interior field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    Zero,
    /// `A = (0, 0, x)`.
    Linear,
    /// `A = (y z^2, z x^2, x y^2)`.
    #[default]
    Cubic,
    /// `A = (sin y, sin z, sin x)`.
    Trig,
}

impl Potential {
    pub fn a(self, x: &Vec3) -> Vec3 {
        match self {
            Potential::Zero => Vec3::zeros(),
            Potential::Linear => Vec3::new(0.0, 0.0, x.x),
            Potential::Cubic => Vec3::new(x.y * x.z * x.z, x.z * x.x * x.x, x.x * x.y * x.y),
            Potential::Trig => Vec3::new(x.y.sin(), x.z.sin(), x.x.sin()),
        }
    }

    /// `curl A`.
    pub fn h(self, x: &Vec3) -> Vec3 {
        let (a, b, c) = (x.x, x.y, x.z);
        match self {
            Potential::Zero => Vec3::zeros(),
            Potential::Linear => Vec3::new(0.0, -1.0, 0.0),
            Potential::Cubic => Vec3::new(
                2.0 * a * b - a * a,
                2.0 * b * c - b * b,
                2.0 * c * a - c * c,
            ),
            Potential::Trig => Vec3::new(-c.cos(), -a.cos(), -b.cos()),
        }
    }

    /// `curl curl A`.
    pub fn curl_h(self, x: &Vec3) -> Vec3 {
        match self {
            Potential::Zero | Potential::Linear => Vec3::zeros(),
            Potential::Cubic => Vec3::new(-2.0 * x.y, -2.0 * x.z, -2.0 * x.x),
            Potential::Trig => self.a(x),
        }
    }
}

/// Closed-form interior fields and exterior Cauchy data.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub potential: Potential,
    pub x0: Vec3,
    pub omega: f64,
    pub mu0: f64,
    pub mu: f64,
    sigma: Vec<f64>,
    normals: Vec<Vec3>,
}

/// Builds the exact solution on `mesh`; `mu` must be the same in every
/// region and `x0` strictly inside.
pub fn make_exact(
    mesh: &TetMesh,
    materials: &MaterialConfig,
    x0: Vec3,
    potential: Potential,
) -> Result<ExactSolution> {
    materials.validate()?;
    let mut sigma = Vec::with_capacity(mesh.n_tets());
    let mut mu = None;
    for t in &mesh.tets {
        sigma.push(materials.sigma(t.region)?);
        let m = materials.mu(t.region)?;
        match mu {
            None => mu = Some(m),
            Some(m0) if m0 != m => {
                return Err(Error::InvalidParameter(
                    "manufactured solutions need the same mu in every region".into(),
                ))
            }
            _ => {}
        }
    }
    if mesh.winding_number(&x0) < 0.5 || mesh.boundary_distance_estimate(&x0) < 1e-3 * mesh.h() {
        return Err(Error::NotInside([x0.x, x0.y, x0.z]));
    }
    Ok(ExactSolution {
        potential,
        x0,
        omega: materials.omega,
        mu0: materials.mu0,
        mu: mu.unwrap_or(1.0),
        sigma,
        normals: mesh.boundary.iter().map(|b| b.normal).collect(),
    })
}

impl ExactSolution {
    pub fn h(&self, x: &Vec3) -> CVec3 {
        cvec::real(&self.potential.h(x))
    }

    pub fn curl_h(&self, x: &Vec3) -> CVec3 {
        cvec::real(&self.potential.curl_h(x))
    }

    pub fn e(&self, x: &Vec3) -> CVec3 {
        cvec::scale(&self.potential.a(x), c64::new(0.0, -self.omega * self.mu))
    }

    /// `curl E = -i omega mu H`, from the potential.
    pub fn curl_e(&self, x: &Vec3) -> CVec3 {
        cvec::scale(&self.potential.h(x), c64::new(0.0, -self.omega * self.mu))
    }

    /// `i omega mu H + curl E`; zero by construction.
    pub fn faraday_residual(&self, x: &Vec3) -> CVec3 {
        self.h(x) * c64::new(0.0, self.omega * self.mu) + self.curl_e(x)
    }

    /// Source current in tet `k`.
    pub fn j_e(&self, k: usize, x: &Vec3) -> CVec3 {
        self.curl_h(x) - self.e(x) * c64::new(self.sigma[k], 0.0)
    }

    /// Exterior potential.
    pub fn p(&self, x: &Vec3) -> f64 {
        INV_4PI / (x - self.x0).norm()
    }

    pub fn grad_p(&self, x: &Vec3) -> Vec3 {
        let d = x - self.x0;
        -d * (INV_4PI / d.norm().powi(3))
    }

    pub fn psi(&self, x: &Vec3) -> f64 {
        self.p(x)
    }

    /// `dp/dn` on boundary triangle `t`.
    pub fn lambda(&self, t: usize, x: &Vec3) -> f64 {
        self.grad_p(x).dot(&self.normals[t])
    }

    /// `curl_Gamma psi = grad psi x n` on boundary triangle `t`.
    pub fn curl_psi(&self, t: usize, x: &Vec3) -> Vec3 {
        self.grad_p(x).cross(&self.normals[t])
    }

    pub fn g_d(&self, t: usize, x: &Vec3) -> CVec3 {
        cvec::cross_real(&self.h(x), &self.normals[t]) - cvec::real(&self.curl_psi(t, x))
    }

    pub fn g_n(&self, t: usize, x: &Vec3) -> c64 {
        c64::new(
            self.mu / self.mu0 * self.potential.h(x).dot(&self.normals[t]) - self.lambda(t, x),
            0.0,
        )
    }
}

/// Surface integrals of `psi` and `lambda` with the data rule.
pub fn exact_integrals(disc: &Discretization, exact: &ExactSolution) -> Result<(f64, f64)> {
    let rule = disc.quad.data_tri()?;
    let geom = &disc.spaces.geom;
    let (mut ip, mut il) = (0.0, 0.0);
    for t in 0..geom.len() {
        let jac = 2.0 * geom.area[t];
        for (b, w) in rule.iter() {
            let x = geom.point(t, b);
            ip += w * jac * exact.psi(&x);
            il += w * jac * exact.lambda(t, &x);
        }
    }
    Ok((ip, il))
}

/// Full system for the manufactured problem: DG load with `j_e` and `g_D`,
/// Neumann data `g_N`, and the exact means of `psi` and `lambda` moved to
/// the right-hand side.
pub fn manufactured_system(disc: &Discretization, exact: &ExactSolution) -> Result<CoupledSystem> {
    let mut sys = disc.system()?;
    let je = |k: usize, x: &Vec3| exact.j_e(k, x);
    let gd = |t: usize, x: &Vec3| exact.g_d(t, x);
    let lh = dg::assemble_lh(
        disc.mesh,
        &disc.spaces,
        &disc.materials,
        &disc.quad,
        &je,
        Some(&gd),
    )?;
    sys.add_load(&lh)?;
    sys.apply_gn(disc.mesh, &disc.spaces, &disc.quad, &|t, x| exact.g_n(t, x))?;
    let (ip, il) = exact_integrals(disc, exact)?;
    let area = disc.spaces.surface_area;
    sys.set_offsets(
        &disc.bem,
        &disc.spaces,
        c64::new(ip / area, 0.0),
        c64::new(il / area, 0.0),
    );
    Ok(sys)
}

/// Residual of the exact solution in the discrete equations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Consistency {
    /// `||lhs - rhs|| / max(||lhs||, ||rhs||)` over all test functions.
    pub residual: f64,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inserts the exact fields into both block rows, every term integrated
/// against the exact functions rather than their projections.
pub fn consistency(disc: &Discretization, exact: &ExactSolution) -> Result<Consistency> {
    let (mesh, sp, quad) = (disc.mesh, &disc.spaces, &disc.quad);
    let uf = |_: usize, x: &Vec3| exact.h(x);
    let cf = |_: usize, x: &Vec3| exact.curl_h(x);
    let pf = |t: usize, x: &Vec3| cvec::real(&exact.curl_psi(t, x));
    let trial = ExactTrial {
        u: &uf,
        curl_u: &cf,
        curl_psi: &pf,
    };
    let mut lhs = dg::apply_exact(mesh, sp, &disc.materials, quad, &trial)?;

    let psi_side = FnSide::new(vec![
        Channel::value(|_, x| exact.psi(x)).with_curl(|t, x| exact.curl_psi(t, x))
    ]);
    let lam_side = FnSide::new(vec![Channel::value(|t, x| exact.lambda(t, x))]);
    let panels = PanelSet::new(mesh, &sp.geom, quad.data_subdivision);
    let s = c64::new(0.0, disc.materials.omega * disc.materials.mu0);
    // Psi rows: i w mu0 (<W psi, phi> - <lambda, (1/2 - K) phi>).
    let w_psi = assemble(
        &panels,
        &sp.psi,
        &psi_side,
        Kernel::Hypersingular,
        quad,
        false,
    )?;
    let k_lam = assemble(
        &panels,
        &lam_side,
        &sp.psi,
        Kernel::DoubleLayer,
        quad,
        false,
    )?;
    let m_lam = data_mass(&panels, &lam_side, &sp.psi, quad)?;
    for i in 0..sp.n_psi() {
        lhs[sp.n_x() + i] += s * (w_psi[(i, 0)] - (0.5 * m_lam[(0, i)] - k_lam[(0, i)]));
    }
    // Lambda rows: i w mu0 (<eta, (1/2 - K) psi> + <eta, V lambda>).
    let k_psi = assemble(
        &panels,
        &sp.lambda,
        &psi_side,
        Kernel::DoubleLayer,
        quad,
        false,
    )?;
    let m_psi = data_mass(&panels, &sp.lambda, &psi_side, quad)?;
    let v_lam = assemble(&panels, &sp.lambda, &lam_side, Kernel::Single, quad, false)?;
    for i in 0..sp.n_lambda() {
        lhs.push(s * (0.5 * m_psi[(i, 0)] - k_psi[(i, 0)] + v_lam[(i, 0)]));
    }

    let je = |k: usize, x: &Vec3| exact.j_e(k, x);
    let gd = |t: usize, x: &Vec3| exact.g_d(t, x);
    let mut rhs = dg::assemble_lh(mesh, sp, &disc.materials, quad, &je, Some(&gd))?;
    let gn = gn_load(mesh, sp, quad, s, &|t, x| exact.g_n(t, x))?;
    for (r, g) in rhs[sp.n_x()..].iter_mut().zip(&gn) {
        *r += g;
    }
    rhs.resize(lhs.len(), cvec::ZERO);

    let diff: Vec<c64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let (ln, rn) = (norm(&lhs), norm(&rhs));
    Ok(Consistency {
        residual: norm(&diff) / ln.max(rn),
        lhs_norm: ln,
        rhs_norm: rn,
    })
}

/// `int f_a g_b` with the data rule on refined panels.
fn data_mass(
    panels: &PanelSet,
    test: &dyn SurfaceSide,
    trial: &dyn SurfaceSide,
    quad: &QuadConfig,
) -> Result<faer::Mat<f64>> {
    crate::bem::assemble_mass(panels, test, trial, quad.data_order)
}

/// Real and imaginary parts of `f - (discrete + offset)` as two channels.
fn error_channels<'a>(
    side: &'a dyn SurfaceSide,
    coeffs: &[c64],
    offset: c64,
    one: &[f64],
    value: impl Fn(usize, &Vec3) -> f64 + Sync + Clone + 'a,
    curl: Option<impl Fn(usize, &Vec3) -> Vec3 + Sync + Clone + 'a>,
) -> Vec<Channel<'a>> {
    let re: Vec<f64> = coeffs
        .iter()
        .zip(one)
        .map(|(c, o)| c.re + offset.re * o)
        .collect();
    let im: Vec<f64> = coeffs
        .iter()
        .zip(one)
        .map(|(c, o)| c.im + offset.im * o)
        .collect();
    let mut ch_re = Channel::value(value).minus(side, re);
    if let Some(c) = curl {
        ch_re = ch_re.with_curl(c);
    }
    vec![ch_re, Channel::discrete(side, im)]
}

fn trace(m: &faer::Mat<f64>) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Error of discrete fields against the exact solution, in the parts of
/// the DG energy norm. Boundary parts use the exact functions in the
/// operator-induced norms.
pub fn measure_error(
    disc: &Discretization,
    exact: &ExactSolution,
    sol: &CoupledSolution,
) -> Result<NormParts> {
    let (mesh, sp, quad, mat) = (disc.mesh, &disc.spaces, &disc.quad, &disc.materials);
    let fw = mesh.face_weights(mat)?;
    let sigma = |k: usize| mat.sigma(mesh.tets[k].region);
    let vol = gauss_tet(quad.data_order)?;
    let tri = quad.data_tri()?;
    let (mut volume, mut curl, mut jump, mut flux) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..mesh.n_tets() {
        let p = mesh.tet_points(k);
        let jac = 6.0 * mesh.tet_volume[k];
        for (b, w) in vol.iter() {
            let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2] + p[3] * b[3];
            let (v, c) = sp.eval_u(&sol.u, k, &x);
            volume += w * jac * mat.omega * exact.mu * cvec::norm2(&(exact.h(&x) - v));
            curl += w * jac / sigma(k)? * cvec::norm2(&(exact.curl_h(&x) - c));
        }
    }
    for (f, face) in mesh.interior.iter().enumerate() {
        let p = mesh.face_points(f);
        let [k0, k1] = face.tets;
        for (b, w) in tri.iter() {
            let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2];
            let (v0, c0) = sp.eval_u(&sol.u, k0, &x);
            let (v1, c1) = sp.eval_u(&sol.u, k1, &x);
            let (h, ch) = (exact.h(&x), exact.curl_h(&x));
            let j = dg::jump_interior(&(h - v0), &face.normals[0], &(h - v1), &face.normals[1]);
            let a = dg::average_interior(
                &((ch - c0) / c64::new(sigma(k0)?, 0.0)),
                &((ch - c1) / c64::new(sigma(k1)?, 0.0)),
            );
            let (s, hf) = (fw.s_interior[f], fw.h_interior[f]);
            jump += w * 2.0 * face.area / (s * hf) * cvec::norm2(&j);
            flux += w * 2.0 * face.area * s * hf * cvec::norm2(&a);
        }
    }
    for (t, bt) in mesh.boundary.iter().enumerate() {
        let k = bt.owner;
        for (b, w) in tri.iter() {
            let x = sp.geom.point(t, b);
            let (v, c) = sp.eval_u(&sol.u, k, &x);
            let (_, cp) = sp.eval_psi(&sol.psi, t, b);
            let e_curl_psi = cvec::real(&exact.curl_psi(t, &x)) - cp;
            let j = dg::jump_boundary(&(exact.h(&x) - v), &bt.normal, &e_curl_psi);
            let a = (exact.curl_h(&x) - c) / c64::new(sigma(k)?, 0.0);
            let (s, hf) = (fw.s_boundary[t], fw.h_boundary[t]);
            jump += w * 2.0 * bt.area / (s * hf) * cvec::norm2(&j);
            flux += w * 2.0 * bt.area * s * hf * cvec::norm2(&a);
        }
    }

    let panels = PanelSet::new(mesh, &sp.geom, quad.data_subdivision);
    let psi_err = FnSide::new(error_channels(
        &sp.psi,
        &sol.psi,
        sol.psi_offset,
        &sp.psi_one(),
        |_, x: &Vec3| exact.psi(x),
        Some(|t, x: &Vec3| exact.curl_psi(t, x)),
    ));
    let lam_err = FnSide::new(error_channels(
        &sp.lambda,
        &sol.lambda,
        sol.lambda_offset,
        &sp.lambda_one(),
        |t, x: &Vec3| exact.lambda(t, x),
        None::<fn(usize, &Vec3) -> Vec3>,
    ));
    let w_err = trace(&assemble(
        &panels,
        &psi_err,
        &psi_err,
        Kernel::Hypersingular,
        quad,
        false,
    )?);
    let v_err = trace(&assemble(
        &panels,
        &lam_err,
        &lam_err,
        Kernel::Single,
        quad,
        false,
    )?);
    let mean = crate::bem::assemble_mass(
        &panels,
        &psi_err,
        &crate::bem::FnSide::new(vec![Channel::value(|_, _| 1.0)]),
        quad.data_order,
    )?;
    let mean2 = mean[(0, 0)].powi(2) + mean[(1, 0)].powi(2);
    let wm = mat.omega * mat.mu0;
    Ok(NormParts {
        volume,
        curl,
        jump,
        psi_half: wm * (w_err + mean2),
        lambda_minus_half: wm * v_err,
        flux,
    })
}

/// Interpolants of the exact solution: element L2 projection of `H`,
/// surface interpolant of `psi` and L2 projection of `lambda`, with the
/// exact means as offsets.
pub fn interpolant(disc: &Discretization, exact: &ExactSolution) -> Result<CoupledSolution> {
    let (sp, quad) = (&disc.spaces, &disc.quad);
    let u = sp.project_x(disc.mesh, &|_, x| exact.h(x), quad.data_order)?;
    let psi = sp.surface_interpolate(&|_, x| exact.psi(x), quad.data_order, true)?;
    let lambda = sp.project_lambda(&|t, x| exact.lambda(t, x), quad.data_order, true)?;
    let (ip, il) = exact_integrals(disc, exact)?;
    let area = sp.surface_area;
    let z = |v: Vec<f64>| v.into_iter().map(|a| c64::new(a, 0.0)).collect::<Vec<_>>();
    Ok(CoupledSolution {
        u,
        psi: z(psi),
        lambda: z(lambda),
        multipliers: [cvec::ZERO; 2],
        psi_offset: c64::new(ip / area, 0.0),
        lambda_offset: c64::new(il / area, 0.0),
        residual: 0.0,
        pivot_ratio: 1.0,
    })
}

/// Exterior points used to check the representation formula.
pub fn default_probes(mesh: &TetMesh) -> Vec<Vec3> {
    let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
    for v in &mesh.vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let c = (lo + hi) * 0.5;
    let r = (hi - lo).norm() * 0.5;
    [
        Vec3::new(2.0, 0.3, -0.2),
        Vec3::new(-0.4, 2.2, 0.5),
        Vec3::new(0.1, -0.6, 2.5),
        Vec3::new(-1.6, -1.4, 1.1),
        Vec3::new(1.3, 1.7, -1.9),
    ]
    .iter()
    .map(|d| c + d * r)
    .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Probe {
    pub x: [f64; 3],
    pub exact: f64,
    pub computed_re: f64,
    pub computed_im: f64,
    pub rel_error: f64,
}

/// Exterior potential from the discrete Cauchy data at `points`.
pub fn probe(
    disc: &Discretization,
    exact: &ExactSolution,
    sol: &CoupledSolution,
    points: &[Vec3],
) -> Result<Vec<Probe>> {
    points
        .iter()
        .map(|x| {
            let psi = sol.psi_with_offset();
            let p = representation(
                disc.mesh,
                &disc.spaces,
                &disc.quad,
                x,
                &psi,
                &sol.lambda,
                sol.lambda_offset,
            )?;
            let e = exact.p(x);
            Ok(Probe {
                x: [x.x, x.y, x.z],
                exact: e,
                computed_re: p.re,
                computed_im: p.im,
                rel_error: (p - e).norm() / e.abs(),
            })
        })
        .collect()
}

/// Relative difference of the discrete `int lambda` from the exact flux -1.
pub fn flux_check(disc: &Discretization, exact: &ExactSolution) -> Result<f64> {
    let (_, il) = exact_integrals(disc, exact)?;
    Ok((il + 1.0).abs())
}

/// One mesh of a convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRow {
    pub h: f64,
    pub dofs: usize,
    pub volume: f64,
    pub curl: f64,
    pub jump: f64,
    pub psi_half: f64,
    pub lambda_minus_half: f64,
    pub total: f64,
    pub total_star: f64,
    /// Star norm of the interpolation error, the best-approximation proxy.
    pub proxy_star: f64,
    pub probe_max: f64,
    pub solve_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub m: usize,
    pub alpha: f64,
    pub rows: Vec<ErrorRow>,
    /// EOC of the total error between consecutive rows.
    pub eoc: Vec<f64>,
    pub eoc_proxy: Vec<f64>,
    /// Largest error / proxy ratio, a measured Cea constant.
    pub cea_ratio: f64,
    pub probes: Vec<Vec<Probe>>,
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn eoc(h: &[f64], e: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,dofs,volume,curl,jump,psi_half,lambda_minus_half,total,total_star,proxy_star,probe_max,eoc\n");
        for (i, r) in self.rows.iter().enumerate() {
            let e = if i == 0 {
                String::new()
            } else {
                format!("{:.6}", self.eoc[i - 1])
            };
            s += &format!(
                "{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
                r.h,
                r.dofs,
                r.volume.sqrt(),
                r.curl.sqrt(),
                r.jump.sqrt(),
                r.psi_half.sqrt(),
                r.lambda_minus_half.sqrt(),
                r.total,
                r.total_star,
                r.proxy_star,
                r.probe_max,
                e
            );
        }
        s
    }
}

/// Settings of a manufactured run.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub m: usize,
    pub materials: MaterialConfig,
    pub quad: QuadConfig,
    pub potential: Potential,
    /// Source point; `None` picks a point near the centroid of each mesh.
    pub x0: Option<Vec3>,
}

/// A point near the bounding-box centre, shifted off symmetry planes; the
/// same for every mesh of a nested family.
pub fn default_source(mesh: &TetMesh) -> Vec3 {
    let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
    for v in &mesh.vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (lo + hi) * 0.5 + (hi - lo).component_mul(&Vec3::new(-0.05, 0.02, -0.02))
}

/// Everything computed on one mesh of a manufactured study.
pub struct MeshResult {
    pub row: ErrorRow,
    pub probes: Vec<Probe>,
    pub solution: CoupledSolution,
}

pub fn run_mesh(mesh: &TetMesh, cfg: &StudyConfig, x0: Vec3) -> Result<MeshResult> {
    let start = Instant::now();
    let disc = Discretization::new(mesh, cfg.m, &cfg.materials, &cfg.quad)?;
    let exact = make_exact(mesh, &cfg.materials, x0, cfg.potential)?;
    let sys = manufactured_system(&disc, &exact)?;
    let sol = sys.solve()?;
    let err = measure_error(&disc, &exact, &sol)?;
    let proxy = measure_error(&disc, &exact, &interpolant(&disc, &exact)?)?;
    let probes = probe(&disc, &exact, &sol, &default_probes(mesh))?;
    let row = ErrorRow {
        h: mesh.h(),
        dofs: sys.dim(),
        volume: err.volume,
        curl: err.curl,
        jump: err.jump,
        psi_half: err.psi_half,
        lambda_minus_half: err.lambda_minus_half,
        total: err.norm(),
        total_star: err.norm_star(),
        proxy_star: proxy.norm_star(),
        probe_max: probes.iter().map(|p| p.rel_error).fold(0.0, f64::max),
        solve_residual: sol.residual,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "h = {:.4}: error {:.4e}, {} unknowns, {:.1} s",
        row.h,
        row.total,
        row.dofs,
        row.seconds
    );
    Ok(MeshResult {
        row,
        probes,
        solution: sol,
    })
}

/// Solves the manufactured problem on each mesh and tabulates the errors.
pub fn run_convergence(meshes: &[TetMesh], cfg: &StudyConfig) -> Result<ErrorReport> {
    if meshes.len() < 2 {
        return Err(Error::InvalidParameter(
            "a convergence study needs at least two meshes".into(),
        ));
    }
    let hs: Vec<f64> = meshes.iter().map(|m| m.h()).collect();
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        log::warn!("mesh sizes are not decreasing: {hs:?}");
    }
    let mut rows = Vec::new();
    let mut probes = Vec::new();
    for mesh in meshes {
        let r = run_mesh(mesh, cfg, cfg.x0.unwrap_or_else(|| default_source(mesh)))?;
        rows.push(r.row);
        probes.push(r.probes);
    }
    let totals: Vec<f64> = rows.iter().map(|r| r.total).collect();
    let proxies: Vec<f64> = rows.iter().map(|r| r.proxy_star).collect();
    Ok(ErrorReport {
        m: cfg.m,
        alpha: cfg.materials.alpha,
        eoc: eoc(&hs, &totals),
        eoc_proxy: eoc(&hs, &proxies),
        cea_ratio: rows
            .iter()
            .map(|r| r.total / r.proxy_star)
            .fold(0.0, f64::max),
        rows,
        probes,
    })
}

#[cfg(test)]
mod tests;
