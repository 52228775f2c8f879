//! Galerkin assembly of boundary integral forms over panel pairs.

use faer::Mat;
use rayon::prelude::*;

use super::panels::{panel_distance, Panel, PanelSet};
use super::sides::{SurfaceSide, MAX_LOCAL};
use crate::error::{Error, Result};
use crate::mesh::Vec3;
use crate::quadrature::{gauss_tri, QuadConfig, TriRule};
use crate::quadrature::{sauter_schwab, to_bary, PairConfig, PairRules, MAX_Q};

pub const INV_4PI: f64 = 0.25 * std::f64::consts::FRAC_1_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `E(x - y)` against values.
    Single,
    /// `dE/dn_y` against values, normal of the trial panel.
    DoubleLayer,
    /// `E(x - y)` against surface curls.
    Hypersingular,
}

impl Kernel {
    fn uses_curls(self) -> bool {
        self == Kernel::Hypersingular
    }

    #[inline]
    fn eval(self, x: &Vec3, y: &Vec3, ny: &Vec3) -> f64 {
        let d = x - y;
        let r2 = d.norm_squared();
        let r = r2.sqrt();
        match self {
            Kernel::Single | Kernel::Hypersingular => INV_4PI / r,
            Kernel::DoubleLayer => INV_4PI * d.dot(ny) / (r2 * r),
        }
    }
}

/// Side data at the points of a tensor rule on one panel.
struct Prepared {
    x: Vec<Vec3>,
    w: Vec<f64>,
    vals: Vec<f64>,
    curls: Vec<Vec3>,
}

fn prepare(panel: &Panel, rule: &TriRule, side: &dyn SurfaceSide, curls: bool) -> Prepared {
    let n = side.n_local();
    let np = rule.len();
    let mut p = Prepared {
        x: Vec::with_capacity(np),
        w: Vec::with_capacity(np),
        vals: vec![0.0; if curls { 0 } else { np * n }],
        curls: vec![Vec3::zeros(); if curls { np * n } else { 0 }],
    };
    for (k, (mu, w)) in rule.iter().enumerate() {
        let (b, x) = panel.map(mu);
        if curls {
            side.curls(panel.tri, &b, &x, &mut p.curls[k * n..(k + 1) * n]);
        } else {
            side.values(panel.tri, &b, &x, &mut p.vals[k * n..(k + 1) * n]);
        }
        p.x.push(x);
        p.w.push(2.0 * panel.area * w);
    }
    p
}

/// Permutations putting shared corners first, in matching order.
fn classify(p: &Panel, q: &Panel) -> (PairConfig, [usize; 3], [usize; 3]) {
    let mut shared = [(0usize, 0usize); 3];
    let mut n = 0;
    for i in 0..3 {
        for j in 0..3 {
            if p.keys[i] != usize::MAX && p.keys[i] == q.keys[j] {
                shared[n] = (i, j);
                n += 1;
            }
        }
    }
    match n {
        3 => {
            let mut tau = [0; 3];
            for &(i, j) in &shared {
                tau[i] = j;
            }
            (PairConfig::Identical, [0, 1, 2], tau)
        }
        2 => {
            let (i0, j0) = shared[0];
            let (i1, j1) = shared[1];
            (
                PairConfig::SharedEdge,
                [i0, i1, 3 - i0 - i1],
                [j0, j1, 3 - j0 - j1],
            )
        }
        1 => {
            let (i, j) = shared[0];
            (
                PairConfig::SharedVertex,
                [i, (i + 1) % 3, (i + 2) % 3],
                [j, (j + 1) % 3, (j + 2) % 3],
            )
        }
        _ => (PairConfig::Disjoint, [0, 1, 2], [0, 1, 2]),
    }
}

impl PairRules {
    fn for_config(quad: &QuadConfig, q: usize) -> Result<Self> {
        let edge = (q + quad.edge_q_extra).min(MAX_Q);
        Ok(PairRules {
            identical: sauter_schwab(PairConfig::Identical, q)?,
            edge: sauter_schwab(PairConfig::SharedEdge, edge)?,
            vertex: sauter_schwab(PairConfig::SharedVertex, q)?,
        })
    }
}

pub struct Assembler<'a> {
    panels: &'a PanelSet,
    test: &'a dyn SurfaceSide,
    trial: &'a dyn SurfaceSide,
    kernel: Kernel,
    quad: QuadConfig,
    rules: PairRules,
    sharp_rules: PairRules,
    sharp_cos: f64,
    regular: TriRule,
    near: TriRule,
    symmetric: bool,
    test_reg: Vec<Prepared>,
    test_near: Vec<Prepared>,
    trial_reg: Vec<Prepared>,
    trial_near: Vec<Prepared>,
}

const CHUNK: usize = 64;

impl<'a> Assembler<'a> {
    /// `symmetric` evaluates only pairs `q >= p` and mirrors them; valid
    /// when test and trial are the same family and the kernel is symmetric.
    pub fn new(
        panels: &'a PanelSet,
        test: &'a dyn SurfaceSide,
        trial: &'a dyn SurfaceSide,
        kernel: Kernel,
        quad: &QuadConfig,
        symmetric: bool,
    ) -> Result<Self> {
        quad.validate()?;
        if symmetric && (kernel == Kernel::DoubleLayer || test.dim() != trial.dim()) {
            return Err(Error::InvalidParameter(
                "symmetric assembly of a non-symmetric form".into(),
            ));
        }
        if test.n_local() > MAX_LOCAL || trial.n_local() > MAX_LOCAL {
            return Err(Error::InvalidParameter("too many local functions".into()));
        }
        let regular = gauss_tri(quad.regular_order)?;
        let near = gauss_tri(quad.near_order)?;
        let curls = kernel.uses_curls();
        let prep = |rule: &TriRule, side: &dyn SurfaceSide| -> Vec<Prepared> {
            panels
                .panels
                .par_iter()
                .map(|p| prepare(p, rule, side, curls))
                .collect()
        };
        let test_reg = prep(&regular, test);
        let test_near = prep(&near, test);
        let (trial_reg, trial_near) = if symmetric {
            (Vec::new(), Vec::new())
        } else {
            (prep(&regular, trial), prep(&near, trial))
        };
        Ok(Assembler {
            panels,
            test,
            trial,
            kernel,
            quad: quad.clone(),
            rules: PairRules::for_config(quad, quad.singular_q)?,
            sharp_rules: PairRules::for_config(quad, quad.sharp_q())?,
            sharp_cos: quad.sharp_angle.to_radians().cos(),
            regular,
            near,
            symmetric,
            test_reg,
            test_near,
            trial_reg,
            trial_near,
        })
    }

    pub fn assemble(&self) -> Mat<f64> {
        let np = self.panels.len();
        let (nt, ns) = (self.test.n_local(), self.trial.n_local());
        let bs = nt * ns;
        let mut mat = Mat::<f64>::zeros(self.test.dim(), self.trial.dim());
        for start in (0..np).step_by(CHUNK) {
            let end = (start + CHUNK).min(np);
            let rows: Vec<Vec<f64>> = (start..end)
                .into_par_iter()
                .map(|p| {
                    let first = if self.symmetric { p } else { 0 };
                    let mut blocks = vec![0.0; (np - first) * bs];
                    for (q, blk) in (first..np).zip(blocks.chunks_mut(bs)) {
                        self.pair(p, q, blk);
                    }
                    blocks
                })
                .collect();
            for (p, blocks) in (start..end).zip(rows) {
                let first = if self.symmetric { p } else { 0 };
                let tp = self.panels.panels[p].tri;
                for (q, blk) in (first..np).zip(blocks.chunks(bs)) {
                    let tq = self.panels.panels[q].tri;
                    for a in 0..nt {
                        let r = self.test.dof(tp, a);
                        for b in 0..ns {
                            let c = self.trial.dof(tq, b);
                            let v = blk[a * ns + b];
                            if !self.symmetric {
                                mat[(r, c)] += v;
                            } else if q != p {
                                mat[(r, c)] += v;
                                mat[(c, r)] += v;
                            } else {
                                // Symmetrize the self-interaction block.
                                let v = 0.5 * (v + blk[b * ns + a]);
                                mat[(r, c)] += v;
                            }
                        }
                    }
                }
            }
        }
        mat
    }

    fn pair(&self, p: usize, q: usize, out: &mut [f64]) {
        let pp = &self.panels.panels[p];
        let pq = &self.panels.panels[q];
        let (config, sigma, tau) = classify(pp, pq);
        let rules = if pp.normal.dot(&pq.normal) < self.sharp_cos {
            &self.sharp_rules
        } else {
            &self.rules
        };
        match rules.get(config) {
            Some(rule) => self.singular(pp, pq, &rule.points, &sigma, &tau, out),
            None => self.disjoint(pp, pq, Some((p, q)), 0, out),
        }
    }

    fn singular(
        &self,
        pp: &Panel,
        pq: &Panel,
        points: &[crate::quadrature::PairPoint],
        sigma: &[usize; 3],
        tau: &[usize; 3],
        out: &mut [f64],
    ) {
        let (nt, ns) = (self.test.n_local(), self.trial.n_local());
        let scale = 4.0 * pp.area * pq.area;
        let mut fv = [0.0; MAX_LOCAL];
        let mut gv = [0.0; MAX_LOCAL];
        let mut fc = [Vec3::zeros(); MAX_LOCAL];
        let mut gc = [Vec3::zeros(); MAX_LOCAL];
        let curls = self.kernel.uses_curls();
        for pt in points {
            let (lx, ly) = (to_bary(pt.x), to_bary(pt.y));
            let mut mx = [0.0; 3];
            let mut my = [0.0; 3];
            for k in 0..3 {
                mx[sigma[k]] = lx[k];
                my[tau[k]] = ly[k];
            }
            let (bx, x) = pp.map(&mx);
            let (by, y) = pq.map(&my);
            let kw = scale * pt.w * self.kernel.eval(&x, &y, &pq.normal);
            if curls {
                self.test.curls(pp.tri, &bx, &x, &mut fc[..nt]);
                self.trial.curls(pq.tri, &by, &y, &mut gc[..ns]);
                for a in 0..nt {
                    let fa = fc[a] * kw;
                    for b in 0..ns {
                        out[a * ns + b] += fa.dot(&gc[b]);
                    }
                }
            } else {
                self.test.values(pp.tri, &bx, &x, &mut fv[..nt]);
                self.trial.values(pq.tri, &by, &y, &mut gv[..ns]);
                for a in 0..nt {
                    let fa = fv[a] * kw;
                    for b in 0..ns {
                        out[a * ns + b] += fa * gv[b];
                    }
                }
            }
        }
    }

    /// `top` carries the panel indices while no subdivision has happened,
    /// so that cached rule data can be used.
    fn disjoint(
        &self,
        pp: &Panel,
        pq: &Panel,
        top: Option<(usize, usize)>,
        depth: usize,
        out: &mut [f64],
    ) {
        let q = &self.quad;
        let dmax = pp.diameter.max(pq.diameter);
        let bound = (pp.centroid - pq.centroid).norm() - pp.radius - pq.radius;
        let ratio = if bound >= q.far_ratio * dmax {
            bound / dmax
        } else {
            panel_distance(pp, pq) / dmax
        };
        if ratio < q.near_ratio && depth < q.max_subdivision {
            if pp.diameter >= pq.diameter {
                for c in pp.children().iter() {
                    self.disjoint(c, pq, None, depth + 1, out);
                }
            } else {
                for c in pq.children().iter() {
                    self.disjoint(pp, c, None, depth + 1, out);
                }
            }
            return;
        }
        let near = ratio < q.far_ratio;
        let curls = self.kernel.uses_curls();
        match top {
            Some((p, r)) => {
                let (tf, sf) = if near {
                    (&self.test_near, &self.trial_near)
                } else {
                    (&self.test_reg, &self.trial_reg)
                };
                let sf = if self.symmetric { tf } else { sf };
                self.tensor(&tf[p], &sf[r], &pq.normal, out);
            }
            None => {
                let rule = if near { &self.near } else { &self.regular };
                let a = prepare(pp, rule, self.test, curls);
                let b = prepare(pq, rule, self.trial, curls);
                self.tensor(&a, &b, &pq.normal, out);
            }
        }
    }

    fn tensor(&self, f: &Prepared, g: &Prepared, ny: &Vec3, out: &mut [f64]) {
        let (nt, ns) = (self.test.n_local(), self.trial.n_local());
        if self.kernel.uses_curls() {
            let mut h = [Vec3::zeros(); MAX_LOCAL];
            for (i, x) in f.x.iter().enumerate() {
                h[..ns].fill(Vec3::zeros());
                for (j, y) in g.x.iter().enumerate() {
                    let k = self.kernel.eval(x, y, ny) * g.w[j];
                    for (hb, gb) in h[..ns].iter_mut().zip(&g.curls[j * ns..(j + 1) * ns]) {
                        *hb += gb * k;
                    }
                }
                for a in 0..nt {
                    let fa = f.curls[i * nt + a] * f.w[i];
                    for b in 0..ns {
                        out[a * ns + b] += fa.dot(&h[b]);
                    }
                }
            }
        } else {
            let mut h = [0.0; MAX_LOCAL];
            for (i, x) in f.x.iter().enumerate() {
                h[..ns].fill(0.0);
                for (j, y) in g.x.iter().enumerate() {
                    let k = self.kernel.eval(x, y, ny) * g.w[j];
                    for (hb, gb) in h[..ns].iter_mut().zip(&g.vals[j * ns..(j + 1) * ns]) {
                        *hb += gb * k;
                    }
                }
                for a in 0..nt {
                    let fa = f.vals[i * nt + a] * f.w[i];
                    for b in 0..ns {
                        out[a * ns + b] += fa * h[b];
                    }
                }
            }
        }
    }
}

/// Convenience wrapper around [`Assembler`].
pub fn assemble(
    panels: &PanelSet,
    test: &dyn SurfaceSide,
    trial: &dyn SurfaceSide,
    kernel: Kernel,
    quad: &QuadConfig,
    symmetric: bool,
) -> Result<Mat<f64>> {
    Ok(Assembler::new(panels, test, trial, kernel, quad, symmetric)?.assemble())
}

/// `int f_a g_b` over the surface with a rule of the given order per panel.
pub fn assemble_mass(
    panels: &PanelSet,
    test: &dyn SurfaceSide,
    trial: &dyn SurfaceSide,
    order: usize,
) -> Result<Mat<f64>> {
    let rule = gauss_tri(order)?;
    let (nt, ns) = (test.n_local(), trial.n_local());
    let mut mat = Mat::<f64>::zeros(test.dim(), trial.dim());
    let mut f = [0.0; MAX_LOCAL];
    let mut g = [0.0; MAX_LOCAL];
    for p in &panels.panels {
        for (mu, w) in rule.iter() {
            let (b, x) = p.map(mu);
            test.values(p.tri, &b, &x, &mut f[..nt]);
            trial.values(p.tri, &b, &x, &mut g[..ns]);
            let w = 2.0 * p.area * w;
            for (a, fa) in f[..nt].iter().enumerate() {
                let r = test.dof(p.tri, a);
                for (c, gc) in g[..ns].iter().enumerate() {
                    mat[(r, trial.dof(p.tri, c))] += w * fa * gc;
                }
            }
        }
    }
    Ok(mat)
}

/// `int k(x, y) f_b(y) dy` for every function of `side`, at a point `x`
/// off the surface. Panels close to `x` relative to their size are
/// subdivided.
pub fn potential(
    panels: &PanelSet,
    side: &dyn SurfaceSide,
    kernel: Kernel,
    x: &Vec3,
    order: usize,
    quad: &QuadConfig,
) -> Result<Vec<f64>> {
    if kernel == Kernel::Hypersingular {
        return Err(Error::InvalidParameter(
            "potential of the hypersingular form".into(),
        ));
    }
    let rule = gauss_tri(order)?;
    let mut out = vec![0.0; side.dim()];
    let mut g = [0.0; MAX_LOCAL];
    let n = side.n_local();
    let mut stack: Vec<(Panel, usize)> = Vec::new();
    for p in &panels.panels {
        stack.push((p.clone(), 0));
        while let Some((p, depth)) = stack.pop() {
            let d = crate::mesh::point_triangle_distance(x, &p.corners);
            if d < quad.far_ratio * p.diameter && depth < quad.max_subdivision + 3 {
                for c in p.children() {
                    stack.push((c, depth + 1));
                }
                continue;
            }
            for (mu, w) in rule.iter() {
                let (b, y) = p.map(mu);
                side.values(p.tri, &b, &y, &mut g[..n]);
                let k = 2.0 * p.area * w * kernel.eval(x, &y, &p.normal);
                for (i, gi) in g[..n].iter().enumerate() {
                    out[side.dof(p.tri, i)] += k * gi;
                }
            }
        }
    }
    Ok(out)
}
