//! Function families that can stand on either side of a boundary integral.

use crate::mesh::Vec3;
use crate::spaces::{LambdaSpace, PsiSpace};

/// Upper bound on local functions per triangle.
pub const MAX_LOCAL: usize = 32;

/// A finite family of surface functions, local to boundary triangles.
pub trait SurfaceSide: Sync {
    /// Number of global functions (matrix rows or columns).
    fn dim(&self) -> usize;
    /// Functions supported on a triangle.
    fn n_local(&self) -> usize;
    /// Global index of local function `i` on triangle `t`.
    fn dof(&self, t: usize, i: usize) -> usize;
    fn values(&self, t: usize, b: &[f64; 3], x: &Vec3, out: &mut [f64]);
    /// Surface curls; only needed by the hypersingular form.
    fn curls(&self, t: usize, b: &[f64; 3], x: &Vec3, out: &mut [Vec3]);
}

impl SurfaceSide for PsiSpace {
    fn dim(&self) -> usize {
        PsiSpace::dim(self)
    }

    fn n_local(&self) -> usize {
        PsiSpace::n_local(self)
    }

    fn dof(&self, t: usize, i: usize) -> usize {
        self.dofs(t)[i]
    }

    fn values(&self, _t: usize, b: &[f64; 3], _x: &Vec3, out: &mut [f64]) {
        self.eval(b, out)
    }

    fn curls(&self, t: usize, b: &[f64; 3], _x: &Vec3, out: &mut [Vec3]) {
        self.eval_curl(t, b, out)
    }
}

impl SurfaceSide for LambdaSpace {
    fn dim(&self) -> usize {
        LambdaSpace::dim(self)
    }

    fn n_local(&self) -> usize {
        LambdaSpace::n_local(self)
    }

    fn dof(&self, t: usize, i: usize) -> usize {
        self.offset(t) + i
    }

    fn values(&self, _t: usize, b: &[f64; 3], _x: &Vec3, out: &mut [f64]) {
        self.eval(b, out)
    }

    fn curls(&self, _t: usize, _b: &[f64; 3], _x: &Vec3, out: &mut [Vec3]) {
        out.fill(Vec3::zeros());
    }
}

pub type ValueFn<'a> = Box<dyn Fn(usize, &Vec3) -> f64 + Sync + 'a>;
pub type CurlFn<'a> = Box<dyn Fn(usize, &Vec3) -> Vec3 + Sync + 'a>;

/// One global function given pointwise, optionally minus a discrete function.
pub struct Channel<'a> {
    pub value: Option<ValueFn<'a>>,
    pub curl: Option<CurlFn<'a>>,
    pub minus: Option<(&'a dyn SurfaceSide, Vec<f64>)>,
}

impl<'a> Channel<'a> {
    pub fn value(f: impl Fn(usize, &Vec3) -> f64 + Sync + 'a) -> Self {
        Channel {
            value: Some(Box::new(f)),
            curl: None,
            minus: None,
        }
    }

    pub fn with_curl(mut self, c: impl Fn(usize, &Vec3) -> Vec3 + Sync + 'a) -> Self {
        self.curl = Some(Box::new(c));
        self
    }

    /// The negated discrete function `-sum_i coeffs_i f_i`.
    pub fn discrete(side: &'a dyn SurfaceSide, coeffs: Vec<f64>) -> Self {
        Channel {
            value: None,
            curl: None,
            minus: Some((side, coeffs)),
        }
    }

    pub fn minus(mut self, side: &'a dyn SurfaceSide, coeffs: Vec<f64>) -> Self {
        self.minus = Some((side, coeffs));
        self
    }
}

/// A handful of pointwise-defined functions, each supported on the whole
/// surface; used as the trial side to integrate data against a basis.
pub struct FnSide<'a> {
    pub channels: Vec<Channel<'a>>,
}

impl<'a> FnSide<'a> {
    pub fn new(channels: Vec<Channel<'a>>) -> Self {
        FnSide { channels }
    }
}

impl SurfaceSide for FnSide<'_> {
    fn dim(&self) -> usize {
        self.channels.len()
    }

    fn n_local(&self) -> usize {
        self.channels.len()
    }

    fn dof(&self, _t: usize, i: usize) -> usize {
        i
    }

    fn values(&self, t: usize, b: &[f64; 3], x: &Vec3, out: &mut [f64]) {
        let mut buf = [0.0; MAX_LOCAL];
        for (o, ch) in out.iter_mut().zip(&self.channels) {
            let mut v = ch.value.as_ref().map_or(0.0, |f| f(t, x));
            if let Some((side, coeffs)) = &ch.minus {
                let n = side.n_local();
                side.values(t, b, x, &mut buf[..n]);
                for (i, bi) in buf[..n].iter().enumerate() {
                    v -= coeffs[side.dof(t, i)] * bi;
                }
            }
            *o = v;
        }
    }

    fn curls(&self, t: usize, b: &[f64; 3], x: &Vec3, out: &mut [Vec3]) {
        let mut buf = [Vec3::zeros(); MAX_LOCAL];
        for (o, ch) in out.iter_mut().zip(&self.channels) {
            let mut v = ch.curl.as_ref().map_or(Vec3::zeros(), |f| f(t, x));
            if let Some((side, coeffs)) = &ch.minus {
                let n = side.n_local();
                side.curls(t, b, x, &mut buf[..n]);
                for (i, bi) in buf[..n].iter().enumerate() {
                    v -= bi * coeffs[side.dof(t, i)];
                }
            }
            *o = v;
        }
    }
}
