//! Sauter–Schwab rules for triangle pairs with a weakly singular kernel.
//!
//! Both triangles are parametrized over `T = {0 <= x2 <= x1 <= 1}` through
//! `chi(x) = P0 + x1 (P1 - P0) + x2 (P2 - P1)`, so the barycentric
//! coordinates of a point are `(1 - x1, x1 - x2, x2)`. For the singular
//! configurations the shared vertices come first: a shared edge is
//! `P0 P1` in both triangles, a shared vertex is `P0`. Weights sum to 1/4,
//! the measure of `T x T`; a physical integral over `T1 x T2` is
//! `4 |T1| |T2|` times the reference sum.

use super::{gauss_legendre, gauss_tri};
use crate::error::{Error, Result};

pub const MAX_Q: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairConfig {
    Identical,
    SharedEdge,
    SharedVertex,
    Disjoint,
}

impl PairConfig {
    /// Configuration from the number of shared vertices.
    pub fn from_shared(n: usize) -> Result<Self> {
        match n {
            0 => Ok(PairConfig::Disjoint),
            1 => Ok(PairConfig::SharedVertex),
            2 => Ok(PairConfig::SharedEdge),
            3 => Ok(PairConfig::Identical),
            _ => Err(Error::InvalidParameter(format!("{n} shared vertices"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub w: f64,
}

impl PairPoint {
    pub fn bary_x(&self) -> [f64; 3] {
        to_bary(self.x)
    }

    pub fn bary_y(&self) -> [f64; 3] {
        to_bary(self.y)
    }
}

#[inline]
pub fn to_bary(x: [f64; 2]) -> [f64; 3] {
    [1.0 - x[0], x[0] - x[1], x[1]]
}

#[derive(Debug, Clone)]
pub struct PairRule {
    pub config: PairConfig,
    pub q: usize,
    pub points: Vec<PairPoint>,
}

impl PairRule {
    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.w).sum()
    }
}

/// The three singular rules for one `q`.
#[derive(Debug, Clone)]
pub struct PairRules {
    pub identical: PairRule,
    pub edge: PairRule,
    pub vertex: PairRule,
}

impl PairRules {
    pub fn new(q: usize) -> Result<Self> {
        Ok(PairRules {
            identical: sauter_schwab(PairConfig::Identical, q)?,
            edge: sauter_schwab(PairConfig::SharedEdge, q)?,
            vertex: sauter_schwab(PairConfig::SharedVertex, q)?,
        })
    }

    pub fn get(&self, config: PairConfig) -> Option<&PairRule> {
        match config {
            PairConfig::Identical => Some(&self.identical),
            PairConfig::SharedEdge => Some(&self.edge),
            PairConfig::SharedVertex => Some(&self.vertex),
            PairConfig::Disjoint => None,
        }
    }
}

fn scale(s: f64, p: [f64; 2]) -> [f64; 2] {
    [s * p[0], s * p[1]]
}

/// Builds the regularized rule for `config` with `q` Gauss points per
/// direction of the four-dimensional parameter cube.
pub fn sauter_schwab(config: PairConfig, q: usize) -> Result<PairRule> {
    if !(1..=MAX_Q).contains(&q) {
        return Err(Error::UnsupportedOrder(q));
    }
    let (g, w) = gauss_legendre(q);
    let gw: Vec<(f64, f64)> = g.iter().copied().zip(w.iter().copied()).collect();
    let mut points = Vec::new();
    match config {
        PairConfig::Identical => {
            // The innermost variable is split at 1/2: the transformed
            // integrand has a nearby complex singularity in it.
            let g3: Vec<(f64, f64)> = gw
                .iter()
                .map(|&(x, w)| (0.5 * x, 0.5 * w))
                .chain(gw.iter().map(|&(x, w)| (0.5 + 0.5 * x, 0.5 * w)))
                .collect();
            for &(xi, w0) in &gw {
                for &(e1, w1) in &gw {
                    for &(e2, w2) in &gw {
                        for &(e3, w3) in &g3 {
                            let wt = w0 * w1 * w2 * w3 * xi.powi(3) * e1 * e1 * e2;
                            let a = [1.0, 1.0 - e1 + e1 * e2];
                            let b = [1.0 - e1 * e2 * e3, 1.0 - e1];
                            let c = [1.0, e1 * (1.0 - e2 + e2 * e3)];
                            let d = [1.0 - e1 * e2, e1 * (1.0 - e2)];
                            let e = [1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)];
                            let f = [1.0, e1 * (1.0 - e2)];
                            for (x, y) in [(a, b), (b, a), (c, d), (d, c), (e, f), (f, e)] {
                                points.push(PairPoint {
                                    x: scale(xi, x),
                                    y: scale(xi, y),
                                    w: wt,
                                });
                            }
                        }
                    }
                }
            }
        }
        PairConfig::SharedEdge => {
            for &(xi, w0) in &gw {
                for &(e1, w1) in &gw {
                    for &(e2, w2) in &gw {
                        for &(e3, w3) in &gw {
                            let base = w0 * w1 * w2 * w3 * xi.powi(3) * e1 * e1;
                            points.push(PairPoint {
                                x: scale(xi, [1.0, e1 * e3]),
                                y: scale(xi, [1.0 - e1 * e2, e1 * (1.0 - e2)]),
                                w: base,
                            });
                            let terms = [
                                ([1.0, e1], [1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)]),
                                ([1.0 - e1 * e2, e1 * (1.0 - e2)], [1.0, e1 * e2 * e3]),
                                ([1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)], [1.0, e1]),
                                ([1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)], [1.0, e1 * e2]),
                            ];
                            for (x, y) in terms {
                                points.push(PairPoint {
                                    x: scale(xi, x),
                                    y: scale(xi, y),
                                    w: base * e2,
                                });
                            }
                        }
                    }
                }
            }
        }
        PairConfig::SharedVertex => {
            for &(xi, w0) in &gw {
                for &(e1, w1) in &gw {
                    for &(e2, w2) in &gw {
                        for &(e3, w3) in &gw {
                            let wt = w0 * w1 * w2 * w3 * xi.powi(3) * e2;
                            points.push(PairPoint {
                                x: scale(xi, [1.0, e1]),
                                y: scale(xi * e2, [1.0, e3]),
                                w: wt,
                            });
                            points.push(PairPoint {
                                x: scale(xi * e2, [1.0, e1]),
                                y: scale(xi, [1.0, e3]),
                                w: wt,
                            });
                        }
                    }
                }
            }
        }
        PairConfig::Disjoint => {
            let r = gauss_tri(2 * q - 1)?;
            for (bx, wx) in r.iter() {
                for (by, wy) in r.iter() {
                    points.push(PairPoint {
                        x: [1.0 - bx[0], bx[2]],
                        y: [1.0 - by[0], by[2]],
                        w: wx * wy,
                    });
                }
            }
        }
    }
    Ok(PairRule { config, q, points })
}
