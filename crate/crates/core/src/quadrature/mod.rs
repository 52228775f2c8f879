//! Gauss rules on simplices and regularized rules for singular triangle pairs.

mod pair;

pub use pair::{sauter_schwab, to_bary, PairConfig, PairPoint, PairRule, PairRules, MAX_Q};

use crate::error::{Error, Result};

/// Highest polynomial order served by [`gauss_tri`] and [`gauss_tet`].
pub const MAX_ORDER: usize = 40;

/// Points in barycentric coordinates with weights on the reference simplex.
#[derive(Debug, Clone)]
pub struct QuadRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
}

pub type TriRule = QuadRule<3>;
pub type TetRule = QuadRule<4>;

impl<const N: usize> QuadRule<N> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; N], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        Err(Error::UnsupportedOrder(order))
    } else {
        Ok(())
    }
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        pts.push(p);
        wts.push(0.5 * w);
    }
}

/// Triangle rule exact for total degree `order`; weights sum to 1/2.
///
/// Low orders use the classical symmetric rules with positive weights,
/// higher orders a collapsed Gauss–Legendre product.
pub fn gauss_tri(order: usize) -> Result<TriRule> {
    check_order(order)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match order {
        1 => {
            points.push([1.0 / 3.0; 3]);
            weights.push(0.5);
        }
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut points, &mut weights),
        3 | 4 => {
            orbit3(
                0.445_948_490_915_965,
                0.223_381_589_678_011,
                &mut points,
                &mut weights,
            );
            orbit3(
                0.091_576_213_509_771,
                0.109_951_743_655_322,
                &mut points,
                &mut weights,
            );
        }
        5 => {
            points.push([1.0 / 3.0; 3]);
            weights.push(0.5 * 0.225);
            orbit3(
                0.470_142_064_105_115,
                0.132_394_152_788_506,
                &mut points,
                &mut weights,
            );
            orbit3(
                0.101_286_507_323_456,
                0.125_939_180_544_827,
                &mut points,
                &mut weights,
            );
        }
        _ => {
            let (x, w) = gauss_legendre((order + 3) / 2);
            for (&u, &wu) in x.iter().zip(&w) {
                for (&v, &wv) in x.iter().zip(&w) {
                    let l1 = u;
                    let l2 = (1.0 - u) * v;
                    points.push([1.0 - l1 - l2, l1, l2]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
        }
    }
    Ok(QuadRule { points, weights })
}

/// Composite rule: `rule` applied on each of the `4^level` triangles of a
/// uniform red refinement.
pub fn refine_tri(rule: &TriRule, level: usize) -> TriRule {
    let mut tris = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * tris.len());
        for [a, b, c] in tris {
            let mid = |p: [f64; 3], q: [f64; 3]| {
                [
                    0.5 * (p[0] + q[0]),
                    0.5 * (p[1] + q[1]),
                    0.5 * (p[2] + q[2]),
                ]
            };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
        }
        tris = next;
    }
    let scale = 0.25f64.powi(level as i32);
    let mut points = Vec::with_capacity(tris.len() * rule.len());
    let mut weights = Vec::with_capacity(tris.len() * rule.len());
    for [a, b, c] in &tris {
        for (p, w) in rule.iter() {
            points.push(std::array::from_fn(|i| {
                p[0] * a[i] + p[1] * b[i] + p[2] * c[i]
            }));
            weights.push(w * scale);
        }
    }
    QuadRule { points, weights }
}

/// Tetrahedron rule exact for total degree `order`; weights sum to 1/6.
pub fn gauss_tet(order: usize) -> Result<TetRule> {
    check_order(order)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match order {
        1 => {
            points.push([0.25; 4]);
            weights.push(1.0 / 6.0);
        }
        2 => {
            let a = 0.138_196_601_125_010_5;
            let b = 1.0 - 3.0 * a;
            for i in 0..4 {
                let mut p = [a; 4];
                p[i] = b;
                points.push(p);
                weights.push(1.0 / 24.0);
            }
        }
        _ => {
            let (xu, wu) = gauss_legendre((order + 4) / 2);
            let (xv, wv) = gauss_legendre((order + 3) / 2);
            let (xw, ww) = gauss_legendre((order + 2) / 2);
            for (&u, &a) in xu.iter().zip(&wu) {
                for (&v, &b) in xv.iter().zip(&wv) {
                    for (&s, &c) in xw.iter().zip(&ww) {
                        let l1 = u;
                        let l2 = (1.0 - u) * v;
                        let l3 = (1.0 - u) * (1.0 - v) * s;
                        points.push([1.0 - l1 - l2 - l3, l1, l2, l3]);
                        weights.push(a * b * c * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
    }
    Ok(QuadRule { points, weights })
}

/// Quadrature orders and near-field controls used by the assembly routines.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    /// Points per direction of the singular pair rules.
    pub singular_q: usize,
    /// Extra points per direction for touching pairs that meet at a sharp
    /// angle (edges and corners of the boundary), capped at the maximum q.
    #[serde(default = "default_sharp_extra")]
    pub sharp_q_extra: usize,
    /// Extra points per direction for pairs sharing an edge, whose
    /// regularized integrand converges more slowly in q.
    #[serde(default = "default_edge_extra")]
    pub edge_q_extra: usize,
    /// Angle between panel normals, in degrees, above which a pair is sharp.
    #[serde(default = "default_sharp_angle")]
    pub sharp_angle: f64,
    /// Triangle rule order for well-separated panel pairs.
    pub regular_order: usize,
    /// Triangle rule order for panel pairs closer than `far_ratio`.
    pub near_order: usize,
    /// Tet rule order for volume terms.
    pub volume_order: usize,
    /// Triangle rule order for face terms and surface masses.
    pub surface_order: usize,
    /// Rule order for integrals of non-polynomial data.
    pub data_order: usize,
    /// Below this distance/diameter ratio the larger panel is split in four.
    pub near_ratio: f64,
    /// Below this ratio `near_order` is used instead of `regular_order`.
    pub far_ratio: f64,
    pub max_subdivision: usize,
    /// Uniform panel refinement applied to boundary integrals of data.
    pub data_subdivision: usize,
}

fn default_sharp_extra() -> usize {
    4
}

fn default_edge_extra() -> usize {
    1
}

fn default_sharp_angle() -> f64 {
    30.0
}

impl QuadConfig {
    /// Points per direction used on sharp touching pairs.
    pub fn sharp_q(&self) -> usize {
        (self.singular_q + self.sharp_q_extra).min(pair::MAX_Q)
    }

    /// Defaults for polynomial order `m`: q = 8 on singular pairs and order
    /// 2m+2 rules for regular terms.
    pub fn for_order(m: usize) -> Self {
        QuadConfig {
            singular_q: 8,
            sharp_q_extra: default_sharp_extra(),
            edge_q_extra: default_edge_extra(),
            sharp_angle: default_sharp_angle(),
            regular_order: 2 * m + 2,
            near_order: 2 * m + 6,
            volume_order: 2 * m + 2,
            surface_order: 2 * m + 2,
            data_order: 2 * m + 8,
            near_ratio: 1.5,
            far_ratio: 3.0,
            max_subdivision: 3,
            data_subdivision: 1,
        }
    }

    /// Every rule tied to `q`: singular rules with q points per direction,
    /// all regular rules of order 2q-1.
    pub fn uniform(q: usize) -> Self {
        let o = 2 * q - 1;
        QuadConfig {
            singular_q: q,
            sharp_q_extra: default_sharp_extra(),
            edge_q_extra: default_edge_extra(),
            sharp_angle: default_sharp_angle(),
            regular_order: o,
            near_order: o,
            volume_order: o,
            surface_order: o,
            data_order: o,
            near_ratio: 1.5,
            far_ratio: 3.0,
            max_subdivision: 3,
            data_subdivision: 1,
        }
    }

    /// Triangle rule for data integrals, refined `data_subdivision` times.
    pub fn data_tri(&self) -> Result<TriRule> {
        Ok(refine_tri(
            &gauss_tri(self.data_order)?,
            self.data_subdivision,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=pair::MAX_Q).contains(&self.singular_q) {
            return Err(Error::UnsupportedOrder(self.singular_q));
        }
        for o in [
            self.regular_order,
            self.near_order,
            self.volume_order,
            self.surface_order,
            self.data_order,
        ] {
            check_order(o)?;
        }
        if !(0.0..=180.0).contains(&self.sharp_angle) {
            return Err(Error::InvalidParameter(
                "sharp_angle must lie in [0, 180] degrees".into(),
            ));
        }
        if !(self.near_ratio > 0.0 && self.far_ratio >= self.near_ratio) {
            return Err(Error::InvalidParameter(
                "quadrature ratios must satisfy 0 < near_ratio <= far_ratio".into(),
            ));
        }
        Ok(())
    }
}
