//! Integration panels: boundary triangles, optionally refined uniformly.

use std::collections::HashMap;

use crate::mesh::{TetMesh, Vec3};
use crate::spaces::SurfaceGeometry;

/// A flat sub-triangle of a boundary triangle.
#[derive(Debug, Clone)]
pub struct Panel {
    /// Boundary triangle the panel lies in.
    pub tri: usize,
    pub corners: [Vec3; 3],
    /// Barycentric coordinates of the corners in the parent triangle.
    pub bary: [[f64; 3]; 3],
    /// Vertex identifiers shared between panels that meet at a corner.
    pub keys: [usize; 3],
    pub area: f64,
    pub normal: Vec3,
    pub centroid: Vec3,
    /// Largest centroid-to-corner distance.
    pub radius: f64,
    pub diameter: f64,
}

impl Panel {
    fn new(
        tri: usize,
        corners: [Vec3; 3],
        bary: [[f64; 3]; 3],
        keys: [usize; 3],
        normal: Vec3,
    ) -> Self {
        let area = 0.5
            * (corners[1] - corners[0])
                .cross(&(corners[2] - corners[0]))
                .norm();
        let centroid = (corners[0] + corners[1] + corners[2]) / 3.0;
        let radius = corners
            .iter()
            .map(|c| (c - centroid).norm())
            .fold(0.0, f64::max);
        let diameter = (corners[0] - corners[1])
            .norm()
            .max((corners[1] - corners[2]).norm())
            .max((corners[2] - corners[0]).norm());
        Panel {
            tri,
            corners,
            bary,
            keys,
            area,
            normal,
            centroid,
            radius,
            diameter,
        }
    }

    /// Parent barycentrics and physical point of local barycentrics `mu`.
    #[inline]
    pub fn map(&self, mu: &[f64; 3]) -> ([f64; 3], Vec3) {
        let mut b = [0.0; 3];
        for (k, m) in mu.iter().enumerate() {
            for (bi, pk) in b.iter_mut().zip(&self.bary[k]) {
                *bi += m * pk;
            }
        }
        let x = self.corners[0] * mu[0] + self.corners[1] * mu[1] + self.corners[2] * mu[2];
        (b, x)
    }

    /// The four congruent children; keys are not tracked below this level.
    pub fn children(&self) -> [Panel; 4] {
        let c = &self.corners;
        let b = &self.bary;
        let mid = |i: usize, j: usize| {
            (
                (c[i] + c[j]) * 0.5,
                [
                    0.5 * (b[i][0] + b[j][0]),
                    0.5 * (b[i][1] + b[j][1]),
                    0.5 * (b[i][2] + b[j][2]),
                ],
            )
        };
        let (c01, b01) = mid(0, 1);
        let (c12, b12) = mid(1, 2);
        let (c20, b20) = mid(2, 0);
        let k = [usize::MAX; 3];
        let n = self.normal;
        [
            Panel::new(self.tri, [c[0], c01, c20], [b[0], b01, b20], k, n),
            Panel::new(self.tri, [c01, c[1], c12], [b01, b[1], b12], k, n),
            Panel::new(self.tri, [c20, c12, c[2]], [b20, b12, b[2]], k, n),
            Panel::new(self.tri, [c01, c12, c20], [b01, b12, b20], k, n),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct PanelSet {
    pub panels: Vec<Panel>,
    pub level: usize,
}

impl PanelSet {
    /// Every boundary triangle split into `4^level` congruent panels.
    pub fn new(mesh: &TetMesh, geom: &SurfaceGeometry, level: usize) -> Self {
        let n = 1usize << level;
        let mut ids: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut panels = Vec::with_capacity(geom.len() * n * n);
        for (t, tri) in mesh.boundary.iter().enumerate() {
            let g = tri.vertices;
            let mut key = |a: usize, b: usize| -> ([f64; 3], Vec3, usize) {
                let w = [n - a - b, a, b];
                let bary = w.map(|wi| wi as f64 / n as f64);
                let mut k: Vec<(usize, usize)> =
                    (0..3).filter(|&r| w[r] > 0).map(|r| (g[r], w[r])).collect();
                k.sort_unstable();
                let next = ids.len();
                let id = *ids.entry(k).or_insert(next);
                (bary, geom.point(t, &bary), id)
            };
            for i in 0..n {
                for j in 0..n - i {
                    let tris: &[[(usize, usize); 3]] = if i + j + 1 < n {
                        &[
                            [(i, j), (i + 1, j), (i, j + 1)],
                            [(i + 1, j), (i + 1, j + 1), (i, j + 1)],
                        ]
                    } else {
                        &[[(i, j), (i + 1, j), (i, j + 1)]]
                    };
                    for corners in tris {
                        let c = corners.map(|(a, b)| key(a, b));
                        panels.push(Panel::new(
                            t,
                            [c[0].1, c[1].1, c[2].1],
                            [c[0].0, c[1].0, c[2].0],
                            [c[0].2, c[1].2, c[2].2],
                            geom.normal[t],
                        ));
                    }
                }
            }
        }
        PanelSet { panels, level }
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }
}

/// Distance between two closed segments.
fn segment_distance(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-30 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    ((p0 + d1 * s) - (q0 + d2 * t)).norm()
}

/// Distance between two non-intersecting triangles.
pub fn panel_distance(p: &Panel, q: &Panel) -> f64 {
    use crate::mesh::point_triangle_distance;
    let mut d = f64::INFINITY;
    for c in &p.corners {
        d = d.min(point_triangle_distance(c, &q.corners));
    }
    for c in &q.corners {
        d = d.min(point_triangle_distance(c, &p.corners));
    }
    for i in 0..3 {
        for j in 0..3 {
            d = d.min(segment_distance(
                &p.corners[i],
                &p.corners[(i + 1) % 3],
                &q.corners[j],
                &q.corners[(j + 1) % 3],
            ));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::kuhn_cube;

    #[test]
    fn refined_panels_tile_the_surface() {
        let mesh = kuhn_cube(1);
        let geom = SurfaceGeometry::new(&mesh);
        for level in 0..3 {
            let ps = PanelSet::new(&mesh, &geom, level);
            assert_eq!(ps.len(), 12 * 4usize.pow(level as u32));
            let area: f64 = ps.panels.iter().map(|p| p.area).sum();
            assert!((area - 6.0).abs() < 1e-13);
            for p in &ps.panels {
                let cr = (p.corners[1] - p.corners[0]).cross(&(p.corners[2] - p.corners[0]));
                assert!(cr.dot(&p.normal) > 0.0);
                for (k, b) in p.bary.iter().enumerate() {
                    assert!((geom.point(p.tri, b) - p.corners[k]).norm() < 1e-15);
                }
            }
            // Closed refined surface: Euler characteristic 2.
            let mut keys: Vec<usize> = ps.panels.iter().flat_map(|p| p.keys).collect();
            keys.sort_unstable();
            keys.dedup();
            let v = keys.len() as i64;
            let f = ps.len() as i64;
            assert_eq!(v - 3 * f / 2 + f, 2);
        }
    }

    #[test]
    fn segment_and_panel_distances() {
        let o = Vec3::zeros();
        let d = segment_distance(
            &o,
            &Vec3::new(1.0, 0.0, 0.0),
            &Vec3::new(0.5, 1.0, 1.0),
            &Vec3::new(0.5, -1.0, 1.0),
        );
        assert!((d - 1.0).abs() < 1e-15);
        let mesh = kuhn_cube(2);
        let geom = SurfaceGeometry::new(&mesh);
        let ps = PanelSet::new(&mesh, &geom, 0);
        // Brute-force check against dense sampling for a few pairs.
        for (a, b) in [(0, 5), (1, 17), (3, 40)] {
            let (p, q) = (&ps.panels[a], &ps.panels[b]);
            let mut brute = f64::INFINITY;
            let n = 40;
            for i in 0..=n {
                for j in 0..=n - i {
                    let mu = [
                        1.0 - (i + j) as f64 / n as f64,
                        i as f64 / n as f64,
                        j as f64 / n as f64,
                    ];
                    let x = p.map(&mu).1;
                    brute = brute.min(crate::mesh::point_triangle_distance(&x, &q.corners));
                }
            }
            let d = panel_distance(p, q);
            assert!(d <= brute + 1e-12 && d > brute - 0.05, "{d} {brute}");
        }
    }
}
