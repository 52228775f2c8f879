//! Small structured meshes used for tests and the bundled assets.

use std::collections::HashMap;

use super::{Tet, TetMesh, Vec3};

pub fn reference_tet() -> TetMesh {
    let v = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    TetMesh::new(
        v,
        vec![Tet {
            vertices: [0, 1, 2, 3],
            region: 1,
        }],
    )
    .expect("reference tet")
}

/// Two tets glued along the face {(1,0,0), (0,1,0), (0,0,1)}.
pub fn two_tets() -> TetMesh {
    let v = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 1.0, 1.0),
    ];
    let tets = vec![
        Tet {
            vertices: [0, 1, 2, 3],
            region: 1,
        },
        Tet {
            vertices: [1, 2, 3, 4],
            region: 1,
        },
    ];
    TetMesh::new(v, tets).expect("two-tet mesh")
}

/// Unit cube split into `n^3` subcubes, each cut into the six Kuhn tets
/// around its main diagonal. The family is nested under `n -> 2n`.
pub fn kuhn_cube(n: usize) -> TetMesh {
    assert!(n >= 1);
    let idx = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut v = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                v.push(Vec3::new(i as f64, j as f64, k as f64) / n as f64);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n.pow(3));
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in PERMS {
                    let mut c = [i, j, k];
                    let mut verts = [idx(i, j, k), 0, 0, 0];
                    for (s, &axis) in p.iter().enumerate() {
                        c[axis] += 1;
                        verts[s + 1] = idx(c[0], c[1], c[2]);
                    }
                    tets.push(Tet {
                        vertices: verts,
                        region: 1,
                    });
                }
            }
        }
    }
    TetMesh::new(v, tets).expect("Kuhn cube")
}

/// Polyhedral unit ball: the icosahedron refined `level + 1` times with
/// vertices projected to the sphere (80, 320, 1280 triangles for levels
/// 0, 1, 2), filled by coning every surface triangle to the origin.
pub fn icosphere(level: usize) -> TetMesh {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut v: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..=level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * faces.len());
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let center = v.len();
    v.push(Vec3::zeros());
    let tets = faces
        .iter()
        .map(|&[a, b, c]| Tet {
            vertices: [center, a, b, c],
            region: 1,
        })
        .collect();
    TetMesh::new(v, tets).expect("icosphere")
}
