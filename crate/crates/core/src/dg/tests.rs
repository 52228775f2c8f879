use super::*;
use crate::bem::{mat_vec, BemMatrices};
use crate::material::RegionMaterial;
use crate::mesh::{kuhn_cube, reference_tet, two_tets, Tet};
use crate::spaces::build_spaces;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<c64> {
    (0..n)
        .map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn two_regions() -> (TetMesh, MaterialConfig) {
    let base = two_tets();
    let tets = vec![
        Tet {
            vertices: base.tets[0].vertices,
            region: 1,
        },
        Tet {
            vertices: base.tets[1].vertices,
            region: 2,
        },
    ];
    let mesh = TetMesh::new(base.vertices.clone(), tets).unwrap();
    let mut mat = MaterialConfig::uniform(2.0, 1.5, 1.0, 1.0, 3.0);
    mat.regions[0] = RegionMaterial {
        region: 1,
        sigma: 0.5,
        mu: 2.0,
    };
    mat.regions.push(RegionMaterial {
        region: 2,
        sigma: 4.0,
        mu: 0.7,
    });
    (mesh, mat)
}

fn form(a: &Mat<c64>, x: &[c64]) -> c64 {
    let mut s = cvec::ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += x[i].conj() * a[(i, j)] * x[j];
        }
    }
    s
}

#[test]
fn jump_and_average_definitions() {
    let c =
        |x: f64, y: f64, z: f64| CVec3::new(c64::new(x, 0.0), c64::new(y, 0.0), c64::new(z, 0.0));
    let z = Vec3::z();
    assert_eq!(
        jump_boundary(&c(1.0, 0.0, 0.0), &z, &cvec::czero()),
        c(0.0, -1.0, 0.0)
    );
    assert_eq!(
        jump_boundary(&cvec::czero(), &z, &c(0.3, 0.2, 0.0)),
        c(-0.3, -0.2, 0.0)
    );
    let v = c(0.4, -1.0, 2.0);
    assert_eq!(jump_interior(&v, &z, &v, &-z), cvec::czero());
    assert_eq!(
        average_interior(&c(1.0, 2.0, 0.0), &c(3.0, 0.0, 0.0)),
        c(2.0, 1.0, 0.0)
    );
}

/// Constant real field on one tet: only the mass term survives.
#[test]
fn single_tet_constant_field() {
    let mesh = reference_tet();
    let sp = build_spaces(&mesh, 1).unwrap();
    let mat = MaterialConfig::uniform(1.0, 1.0, 1.0, 1.0, 0.0);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &QuadConfig::for_order(1)).unwrap();
    let cst = Vec3::new(0.3, -1.2, 0.5);
    let u = sp.project_x(&mesh, &|_, _| cvec::real(&cst), 4).unwrap();
    let mut x = u.clone();
    x.resize(dg.dim(), cvec::ZERO);
    let a = form(&dg.to_dense(), &x);
    let expect = cst.norm_squared() / 6.0;
    assert!(a.re.abs() < 1e-14 && (a.im - expect).abs() < 1e-14, "{a}");
}

#[test]
fn penalty_enters_linearly() {
    let (mesh, mat) = two_regions();
    let sp = build_spaces(&mesh, 1).unwrap();
    let q = QuadConfig::for_order(1);
    let a = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let b = DgBlocks::assemble(&mesh, &sp, &mat.with_alpha(2.0 * mat.alpha), &q).unwrap();
    assert_eq!(a.mass, b.mass);
    assert_eq!(a.curl, b.curl);
    assert_eq!(a.consistency, b.consistency);
    assert_eq!(a.penalty, b.penalty);
    let diff = b.to_dense() - a.to_dense();
    let p = a.penalty.to_dense();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            assert!((diff[(i, j)] - c64::new(mat.alpha * p[(i, j)], 0.0)).norm() < 1e-12);
        }
    }
    assert!(
        a.mass.asymmetry() < 1e-14 && a.curl.asymmetry() < 1e-14 && a.penalty.asymmetry() < 1e-14
    );
}

/// Norm parts measured by quadrature of the fields themselves.
fn direct_parts(mesh: &TetMesh, sp: &SpaceSet, mat: &MaterialConfig, x: &[c64]) -> [f64; 3] {
    let n_x = sp.n_x();
    let (u, phi) = x.split_at(n_x);
    let w = mat.omega;
    let fw = mesh.face_weights(mat).unwrap();
    let sigma = |k: usize| mat.sigma(mesh.tets[k].region).unwrap();
    let mu = |k: usize| mat.mu(mesh.tets[k].region).unwrap();
    let vol = gauss_tet(6).unwrap();
    let tri = gauss_tri(6).unwrap();
    let (mut volume, mut curl, mut jump) = (0.0, 0.0, 0.0);
    for k in 0..mesh.n_tets() {
        let p = mesh.tet_points(k);
        for (b, wq) in vol.iter() {
            let (v, c) = sp.eval_u(u, k, &tet_point(&p, b));
            let jw = wq * 6.0 * mesh.tet_volume[k];
            volume += jw * w * mu(k) * cvec::norm2(&v);
            curl += jw / sigma(k) * cvec::norm2(&c);
        }
    }
    for (f, face) in mesh.interior.iter().enumerate() {
        let p = mesh.face_points(f);
        for (b, wq) in tri.iter() {
            let x = tri_point(&p, b);
            let (v0, _) = sp.eval_u(u, face.tets[0], &x);
            let (v1, _) = sp.eval_u(u, face.tets[1], &x);
            let j = jump_interior(&v0, &face.normals[0], &v1, &face.normals[1]);
            jump += wq * 2.0 * face.area / (fw.s_interior[f] * fw.h_interior[f]) * cvec::norm2(&j);
        }
    }
    for (t, bt) in mesh.boundary.iter().enumerate() {
        for (b, wq) in tri.iter() {
            let x = sp.geom.point(t, b);
            let (v, _) = sp.eval_u(u, bt.owner, &x);
            let (_, cp) = sp.eval_psi(phi, t, b);
            let j = jump_boundary(&v, &bt.normal, &cp);
            jump += wq * 2.0 * bt.area / (fw.s_boundary[t] * fw.h_boundary[t]) * cvec::norm2(&j);
        }
    }
    [volume, curl, jump]
}

#[test]
fn energy_parts_match_direct_quadrature() {
    let (mesh, mat) = two_regions();
    let sp = build_spaces(&mesh, 2).unwrap();
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &QuadConfig::for_order(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_vec(&mut rng, dg.dim());
    let a = dg.energy_parts(&x);
    let b = direct_parts(&mesh, &sp, &mat, &x);
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() < 1e-12 * q, "{p} {q}");
    }
}

/// Real part of `(1 - i)` times the symmetric part of the form equals the
/// sum of the energy terms.
#[test]
fn coercivity_identity() {
    let mesh = kuhn_cube(1);
    let sp = build_spaces(&mesh, 1).unwrap();
    let mat = MaterialConfig::uniform(3.0, 0.8, 2.0, 1.3, 10.0);
    let q = QuadConfig::for_order(1);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let bem = BemMatrices::assemble(&mesh, &sp, &q).unwrap();
    let mut a = dg.to_dense();
    let wm = c64::new(0.0, mat.omega * mat.mu0);
    for i in 0..sp.n_psi() {
        for j in 0..sp.n_psi() {
            a[(dg.n_x + i, dg.n_x + j)] += wm * bem.w[(i, j)];
        }
    }
    let sym = (&a + a.transpose()) * faer::Scale(c64::new(0.5, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let x = random_vec(&mut rng, dg.dim());
        let lhs = (c64::new(1.0, -1.0) * form(&sym, &x)).re;
        let [v, c, j] = direct_parts(&mesh, &sp, &mat, &x);
        let phi = &x[dg.n_x..];
        let wphi: c64 = phi
            .iter()
            .zip(mat_vec(&bem.w, phi))
            .map(|(p, q)| p.conj() * q)
            .sum();
        let rhs = v + c + mat.alpha * j + mat.omega * mat.mu0 * wphi.re;
        assert!((lhs - rhs).abs() < 1e-10 * rhs, "{lhs} {rhs}");
    }
}

/// With `j_e = curl w` for a discrete `w`, the load reproduces the curl and
/// consistency columns of the form applied to `(w, 0)`.
#[test]
fn load_matches_form_columns() {
    let (mesh, mat) = two_regions();
    let mat = mat.with_alpha(0.0);
    let sp = build_spaces(&mesh, 1).unwrap();
    let q = QuadConfig::for_order(1);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_vec(&mut rng, sp.n_x());
    let je = |k: usize, x: &Vec3| sp.eval_u(&w, k, x).1;
    let l = assemble_lh(&mesh, &sp, &mat, &q, &je, None).unwrap();
    let mut x = w.clone();
    x.resize(dg.dim(), cvec::ZERO);
    let cw = dg.curl.mul_vec(&w);
    let dw = dg.consistency.mul_vec(&x);
    let scale = l.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..dg.dim() {
        let e = dw[i] + if i < dg.n_x { cw[i] } else { cvec::ZERO };
        assert!((l[i] - e).norm() < 1e-12 * scale, "{i}: {} {}", l[i], e);
    }
}

/// A constant source on one tet: the volume term is balanced by the
/// boundary term, and the Psi rows vanish on the closed surface.
#[test]
fn constant_source_on_single_tet() {
    let mesh = reference_tet();
    let sp = build_spaces(&mesh, 1).unwrap();
    let mat = MaterialConfig::uniform(1.0, 1.0, 2.0, 1.0, 10.0);
    let q = QuadConfig::for_order(1);
    let j = CVec3::new(c64::new(1.0, 0.5), c64::new(-2.0, 0.0), c64::new(0.0, 3.0));
    let l = assemble_lh(&mesh, &sp, &mat, &q, &|_, _| j, None).unwrap();
    assert!(l.iter().all(|v| v.norm() < 1e-14), "{l:?}");
    // Boundary part alone for v = (0, 0, x): sum_T <j/sigma, v x n> = |K| j_y / sigma.
    let mut b = c64::new(0.0, 0.0);
    let tri = gauss_tri(2).unwrap();
    for (t, bt) in mesh.boundary.iter().enumerate() {
        for (bq, w) in tri.iter() {
            let x = sp.geom.point(t, bq);
            let v = Vec3::new(0.0, 0.0, x.x);
            b += cvec::dot_real(&j, &v.cross(&bt.normal)) * (w * 2.0 * bt.area / 2.0);
        }
    }
    assert!((b - j.y / (6.0 * 2.0)).norm() < 1e-15, "{b}");
}

/// For a continuous polynomial field `u` with `psi = 0`, the Nitsche data
/// terms with `g_D = u x n` reproduce the form without mass and exterior terms.
#[test]
fn dirichlet_terms_reproduce_form_on_smooth_fields() {
    let mesh = kuhn_cube(1);
    let mat = MaterialConfig::uniform(1.0, 1.0, 2.5, 1.0, 7.0);
    mat.validate().unwrap();
    let sp = build_spaces(&mesh, 2).unwrap();
    let q = QuadConfig::for_order(2);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let c = |a: f64, b: f64| c64::new(a, b);
    let u = |x: &Vec3| {
        CVec3::new(
            c(x.y * x.z, 0.5),
            c(x.x * x.x, -x.z),
            c(x.z, 2.0 * x.x * x.y),
        )
    };
    let curl_u = |x: &Vec3| {
        CVec3::new(
            c(0.0, 2.0 * x.x + 1.0),
            c(x.y, -2.0 * x.y),
            c(2.0 * x.x - x.z, 0.0),
        )
    };
    let coeffs = sp.project_x(&mesh, &|_, x| u(x), 6).unwrap();
    let gd = |t: usize, x: &Vec3| cvec::cross_real(&u(x), &mesh.boundary[t].normal);
    let l = assemble_lh(&mesh, &sp, &mat, &q, &|_, x| curl_u(x), Some(&gd)).unwrap();
    let mut x = coeffs;
    x.resize(dg.dim(), cvec::ZERO);
    let mut a = dg.apply(&x);
    let m = dg.mass.mul_vec(&x[..dg.n_x]);
    for i in 0..dg.n_x {
        a[i] -= c64::new(0.0, dg.omega) * m[i];
    }
    let scale = l.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..dg.dim() {
        assert!(
            (a[i] - l[i]).norm() < 1e-11 * scale,
            "{i}: {} {}",
            a[i],
            l[i]
        );
    }
}

#[test]
fn norms_are_homogeneous_and_ordered() {
    let mesh = kuhn_cube(1);
    let sp = build_spaces(&mesh, 1).unwrap();
    let mat = MaterialConfig::default();
    let q = QuadConfig::for_order(1);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let bem = BemMatrices::assemble(&mesh, &sp, &q).unwrap();
    let zero_x = vec![cvec::ZERO; dg.dim()];
    let zero_l = vec![cvec::ZERO; sp.n_lambda()];
    assert_eq!(dg_norm(&dg, &bem, &sp, 1.0, &zero_x, &zero_l).unwrap(), 0.0);
    assert_eq!(
        dg_norm_star(&dg, &bem, &sp, 1.0, &zero_x, &zero_l).unwrap(),
        0.0
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_vec(&mut rng, dg.dim());
    let eta = random_vec(&mut rng, sp.n_lambda());
    let n = dg_norm(&dg, &bem, &sp, 1.0, &x, &eta).unwrap();
    let s = c64::new(-1.5, 2.0);
    let xs: Vec<c64> = x.iter().map(|v| v * s).collect();
    let es: Vec<c64> = eta.iter().map(|v| v * s).collect();
    let ns = dg_norm(&dg, &bem, &sp, 1.0, &xs, &es).unwrap();
    assert!((ns - s.norm() * n).abs() < 1e-12 * ns);
    assert!(dg_norm_star(&dg, &bem, &sp, 1.0, &x, &eta).unwrap() > n);

    // Constant field: no curl, no flux.
    let cst = sp
        .project_x(&mesh, &|_, _| cvec::real(&Vec3::new(1.0, 2.0, 3.0)), 2)
        .unwrap();
    let mut xc = cst;
    xc.resize(dg.dim(), cvec::ZERO);
    let p = norm_parts(&dg, &bem, &sp, 1.0, &xc, &zero_l).unwrap();
    assert!(p.curl < 1e-24 && p.flux < 1e-24);
    assert_eq!(p.norm(), p.norm_star());

    // Constant eta: ||eta||^2 = eta^2 <1, V 1>.
    let one: Vec<c64> = sp
        .lambda_one()
        .iter()
        .map(|&v| c64::new(2.0 * v, 0.0))
        .collect();
    let p = norm_parts(&dg, &bem, &sp, 1.0, &zero_x, &one).unwrap();
    let v1 = crate::bem::hermitian_form(
        &bem.v,
        &sp.lambda_one()
            .iter()
            .map(|&v| c64::new(v, 0.0))
            .collect::<Vec<_>>(),
    );
    assert!((p.lambda_minus_half - 4.0 * mat.omega * v1.re).abs() < 1e-12 * p.lambda_minus_half);
}

/// On discrete trial functions the quadrature route equals the matrix route.
#[test]
fn exact_trial_matches_matrix_on_discrete_fields() {
    let (mesh, mat) = two_regions();
    let sp = build_spaces(&mesh, 2).unwrap();
    let q = QuadConfig::for_order(2);
    let dg = DgBlocks::assemble(&mesh, &sp, &mat, &q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_vec(&mut rng, dg.dim());
    let (u, psi) = x.split_at(dg.n_x);
    let uf = |k: usize, p: &Vec3| sp.eval_u(u, k, p).0;
    let cf = |k: usize, p: &Vec3| sp.eval_u(u, k, p).1;
    let pf = |t: usize, p: &Vec3| {
        let g = &sp.geom.grad_bary[t];
        let d = p - sp.geom.points[t][0];
        let b = [1.0 + g[0].dot(&d), g[1].dot(&d), g[2].dot(&d)];
        sp.eval_psi(psi, t, &b).1
    };
    let trial = ExactTrial {
        u: &uf,
        curl_u: &cf,
        curl_psi: &pf,
    };
    let a = apply_exact(&mesh, &sp, &mat, &q, &trial).unwrap();
    let b = dg.apply(&x);
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (p, r) in a.iter().zip(&b) {
        assert!((p - r).norm() < 1e-12 * scale, "{p} {r}");
    }
}
