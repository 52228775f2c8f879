use super::*;
use crate::material::RegionMaterial;
use crate::mesh::{icosphere, kuhn_cube, two_tets, Tet};

const POTENTIALS: [Potential; 4] = [
    Potential::Zero,
    Potential::Linear,
    Potential::Cubic,
    Potential::Trig,
];

fn fd_curl(f: impl Fn(&Vec3) -> Vec3, x: &Vec3) -> Vec3 {
    let h = 1e-5;
    let d = |i: usize, j: usize| {
        let mut e = Vec3::zeros();
        e[j] = h;
        (f(&(x + e))[i] - f(&(x - e))[i]) / (2.0 * h)
    };
    Vec3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1))
}

fn sample_points() -> Vec<Vec3> {
    vec![
        Vec3::new(0.3, -0.2, 0.7),
        Vec3::new(1.1, 0.4, -0.5),
        Vec3::new(-0.6, 0.9, 0.2),
    ]
}

fn unit() -> MaterialConfig {
    MaterialConfig::uniform(1.0, 1.0, 1.0, 1.0, 10.0)
}

#[test]
fn field_is_curl_of_potential() {
    for p in POTENTIALS {
        for x in sample_points() {
            assert!((fd_curl(|y| p.a(y), &x) - p.h(&x)).norm() < 1e-8, "{p:?}");
            assert!(
                (fd_curl(|y| p.h(y), &x) - p.curl_h(&x)).norm() < 1e-8,
                "{p:?}"
            );
        }
    }
}

#[test]
fn faraday_and_ampere_hold_pointwise() {
    let mesh = kuhn_cube(1);
    let mat = MaterialConfig::uniform(3.0, 1.2, 2.5, 0.8, 10.0);
    let ex = make_exact(&mesh, &mat, Vec3::new(0.45, 0.52, 0.48), Potential::Trig).unwrap();
    for x in sample_points() {
        let c = c64::new(0.0, -3.0 * 0.8);
        let fd = fd_curl(|y| Potential::Trig.a(y), &x);
        assert!((ex.curl_e(&x) - cvec::scale(&fd, c)).norm() < 1e-8);
        assert!(ex.faraday_residual(&x).norm() < 1e-14);
        let ampere = ex.curl_h(&x) - ex.e(&x) * c64::new(2.5, 0.0) - ex.j_e(0, &x);
        assert!(ampere.norm() < 1e-14);
    }
}

#[test]
fn exterior_potential_is_harmonic() {
    let mesh = kuhn_cube(1);
    let ex = make_exact(
        &mesh,
        &unit(),
        Vec3::new(0.45, 0.52, 0.48),
        Potential::Cubic,
    )
    .unwrap();
    let h = 1e-3;
    for x in [Vec3::new(2.0, 0.1, -0.3), Vec3::new(-1.0, 1.5, 0.5)] {
        let mut lap = -6.0 * ex.p(&x);
        for j in 0..3 {
            let mut e = Vec3::zeros();
            e[j] = h;
            lap += ex.p(&(x + e)) + ex.p(&(x - e));
            let g = (ex.p(&(x + e)) - ex.p(&(x - e))) / (2.0 * h);
            assert!((g - ex.grad_p(&x)[j]).abs() < 1e-7);
        }
        assert!((lap / (h * h)).abs() < 1e-5);
    }
}

#[test]
fn transmission_data_close_the_traces() {
    let mesh = kuhn_cube(1);
    let mat = MaterialConfig::uniform(1.0, 1.0, 1.0, 2.0, 10.0);
    let ex = make_exact(&mesh, &mat, Vec3::new(0.45, 0.52, 0.48), Potential::Cubic).unwrap();
    for (t, b) in mesh.boundary.iter().enumerate() {
        let p = mesh.tri_points(t);
        let x = (p[0] + p[1] + p[2]) / 3.0;
        let gd = ex.g_d(t, &x);
        let want =
            cvec::cross_real(&ex.h(&x), &b.normal) - cvec::real(&ex.grad_p(&x).cross(&b.normal));
        assert!((gd - want).norm() < 1e-14);
        let gn = ex.g_n(t, &x).re;
        assert!(
            (gn - (2.0 * ex.potential.h(&x).dot(&b.normal) - ex.grad_p(&x).dot(&b.normal))).abs()
                < 1e-14
        );
        assert!(ex.curl_psi(t, &x).dot(&b.normal).abs() < 1e-14);
    }
}

#[test]
fn rejects_bad_setups() {
    let mesh = kuhn_cube(1);
    assert!(matches!(
        make_exact(&mesh, &unit(), Vec3::new(1.5, 0.5, 0.5), Potential::Cubic),
        Err(Error::NotInside(_))
    ));
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
    let split = TetMesh::new(base.vertices.clone(), tets).unwrap();
    let mut mat = unit();
    mat.regions.push(RegionMaterial {
        region: 2,
        sigma: 1.0,
        mu: 3.0,
    });
    let inside =
        base.vertices.iter().fold(Vec3::zeros(), |a, v| a + v) / base.vertices.len() as f64;
    assert!(matches!(
        make_exact(&split, &mat, inside, Potential::Cubic),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn flux_of_point_source_is_minus_one() {
    let mesh = icosphere(1);
    let quad = QuadConfig::for_order(1);
    let disc = Discretization::new(&mesh, 1, &unit(), &quad).unwrap();
    let ex = make_exact(&mesh, &unit(), Vec3::new(0.1, -0.05, 0.2), Potential::Zero).unwrap();
    assert!(flux_check(&disc, &ex).unwrap() < 1e-3);
}

#[test]
fn eoc_of_power_law() {
    let h = [1.0, 0.5, 0.25];
    let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
    for r in eoc(&h, &e) {
        assert!((r - 2.0).abs() < 1e-12);
    }
}

#[test]
fn consistency_residual_is_small() {
    let mesh = kuhn_cube(1);
    let disc = Discretization::new(&mesh, 1, &unit(), &QuadConfig::for_order(1)).unwrap();
    let ex = make_exact(
        &mesh,
        &unit(),
        Vec3::new(0.45, 0.52, 0.48),
        Potential::Cubic,
    )
    .unwrap();
    let c = consistency(&disc, &ex).unwrap();
    assert!(c.residual < 1e-6, "{c:?}");
    assert!(c.rhs_norm > 1.0);
}

#[test]
fn constant_field_has_no_volume_error() {
    let mesh = kuhn_cube(1);
    let disc = Discretization::new(&mesh, 1, &unit(), &QuadConfig::for_order(1)).unwrap();
    let ex = make_exact(
        &mesh,
        &unit(),
        Vec3::new(0.45, 0.52, 0.48),
        Potential::Linear,
    )
    .unwrap();
    let sol = interpolant(&disc, &ex).unwrap();
    let e = measure_error(&disc, &ex, &sol).unwrap();
    assert!(
        e.volume < 1e-24 && e.curl < 1e-24 && e.flux < 1e-24,
        "{e:?}"
    );
    assert!(e.psi_half > 0.0 && e.lambda_minus_half > 0.0);
}

#[test]
fn discrete_solution_beats_nothing() {
    let mesh = kuhn_cube(1);
    let cfg = StudyConfig {
        m: 1,
        materials: unit(),
        quad: QuadConfig::for_order(1),
        potential: Potential::Cubic,
        x0: None,
    };
    let x0 = default_source(&mesh);
    let r = run_mesh(&mesh, &cfg, x0).unwrap();
    let disc = Discretization::new(&mesh, 1, &unit(), &cfg.quad).unwrap();
    let ex = make_exact(&mesh, &unit(), x0, Potential::Cubic).unwrap();
    let zero = CoupledSolution {
        u: vec![cvec::ZERO; r.solution.u.len()],
        psi: vec![cvec::ZERO; r.solution.psi.len()],
        lambda: vec![cvec::ZERO; r.solution.lambda.len()],
        ..r.solution.clone()
    };
    let e0 = measure_error(&disc, &ex, &zero).unwrap();
    assert!(r.row.total < 0.5 * e0.norm());
    assert!(r.row.solve_residual < 1e-10);
    assert!(r.row.probe_max < 0.05);
}
