use super::*;
use crate::bem::{assemble, assemble_mass, Kernel, PanelSet};
use crate::mesh::{kuhn_cube, reference_tet, two_tets};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<c64> {
    (0..n)
        .map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn system<'a>(
    mesh: &'a TetMesh,
    m: usize,
    mat: &MaterialConfig,
) -> (Discretization<'a>, CoupledSystem) {
    let d = Discretization::new(mesh, m, mat, &QuadConfig::for_order(m)).unwrap();
    let s = d.system().unwrap();
    (d, s)
}

fn max_abs(a: faer::MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

#[test]
fn single_tet_dimension() {
    let mesh = reference_tet();
    let (_, s) = system(&mesh, 1, &MaterialConfig::default());
    assert_eq!(s.dim(), 28);
    assert_eq!(
        (s.matrix.nrows(), s.matrix.ncols(), s.rhs.len()),
        (28, 28, 28)
    );
}

/// Every block is affine in omega; the exterior blocks are linear.
#[test]
fn omega_enters_affinely() {
    let mesh = two_tets();
    let mats: Vec<MaterialConfig> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&w| MaterialConfig::uniform(w, 0.7, 2.0, 1.5, 10.0))
        .collect();
    let s: Vec<CoupledSystem> = mats.iter().map(|m| system(&mesh, 1, m).1).collect();
    let d = &(&s[2].matrix - &s[1].matrix) - &(&s[1].matrix - &s[0].matrix);
    assert!(max_abs(d.as_ref()) < 1e-12 * max_abs(s[2].matrix.as_ref()));
    let (ls, n) = (s[0].lambda_start(), s[0].n_lambda);
    let v1 = s[0].matrix.as_ref().submatrix(ls, ls, n, n).to_owned();
    let v3 = s[2].matrix.as_ref().submatrix(ls, ls, n, n).to_owned();
    assert!(
        max_abs((&v3 - &v1 * faer::Scale(c64::new(3.0, 0.0))).as_ref())
            < 1e-14 * max_abs(v3.as_ref())
    );
}

/// The lambda column block of the Psi rows is minus the transpose of the
/// Psi column block of the Lambda rows, and the latter matches a fresh
/// assembly of `i w mu0 (1/2 M - K)`.
#[test]
fn coupling_blocks_are_transposed() {
    let mesh = kuhn_cube(1);
    let mat = MaterialConfig::uniform(2.0, 0.5, 1.0, 1.0, 10.0);
    let (d, s) = system(&mesh, 1, &mat);
    let (ps, ls) = (s.psi_start(), s.lambda_start());
    let panels = PanelSet::new(&mesh, &d.spaces.geom, 0);
    let k = assemble(
        &panels,
        &d.spaces.lambda,
        &d.spaces.psi,
        Kernel::DoubleLayer,
        &d.quad,
        false,
    )
    .unwrap();
    let m = assemble_mass(
        &panels,
        &d.spaces.lambda,
        &d.spaces.psi,
        d.quad.surface_order,
    )
    .unwrap();
    let iw = c64::new(0.0, mat.omega * mat.mu0);
    for i in 0..s.n_lambda {
        for j in 0..s.n_psi {
            let a = s.matrix[(ls + i, ps + j)];
            assert_eq!(s.matrix[(ps + j, ls + i)], -a);
            assert!((a - iw * (0.5 * m[(i, j)] - k[(i, j)])).norm() < 1e-14);
        }
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let mesh = kuhn_cube(1);
    let (_, s) = system(&mesh, 1, &MaterialConfig::default());
    let sol = s.solve().unwrap();
    assert!(sol
        .u
        .iter()
        .chain(&sol.psi)
        .chain(&sol.lambda)
        .all(|v| *v == cvec::ZERO));
    assert_eq!(sol.residual, 0.0);
}

#[test]
fn solvable_without_penalty() {
    let mesh = two_tets();
    let mat = MaterialConfig::default().with_alpha(0.0);
    let (_, mut s) = system(&mesh, 1, &mat);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    s.rhs = random_vec(&mut rng, s.dim());
    let sol = s.solve().unwrap();
    assert!(sol.residual < 1e-10, "{}", sol.residual);
    assert!(sol.pivot_ratio.is_finite());
}

#[test]
fn solution_satisfies_constraints() {
    let mesh = kuhn_cube(1);
    let (d, mut s) = system(&mesh, 1, &MaterialConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = random_vec(&mut rng, s.multiplier_start());
    s.rhs[..r.len()].copy_from_slice(&r);
    let sol = s.solve().unwrap();
    let ip: c64 = d
        .spaces
        .c_psi
        .iter()
        .zip(&sol.psi)
        .map(|(c, v)| v * c)
        .sum();
    let il: c64 = d
        .spaces
        .c_lambda
        .iter()
        .zip(&sol.lambda)
        .map(|(c, v)| v * c)
        .sum();
    let scale = sol
        .psi
        .iter()
        .chain(&sol.lambda)
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        * d.spaces.surface_area;
    assert!(
        ip.norm() < 1e-10 * scale && il.norm() < 1e-10 * scale,
        "{ip} {il}"
    );
}

/// `Re[(1 - i) x^H S x] > 0` with the symmetric part of the system.
#[test]
fn energy_is_positive_on_random_fields() {
    let mesh = kuhn_cube(1);
    let (_, s) = system(&mesh, 1, &MaterialConfig::default());
    let a = s.unconstrained().to_owned();
    let sym = (&a + a.transpose()) * faer::Scale(c64::new(0.5, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let x = random_vec(&mut rng, a.nrows());
        let xc = Mat::<c64>::from_fn(x.len(), 1, |i, _| x[i]);
        let e = (xc.adjoint() * &sym * &xc)[(0, 0)] * c64::new(1.0, -1.0);
        assert!(e.re > 0.0);
    }
}

#[test]
fn neumann_data_enters_psi_rows() {
    let mesh = kuhn_cube(1);
    let mat = MaterialConfig::uniform(2.0, 0.5, 1.0, 1.0, 10.0);
    let (d, mut s) = system(&mesh, 1, &mat);
    s.apply_gn(&mesh, &d.spaces, &d.quad, &|_, _| c64::new(0.0, 0.0))
        .unwrap();
    assert!(s.rhs.iter().all(|v| *v == cvec::ZERO));
    s.apply_gn(&mesh, &d.spaces, &d.quad, &|_, _| c64::new(1.0, 0.0))
        .unwrap();
    let iw = c64::new(0.0, mat.omega * mat.mu0);
    for i in 0..s.dim() {
        let e = if (s.psi_start()..s.lambda_start()).contains(&i) {
            iw * d.spaces.c_psi[i - s.psi_start()]
        } else {
            cvec::ZERO
        };
        assert!((s.rhs[i] - e).norm() < 1e-14, "{i}");
    }
}

/// Moving known constants to the right-hand side equals subtracting the
/// system applied to them.
#[test]
fn offsets_match_system_action() {
    let mesh = kuhn_cube(1);
    let (d, mut s) = system(&mesh, 1, &MaterialConfig::uniform(1.5, 0.8, 1.0, 1.0, 10.0));
    let (pb, lb) = (c64::new(0.3, -0.1), c64::new(-0.7, 0.2));
    s.set_offsets(&d.bem, &d.spaces, pb, lb);
    let n = s.multiplier_start();
    let mut off = vec![cvec::ZERO; n];
    for i in 0..s.n_psi {
        off[s.psi_start() + i] = pb;
    }
    for (i, o) in d.spaces.lambda_one().iter().enumerate() {
        off[s.lambda_start() + i] = lb * o;
    }
    let a = s.unconstrained();
    let scale = max_abs(a) * (pb.norm() + lb.norm());
    for i in 0..n {
        let mut e = cvec::ZERO;
        for j in 0..n {
            e -= a[(i, j)] * off[j];
        }
        assert!(
            (s.rhs[i] - e).norm() < 1e-12 * scale,
            "{i}: {} {}",
            s.rhs[i],
            e
        );
    }
    // Applying the same offsets again changes nothing.
    let before = s.rhs.clone();
    s.set_offsets(&d.bem, &d.spaces, pb, lb);
    assert_eq!(before, s.rhs);
}

#[test]
fn binary_dump_layout() {
    let mesh = reference_tet();
    let (_, s) = system(&mesh, 1, &MaterialConfig::default());
    let mut buf = Vec::new();
    s.write_binary(&mut buf).unwrap();
    let n = s.dim();
    assert_eq!(buf.len(), 16 + 16 * n * (n + 1));
    assert_eq!(u64::from_le_bytes(buf[..8].try_into().unwrap()), n as u64);
    let at = |k: usize| f64::from_le_bytes(buf[16 + 8 * k..24 + 8 * k].try_into().unwrap());
    // Entry (1, 0) is the second complex number.
    assert_eq!(at(2), s.matrix[(1, 0)].re);
    assert_eq!(at(3), s.matrix[(1, 0)].im);
}
