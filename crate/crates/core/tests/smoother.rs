mod common;

use cgks::coloring::color_mesh;
use cgks::gas::{Conserved, Gas, Primitive};
use common::{euler_jacobian, flat, Case};

#[test]
fn jacobian_matches_finite_differences() {
    let gas = Gas::default();
    let w = gas.to_conserved(&Primitive {
        rho: 1.2,
        u: 0.3,
        v: -0.4,
        p: 0.9,
    });
    let n = [0.6, 0.8];
    let a = euler_jacobian(&gas, &w, n);
    for c in 0..4 {
        let mut d = Conserved::ZERO;
        d[c] = 1e-6;
        let fd = (gas.euler_flux(&(w + d), n) - gas.euler_flux(&(w - d), n)) * (0.5e6);
        for r in 0..4 {
            assert!((a[(r, c)] - fd[r]).abs() < 1e-7, "{r} {c}");
        }
    }
}

#[test]
fn sweeps_converge_to_dense_solution() {
    // Gauss-Seidel over colors contracts more slowly at larger CFL
    for (cfl, sweeps) in [(2.0, 20), (10.0, 40)] {
        for (nx, ny) in [(2, 1), (4, 4)] {
            let case = Case::with_cfl(nx, ny, 0.1, 1.0, cfl);
            let colors = color_mesh(&case.mesh, 0);
            let exact = case.dense_solve();
            let dw = case.lin().solve(&colors, sweeps).unwrap();
            let err = (flat(&dw) - &exact).amax() / exact.amax();
            assert!(err < 1e-8, "{nx}x{ny} cfl {cfl}: {err:e}");
        }
    }
}

#[test]
fn more_sweeps_reduce_linear_residual() {
    let case = Case::new(4, 4, 0.1, 1.0);
    let colors = color_mesh(&case.mesh, 0);
    let r = |n| case.system(&case.lin().solve(&colors, n).unwrap()).norm();
    assert!(r(6) * 10.0 <= r(1));
}

#[test]
fn explicit_limit() {
    let case = Case::new(4, 4, 0.3, 0.0);
    let colors = color_mesh(&case.mesh, 0);
    let dw = case.lin().solve(&colors, 1).unwrap();
    for (i, d) in dw.iter().enumerate() {
        let expect = (-case.dte[i] / case.mesh.cells[i].volume) * case.res[i];
        assert!((*d - expect).max_abs() < 1e-14 * expect.max_abs().max(1.0));
    }
}

#[test]
fn zero_residual_gives_zero_update() {
    let case = Case::new(3, 3, 0.0, 1.0);
    let colors = color_mesh(&case.mesh, 0);
    assert!(case
        .lin()
        .solve(&colors, 6)
        .unwrap()
        .iter()
        .all(|d| *d == Conserved::ZERO));
}

#[test]
fn isolated_cell_is_a_diagonal_solve() {
    let case = Case::new(1, 1, 0.2, 1.0);
    let colors = color_mesh(&case.mesh, 0);
    let dw = case.lin().solve(&colors, 3).unwrap();
    let d = case.lin().diagonal()[0];
    assert!((dw[0] - (-1.0 / d) * case.res[0]).max_abs() < 1e-15);
}

#[test]
fn within_color_order_is_irrelevant() {
    let case = Case::new(4, 4, 0.1, 0.7);
    let colors = color_mesh(&case.mesh, 0);
    let mut permuted = colors.clone();
    for g in permuted.groups.iter_mut() {
        g.reverse();
    }
    let a = case.lin().solve(&colors, 6).unwrap();
    let b = case.lin().solve(&permuted, 6).unwrap();
    assert_eq!(a, b);
}

#[test]
fn worker_count_is_irrelevant() {
    let case = Case::new(6, 5, 0.1, 0.8);
    let colors = color_mesh(&case.mesh, 0);
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| case.lin().solve(&colors, 6).unwrap())
    };
    let one = run(1);
    for n in [2, 3, 8] {
        assert_eq!(one, run(n));
    }
}
