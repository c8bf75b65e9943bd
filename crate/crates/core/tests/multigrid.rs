use cgks::agglomeration::{build_hierarchy, DEFAULT_SKEWNESS_LIMIT};
use cgks::driver::{prepare, CaseConfig};
use cgks::gas::Conserved;
use cgks::mesh::{generate_random_triangulation, BoundaryKind};
use cgks::multigrid::{restrict_residual, restrict_state};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn freestream_is_preserved(seed in 0u64..100, mach in 0.1f64..2.5, aoa in -30.0f64..30.0) {
        let mesh = generate_random_triangulation(6, 0.3, seed, BoundaryKind::Farfield).unwrap();
        let cfg = CaseConfig { mach_inf: mach, aoa_deg: aoa, mg_levels: 3, ..CaseConfig::default() };
        let mut solver = prepare(mesh, &cfg);
        let mut field = solver.initial_field();
        let before = field.clone();
        for _ in 0..3 {
            solver.vcycle(&mut field).unwrap();
        }
        for (a, b) in field.w.iter().zip(&before.w) {
            prop_assert!((*a - *b).max_abs() < 1e-12);
        }
        prop_assert!(field.alpha.iter().all(|&a| (a - 1.0).abs() < 1e-12));
    }

    #[test]
    fn restriction_conserves_totals(seed in 0u64..100) {
        let mesh = generate_random_triangulation(6, 0.3, seed, BoundaryKind::Farfield).unwrap();
        let h = build_hierarchy(mesh, 2, DEFAULT_SKEWNESS_LIMIT);
        let (fine, lv) = (&h.levels[0].mesh, &h.levels[1]);
        let w: Vec<Conserved> = (0..fine.n_cells())
            .map(|i| { let t = i as f64; Conserved([1.0 + 0.1 * t.sin(), t.cos(), 0.3, 2.0 + t.sin()]) })
            .collect();
        let wc = restrict_state(fine, &lv.mesh, &lv.children_of, &w);
        let rc = restrict_residual(&lv.children_of, &w);
        for k in 0..4 {
            let f: f64 = fine.cells.iter().zip(&w).map(|(c, w)| c.volume * w[k]).sum();
            let c: f64 = lv.mesh.cells.iter().zip(&wc).map(|(c, w)| c.volume * w[k]).sum();
            prop_assert!((f - c).abs() < 1e-13 * f.abs().max(1.0));
            let rf: f64 = w.iter().map(|w| w[k]).sum();
            let rs: f64 = rc.iter().map(|w| w[k]).sum();
            prop_assert!((rf - rs).abs() < 1e-12 * rf.abs().max(1.0));
        }
    }
}
