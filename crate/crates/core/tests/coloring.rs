use cgks::coloring::{color_mesh, validate_coloring};
use cgks::mesh::{generate_cylinder_mesh, generate_quad_grid, generate_random_triangulation, BoundaryKind, Mesh};
use proptest::prelude::*;

/// Brute-force scan of every interior face.
fn conflicts(mesh: &Mesh, color_of: &[u32]) -> usize {
    mesh.interior_faces()
        .filter(|(_, f)| color_of[f.left] == color_of[f.right_cell().unwrap()])
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn triangulation_colorings_are_valid(n in 2usize..12, seed in 0u64..500, start_frac in 0.0f64..1.0) {
        let m = generate_random_triangulation(n, 0.3, seed, BoundaryKind::Farfield).unwrap();
        let start = ((m.n_cells() as f64 * start_frac) as usize).min(m.n_cells() - 1);
        let c = color_mesh(&m, start);
        prop_assert!(validate_coloring(&m, &c).is_empty());
        prop_assert_eq!(conflicts(&m, &c.color_of), 0);
        prop_assert!(c.n_colors <= m.max_neighbors() + 1);
        let total: usize = c.group_sizes().iter().sum();
        prop_assert_eq!(total, m.n_cells());
        for (k, g) in c.groups.iter().enumerate() {
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(g.iter().all(|&i| c.color_of[i] as usize == k + 1));
        }
    }

    #[test]
    fn quad_grids_need_two_colors(nx in 2usize..20, ny in 2usize..20, start in 0usize..4) {
        let m = generate_quad_grid(nx, ny, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        let c = color_mesh(&m, start);
        prop_assert_eq!(c.n_colors, 2);
        prop_assert!(validate_coloring(&m, &c).is_empty());
    }
}

#[test]
fn cylinder_o_grid_is_bipartite() {
    let m = generate_cylinder_mesh(0.5, 10.0, 16, 40, 0.02).unwrap();
    let c = color_mesh(&m, 0);
    assert_eq!(c.n_colors, 2);
    assert!(validate_coloring(&m, &c).is_empty());
}
