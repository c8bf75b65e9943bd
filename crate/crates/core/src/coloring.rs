//! Greedy multi-coloring of the cell adjacency graph.
//!
//! Cells are visited in breadth-first waves from a start cell; within a wave
//! cells are processed in ascending id order and each takes the smallest
//! positive color not already used by a colored neighbor.

use crate::mesh::Mesh;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorMap {
    /// Color of each cell, starting at 1.
    pub color_of: Vec<u32>,
    /// `groups[c - 1]` lists the cells of color `c` in ascending order.
    pub groups: Vec<Vec<usize>>,
    pub n_colors: usize,
    /// Number of connected components encountered.
    pub components: usize,
}

impl ColorMap {
    /// Build a color map from explicit per-cell colors (all must be >= 1).
    pub fn from_colors(color_of: Vec<u32>) -> ColorMap {
        assert!(color_of.iter().all(|&c| c >= 1), "colors start at 1");
        let n_colors = color_of.iter().copied().max().unwrap_or(0) as usize;
        let mut groups = vec![Vec::new(); n_colors];
        for (cell, &c) in color_of.iter().enumerate() {
            groups[c as usize - 1].push(cell);
        }
        ColorMap {
            color_of,
            groups,
            n_colors,
            components: 1,
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }
}

pub fn color_mesh(mesh: &Mesh, start_cell: usize) -> ColorMap {
    let n = mesh.cells.len();
    let mut color_of = vec![0u32; n];
    let mut queued = vec![false; n];
    let mut components = 0;
    let mut used: Vec<bool> = Vec::new();
    let mut next_seed = if n == 0 { None } else { Some(start_cell.min(n - 1)) };

    while let Some(seed) = next_seed {
        components += 1;
        if components > 1 {
            log::warn!("mesh is disconnected; coloring restarts at cell {seed}");
        }
        let mut wave = vec![seed];
        queued[seed] = true;
        while !wave.is_empty() {
            let mut next = Vec::new();
            for &c in &wave {
                used.clear();
                for &nb in &mesh.cells[c].neighbors {
                    let k = color_of[nb] as usize;
                    if k > 0 {
                        if used.len() <= k {
                            used.resize(k + 1, false);
                        }
                        used[k] = true;
                    }
                }
                let mut k = 1;
                while k < used.len() && used[k] {
                    k += 1;
                }
                color_of[c] = k as u32;
                for &nb in &mesh.cells[c].neighbors {
                    if !queued[nb] {
                        queued[nb] = true;
                        next.push(nb);
                    }
                }
            }
            next.sort_unstable();
            wave = next;
        }
        next_seed = queued.iter().position(|q| !q);
    }

    let mut map = ColorMap::from_colors(color_of);
    map.components = components;
    map
}

/// Interior faces whose two cells share a color.
pub fn validate_coloring(mesh: &Mesh, colors: &ColorMap) -> Vec<usize> {
    mesh.interior_faces()
        .filter(|(_, f)| {
            let r = f.right_cell().expect("interior face");
            colors.color_of[f.left] == colors.color_of[r]
        })
        .map(|(i, _)| i)
        .collect()
}
