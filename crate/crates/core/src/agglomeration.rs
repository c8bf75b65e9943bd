//! Coarse mesh construction by pairwise face removal.
//!
//! Interior faces are screened by a cheap hash so that roughly one face per
//! hash bucket becomes a merge candidate; a candidate merges its two cells if
//! neither was merged earlier in the pass and the merged cell passes the
//! skewness test. Surviving fine faces become coarse faces unchanged.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryPatch, Cell, Face, FaceSide, Mesh};

pub const DEFAULT_SKEWNESS_LIMIT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct MergeDecision {
    pub face: usize,
    pub left: usize,
    pub right: usize,
    /// `None` when the quality measure is undefined (degenerate geometry).
    pub quality: Option<f64>,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct MeshLevel {
    pub mesh: Mesh,
    /// Coarse cell of each cell of the next finer level; `None` on the finest level.
    pub parent_of: Option<Vec<usize>>,
    /// Finer-level cells of each cell of this level; empty on the finest level.
    pub children_of: Vec<Vec<usize>>,
    /// Decisions taken for every candidate face while building this level.
    pub merges: Vec<MergeDecision>,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    /// Finest level first.
    pub levels: Vec<MeshLevel>,
}

impl Hierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &Mesh {
        &self.levels[0].mesh
    }

    pub fn single(mesh: Mesh) -> Hierarchy {
        Hierarchy {
            levels: vec![MeshLevel {
                mesh,
                parent_of: None,
                children_of: Vec::new(),
                merges: Vec::new(),
            }],
        }
    }
}

/// `[23 (l + r) + l r] mod n_interior_faces`.
pub fn face_hash(left: usize, right: usize, n_interior_faces: usize) -> u64 {
    let (l, r) = (left as u64, right as u64);
    (23 * (l + r) + l * r) % n_interior_faces as u64
}

/// Interior faces, in ascending id order, whose hash value is seen for the first time.
pub fn select_deletion_candidates(mesh: &Mesh) -> Vec<usize> {
    let nf = mesh.n_interior_faces();
    let mut seen = HashSet::with_capacity(nf);
    mesh.interior_faces()
        .filter(|(_, f)| seen.insert(face_hash(f.left, f.right_cell().unwrap(), nf)))
        .map(|(i, _)| i)
        .collect()
}

/// `(V_l C_l + V_r C_r) / (V_l + V_r)`.
pub fn virtual_center(vl: f64, cl: [f64; 2], vr: f64, cr: [f64; 2]) -> [f64; 2] {
    let v = vl + vr;
    [(vl * cl[0] + vr * cr[0]) / v, (vl * cl[1] + vr * cr[1]) / v]
}

/// Sine of the angle between a face and the vector from `center` to the face
/// centroid, `d.n / |d|`. `None` when the centroid coincides with the center.
pub fn skewness(face_centroid: [f64; 2], normal: [f64; 2], center: [f64; 2]) -> Option<f64> {
    let d = [face_centroid[0] - center[0], face_centroid[1] - center[1]];
    let len = d[0].hypot(d[1]);
    if len <= 1e-14 * (face_centroid[0].abs() + face_centroid[1].abs()).max(1e-300) {
        return None;
    }
    Some((d[0] * normal[0] + d[1] * normal[1]) / len)
}

/// Quality of the cell obtained by removing `face`: the smallest skewness of
/// any face on the merged boundary, measured from the virtual center with
/// outward normals.
pub fn merge_quality(mesh: &Mesh, face: usize) -> Option<f64> {
    let f = &mesh.faces[face];
    let (l, r) = (f.left, f.right_cell()?);
    let (cl, cr) = (&mesh.cells[l], &mesh.cells[r]);
    let center = virtual_center(cl.volume, cl.centroid, cr.volume, cr.centroid);
    let mut q = f64::INFINITY;
    for (cell, other) in [(l, r), (r, l)] {
        for &g in &mesh.cells[cell].faces {
            let face_g = &mesh.faces[g];
            if face_g.other(cell) == Some(other) {
                continue;
            }
            q = q.min(skewness(face_g.centroid, face_g.outward_normal(cell), center)?);
        }
    }
    Some(q)
}

/// One pairwise agglomeration pass. `level` is used for error reporting only.
pub fn coarsen_level(mesh: &Mesh, skewness_limit: f64, level: usize) -> Result<MeshLevel> {
    let n = mesh.cells.len();
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut merges = Vec::new();
    for face in select_deletion_candidates(mesh) {
        let f = &mesh.faces[face];
        let (l, r) = (f.left, f.right_cell().unwrap());
        if partner[l].is_some() || partner[r].is_some() {
            continue;
        }
        let quality = merge_quality(mesh, face);
        let accepted = quality.is_some_and(|q| q >= skewness_limit);
        if accepted {
            partner[l] = Some(r);
            partner[r] = Some(l);
        }
        merges.push(MergeDecision {
            face,
            left: l,
            right: r,
            quality,
            accepted,
        });
    }
    if !merges.iter().any(|m| m.accepted) {
        return Err(Error::CoarseningStalled { level });
    }

    let mut parent_of = vec![usize::MAX; n];
    let mut children_of: Vec<Vec<usize>> = Vec::new();
    for c in 0..n {
        if parent_of[c] != usize::MAX {
            continue;
        }
        let id = children_of.len();
        parent_of[c] = id;
        match partner[c] {
            Some(p) => {
                parent_of[p] = id;
                children_of.push(vec![c, p]);
            }
            None => children_of.push(vec![c]),
        }
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut cell_faces: Vec<Vec<usize>> = vec![Vec::new(); children_of.len()];
    let mut patch_faces: Vec<Vec<usize>> = vec![Vec::new(); mesh.patches.len()];
    for f in &mesh.faces {
        let left = parent_of[f.left];
        let right = match f.right {
            FaceSide::Cell(r) if parent_of[r] == left => continue,
            FaceSide::Cell(r) => FaceSide::Cell(parent_of[r]),
            FaceSide::Boundary(p) => FaceSide::Boundary(p),
        };
        let id = faces.len();
        cell_faces[left].push(id);
        match right {
            FaceSide::Cell(r) => cell_faces[r].push(id),
            FaceSide::Boundary(p) => patch_faces[p].push(id),
        }
        faces.push(Face {
            left,
            right,
            ..f.clone()
        });
    }

    let cells = children_of
        .iter()
        .zip(cell_faces)
        .map(|(kids, cf)| {
            let mut volume = 0.0;
            let mut moment = [0.0; 2];
            for &k in kids {
                let c = &mesh.cells[k];
                volume += c.volume;
                moment[0] += c.volume * c.centroid[0];
                moment[1] += c.volume * c.centroid[1];
            }
            let me = parent_of[kids[0]];
            let mut neighbors: Vec<usize> = cf.iter().filter_map(|&f| faces[f].other(me)).collect();
            neighbors.sort_unstable();
            neighbors.dedup();
            Cell {
                faces: cf,
                neighbors,
                volume,
                centroid: [moment[0] / volume, moment[1] / volume],
                nodes: Vec::new(),
            }
        })
        .collect();

    let patches = mesh
        .patches
        .iter()
        .zip(patch_faces)
        .map(|(p, faces)| BoundaryPatch { faces, ..p.clone() })
        .collect();

    Ok(MeshLevel {
        mesh: Mesh {
            nodes: mesh.nodes.clone(),
            faces,
            cells,
            patches,
        },
        parent_of: Some(parent_of),
        children_of,
        merges,
    })
}

/// Finest level plus up to `n_levels - 1` coarse levels; stops early with a
/// warning if coarsening stalls.
pub fn build_hierarchy(mesh: Mesh, n_levels: usize, skewness_limit: f64) -> Hierarchy {
    let mut h = Hierarchy::single(mesh);
    for level in 1..n_levels.max(1) {
        match coarsen_level(&h.levels[level - 1].mesh, skewness_limit, level) {
            Ok(l) => h.levels.push(l),
            Err(e) => {
                log::warn!("hierarchy truncated to {level} level(s): {e}");
                break;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_quad_grid, BoundaryKind};

    #[test]
    fn hash_values() {
        assert_eq!(face_hash(10, 12, 100), 26);
        assert_eq!(face_hash(0, 0, 7), 0);
        assert_eq!(face_hash(1, 2, 5), 1);
    }

    #[test]
    fn skewness_values() {
        assert_eq!(skewness([1.0, 0.0], [1.0, 0.0], [0.0, 0.0]), Some(1.0));
        let s = skewness([1.0, 1.0], [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(skewness([1.0, 0.0], [1.0, 0.0], [1.0, 0.0]), None);
        assert_eq!(virtual_center(1.0, [0.0, 0.0], 1.0, [2.0, 0.0]), [1.0, 0.0]);
    }

    #[test]
    fn two_squares_merge() {
        let m = generate_quad_grid(2, 1, 2.0, 1.0, BoundaryKind::Farfield).unwrap();
        let l = coarsen_level(&m, DEFAULT_SKEWNESS_LIMIT, 1).unwrap();
        assert_eq!(l.mesh.cells.len(), 1);
        assert_eq!(l.mesh.cells[0].volume, 2.0);
        assert_eq!(l.mesh.cells[0].centroid, [1.0, 0.5]);
        assert_eq!(l.mesh.faces.len(), 6);
        assert!(l.mesh.faces.iter().all(|f| f.is_boundary()));
    }

    #[test]
    fn strict_limit_stalls() {
        let m = generate_quad_grid(2, 1, 2.0, 1.0, BoundaryKind::Farfield).unwrap();
        assert!(matches!(
            coarsen_level(&m, 0.999, 1),
            Err(Error::CoarseningStalled { level: 1 })
        ));
    }

    #[test]
    fn sixteen_cell_grid() {
        let m = generate_quad_grid(4, 4, 4.0, 4.0, BoundaryKind::Farfield).unwrap();
        let l = coarsen_level(&m, DEFAULT_SKEWNESS_LIMIT, 1).unwrap();
        let n = l.mesh.cells.len();
        assert!((8..=12).contains(&n), "{n} coarse cells");
        assert_eq!(l.mesh.total_volume(), 16.0);
    }

    #[test]
    fn collision_selects_first_face_only() {
        let m = generate_quad_grid(4, 4, 4.0, 4.0, BoundaryKind::Farfield).unwrap();
        let nf = m.n_interior_faces();
        let cands = select_deletion_candidates(&m);
        let hashes: HashSet<u64> = m
            .interior_faces()
            .map(|(_, f)| face_hash(f.left, f.right_cell().unwrap(), nf))
            .collect();
        assert_eq!(cands.len(), hashes.len());
    }

    #[test]
    fn two_cell_hierarchy_truncates() {
        let m = generate_quad_grid(2, 1, 2.0, 1.0, BoundaryKind::Farfield).unwrap();
        let h = build_hierarchy(m, 3, DEFAULT_SKEWNESS_LIMIT);
        assert_eq!(h.n_levels(), 2);
    }
}
