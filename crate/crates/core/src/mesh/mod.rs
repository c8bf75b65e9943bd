//! Cell-face-node unstructured 2D mesh with precomputed geometry.
//!
//! Conventions:
//! - every face stores a `left` cell and a `right` side that is either another
//!   cell or a boundary patch; the unit normal points from left to right, so
//!   boundary faces always have the interior cell on the left;
//! - faces are segments carrying two Gauss-Legendre points whose weights sum to
//!   the face length;
//! - polygonal (finest-level) cells keep their counter-clockwise node loop,
//!   agglomerated cells have an empty loop.

mod generate;
mod io;
pub mod polygon;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use generate::{generate_cylinder_mesh, generate_quad_grid, generate_random_triangulation, radial_growth_ratio};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};

use crate::error::MeshError;

/// Boundary condition family attached to a patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    WallNoSlip,
    WallSlip,
    Farfield,
}

impl BoundaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::WallNoSlip => "wall_noslip",
            BoundaryKind::WallSlip => "wall_slip",
            BoundaryKind::Farfield => "farfield",
        }
    }

    pub fn is_wall(&self) -> bool {
        matches!(self, BoundaryKind::WallNoSlip | BoundaryKind::WallSlip)
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall_noslip" => Ok(BoundaryKind::WallNoSlip),
            "wall_slip" => Ok(BoundaryKind::WallSlip),
            "farfield" => Ok(BoundaryKind::Farfield),
            other => Err(format!("unknown boundary kind `{other}`")),
        }
    }
}

/// What lies on the right of a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceSide {
    Cell(usize),
    /// Index into [`Mesh::patches`].
    Boundary(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussPoint {
    pub position: [f64; 2],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub nodes: [usize; 2],
    pub left: usize,
    pub right: FaceSide,
    pub normal: [f64; 2],
    pub area: f64,
    pub centroid: [f64; 2],
    pub gauss_points: [GaussPoint; 2],
}

impl Face {
    pub fn right_cell(&self) -> Option<usize> {
        match self.right {
            FaceSide::Cell(c) => Some(c),
            FaceSide::Boundary(_) => None,
        }
    }

    pub fn patch(&self) -> Option<usize> {
        match self.right {
            FaceSide::Cell(_) => None,
            FaceSide::Boundary(p) => Some(p),
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.right, FaceSide::Boundary(_))
    }

    /// The cell across the face from `cell`, if any.
    pub fn other(&self, cell: usize) -> Option<usize> {
        match self.right {
            FaceSide::Cell(r) if r == cell => Some(self.left),
            FaceSide::Cell(r) => Some(r),
            FaceSide::Boundary(_) => None,
        }
    }

    /// Normal pointing out of `cell`.
    pub fn outward_normal(&self, cell: usize) -> [f64; 2] {
        if cell == self.left {
            self.normal
        } else {
            [-self.normal[0], -self.normal[1]]
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub faces: Vec<usize>,
    /// Face-adjacent cells, ascending and without duplicates.
    pub neighbors: Vec<usize>,
    pub volume: f64,
    pub centroid: [f64; 2],
    /// Counter-clockwise node loop; empty for agglomerated cells.
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPatch {
    pub id: usize,
    pub name: String,
    pub kind: BoundaryKind,
    pub faces: Vec<usize>,
}

/// Topological face record used to build a [`Mesh`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceDef {
    pub nodes: [usize; 2],
    pub left: usize,
    pub right: FaceSide,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchDef {
    pub id: usize,
    pub name: String,
    pub kind: BoundaryKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub patches: Vec<BoundaryPatch>,
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

impl Mesh {
    /// Validate topology and compute all geometric quantities.
    pub fn from_topology(
        nodes: Vec<[f64; 2]>,
        faces: Vec<FaceDef>,
        n_cells: usize,
        patches: Vec<PatchDef>,
    ) -> Result<Mesh, MeshError> {
        let n_nodes = nodes.len();
        let mut patch_faces = vec![Vec::new(); patches.len()];
        let mut cell_faces = vec![Vec::new(); n_cells];
        let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len());
        for (f, def) in faces.iter().enumerate() {
            let [a, b] = def.nodes;
            if a >= n_nodes || b >= n_nodes {
                return Err(MeshError::Topology(format!("face {f} references a missing node")));
            }
            if a == b {
                return Err(MeshError::Degenerate(format!("face {f} has coincident end nodes")));
            }
            if def.left >= n_cells {
                return Err(MeshError::Topology(format!(
                    "face {f} references missing cell {}",
                    def.left
                )));
            }
            match def.right {
                FaceSide::Cell(r) => {
                    if r >= n_cells {
                        return Err(MeshError::Topology(format!("face {f} references missing cell {r}")));
                    }
                    if r == def.left {
                        return Err(MeshError::Topology(format!(
                            "face {f} has identical left and right cells"
                        )));
                    }
                    cell_faces[r].push(f);
                }
                FaceSide::Boundary(p) => {
                    if p >= patches.len() {
                        return Err(MeshError::Topology(format!(
                            "face {f} references a missing boundary patch"
                        )));
                    }
                    patch_faces[p].push(f);
                }
            }
            cell_faces[def.left].push(f);
            let key = (a.min(b), a.max(b));
            if let Some(g) = edges.insert(key, f) {
                return Err(MeshError::Topology(format!(
                    "non-manifold edge ({a}, {b}) shared by faces {g} and {f}"
                )));
            }
        }

        let mut mesh_faces: Vec<Face> = faces
            .iter()
            .map(|d| Face {
                nodes: d.nodes,
                left: d.left,
                right: d.right,
                normal: [0.0; 2],
                area: 0.0,
                centroid: [0.0; 2],
                gauss_points: [GaussPoint {
                    position: [0.0; 2],
                    weight: 0.0,
                }; 2],
            })
            .collect();

        let mut cells = Vec::with_capacity(n_cells);
        for (c, fl) in cell_faces.into_iter().enumerate() {
            let (loop_nodes, ordered_faces) = node_loop(c, &fl, &mesh_faces)?;
            let mut neighbors: Vec<usize> = fl.iter().filter_map(|&f| mesh_faces[f].other(c)).collect();
            neighbors.sort_unstable();
            neighbors.dedup();
            cells.push(Cell {
                faces: ordered_faces,
                neighbors,
                volume: 0.0,
                centroid: [0.0; 2],
                nodes: loop_nodes,
            });
        }

        let patches = patches
            .into_iter()
            .zip(patch_faces)
            .map(|(p, faces)| BoundaryPatch {
                id: p.id,
                name: p.name,
                kind: p.kind,
                faces,
            })
            .collect();

        // orientation fix-up happens inside compute_geometry
        for f in &mut mesh_faces {
            f.normal = [0.0; 2];
        }
        let mut mesh = Mesh {
            nodes,
            faces: mesh_faces,
            cells,
            patches,
        };
        mesh.compute_geometry()?;
        Ok(mesh)
    }

    /// Populate volumes, centroids, normals and Gauss points from node positions.
    /// Orients each cell loop counter-clockwise and each face so that its
    /// normal points from the left cell to the right side.
    pub fn compute_geometry(&mut self) -> Result<(), MeshError> {
        for (c, cell) in self.cells.iter_mut().enumerate() {
            if cell.nodes.len() < 3 {
                return Err(MeshError::Topology(format!("cell {c} has no closed node loop")));
            }
            let pts: Vec<[f64; 2]> = cell.nodes.iter().map(|&n| self.nodes[n]).collect();
            let mut area = polygon::signed_area(&pts);
            if area < 0.0 {
                cell.nodes.reverse();
                cell.faces.reverse();
                area = -area;
            }
            if !(area > 0.0) {
                return Err(MeshError::Degenerate(format!("cell {c} has zero area")));
            }
            let pts: Vec<[f64; 2]> = cell.nodes.iter().map(|&n| self.nodes[n]).collect();
            cell.volume = area;
            cell.centroid = polygon::centroid(&pts);
        }

        for (f, face) in self.faces.iter_mut().enumerate() {
            let [a, b] = face.nodes;
            let left_loop = &self.cells[face.left].nodes;
            if !loop_has_directed_edge(left_loop, a, b) {
                if loop_has_directed_edge(left_loop, b, a) {
                    face.nodes = [b, a];
                } else {
                    return Err(MeshError::Topology(format!("face {f} is not an edge of its left cell")));
                }
            }
            let [a, b] = face.nodes;
            if let FaceSide::Cell(r) = face.right {
                if !loop_has_directed_edge(&self.cells[r].nodes, b, a) {
                    return Err(MeshError::Topology(format!(
                        "face {f}: left and right cells overlap or are inconsistently oriented"
                    )));
                }
            }
            let p0 = self.nodes[a];
            let p1 = self.nodes[b];
            let d = [p1[0] - p0[0], p1[1] - p0[1]];
            let len = d[0].hypot(d[1]);
            if !(len > 0.0) {
                return Err(MeshError::Degenerate(format!("face {f} has zero length")));
            }
            face.area = len;
            face.normal = [d[1] / len, -d[0] / len];
            let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
            face.centroid = mid;
            let off = [0.5 * d[0] * INV_SQRT3, 0.5 * d[1] * INV_SQRT3];
            face.gauss_points = [
                GaussPoint {
                    position: [mid[0] - off[0], mid[1] - off[1]],
                    weight: 0.5 * len,
                },
                GaussPoint {
                    position: [mid[0] + off[0], mid[1] + off[1]],
                    weight: 0.5 * len,
                },
            ];
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| !f.is_boundary())
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    pub fn max_neighbors(&self) -> usize {
        self.cells.iter().map(|c| c.neighbors.len()).max().unwrap_or(0)
    }

    pub fn patch_by_name(&self, name: &str) -> Option<usize> {
        self.patches.iter().position(|p| p.name == name)
    }

    pub fn boundary_kind(&self, face: &Face) -> Option<BoundaryKind> {
        face.patch().map(|p| self.patches[p].kind)
    }

    /// Change the boundary condition family of a patch, by name.
    pub fn set_patch_kind(&mut self, name: &str, kind: BoundaryKind) -> bool {
        match self.patch_by_name(name) {
            Some(p) => {
                self.patches[p].kind = kind;
                true
            }
            None => false,
        }
    }

    pub fn cell_polygon(&self, cell: usize) -> Vec<[f64; 2]> {
        self.cells[cell].nodes.iter().map(|&n| self.nodes[n]).collect()
    }

    /// Sum over the cell's faces of `outward normal * area`.
    pub fn closure_vector(&self, cell: usize) -> [f64; 2] {
        let mut s = [0.0; 2];
        for &f in &self.cells[cell].faces {
            let face = &self.faces[f];
            let n = face.outward_normal(cell);
            s[0] += n[0] * face.area;
            s[1] += n[1] * face.area;
        }
        s
    }

    pub fn perimeter(&self, cell: usize) -> f64 {
        self.cells[cell].faces.iter().map(|&f| self.faces[f].area).sum()
    }

    /// Topological face records, in face order.
    pub fn face_defs(&self) -> Vec<FaceDef> {
        self.faces
            .iter()
            .map(|f| FaceDef {
                nodes: f.nodes,
                left: f.left,
                right: f.right,
            })
            .collect()
    }

    pub fn patch_defs(&self) -> Vec<PatchDef> {
        self.patches
            .iter()
            .map(|p| PatchDef {
                id: p.id,
                name: p.name.clone(),
                kind: p.kind,
            })
            .collect()
    }

    /// Cell whose polygon contains `p` (boundary inclusive), by linear search.
    pub fn locate(&self, p: [f64; 2]) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| !self.cells[c].nodes.is_empty())
            .filter(|&c| polygon::contains(&self.cell_polygon(c), p))
            .collect()
    }
}

fn loop_has_directed_edge(nodes: &[usize], a: usize, b: usize) -> bool {
    let n = nodes.len();
    (0..n).any(|i| nodes[i] == a && nodes[(i + 1) % n] == b)
}

/// Chain a cell's faces into a single closed node loop.
fn node_loop(cell: usize, faces: &[usize], all: &[Face]) -> Result<(Vec<usize>, Vec<usize>), MeshError> {
    if faces.len() < 3 {
        return Err(MeshError::Topology(format!(
            "cell {cell} has {} faces; at least 3 are required",
            faces.len()
        )));
    }
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for &f in faces {
        for n in all[f].nodes {
            incident.entry(n).or_default().push(f);
        }
    }
    if let Some((n, _)) = incident.iter().find(|(_, fs)| fs.len() != 2) {
        return Err(MeshError::Topology(format!("cell {cell} is not closed at node {n}")));
    }
    let first = faces[0];
    let mut ordered = vec![first];
    let mut loop_nodes = vec![all[first].nodes[0]];
    let mut current = all[first].nodes[1];
    let mut prev_face = first;
    while current != loop_nodes[0] {
        loop_nodes.push(current);
        let fs = &incident[&current];
        let next = if fs[0] == prev_face { fs[1] } else { fs[0] };
        ordered.push(next);
        let [a, b] = all[next].nodes;
        current = if a == current { b } else { a };
        prev_face = next;
        if ordered.len() > faces.len() {
            break;
        }
    }
    if ordered.len() != faces.len() {
        return Err(MeshError::Topology(format!(
            "cell {cell} faces do not form a single closed loop"
        )));
    }
    Ok((loop_nodes, ordered))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let faces = (0..4)
            .map(|i| FaceDef {
                nodes: [i, (i + 1) % 4],
                left: 0,
                right: FaceSide::Boundary(0),
            })
            .collect();
        let patches = vec![PatchDef {
            id: 0,
            name: "box".into(),
            kind: BoundaryKind::Farfield,
        }];
        Mesh::from_topology(nodes, faces, 1, patches).unwrap()
    }

    #[test]
    fn unit_square_geometry() {
        let m = unit_square();
        assert_eq!(m.cells.len(), 1);
        assert!((m.cells[0].volume - 1.0).abs() < 1e-15);
        assert_eq!(m.cells[0].centroid, [0.5, 0.5]);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 4);
        let s = m.closure_vector(0);
        assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15);
    }

    #[test]
    fn right_triangle_geometry() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        // clockwise input order; the loop is reoriented
        let faces = vec![
            FaceDef {
                nodes: [0, 2],
                left: 0,
                right: FaceSide::Boundary(0),
            },
            FaceDef {
                nodes: [2, 1],
                left: 0,
                right: FaceSide::Boundary(0),
            },
            FaceDef {
                nodes: [1, 0],
                left: 0,
                right: FaceSide::Boundary(0),
            },
        ];
        let patches = vec![PatchDef {
            id: 3,
            name: "b".into(),
            kind: BoundaryKind::WallSlip,
        }];
        let m = Mesh::from_topology(nodes, faces, 1, patches).unwrap();
        assert!((m.cells[0].volume - 0.5).abs() < 1e-15);
        assert!((m.cells[0].centroid[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.cells[0].centroid[1] - 1.0 / 3.0).abs() < 1e-15);
        for f in &m.faces {
            let d = [
                f.centroid[0] - m.cells[0].centroid[0],
                f.centroid[1] - m.cells[0].centroid[1],
            ];
            assert!(
                d[0] * f.normal[0] + d[1] * f.normal[1] > 0.0,
                "normal must point outward"
            );
        }
    }

    #[test]
    fn vertical_face_gauss_points() {
        // two unit-width cells either side of the segment (0,0)-(0,2)
        let nodes = vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0], [-1.0, 2.0]];
        let b = FaceSide::Boundary(0);
        let faces = vec![
            FaceDef {
                nodes: [1, 4],
                left: 0,
                right: FaceSide::Cell(1),
            },
            FaceDef {
                nodes: [0, 1],
                left: 0,
                right: b,
            },
            FaceDef {
                nodes: [4, 5],
                left: 0,
                right: b,
            },
            FaceDef {
                nodes: [5, 0],
                left: 0,
                right: b,
            },
            FaceDef {
                nodes: [1, 2],
                left: 1,
                right: b,
            },
            FaceDef {
                nodes: [2, 3],
                left: 1,
                right: b,
            },
            FaceDef {
                nodes: [3, 4],
                left: 1,
                right: b,
            },
        ];
        let patches = vec![PatchDef {
            id: 0,
            name: "b".into(),
            kind: BoundaryKind::Farfield,
        }];
        let m = Mesh::from_topology(nodes, faces, 2, patches).unwrap();
        let f = &m.faces[0];
        assert_eq!(f.normal, [1.0, 0.0]);
        assert_eq!(f.area, 2.0);
        let g = f.gauss_points;
        assert!((g[0].position[1] - (1.0 - 1.0 / 3f64.sqrt())).abs() < 1e-15);
        assert!((g[1].position[1] - (1.0 + 1.0 / 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(g[0].position[0], 0.0);
        assert_eq!((g[0].weight, g[1].weight), (1.0, 1.0));
        assert_eq!(m.cells[0].neighbors, vec![1]);
        assert_eq!(m.cells[1].neighbors, vec![0]);
    }

    #[test]
    fn open_cell_is_rejected() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let b = FaceSide::Boundary(0);
        let faces = vec![
            FaceDef {
                nodes: [0, 1],
                left: 0,
                right: b,
            },
            FaceDef {
                nodes: [1, 2],
                left: 0,
                right: b,
            },
            FaceDef {
                nodes: [2, 3],
                left: 0,
                right: b,
            },
        ];
        let patches = vec![PatchDef {
            id: 0,
            name: "b".into(),
            kind: BoundaryKind::Farfield,
        }];
        assert!(matches!(
            Mesh::from_topology(nodes, faces, 1, patches),
            Err(MeshError::Topology(_))
        ));
    }
}
