//! Plain-text mesh format.
//!
//! ```text
//! mesh2d <n_nodes> <n_faces> <n_cells>
//! x y                      (n_nodes lines)
//! n0 n1 left right         (n_faces lines; right = -<patch id> on boundaries)
//! patch <id> <name> <kind> (one line per patch)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{FaceDef, FaceSide, Mesh, PatchDef};
use crate::error::MeshError;

pub fn load_mesh(path: &Path) -> Result<Mesh, MeshError> {
    let text = fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_mesh(&text)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    fs::write(path, write_mesh(mesh)).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mesh2d {} {} {}",
        mesh.nodes.len(),
        mesh.faces.len(),
        mesh.cells.len()
    );
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?}", p[0], p[1]);
    }
    for f in &mesh.faces {
        let right = match f.right {
            FaceSide::Cell(c) => c.to_string(),
            FaceSide::Boundary(p) => format!("-{}", mesh.patches[p].id),
        };
        let _ = writeln!(s, "{} {} {} {}", f.nodes[0], f.nodes[1], f.left, right);
    }
    for p in &mesh.patches {
        let _ = writeln!(s, "patch {} {} {}", p.id, p.name, p.kind);
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty mesh file"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("mesh2d") {
        return Err(perr(hline, "expected `mesh2d` header"));
    }
    let n_nodes: usize = num(tok.next(), hline, "node count")?;
    let n_faces: usize = num(tok.next(), hline, "face count")?;
    let n_cells: usize = num(tok.next(), hline, "cell count")?;

    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(hline, "unexpected end of file in node block"))?;
        let mut t = l.split_whitespace();
        let x: f64 = num(t.next(), ln, "x coordinate")?;
        let y: f64 = num(t.next(), ln, "y coordinate")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(perr(ln, "non-finite node coordinate"));
        }
        nodes.push([x, y]);
    }

    // boundary sides are stored as raw patch ids until the patch table is read
    let mut raw_faces = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(hline, "unexpected end of file in face block"))?;
        let mut t = l.split_whitespace();
        let a: usize = num(t.next(), ln, "node index")?;
        let b: usize = num(t.next(), ln, "node index")?;
        let left: usize = num(t.next(), ln, "left cell")?;
        let right_tok = t.next().ok_or_else(|| perr(ln, "missing right side"))?;
        let right = if let Some(id) = right_tok.strip_prefix('-') {
            Err(num::<usize>(Some(id), ln, "patch id")?)
        } else {
            Ok(num::<usize>(Some(right_tok), ln, "right cell")?)
        };
        raw_faces.push((ln, [a, b], left, right));
    }

    let mut patches: Vec<PatchDef> = Vec::new();
    for (ln, l) in lines {
        let mut t = l.split_whitespace();
        if t.next() != Some("patch") {
            return Err(perr(ln, "expected `patch <id> <name> <kind>`"));
        }
        let id: usize = num(t.next(), ln, "patch id")?;
        let name = t.next().ok_or_else(|| perr(ln, "missing patch name"))?;
        let kind = t
            .next()
            .ok_or_else(|| perr(ln, "missing patch kind"))?
            .parse()
            .map_err(|e: String| perr(ln, e))?;
        if patches.iter().any(|p| p.id == id) {
            return Err(perr(ln, format!("duplicate patch id {id}")));
        }
        patches.push(PatchDef {
            id,
            name: name.to_string(),
            kind,
        });
    }

    let mut faces = Vec::with_capacity(n_faces);
    for (ln, nodes_ab, left, right) in raw_faces {
        let right = match right {
            Ok(c) => FaceSide::Cell(c),
            Err(id) => FaceSide::Boundary(
                patches
                    .iter()
                    .position(|p| p.id == id)
                    .ok_or_else(|| perr(ln, format!("face references undefined patch {id}")))?,
            ),
        };
        faces.push(FaceDef {
            nodes: nodes_ab,
            left,
            right,
        });
    }
    Mesh::from_topology(nodes, faces, n_cells, patches)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_SQUARE: &str = "mesh2d 4 4 1
0 0
1 0
1 1
0 1
0 1 0 -0
1 2 0 -0
2 3 0 -0
3 0 0 -0
patch 0 outer farfield
";

    #[test]
    fn parses_unit_square() {
        let m = parse_mesh(UNIT_SQUARE).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.cells[0].volume, 1.0);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 4);
    }

    #[test]
    fn two_triangles_share_diagonal() {
        let text = "mesh2d 4 5 2
0 0
1 0
1 1
0 1
0 1 0 -1
1 2 0 -1
2 0 0 1
2 3 1 -1
3 0 1 -1
patch 1 wall wall_slip
";
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.n_interior_faces(), 1);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 4);
        assert_eq!(m.patches[0].faces.len(), 4);
    }

    #[test]
    fn missing_cell_is_topology_error() {
        let text = UNIT_SQUARE.replace("2 3 0 -0", "2 3 0 5");
        assert!(matches!(parse_mesh(&text), Err(MeshError::Topology(_))));
    }

    #[test]
    fn bad_number_reports_line() {
        let text = UNIT_SQUARE.replace("1 1\n", "1 oops\n");
        match parse_mesh(&text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undefined_patch_is_rejected() {
        let text = UNIT_SQUARE.replace("patch 0", "patch 7");
        assert!(matches!(parse_mesh(&text), Err(MeshError::Parse { .. })));
    }
}
