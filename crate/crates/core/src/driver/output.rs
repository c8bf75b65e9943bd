//! Legacy ASCII VTK solution files and CSV convergence histories.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gas::Gas;
use crate::mesh::Mesh;
use crate::residual::Field;

/// One line of the convergence history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub iter: usize,
    pub wall_seconds: f64,
    /// Density residual normalized by the first iteration's value.
    pub residual_l2: f64,
    pub cd: f64,
    pub cl: f64,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const HISTORY_HEADER: &str = "iter,wall_seconds,residual_l2,cd,cl";

pub fn history_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{:e},{},{}", r.iter, r.wall_seconds, r.residual_l2, r.cd, r.cl);
    }
    s
}

pub fn write_history(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    write_file(path, &history_csv(records))
}

/// Per-cell integer annotations written next to the flow variables.
#[derive(Clone, Debug, Default)]
pub struct CellTags {
    pub color: Vec<u32>,
    /// Coarse cell on the first agglomerated level, `-1` without one.
    pub mg_parent: Vec<i64>,
}

/// Legacy VTK unstructured grid with polygon cells and cell data
/// `rho, u, v, p, Mach, DF, color, mg_parent`.
pub fn solution_vtk(mesh: &Mesh, gas: &Gas, field: &Field, tags: &CellTags) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\ncgks solution\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let size: usize = mesh.cells.iter().map(|c| c.nodes.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.cells.len(), size);
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.nodes.len());
        for n in &c.nodes {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cells.len());
    for _ in &mesh.cells {
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.cells.len());
    let prims: Vec<_> = field.w.iter().map(|w| gas.to_primitive(w)).collect();
    let mut scalar = |name: &str, ty: &str, values: &mut dyn Iterator<Item = String>| {
        let _ = writeln!(s, "SCALARS {name} {ty} 1\nLOOKUP_TABLE default");
        for v in values {
            s.push_str(&v);
            s.push('\n');
        }
    };
    scalar("rho", "double", &mut prims.iter().map(|q| q.rho.to_string()));
    scalar("u", "double", &mut prims.iter().map(|q| q.u.to_string()));
    scalar("v", "double", &mut prims.iter().map(|q| q.v.to_string()));
    scalar("p", "double", &mut prims.iter().map(|q| q.p.to_string()));
    scalar("Mach", "double", &mut field.w.iter().map(|w| gas.mach(w).to_string()));
    scalar("DF", "double", &mut field.alpha.iter().map(|a| a.to_string()));
    let n = mesh.cells.len();
    let color = |i: usize| tags.color.get(i).map_or(0, |&c| c as i64);
    scalar("color", "int", &mut (0..n).map(|i| color(i).to_string()));
    let parent = |i: usize| tags.mg_parent.get(i).copied().unwrap_or(-1);
    scalar("mg_parent", "int", &mut (0..n).map(|i| parent(i).to_string()));
    s
}

pub fn write_solution(mesh: &Mesh, gas: &Gas, field: &Field, tags: &CellTags, path: &Path) -> Result<()> {
    write_file(path, &solution_vtk(mesh, gas, field, tags))
}

/// Read the `CELL_DATA` scalars of a legacy VTK file written by [`write_solution`].
pub fn read_vtk_cell_data(path: &Path) -> Result<HashMap<String, Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |m: &str| Error::Config(format!("{}: {m}", path.display()));
    let mut lines = text.lines();
    let n = lines
        .by_ref()
        .find_map(|l| l.strip_prefix("CELL_DATA "))
        .ok_or_else(|| bad("no CELL_DATA section"))?
        .trim()
        .parse::<usize>()
        .map_err(|_| bad("bad CELL_DATA count"))?;
    let mut out = HashMap::new();
    while let Some(l) = lines.next() {
        let Some(rest) = l.strip_prefix("SCALARS ") else {
            continue;
        };
        let name = rest.split_whitespace().next().ok_or_else(|| bad("unnamed scalar"))?;
        lines.next();
        let vals = lines
            .by_ref()
            .take(n)
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>>>()?;
        out.insert(name.to_string(), vals);
    }
    Ok(out)
}
