//! Built-in mesh generators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryKind, FaceDef, FaceSide, Mesh, PatchDef};
use crate::error::MeshError;

/// Growth ratio `q` such that `h1 * (1 + q + ... + q^(n-1)) = width`.
pub fn radial_growth_ratio(width: f64, n: usize, h1: f64) -> Result<f64, MeshError> {
    if !(h1 > 0.0 && h1 < width) {
        return Err(MeshError::Generator(format!(
            "first layer height {h1} must lie in (0, {width})"
        )));
    }
    let span = |q: f64| (0..n).fold((0.0, 1.0), |(s, p), _| (s + p, p * q)).0 * h1;
    let (mut lo, mut hi) = (0.0, 3.0);
    if span(hi) < width {
        return Err(MeshError::Generator(format!(
            "growth ratio above 3 needed to span {width} with {n} layers from {h1}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if span(mid) < width {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    if !(q > 0.0) {
        return Err(MeshError::Generator("non-positive growth ratio".into()));
    }
    Ok(q)
}

/// Quadrilateral O-grid around a circle centred at the origin.
///
/// Patch 0 (`wall`, no-slip) is the inner circle, patch 1 (`farfield`) the
/// outer one. Cell `(k, j)` has index `k * n_circumferential + j`, with `k`
/// counted outward from the wall. Nodes below the x axis mirror those above
/// it exactly, so the mesh is symmetric to the last bit.
pub fn generate_cylinder_mesh(
    radius: f64,
    outer_radius: f64,
    n_radial: usize,
    n_circumferential: usize,
    first_layer_height: f64,
) -> Result<Mesh, MeshError> {
    if n_radial < 4 || n_circumferential < 4 {
        return Err(MeshError::Generator(
            "radial and circumferential counts must be at least 4".into(),
        ));
    }
    if !(radius > 0.0 && outer_radius > radius) {
        return Err(MeshError::Generator(format!(
            "need 0 < radius < outer radius, got {radius} and {outer_radius}"
        )));
    }
    let nc = n_circumferential;
    let q = radial_growth_ratio(outer_radius - radius, n_radial, first_layer_height)?;
    let mut radii = Vec::with_capacity(n_radial + 1);
    let mut r = radius;
    let mut h = first_layer_height;
    radii.push(r);
    for _ in 0..n_radial {
        r += h;
        h *= q;
        radii.push(r);
    }
    radii[n_radial] = outer_radius;

    let unit: Vec<[f64; 2]> = (0..nc)
        .map(|j| {
            if 2 * j == nc {
                [-1.0, 0.0]
            } else if j == 0 {
                [1.0, 0.0]
            } else if 2 * j > nc {
                let t = 2.0 * PI * (nc - j) as f64 / nc as f64;
                [t.cos(), -t.sin()]
            } else {
                let t = 2.0 * PI * j as f64 / nc as f64;
                [t.cos(), t.sin()]
            }
        })
        .collect();
    let mut nodes = Vec::with_capacity((n_radial + 1) * nc);
    for &rk in &radii {
        for u in &unit {
            nodes.push([rk * u[0], rk * u[1]]);
        }
    }
    let node = |k: usize, j: usize| k * nc + j % nc;
    let cell = |k: usize, j: usize| k * nc + j % nc;

    let mut faces = Vec::with_capacity((2 * n_radial + 1) * nc);
    for k in 0..=n_radial {
        for j in 0..nc {
            let nodes = [node(k, j), node(k, j + 1)];
            let (left, right) = if k == 0 {
                (cell(0, j), FaceSide::Boundary(0))
            } else if k == n_radial {
                (cell(k - 1, j), FaceSide::Boundary(1))
            } else {
                (cell(k - 1, j), FaceSide::Cell(cell(k, j)))
            };
            faces.push(FaceDef { nodes, left, right });
        }
    }
    for k in 0..n_radial {
        for j in 0..nc {
            faces.push(FaceDef {
                nodes: [node(k, j), node(k + 1, j)],
                left: cell(k, j + nc - 1),
                right: FaceSide::Cell(cell(k, j)),
            });
        }
    }
    let patches = vec![
        PatchDef {
            id: 0,
            name: "wall".into(),
            kind: BoundaryKind::WallNoSlip,
        },
        PatchDef {
            id: 1,
            name: "farfield".into(),
            kind: BoundaryKind::Farfield,
        },
    ];
    Mesh::from_topology(nodes, faces, n_radial * nc, patches)
}

fn box_patches(kind: BoundaryKind) -> Vec<PatchDef> {
    ["bottom", "right", "top", "left"]
        .iter()
        .enumerate()
        .map(|(id, name)| PatchDef {
            id,
            name: name.to_string(),
            kind,
        })
        .collect()
}

/// Grid of nodes on `[0, lx] x [0, ly]`, row-major from the bottom-left corner.
fn grid_nodes(nx: usize, ny: usize, lx: f64, ly: f64) -> Vec<[f64; 2]> {
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    nodes
}

/// Boundary faces of the rectangle, with the owning cell given per edge segment.
fn box_boundary(nx: usize, ny: usize, owner: impl Fn(usize, usize) -> usize, faces: &mut Vec<FaceDef>) {
    let node = |i: usize, j: usize| j * (nx + 1) + i;
    for i in 0..nx {
        faces.push(FaceDef {
            nodes: [node(i, 0), node(i + 1, 0)],
            left: owner(i, 0),
            right: FaceSide::Boundary(0),
        });
        faces.push(FaceDef {
            nodes: [node(i + 1, ny), node(i, ny)],
            left: owner(i, ny - 1),
            right: FaceSide::Boundary(2),
        });
    }
    for j in 0..ny {
        faces.push(FaceDef {
            nodes: [node(nx, j), node(nx, j + 1)],
            left: owner(nx - 1, j),
            right: FaceSide::Boundary(1),
        });
        faces.push(FaceDef {
            nodes: [node(0, j + 1), node(0, j)],
            left: owner(0, j),
            right: FaceSide::Boundary(3),
        });
    }
}

/// Structured `nx x ny` quadrilateral grid on `[0, lx] x [0, ly]`. Cell `(i, j)`
/// has index `j * nx + i`. Patches 0..4 are bottom, right, top and left.
pub fn generate_quad_grid(nx: usize, ny: usize, lx: f64, ly: f64, kind: BoundaryKind) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 || !(lx > 0.0 && ly > 0.0) {
        return Err(MeshError::Generator("empty quad grid".into()));
    }
    let nodes = grid_nodes(nx, ny, lx, ly);
    let node = |i: usize, j: usize| j * (nx + 1) + i;
    let cell = |i: usize, j: usize| j * nx + i;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 1..nx {
            faces.push(FaceDef {
                nodes: [node(i, j), node(i, j + 1)],
                left: cell(i - 1, j),
                right: FaceSide::Cell(cell(i, j)),
            });
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            faces.push(FaceDef {
                nodes: [node(i + 1, j), node(i, j)],
                left: cell(i, j - 1),
                right: FaceSide::Cell(cell(i, j)),
            });
        }
    }
    box_boundary(nx, ny, cell, &mut faces);
    Mesh::from_topology(nodes, faces, nx * ny, box_patches(kind))
}

/// Triangulation of `[0, 1]^2` from a jittered `n x n` grid, each quad split
/// along a randomly chosen diagonal. `jitter` is a fraction of the spacing and
/// must stay below 0.5 so that every quad remains simple. A diagonal that
/// would leave a non-convex quad with an inverted triangle is flipped.
pub fn generate_random_triangulation(n: usize, jitter: f64, seed: u64, kind: BoundaryKind) -> Result<Mesh, MeshError> {
    if n < 2 || !(0.0..0.5).contains(&jitter) {
        return Err(MeshError::Generator("need n >= 2 and jitter in [0, 0.5)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let mut nodes = grid_nodes(n, n, 1.0, 1.0);
    for j in 1..n {
        for i in 1..n {
            let p = &mut nodes[j * (n + 1) + i];
            p[0] += jitter * h * rng.random_range(-1.0..1.0);
            p[1] += jitter * h * rng.random_range(-1.0..1.0);
        }
    }
    let node = |i: usize, j: usize| j * (n + 1) + i;
    // quad (i, j) holds triangles 2q and 2q + 1; `lower[q]` is the one touching
    // the bottom edge, `upper[q]` the one touching the top edge
    let n_quads = n * n;
    let mut diag_up = vec![false; n_quads];
    for (k, d) in diag_up.iter_mut().enumerate() {
        let (i, j) = (k % n, k / n);
        let [a, b, c, e] = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)].map(|v| nodes[v]);
        let cross =
            |o: [f64; 2], p: [f64; 2], q: [f64; 2]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
        let up_ok = cross(a, b, c) > 0.0 && cross(a, c, e) > 0.0;
        let down_ok = cross(a, b, e) > 0.0 && cross(b, c, e) > 0.0;
        *d = match (up_ok, down_ok) {
            (true, true) => rng.random_bool(0.5),
            (up, _) => up,
        };
    }
    let q = |i: usize, j: usize| j * n + i;
    // with the rising diagonal (bl-tr) triangle 2q has the bottom and right
    // edges; with the falling one (tl-br) triangle 2q has the bottom and left
    let bottom = |i: usize, j: usize| 2 * q(i, j);
    let top = |i: usize, j: usize| 2 * q(i, j) + 1;
    let right = |i: usize, j: usize| {
        if diag_up[q(i, j)] {
            2 * q(i, j)
        } else {
            2 * q(i, j) + 1
        }
    };
    let left = |i: usize, j: usize| {
        if diag_up[q(i, j)] {
            2 * q(i, j) + 1
        } else {
            2 * q(i, j)
        }
    };
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let nodes = if diag_up[q(i, j)] {
                [node(i, j), node(i + 1, j + 1)]
            } else {
                [node(i, j + 1), node(i + 1, j)]
            };
            faces.push(FaceDef {
                nodes,
                left: bottom(i, j),
                right: FaceSide::Cell(top(i, j)),
            });
            if i + 1 < n {
                faces.push(FaceDef {
                    nodes: [node(i + 1, j), node(i + 1, j + 1)],
                    left: right(i, j),
                    right: FaceSide::Cell(left(i + 1, j)),
                });
            }
            if j + 1 < n {
                faces.push(FaceDef {
                    nodes: [node(i, j + 1), node(i + 1, j + 1)],
                    left: top(i, j),
                    right: FaceSide::Cell(bottom(i, j + 1)),
                });
            }
        }
    }
    let mut boundary = Vec::new();
    box_boundary(n, n, |_, _| 0, &mut boundary);
    for mut f in boundary {
        let [a, b] = f.nodes;
        let (ia, ja) = (a % (n + 1), a / (n + 1));
        let (ib, jb) = (b % (n + 1), b / (n + 1));
        f.left = if ja == 0 && jb == 0 {
            bottom(ia.min(ib), 0)
        } else if ja == n && jb == n {
            top(ia.min(ib), n - 1)
        } else if ia == n {
            right(n - 1, ja.min(jb))
        } else {
            left(0, ja.min(jb))
        };
        faces.push(f);
    }
    Mesh::from_topology(nodes, faces, 2 * n_quads, box_patches(kind))
}
