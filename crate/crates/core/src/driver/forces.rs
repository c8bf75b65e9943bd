//! Body forces, separation point and recirculation length.

use crate::error::{Error, Result};
use crate::gas::Conserved;
use crate::mesh::Mesh;
use crate::residual::{Field, Physics};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Forces {
    pub cd: f64,
    pub cl: f64,
    /// Angle between the rear stagnation point and the upper separation point.
    pub separation_angle_deg: Option<f64>,
    /// Recirculation length behind the body in reference lengths.
    pub wake_length: Option<f64>,
}

/// Faces of the named patch.
fn patch_faces<'a>(mesh: &'a Mesh, patch: &str) -> Result<&'a [usize]> {
    let p = mesh
        .patch_by_name(patch)
        .ok_or_else(|| Error::Config(format!("no boundary patch named '{patch}'")))?;
    let faces = &mesh.patches[p].faces;
    if faces.is_empty() {
        return Err(Error::Config(format!("boundary patch '{patch}' is empty")));
    }
    Ok(faces)
}

/// Drag and lift coefficients from the wall momentum fluxes. `face_flux` holds
/// per-face fluxes oriented along the face normal, which points out of the
/// fluid on boundary faces.
pub fn force_coefficients(
    mesh: &Mesh,
    physics: &Physics,
    face_flux: &[Conserved],
    patch: &str,
    reference_length: f64,
) -> Result<(f64, f64)> {
    let mut f = [0.0; 2];
    for &i in patch_faces(mesh, patch)? {
        f[0] += face_flux[i][1];
        f[1] += face_flux[i][2];
    }
    let fs = physics.boundary.freestream;
    let [u, v] = fs.velocity();
    let speed = u.hypot(v);
    let q = 0.5 * fs.rho() * speed * speed * reference_length;
    let (dx, dy) = (u / speed, v / speed);
    Ok(((f[0] * dx + f[1] * dy) / q, (-f[0] * dy + f[1] * dx) / q))
}

/// Area-weighted centroid of the wall faces.
fn body_center(mesh: &Mesh, faces: &[usize]) -> [f64; 2] {
    let mut c = [0.0; 2];
    let mut s = 0.0;
    for &i in faces {
        let f = &mesh.faces[i];
        c[0] += f.area * f.centroid[0];
        c[1] += f.area * f.centroid[1];
        s += f.area;
    }
    [c[0] / s, c[1] / s]
}

/// Separation angle on the upper surface of a body in a flow along `+x`,
/// measured from the rear stagnation point, from the sign change of the wall
/// shear stress. `None` if the shear does not change sign.
pub fn separation_angle(mesh: &Mesh, face_flux: &[Conserved], patch: &str) -> Result<Option<f64>> {
    let faces = patch_faces(mesh, patch)?;
    let c = body_center(mesh, faces);
    let mut pts: Vec<(f64, f64)> = faces
        .iter()
        .filter_map(|&i| {
            let f = &mesh.faces[i];
            let (x, y) = (f.centroid[0] - c[0], f.centroid[1] - c[1]);
            (y > 0.0).then(|| {
                // tangential momentum flux along the counter-clockwise tangent
                let t = [-y, x];
                let tau = face_flux[i][1] * t[0] + face_flux[i][2] * t[1];
                (y.atan2(x), tau / f.area)
            })
        })
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    // the front third of the upper surface sets the attached sign; the scan
    // toward the rear starts behind it, away from the noisy stagnation region
    let front = 2.0 * std::f64::consts::FRAC_PI_3;
    let attached = pts.iter().filter(|p| p.0 >= front).map(|p| p.1).sum::<f64>().signum();
    let start = pts.iter().position(|p| p.0 < front).unwrap_or(pts.len());
    for k in start.max(1)..pts.len() {
        let (a, b) = (pts[k - 1], pts[k]);
        if b.1 != 0.0 && b.1.signum() != attached {
            let t = a.1 / (a.1 - b.1);
            let phi = a.0 + t * (b.0 - a.0);
            return Ok(Some(phi.to_degrees()));
        }
    }
    Ok(None)
}

/// Velocity `u` at a point from the linear reconstruction of the cells that
/// contain it (averaged over ties on shared faces).
fn sample_u(mesh: &Mesh, field: &Field, p: [f64; 2], hint: &mut Vec<usize>) -> Option<f64> {
    let cells = {
        let near: Vec<usize> = hint
            .iter()
            .copied()
            .filter(|&c| crate::mesh::polygon::contains(&mesh.cell_polygon(c), p))
            .collect();
        if near.is_empty() {
            mesh.locate(p)
        } else {
            near
        }
    };
    if cells.is_empty() {
        return None;
    }
    let mut u = 0.0;
    for &c in &cells {
        let x = mesh.cells[c].centroid;
        let d = [p[0] - x[0], p[1] - x[1]];
        let s = &field.slopes[c];
        let val = |k: usize| field.w[c][k] + s[k][0] * d[0] + s[k][1] * d[1];
        u += val(1) / val(0);
    }
    *hint = cells
        .iter()
        .flat_map(|&c| std::iter::once(c).chain(mesh.cells[c].neighbors.iter().copied()))
        .collect();
    hint.sort_unstable();
    hint.dedup();
    Some(u / cells.len() as f64)
}

/// Recirculation length behind the body along the symmetry line `y = y_c`:
/// distance from the rear of the body to the first zero crossing of `u`,
/// divided by `reference_length`.
pub fn wake_length(mesh: &Mesh, field: &Field, patch: &str, reference_length: f64) -> Result<Option<f64>> {
    let faces = patch_faces(mesh, patch)?;
    let c = body_center(mesh, faces);
    let x_rear = faces
        .iter()
        .flat_map(|&i| mesh.faces[i].nodes)
        .map(|n| mesh.nodes[n][0])
        .fold(f64::NEG_INFINITY, f64::max);
    let dx = 0.002 * reference_length;
    let mut hint = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut seen_reverse = false;
    for k in 1..=10_000 {
        let x = x_rear + k as f64 * dx;
        let Some(u) = sample_u(mesh, field, [x, c[1]], &mut hint) else {
            break;
        };
        if u < 0.0 {
            seen_reverse = true;
        } else if seen_reverse {
            let (xp, up) = prev.expect("reverse flow precedes the crossing");
            let xz = xp + (x - xp) * up / (up - u);
            return Ok(Some((xz - x_rear) / reference_length));
        }
        prev = Some((x, u));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Boundary;
    use crate::gas::{Gas, Primitive};
    use crate::kinetic::CollisionModel;
    use crate::mesh::generate_cylinder_mesh;

    fn physics() -> Physics {
        let gas = Gas::default();
        let fs = gas.to_conserved(&Primitive {
            rho: 1.0,
            u: 0.2,
            v: 0.0,
            p: 1.0 / 1.4,
        });
        Physics {
            gas,
            boundary: Boundary::new(gas, fs),
            collision: CollisionModel { mu: 0.0, c_art: 1.0 },
        }
    }

    #[test]
    fn uniform_pressure_gives_no_force() {
        let mesh = generate_cylinder_mesh(0.5, 5.0, 6, 32, 0.05).unwrap();
        let flux: Vec<Conserved> = mesh
            .faces
            .iter()
            .map(|f| Conserved([0.0, 0.7 * f.area * f.normal[0], 0.7 * f.area * f.normal[1], 0.0]))
            .collect();
        let (cd, cl) = force_coefficients(&mesh, &physics(), &flux, "wall", 1.0).unwrap();
        assert!(cd.abs() < 1e-13 && cl.abs() < 1e-13);
    }

    #[test]
    fn unit_drag_force() {
        let mesh = generate_cylinder_mesh(0.5, 5.0, 6, 32, 0.05).unwrap();
        let wall = mesh.patch_by_name("wall").unwrap();
        let n = mesh.patches[wall].faces.len() as f64;
        let mut flux = vec![Conserved::ZERO; mesh.faces.len()];
        for &i in &mesh.patches[wall].faces {
            flux[i] = Conserved([0.0, 0.02 / n, 0.0, 0.0]);
        }
        // q = 0.5 * 0.04 * 1 = 0.02
        let (cd, cl) = force_coefficients(&mesh, &physics(), &flux, "wall", 1.0).unwrap();
        assert!((cd - 1.0).abs() < 1e-14 && cl.abs() < 1e-14);
        assert!(force_coefficients(&mesh, &physics(), &flux, "nothing", 1.0).is_err());
    }

    #[test]
    fn separation_from_prescribed_shear() {
        let mesh = generate_cylinder_mesh(0.5, 5.0, 6, 360, 0.2).unwrap();
        let mut flux = vec![Conserved::ZERO; mesh.faces.len()];
        let wall = mesh.patch_by_name("wall").unwrap();
        for &i in &mesh.patches[wall].faces {
            let f = &mesh.faces[i];
            let phi = f.centroid[1].atan2(f.centroid[0]);
            // shear proportional to sin(phi - 50 deg) along the tangent
            let tau = (phi - 50f64.to_radians()).sin();
            let t = [-f.centroid[1], f.centroid[0]];
            let l = t[0].hypot(t[1]);
            flux[i] = Conserved([0.0, tau * f.area * t[0] / l, tau * f.area * t[1] / l, 0.0]);
        }
        let a = separation_angle(&mesh, &flux, "wall").unwrap().unwrap();
        assert!((a - 50.0).abs() < 0.1, "{a}");
    }

    #[test]
    fn wake_length_from_linear_profile() {
        let mesh = generate_cylinder_mesh(0.5, 10.0, 30, 40, 0.01).unwrap();
        let gas = Gas::default();
        // u = x - 2 behind the body: zero crossing at x = 2, 1.5 past the rear
        let mut field = Field::uniform(mesh.n_cells(), Conserved::ZERO);
        for (i, c) in mesh.cells.iter().enumerate() {
            let u = c.centroid[0] - 2.0;
            field.w[i] = gas.to_conserved(&Primitive {
                rho: 1.0,
                u,
                v: 0.0,
                p: 1.0,
            });
            field.slopes[i][1] = [1.0, 0.0];
        }
        let l = wake_length(&mesh, &field, "wall", 1.0).unwrap().unwrap();
        assert!((l - 1.5).abs() < 1e-3, "{l}");
    }
}
