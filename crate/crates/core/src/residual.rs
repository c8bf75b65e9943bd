//! Residual operators: the third-order compact gas-kinetic update on the
//! finest level and first-order KFVS on agglomerated levels.
//!
//! Residuals are net outflows per unit time, `R_i = sum_faces S F.n_out`, so
//! that `dW_i/dt = -R_i / V_i`.

use rayon::prelude::*;

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::gas::{Conserved, Gas, Slopes, ZERO_SLOPES};
use crate::kinetic::{gks_flux, kfvs_flux_global, CollisionModel, SideState};
use crate::mesh::{BoundaryKind, FaceSide, Mesh};
use crate::reconstruction::{compute_df_point, CellPolynomial, Member, ScalarPoly, Stencils};

/// Gas, boundary data and collision model of a case.
#[derive(Clone, Copy, Debug)]
pub struct Physics {
    pub gas: Gas,
    pub boundary: Boundary,
    pub collision: CollisionModel,
}

/// Cell means, cell-averaged slopes and discontinuity feedback factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub w: Vec<Conserved>,
    pub slopes: Vec<Slopes>,
    pub alpha: Vec<f64>,
}

impl Field {
    pub fn uniform(n: usize, w: Conserved) -> Field {
        Field {
            w: vec![w; n],
            slopes: vec![ZERO_SLOPES; n],
            alpha: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// First cell with a non-finite or inadmissible mean.
    pub fn first_invalid(&self, gas: &Gas) -> Option<usize> {
        self.w.iter().position(|w| !(w.is_finite() && gas.is_admissible(w)))
    }
}

/// Face spectral radii and the per-cell convective time step `V / sum(S r / 2)`.
#[derive(Clone, Debug)]
pub struct Radii {
    pub face: Vec<f64>,
    pub dt_cell: Vec<f64>,
}

fn boundary_kind(mesh: &Mesh, p: usize) -> BoundaryKind {
    mesh.patches[p].kind
}

/// Spectral radii from the simple average of the adjacent states; boundary
/// faces average the interior state with its ghost.
pub fn spectral_radii(mesh: &Mesh, physics: &Physics, w: &[Conserved]) -> Result<Radii> {
    let gas = &physics.gas;
    let face: Vec<f64> = mesh
        .faces
        .par_iter()
        .map(|f| {
            let wr = match f.right {
                FaceSide::Cell(r) => w[r],
                FaceSide::Boundary(p) => physics
                    .boundary
                    .ghost_state(boundary_kind(mesh, p), &w[f.left], f.normal),
            };
            gas.spectral_radius(&(0.5 * (w[f.left] + wr)), f.normal)
                .map_err(|e| Error::Diverged {
                    iteration: 0,
                    cell: f.left,
                    what: format!("face state: {e}"),
                })
        })
        .collect::<Result<_>>()?;
    let dt_cell = mesh
        .cells
        .iter()
        .map(|c| {
            let s: f64 = c.faces.iter().map(|&f| 0.5 * mesh.faces[f].area * face[f]).sum();
            c.volume / s
        })
        .collect();
    Ok(Radii { face, dt_cell })
}

/// Output of one evaluation of the fine-level operator.
#[derive(Clone, Debug)]
pub struct FineEval {
    pub residual: Vec<Conserved>,
    /// Per-face `sum_k w_k F_k` in the global frame, oriented left to right.
    pub face_flux: Vec<Conserved>,
    /// Cell-averaged slopes from the time-evolved interface states (not yet limited).
    pub slopes: Vec<Slopes>,
    /// Discontinuity feedback factor of each cell for this step.
    pub alpha: Vec<f64>,
    pub radii: Radii,
    /// Gauss-point states that fell back to the cell mean.
    pub invalid_points: usize,
}

/// Third-order compact gas-kinetic operator on a polygonal mesh.
pub struct FineOperator<'a> {
    pub mesh: &'a Mesh,
    pub stencils: &'a Stencils,
    pub physics: &'a Physics,
    pub cfl_explicit: f64,
}

struct FaceOut {
    flux: Conserved,
    w_end: Conserved,
    alpha: f64,
    invalid: usize,
}

impl FineOperator<'_> {
    /// Ghost mean and slopes for every boundary face (zero on interior faces).
    fn ghost_data(&self, field: &Field) -> Vec<(Conserved, Slopes)> {
        let b = &self.physics.boundary;
        self.mesh
            .faces
            .iter()
            .map(|f| match f.right {
                FaceSide::Boundary(p) => {
                    let kind = boundary_kind(self.mesh, p);
                    (
                        b.ghost_state(kind, &field.w[f.left], f.normal),
                        b.ghost_slopes(kind, &field.slopes[f.left], f.normal),
                    )
                }
                FaceSide::Cell(_) => (Conserved::ZERO, ZERO_SLOPES),
            })
            .collect()
    }

    /// Blended reconstruction polynomial of every cell.
    pub fn polynomials(&self, field: &Field) -> Vec<CellPolynomial> {
        let ghosts = self.ghost_data(field);
        (0..self.mesh.cells.len())
            .into_par_iter()
            .map(|c| {
                let st = &self.stencils.cells[c];
                let data: Vec<(Conserved, Slopes)> = st
                    .members
                    .iter()
                    .map(|m| match *m {
                        Member::Cell(nb) => (field.w[nb], field.slopes[nb]),
                        Member::Ghost(f) => ghosts[f],
                    })
                    .collect();
                std::array::from_fn(|k| {
                    let q0 = field.w[c][k];
                    let means: Vec<f64> = data.iter().map(|d| d.0[k]).collect();
                    let p1 = st.build_p1(q0, &means, field.alpha[c]);
                    let slopes: Vec<[f64; 2]> = data.iter().map(|d| d.1[k]).collect();
                    match st.build_p2(q0, &means, &slopes) {
                        Some(p2) => st.blend_weno(&p2, &p1),
                        None => p1,
                    }
                })
            })
            .collect()
    }

    /// Point value and gradient from a cell polynomial, falling back to the
    /// cell mean with zero gradient when the point state is inadmissible.
    fn point_state(&self, polys: &[CellPolynomial], field: &Field, c: usize, x: [f64; 2]) -> (Conserved, Slopes, bool) {
        let (w, g) = self.stencils.cells[c].eval_cell(&polys[c], x);
        let ok = w.is_finite() && g.iter().flatten().all(|v| v.is_finite()) && self.physics.gas.is_admissible(&w);
        if ok {
            (w, g, true)
        } else {
            (field.w[c], ZERO_SLOPES, false)
        }
    }

    fn face_kernel(&self, polys: &[CellPolynomial], field: &Field, radii: &Radii, fi: usize) -> Result<FaceOut> {
        let f = &self.mesh.faces[fi];
        let physics = self.physics;
        let n = f.normal;
        let (dt, kind) = match f.right {
            FaceSide::Cell(r) => (self.cfl_explicit * radii.dt_cell[f.left].min(radii.dt_cell[r]), None),
            FaceSide::Boundary(p) => (
                self.cfl_explicit * radii.dt_cell[f.left],
                Some(boundary_kind(self.mesh, p)),
            ),
        };
        let mut out = FaceOut {
            flux: Conserved::ZERO,
            w_end: Conserved::ZERO,
            alpha: 1.0,
            invalid: 0,
        };
        for gp in &f.gauss_points {
            let (wl, gl, okl) = self.point_state(polys, field, f.left, gp.position);
            out.invalid += usize::from(!okl);
            let (wr, gr) = match (f.right, kind) {
                (FaceSide::Cell(r), _) => {
                    let (w, g, ok) = self.point_state(polys, field, r, gp.position);
                    out.invalid += usize::from(!ok);
                    (w, g)
                }
                (_, Some(k)) => (
                    physics.boundary.ghost_state(k, &wl, n),
                    physics.boundary.ghost_slopes(k, &gl, n),
                ),
                _ => unreachable!(),
            };
            let res = gks_flux(
                &physics.gas,
                &SideState::from_global(&wl, &gl, n),
                &SideState::from_global(&wr, &gr, n),
                dt,
                &physics.collision,
            )
            .map_err(|e| Error::Diverged {
                iteration: 0,
                cell: f.left,
                what: format!("interface flux: {e}"),
            })?
            .to_global(n);
            out.flux += (gp.weight / dt) * res.flux;
            out.w_end += gp.weight * res.state_end;
            if !kind.is_some_and(|k| k.is_wall()) {
                out.alpha *= compute_df_point(&physics.gas, &wl, &wr, n);
            }
        }
        if kind.is_some_and(|k| k.is_wall()) {
            // impermeable adiabatic wall at rest: no mass or energy crosses it
            out.flux[0] = 0.0;
            out.flux[3] = 0.0;
        }
        Ok(out)
    }

    /// Reconstruct, evaluate fluxes and assemble residuals, new slopes and DF.
    pub fn evaluate(&self, field: &Field) -> Result<FineEval> {
        let mesh = self.mesh;
        if let Some(c) = field.first_invalid(&self.physics.gas) {
            return Err(Error::Diverged {
                iteration: 0,
                cell: c,
                what: "inadmissible cell mean".into(),
            });
        }
        let radii = spectral_radii(mesh, self.physics, &field.w)?;
        let polys = self.polynomials(field);
        let faces: Vec<FaceOut> = (0..mesh.faces.len())
            .into_par_iter()
            .map(|f| self.face_kernel(&polys, field, &radii, f))
            .collect::<Result<_>>()?;

        let nc = mesh.cells.len();
        let mut residual = vec![Conserved::ZERO; nc];
        let mut slopes = vec![ZERO_SLOPES; nc];
        let mut alpha = vec![1.0; nc];
        let mut invalid = 0;
        for (f, out) in mesh.faces.iter().zip(&faces) {
            invalid += out.invalid;
            let n = f.normal;
            residual[f.left] += out.flux;
            add_outer(&mut slopes[f.left], &out.w_end, n, 1.0);
            alpha[f.left] *= out.alpha;
            if let FaceSide::Cell(r) = f.right {
                residual[r] -= out.flux;
                add_outer(&mut slopes[r], &out.w_end, n, -1.0);
                alpha[r] *= out.alpha;
            }
        }
        for (s, c) in slopes.iter_mut().zip(&mesh.cells) {
            for row in s.iter_mut() {
                row[0] /= c.volume;
                row[1] /= c.volume;
            }
        }
        Ok(FineEval {
            residual,
            face_flux: faces.into_iter().map(|o| o.flux).collect(),
            slopes,
            alpha,
            radii,
            invalid_points: invalid,
        })
    }
}

fn add_outer(s: &mut Slopes, w: &Conserved, n: [f64; 2], sign: f64) {
    for k in 0..4 {
        s[k][0] += sign * w[k] * n[0];
        s[k][1] += sign * w[k] * n[1];
    }
}

/// Output of the first-order operator on an agglomerated level.
#[derive(Clone, Debug)]
pub struct CoarseEval {
    pub residual: Vec<Conserved>,
    pub radii: Radii,
}

/// First-order KFVS residual with ghost states on boundary faces.
pub fn coarse_residual(mesh: &Mesh, physics: &Physics, w: &[Conserved]) -> Result<CoarseEval> {
    let radii = spectral_radii(mesh, physics, w)?;
    let fluxes: Vec<Conserved> = mesh
        .faces
        .par_iter()
        .map(|f| {
            let wr = match f.right {
                FaceSide::Cell(r) => w[r],
                FaceSide::Boundary(p) => physics
                    .boundary
                    .ghost_state(boundary_kind(mesh, p), &w[f.left], f.normal),
            };
            kfvs_flux_global(&physics.gas, &w[f.left], &wr, f.normal)
                .map(|fl| f.area * fl)
                .map_err(|e| Error::Diverged {
                    iteration: 0,
                    cell: f.left,
                    what: format!("coarse flux: {e}"),
                })
        })
        .collect::<Result<_>>()?;
    let mut residual = vec![Conserved::ZERO; mesh.cells.len()];
    for (f, fl) in mesh.faces.iter().zip(&fluxes) {
        residual[f.left] += *fl;
        if let FaceSide::Cell(r) = f.right {
            residual[r] -= *fl;
        }
    }
    Ok(CoarseEval { residual, radii })
}

/// `sqrt(sum_i (R_rho,i / V_i)^2)`, the unnormalized density residual.
pub fn density_residual(mesh: &Mesh, residual: &[Conserved]) -> f64 {
    residual
        .iter()
        .zip(&mesh.cells)
        .map(|(r, c)| (r[0] / c.volume).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Zero polynomial helper for tests and diagnostics.
pub fn constant_polynomial(w: &Conserved) -> CellPolynomial {
    std::array::from_fn(|k| ScalarPoly {
        mean: w[k],
        a: [0.0; 5],
    })
}
