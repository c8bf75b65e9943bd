//! Dense Newton oracle for the LU-SGS linear system on small quad grids.

#![allow(dead_code)]

use cgks::gas::{Conserved, Gas, Primitive};
use cgks::mesh::{generate_quad_grid, BoundaryKind, Mesh};
use cgks::smoother::Linearization;
use nalgebra::{DMatrix, DVector, Matrix4};

/// Analytic Jacobian of the Euler flux along `n`.
pub fn euler_jacobian(gas: &Gas, w: &Conserved, n: [f64; 2]) -> Matrix4<f64> {
    let g = gas.gamma;
    let q = gas.to_primitive(w);
    let (u, v) = (q.u, q.v);
    let un = u * n[0] + v * n[1];
    let e = w[3] / w[0];
    let h = e + q.p / q.rho;
    let k = 0.5 * (u * u + v * v);
    let gm = g - 1.0;
    Matrix4::new(
        0.0,
        n[0],
        n[1],
        0.0,
        gm * k * n[0] - u * un,
        un - (g - 2.0) * u * n[0],
        u * n[1] - gm * v * n[0],
        gm * n[0],
        gm * k * n[1] - v * un,
        v * n[0] - gm * u * n[1],
        un - (g - 2.0) * v * n[1],
        gm * n[1],
        (gm * k - h) * un,
        h * n[0] - gm * u * un,
        h * n[1] - gm * v * un,
        g * un,
    )
}

pub struct Case {
    pub mesh: Mesh,
    pub gas: Gas,
    pub w: Vec<Conserved>,
    pub res: Vec<Conserved>,
    pub alpha: Vec<f64>,
    pub radius: Vec<f64>,
    pub dti: Vec<f64>,
    pub dte: Vec<f64>,
}

impl Case {
    pub fn new(nx: usize, ny: usize, scale: f64, alpha: f64) -> Case {
        Case::with_cfl(nx, ny, scale, alpha, 10.0)
    }

    pub fn with_cfl(nx: usize, ny: usize, scale: f64, alpha: f64, cfl: f64) -> Case {
        let mesh = generate_quad_grid(nx, ny, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        Case::on_mesh(mesh, scale, alpha, cfl)
    }

    /// Smoothly varying state and residual on `mesh`.
    pub fn on_mesh(mesh: Mesh, scale: f64, alpha: f64, cfl: f64) -> Case {
        let gas = Gas::default();
        let nc = mesh.n_cells();
        let w: Vec<Conserved> = (0..nc)
            .map(|i| {
                let t = i as f64;
                gas.to_conserved(&Primitive {
                    rho: 1.0 + 0.1 * t.sin(),
                    u: 0.3 + 0.05 * t.cos(),
                    v: 0.1 * (2.0 * t).sin(),
                    p: 0.8 + 0.05 * t.cos(),
                })
            })
            .collect();
        let res = (0..nc)
            .map(|i| {
                let x = mesh.cells[i].centroid;
                scale * Conserved([x[0].sin(), (x[0] + x[1]).cos(), x[1], 0.5 - x[0] * x[1]])
            })
            .collect();
        let radius: Vec<f64> = mesh
            .faces
            .iter()
            .map(|f| {
                let wr = f.right_cell().map_or(w[f.left], |r| w[r]);
                gas.spectral_radius(&(0.5 * (w[f.left] + wr)), f.normal).unwrap()
            })
            .collect();
        let dt: Vec<f64> = mesh
            .cells
            .iter()
            .map(|c| {
                c.volume
                    / c.faces
                        .iter()
                        .map(|&f| 0.5 * mesh.faces[f].area * radius[f])
                        .sum::<f64>()
            })
            .collect();
        Case {
            gas,
            w,
            res,
            alpha: vec![alpha; nc],
            radius,
            dti: dt.iter().map(|d| cfl * d).collect(),
            dte: dt.iter().map(|d| 0.5 * d).collect(),
            mesh,
        }
    }

    pub fn lin(&self) -> Linearization<'_> {
        Linearization {
            mesh: &self.mesh,
            gas: &self.gas,
            w: &self.w,
            residual: &self.res,
            alpha: &self.alpha,
            face_radius: &self.radius,
            dt_implicit: &self.dti,
            dt_explicit: &self.dte,
        }
    }

    /// Residual of the implicit system, evaluated directly.
    pub fn system(&self, dw: &[Conserved]) -> DVector<f64> {
        let diag = self.lin().diagonal();
        let mut g = Vec::with_capacity(4 * dw.len());
        for i in 0..dw.len() {
            let mut acc = diag[i] * dw[i] + self.res[i];
            for &fi in &self.mesh.cells[i].faces {
                let f = &self.mesh.faces[fi];
                let Some(j) = f.other(i) else { continue };
                let n = f.outward_normal(i);
                let dt = self.gas.euler_flux(&(self.w[j] + dw[j]), n) - self.gas.euler_flux(&self.w[j], n);
                acc += (0.5 * self.alpha[i] * f.area) * (dt - self.radius[fi] * dw[j]);
            }
            g.extend(acc.0);
        }
        DVector::from_vec(g)
    }

    /// Jacobian of [`Case::system`] with the analytic Euler flux Jacobian.
    pub fn jacobian(&self, dw: &[Conserved]) -> DMatrix<f64> {
        let diag = self.lin().diagonal();
        let nc = self.w.len();
        let mut a = DMatrix::zeros(4 * nc, 4 * nc);
        for i in 0..nc {
            for k in 0..4 {
                a[(4 * i + k, 4 * i + k)] = diag[i];
            }
            for &fi in &self.mesh.cells[i].faces {
                let f = &self.mesh.faces[fi];
                let Some(j) = f.other(i) else { continue };
                let n = f.outward_normal(i);
                let jac = euler_jacobian(&self.gas, &(self.w[j] + dw[j]), n) - Matrix4::identity() * self.radius[fi];
                let blk = jac * (0.5 * self.alpha[i] * f.area);
                for r in 0..4 {
                    for c in 0..4 {
                        a[(4 * i + r, 4 * j + c)] += blk[(r, c)];
                    }
                }
            }
        }
        a
    }

    /// Dense Newton solution of the implicit system.
    pub fn dense_solve(&self) -> DVector<f64> {
        let nc = self.w.len();
        let mut x = DVector::zeros(4 * nc);
        for _ in 0..20 {
            let dw = unflat(&x);
            let step = self.jacobian(&dw).lu().solve(&self.system(&dw)).unwrap();
            x -= &step;
            if step.amax() <= 1e-15 * x.amax() {
                break;
            }
        }
        x
    }
}

pub fn unflat(x: &DVector<f64>) -> Vec<Conserved> {
    x.as_slice()
        .chunks(4)
        .map(|c| Conserved([c[0], c[1], c[2], c[3]]))
        .collect()
}

pub fn flat(dw: &[Conserved]) -> DVector<f64> {
    DVector::from_iterator(4 * dw.len(), dw.iter().flat_map(|d| d.0))
}
