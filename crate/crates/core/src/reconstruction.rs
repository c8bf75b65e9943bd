//! Compact third-order reconstruction and the discontinuity feedback factor.
//!
//! Each cell carries a quadratic in the scaled, zero-mean basis
//! `X/h, Y/h, X^2/h^2 - m20, XY/h^2 - m11, Y^2/h^2 - m02` with `X = x - x0`
//! measured from the cell centroid, so every polynomial averages to the cell
//! mean by construction. The large-stencil quadratic honours the neighbor
//! means exactly and the neighbor slopes in the least-squares sense; its
//! KKT system depends on geometry only and is factored once per cell into a
//! linear map. Boundary faces contribute a ghost cell: the interior polygon
//! mirrored across the face, carrying boundary-condition data.

use nalgebra::{DMatrix, SVD};

use crate::gas::{Conserved, Gas, Slopes};
use crate::mesh::{polygon, Mesh};

pub const GAMMA_LARGE: f64 = 0.85;
pub const GAMMA_SMALL: f64 = 0.15;
pub const WENO_EPS: f64 = 1e-8;

/// A stencil member: a real neighbor or the ghost behind a boundary face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    Cell(usize),
    Ghost(usize),
}

#[derive(Clone, Debug)]
pub struct CellStencil {
    pub h: f64,
    pub volume: f64,
    pub centroid: [f64; 2],
    /// Averages of `X^2/h^2, XY/h^2, Y^2/h^2` over the cell.
    pub m: [f64; 3],
    /// One member per face, in the cell's face order.
    pub members: Vec<Member>,
    /// Green-Gauss weights `S n / (2 V)` per member.
    pub gg: Vec<[f64; 2]>,
    /// Map from `[Q_m - Q_0 (n), h Qx_m, h Qy_m (interleaved, 2n)]` to the five
    /// quadratic coefficients, row-major `5 x 3n`. `None` means p1 only.
    pub p2_map: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Stencils {
    pub cells: Vec<CellStencil>,
    /// Cells that fell back to the Green-Gauss polynomial.
    pub p1_fallbacks: usize,
}

/// Scalar polynomial in the scaled basis; `a[0..2]` are `h` times the gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarPoly {
    pub mean: f64,
    pub a: [f64; 5],
}

/// One polynomial per conservative variable.
pub type CellPolynomial = [ScalarPoly; 4];

impl CellStencil {
    fn scaled(&self, x: [f64; 2]) -> (f64, f64) {
        ((x[0] - self.centroid[0]) / self.h, (x[1] - self.centroid[1]) / self.h)
    }

    pub fn eval(&self, p: &ScalarPoly, x: [f64; 2]) -> f64 {
        let (s, t) = self.scaled(x);
        let a = &p.a;
        p.mean
            + a[0] * s
            + a[1] * t
            + a[2] * (s * s - self.m[0])
            + a[3] * (s * t - self.m[1])
            + a[4] * (t * t - self.m[2])
    }

    pub fn gradient(&self, p: &ScalarPoly, x: [f64; 2]) -> [f64; 2] {
        let (s, t) = self.scaled(x);
        let a = &p.a;
        [
            (a[0] + 2.0 * a[2] * s + a[3] * t) / self.h,
            (a[1] + a[3] * s + 2.0 * a[4] * t) / self.h,
        ]
    }

    /// Point value and gradient of all four variables.
    pub fn eval_cell(&self, poly: &CellPolynomial, x: [f64; 2]) -> (Conserved, Slopes) {
        let (s, t) = self.scaled(x);
        let mut w = Conserved::ZERO;
        let mut g = [[0.0; 2]; 4];
        for k in 0..4 {
            let a = &poly[k].a;
            w[k] = poly[k].mean
                + a[0] * s
                + a[1] * t
                + a[2] * (s * s - self.m[0])
                + a[3] * (s * t - self.m[1])
                + a[4] * (t * t - self.m[2]);
            g[k] = [
                (a[0] + 2.0 * a[2] * s + a[3] * t) / self.h,
                (a[1] + a[3] * s + 2.0 * a[4] * t) / self.h,
            ];
        }
        (w, g)
    }

    /// Constrained least-squares quadratic. `means` and `slopes` are per member.
    pub fn build_p2(&self, q0: f64, means: &[f64], slopes: &[[f64; 2]]) -> Option<ScalarPoly> {
        let map = self.p2_map.as_ref()?;
        let n = self.members.len();
        let cols = 3 * n;
        let mut a = [0.0; 5];
        for (r, ar) in a.iter_mut().enumerate() {
            let row = &map[r * cols..(r + 1) * cols];
            let mut s = 0.0;
            for m in 0..n {
                s += row[m] * (means[m] - q0);
                s += row[n + 2 * m] * self.h * slopes[m][0];
                s += row[n + 2 * m + 1] * self.h * slopes[m][1];
            }
            *ar = s;
        }
        Some(ScalarPoly { mean: q0, a })
    }

    /// Green-Gauss linear polynomial scaled by `alpha`.
    pub fn build_p1(&self, q0: f64, means: &[f64], alpha: f64) -> ScalarPoly {
        let mut g = [0.0; 2];
        for (m, w) in self.gg.iter().enumerate() {
            let q = means[m] + q0;
            g[0] += q * w[0];
            g[1] += q * w[1];
        }
        ScalarPoly {
            mean: q0,
            a: [alpha * g[0] * self.h, alpha * g[1] * self.h, 0.0, 0.0, 0.0],
        }
    }

    /// Smoothness indicator `sum_{|l|=1,2} V^(|l|-1) int (D^l p)^2`.
    pub fn smoothness(&self, p: &ScalarPoly) -> f64 {
        let [a1, a2, a3, a4, a5] = p.a;
        let [m20, m11, m02] = self.m;
        let v = self.volume;
        let h2 = self.h * self.h;
        let first = a1 * a1
            + a2 * a2
            + 4.0 * a3 * a3 * m20
            + 4.0 * a3 * a4 * m11
            + a4 * a4 * m02
            + a4 * a4 * m20
            + 4.0 * a4 * a5 * m11
            + 4.0 * a5 * a5 * m02;
        let second = 4.0 * a3 * a3 + a4 * a4 + 4.0 * a5 * a5;
        v / h2 * first + v * v / (h2 * h2) * second
    }

    /// Nonlinear combination of the large-stencil quadratic and the Green-Gauss
    /// linear polynomial. The result is `theta p2 + (1 - theta) p1` with the
    /// large-stencil fraction `theta` clipped to `[0, 1]`.
    pub fn blend_weno(&self, p2: &ScalarPoly, p1: &ScalarPoly) -> ScalarPoly {
        let b2 = self.smoothness(p2);
        let b1 = self.smoothness(p1);
        let tau = (b2 - b1) * (b2 - b1);
        let w2 = GAMMA_LARGE * (1.0 + tau / (b2 + WENO_EPS));
        let w1 = GAMMA_SMALL * (1.0 + tau / (b1 + WENO_EPS));
        let theta = (w2 / (w1 + w2) / GAMMA_LARGE).clamp(0.0, 1.0);
        ScalarPoly {
            mean: p2.mean,
            a: std::array::from_fn(|k| theta * p2.a[k] + (1.0 - theta) * p1.a[k]),
        }
    }
}

/// Moments of a member's polygon about `origin`, scaled: averages of
/// `X/h, Y/h, X^2/h^2, XY/h^2, Y^2/h^2`.
fn scaled_averages(poly: &[[f64; 2]], origin: [f64; 2], h: f64) -> [f64; 5] {
    let m = polygon::moments(poly, origin);
    let v = m[0];
    [
        m[1] / (v * h),
        m[2] / (v * h),
        m[3] / (v * h * h),
        m[4] / (v * h * h),
        m[5] / (v * h * h),
    ]
}

/// The polygon mirrored across `face`, with counter-clockwise orientation.
pub fn ghost_polygon(mesh: &Mesh, cell: usize, face: usize) -> Vec<[f64; 2]> {
    let f = &mesh.faces[face];
    let a = mesh.nodes[f.nodes[0]];
    let mut pts: Vec<[f64; 2]> = mesh
        .cell_polygon(cell)
        .into_iter()
        .map(|p| polygon::reflect(p, a, f.normal))
        .collect();
    pts.reverse();
    pts
}

/// Precompute the reconstruction stencils of a mesh with polygonal cells.
pub fn build_stencils(mesh: &Mesh) -> Stencils {
    let mut fallbacks = 0;
    let cells: Vec<CellStencil> = (0..mesh.cells.len())
        .map(|c| {
            let s = build_cell_stencil(mesh, c);
            if s.p2_map.is_none() {
                fallbacks += 1;
            }
            s
        })
        .collect();
    if fallbacks > 0 {
        log::info!("{fallbacks} cell(s) use the Green-Gauss polynomial only");
    }
    Stencils {
        cells,
        p1_fallbacks: fallbacks,
    }
}

fn build_cell_stencil(mesh: &Mesh, c: usize) -> CellStencil {
    let cell = &mesh.cells[c];
    let h = cell.volume.sqrt();
    let own = scaled_averages(&mesh.cell_polygon(c), cell.centroid, h);
    let m = [own[2], own[3], own[4]];
    let mut members = Vec::with_capacity(cell.faces.len());
    let mut gg = Vec::with_capacity(cell.faces.len());
    let mut avgs = Vec::with_capacity(cell.faces.len());
    for &f in &cell.faces {
        let face = &mesh.faces[f];
        let n = face.outward_normal(c);
        gg.push([
            0.5 * face.area * n[0] / cell.volume,
            0.5 * face.area * n[1] / cell.volume,
        ]);
        let (member, poly) = match face.other(c) {
            Some(nb) => (Member::Cell(nb), mesh.cell_polygon(nb)),
            None => (Member::Ghost(f), ghost_polygon(mesh, c, f)),
        };
        members.push(member);
        avgs.push(scaled_averages(&poly, cell.centroid, h));
    }
    let p2_map = kkt_map(&avgs, &m);
    CellStencil {
        h,
        volume: cell.volume,
        centroid: cell.centroid,
        m,
        members,
        gg,
        p2_map,
    }
}

/// Solve the KKT system symbolically for the linear data-to-coefficient map.
fn kkt_map(avgs: &[[f64; 5]], m: &[f64; 3]) -> Option<Vec<f64>> {
    let n = avgs.len();
    if !(3..=5).contains(&n) {
        return None;
    }
    // constraint rows: member averages of the five basis functions
    let mut cmat = DMatrix::<f64>::zeros(n, 5);
    // least-squares rows: h times member averages of the basis derivatives
    let mut amat = DMatrix::<f64>::zeros(2 * n, 5);
    for (i, av) in avgs.iter().enumerate() {
        let [s, t, ss, st, tt] = *av;
        cmat.set_row(
            i,
            &nalgebra::RowDVector::from_row_slice(&[s, t, ss - m[0], st - m[1], tt - m[2]]),
        );
        amat.set_row(
            2 * i,
            &nalgebra::RowDVector::from_row_slice(&[1.0, 0.0, 2.0 * s, t, 0.0]),
        );
        amat.set_row(
            2 * i + 1,
            &nalgebra::RowDVector::from_row_slice(&[0.0, 1.0, 0.0, s, 2.0 * t]),
        );
    }
    let k = 5 + n;
    let mut kkt = DMatrix::<f64>::zeros(k, k);
    let ata = amat.transpose() * &amat * 2.0;
    kkt.view_mut((0, 0), (5, 5)).copy_from(&ata);
    kkt.view_mut((0, 5), (5, n)).copy_from(&cmat.transpose());
    kkt.view_mut((5, 0), (n, 5)).copy_from(&cmat);

    let svd = SVD::new(kkt.clone(), false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return None;
    }
    let inv = kkt.try_inverse()?;
    // rhs = [2 A^T b ; d]
    let top = inv.view((0, 0), (5, 5)) * amat.transpose() * 2.0;
    let dpart = inv.view((0, 5), (5, n));
    let cols = 3 * n;
    let mut map = vec![0.0; 5 * cols];
    for r in 0..5 {
        for j in 0..n {
            map[r * cols + j] = dpart[(r, j)];
        }
        for j in 0..2 * n {
            map[r * cols + n + j] = top[(r, j)];
        }
    }
    Some(map)
}

/// `1 / (1 + D^2)` with `D` built from the pressure jump and the jumps of the
/// normal and tangential Mach numbers across the point.
pub fn compute_df_point(gas: &Gas, w_l: &Conserved, w_r: &Conserved, n: [f64; 2]) -> f64 {
    let ql = gas.to_primitive(w_l);
    let qr = gas.to_primitive(w_r);
    let cl = (gas.gamma * ql.p / ql.rho).sqrt();
    let cr = (gas.gamma * qr.p / qr.rho).sqrt();
    let dp = (ql.p - qr.p).abs();
    let man_l = (ql.u * n[0] + ql.v * n[1]) / cl;
    let man_r = (qr.u * n[0] + qr.v * n[1]) / cr;
    let mat_l = (-ql.u * n[1] + ql.v * n[0]) / cl;
    let mat_r = (-qr.u * n[1] + qr.v * n[0]) / cr;
    let d = dp / ql.p + dp / qr.p + (man_l - man_r).powi(2) + (mat_l - mat_r).powi(2);
    1.0 / (1.0 + d * d)
}

pub fn compute_df_cell(point_factors: impl IntoIterator<Item = f64>) -> f64 {
    point_factors.into_iter().product()
}

pub fn limit_slopes(slopes: &mut [Slopes], alpha: &[f64]) {
    for (s, &a) in slopes.iter_mut().zip(alpha) {
        for row in s.iter_mut() {
            row[0] *= a;
            row[1] *= a;
        }
    }
}
