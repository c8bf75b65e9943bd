//! Matrix-free multi-color LU-SGS with the DF-blended implicit/explicit diagonal.
//!
//! The linearized system for a cell is
//! `D_i dW_i + 1/2 alpha_i sum_j S_ij (T(W_j + dW_j) - T(W_j) - r_ij dW_j) = -R_i`
//! with `T` the Euler flux along the normal pointing from `i` to `j`. Forward
//! and backward passes over the colors update cells in place, each reading the
//! latest `dW` of its neighbors; cells of one color never neighbor each other,
//! so a color can be updated concurrently.

use rayon::prelude::*;

use crate::coloring::ColorMap;
use crate::error::{Error, Result};
use crate::gas::{Conserved, Gas};
use crate::mesh::{FaceSide, Mesh};

/// `alpha (V/dt_i + 1/2 sum S r) + (1 - alpha) V/dt_exp`.
pub fn hybrid_diagonal(volume: f64, alpha: f64, dt_implicit: f64, dt_explicit: f64, sum_sr: f64) -> f64 {
    alpha * (volume / dt_implicit + 0.5 * sum_sr) + (1.0 - alpha) * volume / dt_explicit
}

/// Inputs of one implicit step.
pub struct Linearization<'a> {
    pub mesh: &'a Mesh,
    pub gas: &'a Gas,
    pub w: &'a [Conserved],
    /// Right-hand side residual `R_i` (net outflow per unit time).
    pub residual: &'a [Conserved],
    pub alpha: &'a [f64],
    pub face_radius: &'a [f64],
    pub dt_implicit: &'a [f64],
    pub dt_explicit: &'a [f64],
}

impl Linearization<'_> {
    /// Blended diagonal of every cell; boundary faces count in `sum S r`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.mesh
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let sr: f64 = c
                    .faces
                    .iter()
                    .map(|&f| self.mesh.faces[f].area * self.face_radius[f])
                    .sum();
                hybrid_diagonal(c.volume, self.alpha[i], self.dt_implicit[i], self.dt_explicit[i], sr)
            })
            .collect()
    }

    /// New `dW_i` from the current neighbor values.
    pub fn cell_update(&self, i: usize, diag: f64, dw: &[Conserved]) -> Conserved {
        let cell = &self.mesh.cells[i];
        let mut off = Conserved::ZERO;
        if self.alpha[i] != 0.0 {
            for &fi in &cell.faces {
                let f = &self.mesh.faces[fi];
                let j = match f.right {
                    FaceSide::Cell(r) if r == i => f.left,
                    FaceSide::Cell(r) => r,
                    FaceSide::Boundary(_) => continue,
                };
                let dwj = dw[j];
                if dwj == Conserved::ZERO {
                    continue;
                }
                let n = f.outward_normal(i);
                let wj = self.w[j];
                let dt = self.gas.euler_flux(&(wj + dwj), n) - self.gas.euler_flux(&wj, n);
                off += f.area * (dt - self.face_radius[fi] * dwj);
            }
        }
        (-1.0 / diag) * (self.residual[i] + 0.5 * self.alpha[i] * off)
    }

    fn sweep_group(&self, group: &[usize], diag: &[f64], dw: &mut [Conserved]) -> Result<()> {
        let new: Vec<Conserved> = group.par_iter().map(|&i| self.cell_update(i, diag[i], dw)).collect();
        for (&i, d) in group.iter().zip(new) {
            if !d.is_finite() {
                return Err(Error::Diverged {
                    iteration: 0,
                    cell: i,
                    what: "non-finite LU-SGS update".into(),
                });
            }
            dw[i] = d;
        }
        Ok(())
    }

    /// Colors in ascending order.
    pub fn forward_sweep(&self, colors: &ColorMap, diag: &[f64], dw: &mut [Conserved]) -> Result<()> {
        for g in &colors.groups {
            self.sweep_group(g, diag, dw)?;
        }
        Ok(())
    }

    /// Colors in descending order. The last color is skipped: nothing it reads
    /// has changed since the forward pass computed it.
    pub fn backward_sweep(&self, colors: &ColorMap, diag: &[f64], dw: &mut [Conserved]) -> Result<()> {
        for g in colors.groups.iter().rev().skip(1) {
            self.sweep_group(g, diag, dw)?;
        }
        Ok(())
    }

    /// `n_sweeps` forward/backward passes starting from `dW = 0`.
    pub fn solve(&self, colors: &ColorMap, n_sweeps: usize) -> Result<Vec<Conserved>> {
        let diag = self.diagonal();
        let mut dw = vec![Conserved::ZERO; self.w.len()];
        for _ in 0..n_sweeps.max(1) {
            self.forward_sweep(colors, &diag, &mut dw)?;
            self.backward_sweep(colors, &diag, &mut dw)?;
        }
        Ok(dw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_values() {
        assert_eq!(hybrid_diagonal(1.0, 0.5, 0.1, 0.1, 4.0), 11.0);
        assert_eq!(hybrid_diagonal(2.0, 0.0, 0.1, 0.5, 4.0), 4.0);
        assert_eq!(hybrid_diagonal(1.0, 1.0, 0.1, 0.5, 4.0), 12.0);
    }
}
