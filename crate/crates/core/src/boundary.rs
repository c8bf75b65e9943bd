//! Ghost states behind boundary faces.

use crate::gas::{Conserved, Gas, Primitive, Slopes};
use crate::mesh::BoundaryKind;

/// Boundary treatment for one gas and free stream.
#[derive(Clone, Copy, Debug)]
pub struct Boundary {
    pub gas: Gas,
    pub freestream: Conserved,
}

/// Reflection matrix `I - 2 n n^T` applied to a vector.
fn reflect(v: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    let d = v[0] * n[0] + v[1] * n[1];
    [v[0] - 2.0 * d * n[0], v[1] - 2.0 * d * n[1]]
}

impl Boundary {
    pub fn new(gas: Gas, freestream: Conserved) -> Boundary {
        Boundary { gas, freestream }
    }

    /// Ghost state for interior state `w` at a face with outward unit normal `n`.
    pub fn ghost_state(&self, kind: BoundaryKind, w: &Conserved, n: [f64; 2]) -> Conserved {
        match kind {
            BoundaryKind::WallNoSlip => Conserved([w[0], -w[1], -w[2], w[3]]),
            BoundaryKind::WallSlip => {
                let m = reflect([w[1], w[2]], n);
                Conserved([w[0], m[0], m[1], w[3]])
            }
            BoundaryKind::Farfield => self.farfield(w, n),
        }
    }

    /// Gradient of the ghost field, the mirror image of the interior gradient
    /// for walls and zero at the far field.
    pub fn ghost_slopes(&self, kind: BoundaryKind, g: &Slopes, n: [f64; 2]) -> Slopes {
        let momentum_sign = match kind {
            BoundaryKind::Farfield => return [[0.0; 2]; 4],
            BoundaryKind::WallNoSlip => -1.0,
            BoundaryKind::WallSlip => 1.0,
        };
        let mut out = [reflect(g[0], n), [0.0; 2], [0.0; 2], reflect(g[3], n)];
        // J = d(m_i)/d(x_j); the ghost momentum gradient is T J M with M the
        // reflection and T either -I (no slip) or M (slip).
        let jm = [reflect(g[1], n), reflect(g[2], n)];
        if momentum_sign < 0.0 {
            out[1] = [-jm[0][0], -jm[0][1]];
            out[2] = [-jm[1][0], -jm[1][1]];
        } else {
            for j in 0..2 {
                let col = reflect([jm[0][j], jm[1][j]], n);
                out[1][j] = col[0];
                out[2][j] = col[1];
            }
        }
        out
    }

    /// Characteristic far-field state from the Riemann invariants along `n`.
    fn farfield(&self, w: &Conserved, n: [f64; 2]) -> Conserved {
        let gas = &self.gas;
        let g = gas.gamma;
        let qi = gas.to_primitive(w);
        let qf = gas.to_primitive(&self.freestream);
        if !(qi.rho > 0.0 && qi.p > 0.0) {
            return self.freestream;
        }
        let ci = (g * qi.p / qi.rho).sqrt();
        let cf = (g * qf.p / qf.rho).sqrt();
        let uni = qi.u * n[0] + qi.v * n[1];
        let unf = qf.u * n[0] + qf.v * n[1];
        let mach_n = uni / ci;
        if mach_n <= -1.0 {
            return self.freestream;
        }
        if mach_n >= 1.0 {
            return *w;
        }
        let r_out = uni + 2.0 * ci / (g - 1.0);
        let r_in = unf - 2.0 * cf / (g - 1.0);
        let un = 0.5 * (r_out + r_in);
        let c = 0.25 * (g - 1.0) * (r_out - r_in);
        if c <= 0.0 {
            return self.freestream;
        }
        let src = if un < 0.0 { &qf } else { &qi };
        let entropy = src.p / src.rho.powf(g);
        let rho = (c * c / (g * entropy)).powf(1.0 / (g - 1.0));
        let p = rho * c * c / g;
        let uns = src.u * n[0] + src.v * n[1];
        let u = src.u + (un - uns) * n[0];
        let v = src.v + (un - uns) * n[1];
        gas.to_conserved(&Primitive { rho, u, v, p })
    }
}
