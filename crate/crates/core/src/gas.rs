//! Conservative state vectors and calorically perfect gas relations.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::StateError;

/// Cell-averaged conservative variables `(rho, rho*u, rho*v, rho*E)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Conserved(pub [f64; 4]);

/// Per-variable gradient `[d/dx, d/dy]` for each conservative variable.
pub type Slopes = [[f64; 2]; 4];

pub const ZERO_SLOPES: Slopes = [[0.0; 2]; 4];

impl Conserved {
    pub const ZERO: Conserved = Conserved([0.0; 4]);

    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.0[1] / self.0[0], self.0[2] / self.0[0]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Express momentum in the `(normal, tangential)` frame of a face with unit normal `n`.
    /// The tangent is `n` rotated by +90 degrees.
    pub fn to_local(&self, n: [f64; 2]) -> Conserved {
        let [r, mx, my, e] = self.0;
        Conserved([r, mx * n[0] + my * n[1], -mx * n[1] + my * n[0], e])
    }

    pub fn to_global(&self, n: [f64; 2]) -> Conserved {
        let [r, mn, mt, e] = self.0;
        Conserved([r, mn * n[0] - mt * n[1], mn * n[1] + mt * n[0], e])
    }
}

impl Add for Conserved {
    type Output = Conserved;
    fn add(self, o: Conserved) -> Conserved {
        Conserved(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Conserved {
    type Output = Conserved;
    fn sub(self, o: Conserved) -> Conserved {
        Conserved(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for Conserved {
    type Output = Conserved;
    fn neg(self) -> Conserved {
        Conserved(self.0.map(|v| -v))
    }
}

impl Mul<f64> for Conserved {
    type Output = Conserved;
    fn mul(self, a: f64) -> Conserved {
        Conserved(self.0.map(|v| v * a))
    }
}

impl Mul<Conserved> for f64 {
    type Output = Conserved;
    fn mul(self, w: Conserved) -> Conserved {
        w * self
    }
}

impl AddAssign for Conserved {
    fn add_assign(&mut self, o: Conserved) {
        for k in 0..4 {
            self.0[k] += o.0[k];
        }
    }
}

impl SubAssign for Conserved {
    fn sub_assign(&mut self, o: Conserved) {
        for k in 0..4 {
            self.0[k] -= o.0[k];
        }
    }
}

impl Index<usize> for Conserved {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for Conserved {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

/// Primitive variables `(rho, u, v, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

/// Ideal gas with constant ratio of specific heats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gas {
    pub gamma: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Gas { gamma: 1.4 }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Gas { gamma }
    }

    /// Internal degrees of freedom of the planar gas, `K = (4 - 2 gamma) / (gamma - 1)`.
    /// Absorbs the out-of-plane translational mode into the internal variable.
    pub fn internal_dof(&self) -> f64 {
        (4.0 - 2.0 * self.gamma) / (self.gamma - 1.0)
    }

    pub fn pressure(&self, w: &Conserved) -> f64 {
        let [r, mx, my, e] = w.0;
        (self.gamma - 1.0) * (e - 0.5 * (mx * mx + my * my) / r)
    }

    pub fn to_primitive(&self, w: &Conserved) -> Primitive {
        let r = w.0[0];
        Primitive {
            rho: r,
            u: w.0[1] / r,
            v: w.0[2] / r,
            p: self.pressure(w),
        }
    }

    pub fn to_conserved(&self, q: &Primitive) -> Conserved {
        Conserved([
            q.rho,
            q.rho * q.u,
            q.rho * q.v,
            q.p / (self.gamma - 1.0) + 0.5 * q.rho * (q.u * q.u + q.v * q.v),
        ])
    }

    /// Primitive variables of a state, rejecting non-positive density or pressure.
    pub fn checked_primitive(&self, w: &Conserved) -> Result<Primitive, StateError> {
        let q = self.to_primitive(w);
        if !(q.rho > 0.0 && q.p > 0.0 && q.u.is_finite() && q.v.is_finite()) {
            return Err(StateError { rho: q.rho, p: q.p });
        }
        Ok(q)
    }

    pub fn is_admissible(&self, w: &Conserved) -> bool {
        w.0[0] > 0.0 && self.pressure(w) > 0.0 && w.is_finite()
    }

    pub fn sound_speed(&self, w: &Conserved) -> f64 {
        (self.gamma * self.pressure(w) / w.0[0]).sqrt()
    }

    /// Inviscid flux projected on `n`. Linear in `n`.
    pub fn euler_flux(&self, w: &Conserved, n: [f64; 2]) -> Conserved {
        let [r, mx, my, e] = w.0;
        let p = self.pressure(w);
        let un = (mx * n[0] + my * n[1]) / r;
        Conserved([r * un, mx * un + p * n[0], my * un + p * n[1], (e + p) * un])
    }

    /// Cartesian inviscid fluxes `(F, G)` so that the projected flux is `nx F + ny G`.
    pub fn euler_flux_xy(&self, w: &Conserved) -> (Conserved, Conserved) {
        let [r, mx, my, e] = w.0;
        let p = self.pressure(w);
        let u = mx / r;
        let v = my / r;
        (
            Conserved([mx, mx * u + p, my * u, (e + p) * u]),
            Conserved([my, mx * v, my * v + p, (e + p) * v]),
        )
    }

    /// Spectral radius of the projected inviscid Jacobian, `|U.n| + a`.
    pub fn spectral_radius(&self, w: &Conserved, n: [f64; 2]) -> Result<f64, StateError> {
        let q = self.checked_primitive(w)?;
        let a = (self.gamma * q.p / q.rho).sqrt();
        Ok((q.u * n[0] + q.v * n[1]).abs() + a)
    }

    pub fn mach(&self, w: &Conserved) -> f64 {
        let q = self.to_primitive(w);
        (q.u * q.u + q.v * q.v).sqrt() / (self.gamma * q.p / q.rho).sqrt()
    }
}
