//! Gas-kinetic interface fluxes.
//!
//! All kernels work in face-local coordinates: `u` is the velocity along the
//! face normal, `v` along the tangent, and the interface sits at `x = 0`.
//! Moments are taken over the 2D Maxwellian with `K` internal degrees of
//! freedom lumped into `xi`, with the collision invariants
//! `psi = (1, u, v, (u^2 + v^2 + xi^2) / 2)`.

use std::f64::consts::PI;

use crate::error::StateError;
use crate::gas::{Conserved, Gas, Slopes};

/// Equilibrium distribution parameters; `lam = rho / (2 p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maxwellian {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub lam: f64,
    pub k: f64,
}

impl Maxwellian {
    pub fn from_conserved(gas: &Gas, w: &Conserved) -> Result<Maxwellian, StateError> {
        let q = gas.checked_primitive(w)?;
        Ok(Maxwellian {
            rho: q.rho,
            u: q.u,
            v: q.v,
            lam: q.rho / (2.0 * q.p),
            k: gas.internal_dof(),
        })
    }
}

/// Which part of the normal-velocity axis a moment table covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfSpace {
    Full,
    Positive,
    Negative,
}

/// Normalized moments `<u^n>`, `<v^n>` (n <= 6) and `<xi^0>`, `<xi^2>`, `<xi^4>`
/// of a Maxwellian with unit density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub u: [f64; 7],
    pub v: [f64; 7],
    pub xi: [f64; 3],
}

fn velocity_moments(c: f64, lam: f64, half: HalfSpace) -> [f64; 7] {
    let mut m = [0.0; 7];
    match half {
        HalfSpace::Full => {
            m[0] = 1.0;
            m[1] = c;
        }
        HalfSpace::Positive | HalfSpace::Negative => {
            let s = lam.sqrt();
            let tail = 0.5 * (-lam * c * c).exp() / (PI * lam).sqrt();
            if half == HalfSpace::Positive {
                m[0] = 0.5 * libm::erfc(-s * c);
                m[1] = c * m[0] + tail;
            } else {
                m[0] = 0.5 * libm::erfc(s * c);
                m[1] = c * m[0] - tail;
            }
        }
    }
    let inv = 0.5 / lam;
    for n in 0..5 {
        m[n + 2] = c * m[n + 1] + (n + 1) as f64 * inv * m[n];
    }
    m
}

impl Moments {
    pub fn new(g: &Maxwellian, half: HalfSpace) -> Moments {
        Moments {
            u: velocity_moments(g.u, g.lam, half),
            v: velocity_moments(g.v, g.lam, HalfSpace::Full),
            xi: [1.0, 0.5 * g.k / g.lam, (g.k * g.k + 2.0 * g.k) / (4.0 * g.lam * g.lam)],
        }
    }

    /// `<u^a v^b xi^(2c) psi>`.
    #[inline]
    pub fn psi(&self, a: usize, b: usize, c: usize) -> [f64; 4] {
        let (u, v, x) = (&self.u, &self.v, &self.xi);
        let base = u[a] * v[b];
        [
            base * x[c],
            u[a + 1] * v[b] * x[c],
            u[a] * v[b + 1] * x[c],
            0.5 * (u[a + 2] * v[b] * x[c] + u[a] * v[b + 2] * x[c] + base * x[c + 1]),
        ]
    }

    /// `<s u^a v^b psi>` for an expansion `s = s0 + s1 u + s2 v + s3 (u^2 + v^2 + xi^2) / 2`.
    #[inline]
    pub fn slope(&self, s: &[f64; 4], a: usize, b: usize) -> [f64; 4] {
        let p0 = self.psi(a, b, 0);
        let pu = self.psi(a + 1, b, 0);
        let pv = self.psi(a, b + 1, 0);
        let puu = self.psi(a + 2, b, 0);
        let pvv = self.psi(a, b + 2, 0);
        let pxx = self.psi(a, b, 1);
        std::array::from_fn(|k| s[0] * p0[k] + s[1] * pu[k] + s[2] * pv[k] + 0.5 * s[3] * (puu[k] + pvv[k] + pxx[k]))
    }
}

/// Expansion coefficients `s` with `<s psi> = dw / rho` for the Maxwellian `g`.
pub fn solve_micro_slopes(g: &Maxwellian, dw: &[f64; 4]) -> [f64; 4] {
    let b = dw.map(|x| x / g.rho);
    let (u, v, lam) = (g.u, g.v, g.lam);
    let e = u * u + v * v + 0.5 * (g.k + 2.0) / lam;
    let r4 = 2.0 * b[3] - e * b[0];
    let r3 = b[2] - v * b[0];
    let r2 = b[1] - u * b[0];
    let a4 = 4.0 * lam * lam / (g.k + 2.0) * (r4 - 2.0 * u * r2 - 2.0 * v * r3);
    let a3 = 2.0 * lam * r3 - v * a4;
    let a2 = 2.0 * lam * r2 - u * a4;
    let a1 = b[0] - u * a2 - v * a3 - 0.5 * a4 * e;
    [a1, a2, a3, a4]
}

/// Normal, tangential and temporal expansion coefficients of one Maxwellian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroSlopes {
    pub a_n: [f64; 4],
    pub a_t: [f64; 4],
    pub a_time: [f64; 4],
}

/// Spatial micro-slopes from macroscopic derivatives, and the time slope from
/// the compatibility condition `<A + a_n u + a_t v> = 0`.
pub fn micro_slopes(g: &Maxwellian, full: &Moments, dn: &[f64; 4], dt: &[f64; 4]) -> MicroSlopes {
    let a_n = solve_micro_slopes(g, dn);
    let a_t = solve_micro_slopes(g, dt);
    let sn = full.slope(&a_n, 1, 0);
    let st = full.slope(&a_t, 0, 1);
    let rhs: [f64; 4] = std::array::from_fn(|k| -(sn[k] + st[k]) * g.rho);
    MicroSlopes {
        a_n,
        a_t,
        a_time: solve_micro_slopes(g, &rhs),
    }
}

/// Collision time `mu / p_c + c_art * dt * |p_l - p_r| / (p_l + p_r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionModel {
    pub mu: f64,
    pub c_art: f64,
}

impl CollisionModel {
    pub fn tau(&self, p_l: f64, p_r: f64, p_c: f64, dt: f64) -> f64 {
        collision_time(p_l, p_r, p_c, self.mu, self.c_art, dt)
    }
}

pub fn collision_time(p_l: f64, p_r: f64, p_c: f64, mu: f64, c_art: f64, dt: f64) -> f64 {
    let physical = if mu > 0.0 { mu / p_c } else { 0.0 };
    physical + c_art * dt * (p_l - p_r).abs() / (p_l + p_r)
}

/// Reconstructed data on one side of a face, in face-local coordinates:
/// the point value and its normal and tangential derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SideState {
    pub w: Conserved,
    pub dn: Conserved,
    pub dt: Conserved,
}

impl SideState {
    pub fn uniform(w: Conserved) -> SideState {
        SideState {
            w,
            ..Default::default()
        }
    }

    /// Rotate a global point value and gradient into the frame of normal `n`.
    pub fn from_global(w: &Conserved, grad: &Slopes, n: [f64; 2]) -> SideState {
        let t = [-n[1], n[0]];
        let along = |d: [f64; 2]| Conserved(std::array::from_fn(|k| grad[k][0] * d[0] + grad[k][1] * d[1]));
        SideState {
            w: w.to_local(n),
            dn: along(n).to_local(n),
            dt: along(t).to_local(n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxResult {
    /// Flux through unit face length integrated over `[0, dt]`.
    pub flux: Conserved,
    /// Interface state at `t = dt`.
    pub state_end: Conserved,
    pub tau: f64,
}

impl FluxResult {
    pub fn to_global(&self, n: [f64; 2]) -> FluxResult {
        FluxResult {
            flux: self.flux.to_global(n),
            state_end: self.state_end.to_global(n),
            tau: self.tau,
        }
    }
}

/// Time-integrated BGK flux with the collision time from `model`.
pub fn gks_flux(
    gas: &Gas,
    left: &SideState,
    right: &SideState,
    dt: f64,
    model: &CollisionModel,
) -> Result<FluxResult, StateError> {
    gks_flux_inner(gas, left, right, dt, |pl, pr, pc| model.tau(pl, pr, pc, dt))
}

/// Time-integrated BGK flux with a prescribed collision time.
pub fn gks_flux_fixed_tau(
    gas: &Gas,
    left: &SideState,
    right: &SideState,
    dt: f64,
    tau: f64,
) -> Result<FluxResult, StateError> {
    gks_flux_inner(gas, left, right, dt, |_, _, _| tau)
}

fn add_scaled(acc: &mut [f64; 4], s: f64, x: &[f64; 4]) {
    for k in 0..4 {
        acc[k] += s * x[k];
    }
}

fn gks_flux_inner(
    gas: &Gas,
    left: &SideState,
    right: &SideState,
    dt: f64,
    tau_of: impl Fn(f64, f64, f64) -> f64,
) -> Result<FluxResult, StateError> {
    let gl = Maxwellian::from_conserved(gas, &left.w)?;
    let gr = Maxwellian::from_conserved(gas, &right.w)?;
    let ml = Moments::new(&gl, HalfSpace::Full);
    let mr = Moments::new(&gr, HalfSpace::Full);
    let ml_pos = Moments::new(&gl, HalfSpace::Positive);
    let mr_neg = Moments::new(&gr, HalfSpace::Negative);

    let mut wc = [0.0; 4];
    add_scaled(&mut wc, gl.rho, &ml_pos.psi(0, 0, 0));
    add_scaled(&mut wc, gr.rho, &mr_neg.psi(0, 0, 0));
    let wc = Conserved(wc);
    let gc = Maxwellian::from_conserved(gas, &wc)?;
    let mc = Moments::new(&gc, HalfSpace::Full);

    let sl = micro_slopes(&gl, &ml, &left.dn.0, &left.dt.0);
    let sr = micro_slopes(&gr, &mr, &right.dn.0, &right.dt.0);

    // equilibrium slopes: the half-space combination of the side slopes
    let mut dwc_n = [0.0; 4];
    add_scaled(&mut dwc_n, gl.rho, &ml_pos.slope(&sl.a_n, 0, 0));
    add_scaled(&mut dwc_n, gr.rho, &mr_neg.slope(&sr.a_n, 0, 0));
    let mut dwc_t = [0.0; 4];
    add_scaled(&mut dwc_t, gl.rho, &ml_pos.slope(&sl.a_t, 0, 0));
    add_scaled(&mut dwc_t, gr.rho, &mr_neg.slope(&sr.a_t, 0, 0));
    let sc = micro_slopes(&gc, &mc, &dwc_n, &dwc_t);

    let pl = gas.pressure(&left.w);
    let pr = gas.pressure(&right.w);
    let pc = gas.pressure(&wc);
    let tau = tau_of(pl, pr, pc);

    let e = (-dt / tau).exp();
    let one_e = 1.0 - e;
    let q1 = dt - tau * one_e;
    let q2 = 2.0 * tau * tau * one_e - tau * dt * e - tau * dt;
    let q3 = 0.5 * dt * dt - tau * dt + tau * tau * one_e;
    let q4 = tau * one_e;
    let q5 = 2.0 * tau * tau * one_e - tau * dt * e;
    let c1 = one_e;
    let c2 = (dt + tau) * e - tau;
    let c3 = dt - tau + tau * e;

    let mut flux = [0.0; 4];
    let mut state = [0.0; 4];

    // equilibrium part
    let rc = gc.rho;
    add_scaled(&mut flux, rc * q1, &mc.psi(1, 0, 0));
    add_scaled(&mut flux, rc * q2, &mc.slope(&sc.a_n, 2, 0));
    add_scaled(&mut flux, rc * q2, &mc.slope(&sc.a_t, 1, 1));
    add_scaled(&mut flux, rc * q3, &mc.slope(&sc.a_time, 1, 0));
    add_scaled(&mut state, rc * c1, &mc.psi(0, 0, 0));
    add_scaled(&mut state, rc * c2, &mc.slope(&sc.a_n, 1, 0));
    add_scaled(&mut state, rc * c2, &mc.slope(&sc.a_t, 0, 1));
    add_scaled(&mut state, rc * c3, &mc.slope(&sc.a_time, 0, 0));

    // free transport of the two initial distributions
    for (g, m, s) in [(&gl, &ml_pos, &sl), (&gr, &mr_neg, &sr)] {
        let r = g.rho;
        add_scaled(&mut flux, r * q4, &m.psi(1, 0, 0));
        add_scaled(&mut flux, -r * q5, &m.slope(&s.a_n, 2, 0));
        add_scaled(&mut flux, -r * q5, &m.slope(&s.a_t, 1, 1));
        add_scaled(&mut flux, -r * tau * q4, &m.slope(&s.a_time, 1, 0));
        let re = r * e;
        add_scaled(&mut state, re, &m.psi(0, 0, 0));
        add_scaled(&mut state, -re * (tau + dt), &m.slope(&s.a_n, 1, 0));
        add_scaled(&mut state, -re * (tau + dt), &m.slope(&s.a_t, 0, 1));
        add_scaled(&mut state, -re * tau, &m.slope(&s.a_time, 0, 0));
    }

    Ok(FluxResult {
        flux: Conserved(flux),
        state_end: Conserved(state),
        tau,
    })
}

/// Interface equilibrium state from the half-space moments of the two sides.
pub fn interface_state(gas: &Gas, w_l: &Conserved, w_r: &Conserved) -> Result<Conserved, StateError> {
    let gl = Maxwellian::from_conserved(gas, w_l)?;
    let gr = Maxwellian::from_conserved(gas, w_r)?;
    let mut wc = [0.0; 4];
    add_scaled(&mut wc, gl.rho, &Moments::new(&gl, HalfSpace::Positive).psi(0, 0, 0));
    add_scaled(&mut wc, gr.rho, &Moments::new(&gr, HalfSpace::Negative).psi(0, 0, 0));
    Ok(Conserved(wc))
}

/// First-order kinetic flux-vector splitting flux per unit length and time,
/// local frame.
pub fn kfvs_flux(gas: &Gas, w_l: &Conserved, w_r: &Conserved) -> Result<Conserved, StateError> {
    let gl = Maxwellian::from_conserved(gas, w_l)?;
    let gr = Maxwellian::from_conserved(gas, w_r)?;
    let mut f = [0.0; 4];
    add_scaled(&mut f, gl.rho, &Moments::new(&gl, HalfSpace::Positive).psi(1, 0, 0));
    add_scaled(&mut f, gr.rho, &Moments::new(&gr, HalfSpace::Negative).psi(1, 0, 0));
    Ok(Conserved(f))
}

/// KFVS flux across a face with unit normal `n`, global frame.
pub fn kfvs_flux_global(gas: &Gas, w_l: &Conserved, w_r: &Conserved, n: [f64; 2]) -> Result<Conserved, StateError> {
    Ok(kfvs_flux(gas, &w_l.to_local(n), &w_r.to_local(n))?.to_global(n))
}

/// Cell-averaged gradient from interface values by the divergence theorem:
/// `grad |Omega| = sum_faces sum_points w_k W_k n_out`. Each entry of
/// `samples` is `(weighted value sum over the face's points, outward normal)`.
pub fn divergence_slopes(volume: f64, samples: impl IntoIterator<Item = (Conserved, [f64; 2])>) -> Slopes {
    let mut s = [[0.0; 2]; 4];
    for (w, n) in samples {
        for k in 0..4 {
            s[k][0] += w[k] * n[0];
            s[k][1] += w[k] * n[1];
        }
    }
    for row in s.iter_mut() {
        row[0] /= volume;
        row[1] /= volume;
    }
    s
}
