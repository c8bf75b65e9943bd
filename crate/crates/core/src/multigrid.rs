//! Time stepping on the finest level and the agglomeration multigrid V-cycle.
//!
//! The finest level is smoothed by the compact gas-kinetic operator with a
//! hybrid LU-SGS update; agglomerated levels solve the forced first-order
//! KFVS problem `R_2h(W) - R_2h(W0) + R* = 0` with the same LU-SGS kernel.
//! Corrections return by piecewise-constant injection scaled by the DF.

use crate::agglomeration::Hierarchy;
use crate::coloring::{color_mesh, ColorMap};
use crate::error::{Error, Result};
use crate::gas::{Conserved, Gas};
use crate::mesh::Mesh;
use crate::reconstruction::{build_stencils, limit_slopes, Stencils};
use crate::residual::{coarse_residual, density_residual, Field, FineEval, FineOperator, Physics};
use crate::smoother::Linearization;

pub const MAX_HALVINGS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub cfl_implicit: f64,
    pub cfl_explicit: f64,
    pub lusgs_sweeps: usize,
    pub coarse_lusgs_sweeps: usize,
    pub pre_smooth: usize,
    pub post_smooth: usize,
    /// When false the relaxation and the prolongation use `alpha = 1`
    /// (slopes are still limited by the DF).
    pub df_relaxation: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cfl_implicit: 10.0,
            cfl_explicit: 0.5,
            lusgs_sweeps: 6,
            coarse_lusgs_sweeps: 6,
            pre_smooth: 1,
            post_smooth: 0,
            df_relaxation: true,
        }
    }
}

/// Work and robustness counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub fine_evals: usize,
    pub coarse_evals: usize,
    pub invalid_points: usize,
    /// Cells whose update was halved at least once.
    pub damped_cells: usize,
    /// Cell updates or corrections dropped after repeated halving.
    pub dropped_updates: usize,
    /// Coarse levels skipped after repeated time-step halving.
    pub skipped_levels: usize,
}

/// Per-level multigrid data of one cycle.
#[derive(Clone, Debug, Default)]
pub struct CoarseState {
    pub w: Vec<Conserved>,
    pub w0: Vec<Conserved>,
    /// Restricted fine residual `R*`.
    pub r_star: Vec<Conserved>,
    /// Coarse-operator residual at `w0`.
    pub r0: Vec<Conserved>,
    pub alpha: Vec<f64>,
}

impl CoarseState {
    /// `F = R* - R(W0)`.
    pub fn forcing(&self) -> Vec<Conserved> {
        self.r_star.iter().zip(&self.r0).map(|(s, r)| *s - *r).collect()
    }

    /// `(R(W) - R(W0)) + R*`; equals `R*` exactly at `W = W0`.
    pub fn forced(&self, r: &[Conserved]) -> Vec<Conserved> {
        r.iter()
            .zip(&self.r0)
            .zip(&self.r_star)
            .map(|((r, r0), s)| (*r - *r0) + *s)
            .collect()
    }
}

/// Volume-weighted average of the children.
pub fn restrict_state(fine: &Mesh, coarse: &Mesh, children_of: &[Vec<usize>], w: &[Conserved]) -> Vec<Conserved> {
    children_of
        .iter()
        .zip(&coarse.cells)
        .map(|(kids, c)| {
            let mut s = Conserved::ZERO;
            for &k in kids {
                s += fine.cells[k].volume * w[k];
            }
            (1.0 / c.volume) * s
        })
        .collect()
}

/// Plain sum of the children.
pub fn restrict_residual(children_of: &[Vec<usize>], r: &[Conserved]) -> Vec<Conserved> {
    children_of
        .iter()
        .map(|kids| kids.iter().fold(Conserved::ZERO, |a, &k| a + r[k]))
        .collect()
}

/// Minimum over the children.
pub fn restrict_alpha(children_of: &[Vec<usize>], alpha: &[f64]) -> Vec<f64> {
    children_of
        .iter()
        .map(|kids| kids.iter().map(|&k| alpha[k]).fold(1.0, f64::min))
        .collect()
}

/// `W_h += alpha_h (W_2h - W0_2h)` by injection. A correction that makes a
/// state inadmissible is halved up to [`MAX_HALVINGS`] times, then dropped.
/// Returns the number of dropped corrections.
pub fn prolong_correct(
    gas: &Gas,
    parent_of: &[usize],
    w_fine: &mut [Conserved],
    alpha: &[f64],
    w_coarse: &[Conserved],
    w0: &[Conserved],
) -> usize {
    let mut dropped = 0;
    for (i, w) in w_fine.iter_mut().enumerate() {
        if alpha[i] == 0.0 {
            continue;
        }
        let p = parent_of[i];
        let mut dw = alpha[i] * (w_coarse[p] - w0[p]);
        match admissible_update(gas, w, &mut dw) {
            true => *w += dw,
            false => dropped += 1,
        }
    }
    dropped
}

/// Halve `dw` until `w + dw` is admissible; false if that never happens.
fn admissible_update(gas: &Gas, w: &Conserved, dw: &mut Conserved) -> bool {
    for _ in 0..=MAX_HALVINGS {
        let t = *w + *dw;
        if t.is_finite() && gas.is_admissible(&t) {
            return true;
        }
        *dw = 0.5 * *dw;
    }
    false
}

/// Mesh hierarchy with colorings, reconstruction stencils and counters.
pub struct Solver {
    pub hierarchy: Hierarchy,
    pub colors: Vec<ColorMap>,
    pub stencils: Stencils,
    pub physics: Physics,
    pub settings: SolverSettings,
    pub counters: Counters,
    /// Face fluxes of the most recent fine evaluation.
    pub last_face_flux: Vec<Conserved>,
}

impl Solver {
    pub fn new(hierarchy: Hierarchy, physics: Physics, settings: SolverSettings) -> Solver {
        let colors = hierarchy.levels.iter().map(|l| color_mesh(&l.mesh, 0)).collect();
        let stencils = build_stencils(hierarchy.finest());
        Solver {
            hierarchy,
            colors,
            stencils,
            physics,
            settings,
            counters: Counters::default(),
            last_face_flux: Vec::new(),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        self.hierarchy.finest()
    }

    pub fn initial_field(&self) -> Field {
        Field::uniform(self.mesh().n_cells(), self.physics.boundary.freestream)
    }

    pub fn fine_operator(&self) -> FineOperator<'_> {
        FineOperator {
            mesh: self.hierarchy.finest(),
            stencils: &self.stencils,
            physics: &self.physics,
            cfl_explicit: self.settings.cfl_explicit,
        }
    }

    /// One evaluation of the fine operator, counted.
    pub fn evaluate_fine(&mut self, field: &Field) -> Result<FineEval> {
        self.counters.fine_evals += 1;
        let ev = self.fine_operator().evaluate(field)?;
        self.counters.invalid_points += ev.invalid_points;
        self.last_face_flux.clone_from(&ev.face_flux);
        Ok(ev)
    }

    fn relaxation_alpha<'a>(&self, alpha: &'a [f64], ones: &'a mut Vec<f64>) -> &'a [f64] {
        if self.settings.df_relaxation {
            alpha
        } else {
            ones.clear();
            ones.resize(alpha.len(), 1.0);
            ones
        }
    }

    /// Apply the per-cell updates with positivity halving, then refresh slopes
    /// and DF from the evaluation.
    fn apply_fine(&mut self, field: &mut Field, ev: FineEval, dw: &[Conserved]) {
        let gas = self.physics.gas;
        for (i, w) in field.w.iter_mut().enumerate() {
            let mut d = dw[i];
            let full = d;
            if admissible_update(&gas, w, &mut d) {
                if d != full {
                    self.counters.damped_cells += 1;
                }
                *w += d;
            } else {
                self.counters.dropped_updates += 1;
            }
        }
        field.slopes = ev.slopes;
        limit_slopes(&mut field.slopes, &ev.alpha);
        field.alpha = ev.alpha;
    }

    /// Local-time-stepping explicit update. Returns the density residual
    /// of the state before the update.
    pub fn explicit_step(&mut self, field: &mut Field) -> Result<f64> {
        let ev = self.evaluate_fine(field)?;
        let norm = density_residual(self.mesh(), &ev.residual);
        let mesh = self.hierarchy.finest();
        let dw: Vec<Conserved> = ev
            .residual
            .iter()
            .zip(&ev.radii.dt_cell)
            .zip(&mesh.cells)
            .map(|((r, dt), c)| (-self.settings.cfl_explicit * dt / c.volume) * *r)
            .collect();
        self.apply_fine(field, ev, &dw);
        Ok(norm)
    }

    /// One hybrid implicit step on the finest level.
    pub fn implicit_step(&mut self, field: &mut Field) -> Result<f64> {
        let ev = self.evaluate_fine(field)?;
        let norm = density_residual(self.mesh(), &ev.residual);
        let s = self.settings;
        let dti: Vec<f64> = ev.radii.dt_cell.iter().map(|d| s.cfl_implicit * d).collect();
        let dte: Vec<f64> = ev.radii.dt_cell.iter().map(|d| s.cfl_explicit * d).collect();
        let mut ones = Vec::new();
        let alpha = self.relaxation_alpha(&ev.alpha, &mut ones);
        let lin = Linearization {
            mesh: self.hierarchy.finest(),
            gas: &self.physics.gas,
            w: &field.w,
            residual: &ev.residual,
            alpha,
            face_radius: &ev.radii.face,
            dt_implicit: &dti,
            dt_explicit: &dte,
        };
        let dw = lin.solve(&self.colors[0], s.lusgs_sweeps)?;
        self.apply_fine(field, ev, &dw);
        Ok(norm)
    }

    /// Implicit forced smoothing of a coarse level; the time step is halved
    /// while the update is inadmissible. Returns false if the level is skipped.
    fn coarse_smooth(&mut self, level: usize, st: &mut CoarseState) -> Result<bool> {
        let mesh = &self.hierarchy.levels[level].mesh;
        let s = self.settings;
        self.counters.coarse_evals += 1;
        let ev = coarse_residual(mesh, &self.physics, &st.w)?;
        let rhs = st.forced(&ev.residual);
        let mut ones = Vec::new();
        let alpha = self.relaxation_alpha(&st.alpha, &mut ones);
        let mut scale = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let dti: Vec<f64> = ev.radii.dt_cell.iter().map(|d| scale * s.cfl_implicit * d).collect();
            let dte: Vec<f64> = ev.radii.dt_cell.iter().map(|d| scale * s.cfl_explicit * d).collect();
            let lin = Linearization {
                mesh,
                gas: &self.physics.gas,
                w: &st.w,
                residual: &rhs,
                alpha,
                face_radius: &ev.radii.face,
                dt_implicit: &dti,
                dt_explicit: &dte,
            };
            let dw = lin.solve(&self.colors[level], s.coarse_lusgs_sweeps)?;
            let new: Vec<Conserved> = st.w.iter().zip(&dw).map(|(w, d)| *w + *d).collect();
            if new.iter().all(|w| w.is_finite() && self.physics.gas.is_admissible(w)) {
                st.w = new;
                return Ok(true);
            }
            scale *= 0.5;
        }
        self.counters.skipped_levels += 1;
        log::debug!("coarse level {level} skipped after {MAX_HALVINGS} halvings");
        Ok(false)
    }

    /// Set up level `level` from the finer level's state, residual and DF.
    fn descend(
        &mut self,
        level: usize,
        w_fine: &[Conserved],
        r_fine: &[Conserved],
        a_fine: &[f64],
    ) -> Result<CoarseState> {
        let lv = &self.hierarchy.levels[level];
        let fine = &self.hierarchy.levels[level - 1].mesh;
        let w0 = restrict_state(fine, &lv.mesh, &lv.children_of, w_fine);
        let r_star = restrict_residual(&lv.children_of, r_fine);
        let alpha = restrict_alpha(&lv.children_of, a_fine);
        self.counters.coarse_evals += 1;
        let r0 = coarse_residual(&lv.mesh, &self.physics, &w0)?.residual;
        Ok(CoarseState {
            w: w0.clone(),
            w0,
            r_star,
            r0,
            alpha,
        })
    }

    /// Recursive coarse-grid correction below the finest level. Returns the
    /// corrected state of `level`, or `None` if the level was skipped.
    fn correct_level(&mut self, level: usize, mut st: CoarseState) -> Result<Option<CoarseState>> {
        if !self.coarse_smooth(level, &mut st)? {
            return Ok(None);
        }
        if level + 1 < self.hierarchy.n_levels() {
            self.counters.coarse_evals += 1;
            let r = coarse_residual(&self.hierarchy.levels[level].mesh, &self.physics, &st.w)?.residual;
            let forced = st.forced(&r);
            let next = self.descend(level + 1, &st.w, &forced, &st.alpha)?;
            if let Some(c) = self.correct_level(level + 1, next)? {
                let parent_of = self.hierarchy.levels[level + 1]
                    .parent_of
                    .clone()
                    .expect("coarse level");
                let mut ones = Vec::new();
                let alpha = self.relaxation_alpha(&st.alpha, &mut ones).to_vec();
                self.counters.dropped_updates +=
                    prolong_correct(&self.physics.gas, &parent_of, &mut st.w, &alpha, &c.w, &c.w0);
                if !self.coarse_smooth(level, &mut st)? {
                    return Ok(None);
                }
            }
        }
        Ok(Some(st))
    }

    /// One V-cycle. Returns the density residual at the start of the cycle.
    pub fn vcycle(&mut self, field: &mut Field) -> Result<f64> {
        let mut norm = self.implicit_step(field)?;
        for _ in 1..self.settings.pre_smooth {
            self.implicit_step(field)?;
        }
        if self.settings.pre_smooth == 0 {
            let ev = self.evaluate_fine(field)?;
            norm = density_residual(self.mesh(), &ev.residual);
        }
        if self.hierarchy.n_levels() > 1 {
            let ev = self.evaluate_fine(field)?;
            let st = self.descend(1, &field.w, &ev.residual, &field.alpha)?;
            if let Some(c) = self.correct_level(1, st)? {
                let parent_of = self.hierarchy.levels[1].parent_of.clone().expect("coarse level");
                let mut ones = Vec::new();
                let alpha = self.relaxation_alpha(&field.alpha, &mut ones).to_vec();
                self.counters.dropped_updates +=
                    prolong_correct(&self.physics.gas, &parent_of, &mut field.w, &alpha, &c.w, &c.w0);
            }
        }
        for _ in 0..self.settings.post_smooth {
            self.implicit_step(field)?;
        }
        if let Some(c) = field.first_invalid(&self.physics.gas) {
            return Err(Error::Diverged {
                iteration: 0,
                cell: c,
                what: "inadmissible state after V-cycle".into(),
            });
        }
        Ok(norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agglomeration::{build_hierarchy, DEFAULT_SKEWNESS_LIMIT};
    use crate::boundary::Boundary;
    use crate::gas::Primitive;
    use crate::kinetic::CollisionModel;
    use crate::mesh::{generate_quad_grid, BoundaryKind};

    fn physics() -> Physics {
        let gas = Gas::default();
        let fs = gas.to_conserved(&Primitive {
            rho: 1.0,
            u: 0.3,
            v: 0.1,
            p: 1.0 / 1.4,
        });
        Physics {
            gas,
            boundary: Boundary::new(gas, fs),
            collision: CollisionModel { mu: 1e-3, c_art: 1.0 },
        }
    }

    #[test]
    fn restriction_examples() {
        let fine = generate_quad_grid(2, 1, 2.0, 1.0, BoundaryKind::Farfield).unwrap();
        let mut fine = fine;
        fine.cells[0].volume = 1.0;
        fine.cells[1].volume = 3.0;
        let mut coarse = crate::agglomeration::coarsen_level(&fine, DEFAULT_SKEWNESS_LIMIT, 1)
            .unwrap()
            .mesh;
        coarse.cells[0].volume = 4.0;
        let kids = vec![vec![0, 1]];
        let w = restrict_state(&fine, &coarse, &kids, &[Conserved([1.0; 4]), Conserved([5.0; 4])]);
        assert_eq!(w[0], Conserved([4.0; 4]));
        let r = restrict_residual(
            &kids,
            &[Conserved([0.3, -1.0, 2.0, 0.5]), Conserved([-0.3, 1.0, -2.0, -0.5])],
        );
        assert_eq!(r[0], Conserved::ZERO);
        assert_eq!(restrict_alpha(&kids, &[0.3, 0.9]), vec![0.3]);
    }

    #[test]
    fn prolongation_limits() {
        let gas = Gas::default();
        let w = Conserved([1.0, 0.1, 0.0, 2.0]);
        let mut fine = vec![w; 3];
        let parent = [0, 0, 1];
        let c = [Conserved([1.1, 0.2, 0.0, 2.1]), Conserved([0.9, 0.1, 0.0, 1.9])];
        let c0 = [w, w];
        prolong_correct(&gas, &parent, &mut fine, &[0.0, 1.0, 0.5], &c, &c0);
        assert_eq!(fine[0], w);
        assert_eq!(fine[1], c[0]);
        assert!((fine[2] - Conserved([0.95, 0.1, 0.0, 1.95])).max_abs() < 1e-15);
        // a correction that empties the cell is halved until admissible
        let mut f = vec![w];
        let bad = [Conserved([-1.0, 0.1, 0.0, -2.0])];
        assert_eq!(prolong_correct(&gas, &[0], &mut f, &[1.0], &bad, &[w]), 0);
        assert!(gas.is_admissible(&f[0]));
        assert!((f[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forcing_identity_is_exact() {
        let st = CoarseState {
            w: vec![],
            w0: vec![],
            r_star: vec![Conserved([0.1, 0.2, 1e-17, 3.0]), Conserved([1e20, -1.0, 0.3, 0.7])],
            r0: vec![Conserved([0.3, 1e-9, 5.0, -2.0]), Conserved([1.0, 1e-30, 0.1, 0.2])],
            alpha: vec![],
        };
        assert_eq!(st.forced(&st.r0), st.r_star);
        for (f, (s, r)) in st.forcing().iter().zip(st.r_star.iter().zip(&st.r0)) {
            assert_eq!(*f, *s - *r);
        }
    }

    #[test]
    fn freestream_is_a_vcycle_fixed_point() {
        let mesh = generate_quad_grid(8, 8, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        let h = build_hierarchy(mesh, 3, DEFAULT_SKEWNESS_LIMIT);
        assert_eq!(h.n_levels(), 3);
        let mut solver = Solver::new(h, physics(), SolverSettings::default());
        let mut field = solver.initial_field();
        let before = field.clone();
        solver.vcycle(&mut field).unwrap();
        for (a, b) in field.w.iter().zip(&before.w) {
            assert!((*a - *b).max_abs() < 1e-12);
        }
        assert_eq!(solver.counters.fine_evals, 2);
    }

    #[test]
    fn single_level_cycle_is_one_implicit_step() {
        let mesh = generate_quad_grid(6, 6, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        let ph = physics();
        let mut a = Solver::new(Hierarchy::single(mesh.clone()), ph, SolverSettings::default());
        let mut b = Solver::new(Hierarchy::single(mesh), ph, SolverSettings::default());
        let mut fa = a.initial_field();
        for (i, w) in fa.w.iter_mut().enumerate() {
            w[0] += 0.01 * (i as f64 * 0.7).sin();
        }
        let mut fb = fa.clone();
        a.vcycle(&mut fa).unwrap();
        b.implicit_step(&mut fb).unwrap();
        assert_eq!(fa, fb);
    }

    #[test]
    fn zero_df_equals_explicit_update() {
        // with alpha = 0 in the hybrid diagonal the implicit step reduces to
        // the explicit local-time-stepping update
        let mesh = generate_quad_grid(5, 5, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        let ph = physics();
        let solver = Solver::new(Hierarchy::single(mesh), ph, SolverSettings::default());
        let mut field = solver.initial_field();
        for (i, w) in field.w.iter_mut().enumerate() {
            w[3] += 0.02 * (i as f64).cos();
        }
        let ev = solver.fine_operator().evaluate(&field).unwrap();
        let s = solver.settings;
        let dti: Vec<f64> = ev.radii.dt_cell.iter().map(|d| s.cfl_implicit * d).collect();
        let dte: Vec<f64> = ev.radii.dt_cell.iter().map(|d| s.cfl_explicit * d).collect();
        let zeros = vec![0.0; field.len()];
        let lin = Linearization {
            mesh: solver.mesh(),
            gas: &ph.gas,
            w: &field.w,
            residual: &ev.residual,
            alpha: &zeros,
            face_radius: &ev.radii.face,
            dt_implicit: &dti,
            dt_explicit: &dte,
        };
        let dw = lin.solve(&solver.colors[0], 6).unwrap();
        for (i, c) in solver.mesh().cells.iter().enumerate() {
            let expect = (-dte[i] / c.volume) * ev.residual[i];
            assert!((dw[i] - expect).max_abs() <= 1e-14 * expect.max_abs().max(1e-300));
        }
    }
}
