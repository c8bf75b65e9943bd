//! Case setup, time marching, diagnostics and output.

pub mod config;
pub mod forces;
pub mod output;

use std::path::Path;
use std::time::Instant;

pub use config::{CaseConfig, MeshSource, Mode};
pub use forces::{force_coefficients, separation_angle, wake_length, Forces};
pub use output::{read_vtk_cell_data, write_history, write_solution, CellTags, ConvergenceRecord};

use crate::agglomeration::{build_hierarchy, Hierarchy};
use crate::error::{Error, Result};
use crate::gas::Conserved;
use crate::mesh::Mesh;
use crate::multigrid::{Counters, Solver};
use crate::residual::Field;

/// Result of a run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub field: Field,
    pub history: Vec<ConvergenceRecord>,
    /// Fine-level residual evaluations at each history record, cumulative.
    pub fine_evals: Vec<usize>,
    pub converged: bool,
    pub counters: Counters,
    pub forces: Forces,
}

/// `residual / first`; zero when the first residual is zero.
pub fn residual_norm(residual: f64, first: f64) -> f64 {
    if first > 0.0 {
        residual / first
    } else {
        0.0
    }
}

/// Worker pool capped by the `SOLVER_THREADS` environment variable.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SOLVER_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("SOLVER_THREADS = '{v}' is not a count")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Solver for `mesh` with the hierarchy depth implied by the mode.
pub fn prepare(mesh: Mesh, config: &CaseConfig) -> Solver {
    let hierarchy = match config.mode {
        Mode::Explicit => Hierarchy::single(mesh),
        Mode::Multigrid => build_hierarchy(mesh, config.mg_levels, config.skewness_limit),
    };
    Solver::new(hierarchy, config.physics(), config.settings)
}

/// Cd, Cl, separation angle and wake length of the current field.
pub fn compute_forces(solver: &Solver, field: &Field, face_flux: &[Conserved], config: &CaseConfig) -> Result<Forces> {
    let mesh = solver.mesh();
    let (cd, cl) = force_coefficients(
        mesh,
        &solver.physics,
        face_flux,
        &config.wall_patch,
        config.reference_length,
    )?;
    let viscous = config.is_viscous();
    Ok(Forces {
        cd,
        cl,
        separation_angle_deg: if viscous {
            separation_angle(mesh, face_flux, &config.wall_patch)?
        } else {
            None
        },
        wake_length: wake_length(mesh, field, &config.wall_patch, config.reference_length)?,
    })
}

fn cell_tags(solver: &Solver) -> CellTags {
    CellTags {
        color: solver.colors[0].color_of.clone(),
        mg_parent: match solver.hierarchy.levels.get(1) {
            Some(l) => l
                .parent_of
                .as_ref()
                .map_or(Vec::new(), |p| p.iter().map(|&c| c as i64).collect()),
            None => Vec::new(),
        },
    }
}

fn write_snapshot(solver: &Solver, field: &Field, config: &CaseConfig, name: &str) -> Result<()> {
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        write_solution(
            solver.mesh(),
            &solver.physics.gas,
            field,
            &cell_tags(solver),
            &dir.join(name),
        )?;
    }
    Ok(())
}

fn write_records(history: &[ConvergenceRecord], config: &CaseConfig) -> Result<()> {
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        write_history(history, &dir.join(&config.history_file))?;
    }
    Ok(())
}

/// March `field` with explicit steps or V-cycles until the relative density
/// residual reaches `tol` or `max_iters` iterations have run.
pub fn march(
    solver: &mut Solver,
    field: &mut Field,
    config: &CaseConfig,
    mode: Mode,
    max_iters: usize,
    tol: f64,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let has_wall = solver.mesh().patch_by_name(&config.wall_patch).is_some();
    let mut history = Vec::new();
    let mut fine_evals = Vec::new();
    let mut first = None;
    let mut converged = false;
    let mut last_good = field.clone();
    for iter in 1..=max_iters {
        let step = match mode {
            Mode::Explicit => solver.explicit_step(field),
            Mode::Multigrid => solver.vcycle(field),
        };
        let norm = match step {
            Ok(n) => n,
            Err(e) => {
                let e = match e {
                    Error::Diverged { cell, what, .. } => Error::Diverged {
                        iteration: iter,
                        cell,
                        what,
                    },
                    other => other,
                };
                log::error!("{e}; writing the last good state");
                write_snapshot(solver, &last_good, config, &config.solution_file)?;
                write_records(&history, config)?;
                return Err(e);
            }
        };
        let first = *first.get_or_insert(norm);
        let rel = residual_norm(norm, first);
        let (cd, cl) = if has_wall {
            force_coefficients(
                solver.mesh(),
                &solver.physics,
                &solver.last_face_flux,
                &config.wall_patch,
                config.reference_length,
            )?
        } else {
            (0.0, 0.0)
        };
        let rec = ConvergenceRecord {
            iter,
            wall_seconds: start.elapsed().as_secs_f64(),
            residual_l2: rel,
            cd,
            cl,
        };
        log::debug!("iter {iter} residual {rel:e} cd {cd:.6} cl {cl:.3e}");
        history.push(rec);
        fine_evals.push(solver.counters.fine_evals);
        if config.output_every > 0 && iter % config.output_every == 0 {
            write_snapshot(solver, field, config, &config.solution_file)?;
        }
        if rel <= tol || norm <= config.absolute_tol {
            converged = true;
            break;
        }
        last_good.clone_from(field);
    }
    let forces = if has_wall {
        compute_forces(solver, field, &solver.last_face_flux, config)?
    } else {
        Forces::default()
    };
    write_snapshot(solver, field, config, &config.solution_file)?;
    write_records(&history, config)?;
    Ok(RunOutcome {
        field: field.clone(),
        history,
        fine_evals,
        converged,
        counters: solver.counters,
        forces,
    })
}

/// Run `mesh` with `config` in `mode`.
pub fn run_mode(mesh: Mesh, config: &CaseConfig, mode: Mode) -> Result<RunOutcome> {
    let cfg = CaseConfig { mode, ..config.clone() };
    let mut solver = prepare(mesh, &cfg);
    let mut field = solver.initial_field();
    march(&mut solver, &mut field, &cfg, mode, cfg.max_iters, cfg.convergence_tol)
}

/// Explicit local-time-stepping iteration on the finest mesh.
pub fn run_explicit(mesh: Mesh, config: &CaseConfig) -> Result<RunOutcome> {
    run_mode(mesh, config, Mode::Explicit)
}

/// Multigrid V-cycles.
pub fn run_multigrid(mesh: Mesh, config: &CaseConfig) -> Result<RunOutcome> {
    run_mode(mesh, config, Mode::Multigrid)
}

/// Load the configuration and mesh, then run the configured mode.
pub fn run_config(path: &Path) -> Result<RunOutcome> {
    let config = CaseConfig::load(path)?;
    let mesh = config.build_mesh()?;
    run_mode(mesh, &config, config.mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_quad_grid, BoundaryKind};

    #[test]
    fn norm_examples() {
        assert_eq!(residual_norm(3.0, 3.0), 1.0);
        assert_eq!(residual_norm(0.0, 3.0), 0.0);
        assert_eq!(residual_norm(6.0, 3.0), 2.0);
        assert_eq!(residual_norm(1.0, 0.0), 0.0);
    }

    fn box_config(mode: Mode) -> CaseConfig {
        CaseConfig {
            mode,
            mach_inf: 0.3,
            aoa_deg: 10.0,
            max_iters: 5,
            ..CaseConfig::default()
        }
    }

    #[test]
    fn freestream_box_converges_immediately() {
        for mode in [Mode::Explicit, Mode::Multigrid] {
            let mesh = generate_quad_grid(8, 8, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
            let cfg = box_config(mode);
            let out = run_mode(mesh, &cfg, mode).unwrap();
            assert!(out.converged);
            assert_eq!(out.history.len(), 1);
            assert_eq!(out.history[0].residual_l2, 1.0);
        }
    }

    #[test]
    fn max_iters_bounds_history() {
        let mesh = generate_quad_grid(6, 6, 1.0, 1.0, BoundaryKind::Farfield).unwrap();
        let cfg = box_config(Mode::Explicit);
        let mut solver = prepare(mesh, &cfg);
        let mut field = solver.initial_field();
        field.w[10][0] *= 1.05;
        let out = march(&mut solver, &mut field, &cfg, Mode::Explicit, 5, 1e-30).unwrap();
        assert!(!out.converged);
        assert_eq!(out.history.len(), 5);
        assert_eq!(out.fine_evals, vec![1, 2, 3, 4, 5]);
    }
}
