//! INI case configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::agglomeration::DEFAULT_SKEWNESS_LIMIT;
use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::gas::{Gas, Primitive};
use crate::kinetic::CollisionModel;
use crate::mesh::{generate_cylinder_mesh, load_mesh, BoundaryKind, Mesh};
use crate::multigrid::SolverSettings;
use crate::residual::Physics;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Explicit,
    Multigrid,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "explicit" => Ok(Mode::Explicit),
            "multigrid" | "mg" => Ok(Mode::Multigrid),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Where the mesh comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Cylinder {
        radius: f64,
        outer_radius: f64,
        n_radial: usize,
        n_circumferential: usize,
        first_spacing: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseConfig {
    pub mach_inf: f64,
    /// `inf` (or 0) selects inviscid flow.
    pub reynolds: f64,
    pub aoa_deg: f64,
    pub gamma: f64,
    pub reference_length: f64,
    pub c_art: f64,
    pub mode: Mode,
    pub mesh: MeshSource,
    /// Boundary kind overrides by patch name.
    pub boundary: Vec<(String, BoundaryKind)>,
    pub settings: SolverSettings,
    pub mg_levels: usize,
    pub skewness_limit: f64,
    /// Relative density-residual target.
    pub convergence_tol: f64,
    /// Absolute density-residual level treated as converged (machine zero).
    pub absolute_tol: f64,
    pub max_iters: usize,
    pub wall_patch: String,
    pub output_dir: Option<PathBuf>,
    pub solution_file: String,
    pub history_file: String,
    /// Write the solution every this many iterations; 0 writes it at the end only.
    pub output_every: usize,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            mach_inf: 0.15,
            reynolds: 40.0,
            aoa_deg: 0.0,
            gamma: 1.4,
            reference_length: 1.0,
            c_art: 1.0,
            mode: Mode::Multigrid,
            mesh: MeshSource::Cylinder {
                radius: 0.5,
                outer_radius: 30.0,
                n_radial: 48,
                n_circumferential: 80,
                first_spacing: 0.01,
            },
            boundary: Vec::new(),
            settings: SolverSettings::default(),
            mg_levels: 3,
            skewness_limit: DEFAULT_SKEWNESS_LIMIT,
            convergence_tol: 1e-10,
            absolute_tol: 1e-13,
            max_iters: 5000,
            wall_patch: "wall".into(),
            output_dir: None,
            solution_file: "solution.vtk".into(),
            history_file: "history.csv".into(),
            output_every: 0,
        }
    }
}

fn parse<T: FromStr>(section: &str, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key} = '{v}' is not valid")))
}

fn parse_bool(section: &str, key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("[{section}] {key} = '{v}' is not a boolean"))),
    }
}

impl CaseConfig {
    pub fn load(path: &Path) -> Result<CaseConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        CaseConfig::from_ini_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parse INI text; relative paths resolve against `base_dir`.
    pub fn from_ini_str(text: &str, base_dir: &Path) -> Result<CaseConfig> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = CaseConfig::default();
        let mut cyl = match c.mesh.clone() {
            MeshSource::Cylinder {
                radius,
                outer_radius,
                n_radial,
                n_circumferential,
                first_spacing,
            } => (radius, outer_radius, n_radial, n_circumferential, first_spacing),
            MeshSource::File(_) => unreachable!(),
        };
        let mut mesh_file = None;
        for (sec, props) in ini.iter() {
            let sec = sec.unwrap_or("");
            for (k, v) in props.iter() {
                let unknown = || Error::Config(format!("unknown key [{sec}] {k}"));
                match sec {
                    "case" => match k {
                        "mach_inf" => c.mach_inf = parse(sec, k, v)?,
                        "reynolds" => c.reynolds = parse(sec, k, v)?,
                        "aoa_deg" => c.aoa_deg = parse(sec, k, v)?,
                        "gamma" => c.gamma = parse(sec, k, v)?,
                        "reference_length" => c.reference_length = parse(sec, k, v)?,
                        "c_art" => c.c_art = parse(sec, k, v)?,
                        "mode" => c.mode = v.parse()?,
                        _ => return Err(unknown()),
                    },
                    "mesh" => match k {
                        "file" => mesh_file = Some(base_dir.join(v.trim())),
                        "generator" if v.trim() == "cylinder" => {}
                        "generator" => return Err(Error::Config(format!("unknown mesh generator '{v}'"))),
                        "radius" => cyl.0 = parse(sec, k, v)?,
                        "outer_radius" => cyl.1 = parse(sec, k, v)?,
                        "n_radial" => cyl.2 = parse(sec, k, v)?,
                        "n_circumferential" => cyl.3 = parse(sec, k, v)?,
                        "first_spacing" => cyl.4 = parse(sec, k, v)?,
                        _ => return Err(unknown()),
                    },
                    "solver" => match k {
                        "cfl_implicit" => c.settings.cfl_implicit = parse(sec, k, v)?,
                        "cfl_explicit" => c.settings.cfl_explicit = parse(sec, k, v)?,
                        "lusgs_sweeps" => c.settings.lusgs_sweeps = parse(sec, k, v)?,
                        "convergence_tol" => c.convergence_tol = parse(sec, k, v)?,
                        "absolute_tol" => c.absolute_tol = parse(sec, k, v)?,
                        "max_iters" => c.max_iters = parse(sec, k, v)?,
                        "df_relaxation" => c.settings.df_relaxation = parse_bool(sec, k, v)?,
                        _ => return Err(unknown()),
                    },
                    "multigrid" => match k {
                        "mg_levels" => c.mg_levels = parse(sec, k, v)?,
                        "pre_smooth" => c.settings.pre_smooth = parse(sec, k, v)?,
                        "post_smooth" => c.settings.post_smooth = parse(sec, k, v)?,
                        "coarse_lusgs_sweeps" => c.settings.coarse_lusgs_sweeps = parse(sec, k, v)?,
                        "skewness_limit" => c.skewness_limit = parse(sec, k, v)?,
                        _ => return Err(unknown()),
                    },
                    "boundary" => c.boundary.push((k.to_string(), parse(sec, k, v)?)),
                    "output" => match k {
                        "directory" => c.output_dir = Some(base_dir.join(v.trim())),
                        "solution" => c.solution_file = v.trim().to_string(),
                        "history" => c.history_file = v.trim().to_string(),
                        "every" => c.output_every = parse(sec, k, v)?,
                        "wall_patch" => c.wall_patch = v.trim().to_string(),
                        _ => return Err(unknown()),
                    },
                    _ => return Err(Error::Config(format!("unknown section [{sec}]"))),
                }
            }
        }
        c.mesh = match mesh_file {
            Some(p) => MeshSource::File(p),
            None => MeshSource::Cylinder {
                radius: cyl.0,
                outer_radius: cyl.1,
                n_radial: cyl.2,
                n_circumferential: cyl.3,
                first_spacing: cyl.4,
            },
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.mach_inf > 0.0 && self.mach_inf.is_finite()) {
            return bad("mach_inf must be positive");
        }
        if !(self.reynolds >= 0.0) {
            return bad("reynolds must be non-negative (0 or inf for inviscid)");
        }
        if !(self.gamma > 1.0 && self.gamma < 3.0) {
            return bad("gamma must lie in (1, 3)");
        }
        if !(self.reference_length > 0.0) {
            return bad("reference_length must be positive");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        let s = &self.settings;
        if !(s.cfl_implicit > 0.0 && s.cfl_explicit > 0.0) {
            return bad("CFL numbers must be positive");
        }
        if s.lusgs_sweeps == 0 || s.coarse_lusgs_sweeps == 0 {
            return bad("sweep counts must be at least 1");
        }
        if self.mg_levels == 0 {
            return bad("mg_levels must be at least 1");
        }
        Ok(())
    }

    pub fn is_viscous(&self) -> bool {
        self.reynolds > 0.0 && self.reynolds.is_finite()
    }

    /// Nondimensional free stream: `rho = 1`, sound speed 1, `U = Ma`.
    pub fn physics(&self) -> Physics {
        let gas = Gas::new(self.gamma);
        let a = self.aoa_deg.to_radians();
        let fs = gas.to_conserved(&Primitive {
            rho: 1.0,
            u: self.mach_inf * a.cos(),
            v: self.mach_inf * a.sin(),
            p: 1.0 / self.gamma,
        });
        let mu = if self.is_viscous() {
            self.mach_inf * self.reference_length / self.reynolds
        } else {
            0.0
        };
        Physics {
            gas,
            boundary: Boundary::new(gas, fs),
            collision: CollisionModel { mu, c_art: self.c_art },
        }
    }

    /// Build or load the mesh and apply the boundary overrides.
    pub fn build_mesh(&self) -> Result<Mesh> {
        let mut mesh = match &self.mesh {
            MeshSource::File(p) => load_mesh(p)?,
            MeshSource::Cylinder {
                radius,
                outer_radius,
                n_radial,
                n_circumferential,
                first_spacing,
            } => generate_cylinder_mesh(*radius, *outer_radius, *n_radial, *n_circumferential, *first_spacing)?,
        };
        for (name, kind) in &self.boundary {
            if !mesh.set_patch_kind(name, *kind) {
                return Err(Error::Config(format!("[boundary] unknown patch '{name}'")));
            }
        }
        Ok(mesh)
    }
}
