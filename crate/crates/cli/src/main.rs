use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cgks::agglomeration::{build_hierarchy, DEFAULT_SKEWNESS_LIMIT};
use cgks::coloring::{color_mesh, validate_coloring};
use cgks::driver::{self, CaseConfig};
use cgks::mesh::{load_mesh, Mesh};

#[derive(Parser)]
#[command(
    name = "cgks",
    version,
    about = "Compact gas-kinetic solver with geometric multigrid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the case described by an INI configuration file.
    Run { config: PathBuf },
    /// Print mesh size and geometry statistics.
    MeshInfo { mesh: PathBuf },
    /// Color the mesh and print the color group sizes.
    Color {
        mesh: PathBuf,
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Build the coarse levels and print their sizes and volume balance.
    Coarsen {
        mesh: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_SKEWNESS_LIMIT)]
        skewness_limit: f64,
    },
}

fn read_mesh(path: &Path) -> anyhow::Result<Mesh> {
    load_mesh(path).with_context(|| format!("loading {}", path.display()))
}

fn mesh_info(path: &Path) -> anyhow::Result<()> {
    let m = read_mesh(path)?;
    println!("nodes {}", m.nodes.len());
    println!("cells {}", m.n_cells());
    println!("faces {} ({} interior)", m.faces.len(), m.n_interior_faces());
    println!("total volume {:.12e}", m.total_volume());
    println!("max neighbors {}", m.max_neighbors());
    let (vmin, vmax) = m
        .cells
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(c.volume), b.max(c.volume)));
    println!("cell volume range [{vmin:.6e}, {vmax:.6e}]");
    for p in &m.patches {
        let area: f64 = p.faces.iter().map(|&f| m.faces[f].area).sum();
        println!(
            "patch {} '{}' {}: {} faces, length {:.12e}",
            p.id,
            p.name,
            p.kind,
            p.faces.len(),
            area
        );
    }
    Ok(())
}

fn color(path: &Path, start: usize) -> anyhow::Result<()> {
    let m = read_mesh(path)?;
    anyhow::ensure!(start < m.n_cells(), "start cell {start} out of range");
    let colors = color_mesh(&m, start);
    println!("n_colors {}", colors.n_colors);
    for (k, n) in colors.group_sizes().iter().enumerate() {
        println!("color {} cells {}", k + 1, n);
    }
    let bad = validate_coloring(&m, &colors);
    anyhow::ensure!(bad.is_empty(), "{} faces join same-colored cells", bad.len());
    Ok(())
}

fn coarsen(path: &Path, levels: usize, skewness_limit: f64) -> anyhow::Result<()> {
    let m = read_mesh(path)?;
    let h = build_hierarchy(m, levels, skewness_limit);
    for (k, l) in h.levels.iter().enumerate() {
        let mesh = &l.mesh;
        let worst = if k == 0 {
            0.0
        } else {
            let fine = &h.levels[k - 1].mesh;
            l.children_of
                .iter()
                .enumerate()
                .map(|(c, ch)| {
                    let s: f64 = ch.iter().map(|&i| fine.cells[i].volume).sum();
                    (s - mesh.cells[c].volume).abs() / mesh.cells[c].volume
                })
                .fold(0.0, f64::max)
        };
        println!(
            "level {k} cells {} faces {} volume {:.12e} max relative volume residual {worst:.3e}",
            mesh.n_cells(),
            mesh.faces.len(),
            mesh.total_volume()
        );
    }
    if h.n_levels() < levels {
        println!("coarsening stopped after {} level(s)", h.n_levels());
    }
    Ok(())
}

fn run(path: &Path) -> anyhow::Result<bool> {
    let config = CaseConfig::load(path)?;
    let mesh = config.build_mesh()?;
    let out = driver::run_mode(mesh, &config, config.mode)?;
    let last = out.history.last();
    println!(
        "iterations {} converged {} residual {:.3e}",
        out.history.len(),
        out.converged,
        last.map_or(0.0, |r| r.residual_l2)
    );
    println!("fine residual evaluations {}", out.counters.fine_evals);
    let f = out.forces;
    println!("cd {:.6} cl {:.3e}", f.cd, f.cl);
    if let Some(a) = f.separation_angle_deg {
        println!("separation angle {a:.2} deg");
    }
    if let Some(l) = f.wake_length {
        println!("wake length {l:.4}");
    }
    Ok(out.converged)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let pool = match driver::thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Run { config } => run(config),
        Command::MeshInfo { mesh } => mesh_info(mesh).map(|_| true),
        Command::Color { mesh, start } => color(mesh, *start).map(|_| true),
        Command::Coarsen {
            mesh,
            levels,
            skewness_limit,
        } => coarsen(mesh, *levels, *skewness_limit).map(|_| true),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
