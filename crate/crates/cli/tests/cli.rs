use std::path::Path;
use std::process::{Command, Output};

use cgks::mesh::{generate_quad_grid, save_mesh, BoundaryKind};

fn cgks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgks"))
        .args(args)
        .env("SOLVER_THREADS", "1")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn box_mesh(dir: &Path) -> String {
    let path = dir.join("box.mesh");
    let m = generate_quad_grid(4, 3, 2.0, 1.0, BoundaryKind::Farfield).unwrap();
    save_mesh(&m, &path).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn mesh_info_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgks(&["mesh-info", &box_mesh(dir.path())]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("cells 12"), "{s}");
    assert!(s.contains("faces 31 (17 interior)"), "{s}");
}

#[test]
fn color_reports_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgks(&["color", &box_mesh(dir.path())]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("n_colors 2"), "{s}");
    assert!(s.contains("color 1 cells 6") && s.contains("color 2 cells 6"), "{s}");
}

#[test]
fn coarsen_reports_levels() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgks(&["coarsen", &box_mesh(dir.path()), "--levels", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("level 0 cells 12"), "{s}");
    assert!(s.contains("level 1"), "{s}");
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = box_mesh(dir.path());
    // uniform flow in a farfield box converges immediately
    let cfg = dir.path().join("free.ini");
    std::fs::write(&cfg, format!("[mesh]\nfile = {mesh}\n[solver]\nmax_iters = 3\n")).unwrap();
    let o = cgks(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let cfg = dir.path().join("cyl.ini");
    std::fs::write(
        &cfg,
        "[mesh]\nradius = 0.5\nouter_radius = 6\nn_radial = 8\nn_circumferential = 16\nfirst_spacing = 0.05\n\
         [solver]\nmax_iters = 2\n[output]\ndirectory = out\n",
    )
    .unwrap();
    let o = cgks(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("out/solution.vtk").exists());
    assert!(dir.path().join("out/history.csv").exists());

    let o = cgks(&["run", dir.path().join("missing.ini").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.ini"));
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cgks"))
        .args(["mesh-info", &box_mesh(dir.path())])
        .env("SOLVER_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
