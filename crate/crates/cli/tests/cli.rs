use std::path::Path;
use std::process::{Command, Output};

fn hna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hna")).args(args).output().expect("binary runs")
}

fn first_line(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines().next().unwrap_or("").to_string()
}

fn find(dir: &Path, prefix: &str) -> std::path::PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .unwrap_or_else(|| panic!("no {prefix}* in {}", dir.display()))
}

#[test]
fn specfun_table_to_stdout() {
    let out = hna(&["validate-specfun"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 5);
}

#[test]
fn space_describe() {
    let out = hna(&["space", "describe", "--k", "10", "-p", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("side,side_kind,phase,s_lo,s_hi,degree,first_dof"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    for args in [
        vec!["solve", "--k", "5", "--ppw", "2", "--out", out_dir],
        vec!["solve", "--k", "100", "--out", out_dir],
        vec!["solve", "--k", "-1", "--out", out_dir],
        vec!["solve", "--alpha", "north", "--out", out_dir],
    ] {
        let out = hna(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn solve_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hna(&[
        "solve",
        "--builtin",
        "square",
        "--alpha",
        "0.3",
        "--k",
        "2",
        "-p",
        "1",
        "--boundary-points",
        "50",
        "--circle-points",
        "40",
        "--farfield-points",
        "40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["n"].as_u64().unwrap() > 0);
    assert_eq!(first_line(&find(dir.path(), "boundary_")), "side,s,s_over_2pi,re,im,abs");
    assert_eq!(first_line(&find(dir.path(), "circle_")), "t,re,im,abs");
    assert_eq!(first_line(&find(dir.path(), "farfield_")), "t,re,im,abs");
    assert!(dir.path().join("config.toml").exists());
}

#[test]
fn convergence_writes_errors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = hna(&[
        "convergence",
        "--builtin",
        "square",
        "--alphas",
        "0.3",
        "--ks",
        "2",
        "--ps",
        "1",
        "--reference-p",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header = first_line(&dir.path().join("errors.csv"));
    assert!(header.starts_with("alpha,k,p,N,l2_abs,l2_rel,l1_rel,cond,dof_per_wavelength,wall_seconds"), "{header}");
}
