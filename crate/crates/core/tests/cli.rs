use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerr-res"))
        .args(args)
        .current_dir(cwd)
        .env("KERR_RES_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn validate_gates_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["validate-gates"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn poles_at_the_critical_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["poles", "--delta", "-2", "--j", "2", "--gamma", "0.5"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("+4.000000000000 -0.500000000000i"), "{out}");
    assert!(out.contains("Hessian eigenvalues"));
}

#[test]
fn pid_on_a_joint_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("xor.csv");
    std::fs::write(&path, "s,x1,x2,prob\n0,0,0,0.25\n1,0,1,0.25\n1,1,0,0.25\n0,1,1,0.25\n").unwrap();
    let o = cli(&["pid", path.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("Syn          = 1.000000000"));
}

#[test]
fn schema_errors_exit_nonzero_with_the_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "regime = \"quantum\"\n[sampling]\nrealizations = -1\n").unwrap();
    let o = cli(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sampling.realizations"));

    std::fs::write(&path, "regime = \"classical\"\n").unwrap();
    let o = cli(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid presets"));

    let o = cli(&["figure", "fig1"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn run_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(
        &cfg,
        "name = \"tiny\"\nregime = \"cumulant\"\n[sweep]\nparameter = \"j\"\nvalues = [1.5, 2.0]\n\
         [sampling]\nintervals = 400\nrealizations = 3\nseed = 11\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert!(cli(&["run", cfg, "--out", "a.csv"], dir.path()).status.success());
    assert!(cli(&["run", cfg, "--out", "b.csv"], dir.path()).status.success());
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.csv.meta.toml"), read("b.csv.meta.toml"));
    assert_eq!(String::from_utf8(read("a.csv")).unwrap().lines().count(), 3);
}

#[test]
fn figure_listing_and_analytic_figures() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["figure"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 11);
    let o = cli(&["figure", "fig5", "--out-dir", "out"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("out/fig5.csv")).unwrap();
    assert!(text.starts_with("J,re_slow,im_slow,re_fast,im_fast"));
}

#[test]
fn shipped_configs_parse() {
    let dir = repo_root().join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            kerr_reservoir::expctl::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
