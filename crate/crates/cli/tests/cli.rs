use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("demo/burgers_shock.toml")
}

fn homlab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_homlab"));
    cmd.args(args).env_remove("HOMLAB_OUT");
    if let Some(p) = env_out {
        cmd.env("HOMLAB_OUT", p);
    }
    cmd.output().expect("spawn homlab")
}

fn run_demo(out: &Path, extra: &[&str]) -> Output {
    let config = demo();
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    homlab(&args, None)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_columns(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn demo_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_demo(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = json(&demo().with_file_name("burgers_shock.golden.json"));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary, golden["summary"]);
    for (name, values) in golden["values"].as_object().unwrap() {
        let report = json(&dir.path().join(name).join("report.json"));
        for (key, want) in values.as_object().unwrap() {
            let got = report["values"][key].as_f64().unwrap_or_else(|| panic!("{name}.{key} missing"));
            let want = want.as_f64().unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "{name}.{key}: {got} vs golden {want}"
            );
        }
    }
}

#[test]
fn demo_agrees_with_burgers_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_demo(dir.path(), &[]).status.code(), Some(0));
    // Burgers cells are constant, so Abar(p) = p^2/2 and v(0) = p.
    for row in csv_columns(&dir.path().join("table/series/table.csv")) {
        let p = row[0];
        assert!((row[1] - 0.5 * p * p).abs() < 1e-8, "{row:?}");
        assert!((row[2] - p).abs() < 1e-8, "{row:?}");
    }
    // u' = (u^2 - 1)/2 with u(0) = 0.
    let rows = csv_columns(&dir.path().join("shock/series/profile.csv"));
    assert!(rows.len() > 100);
    for row in rows {
        assert!((row[1] + (0.5 * row[0]).tanh()).abs() < 1e-7, "{row:?}");
    }
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_demo(a.path(), &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run_demo(b.path(), &["--jobs", "4"]).status.code(), Some(0));
    let mut files = Vec::new();
    let mut stack = vec![a.path().to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    assert!(files.iter().any(|p| p.extension().is_some_and(|e| e == "csv")));
    for f in files {
        let rel = f.strip_prefix(a.path()).unwrap();
        let other = b.path().join(rel);
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(&other).unwrap(), "{}", rel.display());
    }
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[flux]\nfamily = \"burgers\"\n[[experiments]]\nkind = \"cell_table\"\np_min = 0.0\np_max = 1.0\nn_pointz = 5\n",
    );
    let out = homlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_pointz"));

    let cfg = write_config(
        dir.path(),
        "[flux]\nfamily = \"burgers\"\n[[experiments]]\nkind = \"heat_kernel\"\n",
    );
    let out = homlab(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiments[0].grid"));
}

#[test]
fn failed_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[flux]\nfamily = \"burgers\"\n[[experiments]]\nkind = \"cell_table\"\np_min = -2.0\np_max = 2.0\nn_points = 9\n\
         oleinik = { p_minus = -1.0, p_plus = 1.0, alpha = 0.5, margin = 10.0 }\n",
    );
    let out = homlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["failed"], 1);
}

#[test]
fn solver_error_exits_3_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    // Abar(p) = p^2/2 never reaches -1.
    let cfg = write_config(
        dir.path(),
        "[flux]\nfamily = \"burgers\"\n[[experiments]]\nkind = \"shock_build\"\nshock = { alpha = -1.0 }\n",
    );
    let out = homlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["errors"], 1);
    assert!(summary["experiments"][0]["error"].is_string());
}

#[test]
fn empty_run_succeeds_and_honours_output_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let from_env = dir.path().join("env");
    let from_flag = dir.path().join("flag");
    let cfg = write_config(dir.path(), "output_dir = \"unused\"\n[flux]\nfamily = \"burgers\"\n");
    let out = homlab(&["run", "--config", cfg.to_str().unwrap()], Some(&from_env));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&from_env.join("summary.json"))["passed"], 0);
    let out = homlab(
        &["run", "--config", cfg.to_str().unwrap(), "--out", from_flag.to_str().unwrap()],
        Some(&from_env),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(from_flag.join("summary.json").exists());
}

#[test]
fn listed_examples_form_a_valid_config() {
    let out = homlab(&["list"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("periodic_convergence"));
    let out = homlab(&["list", "--toml"], None);
    let body = format!("[flux]\nfamily = \"burgers\"\n{}", String::from_utf8_lossy(&out.stdout));
    let cfg = homlab_cli::config::RunConfig::from_toml(&body).unwrap();
    assert_eq!(cfg.experiments.len(), homlab_cli::catalog::catalog().len());
}

#[test]
fn construction_commands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[flux]\nfamily = \"burgers\"\n");
    let csv = dir.path().join("u.csv");
    let out = homlab(
        &[
            "shock-build",
            "--config",
            cfg.to_str().unwrap(),
            "--alpha",
            "0.5",
            "--roots",
            "-1,1",
            "--profile",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["q_left"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(csv_columns(&csv).len() > 100);

    let cells = dir.path().join("cells");
    let out = homlab(
        &["cell-table", "--config", cfg.to_str().unwrap(), "--n-points", "5", "--cells", cells.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().next(), Some("p,alpha,xi0"));
    assert_eq!(text.lines().count(), 6);
    let first = std::fs::read_to_string(cells.join("cell_000.csv")).unwrap();
    assert_eq!(first.lines().next(), Some("y,v"));
    // p = -2 for Burgers: v is constant.
    assert!(csv_columns(&cells.join("cell_000.csv")).iter().all(|r| (r[1] + 2.0).abs() < 1e-10));
}

#[test]
fn uniform_bound_runs_on_a_line_grid_under_the_maximum_principle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[flux]\nfamily = \"burgers\"\n[[experiments]]\nname = \"riemann\"\nkind = \"uniform_bound\"\nt_end = 5.0\n\
         grid = { kind = \"line\", x_left = -10.0, x_right = 10.0, n_cells = 160 }\n\
         initial = { shape = \"step\", at = 0.0, left = 1.0, right = -1.0 }\n\
         params = { boundary = { kind = \"dirichlet\", left = 1.0, right = -1.0 } }\n",
    );
    let out = homlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    // data and traces lie in [-1, 1], so the solution does too
    let report = json(&dir.path().join("riemann/report.json"));
    assert!(report["values"]["running_max"].as_f64().unwrap() <= 1.0 + 1e-12);

    let periodic = std::fs::read_to_string(&cfg).unwrap().replace("kind = \"line\"", "kind = \"periodic\"");
    let cfg = write_config(dir.path(), &periodic);
    let out = homlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}
