use clap::{Parser, Subcommand};
use homlab::cell::homogenized_flux_table;
use homlab_cli::catalog::catalog;
use homlab_cli::config::{ConfigError, RunConfig};
use homlab_cli::exit;
use homlab_cli::runner::{output_dir, run};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "homlab", version, about = "Periodic homogenization experiments for viscous conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides HOMLAB_OUT and `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List experiment kinds, or print a config with one example of each.
    List {
        #[arg(long)]
        toml: bool,
    },
    /// Print `p, alpha, xi0` for the flux of a config as CSV; with
    /// `--cells`, also write each cell solution as `<dir>/cell_<i>.csv`
    /// with columns `y, v`.
    CellTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        p_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        p_max: f64,
        #[arg(long, default_value_t = 41)]
        n_points: usize,
        #[arg(long)]
        cells: Option<PathBuf>,
    },
    /// Build a standing shock for the flux of a config; prints its summary
    /// as JSON and, with `--profile`, writes `x, u, v_lower, v_upper` CSV.
    ShockBuild {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Comma-separated means of the end states.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        roots: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        xi0: Option<f64>,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed, jobs } => cmd_run(&config, out.as_deref(), seed, jobs),
        Command::List { toml } => cmd_list(toml),
        Command::CellTable {
            config,
            p_min,
            p_max,
            n_points,
            cells,
        } => cmd_cell_table(&config, p_min, p_max, n_points, cells.as_deref()),
        Command::ShockBuild {
            config,
            alpha,
            roots,
            xi0,
            profile,
        } => cmd_shock_build(&config, alpha, roots, xi0, profile.as_deref()),
    };
    ExitCode::from(code as u8)
}

fn load(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e: ConfigError| {
        eprintln!("config error: {e}");
        exit::CONFIG
    })
}

fn solver_error(e: homlab::Error) -> i32 {
    eprintln!("error: {e}");
    exit::SOLVER
}

fn cmd_run(path: &Path, out: Option<&Path>, seed: Option<u64>, jobs: Option<usize>) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if jobs == Some(0) {
        eprintln!("config error: invalid value for `--jobs`: must be at least 1");
        return exit::CONFIG;
    }
    let env = std::env::var("HOMLAB_OUT").ok();
    let out = output_dir(out, env.as_deref(), &cfg);
    let seed = seed.unwrap_or(cfg.seed);
    match run(&cfg, &out, seed, jobs) {
        Ok(summary) => {
            for o in &summary.experiments {
                let status = match o.status {
                    homlab_cli::runner::Status::Passed => "PASS ",
                    homlab_cli::runner::Status::Failed => "FAIL ",
                    homlab_cli::runner::Status::Error => "ERROR",
                };
                println!("{status} {} ({})", o.name, o.kind);
                for c in &o.failed {
                    println!("      {c}");
                }
                if let Some(e) = &o.error {
                    println!("      {e}");
                }
            }
            println!(
                "{} passed, {} failed, {} errors; results in {}",
                summary.passed,
                summary.failed,
                summary.errors,
                out.display()
            );
            summary.exit_code()
        }
        Err(e) => solver_error(e),
    }
}

fn cmd_list(as_toml: bool) -> i32 {
    let entries = catalog();
    if as_toml {
        let table: Vec<_> = entries.iter().map(|e| e.example.clone()).collect();
        #[derive(serde::Serialize)]
        struct Examples {
            experiments: Vec<homlab_cli::config::ExperimentSpec>,
        }
        match toml::to_string(&Examples { experiments: table }) {
            Ok(s) => print!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return exit::SOLVER;
            }
        }
    } else {
        for e in &entries {
            println!("{:<22} {}", e.name, e.anchor);
            println!("{:<22} {}", "", e.summary);
        }
    }
    exit::OK
}

fn cmd_cell_table(path: &Path, p_min: f64, p_max: f64, n_points: usize, cells: Option<&Path>) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let flux = match cfg.flux.build() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit::CONFIG;
        }
    };
    match homogenized_flux_table(&flux, p_min, p_max, n_points, &cfg.tolerances.cell()) {
        Ok(table) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "p,alpha,xi0");
            for [p, a, xi] in table.rows() {
                let _ = writeln!(out, "{p},{a},{xi}");
            }
            if let Some(dir) = cells {
                if let Err(e) = write_cells(&table, dir) {
                    return solver_error(e);
                }
            }
            exit::OK
        }
        Err(e) => solver_error(e),
    }
}

fn write_cells(table: &homlab::cell::HomogenizedFluxTable, dir: &Path) -> homlab::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| homlab::Error::Io(format!("{}: {e}", dir.display())))?;
    let columns = ["y".to_string(), "v".to_string()];
    for (i, [p, ..]) in table.rows().enumerate() {
        let cell = table.solve(p)?;
        let rows: Vec<Vec<f64>> = cell.grid.iter().zip(&cell.values).map(|(&y, &v)| vec![y, v]).collect();
        homlab::io::write_csv(dir.join(format!("cell_{i:03}.csv")), &columns, &rows)?;
    }
    Ok(())
}

fn cmd_shock_build(path: &Path, alpha: f64, roots: Option<Vec<f64>>, xi0: Option<f64>, profile: Option<&Path>) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let spec = homlab_cli::config::ExperimentSpec {
        name: Some("shock".into()),
        grid: None,
        kind: homlab_cli::config::ExperimentKind::ShockBuild {
            shock: homlab_cli::config::ShockSpec {
                alpha,
                roots,
                p_range: (-4.0, 4.0),
                table_points: 41,
                xi0,
            },
        },
    };
    let flux = match cfg.flux.build() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit::CONFIG;
        }
    };
    match homlab_cli::runner::run_experiment(&cfg, &flux, &spec, cfg.seed) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.values).unwrap_or_default());
            if let Some(p) = profile {
                if let Err(e) = homlab::io::write_series(p, &report.series["profile"]) {
                    return solver_error(e);
                }
            }
            if report.passed() {
                exit::OK
            } else {
                exit::FAILED
            }
        }
        Err(e) => solver_error(e),
    }
}
