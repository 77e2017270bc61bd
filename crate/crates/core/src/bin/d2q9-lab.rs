use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d2q9_lab::experiments::{dispersion_sweep, run_comparison, ConvergenceReport, SolverKind};
use d2q9_lab::io::{
    load_preset, parse_config_with, write_field_csv, write_report_csv, write_spectrum_csv,
    write_trace_csv, Overrides, RunConfig, PRESETS,
};
use d2q9_lab::LabError;

const OUT_ENV: &str = "D2Q9_LAB_OUT";

/// D2Q9 lattice Boltzmann experiments against heat and damped-acoustic references.
#[derive(Parser)]
#[command(name = "d2q9-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run both solvers on every mesh and write final fields and traces.
    Run(Source),
    /// Mesh sweep with error norms and fitted convergence orders.
    Convergence(Source),
    /// Lattice and model decay rates over the configured wave vectors.
    Dispersion(Source),
    /// List shipped presets, or print one.
    Presets {
        /// Preset to print.
        name: Option<String>,
    },
}

#[derive(Args)]
struct Source {
    /// Configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides the config and D2Q9_LAB_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated mesh sizes replacing the configured ones.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    /// Allow meshes above the default cap and append the long mesh list.
    #[arg(long)]
    long: bool,
    /// Comma-separated solver pair, e.g. `lbm,haway`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    solvers: Option<Vec<SolverKind>>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(_) | LabError::Parameter { .. } | LabError::Infeasible { .. } => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(src: &Source) -> Result<RunConfig, Failure> {
    let solvers = match &src.solvers {
        None => None,
        Some(v) if v.len() == 2 => Some((v[0], v[1])),
        Some(v) => {
            return Err(Failure::Validation(format!(
                "--solvers needs exactly two solvers, got {}",
                v.len()
            )))
        }
    };
    let out_dir = src.out.clone().or_else(|| {
        std::env::var_os(OUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let overrides = Overrides {
        meshes: src.meshes.clone(),
        long: src.long,
        out_dir,
        solvers,
    };
    match (&src.config, &src.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            parse_config_with(&text, &overrides).map_err(|e| match e {
                LabError::Config(_) => Failure::Validation(format!("{}: {e}", path.display())),
                other => other.into(),
            })
        }
        (None, Some(name)) => load_preset(name, &overrides).map_err(|e| match e {
            LabError::Domain(msg) => Failure::Validation(msg),
            other => other.into(),
        }),
        (None, None) => Err(Failure::Validation("give --config or --preset".into())),
    }
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn print_report(report: &ConvergenceReport) {
    println!("{}: {}", report.spec.name, report.solver_pair());
    println!("{}", report.spec.time_policy());
    println!(
        "{:>6} {:>9} {:>12} {:>7} {:>12} {:>12} {:>12}",
        "n", "sJ", "dt", "steps", "final_time", "l2", "linf"
    );
    for row in &report.rows {
        match (&row.plan, &row.norms, &row.failure) {
            (Some(p), Some(n), None) => println!(
                "{:>6} {:>9.5} {:>12.5e} {:>7} {:>12.5} {:>12.4e} {:>12.4e}",
                row.n, p.s_j, p.dt, p.steps, p.final_time, n.l2, n.linf
            ),
            (_, _, Some(msg)) => println!("{:>6} failed: {msg}", row.n),
            _ => println!("{:>6} no result", row.n),
        }
    }
    match (report.order_l2, report.order_linf) {
        (Some(a), Some(b)) => println!("order l2 = {a:.3}, linf = {b:.3}"),
        _ => println!(
            "order: {}",
            report.order_note.as_deref().unwrap_or("not available")
        ),
    }
}

fn failed_rows(report: &ConvergenceReport) -> Result<(), Failure> {
    let failed: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|m| format!("n = {}: {m}", r.n)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(failed.join("; ")))
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Presets { name: None } => {
            for p in PRESETS {
                println!("{:<14} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Presets { name: Some(name) } => {
            let p =
                d2q9_lab::io::find_preset(&name).map_err(|e| Failure::Validation(e.to_string()))?;
            print!("{}", p.text);
            Ok(())
        }
        Command::Run(src) => {
            let config = load(&src)?;
            let report = run_comparison(&config.to_spec())?;
            let dir = &config.out_dir;
            for row in &report.rows {
                for run in [&row.a, &row.b].into_iter().flatten() {
                    let path = dir.join(format!("field_{}_n{}.csv", run.kind.name(), row.n));
                    write_field_csv(&run.field, &path)?;
                    written(&path);
                }
            }
            if config.trace_samples > 0 {
                let path = dir.join("trace.csv");
                write_trace_csv(&report, &path)?;
                written(&path);
            }
            print_report(&report);
            failed_rows(&report)
        }
        Command::Convergence(src) => {
            let config = load(&src)?;
            let report = run_comparison(&config.to_spec())?;
            let path = config.out_dir.join("report.csv");
            write_report_csv(&report, &path)?;
            written(&path);
            if config.trace_samples > 0 {
                let path = config.out_dir.join("trace.csv");
                write_trace_csv(&report, &path)?;
                written(&path);
            }
            print_report(&report);
            failed_rows(&report)
        }
        Command::Dispersion(src) => {
            let config = load(&src)?;
            let rows = dispersion_sweep(&config.to_spec(), &config.dispersion_vectors())?;
            let path = config.out_dir.join("spectrum.csv");
            write_spectrum_csv(&rows, &path)?;
            written(&path);
            for row in &rows {
                for s in &row.spectra {
                    let slowest = s.lbm_rates.first().map(|r| r.gamma).unwrap_or_default();
                    println!(
                        "n = {:>5}  k = ({}, {})  slowest lattice rate {:.6e}{:+.6e}i  heat {:.6e}  {}",
                        row.plan.n,
                        s.k.kx,
                        s.k.ky,
                        slowest.re,
                        slowest.im,
                        s.heat_rate,
                        s.mode_class.name()
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
