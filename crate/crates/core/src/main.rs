use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randcert::guessing::{verify_certificate, Mode};
use randcert::quantum::NoiseKind;
use randcert::sweep::{self, Grid};
use randcert::Error;

#[derive(Parser)]
#[command(
    name = "randcert",
    version,
    about = "Certified randomness rates of noisy singlets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a grid of noise levels and write a CSV.
    Sweep {
        #[arg(long)]
        noise: NoiseKind,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        cases: Vec<u8>,
        #[arg(long, default_value = "0:0.025:1")]
        grid: Grid,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Certify a single noise level.
    Certify {
        #[arg(long)]
        noise: NoiseKind,
        #[arg(long, allow_hyphen_values = true)]
        param: f64,
        #[arg(long)]
        case: u8,
        /// Print the extracted Bell expression.
        #[arg(long)]
        show_dual: bool,
        /// Settings pair `x,y` for cases 1 and 2.
        #[arg(long, value_delimiter = ',')]
        settings: Option<Vec<usize>>,
    },
    /// Write the program of one point in SDPA sparse format.
    Export {
        #[arg(long)]
        noise: NoiseKind,
        #[arg(long, allow_hyphen_values = true)]
        param: f64,
        #[arg(long)]
        case: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Solver { .. } | Error::SandwichViolation { .. } => {
                Failure::Solver(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn mode(case: u8) -> Result<Mode, Failure> {
    Mode::from_case_id(case)
        .ok_or_else(|| Failure::Usage(format!("unknown case {case}, expected 1, 2 or 3")))
}

fn check_param(param: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&param) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("param {param} is outside [0, 1]")))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn companion(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep {
            noise,
            cases,
            grid,
            out,
            jobs,
        } => {
            let mut modes = cases.into_iter().map(mode).collect::<Result<Vec<_>, _>>()?;
            modes.sort();
            modes.dedup();
            let rows = sweep::run_sweep(noise, &grid, &modes, jobs);
            write(&out, &sweep::sweep_csv(&rows))?;
            if modes.contains(&Mode::ChshOnly) && modes.len() > 1 {
                write(&companion(&out, "ratios"), &sweep::ratio_csv(&rows))?;
            }
            let failed = rows
                .iter()
                .filter(|r| r.status.starts_with("failed"))
                .count();
            eprintln!(
                "{} rows written to {} ({failed} failed)",
                rows.len(),
                out.display()
            );
        }
        Command::Certify {
            noise,
            param,
            case,
            show_dual,
            settings,
        } => {
            check_param(param)?;
            let m = mode(case)?;
            let settings = match settings.as_deref() {
                Some([x, y]) if *x < 2 && *y < 2 => Some((*x, *y)),
                Some(_) => {
                    return Err(Failure::Usage(
                        "--settings takes x,y with x, y in {0, 1}".into(),
                    ))
                }
                None => None,
            };
            let point = sweep::certify_point(noise, param, m, settings)?;
            let r = &point.row;
            println!("noise      {}", r.noise);
            println!("param      {}", r.param);
            println!("case       {}", r.case.case_id());
            println!("settings   {}", r.settings);
            println!("chsh       {:.12}", r.chsh);
            println!("g_upper    {:.12}", r.guessing_upper);
            println!("hmin_bits  {:.12}", r.hmin_bits);
            println!("gap        {:.3e}", r.gap);
            println!("status     {}", r.status);
            println!("iterations {}", point.result.iterations);
            if show_dual {
                let cert = &point.result.certificate;
                let names = ["A0", "A1", "B0", "B1", "A0B0", "A0B1", "A1B0", "A1B1"];
                for (n, c) in names.iter().zip(cert.coefficient_vector()) {
                    println!("dual {n:<5}{c:+.12}");
                }
                println!("dual offset{:+.12}", cert.offset);
                let check = verify_certificate(cert, &point.spec);
                println!(
                    "certificate {} (min eigenvalue {:.3e}, bound {:.12})",
                    if check.valid { "verified" } else { "rejected" },
                    check.worst_eigenvalue,
                    check.certified_bound
                );
            }
        }
        Command::Export {
            noise,
            param,
            case,
            out,
        } => {
            check_param(param)?;
            let objective = sweep::export_point(noise, param, mode(case)?, None, &out)?;
            println!("wrote {}", out.display());
            println!("internal objective {objective:.12}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}
