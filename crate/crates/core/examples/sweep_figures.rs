//! Rate curves for both noise models, written as CSV.
//!
//! `cargo run --release --example sweep_figures -- 0.7:0.05:1 out/`
//! Case 3 dominates the runtime; a coarse grid keeps this to a few minutes.

use std::path::PathBuf;

use randcert::guessing::Mode;
use randcert::quantum::NoiseKind;
use randcert::sweep::{ratio_comparison_csv, ratio_csv, run_sweep, sweep_csv, Grid};

fn main() -> randcert::Result<()> {
    let mut args = std::env::args().skip(1);
    let grid: Grid = args.next().as_deref().unwrap_or("0.7:0.05:1").parse()?;
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let mut sweeps = Vec::new();
    for noise in [NoiseKind::White, NoiseKind::Dephasing] {
        let rows = run_sweep(noise, &grid, &Mode::ALL, jobs);
        std::fs::write(dir.join(format!("{noise}.csv")), sweep_csv(&rows))?;
        std::fs::write(dir.join(format!("{noise}_ratios.csv")), ratio_csv(&rows))?;
        for r in rows.iter().filter(|r| r.case == Mode::AllFull) {
            println!("{noise:<9} {:.3}  case 3 H_min {:.5}", r.param, r.hmin_bits);
        }
        sweeps.push(rows);
    }
    std::fs::write(
        dir.join("ratio_comparison.csv"),
        ratio_comparison_csv(&sweeps[0], &sweeps[1]),
    )?;
    println!("CSV files written to {}", dir.display());
    Ok(())
}
