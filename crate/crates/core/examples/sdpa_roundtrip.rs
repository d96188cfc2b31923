//! Export a guessing program in SDPA sparse format, read it back and solve
//! both copies.
//!
//! The written file can be handed to any SDPA-compatible solver, e.g.
//! `python3 tools/solve_sdpa.py /tmp/white_0.9_case2.dat-s`.

use randcert::guessing::{assemble, Mode, ProgramSpec};
use randcert::quantum::NoiseKind;
use randcert::sdp::{self, sdpa};

fn main() -> randcert::Result<()> {
    let spec = ProgramSpec::new(
        Mode::FixedFull,
        NoiseKind::White.behavior(0.9)?,
        Some((0, 0)),
    )?;
    let program = assemble(&spec)?;
    let text = sdpa::export_sdpa(&program.problem);
    let path = std::env::temp_dir().join("white_0.9_case2.dat-s");
    std::fs::write(&path, &text)?;
    println!("wrote {} ({} bytes)", path.display(), text.len());

    let back = sdpa::import_sdpa(&std::fs::read_to_string(&path)?)?;
    println!("blocks {}  variables {}", back.blocks.len(), back.num_vars);

    let a = sdp::solve(&program.problem, 1e-8)?;
    let b = sdp::solve(&back, 1e-8)?;
    println!("original  {:.10} ({})", a.primal_objective, a.status);
    println!("reimport  {:.10} ({})", b.primal_objective, b.status);
    Ok(())
}
