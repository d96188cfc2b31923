//! Extract the Bell expression behind a bound and check it independently
//! of the solver.

use randcert::guessing::{certify, verify_certificate, Mode, ProgramSpec};
use randcert::quantum::NoiseKind;

fn main() -> randcert::Result<()> {
    let observed = NoiseKind::White.behavior(0.9)?;
    for (mode, settings) in [(Mode::FixedFull, Some((0, 0))), (Mode::AllFull, None)] {
        let spec = ProgramSpec::new(mode, observed.clone(), settings)?;
        let r = certify(&spec)?;
        let cert = &r.certificate;
        println!("case {}", mode.case_id());
        let names = ["A0", "A1", "B0", "B1", "A0B0", "A0B1", "A1B0", "A1B1"];
        for (n, c) in names.iter().zip(cert.coefficient_vector()) {
            println!("  {n:<5} {c:+.6}");
        }
        println!("  offset {:+.6}", cert.offset);

        let check = verify_certificate(cert, &spec);
        println!(
            "  valid {}  min eigenvalue {:.2e}  bound {:.8}",
            check.valid, check.worst_eigenvalue, check.certified_bound
        );
    }
    Ok(())
}
