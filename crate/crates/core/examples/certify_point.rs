//! Certify one noise level in all three cases.
//!
//! `cargo run --release --example certify_point -- white 0.9`

use randcert::guessing::Mode;
use randcert::quantum::NoiseKind;
use randcert::sweep::certify_point;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let noise: NoiseKind = args.next().as_deref().unwrap_or("white").parse()?;
    let param: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.9);

    for case in Mode::ALL {
        let p = certify_point(noise, param, case, None)?;
        let r = &p.row;
        println!(
            "case {}  settings {:<5}  G <= {:.8}  H_min = {:.6} bits  ({}, {} iterations)",
            case.case_id(),
            r.settings.to_string(),
            r.guessing_upper,
            r.hmin_bits,
            r.status,
            p.result.iterations
        );
    }
    Ok(())
}
